#pragma once

#include <string>

namespace etica {

// Verbosity is read once from the ETICA_LOG environment variable:
// unset/"0"/"quiet" = silent, "1"/"info" = progress notes, "2"/"debug" = chatty.
// Logging never changes simulation results.
int log_verbosity();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace etica
