#pragma once

#include <ostream>

namespace hostility {

/// Entry point of the `hostility` command. Returns 0 on success, 1 for
/// configuration errors and 2 for data errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hostility
