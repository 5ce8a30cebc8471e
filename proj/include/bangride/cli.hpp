#pragma once

#include <iosfwd>

namespace bangride::cli {

/// Entry point of the bangride tool. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage error (unknown subcommand, flag or problem).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bangride::cli
