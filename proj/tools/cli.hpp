#pragma once

#include <iosfwd>

namespace hiermc::cli {

/// Runs the command line tool. Returns 0 on success, 2 for configuration
/// errors, 3 for data errors and 4 for numerical failures; errors are
/// written to `err` as a JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hiermc::cli
