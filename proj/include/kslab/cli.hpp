#pragma once

#include <iosfwd>

namespace kslab {

/// Entry point of the kslab command line tool. Exit status: 0 success, 1 usage or
/// validation error, 2 run failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kslab
