#pragma once

#include <iosfwd>

namespace mixbn::cli {

/// Runs one command line. Returns 0 on success, 1 on bad input, 2 on an
/// unrecoverable numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixbn::cli
