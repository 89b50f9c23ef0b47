/**
 * @file cli.hpp
 * @brief Command-line front end: solve, check, family, verify.
 *
 * Exit codes: 0 success, 1 verify found failing checks, 2 usage, input or solver error.
 */
#pragma once

#include <iosfwd>

namespace khess::cli {

int run(int argc, char** argv);

/// Same as run() with explicit streams (used by tests).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace khess::cli
