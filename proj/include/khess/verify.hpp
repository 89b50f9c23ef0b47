/**
 * @file verify.hpp
 * @brief Invariant battery behind the `verify` command.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace khess {

struct VerifyOptions {
    int n_max = 8;               ///< largest dimension for the brute-force minor oracle
    std::uint64_t seed = 42;
    double grid_min = 1e-8;
    std::size_t grid_nodes = 4096;
    /// Deliberate fault for testing the harness: "" or "euler".
    std::string inject;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

std::vector<CheckResult> run_verify(const VerifyOptions& options);

}  // namespace khess
