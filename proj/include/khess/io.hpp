/**
 * @file io.hpp
 * @brief CSV readers/writers, spec-string parsers and atomic file output.
 */
#pragma once

#include "khess/family.hpp"
#include "khess/radial.hpp"
#include "khess/stability.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace khess::io {

/// Header `r,u,du[,d2u]`; radii must form a valid RadialGrid. ParseError carries the 1-based line.
RadialProfile read_profile_csv(const std::filesystem::path& path);
std::string profile_csv(const RadialProfile& profile);

/// Header `s,g[,gprime]`, s strictly increasing.
Nonlinearity read_g_table_csv(const std::filesystem::path& path);
std::string g_table_csv(const Nonlinearity::Table& table);

/// `const:<c>`, `exp:<lambda>`, `power:<lambda>:<p>`, `table:<path>`.
Nonlinearity parse_nonlinearity(const std::string& spec);

/// `h=zero`, `h=const:<a>`, `h=pow:<a>:<b>`, `h=table:<path>` (the `h=` prefix is optional).
/// A table file has header `r,h`.
HFunction parse_h(const std::string& spec);

/// Header `center,width`.
std::vector<Bump> read_bump_csv(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace khess::io
