#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace areaest::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success and 2 on any usage, validation or estimation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace areaest::cli
