#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace areaest::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 records: comma separated, double-quoted fields may contain
/// commas, doubled quotes and newlines. Blank lines are skipped.
std::vector<Row> parse(std::istream& in);
std::vector<Row> read_file(const std::string& path);

/// Case-insensitive column lookup built from a header row.
class Columns {
 public:
  explicit Columns(const Row& header);
  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws CsvError naming the missing column.
  std::size_t require(std::string_view name) const;

 private:
  std::map<std::string, std::size_t> index_;
};

std::string escape(std::string_view field);
std::string trim(std::string_view s);
std::string lower(std::string_view s);

}  // namespace areaest::csv
