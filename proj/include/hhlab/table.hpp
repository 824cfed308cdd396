#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hhlab {

inline constexpr std::string_view kVersion = "0.1.0";

/// Empty, integer, real or text.
using Cell = std::variant<std::monostate, long long, double, std::string>;

std::string format_cell(const Cell& cell);

class ResultTable {
 public:
  explicit ResultTable(std::vector<std::string> schema) : schema_(std::move(schema)) {}

  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t column(std::string_view name) const;

  /// Throws InvalidArgument when the row width differs from the schema.
  void add_row(std::vector<Cell> row);
  void append(const ResultTable& other);

  /// Lines written before the header, each prefixed with "# ".
  void add_provenance(std::string line) { provenance_.push_back(std::move(line)); }
  const std::vector<std::string>& provenance() const { return provenance_; }

  /// Reals use %.17g so that a rerun is byte-identical and round-trips.
  void write_csv(std::ostream& os) const;
  void write_aligned(std::ostream& os) const;

 private:
  std::vector<std::string> schema_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::string> provenance_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace hhlab
