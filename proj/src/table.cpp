#include "hhlab/table.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "hhlab/errors.hpp"

namespace hhlab {

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::size_t ResultTable::column(std::string_view name) const {
  const auto it = std::find(schema_.begin(), schema_.end(), name);
  if (it == schema_.end()) throw InvalidArgument("table has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - schema_.begin());
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != schema_.size()) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, schema has " +
                          std::to_string(schema_.size()));
  }
  rows_.push_back(std::move(row));
}

void ResultTable::append(const ResultTable& other) {
  if (other.schema_ != schema_) throw InvalidArgument("append: schemas differ");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void ResultTable::write_csv(std::ostream& os) const {
  for (const auto& line : provenance_) os << "# " << line << '\n';
  for (std::size_t j = 0; j < schema_.size(); ++j) os << (j ? "," : "") << schema_[j];
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_cell(row[j]);
    os << '\n';
  }
}

void ResultTable::write_aligned(std::ostream& os) const {
  std::vector<std::vector<std::string>> text;
  std::vector<std::size_t> width(schema_.size());
  for (std::size_t j = 0; j < schema_.size(); ++j) width[j] = schema_[j].size();
  for (const auto& row : rows_) {
    auto& out = text.emplace_back();
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::string s = format_cell(row[j]);
      if (const double* d = std::get_if<double>(&row[j])) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", *d);
        s = buf;
      }
      width[j] = std::max(width[j], s.size());
      out.push_back(std::move(s));
    }
  }
  for (const auto& line : provenance_) os << "# " << line << '\n';
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) os << "  ";
      os << cells[j];
      if (j + 1 < cells.size()) os << std::string(width[j] - cells[j].size(), ' ');
    }
    os << '\n';
  };
  emit(schema_);
  for (const auto& row : text) emit(row);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace hhlab
