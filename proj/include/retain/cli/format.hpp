#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "retain/json.hpp"

namespace retain::cli {

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) {
      if (!s.empty()) s += ",";
      s += x.is_primitive() ? scalar_text(x) : x.dump();
    }
    return s;
  }
  return v.dump();
}

inline bool is_table(const Json& v) {
  return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_object(); });
}

// Aligned columns from the scalar fields of the first row.
inline void print_table(std::ostream& out, const Json& rows, const std::string& indent) {
  std::vector<std::string> cols;
  for (const auto& [k, v] : rows.front().items()) {
    if (!v.is_object() && !is_table(v)) cols.push_back(k);
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) width[c] = cols[c].size();
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      line.push_back(r.contains(cols[c]) ? scalar_text(r[cols[c]]) : "");
      width[c] = std::max(width[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& line) {
    out << indent;
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << line[c];
      if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
    }
    out << "\n";
  };
  emit(cols);
  for (const auto& line : cells) emit(line);
}

inline void print_human(std::ostream& out, const Json& j, const std::string& indent = "") {
  if (is_table(j)) {
    print_table(out, j, indent);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() || is_table(v)) {
        out << indent << k << ":\n";
        print_human(out, v, indent + "  ");
      } else {
        out << indent << k << ": " << scalar_text(v) << "\n";
      }
    }
  } else if (j.is_array() && j.empty()) {
    out << indent << "(none)\n";
  } else {
    out << indent << scalar_text(j) << "\n";
  }
}

}  // namespace retain::cli
