#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stolz/error.hpp"
#include "stolz/sequence.hpp"

namespace stolz {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

/// Reads `index,value` lines (1-based, contiguous). An `index,value` header
/// on the first line is skipped; blank lines are ignored.
inline Sequence parse_data_sequence(std::istream& in, const std::string& name) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (line_no == 1 && text == "index,value") continue;

    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
      throw DataFormatError(name + ":" + std::to_string(line_no) +
                                ": expected exactly two fields 'index,value'",
                            line_no);
    }
    const std::string_view index_text = detail::trim(text.substr(0, comma));
    const std::string_view value_text = detail::trim(text.substr(comma + 1));

    Index index = 0;
    auto [iptr, iec] = std::from_chars(index_text.data(),
                                       index_text.data() + index_text.size(), index);
    if (iec != std::errc{} || iptr != index_text.data() + index_text.size()) {
      throw DataFormatError(name + ":" + std::to_string(line_no) + ": malformed index '" +
                                std::string(index_text) + "'",
                            line_no);
    }
    double value = 0.0;
    auto [vptr, vec] = std::from_chars(value_text.data(),
                                       value_text.data() + value_text.size(), value);
    if (vec != std::errc{} || vptr != value_text.data() + value_text.size()) {
      throw DataFormatError(name + ":" + std::to_string(line_no) + ": malformed value '" +
                                std::string(value_text) + "'",
                            line_no);
    }
    const auto expected = static_cast<Index>(values.size()) + 1;
    if (index != expected) {
      throw DataFormatError(name + ":" + std::to_string(line_no) + ": index " +
                                std::to_string(index) + " breaks contiguity (expected " +
                                std::to_string(expected) + ")",
                            line_no);
    }
    values.push_back(value);
  }
  if (values.empty()) throw DataFormatError(name + ": no data rows", line_no);
  return Sequence::from_values(std::move(values), "data:" + name);
}

inline Sequence load_data_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file '" + path + "'");
  return parse_data_sequence(in, path);
}

}  // namespace stolz
