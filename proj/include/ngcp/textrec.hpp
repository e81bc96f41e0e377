#pragma once

// Line-oriented record format shared by every input and report document.
//
//   # comment
//   <kind> key=value key="quoted value" ...
//
// Bare values run to the next whitespace. Quoted values support \" and \\.
// See docs/formats.md for the per-document schemas.

#include <array>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ngcp/errors.hpp"

namespace ngcp {

struct Record {
  std::string kind;
  std::string doc;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> fields;

  bool has(std::string_view key) const;
  const std::string* find(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string_view fallback) const;
  long long get_int(std::string_view key) const;
  long long get_int_or(std::string_view key, long long fallback) const;
  std::vector<std::string> get_list(std::string_view key) const;

  /// Throws SchemaError naming the first key not in `allowed`.
  void expect_keys(std::initializer_list<std::string_view> allowed) const;

  Record& set(std::string key, std::string value);

  std::string where() const;
};

std::vector<Record> parse_records(std::string_view text, std::string_view doc = "<input>");
std::string format_record(const Record& rec);
std::string format_value(std::string_view value);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Name table for enums that round-trip through documents.
template <class E, std::size_t N>
using EnumTable = std::array<std::pair<E, std::string_view>, N>;

template <class E, std::size_t N>
std::string_view enum_name(const EnumTable<E, N>& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <class E, std::size_t N>
bool enum_parse(const EnumTable<E, N>& table, std::string_view name, E& out) {
  for (const auto& [v, n] : table)
    if (n == name) {
      out = v;
      return true;
    }
  return false;
}

}  // namespace ngcp
