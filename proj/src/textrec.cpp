#include "ngcp/textrec.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ngcp {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

bool needs_quotes(std::string_view v) {
  if (v.empty()) return true;
  return std::any_of(v.begin(), v.end(),
                     [](char c) { return is_space(c) || c == '"' || c == '#' || c == '\\'; });
}

}  // namespace

bool Record::has(std::string_view key) const { return find(key) != nullptr; }

const std::string* Record::find(std::string_view key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

const std::string& Record::get(std::string_view key) const {
  if (const auto* v = find(key)) return *v;
  throw SchemaError(where() + ": '" + kind + "' record missing key '" + std::string(key) + "'");
}

std::string Record::get_or(std::string_view key, std::string_view fallback) const {
  if (const auto* v = find(key)) return *v;
  return std::string(fallback);
}

long long Record::get_int(std::string_view key) const {
  const auto& v = get(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw SchemaError(where() + ": key '" + std::string(key) + "' is not an integer: " + v);
  return out;
}

long long Record::get_int_or(std::string_view key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<std::string> Record::get_list(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr || v->empty() || *v == "-") return {};
  return split(*v, ',');
}

void Record::expect_keys(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : fields) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw SchemaError(where() + ": unknown key '" + k + "' in '" + kind + "' record");
  }
}

Record& Record::set(std::string key, std::string value) {
  for (auto& [k, v] : fields)
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

std::string Record::where() const { return doc + ":" + std::to_string(line); }

std::vector<Record> parse_records(std::string_view text, std::string_view doc) {
  std::vector<Record> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < line.size() && is_space(line[i])) ++i;
    };
    skip_ws();
    if (i >= line.size() || line[i] == '#') {
      if (eol == text.size()) break;
      continue;
    }

    Record rec;
    rec.doc = std::string(doc);
    rec.line = line_no;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    rec.kind = std::string(line.substr(start, i - start));
    if (rec.kind.find('=') != std::string::npos)
      throw SchemaError(rec.where() + ": record must start with a kind, got '" + rec.kind + "'");

    while (true) {
      skip_ws();
      if (i >= line.size() || line[i] == '#') break;
      std::size_t kstart = i;
      while (i < line.size() && line[i] != '=' && !is_space(line[i])) ++i;
      if (i >= line.size() || line[i] != '=')
        throw SchemaError(rec.where() + ": expected key=value, got '" +
                          std::string(line.substr(kstart, i - kstart)) + "'");
      std::string key(line.substr(kstart, i - kstart));
      if (key.empty()) throw SchemaError(rec.where() + ": empty key");
      ++i;  // '='
      std::string value;
      if (i < line.size() && line[i] == '"') {
        ++i;
        bool closed = false;
        while (i < line.size()) {
          char c = line[i++];
          if (c == '\\' && i < line.size()) {
            value.push_back(line[i++]);
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            value.push_back(c);
          }
        }
        if (!closed) throw SchemaError(rec.where() + ": unterminated quoted value for '" + key + "'");
      } else {
        std::size_t vstart = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        value = std::string(line.substr(vstart, i - vstart));
      }
      if (rec.has(key)) throw SchemaError(rec.where() + ": duplicate key '" + key + "'");
      rec.fields.emplace_back(std::move(key), std::move(value));
    }
    out.push_back(std::move(rec));
    if (eol == text.size()) break;
  }
  return out;
}

std::string format_value(std::string_view value) {
  if (!needs_quotes(value)) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_record(const Record& rec) {
  std::string out = rec.kind;
  for (const auto& [k, v] : rec.fields) {
    out += ' ';
    out += k;
    out += '=';
    out += format_value(v);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace ngcp
