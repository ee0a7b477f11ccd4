//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/data/config.h"

#include <charconv>
#include <optional>

#include "drp/common/csv.h"
#include "drp/common/error.h"

namespace drp::data {
namespace {

std::string_view Trim(std::string_view s) {
  const auto start = s.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(start, end - start + 1);
}

std::string Quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

class ValueParser {
 public:
  explicit ValueParser(std::string_view s) : s_(s) {}

  std::optional<ConfigValue> ParseAll() {
    auto v = ParseValue();
    SkipSpace();
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  void SkipSpace() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::optional<ConfigValue> ParseValue() {
    SkipSpace();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c = s_[pos_];
    if (c == '"') return ParseString();
    if (c == '[') return ParseArray();
    return ParseScalar();
  }

  std::optional<ConfigValue> ParseString() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) return std::nullopt;
        const char e = s_[pos_++];
        if (e == 'n') {
          c = '\n';
        } else if (e == 't') {
          c = '\t';
        } else if (e == '"' || e == '\\') {
          c = e;
        } else {
          return std::nullopt;
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) return std::nullopt;
    ++pos_;
    ConfigValue v;
    v.kind = ConfigValue::Kind::kString;
    v.string_value = out;
    v.text = Quote(out);
    return v;
  }

  std::optional<ConfigValue> ParseArray() {
    ++pos_;
    ConfigValue v;
    v.kind = ConfigValue::Kind::kArray;
    v.text = "[";
    SkipSpace();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      v.text += "]";
      return v;
    }
    while (true) {
      auto item = ParseValue();
      if (!item || item->kind == ConfigValue::Kind::kArray) return std::nullopt;
      if (!v.items.empty()) v.text += ", ";
      v.text += item->text;
      v.items.push_back(std::move(*item));
      SkipSpace();
      if (pos_ >= s_.size()) return std::nullopt;
      if (s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        break;
      }
      return std::nullopt;
    }
    v.text += "]";
    return v;
  }

  std::optional<ConfigValue> ParseScalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    const std::string_view token = s_.substr(start, pos_ - start);
    ConfigValue v;
    if (token == "true" || token == "false") {
      v.kind = ConfigValue::Kind::kBool;
      v.bool_value = token == "true";
      v.text = std::string(token);
      return v;
    }
    std::string digits;
    for (char c : token) {
      if (c != '_') digits.push_back(c);
    }
    std::int64_t i = 0;
    const char *first = digits.data() + (!digits.empty() && digits[0] == '+' ? 1 : 0);
    auto res = std::from_chars(first, digits.data() + digits.size(), i);
    if (!digits.empty() && res.ec == std::errc() && res.ptr == digits.data() + digits.size()) {
      v.kind = ConfigValue::Kind::kInt;
      v.int_value = i;
      v.float_value = static_cast<double>(i);
      v.text = std::to_string(i);
      return v;
    }
    if (auto d = TryParseDouble(digits)) {
      v.kind = ConfigValue::Kind::kFloat;
      v.float_value = *d;
      v.text = FormatDouble(*d);
      return v;
    }
    return std::nullopt;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

const ConfigValue *Find(const std::map<std::string, ConfigValue> &values, const std::string &key) {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

}  // namespace

Config Config::Parse(std::string_view text) {
  Config config;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    // Strip comments outside strings.
    bool quoted = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"' && (i == 0 || raw[i - 1] != '\\')) quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    const std::string_view line = Trim(raw.substr(0, cut));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw DataError(where + ": malformed section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(where + ": expected key = value");
    const std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) throw DataError(where + ": empty key");
    auto value = ValueParser(Trim(line.substr(eq + 1))).ParseAll();
    if (!value) throw DataError(where + ": malformed value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (config.values_.contains(full)) throw DataError(where + ": duplicate key " + full);
    config.values_[full] = std::move(*value);
  }
  return config;
}

Config Config::Load(const std::filesystem::path &path) {
  std::string text;
  for (const std::string &line : ReadLines(path)) text += line + "\n";
  return Parse(text);
}

void Config::Set(const std::string &key, std::string_view value) {
  auto parsed = ValueParser(Trim(value)).ParseAll();
  if (!parsed) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::kString;
    v.string_value = std::string(value);
    v.text = Quote(value);
    parsed = std::move(v);
  }
  values_[key] = std::move(*parsed);
}

std::string Config::GetString(const std::string &key, const std::string &fallback) const {
  const ConfigValue *v = Find(values_, key);
  if (v == nullptr) return fallback;
  if (v->kind == ConfigValue::Kind::kString) return v->string_value;
  return v->text;
}

std::int64_t Config::GetInt(const std::string &key, std::int64_t fallback) const {
  const ConfigValue *v = Find(values_, key);
  if (v == nullptr) return fallback;
  if (v->kind != ConfigValue::Kind::kInt) throw DataError("config key " + key + " must be an integer");
  return v->int_value;
}

double Config::GetDouble(const std::string &key, double fallback) const {
  const ConfigValue *v = Find(values_, key);
  if (v == nullptr) return fallback;
  if (v->kind != ConfigValue::Kind::kInt && v->kind != ConfigValue::Kind::kFloat) {
    throw DataError("config key " + key + " must be a number");
  }
  return v->float_value;
}

bool Config::GetBool(const std::string &key, bool fallback) const {
  const ConfigValue *v = Find(values_, key);
  if (v == nullptr) return fallback;
  if (v->kind != ConfigValue::Kind::kBool) throw DataError("config key " + key + " must be true or false");
  return v->bool_value;
}

std::vector<std::int64_t> Config::GetIntArray(const std::string &key,
                                              std::vector<std::int64_t> fallback) const {
  const ConfigValue *v = Find(values_, key);
  if (v == nullptr) return fallback;
  if (v->kind != ConfigValue::Kind::kArray) throw DataError("config key " + key + " must be an array");
  std::vector<std::int64_t> out;
  for (const auto &item : v->items) {
    if (item.kind != ConfigValue::Kind::kInt) {
      throw DataError("config key " + key + " must hold integers");
    }
    out.push_back(item.int_value);
  }
  return out;
}

std::string Config::Canonical() const {
  std::string out;
  for (const auto &[key, value] : values_) out += key + " = " + value.text + "\n";
  return out;
}

}  // namespace drp::data
