//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DATA_CONFIG_H_
#define DRP_DATA_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace drp::data {

// A value from the TOML subset: string, integer, float, boolean or a flat
// array of those.
struct ConfigValue {
  enum class Kind { kString, kInt, kFloat, kBool, kArray };
  Kind kind = Kind::kString;
  std::string text;  // normalized TOML spelling, used for hashing
  std::string string_value;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
  std::vector<ConfigValue> items;
};

// Key/value configuration read from a TOML subset: [section] headers,
// key = value lines, '#' comments. Keys are addressed as "section.key".
class Config {
 public:
  static Config Parse(std::string_view text);
  static Config Load(const std::filesystem::path &path);

  // Parses value as a TOML value; anything that is not one is stored as a
  // bare string. Used for command-line overrides.
  void Set(const std::string &key, std::string_view value);

  bool Has(const std::string &key) const { return values_.contains(key); }
  std::string GetString(const std::string &key, const std::string &fallback) const;
  std::int64_t GetInt(const std::string &key, std::int64_t fallback) const;
  double GetDouble(const std::string &key, double fallback) const;
  bool GetBool(const std::string &key, bool fallback) const;
  std::vector<std::int64_t> GetIntArray(const std::string &key,
                                        std::vector<std::int64_t> fallback) const;

  // Sorted "key = value" lines; stable input to the manifest config hash.
  std::string Canonical() const;
  const std::map<std::string, ConfigValue> &values() const { return values_; }

 private:
  std::map<std::string, ConfigValue> values_;
};

}  // namespace drp::data

#endif  // DRP_DATA_CONFIG_H_
