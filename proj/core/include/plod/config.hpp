// Copyright 2026 The PLOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace plod {

/// A value from the supported TOML subset: booleans, integers, floats,
/// basic/literal strings and (possibly nested, possibly multi-line) arrays.
/// Inline tables, dates and multi-line strings are rejected.
struct TomlValue {
  using Array = std::vector<TomlValue>;
  std::variant<bool, std::int64_t, double, std::string, Array> v;

  bool as_bool(std::string_view key) const;
  std::int64_t as_int(std::string_view key) const;
  /// Integers convert to double.
  double as_double(std::string_view key) const;
  const std::string& as_string(std::string_view key) const;
  const Array& as_array(std::string_view key) const;

  /// A scalar is promoted to a one-element list.
  std::vector<double> as_double_list(std::string_view key) const;
  std::vector<std::string> as_string_list(std::string_view key) const;
};

/// Keys are flattened with their table prefix, e.g. "localization.window".
using TomlTable = std::map<std::string, TomlValue, std::less<>>;

/// Throws Error(kConfigError) with the offending line number.
TomlTable parse_toml(std::string_view text);
TomlTable load_toml(const std::filesystem::path& path);

}  // namespace plod
