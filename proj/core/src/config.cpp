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

#include "plod/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "plod/error.hpp"

namespace plod {

namespace {

[[noreturn]] void type_error(std::string_view key, const char* want) {
  raise(ErrorCode::kConfigError, "config key '" + std::string(key) + "' must be " + want);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  TomlTable run() {
    TomlTable table;
    std::string prefix;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        std::string name = dotted_key();
        skip_ws();
        expect(']');
        end_of_line();
        prefix = name + ".";
        continue;
      }
      std::string key = prefix + dotted_key();
      skip_ws();
      expect('=');
      skip_ws();
      TomlValue value = parse_value();
      end_of_line();
      if (!table.emplace(key, std::move(value)).second) fail("duplicate key '" + key + "'");
    }
    return table;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    raise(ErrorCode::kConfigError, "config line " + std::to_string(line_) + ": " + msg);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void newline() {
    if (!eof() && peek() == '\r') ++pos_;
    if (!eof() && peek() == '\n') {
      ++pos_;
      ++line_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\n' || peek() == '\r') {
        newline();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n' && peek() != '\r') fail("unexpected text after value");
    newline();
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string dotted_key() {
    std::string key = peek() == '"' ? basic_string() : bare_key();
    skip_ws();
    while (!eof() && peek() == '.') {
      ++pos_;
      skip_ws();
      key += "." + (peek() == '"' ? basic_string() : bare_key());
      skip_ws();
    }
    return key;
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      switch (const char e = s_[pos_++]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    const std::size_t end = s_.find_first_of("'\n", pos_);
    if (end == std::string_view::npos || s_[end] != '\'') fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  void skip_array_space() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r')) {
        newline();
        continue;
      }
      return;
    }
  }

  TomlValue parse_array() {
    expect('[');
    TomlValue::Array items;
    while (true) {
      skip_array_space();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        break;
      }
      items.push_back(parse_value());
      skip_array_space();
      if (!eof() && peek() == ',') {
        ++pos_;
        continue;
      }
      skip_array_space();
      expect(']');
      break;
    }
    return TomlValue{std::move(items)};
  }

  TomlValue parse_number() {
    const std::size_t start = pos_;
    while (!eof() && std::string_view("+-0123456789.eE_infa").find(peek()) != std::string_view::npos) {
      ++pos_;
    }
    std::string tok;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    if (!tok.empty() && tok.front() == '+') tok.erase(0, 1);
    if (tok == "inf" || tok == "-inf" || tok == "nan" || tok == "-nan") fail("non-finite numbers are not allowed");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (is_float) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e) fail("malformed number '" + tok + "'");
      return TomlValue{v};
    }
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail("malformed integer '" + tok + "'");
    return TomlValue{v};
  }

  TomlValue parse_value() {
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') {
      if (s_.substr(pos_, 3) == "\"\"\"") fail("multi-line strings are not supported");
      return TomlValue{basic_string()};
    }
    if (c == '\'') return TomlValue{literal_string()};
    if (c == '[') return parse_array();
    if (c == '{') fail("inline tables are not supported");
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return TomlValue{true};
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return TomlValue{false};
    }
    return parse_number();
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

bool TomlValue::as_bool(std::string_view key) const {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  type_error(key, "a boolean");
}

std::int64_t TomlValue::as_int(std::string_view key) const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  type_error(key, "an integer");
}

double TomlValue::as_double(std::string_view key) const {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  type_error(key, "a number");
}

const std::string& TomlValue::as_string(std::string_view key) const {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  type_error(key, "a string");
}

const TomlValue::Array& TomlValue::as_array(std::string_view key) const {
  if (const auto* a = std::get_if<Array>(&v)) return *a;
  type_error(key, "an array");
}

std::vector<double> TomlValue::as_double_list(std::string_view key) const {
  if (const auto* a = std::get_if<Array>(&v)) {
    std::vector<double> out;
    for (const TomlValue& item : *a) out.push_back(item.as_double(key));
    return out;
  }
  return {as_double(key)};
}

std::vector<std::string> TomlValue::as_string_list(std::string_view key) const {
  if (const auto* a = std::get_if<Array>(&v)) {
    std::vector<std::string> out;
    for (const TomlValue& item : *a) out.push_back(item.as_string(key));
    return out;
  }
  return {as_string(key)};
}

TomlTable parse_toml(std::string_view text) { return Parser(text).run(); }

TomlTable load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kConfigError, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace plod
