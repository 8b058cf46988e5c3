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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "plod/types.hpp"

namespace plod {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// One row per matrix row, optional header line.
void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Matrix>& m,
                      std::span<const std::string> header = {});
void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m,
                      std::span<const std::string> header = {});

/// Reads a rectangular numeric CSV. A first line that is not numeric is
/// treated as a header and skipped. Throws Error(kParseError) / Error(kIoError).
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace plod
