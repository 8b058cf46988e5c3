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

#include <stdexcept>
#include <string>
#include <string_view>

namespace plod {

enum class ErrorCode {
  kDimensionMismatch,
  kNotPositiveDefinite,
  kDegenerateVariance,
  kInsufficientSamples,
  kInvalidParameter,
  kInvalidRange,
  kMissingMechanism,
  kEmptyStream,
  kParseError,
  kDisconnectedGraph,
  kDuplicateBranch,
  kUnknownBranch,
  kDeadIsland,
  kSingularSystem,
  kInfeasibleMoments,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// True for failures that originate in the numerics rather than in the
// caller's input files or flags.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace plod
