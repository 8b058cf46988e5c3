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

#include "plod/error.hpp"

namespace plod {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kMissingMechanism: return "MissingMechanism";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kDuplicateBranch: return "DuplicateBranch";
    case ErrorCode::kUnknownBranch: return "UnknownBranch";
    case ErrorCode::kDeadIsland: return "DeadIsland";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kInfeasibleMoments: return "InfeasibleMoments";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kDegenerateVariance:
    case ErrorCode::kSingularSystem:
    case ErrorCode::kInfeasibleMoments:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace plod
