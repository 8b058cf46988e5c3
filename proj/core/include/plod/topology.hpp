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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plod/gauss_model.hpp"
#include "plod/types.hpp"

namespace plod {

enum class GridKind { kRadial, kMesh };

std::string_view to_string(GridKind kind);

/// One line. Endpoints are zero-based bus ids; `y` is a conductance proxy
/// (per-unit admittance magnitude).
struct Branch {
  Index from = 0;
  Index to = 0;
  double y = 1.0;
};

/// Distribution feeder topology. Bus ids are zero-based internally; files and
/// user-facing labels are one-based ("bus 1 is the slack").
///
/// Observed coordinates are all buses except the slack, in ascending bus id.
struct GridModel {
  std::string name;
  Index buses = 0;
  Index slack = 0;
  std::vector<Branch> branches;
  std::vector<Index> ders;  // bus ids with a DER (slack entries are ignored)
  GridKind kind = GridKind::kRadial;

  Index observed_dim() const { return buses - 1; }
  /// Observed coordinate of a non-slack bus.
  Index observed_index(Index bus) const;
  /// Bus id of an observed coordinate.
  Index bus_of(Index observed) const;
  bool has_der(Index bus) const;
  /// Index into `branches` of the line joining a and b, or -1.
  Index find_branch(Index a, Index b) const;
};

/// Parses the JSON schema
///   {"buses": int, "slack": int, "branches": [{"from": int, "to": int, "y": float}],
///    "ders": [int], "name": optional string}
/// with one-based bus numbers, then validates (see validate_topology).
/// Throws Error(kParseError), Error(kDuplicateBranch) or Error(kDisconnectedGraph).
GridModel parse_topology(std::string_view json_text);

GridModel load_topology(const std::filesystem::path& path);

std::string topology_to_json(const GridModel& grid);

/// Endpoint, duplicate and connectivity checks. The graph over branches must
/// be connected.
void validate_topology(const GridModel& grid);

/// Component id per bus over the current branches (union-find).
std::vector<Index> connected_components(const GridModel& grid);

/// Directory holding the bundled topologies and configs. Honors the
/// PLOD_DATA_DIR environment variable, falling back to the build-time path.
std::filesystem::path data_dir();

/// Resolves "ieee8_mesh" style names to bundled files; anything containing a
/// path separator or ending in .json is returned unchanged.
std::filesystem::path resolve_topology(std::string_view name_or_path);

/// Parses "4-7" (one-based labels) into a zero-based bus pair.
BusPair parse_branch_label(std::string_view label);
std::string branch_label(BusPair bus_pair);

/// Maps bus-id pairs to observed-coordinate pairs (slack excluded).
std::vector<BusPair> observed_pairs(const GridModel& grid, std::span<const BusPair> bus_pairs);

}  // namespace plod
