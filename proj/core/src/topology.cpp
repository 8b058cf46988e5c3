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

#include "plod/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plod/error.hpp"

namespace plod {

namespace {

using json = nlohmann::json;

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index a) {
    while (parent_[static_cast<std::size_t>(a)] != a) {
      auto& pa = parent_[static_cast<std::size_t>(a)];
      pa = parent_[static_cast<std::size_t>(pa)];
      a = pa;
    }
    return a;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

 private:
  std::vector<Index> parent_;
};

Index parse_index(std::string_view s) {
  Index v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    raise(ErrorCode::kParseError, "bad bus number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(GridKind kind) {
  return kind == GridKind::kRadial ? "radial" : "mesh";
}

Index GridModel::observed_index(Index bus) const {
  if (bus < 0 || bus >= buses || bus == slack) {
    raise(ErrorCode::kInvalidParameter, "bus " + std::to_string(bus + 1) + " is not observed");
  }
  return bus < slack ? bus : bus - 1;
}

Index GridModel::bus_of(Index observed) const {
  if (observed < 0 || observed >= observed_dim()) {
    raise(ErrorCode::kInvalidParameter, "observed index out of range");
  }
  return observed < slack ? observed : observed + 1;
}

bool GridModel::has_der(Index bus) const {
  return std::find(ders.begin(), ders.end(), bus) != ders.end();
}

Index GridModel::find_branch(Index a, Index b) const {
  for (std::size_t j = 0; j < branches.size(); ++j) {
    const Branch& br = branches[j];
    if ((br.from == a && br.to == b) || (br.from == b && br.to == a)) {
      return static_cast<Index>(j);
    }
  }
  return -1;
}

std::vector<Index> connected_components(const GridModel& grid) {
  UnionFind uf(grid.buses);
  for (const Branch& br : grid.branches) uf.unite(br.from, br.to);
  std::vector<Index> comp(static_cast<std::size_t>(grid.buses));
  for (Index b = 0; b < grid.buses; ++b) comp[static_cast<std::size_t>(b)] = uf.find(b);
  return comp;
}

void validate_topology(const GridModel& grid) {
  if (grid.buses < 2) raise(ErrorCode::kParseError, "a feeder needs at least two buses");
  if (grid.slack < 0 || grid.slack >= grid.buses) {
    raise(ErrorCode::kParseError, "slack bus outside the bus range");
  }
  std::set<std::pair<Index, Index>> seen;
  for (const Branch& br : grid.branches) {
    if (br.from < 0 || br.from >= grid.buses || br.to < 0 || br.to >= grid.buses) {
      raise(ErrorCode::kParseError, "branch " + branch_label({br.from, br.to}) +
                                        " references a nonexistent bus");
    }
    if (br.from == br.to) raise(ErrorCode::kParseError, "self-loop branch");
    if (!(br.y > 0.0) || !std::isfinite(br.y)) {
      raise(ErrorCode::kParseError, "branch admittance must be positive");
    }
    const auto key = std::minmax(br.from, br.to);
    if (!seen.insert({key.first, key.second}).second) {
      raise(ErrorCode::kDuplicateBranch, "branch " + branch_label({br.from, br.to}) +
                                             " listed twice");
    }
  }
  for (Index d : grid.ders) {
    if (d < 0 || d >= grid.buses) raise(ErrorCode::kParseError, "DER on a nonexistent bus");
  }
  const auto comp = connected_components(grid);
  if (std::any_of(comp.begin(), comp.end(), [&](Index c) { return c != comp[0]; })) {
    raise(ErrorCode::kDisconnectedGraph, "topology is not connected");
  }
}

GridModel parse_topology(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::kParseError, std::string("topology JSON: ") + e.what());
  }
  GridModel grid;
  try {
    grid.buses = doc.at("buses").get<Index>();
    grid.slack = doc.at("slack").get<Index>() - 1;
    grid.name = doc.value("name", std::string{});
    for (const auto& b : doc.at("branches")) {
      grid.branches.push_back(
          {b.at("from").get<Index>() - 1, b.at("to").get<Index>() - 1, b.value("y", 1.0)});
    }
    if (doc.contains("ders")) {
      for (const auto& d : doc.at("ders")) grid.ders.push_back(d.get<Index>() - 1);
      std::sort(grid.ders.begin(), grid.ders.end());
      grid.ders.erase(std::unique(grid.ders.begin(), grid.ders.end()), grid.ders.end());
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::kParseError, std::string("topology schema: ") + e.what());
  }
  validate_topology(grid);
  grid.kind = static_cast<Index>(grid.branches.size()) == grid.buses - 1 ? GridKind::kRadial
                                                                          : GridKind::kMesh;
  return grid;
}

GridModel load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIoError, "cannot open topology file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  GridModel grid = parse_topology(ss.str());
  if (grid.name.empty()) grid.name = path.stem().string();
  return grid;
}

std::string topology_to_json(const GridModel& grid) {
  json doc;
  doc["name"] = grid.name;
  doc["buses"] = grid.buses;
  doc["slack"] = grid.slack + 1;
  doc["branches"] = json::array();
  for (const Branch& br : grid.branches) {
    doc["branches"].push_back({{"from", br.from + 1}, {"to", br.to + 1}, {"y", br.y}});
  }
  doc["ders"] = json::array();
  for (Index d : grid.ders) doc["ders"].push_back(d + 1);
  return doc.dump(2);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("PLOD_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  // Build tree first, then the installed copy.
  const std::filesystem::path build_tree(PLOD_DATA_DIR);
  if (std::filesystem::exists(build_tree / "topologies")) return build_tree;
  return PLOD_INSTALL_DATA_DIR;
}

std::filesystem::path resolve_topology(std::string_view name_or_path) {
  const std::filesystem::path p(name_or_path);
  if (p.has_parent_path() || p.extension() == ".json") return p;
  return data_dir() / "topologies" / (std::string(name_or_path) + ".json");
}

BusPair parse_branch_label(std::string_view label) {
  const auto dash = label.find('-');
  if (dash == std::string_view::npos) {
    raise(ErrorCode::kParseError, "branch label '" + std::string(label) + "' is not of the form a-b");
  }
  return {parse_index(label.substr(0, dash)) - 1, parse_index(label.substr(dash + 1)) - 1};
}

std::string branch_label(BusPair bus_pair) {
  return std::to_string(bus_pair.i + 1) + "-" + std::to_string(bus_pair.k + 1);
}

std::vector<BusPair> observed_pairs(const GridModel& grid, std::span<const BusPair> bus_pairs) {
  std::vector<BusPair> out;
  out.reserve(bus_pairs.size());
  for (const BusPair& b : bus_pairs) {
    out.push_back(ordered({grid.observed_index(b.i), grid.observed_index(b.k)}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace plod
