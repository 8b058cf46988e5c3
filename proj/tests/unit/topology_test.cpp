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

#include <gtest/gtest.h>

#include <string>

#include "plod/error.hpp"
#include "plod/topology.hpp"

namespace plod {
namespace {

ErrorCode code_of(const std::string& json) {
  try {
    parse_topology(json);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << json;
  return ErrorCode::kIoError;
}

TEST(Topology, BundledRadialFeeder) {
  const GridModel g = load_topology(resolve_topology("ieee8_radial"));
  EXPECT_EQ(g.buses, 8);
  EXPECT_EQ(g.branches.size(), 7u);
  EXPECT_EQ(g.kind, GridKind::kRadial);
  EXPECT_EQ(g.slack, 0);
  EXPECT_EQ(g.ders.size(), 8u);
  EXPECT_EQ(g.name, "ieee8_radial");
}

TEST(Topology, BundledMeshFeeders) {
  const GridModel g = load_topology(resolve_topology("ieee8_mesh"));
  EXPECT_EQ(g.buses, 8);
  EXPECT_EQ(g.branches.size(), 9u);
  EXPECT_EQ(g.kind, GridKind::kMesh);
  const GridModel big = load_topology(resolve_topology("mesh16"));
  EXPECT_EQ(big.buses, 16);
  EXPECT_EQ(big.kind, GridKind::kMesh);
}

TEST(Topology, RejectsInvalidFiles) {
  EXPECT_EQ(code_of(R"({"buses": 3, "slack": 1, "branches": [{"from": 1, "to": 4, "y": 1}]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of(R"({"buses": 3, "slack": 1, "branches": [{"from": 1, "to": 2, "y": 1},
                       {"from": 2, "to": 1, "y": 1}, {"from": 2, "to": 3, "y": 1}]})"),
            ErrorCode::kDuplicateBranch);
  EXPECT_EQ(code_of(R"({"buses": 4, "slack": 1, "branches": [{"from": 1, "to": 2, "y": 1},
                       {"from": 3, "to": 4, "y": 1}]})"),
            ErrorCode::kDisconnectedGraph);
  EXPECT_EQ(code_of(R"({"buses": 2, "slack": 3, "branches": [{"from": 1, "to": 2}]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of("{not json"), ErrorCode::kParseError);
  EXPECT_EQ(code_of(R"({"slack": 1, "branches": []})"), ErrorCode::kParseError);
  EXPECT_THROW(load_topology("/nonexistent/feeder.json"), Error);
}

TEST(Topology, ObservedIndexSkipsSlack) {
  GridModel g = parse_topology(R"({"buses": 4, "slack": 2, "branches": [{"from": 1, "to": 2},
                                  {"from": 2, "to": 3}, {"from": 3, "to": 4}]})");
  EXPECT_EQ(g.observed_dim(), 3);
  EXPECT_EQ(g.observed_index(0), 0);
  EXPECT_EQ(g.observed_index(2), 1);
  EXPECT_EQ(g.observed_index(3), 2);
  EXPECT_THROW(g.observed_index(1), Error);
  for (Index o = 0; o < 3; ++o) EXPECT_EQ(g.observed_index(g.bus_of(o)), o);
}

TEST(Topology, JsonRoundTrip) {
  const GridModel g = load_topology(resolve_topology("ieee8_mesh"));
  const GridModel h = parse_topology(topology_to_json(g));
  EXPECT_EQ(h.buses, g.buses);
  EXPECT_EQ(h.ders, g.ders);
  ASSERT_EQ(h.branches.size(), g.branches.size());
  for (std::size_t j = 0; j < g.branches.size(); ++j) {
    EXPECT_EQ(h.branches[j].from, g.branches[j].from);
    EXPECT_EQ(h.branches[j].to, g.branches[j].to);
    EXPECT_EQ(h.branches[j].y, g.branches[j].y);
  }
}

TEST(Topology, BranchLabels) {
  EXPECT_EQ(parse_branch_label("4-7"), (BusPair{3, 6}));
  EXPECT_EQ(branch_label({3, 6}), "4-7");
  EXPECT_THROW(parse_branch_label("47"), Error);
  EXPECT_THROW(parse_branch_label("a-7"), Error);
}

}  // namespace
}  // namespace plod
