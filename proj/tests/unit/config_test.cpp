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

#include "plod/config.hpp"
#include "plod/error.hpp"
#include "plod/harness.hpp"

namespace plod {
namespace {

ErrorCode toml_code(const char* text) {
  try {
    parse_toml(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::kIoError;
}

TEST(Toml, ParsesScalarsArraysAndTables) {
  const TomlTable t = parse_toml(R"(
# comment
name = "mesh"   # trailing
literal = 'a\b'
count = 1_000
neg = -3
ratio = 2.5e-2
flag = true
list = [0.1, 0.01,
        1e-3]   # multi-line
names = ["benchmark", "mitigated",]

[localization]
window = 200
)");
  EXPECT_EQ(t.at("name").as_string("name"), "mesh");
  EXPECT_EQ(t.at("literal").as_string("literal"), "a\\b");
  EXPECT_EQ(t.at("count").as_int("count"), 1000);
  EXPECT_EQ(t.at("neg").as_int("neg"), -3);
  EXPECT_DOUBLE_EQ(t.at("ratio").as_double("ratio"), 0.025);
  EXPECT_TRUE(t.at("flag").as_bool("flag"));
  EXPECT_EQ(t.at("list").as_double_list("list"), (std::vector<double>{0.1, 0.01, 1e-3}));
  EXPECT_EQ(t.at("names").as_string_list("names"),
            (std::vector<std::string>{"benchmark", "mitigated"}));
  EXPECT_EQ(t.at("localization.window").as_int("w"), 200);
  EXPECT_DOUBLE_EQ(t.at("count").as_double("count"), 1000.0);
  EXPECT_EQ(t.at("ratio").as_double_list("ratio"), std::vector<double>{0.025});
}

TEST(Toml, RejectsMalformedInput) {
  EXPECT_EQ(toml_code("a = "), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("a = 1\na = 2"), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("a = \"open"), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("[broken"), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("a = [1, 2"), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("a = {x = 1}"), ErrorCode::kConfigError);
  EXPECT_EQ(toml_code("just words"), ErrorCode::kConfigError);
  try {
    parse_toml("ok = 1\n\nbad = ?");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
  }
}

TEST(Toml, TypeMismatchIsConfigError) {
  const TomlTable t = parse_toml("a = \"x\"\nb = 1.5");
  EXPECT_THROW(t.at("a").as_double("a"), Error);
  EXPECT_THROW(t.at("b").as_int("b"), Error);
  EXPECT_THROW(t.at("b").as_bool("b"), Error);
}

TEST(ExperimentConfig, OverlaysKnownKeys) {
  const ExperimentConfig c = config_from_toml(parse_toml(R"(
[experiment]
rho = 0.05
alpha = [0.1, 0.01]
gamma = 2
replications = 50
format = "json"

[localization]
window = 300
)"));
  EXPECT_DOUBLE_EQ(c.rho, 0.05);
  EXPECT_EQ(c.alphas, (std::vector<double>{0.1, 0.01}));
  EXPECT_EQ(c.gammas, std::vector<double>{2.0});
  EXPECT_EQ(c.replications, 50);
  EXPECT_EQ(c.format, OutputFormat::kJson);
  EXPECT_EQ(c.localization.window, 300);
  EXPECT_EQ(c.topology, "ieee8_mesh");
  EXPECT_NO_THROW(c.validate());
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  auto code = [](const char* text) {
    try {
      config_from_toml(parse_toml(text)).validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  EXPECT_EQ(code("rhoo = 0.1"), ErrorCode::kConfigError);
  EXPECT_EQ(code("format = \"xml\""), ErrorCode::kConfigError);
  EXPECT_EQ(code("rho = 1.5"), ErrorCode::kConfigError);
  EXPECT_EQ(code("alphas = [0.0]"), ErrorCode::kConfigError);
  EXPECT_EQ(code("gammas = [0.5]"), ErrorCode::kConfigError);
  EXPECT_EQ(code("coverages = [1.2]"), ErrorCode::kConfigError);
  EXPECT_EQ(code("replications = 0"), ErrorCode::kConfigError);
  EXPECT_EQ(code("detectors = [\"cusum\"]"), ErrorCode::kConfigError);
}

TEST(ExperimentConfig, BundledConfigsLoad) {
  for (const char* name : {"default.toml", "quick.toml"}) {
    const auto path = data_dir() / "configs" / name;
    ExperimentConfig c;
    ASSERT_NO_THROW(c = load_experiment_config(path)) << path;
    EXPECT_NO_THROW(c.validate()) << name;
  }
}

TEST(ExpandDetectors, MitigatedFansOutOverGammas) {
  ExperimentConfig c;
  c.detectors = {"benchmark", "mitigated", "variance_scaled:3"};
  c.gammas = {1.0, 2.0, 3.0};
  const auto specs = expand_detectors(c);
  ASSERT_EQ(specs.size(), 4u);
  EXPECT_EQ(specs[0].kind, DetectorKind::kBenchmark);
  EXPECT_EQ(specs[1].kind, DetectorKind::kMitigated);
  EXPECT_EQ(specs[2], (DetectorSpec{DetectorKind::kVarianceScaled, 2.0}));
  EXPECT_EQ(specs[3], (DetectorSpec{DetectorKind::kVarianceScaled, 3.0}));
}

}  // namespace
}  // namespace plod
