// Copyright 2026 The TVAPF Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "scene_support.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

namespace sc = tvapf::scenario;
namespace tt = tvapf::test;
using ::testing::HasSubstr;

namespace
{
std::vector<std::string> diagnostics_of(const std::string & text)
{
  try {
    sc::parse_scenario(text, "scene.json");
  } catch (const sc::ScenarioError & e) {
    return e.diagnostics();
  }
  return {};
}
}  // namespace

TEST(ScenarioTest, RoundTripIsIdentical)
{
  for (const std::string name : {"empty_road.json", "overtake.json"}) {
    const sc::Scenario first = sc::load_scenario(tt::scenario_file(name));
    const auto dumped = sc::to_json(first).dump(2);
    const sc::Scenario second = sc::parse_scenario(dumped, name);
    EXPECT_EQ(sc::to_json(second).dump(2), dumped) << name;
  }
}

TEST(ScenarioTest, DefaultsFillMissingSections)
{
  const sc::Scenario s = tt::parse(tt::straight_road_json());
  EXPECT_DOUBLE_EQ(s.planner.T_s, 0.5);
  EXPECT_EQ(s.planner.N, 70);
  EXPECT_DOUBLE_EQ(s.planner.instance_period, 5.0);
  EXPECT_DOUBLE_EQ(s.tracker.T_s, 0.2);
  EXPECT_EQ(s.tracker.N, 10);
  EXPECT_DOUBLE_EQ(s.sim.plant_step, 0.02);
  EXPECT_DOUBLE_EQ(s.tvapf.epsilon_o, 0.05);
}

TEST(ScenarioTest, TrackerAccelerationSitsInsidePlannerBounds)
{
  const sc::Scenario s = tt::parse(tt::straight_road_json());
  EXPECT_GT(s.tracker.a_bounds.min, s.planner.alpha_bounds.min);
  EXPECT_LT(s.tracker.a_bounds.max, s.planner.alpha_bounds.max);
  EXPECT_NEAR(s.tracker.da_bounds.max, 0.9 * 0.2, 1e-12);
}

TEST(ScenarioTest, InvalidValuesReportLines)
{
  auto j = tt::straight_road_json();
  j["ego"]["v_des"] = 20.0;
  j["actors"].push_back(tt::actor_json("L1", 300.0, -2.0, 3.0, 1, 0.0, 7.0, -0.9, 0.9));
  j["actors"][0]["direction"] = 0;
  const std::string text = j.dump(2);
  const auto diags = diagnostics_of(text);
  ASSERT_EQ(diags.size(), 2u);
  const auto line_of = [&text](const std::string & needle) {
    return 1 + std::count(text.begin(), text.begin() + static_cast<long>(text.find(needle)), '\n');
  };
  EXPECT_THAT(diags[0], HasSubstr("scene.json:" + std::to_string(line_of("\"v_des\"")) + ": /ego/v_des"));
  EXPECT_THAT(diags[1], HasSubstr("scene.json:" + std::to_string(line_of("\"direction\"")) + ": /actors/0/direction"));
}

TEST(ScenarioTest, UnknownAndMistypedKeysAreAllReported)
{
  auto j = tt::straight_road_json();
  j["ego"]["speed"] = 3.0;
  j["sim"]["duration"] = "long";
  const auto diags = diagnostics_of(j.dump(2));
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_THAT(diags[0] + diags[1], HasSubstr("/ego/speed: unknown key"));
  EXPECT_THAT(diags[0] + diags[1], HasSubstr("/sim/duration"));
}

TEST(ScenarioTest, MalformedJsonReportsLine)
{
  const auto diags = diagnostics_of("{\n  \"path\": {\n    \"points\": [,]\n  }\n}\n");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_THAT(diags[0], HasSubstr("scene.json:3: invalid JSON"));
}

TEST(ScenarioTest, MissingFileThrows)
{
  EXPECT_THROW(sc::load_scenario("/nonexistent/scene.json"), sc::ScenarioError);
}

TEST(ScenarioTest, OverridesRevalidate)
{
  sc::Scenario s = tt::parse(tt::straight_road_json());
  sc::apply_overrides(s, 2.0, 20.0);
  EXPECT_DOUBLE_EQ(s.planner.instance_period, 2.0);
  EXPECT_EQ(s.planner.N, 40);
  EXPECT_THROW(sc::apply_overrides(s, 0.3, -1.0), sc::ScenarioError);
}
