#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ranop/intent.hpp"

using namespace ranop;

namespace {

Intent must_parse(std::string_view doc) {
  auto r = parse_intent(doc);
  EXPECT_TRUE(r.has_value()) << (r ? "" : r.error().path + ": " + r.error().reason);
  return r ? *r : Intent{};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Weights, PresetVectors) {
  EXPECT_EQ(weights_for(must_parse(R"({"objective":"maximize_throughput"})")), (WeightVector{1.0, 0.0, 0.0}));
  EXPECT_EQ(weights_for(must_parse(R"({"objective":"minimize_energy"})")), (WeightVector{0.0, 0.0, -1.0}));
  EXPECT_EQ(weights_for(must_parse(R"({"objective":"minimize_latency"})")), (WeightVector{0.1, -1.0, 0.1}));
}

TEST(Weights, LatencyDominance) {
  const Intent lat = must_parse(R"({"objective":"minimize_latency"})");
  const WeightVector w = weights_for(lat);
  EXPECT_LT(w[1], 0.0);
  EXPECT_GE(-w[1], 10.0 * std::max(std::abs(w[0]), std::abs(w[2])));
  EXPECT_THROW(weights_for(lat, LatencyWeights{0.5, 1.0, 0.1}), ConfigError);
  EXPECT_EQ(weights_for(lat, LatencyWeights{0.2, 2.0, 0.0}), (WeightVector{0.2, -2.0, 0.0}));
}

TEST(Weights, CustomVectorPassesThrough) {
  const Intent i = must_parse(R"({"objective":"custom_weights","weights":[0.5,-0.25,-1]})");
  EXPECT_EQ(weights_for(i), (WeightVector{0.5, -0.25, -1.0}));
}

TEST(Parse, ConstraintUnitsAreCanonical) {
  const Intent i = must_parse(R"({"objective":"minimize_energy","constraints":[
      {"metric":"throughput","comparator":">=","value":20,"units":"Mbit/s"},
      {"metric":"latency","comparator":"<=","value":15,"units":"ms"},
      {"metric":"energy","comparator":"at_most","value":500,"units":"mW"}]})");
  ASSERT_EQ(i.constraints.size(), 3u);
  EXPECT_DOUBLE_EQ(i.constraints[0].value, 20e6);
  EXPECT_EQ(i.constraints[0].comparator, Comparator::kAtLeast);
  EXPECT_DOUBLE_EQ(i.constraints[1].value, 0.015);
  EXPECT_DOUBLE_EQ(i.constraints[2].value, 0.5);

  KpiVector k{25e6, 0.01, 0.4};
  for (const auto& c : i.constraints) EXPECT_TRUE(c.satisfied_by(k));
  k.latency = 0.02;
  EXPECT_FALSE(i.constraints[1].satisfied_by(k));
}

TEST(Parse, ErrorsNameTheField) {
  struct Case {
    const char* doc;
    const char* path;
  };
  for (const Case& c : {
           Case{"[1,2]", ""},
           Case{"{not json", ""},
           Case{R"({})", "/objective"},
           Case{R"({"objective":"maximize_revenue"})", "/objective"},
           Case{R"({"objective":"custom_weights"})", "/weights"},
           Case{R"({"objective":"custom_weights","weights":[1,2]})", "/weights"},
           Case{R"({"objective":"custom_weights","weights":[0,0,0]})", "/weights"},
           Case{R"({"objective":"custom_weights","weights":[1,"x",0]})", "/weights/1"},
           Case{R"({"objective":"minimize_energy","weights":[1,0,0]})", "/weights"},
           Case{R"({"objective":"minimize_energy","constraints":[{"metric":"jitter","comparator":"<=","value":1}]})",
                "/constraints/0/metric"},
           Case{R"({"objective":"minimize_energy","constraints":[{"metric":"energy","comparator":"<","value":1}]})",
                "/constraints/0/comparator"},
           Case{R"({"objective":"minimize_energy","constraints":[{"metric":"energy","comparator":"<=","value":1,"units":"ms"}]})",
                "/constraints/0/units"},
           Case{R"({"objective":"minimize_energy","scope":{"window":{"start_tick":5,"end_tick":5}}})", "/scope/window"},
           Case{R"({"objective":"minimize_energy","extra":1})", "/extra"},
       }) {
    auto r = parse_intent(c.doc);
    ASSERT_FALSE(r) << c.doc;
    EXPECT_EQ(r.error().path, c.path) << c.doc;
    EXPECT_FALSE(r.error().reason.empty());
  }
}

TEST(Parse, JsonRoundTrip) {
  const Intent i = must_parse(R"({"objective":"custom_weights","weights":[1,-0.5,-2],
      "constraints":[{"metric":"latency","comparator":"<=","value":0.02}],
      "scope":{"cells":["cell_1","cell_3"],"window":{"start_tick":10,"end_tick":500}}})");
  auto back = intent_from_json(intent_to_json(i));
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, i);
}

TEST(Scope, WindowActivity) {
  const Intent i = must_parse(R"({"objective":"minimize_energy","scope":{"window":{"start_tick":10,"end_tick":20}}})");
  EXPECT_FALSE(i.active_at(9));
  EXPECT_TRUE(i.active_at(10));
  EXPECT_TRUE(i.active_at(19));
  EXPECT_FALSE(i.active_at(20));
  EXPECT_TRUE(must_parse(R"({"objective":"minimize_energy"})").active_at(123456));
}

TEST(Permitted, GoalPolicyFilters) {
  const Intent energy = must_parse(R"({"objective":"minimize_energy"})");
  EXPECT_TRUE(permitted(energy));
  GoalPolicy narrow{{"maximize_throughput"}, {"throughput"}};
  EXPECT_FALSE(permitted(energy, narrow));

  Intent bad;
  bad.objective = Objective::kCustomWeights;
  EXPECT_FALSE(permitted(bad));
  bad.weights = WeightVector{0.0, 0.0, 0.0};
  EXPECT_FALSE(permitted(bad));
  bad.weights = WeightVector{0.0, 1.0, 0.0};
  EXPECT_TRUE(permitted(bad));

  const Intent constrained = must_parse(
      R"({"objective":"maximize_throughput","constraints":[{"metric":"energy","comparator":"<=","value":5}]})");
  EXPECT_FALSE(permitted(constrained, narrow));
}

TEST(Phrase, EnergyInSectorOvernight) {
  const std::map<std::string, std::vector<std::string>> sectors{{"downtown", {"dt_north", "dt_east", "dt_west"}}};
  auto i = match_phrase("Minimize energy consumption in the downtown sector between midnight and 6am", sectors, 1.0);
  ASSERT_TRUE(i);
  EXPECT_EQ(i->objective, Objective::kMinimizeEnergy);
  EXPECT_EQ(i->scope.cells, sectors.at("downtown"));
  ASSERT_TRUE(i->scope.window);
  EXPECT_EQ(i->scope.window->start_tick, 0u);
  EXPECT_EQ(i->scope.window->end_tick, 6u * 3600u);
}

TEST(Phrase, WrapsPastMidnightAndRejectsUnknown) {
  auto i = match_phrase("reduce latency between 10pm and 2am", {}, 1.0);
  ASSERT_TRUE(i);
  EXPECT_EQ(i->objective, Objective::kMinimizeLatency);
  EXPECT_EQ(i->scope.window->start_tick, 22u * 3600u);
  EXPECT_EQ(i->scope.window->end_tick, 26u * 3600u);
  EXPECT_FALSE(match_phrase("make it better"));
  EXPECT_EQ(match_phrase("more capacity please")->objective, Objective::kMaximizeThroughput);
}

TEST(Files, ShippedIntentsParse) {
  for (const char* name : {"maximize_throughput", "minimize_energy", "minimize_latency", "downtown_energy",
                           "shrink_power"}) {
    const std::string text = slurp(std::string(RANOP_SOURCE_DIR) + "/intents/" + name + ".json");
    auto r = parse_intent(text);
    EXPECT_TRUE(r) << name;
    if (r) EXPECT_TRUE(permitted(*r)) << name;
  }
}
