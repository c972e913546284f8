#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "fleetmix/eval.hpp"
#include "fleetmix/json_io.hpp"
#include "fleetmix/model.hpp"
#include "fleetmix/rng.hpp"
#include "fleetmix/scen.hpp"

using namespace fleetmix;
using namespace fleetmix::scen;

namespace {

int realized_count(const Scenario& sc) {
  int n = 0;
  for (auto r : sc.realized) n += r;
  return n;
}

}  // namespace

TEST_CASE("truncated normal validation") {
  TruncatedNormalSpec bad{10.0, 2.0, 5.0, 5.0};
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  bad = {10.0, 2.0, 8.0, 4.0};
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  bad = {10.0, 0.0, 4.0, 12.0};
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  bad = {10.0, -1.0, 4.0, 12.0};
  REQUIRE_THROWS_AS(bad.validate(), ConfigError);
  TruncatedNormalSpec ok{10.0, 2.0, 4.0, 12.0};
  REQUIRE_NOTHROW(ok.validate());
}

TEST_CASE("truncated normal stays inside the bounds") {
  TruncatedNormalSpec spec{107.8946, 26.63986, 26.5, 145.5};
  REQUIRE(spec.low_int() == 27);
  REQUIRE(spec.high_int() == 145);
  Rng rng(99);
  for (int i = 0; i < 20000; ++i) {
    const int v = spec.sample(rng);
    REQUIRE(v >= 27);
    REQUIRE(v <= 145);
  }
}

TEST_CASE("truncated normal mean matches the analytic value") {
  TruncatedNormalSpec spec{107.8946, 26.63986, 26.5, 145.5};
  const double expected = spec.expected_count();
  // Censoring at the upper bound pulls mass down to 145 but the lower tail
  // is still present, so the mean sits a little below the location value.
  REQUIRE(expected > 104.0);
  REQUIRE(expected < 112.0);

  Rng rng(4242);
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) sum += spec.sample(rng);
  const double empirical = sum / draws;
  REQUIRE(std::abs(empirical - expected) < 0.25);
}

TEST_CASE("truncated normal with a tight window hits every integer") {
  TruncatedNormalSpec spec{3.0, 4.0, 0.5, 5.5};
  Rng rng(7);
  std::set<int> seen;
  for (int i = 0; i < 5000; ++i) seen.insert(spec.sample(rng));
  REQUIRE(*seen.begin() >= 1);
  REQUIRE(*seen.rbegin() <= 5);
  REQUIRE(seen.size() >= 4);
}

TEST_CASE("triangular sampling rejects a mean outside the bounds") {
  Rng rng(1);
  REQUIRE_THROWS_AS(triangular_sample(0.0, 10.0, 12.0, rng), ConfigError);
  REQUIRE_THROWS_AS(triangular_sample(0.0, 10.0, -1.0, rng), ConfigError);
}

TEST_CASE("triangular sampling degenerates to a constant") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) REQUIRE(triangular_sample(5.0, 5.0, 5.0, rng) == 5.0);
}

TEST_CASE("triangular sampling respects the bounds and the mean") {
  Rng rng(2024);
  const double min = 13.4, max = 26.9, mean = 19.5;
  double sum = 0.0;
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) {
    const double v = triangular_sample(min, max, mean, rng);
    REQUIRE(v >= min);
    REQUIRE(v <= max);
    sum += v;
  }
  REQUIRE(std::abs(sum / draws - mean) < 0.05);
}

TEST_CASE("triangular sampling handles modes at the edges") {
  Rng rng(11);
  // mean = (a + b + c) / 3 with c clamped to an endpoint
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double v = triangular_sample(0.0, 9.0, 3.0, rng);  // mode exactly 0
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 9.0);
    sum += v;
  }
  REQUIRE(std::abs(sum / draws - 3.0) < 0.05);
}

TEST_CASE("seasonal temperatures stay inside their seasonal ranges") {
  const auto spec = SeasonalTemperatureSpec::denmark();
  Rng rng(31);
  for (int s = 0; s < 4; ++s) {
    const auto& t = spec.seasons[static_cast<std::size_t>(s)];
    for (int i = 0; i < 2000; ++i) {
      const double v = triangular_sample(t.min, t.max, t.mean, rng);
      REQUIRE(v >= t.min);
      REQUIRE(v <= t.max);
    }
  }
  REQUIRE(spec.seasons[kWinter].min == -7.3);
  REQUIRE(spec.seasons[kWinter].max == 8.8);
  REQUIRE(spec.seasons[kSummer].mean == 19.5);
}

TEST_CASE("clinic case master is well formed") {
  RegionHConfig cfg;
  const Instance inst = make_regionh_master(cfg);
  REQUIRE(inst.customers.size() == 160);
  REQUIRE(inst.vehicles.size() == 30);
  REQUIRE(inst.vehicle_types.size() == 2);
  REQUIRE(inst.chargers.size() == 2);
  REQUIRE(inst.direction == Direction::pickup);
  for (int c : inst.customers) {
    const Node& nd = inst.nodes[static_cast<std::size_t>(c)];
    REQUIRE(nd.doctors >= 1);
    REQUIRE(nd.doctors <= 5);
    REQUIRE(nd.service_time == 3.0);
    REQUIRE(nd.penalty == 30.0);
    REQUIRE(nd.tw_late == 150.0);
  }
  REQUIRE(inst.request_probabilities.size() == 160);
  const double pi = inst.request_probabilities.front();
  REQUIRE(pi == RegionHConfig{}.count.expected_count() / 160.0);
  for (double p : inst.request_probabilities) REQUIRE(p == pi);
}

TEST_CASE("clinic case master round-trips through json") {
  const Instance inst = make_regionh_master();
  const std::string text = io::to_json(inst).dump();
  const Instance back = io::instance_from_json(nlohmann::json::parse(text));
  REQUIRE(back == inst);
}

TEST_CASE("scenario sampling is reproducible and draw-bounded") {
  const Instance inst = make_regionh_master();
  for (std::uint64_t seed : {1ull, 77ull, 4096ull}) {
    const Scenario a = sample_scenario_regionh(inst, seed);
    const Scenario b = sample_scenario_regionh(inst, seed);
    REQUIRE(a.realized == b.realized);
    REQUIRE(a.temperature_c == b.temperature_c);
    REQUIRE(a.season == b.season);
    REQUIRE(a.weekday == b.weekday);
    REQUIRE(a.demand_override.size() == b.demand_override.size());
    for (std::size_t i = 0; i < a.demand_override.size(); ++i) {
      const bool an = std::isnan(a.demand_override[i]);
      const bool bn = std::isnan(b.demand_override[i]);
      REQUIRE(an == bn);
      if (!an) REQUIRE(a.demand_override[i] == b.demand_override[i]);
    }
    REQUIRE(a.seed == seed);
    const int k = realized_count(a);
    REQUIRE(k >= 27);
    REQUIRE(k <= 145);
    REQUIRE(a.season >= 0);
    REQUIRE(a.season <= 3);
    REQUIRE(a.weekday >= 0);
    REQUIRE(a.weekday <= 4);
  }
}

TEST_CASE("different seeds give different scenarios") {
  const Instance inst = make_regionh_master();
  const Scenario a = sample_scenario_regionh(inst, 5);
  const Scenario b = sample_scenario_regionh(inst, 6);
  REQUIRE(a.realized != b.realized);
}

TEST_CASE("clinic demand follows the doctors and the weekday table") {
  const Instance inst = make_regionh_master();
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200 && checked < 50; ++seed) {
    const Scenario sc = sample_scenario_regionh(inst, seed);
    const int row = sc.season == kSummer ? 0 : 1;
    const int vials = kVialsPerDoctor[row][sc.weekday];
    for (std::size_t c = 0; c < inst.customers.size(); ++c) {
      if (!sc.realized[c]) {
        REQUIRE(std::isnan(sc.demand_override[c]));
        continue;
      }
      const Node& nd = inst.nodes[static_cast<std::size_t>(inst.customers[c])];
      REQUIRE(sc.demand_override[c] == static_cast<double>(nd.doctors * vials));
      ++checked;
    }
  }
  REQUIRE(checked >= 50);
}

TEST_CASE("per-doctor vials match the published weekday pattern") {
  // Monday outside summer moves the most product.
  REQUIRE(kVialsPerDoctor[1][0] == 9);
  REQUIRE(kVialsPerDoctor[0][2] == 4);
  int summer = 0, rest = 0;
  for (int d = 0; d < 5; ++d) {
    summer += kVialsPerDoctor[0][d];
    rest += kVialsPerDoctor[1][d];
  }
  REQUIRE(summer == 27);
  REQUIRE(rest == 36);
}

TEST_CASE("evaluator demand picks up the override") {
  const Instance inst = make_regionh_master();
  std::uint64_t seed = 0;
  Scenario sc = sample_scenario_regionh(inst, seed);
  while (sc.season == kSummer || sc.weekday != 0) sc = sample_scenario_regionh(inst, ++seed);
  energy::PowerContext ctx;
  eval::Evaluator ev(inst, sc, ctx);
  for (std::size_t c = 0; c < inst.customers.size(); ++c) {
    if (!sc.realized[c]) continue;
    const int node = inst.customers[c];
    const Node& nd = inst.nodes[static_cast<std::size_t>(node)];
    REQUIRE(ev.demand_units(node) == nd.doctors * 9.0);
  }
}

TEST_CASE("clinic inclusion frequency matches the stored probability") {
  RegionHConfig cfg;
  cfg.clinics = 160;
  const Instance inst = make_regionh_master(cfg);
  const std::size_t n = inst.customers.size();
  std::vector<int> hits(n, 0);
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    const Scenario sc = sample_scenario_regionh(inst, static_cast<std::uint64_t>(s));
    for (std::size_t c = 0; c < n; ++c) hits[c] += sc.realized[c];
  }
  const double pi = inst.request_probabilities.front();
  const double se = std::sqrt(pi * (1.0 - pi) / samples);
  for (std::size_t c = 0; c < n; ++c) {
    const double freq = static_cast<double>(hits[c]) / samples;
    REQUIRE(std::abs(freq - pi) <= 3.0 * se);
  }
}

TEST_CASE("season and weekday draws are uniform") {
  const Instance inst = make_regionh_master();
  std::array<int, 4> season_hits{};
  std::array<int, 5> weekday_hits{};
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    const Scenario sc = sample_scenario_regionh(inst, static_cast<std::uint64_t>(s) + 70000);
    season_hits[static_cast<std::size_t>(sc.season)]++;
    weekday_hits[static_cast<std::size_t>(sc.weekday)]++;
  }
  for (int h : season_hits) {
    REQUIRE(h > samples / 4 - 3 * 50);  // ~3 sigma around 2500
    REQUIRE(h < samples / 4 + 3 * 50);
  }
  for (int h : weekday_hits) {
    REQUIRE(h > samples / 5 - 3 * 45);
    REQUIRE(h < samples / 5 + 3 * 45);
  }
}

TEST_CASE("winter scenarios stay inside the winter temperature range") {
  const Instance inst = make_regionh_master();
  int winters = 0;
  for (int s = 0; s < 4000 && winters < 500; ++s) {
    const Scenario sc = sample_scenario_regionh(inst, static_cast<std::uint64_t>(s));
    if (sc.season != kWinter) continue;
    ++winters;
    REQUIRE(sc.temperature_c >= -7.3);
    REQUIRE(sc.temperature_c <= 8.8);
  }
  REQUIRE(winters == 500);
}

TEST_CASE("oversized count is clamped with a warning") {
  RegionHConfig cfg;
  cfg.clinics = 30;
  cfg.count = {20.0, 5.0, 5.0, 29.5};
  Instance inst = make_regionh_master(cfg);
  ScenarioSpec spec = regionh_spec(cfg);
  spec.count = {40.0, 1.0, 20.0, 41.0};  // nearly always above the list size
  std::vector<std::string> warnings;
  bool clamped = false;
  for (std::uint64_t seed = 0; seed < 20 && !clamped; ++seed) {
    const Scenario sc = sample_scenario(inst, spec, seed, &warnings);
    if (realized_count(sc) == 30 && !warnings.empty()) clamped = true;
  }
  REQUIRE(clamped);
  REQUIRE(warnings.front().find("clamped") != std::string::npos);
}

TEST_CASE("master construction rejects a count range beyond the list") {
  RegionHConfig cfg;
  cfg.clinics = 100;  // below the 145 draw ceiling
  REQUIRE_THROWS_AS(make_regionh_master(cfg), ConfigError);
}

TEST_CASE("technician case master is well formed") {
  MthConfig cfg;
  const Instance inst = make_mth_master(cfg);
  REQUIRE(inst.customers.size() == 520);
  REQUIRE(inst.vehicle_types.size() == 2);
  // Every driver has a combustion van; the eligible ones also get an EV.
  REQUIRE(inst.vehicles.size() == static_cast<std::size_t>(cfg.drivers + cfg.ev_eligible));

  int ev_count = 0;
  for (const Vehicle& v : inst.vehicles) {
    REQUIRE(v.home_start.has_value());
    REQUIRE(v.home_end.has_value());
    REQUIRE_FALSE(v.skills.empty());
    const Powertrain pt = inst.vehicle_types[static_cast<std::size_t>(v.type)].powertrain;
    if (pt == Powertrain::ev) {
      ++ev_count;
      REQUIRE(v.charger_distance_km < 1.0);
    }
  }
  REQUIRE(ev_count == cfg.ev_eligible);

  for (int c : inst.customers) {
    const Node& nd = inst.nodes[static_cast<std::size_t>(c)];
    REQUIRE(nd.demand == 0.0);
    REQUIRE(nd.skill_requirement >= 1);
    REQUIRE(nd.skill_requirement <= 4);
    if (nd.service_time < 120.0) {
      const bool morning = nd.tw_early == 0.0 && nd.tw_late == 300.0;
      const bool afternoon = nd.tw_early == 300.0 && nd.tw_late == 600.0;
      REQUIRE((morning || afternoon));
    } else {
      REQUIRE(nd.tw_early == 0.0);
      REQUIRE(nd.tw_late == 600.0);
    }
  }
}

TEST_CASE("technician skill mix approximates the published shares") {
  const Instance inst = make_mth_master();
  std::array<int, 5> level_count{};
  for (int c : inst.customers)
    level_count[static_cast<std::size_t>(
        inst.nodes[static_cast<std::size_t>(c)].skill_requirement)]++;
  // 40/30/20/10 percent of 520 with sampling slack
  REQUIRE(level_count[1] > 160);
  REQUIRE(level_count[1] < 260);
  REQUIRE(level_count[2] > 110);
  REQUIRE(level_count[2] < 210);
  REQUIRE(level_count[3] > 60);
  REQUIRE(level_count[3] < 150);
  REQUIRE(level_count[4] > 20);
  REQUIRE(level_count[4] < 90);

  std::map<std::vector<int>, int> skill_sets;
  for (const Vehicle& v : inst.vehicles)
    if (inst.vehicle_types[static_cast<std::size_t>(v.type)].powertrain == Powertrain::icev)
      skill_sets[v.skills]++;
  REQUIRE(skill_sets.size() == 4);
  REQUIRE(skill_sets.count({1}) == 1);
  REQUIRE(skill_sets.count({2}) == 1);
  REQUIRE(skill_sets.count({2, 3}) == 1);
  REQUIRE(skill_sets.count({3, 4}) == 1);
}

TEST_CASE("nested skills gate task compatibility") {
  const Instance inst = make_mth_master();
  Node task;
  task.skill_requirement = 1;
  Vehicle handyman, electrician, technician, classified;
  for (const Vehicle& v : inst.vehicles) {
    if (v.skills == std::vector<int>{1}) handyman = v;
    if (v.skills == std::vector<int>{2}) electrician = v;
    if (v.skills == std::vector<int>{2, 3}) technician = v;
    if (v.skills == std::vector<int>{3, 4}) classified = v;
  }
  REQUIRE(compatible(task, handyman));
  REQUIRE_FALSE(compatible(task, electrician));
  REQUIRE_FALSE(compatible(task, classified));
  task.skill_requirement = 3;
  REQUIRE_FALSE(compatible(task, handyman));
  REQUIRE(compatible(task, technician));
  REQUIRE(compatible(task, classified));
}

TEST_CASE("technician scenarios force zero demand and keep times static") {
  const Instance inst = make_mth_master();
  const Scenario a = sample_scenario_mth(inst, 9);
  const Scenario b = sample_scenario_mth(inst, 9);
  REQUIRE(a.realized == b.realized);
  const int k = realized_count(a);
  REQUIRE(k >= 348);
  REQUIRE(k <= 476);
  for (std::size_t c = 0; c < inst.customers.size(); ++c) {
    if (a.realized[c])
      REQUIRE(a.demand_override[c] == 0.0);
    else
      REQUIRE(std::isnan(a.demand_override[c]));
  }
  // Service times live on the master and do not change between scenarios.
  const Instance again = make_mth_master();
  for (int c : inst.customers)
    REQUIRE(inst.nodes[static_cast<std::size_t>(c)].service_time ==
            again.nodes[static_cast<std::size_t>(c)].service_time);
}

TEST_CASE("count draw happens before selection so the stream stays aligned") {
  // Two masters differing only in clinic geography still realize the same
  // number of customers for the same seed: the count is drawn first from
  // the scenario stream, independent of the list content.
  RegionHConfig a_cfg;
  RegionHConfig b_cfg;
  b_cfg.seed = 555;
  const Instance a = make_regionh_master(a_cfg);
  const Instance b = make_regionh_master(b_cfg);
  for (std::uint64_t seed : {3ull, 14ull, 159ull}) {
    const Scenario sa = sample_scenario_regionh(a, seed);
    const Scenario sb = sample_scenario_regionh(b, seed);
    REQUIRE(realized_count(sa) == realized_count(sb));
    REQUIRE(sa.season == sb.season);
    REQUIRE(sa.weekday == sb.weekday);
    REQUIRE(sa.temperature_c == sb.temperature_c);
  }
}
