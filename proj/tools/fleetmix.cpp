// Command-line front end: case generation, single-scenario solving, fleet
// optimization, sensitivity sweeps, plan verification, and exact reference
// solves. JSON in, CSV out; every output embeds the resolved configuration
// and seed, and timestamps live only in the run_meta sidecar so repeated
// runs produce byte-identical result files.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fleetmix/alns.hpp"
#include "fleetmix/eval.hpp"
#include "fleetmix/json_io.hpp"
#include "fleetmix/model.hpp"
#include "fleetmix/oracle.hpp"
#include "fleetmix/saa.hpp"
#include "fleetmix/scen.hpp"
#include "fleetmix/verify.hpp"

namespace {

using fleetmix::ConfigError;
using fleetmix::FleetMix;
using fleetmix::Instance;
using fleetmix::Scenario;
using fleetmix::Solution;
using fleetmix::ValidationError;
using json = nlohmann::json;

// ---- logging -----------------------------------------------------------------

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("FLEETMIX_LOG");
    if (!env) return 2;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "warn") return 1;
    if (v == "debug") return 3;
    return 2;
  }();
  return level;
}

void log_warn(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[warn] " << msg << "\n";
}
void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

// ---- formatting ----------------------------------------------------------------

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string usd(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

std::string iso_now() {
  char buf[32];
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << body;
}

// ---- configuration -------------------------------------------------------------

enum class CasePreset { custom, regionh, mth };

struct RunConfig {
  CasePreset preset = CasePreset::custom;
  std::string instance_path;
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir;

  fleetmix::alns::Params alns;
  fleetmix::saa::EstimationPolicy policy;
  fleetmix::saa::HorizonSpec horizon{1.0, 1.0};
  bool horizon_from_config = false;
  fleetmix::saa::FleetCaps caps;
  fleetmix::scen::ScenarioSpec scenario_spec;
  bool has_scenario_spec = false;
  double reserve_soc_fraction = 0.0;
};

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_alns_json(const json& j, fleetmix::alns::Params& p) {
  maybe(j, "cooling", p.cooling);
  maybe(j, "start_temp_factor", p.start_temp_factor);
  maybe(j, "removal_min", p.removal_min);
  maybe(j, "removal_max", p.removal_max);
  maybe(j, "segment", p.segment);
  maybe(j, "reset_threshold", p.reset_threshold);
  maybe(j, "reaction", p.reaction);
  maybe(j, "reward_best", p.reward_best);
  maybe(j, "reward_better", p.reward_better);
  maybe(j, "reward_fresh", p.reward_fresh);
  maybe(j, "p_worst", p.p_worst);
  maybe(j, "shaw_distance", p.shaw_distance);
  maybe(j, "shaw_time", p.shaw_time);
  maybe(j, "shaw_demand", p.shaw_demand);
  maybe(j, "shaw_same_route", p.shaw_same_route);
  maybe(j, "p_shaw", p.p_shaw);
  maybe(j, "sisr_avg_removed", p.sisr_avg_removed);
  maybe(j, "sisr_max_string", p.sisr_max_string);
  maybe(j, "sisr_keep_stop", p.sisr_keep_stop);
  maybe(j, "blink_rate", p.blink_rate);
  maybe(j, "iterations", p.iterations);
  maybe(j, "time_limit_s", p.time_limit_s);
}

json alns_to_json(const fleetmix::alns::Params& p) {
  return json{{"cooling", p.cooling},
              {"start_temp_factor", p.start_temp_factor},
              {"removal_min", p.removal_min},
              {"removal_max", p.removal_max},
              {"segment", p.segment},
              {"reset_threshold", p.reset_threshold},
              {"reaction", p.reaction},
              {"reward_best", p.reward_best},
              {"reward_better", p.reward_better},
              {"reward_fresh", p.reward_fresh},
              {"p_worst", p.p_worst},
              {"shaw_distance", p.shaw_distance},
              {"shaw_time", p.shaw_time},
              {"shaw_demand", p.shaw_demand},
              {"shaw_same_route", p.shaw_same_route},
              {"p_shaw", p.p_shaw},
              {"sisr_avg_removed", p.sisr_avg_removed},
              {"sisr_max_string", p.sisr_max_string},
              {"sisr_keep_stop", p.sisr_keep_stop},
              {"blink_rate", p.blink_rate},
              {"iterations", p.iterations},
              {"time_limit_s", p.time_limit_s}};
}

void apply_policy_json(const json& j, fleetmix::saa::EstimationPolicy& p) {
  maybe(j, "confidence", p.confidence);
  if (j.contains("rule")) {
    const std::string r = j.at("rule").get<std::string>();
    if (r == "absolute")
      p.rule = fleetmix::saa::StopRule::absolute;
    else if (r == "relative")
      p.rule = fleetmix::saa::StopRule::relative;
    else if (r == "fixed_n")
      p.rule = fleetmix::saa::StopRule::fixed_n;
    else
      throw ConfigError("unknown stopping rule '" + r + "'");
  }
  maybe(j, "epsilon", p.epsilon);
  maybe(j, "min_samples", p.min_samples);
  maybe(j, "max_samples", p.max_samples);
  maybe(j, "batch", p.batch);
  maybe(j, "common_random_numbers", p.common_random_numbers);
}

json policy_to_json(const fleetmix::saa::EstimationPolicy& p) {
  const char* rule = p.rule == fleetmix::saa::StopRule::absolute   ? "absolute"
                     : p.rule == fleetmix::saa::StopRule::relative ? "relative"
                                                                   : "fixed_n";
  return json{{"confidence", p.confidence},
              {"rule", rule},
              {"epsilon", p.epsilon},
              {"min_samples", p.min_samples},
              {"max_samples", p.max_samples},
              {"batch", p.batch},
              {"common_random_numbers", p.common_random_numbers}};
}

fleetmix::scen::ScenarioSpec scenario_spec_from_json(const json& j) {
  fleetmix::scen::ScenarioSpec spec;
  if (!j.contains("count")) throw ConfigError("scenario spec needs a count distribution");
  const json& c = j.at("count");
  spec.count.mean = c.at("mean").get<double>();
  spec.count.stddev = c.at("stddev").get<double>();
  spec.count.low = c.at("low").get<double>();
  spec.count.high = c.at("high").get<double>();
  spec.count.validate();
  if (j.contains("demand")) {
    const std::string d = j.at("demand").get<std::string>();
    if (d == "clinic_vials")
      spec.demand = fleetmix::scen::DemandRule::clinic_vials;
    else if (d == "keep_base")
      spec.demand = fleetmix::scen::DemandRule::keep_base;
    else if (d == "zero")
      spec.demand = fleetmix::scen::DemandRule::zero;
    else
      throw ConfigError("unknown demand rule '" + d + "'");
  }
  if (j.contains("temperature")) {
    const json& seasons = j.at("temperature").at("seasons");
    if (!seasons.is_array() || seasons.size() != 4)
      throw ConfigError("temperature spec needs four [min, max, mean] seasons");
    for (std::size_t s = 0; s < 4; ++s) {
      spec.temperature.seasons[s].min = seasons[s].at(0).get<double>();
      spec.temperature.seasons[s].max = seasons[s].at(1).get<double>();
      spec.temperature.seasons[s].mean = seasons[s].at(2).get<double>();
    }
  }
  return spec;
}

json scenario_spec_to_json(const fleetmix::scen::ScenarioSpec& spec) {
  const char* demand = spec.demand == fleetmix::scen::DemandRule::clinic_vials ? "clinic_vials"
                       : spec.demand == fleetmix::scen::DemandRule::zero       ? "zero"
                                                                               : "keep_base";
  json seasons = json::array();
  for (const auto& t : spec.temperature.seasons)
    seasons.push_back(json::array({t.min, t.max, t.mean}));
  return json{{"count",
               {{"mean", spec.count.mean},
                {"stddev", spec.count.stddev},
                {"low", spec.count.low},
                {"high", spec.count.high}}},
              {"demand", demand},
              {"temperature", {{"seasons", std::move(seasons)}}}};
}

void apply_config_file(RunConfig& cfg) {
  if (cfg.config_path.empty()) return;
  if (!std::filesystem::exists(cfg.config_path))
    throw ConfigError("config file not found: " + cfg.config_path);
  const json j = fleetmix::io::read_json_file(cfg.config_path);
  if (j.contains("alns")) apply_alns_json(j.at("alns"), cfg.alns);
  if (j.contains("policy")) apply_policy_json(j.at("policy"), cfg.policy);
  if (j.contains("horizon")) {
    maybe(j.at("horizon"), "period_varieties", cfg.horizon.period_varieties);
    maybe(j.at("horizon"), "periods_per_variety", cfg.horizon.periods_per_variety);
    cfg.horizon_from_config = true;
  }
  if (j.contains("caps")) {
    maybe(j.at("caps"), "per_type", cfg.caps.per_type);
    maybe(j.at("caps"), "step", cfg.caps.step);
    maybe(j.at("caps"), "total", cfg.caps.total);
  }
  if (j.contains("scenario")) {
    cfg.scenario_spec = scenario_spec_from_json(j.at("scenario"));
    cfg.has_scenario_spec = true;
  }
  maybe(j, "reserve_soc_fraction", cfg.reserve_soc_fraction);
}

const char* preset_name(CasePreset p) {
  switch (p) {
    case CasePreset::regionh: return "regionh";
    case CasePreset::mth: return "mth";
    case CasePreset::custom: return "custom";
  }
  return "custom";
}

// Instance plus the defaults the preset implies.
struct LoadedCase {
  Instance instance;
  fleetmix::scen::ScenarioSpec spec;
  bool has_spec = false;
  fleetmix::saa::HorizonSpec horizon{1.0, 1.0};
};

LoadedCase load_case(RunConfig& cfg) {
  LoadedCase lc;
  switch (cfg.preset) {
    case CasePreset::regionh:
      if (!cfg.instance_path.empty())
        throw ConfigError("--instance conflicts with a bundled case preset");
      lc.instance = fleetmix::scen::make_regionh_master();
      lc.spec = fleetmix::scen::regionh_spec();
      lc.has_spec = true;
      lc.horizon = fleetmix::saa::HorizonSpec::regionh();
      break;
    case CasePreset::mth:
      if (!cfg.instance_path.empty())
        throw ConfigError("--instance conflicts with a bundled case preset");
      lc.instance = fleetmix::scen::make_mth_master();
      lc.spec = fleetmix::scen::mth_spec();
      lc.has_spec = true;
      break;
    case CasePreset::custom:
      if (cfg.instance_path.empty())
        throw ConfigError("either --case regionh|mth or --instance is required");
      if (!std::filesystem::exists(cfg.instance_path))
        throw ConfigError("instance file not found: " + cfg.instance_path);
      lc.instance = fleetmix::io::load_instance(cfg.instance_path);
      break;
  }
  if (cfg.has_scenario_spec) {
    lc.spec = cfg.scenario_spec;
    lc.has_spec = true;
  }
  if (cfg.horizon_from_config) lc.horizon = cfg.horizon;
  return lc;
}

fleetmix::scen::ScenarioSpec require_spec(const LoadedCase& lc) {
  if (!lc.has_spec)
    throw ConfigError(
        "sampling needs a scenario spec: use a bundled --case or a config file with a "
        "\"scenario\" section");
  return lc.spec;
}

// Configuration echoed into every output body; excludes the worker count so
// parallel and serial runs stay byte-identical.
json resolved_config(const RunConfig& cfg, const LoadedCase& lc, const std::string& command) {
  json j{{"command", command},
         {"case", preset_name(cfg.preset)},
         {"seed", cfg.seed},
         {"alns", alns_to_json(cfg.alns)},
         {"policy", policy_to_json(cfg.policy)},
         {"horizon",
          {{"period_varieties", lc.horizon.period_varieties},
           {"periods_per_variety", lc.horizon.periods_per_variety}}},
         {"reserve_soc_fraction", cfg.reserve_soc_fraction}};
  if (!cfg.instance_path.empty()) j["instance"] = cfg.instance_path;
  if (lc.has_spec) j["scenario"] = scenario_spec_to_json(lc.spec);
  if (!cfg.caps.per_type.empty()) j["caps"]["per_type"] = cfg.caps.per_type;
  if (!cfg.caps.step.empty()) j["caps"]["step"] = cfg.caps.step;
  if (cfg.caps.total >= 0) j["caps"]["total"] = cfg.caps.total;
  return j;
}

void write_meta(const RunConfig& cfg, const json& config, const std::string& command) {
  json meta{{"command", command},
            {"timestamp_utc", iso_now()},
            {"jobs", cfg.jobs},
            {"config", config}};
  fleetmix::io::write_json_file(
      (std::filesystem::path(cfg.out_dir) / "run_meta.json").string(), meta);
}

std::filesystem::path prep_out(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("--out directory is required");
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---- shared pieces -------------------------------------------------------------

FleetMix resolve_mix(const Instance& inst, const std::vector<int>& counts) {
  if (counts.empty()) {
    FleetMix all;
    all.membership.assign(inst.vehicles.size(), 1);
    return all;
  }
  return fleetmix::saa::mix_from_counts(inst, counts);
}

std::string mix_label(const std::vector<int>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s.push_back('-');
    s += std::to_string(counts[i]);
  }
  return s;
}

Scenario load_scenario(const Instance& inst, const std::string& path, int index) {
  if (!std::filesystem::exists(path)) throw ConfigError("scenario file not found: " + path);
  const json j = fleetmix::io::read_json_file(path);
  if (j.contains("scenarios")) {
    const json& arr = j.at("scenarios");
    if (index < 0 || index >= static_cast<int>(arr.size()))
      throw ConfigError("scenario index " + std::to_string(index) + " outside the file's " +
                        std::to_string(arr.size()) + " scenarios");
    return fleetmix::io::scenario_from_json(inst, arr[static_cast<std::size_t>(index)]);
  }
  if (j.contains("scenario")) return fleetmix::io::scenario_from_json(inst, j.at("scenario"));
  return fleetmix::io::scenario_from_json(inst, j);
}

void write_sample_header(std::ostream& os) {
  os << "mix,sample,scenario_seed,cost_usd,temperature_c,season,weekday,realized,unserved,"
        "fill_rate,retries\n";
}

void write_sample_row(std::ostream& os, const std::string& mix, const fleetmix::saa::SampleRecord& r) {
  os << mix << ',' << r.index << ',' << r.scenario_seed << ',' << full(r.cost) << ','
     << full(r.temperature_c) << ',' << r.season << ',' << r.weekday << ',' << r.realized << ','
     << r.unserved << ',' << full(r.fill_rate) << ',' << r.retries << '\n';
}

std::string config_comment(const json& config) {
  return "# config " + config.dump() + "\n";
}

// ---- commands ------------------------------------------------------------------

int cmd_gen(RunConfig& cfg, int days) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  if (cfg.preset == CasePreset::custom)
    throw ConfigError("gen needs a bundled case preset (--case regionh or --case mth)");
  const auto dir = prep_out(cfg);
  const json config = resolved_config(cfg, lc, "gen");

  fleetmix::io::save_instance((dir / "master.json").string(), lc.instance);
  log_info("wrote " + (dir / "master.json").string() + " (" +
           std::to_string(lc.instance.customers.size()) + " customers, " +
           std::to_string(lc.instance.vehicles.size()) + " vehicles)");

  if (days > 0) {
    std::vector<std::string> warnings;
    json arr = json::array();
    for (int d = 0; d < days; ++d) {
      const std::uint64_t s = fleetmix::mix_seed(cfg.seed, static_cast<std::uint64_t>(d));
      const Scenario sc = fleetmix::scen::sample_scenario(lc.instance, lc.spec, s, &warnings);
      arr.push_back(fleetmix::io::to_json(lc.instance, sc));
    }
    json out{{"config", config}, {"days", days}, {"scenarios", std::move(arr)}};
    if (!warnings.empty()) out["warnings"] = warnings;
    for (const std::string& w : warnings) log_warn(w);
    fleetmix::io::write_json_file((dir / "scenarios.json").string(), out);
    log_info("wrote " + (dir / "scenarios.json").string());
  }
  write_meta(cfg, config, "gen");
  return 0;
}

int cmd_solve(RunConfig& cfg, const std::string& scenario_path, int scenario_index,
              const std::vector<int>& mix_counts) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  const auto dir = prep_out(cfg);
  const json config = resolved_config(cfg, lc, "solve");

  const FleetMix mix = resolve_mix(lc.instance, mix_counts);
  Scenario sc;
  if (!scenario_path.empty()) {
    sc = load_scenario(lc.instance, scenario_path, scenario_index);
  } else {
    sc = fleetmix::scen::sample_scenario(lc.instance, require_spec(lc), cfg.seed);
  }

  fleetmix::alns::Params params = cfg.alns;
  params.seed = cfg.seed;
  const Solution sol =
      fleetmix::alns::solve(lc.instance, mix, sc, params, {}, cfg.reserve_soc_fraction);

  fleetmix::io::write_json_file((dir / "solution.json").string(),
                                fleetmix::io::to_json(lc.instance, sol, sc, config));
  write_meta(cfg, config, "solve");

  std::cout << "routes " << sol.routes.size() << ", unserved " << sol.unserved.size() << "\n"
            << "fixed " << usd(sol.cost.fixed) << " USD\n"
            << "energy " << usd(sol.cost.energy) << " USD\n"
            << "maintenance " << usd(sol.cost.maintenance) << " USD\n"
            << "penalty " << usd(sol.cost.penalty) << " USD\n"
            << "total " << usd(sol.cost.total()) << " USD\n";
  return 0;
}

int cmd_optimize(RunConfig& cfg) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  const auto dir = prep_out(cfg);
  const json config = resolved_config(cfg, lc, "optimize");

  const std::vector<FleetMix> mixes = fleetmix::saa::enumerate_mixes(lc.instance, cfg.caps);
  if (mixes.empty()) throw ConfigError("the master instance owns no vehicles to enumerate");
  log_info("evaluating " + std::to_string(mixes.size()) + " fleet mixes");

  fleetmix::saa::EstimationPolicy policy = cfg.policy;
  policy.jobs = cfg.jobs;
  const auto sampler = fleetmix::saa::make_sampler(lc.instance, require_spec(lc));
  const auto solver =
      fleetmix::saa::make_alns_solver(lc.instance, cfg.alns, {}, cfg.reserve_soc_fraction);
  const std::vector<fleetmix::saa::MixEvaluation> ranked = fleetmix::saa::optimize(
      lc.instance, mixes, sampler, solver, policy, lc.horizon, cfg.seed);

  std::ostringstream mixcsv;
  mixcsv << config_comment(config) << "rank";
  for (const auto& t : lc.instance.vehicle_types) mixcsv << ",count_" << sanitize(t.name);
  mixcsv << ",acquisition_usd,mean_operational_usd,half_width_usd,samples,tco_usd,fill_rate,"
            "unserved_mean,failures\n";
  std::ostringstream samplecsv;
  samplecsv << config_comment(config);
  write_sample_header(samplecsv);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& e = ranked[i];
    mixcsv << (i + 1);
    for (int c : e.counts) mixcsv << ',' << c;
    mixcsv << ',' << full(e.acquisition) << ',' << full(e.mean_cost) << ',' << full(e.half_width)
           << ',' << e.n << ',' << full(e.tco) << ',' << full(e.fill_rate) << ','
           << full(e.unserved_mean) << ',' << e.failures << '\n';
    for (const auto& rec : e.samples) write_sample_row(samplecsv, mix_label(e.counts), rec);
  }
  write_text(dir / "mixes.csv", mixcsv.str());
  write_text(dir / "samples.csv", samplecsv.str());
  write_meta(cfg, config, "optimize");

  std::cout << "rank  mix        samples  acquisition_usd  mean_usd    half_width  tco_usd\n";
  const std::size_t top = std::min<std::size_t>(ranked.size(), 10);
  for (std::size_t i = 0; i < top; ++i) {
    const auto& e = ranked[i];
    char line[160];
    std::snprintf(line, sizeof line, "%-5zu %-10s %-8d %-16s %-11s %-11s %s", i + 1,
                  mix_label(e.counts).c_str(), e.n, usd(e.acquisition).c_str(),
                  usd(e.mean_cost).c_str(), usd(e.half_width).c_str(), usd(e.tco).c_str());
    std::cout << line << "\n";
  }
  log_info("wrote " + (dir / "mixes.csv").string() + " and samples.csv");
  return 0;
}

int cmd_sweep(RunConfig& cfg, const std::string& kind_name, const std::vector<double>& grid,
              const std::vector<int>& mix_counts) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  const auto dir = prep_out(cfg);

  fleetmix::saa::SweepKind kind;
  if (kind_name == "demand_scale")
    kind = fleetmix::saa::SweepKind::demand_scale;
  else if (kind_name == "fixed_temperature")
    kind = fleetmix::saa::SweepKind::fixed_temperature;
  else if (kind_name == "energy_prices")
    kind = fleetmix::saa::SweepKind::energy_prices;
  else if (kind_name == "additional_mass")
    kind = fleetmix::saa::SweepKind::additional_mass;
  else if (kind_name == "ev_price_delta")
    kind = fleetmix::saa::SweepKind::ev_price_delta;
  else
    throw ConfigError("unknown sweep kind '" + kind_name + "'");

  json config = resolved_config(cfg, lc, "sweep");
  config["sweep"] = {{"kind", kind_name}, {"grid", grid}};

  const FleetMix mix = resolve_mix(lc.instance, mix_counts);
  const std::vector<int> counts = fleetmix::saa::type_counts(lc.instance, mix);
  fleetmix::saa::EstimationPolicy policy = cfg.policy;
  policy.jobs = cfg.jobs;

  const std::vector<fleetmix::saa::SweepPoint> points =
      fleetmix::saa::sweep(lc.instance, mix, require_spec(lc), kind, grid, cfg.alns, policy,
                           lc.horizon, cfg.seed, {}, cfg.reserve_soc_fraction);

  std::ostringstream combined;
  combined << config_comment(config)
           << "kind,value,mix,acquisition_usd,mean_operational_usd,half_width_usd,samples,"
              "tco_usd,fill_rate,unserved_mean\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    combined << kind_name << ',' << full(p.value) << ',' << mix_label(counts) << ','
             << full(p.eval.acquisition) << ',' << full(p.eval.mean_cost) << ','
             << full(p.eval.half_width) << ',' << p.eval.n << ',' << full(p.eval.tco) << ','
             << full(p.eval.fill_rate) << ',' << full(p.eval.unserved_mean) << '\n';

    std::ostringstream point;
    point << config_comment(config) << "# value " << full(p.value) << "\n";
    write_sample_header(point);
    for (const auto& rec : p.eval.samples) write_sample_row(point, mix_label(counts), rec);
    char name[48];
    std::snprintf(name, sizeof name, "point_%02zu.csv", i);
    write_text(dir / name, point.str());
  }
  write_text(dir / ("sweep_" + kind_name + ".csv"), combined.str());
  write_meta(cfg, config, "sweep");
  std::cout << "sweep " << kind_name << " over " << grid.size() << " points done\n";
  for (const auto& p : points)
    std::cout << "  " << kind_name << "=" << full(p.value) << " mean "
              << usd(p.eval.mean_cost) << " USD, tco " << usd(p.eval.tco) << " USD\n";
  log_info("wrote " + (dir / ("sweep_" + kind_name + ".csv")).string());
  return 0;
}

int cmd_verify(RunConfig& cfg, const std::string& solution_path,
               const std::string& scenario_path, int scenario_index,
               const std::vector<int>& mix_counts) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  if (!std::filesystem::exists(solution_path))
    throw ConfigError("solution file not found: " + solution_path);
  const json j = fleetmix::io::read_json_file(solution_path);
  const fleetmix::io::StoredSolution stored =
      fleetmix::io::solution_from_json(lc.instance, j);

  Scenario sc;
  if (!scenario_path.empty())
    sc = load_scenario(lc.instance, scenario_path, scenario_index);
  else if (!stored.scenario.is_null())
    sc = fleetmix::io::scenario_from_json(lc.instance, stored.scenario);
  else
    throw ConfigError("no scenario: pass --scenario or use a solution with one embedded");

  fleetmix::verify::CheckedPlan plan;
  for (const auto& r : stored.routes) {
    fleetmix::verify::CheckedRoute cr;
    cr.vehicle = r.vehicle;
    cr.sequence = r.sequence;
    cr.arcs = r.arcs;
    cr.recharge_kwh = r.recharge_kwh;
    plan.routes.push_back(std::move(cr));
  }
  plan.unserved = stored.unserved;
  plan.has_stored_cost = j.contains("cost");
  plan.stored_cost = stored.cost;

  const FleetMix mix = resolve_mix(lc.instance, mix_counts);
  const fleetmix::verify::Report rep =
      fleetmix::verify::check(lc.instance, sc, mix, plan, {});
  if (rep.ok) {
    std::cout << "ok: plan verified, recomputed total " << usd(rep.recomputed.total())
              << " USD\n";
    return 0;
  }
  std::cout << "violation: " << rep.first_violation_name() << "\n";
  for (const auto& f : rep.findings) {
    std::cout << "  [" << fleetmix::eval::violation_name(f.violation) << "] ";
    if (f.route_index >= 0) std::cout << "route " << f.route_index << ": ";
    std::cout << f.detail << "\n";
  }
  return 3;
}

int cmd_oracle(RunConfig& cfg, const std::string& scenario_path, int scenario_index,
               const std::vector<int>& mix_counts, double time_budget_s) {
  apply_config_file(cfg);
  LoadedCase lc = load_case(cfg);
  const json config = resolved_config(cfg, lc, "oracle");

  Scenario sc;
  if (!scenario_path.empty())
    sc = load_scenario(lc.instance, scenario_path, scenario_index);
  else
    sc = fleetmix::scen::sample_scenario(lc.instance, require_spec(lc), cfg.seed);

  const FleetMix mix = resolve_mix(lc.instance, mix_counts);
  fleetmix::oracle::Limits limits;
  limits.time_budget_s = time_budget_s;
  const fleetmix::oracle::Result res =
      fleetmix::oracle::exact_solve(lc.instance, sc, mix, {}, limits, cfg.reserve_soc_fraction);

  if (!cfg.out_dir.empty()) {
    const auto dir = prep_out(cfg);
    fleetmix::io::write_json_file((dir / "solution.json").string(),
                                  fleetmix::io::to_json(lc.instance, res.best, sc, config));
    write_meta(cfg, config, "oracle");
  }
  std::cout << "optimum " << usd(res.best.cost.total()) << " USD over " << res.nodes
            << " search states (routes " << res.best.routes.size() << ", unserved "
            << res.best.unserved.size() << ")\n";
  return 0;
}

int cmd_params(RunConfig& cfg) {
  apply_config_file(cfg);
  json j;
  if (cfg.preset != CasePreset::custom || !cfg.instance_path.empty()) {
    LoadedCase lc = load_case(cfg);
    j = resolved_config(cfg, lc, "params");
  } else {
    j = json{{"command", "params"},
             {"alns", alns_to_json(cfg.alns)},
             {"policy", policy_to_json(cfg.policy)},
             {"horizon",
              {{"period_varieties", cfg.horizon.period_varieties},
               {"periods_per_variety", cfg.horizon.periods_per_variety}}},
             {"reserve_soc_fraction", cfg.reserve_soc_fraction}};
    if (cfg.has_scenario_spec) j["scenario"] = scenario_spec_to_json(cfg.scenario_spec);
  }
  if (!cfg.out_dir.empty()) {
    const auto dir = prep_out(cfg);
    fleetmix::io::write_json_file((dir / "params.json").string(), j);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleet size and mix optimization toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string case_name = "custom";
  std::string scenario_path;
  int scenario_index = 0;
  std::vector<int> mix_counts;
  std::vector<double> grid;
  std::string kind_name;
  int days = 0;
  double time_budget_s = 120.0;

  const std::map<std::string, CasePreset> case_map{{"custom", CasePreset::custom},
                                                   {"regionh", CasePreset::regionh},
                                                   {"mth", CasePreset::mth}};

  auto add_common = [&](CLI::App* sub, bool needs_seed, bool needs_out) {
    sub->add_option("--case", case_name, "bundled case preset")
        ->check(CLI::IsMember({"custom", "regionh", "mth"}));
    sub->add_option("--instance", cfg.instance_path, "instance JSON path");
    sub->add_option("--config", cfg.config_path, "run configuration JSON path");
    auto* seed = sub->add_option("--seed", cfg.seed, "master random seed");
    if (needs_seed) seed->required();
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* out = sub->add_option("--out", cfg.out_dir, "output directory");
    if (needs_out) out->required();
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a bundled synthetic case");
  add_common(gen, true, true);
  gen->add_option("--days", days, "scenario days to sample alongside the master")
      ->check(CLI::NonNegativeNumber);

  CLI::App* solve = app.add_subcommand("solve", "solve a single operational scenario");
  add_common(solve, true, true);
  solve->add_option("--scenario", scenario_path, "scenario JSON (file or gen output)");
  solve->add_option("--scenario-index", scenario_index, "index into a scenarios file");
  solve->add_option("--mix", mix_counts, "vehicles per type, e.g. 2,3")->delimiter(',');

  CLI::App* optimize = app.add_subcommand("optimize", "rank fleet mixes by TCO");
  add_common(optimize, true, true);
  optimize->add_option("--cap-total", cfg.caps.total, "max total fleet size");
  optimize->add_option("--cap-per-type", cfg.caps.per_type, "max vehicles per type")
      ->delimiter(',');
  optimize->add_option("--step", cfg.caps.step, "count step per type")->delimiter(',');

  CLI::App* sweep = app.add_subcommand("sweep", "one-parameter sensitivity analysis");
  add_common(sweep, true, true);
  sweep->add_option("--kind", kind_name, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"demand_scale", "fixed_temperature", "energy_prices",
                             "additional_mass", "ev_price_delta"}));
  sweep->add_option("--grid", grid, "grid values, e.g. -10,0,10,20,30")
      ->required()
      ->delimiter(',');
  sweep->add_option("--mix", mix_counts, "vehicles per type, e.g. 2,3")->delimiter(',');

  CLI::App* verify = app.add_subcommand("verify", "check a stored plan against all constraints");
  add_common(verify, false, false);
  std::string solution_path;
  verify->add_option("--solution", solution_path, "solution JSON path")->required();
  verify->add_option("--scenario", scenario_path, "scenario JSON overriding the embedded one");
  verify->add_option("--scenario-index", scenario_index, "index into a scenarios file");
  verify->add_option("--mix", mix_counts, "owned vehicles per type")->delimiter(',');

  CLI::App* oracle = app.add_subcommand("oracle", "exact reference solve for tiny scenarios");
  add_common(oracle, true, false);
  oracle->add_option("--scenario", scenario_path, "scenario JSON (file or gen output)");
  oracle->add_option("--scenario-index", scenario_index, "index into a scenarios file");
  oracle->add_option("--mix", mix_counts, "vehicles per type, e.g. 1,1")->delimiter(',');
  oracle->add_option("--time-budget", time_budget_s, "search wall-clock budget in seconds");

  CLI::App* params = app.add_subcommand("params", "print the resolved configuration");
  add_common(params, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "fleetmix") << " --help' for usage\n";
    return 2;
  }

  cfg.preset = case_map.at(case_name);
  try {
    if (gen->parsed()) return cmd_gen(cfg, days);
    if (solve->parsed()) return cmd_solve(cfg, scenario_path, scenario_index, mix_counts);
    if (optimize->parsed()) return cmd_optimize(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg, kind_name, grid, mix_counts);
    if (verify->parsed())
      return cmd_verify(cfg, solution_path, scenario_path, scenario_index, mix_counts);
    if (oracle->parsed())
      return cmd_oracle(cfg, scenario_path, scenario_index, mix_counts, time_budget_s);
    if (params->parsed()) return cmd_params(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
