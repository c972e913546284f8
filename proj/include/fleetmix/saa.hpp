#pragma once

// Strategic loop: sample-average estimation of operational cost with a
// Student-t confidence-interval stopping rule, fleet-mix enumeration, and
// total-cost-of-ownership ranking. Scenario and solver seeds are pure
// functions of (master seed, sample index), so results are reproducible and
// independent of the worker count, and common random numbers across mixes
// come for free.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fleetmix/alns.hpp"
#include "fleetmix/eval.hpp"
#include "fleetmix/model.hpp"
#include "fleetmix/parallel.hpp"
#include "fleetmix/rng.hpp"
#include "fleetmix/scen.hpp"
#include "fleetmix/stats.hpp"

namespace fleetmix::saa {

enum class StopRule {
  absolute,  // stop once half-width <= epsilon
  relative,  // stop once half-width <= epsilon * |mean|
  fixed_n,   // always run max_samples
};

struct EstimationPolicy {
  double confidence = 0.95;
  StopRule rule = StopRule::relative;
  double epsilon = 0.02;
  int min_samples = 30;
  int max_samples = 1000;
  int batch = 1;  // samples added between stopping-rule checks
  bool common_random_numbers = true;
  int jobs = 1;

  void validate() const {
    if (!(confidence > 0.0 && confidence < 1.0))
      throw ConfigError("confidence must be inside (0,1)");
    if (rule != StopRule::fixed_n && !(epsilon > 0.0))
      throw ConfigError("epsilon must be positive");
    if (min_samples < 1) throw ConfigError("min samples must be >= 1");
    if (max_samples < min_samples) throw ConfigError("max samples must be >= min samples");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

// Operating horizon in periods, factored as distinct varieties times
// occurrences per variety; for the clinic case, working days times two
// shifts per day over the service life.
struct HorizonSpec {
  double period_varieties = 1.0;
  double periods_per_variety = 1.0;

  double total_periods() const { return period_varieties * periods_per_variety; }

  void validate() const {
    if (!(period_varieties >= 1.0 && periods_per_variety >= 1.0))
      throw ConfigError("horizon factors must be >= 1");
  }

  static HorizonSpec regionh() { return {10.6 * 227.0, 2.0}; }
};

struct SampleRecord {
  int index = 0;
  std::uint64_t scenario_seed = 0;
  double cost = 0.0;
  double temperature_c = 0.0;
  int season = -1;
  int weekday = -1;
  int realized = 0;
  int unserved = 0;
  double fill_rate = 0.0;
  int retries = 0;
};

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;
  int n = 0;
  int failures = 0;  // solver exceptions that forced a resample
  std::vector<SampleRecord> samples;
};

// What the estimator needs back from one second-stage solve.
struct SampleResult {
  double cost = 0.0;
  double fill_rate = 0.0;
  int unserved = 0;
};

using Sampler = std::function<Scenario(std::uint64_t)>;
using Solver = std::function<SampleResult(const FleetMix&, const Scenario&, std::uint64_t)>;

// Both factories capture the instance by reference; it must outlive them.
inline Sampler make_sampler(const Instance& master, scen::ScenarioSpec spec) {
  return [&master, spec](std::uint64_t seed) { return scen::sample_scenario(master, spec, seed); };
}

inline Solver make_alns_solver(const Instance& inst, alns::Params params = {},
                               energy::PowerContext ctx = {}, double reserve_soc_fraction = 0.0) {
  return [&inst, params, ctx, reserve_soc_fraction](const FleetMix& mix, const Scenario& sc,
                                                    std::uint64_t seed) {
    alns::Params p = params;
    p.seed = seed;
    const Solution sol = alns::solve(inst, mix, sc, p, ctx, reserve_soc_fraction);
    eval::Evaluator ev(inst, sc, ctx, reserve_soc_fraction);
    const eval::SolutionEvaluation se = ev.evaluate_solution(sol, mix);
    SampleResult r;
    r.cost = sol.cost.total();
    r.fill_rate = se.fill_rate();
    r.unserved = static_cast<int>(sol.unserved.size());
    return r;
  };
}

namespace detail {

inline std::uint64_t sample_seed(std::uint64_t seed, int index, int attempt) {
  std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(index));
  for (int a = 0; a < attempt; ++a) s = mix_seed(s, stream_tag::kRetry);
  return s;
}

}  // namespace detail

// Monte Carlo estimate of the expected operational cost of one fleet mix.
// Samples are produced in fixed index batches (min_samples first, then
// `batch` at a time) so the set of evaluated scenarios depends only on the
// policy, never on scheduling.
inline Estimate estimate_operational_cost(const FleetMix& mix, const Sampler& sampler,
                                          const Solver& solver, const EstimationPolicy& policy,
                                          std::uint64_t seed) {
  policy.validate();

  auto run_one = [&](int index) {
    SampleRecord rec;
    rec.index = index;
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t s = detail::sample_seed(seed, index, attempt);
      try {
        const Scenario sc = sampler(s);
        const SampleResult out = solver(mix, sc, mix_seed(s, stream_tag::kSolver));
        rec.scenario_seed = s;
        rec.cost = out.cost;
        rec.temperature_c = sc.temperature_c;
        rec.season = sc.season;
        rec.weekday = sc.weekday;
        rec.realized = static_cast<int>(
            std::count(sc.realized.begin(), sc.realized.end(), std::uint8_t{1}));
        rec.unserved = out.unserved;
        rec.fill_rate = out.fill_rate;
        rec.retries = attempt;
        return rec;
      } catch (const ConfigError&) {
        throw;  // misconfiguration will not improve on retry
      } catch (const std::exception&) {
        if (attempt >= 8) throw;
      }
    }
  };

  Estimate est;
  std::vector<double> costs;
  costs.reserve(static_cast<std::size_t>(policy.min_samples));

  auto refresh = [&] {
    est.n = static_cast<int>(costs.size());
    est.mean = costs.empty() ? 0.0 : stats::mean(costs);
    est.half_width = stats::half_width(costs, policy.confidence);
  };
  auto stop_now = [&] {
    if (est.n < policy.min_samples) return false;
    switch (policy.rule) {
      case StopRule::absolute: return est.half_width <= policy.epsilon;
      case StopRule::relative: return est.half_width <= policy.epsilon * std::abs(est.mean);
      case StopRule::fixed_n: return false;
    }
    return false;
  };

  int produced = 0;
  while (produced < policy.max_samples) {
    const int want = produced == 0
                         ? std::min(policy.min_samples, policy.max_samples)
                         : std::min(policy.batch, policy.max_samples - produced);
    std::vector<SampleRecord> chunk(static_cast<std::size_t>(want));
    par::parallel_for(static_cast<std::size_t>(want), policy.jobs,
                      [&](std::size_t k) { chunk[k] = run_one(produced + static_cast<int>(k)); });
    for (SampleRecord& rec : chunk) {
      est.failures += rec.retries;
      costs.push_back(rec.cost);
      est.samples.push_back(std::move(rec));
    }
    produced += want;
    refresh();
    if (stop_now()) break;
  }
  return est;
}

inline double acquisition_cost(const Instance& inst, const FleetMix& mix) {
  double acq = 0.0;
  for (int id : mix.selected())
    acq += inst
               .vehicle_types[static_cast<std::size_t>(
                   inst.vehicles[static_cast<std::size_t>(id)].type)]
               .acquisition_cost;
  return acq;
}

inline double tco(double acquisition, double mean_operational_cost, const HorizonSpec& horizon) {
  horizon.validate();
  return acquisition + horizon.total_periods() * mean_operational_cost;
}

inline std::vector<int> type_counts(const Instance& inst, const FleetMix& mix) {
  std::vector<int> counts(inst.vehicle_types.size(), 0);
  for (int id : mix.selected())
    counts[static_cast<std::size_t>(inst.vehicles[static_cast<std::size_t>(id)].type)]++;
  return counts;
}

struct MixEvaluation {
  FleetMix mix;
  std::vector<int> counts;  // vehicles per type
  double mean_cost = 0.0;
  double half_width = 0.0;
  int n = 0;
  double acquisition = 0.0;
  double tco = 0.0;
  double fill_rate = 0.0;       // mean over samples
  double unserved_mean = 0.0;   // mean skipped customers per scenario
  int failures = 0;
  std::vector<SampleRecord> samples;
};

struct FleetCaps {
  std::vector<int> per_type;  // max per type; empty = whatever the master owns
  std::vector<int> step;      // count granularity per type; empty = ones
  int total = -1;             // max fleet size; -1 = unbounded

  void validate(std::size_t types) const {
    if (!per_type.empty() && per_type.size() != types)
      throw ConfigError("per-type caps must cover every vehicle type");
    if (!step.empty() && step.size() != types)
      throw ConfigError("per-type steps must cover every vehicle type");
    for (int c : per_type)
      if (c < 0) throw ConfigError("per-type cap must be >= 0");
    for (int s : step)
      if (s < 1) throw ConfigError("per-type step must be >= 1");
  }
};

// Vehicle ids per type, nearest charger first, so electrified subsets
// follow the eligibility order. Identical vehicles are interchangeable.
inline std::vector<std::vector<int>> type_pools(const Instance& inst) {
  std::vector<std::vector<int>> pool(inst.vehicle_types.size());
  for (const Vehicle& v : inst.vehicles) pool[static_cast<std::size_t>(v.type)].push_back(v.id);
  for (std::vector<int>& p : pool)
    std::stable_sort(p.begin(), p.end(), [&](int a, int b) {
      return inst.vehicles[static_cast<std::size_t>(a)].charger_distance_km <
             inst.vehicles[static_cast<std::size_t>(b)].charger_distance_km;
    });
  return pool;
}

inline FleetMix mix_from_counts(const Instance& inst, const std::vector<int>& counts) {
  const std::vector<std::vector<int>> pool = type_pools(inst);
  if (counts.size() != pool.size())
    throw ConfigError("mix counts must cover every vehicle type");
  FleetMix m;
  m.membership.assign(inst.vehicles.size(), 0);
  for (std::size_t t = 0; t < pool.size(); ++t) {
    if (counts[t] < 0 || counts[t] > static_cast<int>(pool[t].size()))
      throw ConfigError("mix count for type '" + inst.vehicle_types[t].name +
                        "' exceeds the master fleet");
    for (int k = 0; k < counts[t]; ++k)
      m.membership[static_cast<std::size_t>(pool[t][static_cast<std::size_t>(k)])] = 1;
  }
  return m;
}

// All per-type count combinations within the caps, expanded to membership
// vectors.
inline std::vector<FleetMix> enumerate_mixes(const Instance& inst, const FleetCaps& caps = {}) {
  const std::size_t types = inst.vehicle_types.size();
  caps.validate(types);
  if (inst.vehicles.empty()) return {};

  const std::vector<std::vector<int>> pool = type_pools(inst);
  std::vector<int> cap(types);
  for (std::size_t t = 0; t < types; ++t) {
    cap[t] = static_cast<int>(pool[t].size());
    if (!caps.per_type.empty()) cap[t] = std::min(cap[t], caps.per_type[t]);
  }

  std::vector<FleetMix> mixes;
  std::vector<int> counts(types, 0);
  const auto emit = [&] {
    FleetMix m;
    m.membership.assign(inst.vehicles.size(), 0);
    for (std::size_t t = 0; t < types; ++t)
      for (int k = 0; k < counts[t]; ++k)
        m.membership[static_cast<std::size_t>(pool[t][static_cast<std::size_t>(k)])] = 1;
    mixes.push_back(std::move(m));
  };
  const std::function<void(std::size_t, int)> recurse = [&](std::size_t t, int used) {
    if (t == types) {
      emit();
      return;
    }
    const int room = caps.total < 0 ? cap[t] : std::min(cap[t], caps.total - used);
    const int step = caps.step.empty() ? 1 : caps.step[t];
    for (int c = 0; c <= room; c += step) {
      counts[t] = c;
      recurse(t + 1, used + c);
    }
    counts[t] = 0;
  };
  recurse(0, 0);
  return mixes;
}

// Evaluates every mix with common random numbers (per-sample scenarios are
// bit-identical across mixes) and ranks by TCO ascending. Ties keep the
// input order.
inline std::vector<MixEvaluation> optimize(const Instance& inst,
                                           const std::vector<FleetMix>& mixes,
                                           const Sampler& sampler, const Solver& solver,
                                           const EstimationPolicy& policy,
                                           const HorizonSpec& horizon, std::uint64_t seed) {
  policy.validate();
  horizon.validate();
  if (mixes.empty()) throw ConfigError("optimize needs at least one fleet mix");

  std::vector<MixEvaluation> evals(mixes.size());
  for (std::size_t m = 0; m < mixes.size(); ++m) {
    const std::uint64_t mix_stream =
        policy.common_random_numbers
            ? seed
            : mix_seed(mix_seed(seed, stream_tag::kMix), static_cast<std::uint64_t>(m));
    Estimate est = estimate_operational_cost(mixes[m], sampler, solver, policy, mix_stream);

    MixEvaluation& e = evals[m];
    e.mix = mixes[m];
    e.counts = type_counts(inst, mixes[m]);
    e.mean_cost = est.mean;
    e.half_width = est.half_width;
    e.n = est.n;
    e.failures = est.failures;
    e.acquisition = acquisition_cost(inst, mixes[m]);
    e.tco = tco(e.acquisition, e.mean_cost, horizon);
    double fill = 0.0, unserved = 0.0;
    for (const SampleRecord& rec : est.samples) {
      fill += rec.fill_rate;
      unserved += rec.unserved;
    }
    if (!est.samples.empty()) {
      fill /= static_cast<double>(est.samples.size());
      unserved /= static_cast<double>(est.samples.size());
    }
    e.fill_rate = fill;
    e.unserved_mean = unserved;
    e.samples = std::move(est.samples);
  }
  std::stable_sort(evals.begin(), evals.end(),
                   [](const MixEvaluation& a, const MixEvaluation& b) { return a.tco < b.tco; });
  return evals;
}

// ---- one-dimensional sensitivity sweeps --------------------------------------

enum class SweepKind {
  demand_scale,       // multiply realized demands, round half up
  fixed_temperature,  // pin the ambient temperature
  energy_prices,      // multiply every type's energy price
  additional_mass,    // add kilograms of equipment to every type
  ev_price_delta,     // shift the acquisition price of electric types
};

inline const char* sweep_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::demand_scale: return "demand_scale";
    case SweepKind::fixed_temperature: return "fixed_temperature";
    case SweepKind::energy_prices: return "energy_prices";
    case SweepKind::additional_mass: return "additional_mass";
    case SweepKind::ev_price_delta: return "ev_price_delta";
  }
  return "unknown";
}

struct SweepPoint {
  double value = 0.0;
  MixEvaluation eval;
};

inline void validate_grid(SweepKind kind, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("sweep grid must not be empty");
  for (double v : grid) {
    if (!std::isfinite(v)) throw ConfigError("sweep grid values must be finite");
    if ((kind == SweepKind::demand_scale || kind == SweepKind::energy_prices) && v < 0.0)
      throw ConfigError("scale-type sweep values must be >= 0");
  }
}

namespace detail {

inline void scale_demands(const Instance& inst, Scenario& sc, double scale) {
  if (scale == 1.0) return;  // bitwise identity with the base run
  for (std::size_t c = 0; c < sc.realized.size(); ++c) {
    if (!sc.realized[c]) continue;
    const double base =
        std::isnan(sc.demand_override[c])
            ? inst.nodes[static_cast<std::size_t>(inst.customers[c])].demand
            : sc.demand_override[c];
    sc.demand_override[c] = std::floor(base * scale + 0.5);
  }
}

inline Instance transformed_master(const Instance& master, SweepKind kind, double value) {
  Instance inst = master;
  switch (kind) {
    case SweepKind::energy_prices:
      for (VehicleType& t : inst.vehicle_types) t.energy_cost_per_kwh *= value;
      break;
    case SweepKind::additional_mass:
      for (VehicleType& t : inst.vehicle_types) {
        t.additional_mass_kg += value;
        if (t.additional_mass_kg < 0.0)
          throw ConfigError("mass sweep would make additional mass negative");
      }
      break;
    case SweepKind::ev_price_delta:
      for (VehicleType& t : inst.vehicle_types) {
        if (t.powertrain != Powertrain::ev) continue;
        t.acquisition_cost += value;
        if (t.acquisition_cost < 0.0)
          throw ConfigError("price sweep would make acquisition cost negative");
      }
      break;
    default:
      break;
  }
  return inst;
}

}  // namespace detail

// Re-estimates one mix per grid point with a single parameter overridden.
// The scenario stream is shared across grid points, so differences are due
// to the swept parameter alone.
inline std::vector<SweepPoint> sweep(const Instance& master, const FleetMix& mix,
                                     const scen::ScenarioSpec& spec, SweepKind kind,
                                     const std::vector<double>& grid,
                                     const alns::Params& solver_params,
                                     const EstimationPolicy& policy, const HorizonSpec& horizon,
                                     std::uint64_t seed, energy::PowerContext ctx = {},
                                     double reserve_soc_fraction = 0.0) {
  validate_grid(kind, grid);
  policy.validate();
  horizon.validate();

  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double value : grid) {
    const Instance inst = detail::transformed_master(master, kind, value);
    Sampler sampler = [&inst, &spec, kind, value](std::uint64_t s) {
      Scenario sc = scen::sample_scenario(inst, spec, s);
      if (kind == SweepKind::fixed_temperature) sc.temperature_c = value;
      if (kind == SweepKind::demand_scale) detail::scale_demands(inst, sc, value);
      return sc;
    };
    Solver solver = make_alns_solver(inst, solver_params, ctx, reserve_soc_fraction);
    std::vector<MixEvaluation> ranked =
        optimize(inst, {mix}, sampler, solver, policy, horizon, seed);
    SweepPoint p;
    p.value = value;
    p.eval = std::move(ranked.front());
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace fleetmix::saa
