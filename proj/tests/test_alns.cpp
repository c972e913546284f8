#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fleetmix/alns.hpp"
#include "fleetmix/oracle.hpp"
#include "fleetmix/rng.hpp"
#include "fleetmix/verify.hpp"
#include "test_util.hpp"

using namespace fleetmix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Fixture {
  Instance inst;
  Scenario sc;
  FleetMix mix;
  energy::PowerContext ctx;
};

// Generous single-depot instance: every customer fits comfortably.
Fixture wide_fixture(int customers, int vehicles, double spread = 10.0) {
  testutil::InstanceBuilder b(900.0);
  const int ev = b.add_type("van_e", Powertrain::ev, 37.0, 100.0);
  Rng g = Rng::stream(7, {stream_tag::kGenerator});
  for (int i = 0; i < customers; ++i)
    b.add_customer(g.uniform(-spread, spread), g.uniform(-spread, spread),
                   g.uniform(2.0, 12.0), 0.0, -1.0, 5.0, 200.0);
  for (int i = 0; i < vehicles; ++i) b.add_vehicle(ev);
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);
  return f;
}

double penalty_sum(const Fixture& f) {
  double t = 0.0;
  for (int c : f.inst.customers) t += f.inst.nodes[static_cast<std::size_t>(c)].penalty;
  return t;
}

verify::Report verify_solution(const Fixture& f, const Solution& sol) {
  verify::CheckedPlan plan;
  for (const Route& r : sol.routes) plan.routes.push_back({r.vehicle, r.sequence, {}, r.recharge_kwh});
  plan.unserved = sol.unserved;
  plan.stored_cost = sol.cost;
  plan.has_stored_cost = true;
  return verify::check(f.inst, f.sc, f.mix, plan, f.ctx);
}

std::vector<int> routed_customers(const Instance& inst, const alns::SearchState& s) {
  std::vector<int> out;
  for (const Route& r : s.routes)
    for (int nd : r.sequence)
      if (inst.nodes[static_cast<std::size_t>(nd)].kind == NodeKind::customer)
        out.push_back(nd);
  std::sort(out.begin(), out.end());
  return out;
}

// Every realized customer is routed exactly once or unserved exactly once,
// every route re-plans feasibly, and the cached totals match a recompute.
void require_consistent(const Fixture& f, const alns::Workspace& ws,
                        const alns::SearchState& s) {
  std::vector<int> seen = routed_customers(f.inst, s);
  std::vector<int> uns = s.unserved;
  std::sort(uns.begin(), uns.end());
  std::vector<int> all = seen;
  all.insert(all.end(), uns.begin(), uns.end());
  std::sort(all.begin(), all.end());
  REQUIRE(std::adjacent_find(all.begin(), all.end()) == all.end());
  std::vector<int> realized = ws.realized_customers();
  std::sort(realized.begin(), realized.end());
  REQUIRE(all == realized);

  double total = 0.0;
  REQUIRE(s.routes.size() == s.route_totals.size());
  for (std::size_t k = 0; k < s.routes.size(); ++k) {
    const eval::RouteCost rc = ws.evaluator().route_cost(s.routes[k]);
    REQUIRE(rc.feasible);
    REQUIRE_THAT(s.route_totals[k], WithinAbs(rc.total(), 1e-6));
    total += s.route_totals[k];
  }
  for (int c : s.unserved) total += f.inst.nodes[static_cast<std::size_t>(c)].penalty;
  REQUIRE_THAT(s.total, WithinAbs(total, 1e-6));
}

}  // namespace

TEST_CASE("parameter validation rejects out-of-range settings") {
  alns::Params p;
  REQUIRE_NOTHROW(p.validate());

  auto bad = [](auto&& tweak) {
    alns::Params q;
    tweak(q);
    REQUIRE_THROWS_AS(q.validate(), ConfigError);
  };
  bad([](alns::Params& q) { q.cooling = 0.0; });
  bad([](alns::Params& q) { q.cooling = 1.0; });
  bad([](alns::Params& q) { q.removal_min = 0.0; });
  bad([](alns::Params& q) { q.removal_min = 0.5; q.removal_max = 0.4; });
  bad([](alns::Params& q) { q.removal_max = 1.5; });
  bad([](alns::Params& q) { q.reward_best = -1.0; });
  bad([](alns::Params& q) { q.reaction = 1.5; });
  bad([](alns::Params& q) { q.segment = 0; });
  bad([](alns::Params& q) { q.reset_threshold = 0; });
  bad([](alns::Params& q) { q.blink_rate = 1.0; });
  bad([](alns::Params& q) { q.iterations = -1; });
  bad([](alns::Params& q) { q.sisr_max_string = 0; });
}

TEST_CASE("start temperature matches the half-acceptance identity") {
  const double t = alns::start_temperature(1000.0, 0.015);
  REQUIRE_THAT(t, WithinAbs(21.640425613334451, 1e-9));
  // A solution worse by exactly s * cost is accepted with probability 1/2.
  REQUIRE_THAT(std::exp(-(0.015 * 1000.0) / t), WithinAbs(0.5, 1e-12));

  REQUIRE(alns::start_temperature(1000.0, 0.0) == 0.0);
  REQUIRE_THAT(alns::start_temperature(2000.0, 0.015), WithinRel(2.0 * t, 1e-12));
  REQUIRE_THROWS_AS(alns::start_temperature(0.0, 0.015), std::domain_error);
  REQUIRE_THROWS_AS(alns::start_temperature(-5.0, 0.015), std::domain_error);
  REQUIRE_THROWS_AS(alns::start_temperature(100.0, -0.1), std::domain_error);
}

TEST_CASE("weight adaptation blends score per use and resets counters") {
  alns::OperatorBank bank = alns::OperatorBank::standard();
  REQUIRE(bank.destroy.size() == 5);
  REQUIRE(bank.repair.size() == 2);
  for (const auto& op : bank.destroy) REQUIRE(op.weight == 1.0);

  bank.destroy[0].score = 66.0;
  bank.destroy[0].uses = 2;
  bank.repair[1].score = 13.0;
  bank.repair[1].uses = 1;
  alns::adapt_weights(bank, 0.1);
  REQUIRE_THAT(bank.destroy[0].weight, WithinAbs(0.9 + 0.1 * 33.0, 1e-12));
  REQUIRE(bank.destroy[1].weight == 1.0);  // unused: untouched
  REQUIRE_THAT(bank.repair[1].weight, WithinAbs(0.9 + 0.1 * 13.0, 1e-12));
  REQUIRE(bank.destroy[0].score == 0.0);
  REQUIRE(bank.destroy[0].uses == 0);

  // Full reaction replaces the weight with the observed score per use.
  bank.destroy[2].score = 42.0;
  bank.destroy[2].uses = 6;
  alns::adapt_weights(bank, 1.0);
  REQUIRE_THAT(bank.destroy[2].weight, WithinAbs(7.0, 1e-12));
}

TEST_CASE("degenerate inputs return the trivial solutions") {
  Fixture f = wide_fixture(3, 2);

  SECTION("empty fleet leaves everything unserved at the penalty sum") {
    FleetMix none;
    none.membership.assign(f.inst.vehicles.size(), 0);
    const Solution sol = alns::solve(f.inst, none, f.sc);
    REQUIRE(sol.routes.empty());
    REQUIRE(sol.unserved.size() == f.inst.customers.size());
    REQUIRE_THAT(sol.cost.total(), WithinAbs(penalty_sum(f), 1e-9));
  }

  SECTION("no realized customers yields an empty free plan") {
    Scenario empty = f.sc;
    std::fill(empty.realized.begin(), empty.realized.end(), std::uint8_t{0});
    const Solution sol = alns::solve(f.inst, f.mix, empty);
    REQUIRE(sol.routes.empty());
    REQUIRE(sol.unserved.empty());
    REQUIRE(sol.cost.total() == 0.0);
  }

  SECTION("zero iterations returns the deterministic construction") {
    alns::Params p;
    p.iterations = 0;
    p.seed = 11;
    const Solution sol = alns::solve(f.inst, f.mix, f.sc, p);
    const Solution init = alns::initial_solution(f.inst, f.mix, f.sc, f.ctx, 11);
    REQUIRE(sol.routes == init.routes);
    REQUIRE(sol.unserved == init.unserved);
    REQUIRE_THAT(sol.cost.total(), WithinAbs(init.cost.total(), 1e-12));
  }
}

TEST_CASE("construction serves everyone when capacity is generous") {
  Fixture f = wide_fixture(8, 3);
  const Solution init = alns::initial_solution(f.inst, f.mix, f.sc, f.ctx, 3);
  REQUIRE(init.unserved.empty());
  const verify::Report rep = verify_solution(f, init);
  INFO((rep.findings.empty() ? std::string{} : rep.findings.front().detail));
  REQUIRE(rep.ok);
}

TEST_CASE("construction leaves impossible customers unserved") {
  testutil::InstanceBuilder b(600.0);
  const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 100.0);
  b.add_customer(3.0, 0.0, 5.0);
  const int locked = b.add_customer(-3.0, 0.0, 5.0, 0.0, -1.0, 5.0, 30.0, 9);
  b.add_vehicle(ty, {0});
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);

  const Solution init = alns::initial_solution(f.inst, f.mix, f.sc);
  REQUIRE(init.unserved == std::vector<int>{locked});
  const Solution sol = alns::solve(f.inst, f.mix, f.sc);
  REQUIRE(sol.unserved == std::vector<int>{locked});
}

TEST_CASE("search never worsens the constructed plan") {
  Fixture f = wide_fixture(10, 3);
  alns::Params p;
  p.iterations = 400;
  p.time_limit_s = 0.0;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    p.seed = seed;
    const Solution init = alns::initial_solution(f.inst, f.mix, f.sc, f.ctx, seed);
    const Solution sol = alns::solve(f.inst, f.mix, f.sc, p);
    REQUIRE(sol.cost.total() <= init.cost.total() + 1e-9);
    const verify::Report rep = verify_solution(f, sol);
    REQUIRE(rep.ok);
  }
}

TEST_CASE("identical seeds reproduce the identical solution") {
  Fixture f = wide_fixture(9, 3);
  alns::Params p;
  p.iterations = 300;
  p.time_limit_s = 0.0;  // wall clocks must not influence the trajectory
  p.seed = 42;
  const Solution a = alns::solve(f.inst, f.mix, f.sc, p);
  const Solution b = alns::solve(f.inst, f.mix, f.sc, p);
  REQUIRE(a.routes == b.routes);
  REQUIRE(a.unserved == b.unserved);
  REQUIRE(a.cost == b.cost);
}

TEST_CASE("destroy operators detach exactly what they report") {
  Fixture f = wide_fixture(12, 3);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(5, {stream_tag::kDestroy});
  alns::SearchState base = ws.construct(rng);
  REQUIRE(base.unserved.empty());

  SECTION("random removal of everyone empties the plan") {
    alns::SearchState s = base;
    const std::vector<int> removed = ws.destroy_random(s, 12, rng);
    REQUIRE(removed.size() == 12);
    REQUIRE(s.routes.empty());
    REQUIRE_THAT(s.total, WithinAbs(0.0, 1e-12));
  }

  SECTION("random removal keeps the untouched customers consistent") {
    alns::SearchState s = base;
    const std::vector<int> removed = ws.destroy_random(s, 4, rng);
    REQUIRE(removed.size() == 4);
    std::vector<int> left = routed_customers(f.inst, s);
    for (int c : removed)
      REQUIRE(std::find(left.begin(), left.end(), c) == left.end());
    for (std::size_t k = 0; k < s.routes.size(); ++k)
      REQUIRE_THAT(s.route_totals[k],
                   WithinAbs(ws.evaluator().route_cost(s.routes[k]).total(), 1e-9));
  }

  SECTION("whole-route removal drops tours atomically") {
    alns::SearchState s = base;
    const std::size_t before = s.routes.size();
    const std::vector<int> removed = ws.destroy_random_route(s, 1, rng);
    REQUIRE(!removed.empty());
    REQUIRE(s.routes.size() == before - 1);
  }

  SECTION("zero-count removal is the identity") {
    alns::SearchState s = base;
    const double total = s.total;
    REQUIRE(ws.destroy_random(s, 0, rng).empty());
    REQUIRE(s.routes == base.routes);
    REQUIRE_THAT(s.total, WithinAbs(total, 1e-12));
  }
}

TEST_CASE("worst removal targets the most expensive detour") {
  testutil::InstanceBuilder b(900.0);
  const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 100.0);
  b.add_customer(1.0, 0.0, 2.0);
  b.add_customer(2.0, 0.0, 2.0);
  b.add_customer(3.0, 0.0, 2.0);
  const int outlier = b.add_customer(0.0, 40.0, 2.0);
  b.add_vehicle(ty);
  b.add_vehicle(ty);
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);

  alns::Params p;
  p.p_worst = 1000.0;  // rank randomization off: always take the top saving
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(9, {stream_tag::kDestroy});
  alns::SearchState s = ws.construct(rng);
  REQUIRE(s.unserved.empty());

  const std::vector<int> removed = ws.destroy_worst(s, 1, rng);
  REQUIRE(removed == std::vector<int>{outlier});
}

TEST_CASE("related removal keeps the removed set in one cluster") {
  testutil::InstanceBuilder b(900.0);
  const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 60.0);
  std::vector<int> left, right;
  for (int i = 0; i < 3; ++i) left.push_back(b.add_customer(-20.0, i * 1.0, 2.0));
  for (int i = 0; i < 3; ++i) right.push_back(b.add_customer(20.0, i * 1.0, 2.0));
  b.add_vehicle(ty);
  b.add_vehicle(ty);
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);

  alns::Params p;
  p.p_shaw = 1000.0;  // always pick the most related candidate
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);

  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng = Rng::stream(seed, {stream_tag::kDestroy});
    alns::SearchState s = ws.construct(rng);
    if (!s.unserved.empty()) continue;
    const std::vector<int> removed = ws.destroy_shaw(s, 3, rng);
    REQUIRE(removed.size() == 3);
    const bool in_left =
        std::find(left.begin(), left.end(), removed.front()) != left.end();
    for (int c : removed) {
      const bool c_left = std::find(left.begin(), left.end(), c) != left.end();
      REQUIRE(c_left == in_left);
    }
  }
}

TEST_CASE("string removal stays consistent and feasible") {
  Fixture f = wide_fixture(14, 3);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng = Rng::stream(seed, {stream_tag::kDestroy});
    alns::SearchState s = ws.construct(rng);
    const int routed_before = ws.routed_count(s);
    std::vector<int> removed = ws.destroy_sisr(s, rng);
    REQUIRE(!removed.empty());
    REQUIRE(ws.routed_count(s) == routed_before - static_cast<int>(removed.size()));
    // Restore the pool so the shared consistency check applies.
    alns::SearchState whole = s;
    whole.unserved.insert(whole.unserved.end(), removed.begin(), removed.end());
    ws.refresh_total(whole);
    require_consistent(f, ws, whole);
  }
}

TEST_CASE("repairs insert the pool or leave it unserved, never lose it") {
  Fixture f = wide_fixture(12, 3);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng = Rng::stream(seed, {stream_tag::kSolver});
    alns::SearchState s = ws.construct(rng);
    for (int cycle = 0; cycle < 4; ++cycle) {
      std::vector<int> pool;
      switch (cycle % 3) {
        case 0: pool = ws.destroy_random(s, 4, rng); break;
        case 1: pool = ws.destroy_worst(s, 3, rng); break;
        default: pool = ws.destroy_sisr(s, rng); break;
      }
      if (cycle % 2 == 0)
        ws.repair_greedy(s, pool, rng);
      else
        ws.repair_regret2(s, pool, rng);
      require_consistent(f, ws, s);
    }
  }
}

TEST_CASE("repairing an empty pool changes nothing") {
  Fixture f = wide_fixture(6, 2);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(3, {stream_tag::kRepair});
  alns::SearchState s = ws.construct(rng);
  const alns::SearchState before = s;
  ws.repair_greedy(s, {}, rng);
  REQUIRE(s.routes == before.routes);
  REQUIRE(s.unserved == before.unserved);
  REQUIRE_THAT(s.total, WithinAbs(before.total, 1e-12));
}

TEST_CASE("both repairs place a single customer identically") {
  Fixture f = wide_fixture(7, 2);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(17, {stream_tag::kSolver});
  alns::SearchState s = ws.construct(rng);
  REQUIRE(s.unserved.empty());
  std::vector<int> pool = ws.destroy_random(s, 1, rng);
  REQUIRE(pool.size() == 1);

  alns::SearchState greedy = s, regret = s;
  Rng ra = Rng::stream(1, {stream_tag::kRepair});
  Rng rb = Rng::stream(1, {stream_tag::kRepair});
  ws.repair_greedy(greedy, pool, ra);
  ws.repair_regret2(regret, pool, rb);
  REQUIRE(greedy.routes == regret.routes);
  REQUIRE(greedy.unserved == regret.unserved);
  REQUIRE_THAT(greedy.total, WithinAbs(regret.total, 1e-12));
}

TEST_CASE("repair skips customers whose best insertion costs more than the penalty") {
  testutil::InstanceBuilder b(900.0);
  const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 100.0);
  b.add_customer(2.0, 0.0, 5.0);
  // Far away and nearly worthless to serve: the detour dwarfs the penalty.
  const int cheap = b.add_customer(150.0, 0.0, 5.0, 0.0, -1.0, 5.0, 0.05);
  b.add_vehicle(ty);
  b.add_vehicle(ty);
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);

  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(4, {stream_tag::kRepair});
  alns::SearchState s;
  ws.repair_greedy(s, {f.inst.customers[0], cheap}, rng);
  REQUIRE(s.unserved == std::vector<int>{cheap});
  REQUIRE(routed_customers(f.inst, s) == std::vector<int>{f.inst.customers[0]});
}

TEST_CASE("plan fingerprints ignore route order but not route content") {
  testutil::InstanceBuilder b(900.0);
  const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 20.0);
  Rng g = Rng::stream(7, {stream_tag::kGenerator});
  for (int i = 0; i < 8; ++i)
    b.add_customer(g.uniform(-10.0, 10.0), g.uniform(-10.0, 10.0), g.uniform(5.0, 9.0),
                   0.0, -1.0, 5.0, 200.0);
  for (int i = 0; i < 4; ++i) b.add_vehicle(ty);
  Fixture f;
  f.inst = b.build();
  f.sc = testutil::all_realized(f.inst);
  f.mix.membership.assign(f.inst.vehicles.size(), 1);
  alns::Params p;
  alns::Workspace ws(f.inst, f.mix, f.sc, f.ctx, p);
  Rng rng = Rng::stream(21, {stream_tag::kSolver});
  alns::SearchState s = ws.construct(rng);
  REQUIRE(s.routes.size() >= 2);

  alns::SearchState shuffled = s;
  std::rotate(shuffled.routes.begin(), shuffled.routes.begin() + 1, shuffled.routes.end());
  std::rotate(shuffled.route_totals.begin(), shuffled.route_totals.begin() + 1,
              shuffled.route_totals.end());
  REQUIRE(ws.fingerprint(s) == ws.fingerprint(shuffled));

  alns::SearchState edited = s;
  for (Route& r : edited.routes) {
    std::vector<int> mids;
    for (int nd : r.sequence)
      if (f.inst.nodes[static_cast<std::size_t>(nd)].kind == NodeKind::customer)
        mids.push_back(nd);
    if (mids.size() >= 2) {
      std::swap(r.sequence[1], r.sequence[2]);
      REQUIRE(ws.fingerprint(s) != ws.fingerprint(edited));
      break;
    }
  }
}

TEST_CASE("iteration trace obeys the annealing and reset schedule") {
  Fixture f = wide_fixture(10, 3);
  alns::Params p;
  p.iterations = 500;
  p.time_limit_s = 0.0;
  p.seed = 8;
  p.reset_threshold = 40;

  const Solution init = alns::initial_solution(f.inst, f.mix, f.sc, f.ctx, p.seed);
  const double t0 = alns::start_temperature(init.cost.total(), p.start_temp_factor);

  double best_seen = init.cost.total();
  double sim_current = init.cost.total();
  double sim_best = init.cost.total();
  long stall = 0;
  long events = 0;
  int verified = 0;
  alns::Observer obs = [&](const alns::IterationEvent& ev) {
    events++;
    REQUIRE(ev.iteration == events);
    // Cooling is applied after the callback, so iteration k still sees
    // t0 * cooling^(k-1).
    REQUIRE_THAT(ev.temperature,
                 WithinRel(t0 * std::pow(p.cooling, ev.iteration - 1), 1e-9));
    REQUIRE(ev.best_cost <= best_seen + 1e-9);
    best_seen = ev.best_cost;
    if (!ev.accepted)
      REQUIRE_THAT(ev.current_cost, WithinAbs(sim_current, 1e-9));
    REQUIRE(ev.candidate != nullptr);
    if (ev.accepted && verified < 8) {
      const verify::Report rep = verify_solution(f, *ev.candidate);
      REQUIRE(rep.ok);
      verified++;
    }
    if (ev.accepted) sim_current = ev.candidate_cost;
    if (ev.new_best) {
      sim_best = ev.candidate_cost;
      stall = 0;
    } else if (++stall >= p.reset_threshold) {
      sim_current = sim_best;
      stall = 0;
    }
  };

  const Solution sol = alns::solve(f.inst, f.mix, f.sc, p, f.ctx, 0.0, obs);
  REQUIRE(events == p.iterations);
  REQUIRE_THAT(sol.cost.total(), WithinAbs(best_seen, 1e-9));
  REQUIRE(verified > 0);
}

TEST_CASE("small instances are solved to or near the exhaustive optimum") {
  int exact = 0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    Rng g = Rng::stream(100 + static_cast<std::uint64_t>(trial), {stream_tag::kGenerator});
    testutil::InstanceBuilder b(600.0);
    const int ty = b.add_type("van_e", Powertrain::ev, 37.0, 30.0);
    const int n = 4 + static_cast<int>(g.bounded(2));
    for (int i = 0; i < n; ++i) {
      const double tw0 = g.uniform(0.0, 200.0);
      b.add_customer(g.uniform(-12.0, 12.0), g.uniform(-12.0, 12.0), g.uniform(2.0, 9.0),
                     tw0, tw0 + g.uniform(150.0, 350.0), 5.0, g.uniform(20.0, 60.0));
    }
    b.add_vehicle(ty);
    b.add_vehicle(ty);
    Fixture f;
    f.inst = b.build();
    f.sc = testutil::all_realized(f.inst);
    f.mix.membership.assign(f.inst.vehicles.size(), 1);

    const oracle::Result ref = oracle::exact_solve(f.inst, f.sc, f.mix, f.ctx);

    alns::Params p;
    p.iterations = 1500;
    p.time_limit_s = 0.0;
    p.seed = static_cast<std::uint64_t>(trial);
    const Solution sol = alns::solve(f.inst, f.mix, f.sc, p, f.ctx);

    const double opt = ref.best.cost.total();
    const double got = sol.cost.total();
    INFO("trial " << trial << " oracle " << opt << " alns " << got);
    REQUIRE(got >= opt - 1e-9);
    if (opt > 1e-12)
      REQUIRE(got <= opt * 1.02 + 1e-9);
    if (got <= opt + 1e-6) exact++;
  }
  REQUIRE(exact >= trials * 6 / 10);
}
