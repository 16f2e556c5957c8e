#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasebal/formulation.hpp"
#include "phasebal/milp.hpp"
#include "phasebal/simulate.hpp"

using namespace phasebal;

namespace {

MilpConfig exact_config() {
  MilpConfig cfg;
  cfg.gap_tol = 1e-9;
  return cfg;
}

LoadProfile profile_of(const std::vector<double>& d) {
  std::vector<std::vector<double>> demand;
  for (double v : d) demand.push_back({v});
  return LoadProfile::create(std::move(demand));
}

std::vector<double> random_demand(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> kw(0, 12);
  std::vector<double> d(n);
  for (auto& v : d) v = kw(rng);
  return d;
}

// Minimal certified bound from the dualizer: min u s.t. the emitted rows,
// for a constant direction x.
double minimal_certified_bound(const PolyhedralSet& set,
                               const std::vector<double>& x) {
  MilpInstance inst;
  const int u = inst.add_variable("u", VarKind::Continuous, 1.0);
  std::vector<AffineExpr> dir(x.size());
  for (size_t i = 0; i < x.size(); ++i) dir[i].constant = x[i];
  dualize_row(inst, dir, set, u, "dual:p");
  const auto res = solve_lp(inst);
  REQUIRE(res.status == LpStatus::Optimal);
  return res.objective;
}

}  // namespace

TEST_CASE("dualize_row: zero direction certifies bound 0") {
  const auto box = BoxUncertaintySet::absolute({1.0, 2.0}, {0.5, 0.5});
  CHECK(minimal_certified_bound(box_to_polyhedron(box), {0.0, 0.0}) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("dualize_row: singleton set certifies exactly the center product") {
  const auto box = BoxUncertaintySet::absolute({3.0, 4.0}, {0.0, 0.0});
  CHECK(minimal_certified_bound(box_to_polyhedron(box), {2.0, -1.0}) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("dualize_row: box example certifies the vertex maximum") {
  const auto box = BoxUncertaintySet::absolute({1.5, 2.0}, {0.5, 1.0});
  const std::vector<double> x{2.0 / 3.0, -1.0 / 3.0};
  CHECK(minimal_certified_bound(box_to_polyhedron(box), x) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(oracle::box_support(box, x) == doctest::Approx(1.0));
}

TEST_CASE("dualize_row equals vertex enumeration on random boxes") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.2, 4.0);
  std::uniform_real_distribution<double> dir(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 10);
  for (int it = 0; it < 25; ++it) {
    const int n = dim(rng);
    std::vector<double> center(n), hw(n), x(n);
    for (int i = 0; i < n; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.4 * unif(rng);
      x[i] = dir(rng);
    }
    const auto box = BoxUncertaintySet::absolute(center, hw);
    // Variables in the kernel are nonnegative, so the certified bound is the
    // support clipped at zero.
    const double want = std::max(0.0, oracle::box_support(box, x));
    CHECK(std::fabs(minimal_certified_bound(box_to_polyhedron(box), x) - want) <
          1e-8);
  }
}

TEST_CASE("check_polyhedron rejects empty and unbounded sets") {
  PolyhedralSet empty;
  empty.H = {{1.0}, {-1.0}};
  empty.h = {1.0, -2.0};  // d <= 1 and d >= 2
  CHECK_THROWS(check_polyhedron(empty));

  PolyhedralSet unbounded;
  unbounded.H = {{-1.0}};
  unbounded.h = {0.0};  // d >= 0 only
  CHECK_THROWS(check_polyhedron(unbounded));

  CHECK_NOTHROW(check_polyhedron(box_to_polyhedron(
      BoxUncertaintySet::absolute({1.0, 2.0}, {0.5, 0.5}))));
}

TEST_CASE("build_deterministic: perfectly balanceable demand") {
  const auto inst = build_deterministic(profile_of({1.0, 1.0, 1.0}), {1.0, 1.0, 1.0},
                                        ImbalanceObjective::MaxSinglePhase);
  const auto sol = solve_milp(inst, exact_config());
  REQUIRE(sol.has_incumbent());
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("build_deterministic: the 21 kW example prefers 3/7/11") {
  // Single-phase objective separates the partitions (4 vs 5 kW); the
  // pairwise objective rates both at 8 kW.
  const std::vector<double> good{3.0, 7.0, 11.0};
  const std::vector<double> bad{2.0, 9.0, 10.0};

  auto solve_obj = [&](const std::vector<double>& d, ImbalanceObjective o) {
    const auto sol =
        solve_milp(build_deterministic(profile_of(d), d, o), exact_config());
    REQUIRE(sol.has_incumbent());
    return sol.objective;
  };
  CHECK(solve_obj(good, ImbalanceObjective::MaxSinglePhase) == doctest::Approx(4.0));
  CHECK(solve_obj(bad, ImbalanceObjective::MaxSinglePhase) == doctest::Approx(5.0));
  CHECK(solve_obj(good, ImbalanceObjective::MaxPairwise) == doctest::Approx(8.0));
  CHECK(solve_obj(bad, ImbalanceObjective::MaxPairwise) == doctest::Approx(8.0));
}

TEST_CASE("build_deterministic matches the exhaustive assignment oracle") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 25; ++it) {
    const auto d = random_demand(rng, 6);
    for (const auto obj : {ImbalanceObjective::MaxSinglePhase,
                           ImbalanceObjective::MaxPairwise}) {
      const auto sol =
          solve_milp(build_deterministic(profile_of(d), d, obj), exact_config());
      REQUIRE(sol.has_incumbent());
      const double expected = obj == ImbalanceObjective::MaxSinglePhase
                                  ? oracle::best_deterministic_nu(d)
                                  : oracle::best_deterministic_omega(d);
      CHECK(sol.objective == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("build_robust: zero half-width equals deterministic exactly") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 10; ++it) {
    const auto d = random_demand(rng, 5);
    const auto det = solve_milp(
        build_deterministic(profile_of(d), d, ImbalanceObjective::MaxSinglePhase),
        exact_config());
    const auto rob = solve_milp(
        build_robust(profile_of(d), BoxUncertaintySet::absolute(d, std::vector<double>(5, 0.0))),
        exact_config());
    REQUIRE(det.has_incumbent());
    REQUIRE(rob.has_incumbent());
    CHECK(rob.objective == doctest::Approx(det.objective).epsilon(1e-9));
  }
}

TEST_CASE("build_robust: objective is monotone in the set and dominates deterministic") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unif(0.5, 5.0);
  for (int it = 0; it < 8; ++it) {
    std::vector<double> center(4), hw(4);
    for (int i = 0; i < 4; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.2 * unif(rng);
    }
    auto wide = hw;
    for (auto& w : wide) w *= 2.0;
    const auto profile = profile_of(center);
    const double det =
        solve_milp(build_deterministic(profile, center,
                                       ImbalanceObjective::MaxSinglePhase),
                   exact_config())
            .objective;
    const double small =
        solve_milp(build_robust(profile, BoxUncertaintySet::absolute(center, hw)),
                   exact_config())
            .objective;
    const double large =
        solve_milp(build_robust(profile, BoxUncertaintySet::absolute(center, wide)),
                   exact_config())
            .objective;
    CHECK(det <= small + 1e-9);
    CHECK(small <= large + 1e-9);
  }
}

TEST_CASE("build_robust matches the assignment x vertex oracle") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unif(0.5, 6.0);
  for (int it = 0; it < 10; ++it) {
    const int n = 4;
    std::vector<double> center(n), hw(n);
    for (int i = 0; i < n; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.3 * unif(rng);
    }
    const auto box = BoxUncertaintySet::absolute(center, hw);
    const auto sol =
        solve_milp(build_robust(profile_of(center), box), exact_config());
    REQUIRE(sol.has_incumbent());
    CHECK(std::fabs(sol.objective - oracle::best_robust_nu(box)) < 1e-8);
  }
}

TEST_CASE("build_robust accepts general polyhedra") {
  // Simplex-shaped set: d >= 0, sum d <= 6. Worst cases put the whole mass
  // on one load.
  const std::vector<double> center{2.0, 2.0, 2.0};
  PolyhedralSet set;
  set.H = {{1.0, 1.0, 1.0}, {-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, -1.0}};
  set.h = {6.0, 0.0, 0.0, 0.0};
  const auto sol = solve_milp(build_robust(profile_of(center), set), exact_config());
  REQUIRE(sol.has_incumbent());
  // Any single-phase assignment can face all 6 kW on one phase: worst
  // deviation 6 - 2 = 4; splitting loads across phases cannot help since a
  // vertex concentrates on whichever load sits alone... the optimum is 4.
  CHECK(sol.objective == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("build_lookahead: zero budget freezes the initial assignment") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.5, 4.0);
  LookAheadConfig cfg;
  cfg.t1 = 2;
  cfg.t2 = 4;
  cfg.lambda = 1.0 / 3.0;
  cfg.swap_budget = 0;
  cfg.initial_assignment = PhaseAssignment::round_robin(4);

  std::vector<BoxUncertaintySet> sets;
  std::vector<double> avg(4, 0.0);
  for (int t = 0; t < cfg.t2; ++t) {
    std::vector<double> center(4), hw(4);
    for (int i = 0; i < 4; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.2 * unif(rng);
      avg[i] += center[i] / cfg.t2;
    }
    sets.push_back(BoxUncertaintySet::absolute(center, hw));
  }
  const auto inst = build_lookahead(profile_of(avg), sets, cfg);
  const auto sol = solve_milp(inst, exact_config());
  REQUIRE(sol.has_incumbent());

  double u = 0.0, v = 0.0;
  for (int t = 0; t < cfg.t1; ++t)
    u = std::max(u, oracle::robust_nu(cfg.initial_assignment, sets[t]));
  for (int t = cfg.t1; t < cfg.t2; ++t)
    v = std::max(v, oracle::robust_nu(cfg.initial_assignment, sets[t]));
  CHECK(std::fabs(sol.objective - (u + cfg.lambda * v)) < 1e-8);

  const auto plan = extract_plan(inst, sol, cfg);
  CHECK(plan.swap_events.empty());
  CHECK_NOTHROW(plan.validate(cfg));
  CHECK(plan.assignments.front() == cfg.initial_assignment);
}

TEST_CASE("build_lookahead matches the exhaustive sequence oracle; monotone in s") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unif(0.5, 4.0);
  LookAheadConfig cfg;
  cfg.t1 = 2;
  cfg.t2 = 4;
  cfg.lambda = 1.0 / 3.0;
  cfg.initial_assignment = PhaseAssignment::round_robin(4);

  std::vector<BoxUncertaintySet> sets;
  std::vector<double> avg(4, 0.0);
  for (int t = 0; t < cfg.t2; ++t) {
    std::vector<double> center(4), hw(4);
    for (int i = 0; i < 4; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.25 * unif(rng);
      avg[i] += center[i] / cfg.t2;
    }
    sets.push_back(BoxUncertaintySet::absolute(center, hw));
  }
  const auto profile = profile_of(avg);

  double prev = std::numeric_limits<double>::infinity();
  for (int s : {0, 1, 2}) {
    cfg.swap_budget = s;
    const auto sol =
        solve_milp(build_lookahead(profile, sets, cfg), exact_config());
    REQUIRE(sol.has_incumbent());
    const double expected = oracle::best_lookahead(sets, cfg);
    CHECK(std::fabs(sol.objective - expected) < 1e-8);
    CHECK(sol.objective <= prev + 1e-9);
    prev = sol.objective;

    const auto plan = extract_plan(
        build_lookahead(profile, sets, cfg), sol, cfg);
    CHECK(static_cast<int>(plan.swap_events.size()) <= s);
    CHECK_NOTHROW(plan.validate(cfg));
  }
}

TEST_CASE("build_lookahead: lambda = 0 leaves u at the period-1 optimum") {
  LookAheadConfig cfg;
  cfg.t1 = 1;
  cfg.t2 = 2;
  cfg.lambda = 0.0;
  cfg.swap_budget = 2;
  cfg.initial_assignment = PhaseAssignment::round_robin(3);

  const std::vector<double> d{2.0, 3.0, 4.0};
  const auto box1 = BoxUncertaintySet::absolute(d, {0.0, 0.0, 0.0});
  const auto wild = BoxUncertaintySet::absolute({9.0, 1.0, 1.0}, {1.0, 0.5, 0.5});
  const auto calm = BoxUncertaintySet::absolute(d, {0.1, 0.1, 0.1});

  const auto profile = profile_of(d);
  const double with_wild =
      solve_milp(build_lookahead(profile, {box1, wild}, cfg), exact_config())
          .objective;
  const double with_calm =
      solve_milp(build_lookahead(profile, {box1, calm}, cfg), exact_config())
          .objective;
  CHECK(with_wild == doctest::Approx(with_calm).epsilon(1e-9));
}

TEST_CASE("frozen_warm_start is feasible and certifies the frozen objective") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unif(0.5, 4.0);
  LookAheadConfig cfg;
  cfg.t1 = 2;
  cfg.t2 = 3;
  cfg.swap_budget = 1;
  cfg.initial_assignment = PhaseAssignment::round_robin(4);
  for (int it = 0; it < 5; ++it) {
    std::vector<BoxUncertaintySet> sets;
    std::vector<double> avg(4, 0.0);
    for (int t = 0; t < cfg.t2; ++t) {
      std::vector<double> center(4), hw(4);
      for (int i = 0; i < 4; ++i) {
        center[i] = unif(rng);
        hw[i] = 0.3 * unif(rng);
        avg[i] += center[i] / cfg.t2;
      }
      sets.push_back(BoxUncertaintySet::absolute(center, hw));
    }
    const auto inst = build_lookahead(profile_of(avg), sets, cfg);
    const auto ws = frozen_warm_start(inst, sets, cfg);
    CHECK(inst.max_violation(ws.values) <= 1e-8);
    CHECK(ws.objective ==
          doctest::Approx(inst.objective_value(ws.values)).epsilon(1e-10));

    double u = 0.0, v = 0.0;
    for (int t = 0; t < cfg.t1; ++t)
      u = std::max(u, oracle::robust_nu(cfg.initial_assignment, sets[t]));
    for (int t = cfg.t1; t < cfg.t2; ++t)
      v = std::max(v, oracle::robust_nu(cfg.initial_assignment, sets[t]));
    CHECK(ws.objective == doctest::Approx(u + cfg.lambda * v).epsilon(1e-9));
  }
}

TEST_CASE("robust_imbalance matches the vertex oracle") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> unif(0.5, 4.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int it = 0; it < 15; ++it) {
    std::vector<double> center(4), hw(4);
    std::vector<Phase> phases(4);
    for (int i = 0; i < 4; ++i) {
      center[i] = unif(rng);
      hw[i] = 0.3 * unif(rng);
      phases[i] = static_cast<Phase>(pick(rng));
    }
    const auto box = BoxUncertaintySet::absolute(center, hw);
    const auto s = PhaseAssignment::from_phases(phases);
    CHECK(std::fabs(robust_imbalance(s, box) - oracle::robust_nu(s, box)) < 1e-9);
  }
}

TEST_CASE("pairwise objective sits between 1x and 2x the single-phase objective") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> d(6);
    std::vector<Phase> phases(6);
    for (int i = 0; i < 6; ++i) {
      d[i] = unif(rng);
      phases[i] = static_cast<Phase>(pick(rng));
    }
    const auto s = PhaseAssignment::from_phases(phases);
    const double nu = oracle::nu_of(s, d);
    const double omega = oracle::omega_of(s, d);
    CHECK(omega >= nu - 1e-12);
    CHECK(omega <= 2.0 * nu + 1e-12);
  }
}

TEST_CASE("multi-phase loads occupy exactly their width") {
  // Loads of width 1, 2, 3: the width-3 load must sit on all phases.
  auto profile = LoadProfile::create({{2.0}, {3.0}, {1.0}}, {"w1", "w2", "w3"},
                                     {1, 2, 3});
  const std::vector<double> d{2.0, 3.0, 1.0};
  const auto inst =
      build_deterministic(profile, d, ImbalanceObjective::MaxSinglePhase);
  const auto sol = solve_milp(inst, exact_config());
  REQUIRE(sol.has_incumbent());
  int w1 = 0, w2 = 0, w3 = 0;
  for (char ph : {'a', 'b', 'c'}) {
    w1 += sol.value(var_assign(ph, 0, 0)) > 0.5;
    w2 += sol.value(var_assign(ph, 0, 1)) > 0.5;
    w3 += sol.value(var_assign(ph, 0, 2)) > 0.5;
  }
  CHECK(w1 == 1);
  CHECK(w2 == 2);
  CHECK(w3 == 3);
}

TEST_CASE("anchor_first_load pins load 0 to phase A") {
  const std::vector<double> d{5.0, 3.0, 2.0, 4.0};
  BuildOptions opts;
  opts.anchor_first_load = true;
  const auto anchored = solve_milp(
      build_deterministic(profile_of(d), d, ImbalanceObjective::MaxSinglePhase, opts),
      exact_config());
  const auto free = solve_milp(
      build_deterministic(profile_of(d), d, ImbalanceObjective::MaxSinglePhase),
      exact_config());
  REQUIRE(anchored.has_incumbent());
  CHECK(anchored.value(var_assign('a', 0, 0)) == 1.0);
  CHECK(anchored.objective == doctest::Approx(free.objective).epsilon(1e-9));
}
