#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasebal/ingest.hpp"
#include "phasebal/report.hpp"
#include "phasebal/simulate.hpp"

using namespace phasebal;
namespace fs = std::filesystem;

namespace {

SnapshotMetrics metrics_with(double omega, double nu = 0.0, double upsilon = 0.0) {
  SnapshotMetrics m;
  m.omega = omega;
  m.nu = nu;
  m.upsilon = upsilon;
  return m;
}

SimulationRun small_run(int n_loads, int snapshots, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 5.0);
  std::vector<std::vector<double>> demand(n_loads);
  for (auto& row : demand)
    for (int t = 0; t < snapshots; ++t) row.push_back(unif(rng));
  LoadDataset ds;
  ds.profile = LoadProfile::create(std::move(demand));
  ds.snapshots_per_day = snapshots;
  ds.day_boundaries = {0};

  RollingConfig cfg;
  cfg.lookahead.t1 = 2;
  cfg.lookahead.t2 = 4;
  cfg.lookahead.swap_budget = s;
  cfg.lookahead.initial_assignment = PhaseAssignment::round_robin(n_loads);
  cfg.rho_schedule.assign(4, 0.2);
  cfg.solver.gap_tol = 1e-9;
  return run_rolling(ds, persistence_forecaster(ds), cfg, (snapshots - 2) / 2);
}

}  // namespace

TEST_CASE("summarize: degenerate cases") {
  const auto one = summarize("m", {metrics_with(5.0, 2.0, 0.1)}, {1.5});
  CHECK(one.omega.max == one.omega.avg);
  CHECK(one.omega.std == 0.0);
  CHECK(one.upsilon.avg == doctest::Approx(10.0));  // rendered in percent

  const auto two = summarize("m", {metrics_with(8.0), metrics_with(0.0)}, {});
  CHECK(two.omega.max == doctest::Approx(8.0));
  CHECK(two.omega.avg == doctest::Approx(4.0));
  CHECK(two.omega.std == doctest::Approx(4.0));

  CHECK_THROWS(summarize("m", {}, {}));
}

TEST_CASE("summarize matches the two-pass oracle on random data") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 50.0);
  for (int it = 0; it < 20; ++it) {
    std::vector<SnapshotMetrics> metrics;
    std::vector<double> omegas, runtimes;
    const int n = 3 + static_cast<int>(unif(rng));
    for (int i = 0; i < n; ++i) {
      const double w = unif(rng);
      metrics.push_back(metrics_with(w, unif(rng), unif(rng) / 100.0));
      omegas.push_back(w);
      runtimes.push_back(unif(rng));
    }
    const auto s = summarize("m", metrics, runtimes);
    const auto [mean, stddev] = oracle::mean_std(omegas);
    CHECK(std::fabs(s.omega.avg - mean) < 1e-12);
    CHECK(std::fabs(s.omega.std - stddev) < 1e-12);
    CHECK(s.omega.max == *std::max_element(omegas.begin(), omegas.end()));
    const auto [rmean, rstd] = oracle::mean_std(runtimes);
    CHECK(std::fabs(s.runtime.avg - rmean) < 1e-12);
    CHECK(std::fabs(s.runtime.std - rstd) < 1e-12);
    CHECK(s.omega.max >= s.omega.avg);
    CHECK(s.omega.std >= 0.0);
  }
}

TEST_CASE("summarize over a concatenation reproduces merged statistics") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(0.0, 20.0);
  std::vector<SnapshotMetrics> first, second, merged;
  std::vector<double> all;
  for (int i = 0; i < 7; ++i) {
    first.push_back(metrics_with(unif(rng)));
    all.push_back(first.back().omega);
  }
  for (int i = 0; i < 11; ++i) {
    second.push_back(metrics_with(unif(rng)));
    all.push_back(second.back().omega);
  }
  merged = first;
  merged.insert(merged.end(), second.begin(), second.end());
  const auto s = summarize("m", merged, {});
  const auto [mean, stddev] = oracle::mean_std(all);
  CHECK(std::fabs(s.omega.avg - mean) < 1e-12);
  CHECK(std::fabs(s.omega.std - stddev) < 1e-12);
}

TEST_CASE("summarize skips undefined upsilon snapshots in that column only") {
  SnapshotMetrics undef;
  undef.omega = 2.0;
  undef.upsilon_defined = false;
  const auto s = summarize("m", {metrics_with(4.0, 1.0, 0.5), undef}, {});
  CHECK(s.omega.avg == doctest::Approx(3.0));
  CHECK(s.upsilon.avg == doctest::Approx(50.0));
}

TEST_CASE("sorted_curve sorts descending, keeping duplicates") {
  const auto curve =
      sorted_curve({metrics_with(3.0), metrics_with(1.0), metrics_with(2.0)});
  CHECK(curve == std::vector<double>{3.0, 2.0, 1.0});
  const auto dup =
      sorted_curve({metrics_with(2.0), metrics_with(2.0), metrics_with(1.0)});
  CHECK(dup == std::vector<double>{2.0, 2.0, 1.0});
  CHECK_THROWS(sorted_curve({}));
}

TEST_CASE("sorted_curve dominance is pointwise") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  std::vector<SnapshotMetrics> weak, strong;
  for (int i = 0; i < 30; ++i) {
    const double w = unif(rng);
    weak.push_back(metrics_with(w));
    strong.push_back(metrics_with(w * 0.7));  // every snapshot strictly better
  }
  const auto cw = sorted_curve(weak);
  const auto cs = sorted_curve(strong);
  for (size_t i = 0; i < cw.size(); ++i) CHECK(cs[i] <= cw[i]);
}

TEST_CASE("swap_histogram counts implemented swaps") {
  const auto frozen = small_run(4, 10, 0, 5);
  const auto zero =
      swap_histogram(frozen, {"load0", "load1", "load2", "load3"});
  CHECK(zero.size() == 4);
  for (const auto& [id, count] : zero) CHECK(count == 0);

  for (std::uint64_t seed : {1, 2, 3}) {
    const auto run = small_run(4, 12, 2, seed);
    int total = 0;
    for (const auto& [id, count] : swap_histogram(run)) total += count;
    CHECK(total == run.total_swaps);
  }
}

TEST_CASE("swap_histogram on a constructed two-swap run") {
  SimulationRun run;
  run.config.lookahead.t1 = 2;
  run.config.lookahead.t2 = 3;
  run.config.lookahead.swap_budget = 2;
  run.config.lookahead.initial_assignment =
      PhaseAssignment::from_phases({Phase::A, Phase::B});
  EpochRecord e;
  e.plan.assignments = {PhaseAssignment::from_phases({Phase::B, Phase::B}),
                        PhaseAssignment::from_phases({Phase::C, Phase::B})};
  e.plan.advisory_assignment = e.plan.assignments.back();
  e.plan.swap_events = {{1, "x", Phase::A, Phase::B},
                        {2, "x", Phase::B, Phase::C}};
  e.realized_metrics.resize(2);
  e.realized_demand.resize(2);
  e.contained.resize(2, true);
  run.epochs.push_back(e);
  run.total_swaps = 2;
  run.final_assignment = e.plan.assignments.back();

  const auto hist = swap_histogram(run);
  REQUIRE(hist.count("x") == 1);
  CHECK(hist.at("x") == 2);
}

TEST_CASE("summary CSV and JSON round trip") {
  const auto a = summarize(
      "d-PB", {metrics_with(8.0, 4.0, 4.0 / 7.0), metrics_with(2.0, 1.0, 0.1)},
      {0.5, 0.25});
  const auto b = summarize("r-PB", {metrics_with(3.0, 1.5, 0.2)}, {1.0});

  const fs::path dir = fs::temp_directory_path() / "phasebal_report_test";
  fs::create_directories(dir);
  const auto csv = (dir / "summary.csv").string();
  write_summary_csv({a, b}, csv);
  const auto back = read_summary_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].method == "d-PB");
  CHECK(back[0].omega.max == a.omega.max);
  CHECK(back[0].omega.avg == a.omega.avg);
  CHECK(back[0].omega.std == a.omega.std);
  CHECK(back[0].upsilon.avg == a.upsilon.avg);
  CHECK(back[1].runtime.avg == b.runtime.avg);

  write_summary_json({a, b}, (dir / "summary.json").string());
  CHECK(fs::file_size(dir / "summary.json") > 0);

  write_sorted_curves_csv({"d-PB"}, {{3.0, 2.0, 1.0}},
                          (dir / "curves.csv").string());
  std::ifstream f(dir / "curves.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "rank,d-PB");
  fs::remove_all(dir);
}
