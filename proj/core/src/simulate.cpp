#include "phasebal/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace phasebal {

SnapshotMetrics evaluate_assignment(const PhaseAssignment& assignment,
                                    const std::vector<double>& demand) {
  const int n = assignment.n();
  if (static_cast<int>(demand.size()) != n)
    throw std::invalid_argument("evaluate_assignment: dimension mismatch");
  SnapshotMetrics m;
  for (int i = 0; i < n; ++i) {
    if (assignment.a[i]) m.sum_a += demand[i];
    if (assignment.b[i]) m.sum_b += demand[i];
    if (assignment.c[i]) m.sum_c += demand[i];
  }
  const double total = m.sum_a + m.sum_b + m.sum_c;
  m.omega = std::max({std::abs(m.sum_a - m.sum_b), std::abs(m.sum_a - m.sum_c),
                      std::abs(m.sum_b - m.sum_c)});
  m.nu = std::max({std::abs(m.sum_a - total / 3.0), std::abs(m.sum_b - total / 3.0),
                   std::abs(m.sum_c - total / 3.0)});
  if (total > 0.0) {
    m.upsilon = std::max({std::abs(1.0 - 3.0 * m.sum_a / total),
                          std::abs(1.0 - 3.0 * m.sum_b / total),
                          std::abs(1.0 - 3.0 * m.sum_c / total)});
  } else {
    m.upsilon = 0.0;
    m.upsilon_defined = false;
  }
  return m;
}

void SimulationRun::validate() const {
  PhaseAssignment state = config.lookahead.initial_assignment;
  int swaps = 0;
  for (const auto& e : epochs) {
    const int implemented = static_cast<int>(e.realized_metrics.size());
    if (implemented < 1 || implemented > static_cast<int>(e.plan.assignments.size()))
      throw std::logic_error("SimulationRun: malformed epoch record");
    int epoch_swaps = 0;
    const PhaseAssignment* prev = &state;
    for (int t = 0; t < implemented; ++t) {
      epoch_swaps += count_swaps(*prev, e.plan.assignments[t]);
      prev = &e.plan.assignments[t];
    }
    if (epoch_swaps > config.lookahead.swap_budget)
      throw std::logic_error("SimulationRun: budget violated at epoch " +
                             std::to_string(e.epoch));
    swaps += epoch_swaps;
    state = e.plan.assignments[implemented - 1];
  }
  if (swaps != total_swaps)
    throw std::logic_error("SimulationRun: total_swaps inconsistent");
  if (!(state == final_assignment))
    throw std::logic_error("SimulationRun: epoch chaining broken");
}

Forecaster persistence_forecaster(const LoadDataset& dataset) {
  const LoadProfile profile = dataset.profile;
  const int lag = dataset.snapshots_per_day;
  return [profile, lag](int /*epoch*/, int start_snapshot, int horizon) {
    std::vector<std::vector<double>> forecast;
    forecast.reserve(horizon);
    // Only snapshots before start_snapshot are known; reach back whole days
    // until the index is realized. With no past day, persist the last known
    // snapshot.
    for (int t = start_snapshot; t < start_snapshot + horizon; ++t) {
      int src = t;
      while (src >= start_snapshot) src -= lag;
      if (src < 0) src = start_snapshot > 0 ? start_snapshot - 1 : 0;
      forecast.push_back(profile.snapshot(src));
    }
    return forecast;
  };
}

SimulationRun run_rolling(const LoadDataset& realized, const Forecaster& forecaster,
                          const RollingConfig& config, int epochs,
                          int start_snapshot) {
  RollingConfig cfg = config;
  cfg.lookahead.validate();
  const int t1 = cfg.lookahead.t1;
  const int t2 = cfg.lookahead.t2;
  const int stride = cfg.stride > 0 ? cfg.stride : t1;
  if (stride > t1) throw std::invalid_argument("run_rolling: stride > t1");
  if (static_cast<int>(cfg.rho_schedule.size()) != t2)
    throw std::invalid_argument("run_rolling: rho_schedule length != t2");
  const LoadProfile& profile = realized.profile;
  if (cfg.lookahead.initial_assignment.n() != profile.n_loads)
    throw std::invalid_argument("run_rolling: initial assignment size mismatch");
  if (start_snapshot + (epochs - 1) * stride + t1 > profile.n_snapshots)
    throw std::invalid_argument("run_rolling: dataset too short for epoch count");

  SimulationRun run;
  run.config = cfg;
  PhaseAssignment state = cfg.lookahead.initial_assignment;

  for (int e = 0; e < epochs; ++e) {
    const int start = start_snapshot + e * stride;
    const auto t_begin = std::chrono::steady_clock::now();

    auto forecast = forecaster(e, start, t2);
    if (static_cast<int>(forecast.size()) < t2)
      throw std::runtime_error("run_rolling: forecaster returned fewer than t2 snapshots");
    forecast.resize(t2);
    for (const auto& fv : forecast)
      if (static_cast<int>(fv.size()) != profile.n_loads)
        throw std::runtime_error("run_rolling: forecast length mismatch");

    const std::vector<BoxUncertaintySet> boxes = forecast_box(forecast, cfg.rho_schedule);

    LookAheadConfig epoch_cfg = cfg.lookahead;
    epoch_cfg.initial_assignment = state;
    const MilpInstance inst = build_lookahead(profile, boxes, epoch_cfg);

    MilpConfig solver_cfg = cfg.solver;
    if (cfg.warm_start_frozen && !solver_cfg.warm_start)
      solver_cfg.warm_start = frozen_warm_start(inst, boxes, epoch_cfg);

    const MilpSolution sol = solve_milp(inst, solver_cfg);
    if (!sol.has_incumbent())
      throw std::runtime_error("run_rolling: solver failed at epoch " +
                               std::to_string(e) + " (" + to_string(sol.status) + ")");

    EpochRecord rec;
    rec.epoch = e;
    rec.start_snapshot = start;
    rec.plan = extract_plan(inst, sol, epoch_cfg, profile.load_ids);
    rec.plan.validate(epoch_cfg);

    for (int t = 0; t < stride; ++t) {
      const std::vector<double> d = profile.snapshot(start + t);
      rec.realized_demand.push_back(d);
      rec.realized_metrics.push_back(evaluate_assignment(rec.plan.assignments[t], d));
      rec.contained.push_back(boxes[t].contains(d));
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
            .count();

    const PhaseAssignment* prev = &state;
    for (int t = 0; t < stride; ++t) {
      run.total_swaps += count_swaps(*prev, rec.plan.assignments[t]);
      prev = &rec.plan.assignments[t];
    }
    state = rec.plan.assignments[stride - 1];
    run.epochs.push_back(std::move(rec));
  }
  run.final_assignment = state;
  return run;
}

namespace {

nlohmann::json assignment_json(const PhaseAssignment& s) {
  std::string phases;
  phases.reserve(s.n());
  for (int i = 0; i < s.n(); ++i) {
    if (s.width(i) == 1) {
      phases += phase_letter(s.phase_of(i));
    } else {
      phases += '[';
      if (s.a[i]) phases += 'A';
      if (s.b[i]) phases += 'B';
      if (s.c[i]) phases += 'C';
      phases += ']';
    }
  }
  return phases;
}

nlohmann::json metrics_json(const SnapshotMetrics& m) {
  nlohmann::json j;
  j["sum_a"] = m.sum_a;
  j["sum_b"] = m.sum_b;
  j["sum_c"] = m.sum_c;
  j["omega"] = m.omega;
  j["nu"] = m.nu;
  if (m.upsilon_defined)
    j["upsilon"] = m.upsilon;
  else
    j["upsilon"] = nullptr;
  return j;
}

}  // namespace

void write_run_json(const SimulationRun& run, const std::string& path) {
  nlohmann::json j;
  j["config"] = {{"t1", run.config.lookahead.t1},
                 {"t2", run.config.lookahead.t2},
                 {"lambda", run.config.lookahead.lambda},
                 {"swap_budget", run.config.lookahead.swap_budget},
                 {"stride", run.config.stride},
                 {"rho_schedule", run.config.rho_schedule},
                 {"gap_tol", run.config.solver.gap_tol}};
  j["total_swaps"] = run.total_swaps;
  j["final_assignment"] = assignment_json(run.final_assignment);
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : run.epochs) {
    nlohmann::json je;
    je["epoch"] = e.epoch;
    je["start_snapshot"] = e.start_snapshot;
    je["u"] = e.plan.u;
    je["v"] = e.plan.v;
    je["gap"] = e.plan.gap;
    je["wall_seconds"] = e.wall_seconds;
    nlohmann::json swaps = nlohmann::json::array();
    for (const auto& ev : e.plan.swap_events)
      swaps.push_back({{"snapshot", ev.snapshot},
                       {"load_id", ev.load_id},
                       {"from", std::string(1, phase_letter(ev.from))},
                       {"to", std::string(1, phase_letter(ev.to))}});
    je["swap_events"] = swaps;
    nlohmann::json assigns = nlohmann::json::array();
    for (const auto& s : e.plan.assignments) assigns.push_back(assignment_json(s));
    je["assignments"] = assigns;
    nlohmann::json mets = nlohmann::json::array();
    for (size_t t = 0; t < e.realized_metrics.size(); ++t) {
      nlohmann::json jm = metrics_json(e.realized_metrics[t]);
      jm["snapshot"] = e.start_snapshot + static_cast<int>(t);
      jm["contained"] = static_cast<bool>(e.contained[t]);
      mets.push_back(jm);
    }
    je["realized"] = mets;
    epochs.push_back(je);
  }
  j["epochs"] = epochs;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << "\n";
}

void write_metrics_csv(const SimulationRun& run, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "epoch,snapshot,omega,nu,upsilon,contained,certified_u\n";
  char buf[128];
  for (const auto& e : run.epochs) {
    for (size_t t = 0; t < e.realized_metrics.size(); ++t) {
      const auto& m = e.realized_metrics[t];
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,", e.epoch,
                    e.start_snapshot + static_cast<int>(t), m.omega, m.nu);
      f << buf;
      if (m.upsilon_defined) {
        std::snprintf(buf, sizeof(buf), "%.17g", m.upsilon);
        f << buf;
      }
      std::snprintf(buf, sizeof(buf), ",%d,%.17g\n", e.contained[t] ? 1 : 0,
                    e.plan.u);
      f << buf;
    }
  }
}

}  // namespace phasebal
