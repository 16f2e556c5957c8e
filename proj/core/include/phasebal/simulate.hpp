#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phasebal/formulation.hpp"
#include "phasebal/ingest.hpp"
#include "phasebal/milp.hpp"
#include "phasebal/types.hpp"

namespace phasebal {

struct SnapshotMetrics {
  double sum_a = 0.0, sum_b = 0.0, sum_c = 0.0;  // phase totals, kW
  double omega = 0.0;    // max |pairwise difference|, kW
  double nu = 0.0;       // max |phase sum - total/3|, kW
  double upsilon = 0.0;  // max |1 - 3 * phase sum / total|
  bool upsilon_defined = true;  // false when total demand is zero
};

SnapshotMetrics evaluate_assignment(const PhaseAssignment& assignment,
                                    const std::vector<double>& demand);

struct EpochRecord {
  int epoch = 0;
  int start_snapshot = 0;  // dataset index of the epoch's first snapshot
  BalancePlan plan;
  std::vector<std::vector<double>> realized_demand;  // implemented snapshots
  std::vector<SnapshotMetrics> realized_metrics;
  std::vector<bool> contained;  // realized demand inside the snapshot's box
  double wall_seconds = 0.0;
};

struct RollingConfig {
  LookAheadConfig lookahead;         // initial_assignment is the epoch-0 state
  std::vector<double> rho_schedule;  // length t2, relative box widths
  MilpConfig solver;
  int stride = 0;  // snapshots implemented per epoch; 0 means t1
  bool warm_start_frozen = true;
};

struct SimulationRun {
  std::vector<EpochRecord> epochs;
  RollingConfig config;
  int total_swaps = 0;
  PhaseAssignment final_assignment;

  void validate() const;  // epoch chaining and budget compliance
};

/// Forecast for `horizon` snapshots starting at start_snapshot (dataset index).
using Forecaster = std::function<std::vector<std::vector<double>>(
    int epoch, int start_snapshot, int horizon)>;

/// Previous-period persistence: the forecast for a future snapshot is the
/// most recent realized value at the same position in the day.
Forecaster persistence_forecaster(const LoadDataset& dataset);

/// Fig.-1-style rolling horizon: per epoch, build boxes from the forecast,
/// solve the look-ahead MILP, implement the first stride snapshots against
/// realized demand, and advance.
SimulationRun run_rolling(const LoadDataset& realized, const Forecaster& forecaster,
                          const RollingConfig& config, int epochs,
                          int start_snapshot = 0);

void write_run_json(const SimulationRun& run, const std::string& path);
void write_metrics_csv(const SimulationRun& run, const std::string& path);

}  // namespace phasebal
