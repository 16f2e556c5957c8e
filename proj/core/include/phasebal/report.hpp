#pragma once

#include <map>
#include <string>
#include <vector>

#include "phasebal/simulate.hpp"

namespace phasebal {

struct MetricStats {
  double max = 0.0;
  double avg = 0.0;
  double std = 0.0;  // population standard deviation
};

struct MethodSummary {
  std::string method;   // "d-PB", "r-PB", "r-LAPB(1)", ...
  MetricStats omega;    // kW
  MetricStats nu;       // kW
  MetricStats upsilon;  // percent
  MetricStats runtime;  // seconds
};

/// Table-II-shaped aggregation. Snapshots where upsilon is undefined (zero
/// total demand) are skipped for the upsilon column only. Throws on empty
/// metric input.
MethodSummary summarize(const std::string& method,
                        const std::vector<SnapshotMetrics>& metrics,
                        const std::vector<double>& runtimes);

MethodSummary summarize_run(const std::string& method, const SimulationRun& run);

/// Descending-sorted omega series, one (rank, kW) pair per snapshot.
std::vector<double> sorted_curve(const std::vector<SnapshotMetrics>& metrics);

/// Per-load count of implemented swap events; counts sum to run.total_swaps.
/// `load_ids` pre-seeds zero rows so never-swapped loads still appear.
std::map<std::string, int> swap_histogram(
    const SimulationRun& run, const std::vector<std::string>& load_ids = {});

void write_summary_csv(const std::vector<MethodSummary>& summaries,
                       const std::string& path);
std::vector<MethodSummary> read_summary_csv(const std::string& path);
void write_summary_json(const std::vector<MethodSummary>& summaries,
                        const std::string& path);

/// Columns: rank, then one omega column per method label.
void write_sorted_curves_csv(const std::vector<std::string>& labels,
                             const std::vector<std::vector<double>>& curves,
                             const std::string& path);

void write_swap_histogram_csv(const std::map<std::string, int>& counts,
                              const std::string& path);

}  // namespace phasebal
