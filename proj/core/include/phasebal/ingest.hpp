#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasebal/types.hpp"

namespace phasebal {

enum class CsvLayout {
  Wide,  // loads as columns, one row per snapshot
  Long,  // load_id,timestamp,kw rows
};

struct LoadDataset {
  LoadProfile profile;
  int snapshots_per_day = 24;
  std::vector<int> day_boundaries;  // first snapshot index of each day
  std::string source_note;

  int n_days() const { return static_cast<int>(day_boundaries.size()); }
  void validate() const;
};

LoadDataset read_csv(const std::string& path, CsvLayout layout);
void write_csv(const LoadDataset& dataset, const std::string& path,
               CsvLayout layout = CsvLayout::Wide);

/// Per-load multiplicative factor drawn uniformly from scale_range.
LoadDataset random_scale(const LoadDataset& dataset, std::uint64_t seed,
                         std::pair<double, double> scale_range = {0.8, 1.2});

/// Box from history at one hour of day: center is the per-load mean across
/// days, half_width the largest |observation - mean|. Needs >= 2 days.
BoxUncertaintySet estimate_box(const LoadDataset& dataset, int hour_of_day);

/// Box over the whole history: per-load mean and max deviation.
BoxUncertaintySet estimate_box_overall(const LoadDataset& dataset);

/// Relative boxes around a per-snapshot forecast; rho_schedule[t] in [0,1).
std::vector<BoxUncertaintySet> forecast_box(
    const std::vector<std::vector<double>>& forecast,
    const std::vector<double>& rho_schedule);

/// Averages consecutive blocks of hours_per_snapshot snapshots.
LoadDataset aggregate(const LoadDataset& dataset, int hours_per_snapshot);

/// FNV-1a over the demand matrix rendered at full precision.
std::uint64_t demand_checksum(const LoadProfile& profile);

/// JSON sidecar {seed, scale_range, source_note, checksum}.
void write_dataset_sidecar(const LoadDataset& dataset, const std::string& path,
                           std::uint64_t seed, std::pair<double, double> scale_range);

}  // namespace phasebal
