#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phasebal {

enum class Phase : int { A = 0, B = 1, C = 2 };

char phase_letter(Phase p);
Phase phase_from_letter(char ch);

/// Per-load, per-snapshot kW demand. Immutable after construction.
struct LoadProfile {
  int n_loads = 0;
  int n_snapshots = 0;
  std::vector<std::vector<double>> demand;  // [load][snapshot], kW
  std::vector<std::string> load_ids;        // unique, length n_loads
  std::vector<int> phase_width;             // in {1,2,3}, default 1

  static LoadProfile create(std::vector<std::vector<double>> demand,
                            std::vector<std::string> load_ids = {},
                            std::vector<int> phase_width = {});

  std::vector<double> snapshot(int t) const;
  std::vector<double> average_demand() const;
};

/// Binary assignment of each load to phases, stored as the three parallel
/// indicator vectors a, b, c. A width-w load has exactly w entries set.
struct PhaseAssignment {
  std::vector<std::uint8_t> a, b, c;

  int n() const { return static_cast<int>(a.size()); }
  int width(int i) const { return a[i] + b[i] + c[i]; }
  bool on_phase(int i, Phase p) const;
  Phase phase_of(int i) const;  // single-phase loads only

  static PhaseAssignment round_robin(int n_loads);
  static PhaseAssignment from_phases(const std::vector<Phase>& phases);

  void validate(const std::vector<int>& widths = {}) const;

  bool operator==(const PhaseAssignment&) const = default;
};

/// Number of loads whose phase set differs between two assignments.
/// Equals (sum |a-a'| + |b-b'| + |c-c'|) / 2 for single-phase loads.
int count_swaps(const PhaseAssignment& prev, const PhaseAssignment& next);

/// Box demand uncertainty set: lower() <= d <= upper() componentwise.
struct BoxUncertaintySet {
  std::vector<double> center;      // kW
  std::vector<double> half_width;  // kW, >= 0
  bool allow_negative_lower = false;

  static BoxUncertaintySet absolute(std::vector<double> center,
                                    std::vector<double> half_width,
                                    bool allow_negative_lower = false);
  static BoxUncertaintySet relative(std::vector<double> center, double rho,
                                    bool allow_negative_lower = false);

  int dim() const { return static_cast<int>(center.size()); }
  std::vector<double> lower() const;  // clamped at 0 unless allowed negative
  std::vector<double> upper() const;
  bool contains(const std::vector<double>& d, double tol = 1e-9) const;
  bool is_singleton() const;
};

/// Polyhedral demand set { d : H d <= h }. Boundedness/nonemptiness is
/// verified by check_polyhedron (formulation.hpp) before use in builders.
struct PolyhedralSet {
  std::vector<std::vector<double>> H;  // k x n
  std::vector<double> h;               // length k

  int rows() const { return static_cast<int>(H.size()); }
  int dim() const { return H.empty() ? 0 : static_cast<int>(H[0].size()); }
};

PolyhedralSet box_to_polyhedron(const BoxUncertaintySet& box);

/// Two-period look-ahead horizon: snapshots 1..t1 are committed, t1+1..t2
/// are advisory. lambda weights the period-2 imbalance; swap_budget caps
/// phase changes in period 1.
struct LookAheadConfig {
  int t1 = 24;
  int t2 = 48;
  double lambda = 1.0 / 3.0;
  int swap_budget = 1;
  PhaseAssignment initial_assignment;

  void validate() const;
};

struct SwapEvent {
  int snapshot = 0;  // 1-based; swap happens at the start of this snapshot
  std::string load_id;
  Phase from = Phase::A;
  Phase to = Phase::A;
};

struct BalancePlan {
  std::vector<PhaseAssignment> assignments;  // t = 1..t1
  double u = 0.0;  // certified worst single-phase imbalance, period 1 (kW)
  double v = 0.0;  // same for period 2 under the advisory assignment (kW)
  PhaseAssignment advisory_assignment;       // held fixed over period 2
  std::vector<SwapEvent> swap_events;
  double gap = 0.0;

  void validate(const LookAheadConfig& config) const;
};

}  // namespace phasebal
