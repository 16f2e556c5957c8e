#include "phasebal/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace phasebal {

char phase_letter(Phase p) {
  switch (p) {
    case Phase::A: return 'A';
    case Phase::B: return 'B';
    case Phase::C: return 'C';
  }
  return '?';
}

Phase phase_from_letter(char ch) {
  switch (ch) {
    case 'A': case 'a': return Phase::A;
    case 'B': case 'b': return Phase::B;
    case 'C': case 'c': return Phase::C;
  }
  throw std::invalid_argument("unknown phase letter");
}

LoadProfile LoadProfile::create(std::vector<std::vector<double>> demand,
                                std::vector<std::string> load_ids,
                                std::vector<int> phase_width) {
  LoadProfile p;
  p.n_loads = static_cast<int>(demand.size());
  if (p.n_loads == 0) throw std::invalid_argument("LoadProfile: zero loads");
  p.n_snapshots = static_cast<int>(demand[0].size());
  if (p.n_snapshots == 0) throw std::invalid_argument("LoadProfile: zero snapshots");
  for (const auto& row : demand) {
    if (static_cast<int>(row.size()) != p.n_snapshots)
      throw std::invalid_argument("LoadProfile: ragged demand matrix");
    for (double d : row)
      if (!(d >= 0.0)) throw std::invalid_argument("LoadProfile: negative demand");
  }
  p.demand = std::move(demand);

  if (load_ids.empty()) {
    load_ids.reserve(p.n_loads);
    for (int i = 0; i < p.n_loads; ++i) load_ids.push_back("load" + std::to_string(i));
  }
  if (static_cast<int>(load_ids.size()) != p.n_loads)
    throw std::invalid_argument("LoadProfile: load_ids length mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& id : load_ids)
    if (!seen.insert(id).second)
      throw std::invalid_argument("LoadProfile: duplicate load_id " + id);
  p.load_ids = std::move(load_ids);

  if (phase_width.empty()) phase_width.assign(p.n_loads, 1);
  if (static_cast<int>(phase_width.size()) != p.n_loads)
    throw std::invalid_argument("LoadProfile: phase_width length mismatch");
  for (int w : phase_width)
    if (w < 1 || w > 3) throw std::invalid_argument("LoadProfile: width outside {1,2,3}");
  p.phase_width = std::move(phase_width);
  return p;
}

std::vector<double> LoadProfile::snapshot(int t) const {
  if (t < 0 || t >= n_snapshots) throw std::out_of_range("snapshot index");
  std::vector<double> d(n_loads);
  for (int i = 0; i < n_loads; ++i) d[i] = demand[i][t];
  return d;
}

std::vector<double> LoadProfile::average_demand() const {
  std::vector<double> d(n_loads, 0.0);
  for (int i = 0; i < n_loads; ++i) {
    double s = 0.0;
    for (int t = 0; t < n_snapshots; ++t) s += demand[i][t];
    d[i] = s / n_snapshots;
  }
  return d;
}

bool PhaseAssignment::on_phase(int i, Phase p) const {
  switch (p) {
    case Phase::A: return a[i] != 0;
    case Phase::B: return b[i] != 0;
    case Phase::C: return c[i] != 0;
  }
  return false;
}

Phase PhaseAssignment::phase_of(int i) const {
  if (width(i) != 1) throw std::logic_error("phase_of: not a single-phase load");
  if (a[i]) return Phase::A;
  if (b[i]) return Phase::B;
  return Phase::C;
}

PhaseAssignment PhaseAssignment::round_robin(int n_loads) {
  PhaseAssignment s;
  s.a.assign(n_loads, 0);
  s.b.assign(n_loads, 0);
  s.c.assign(n_loads, 0);
  for (int i = 0; i < n_loads; ++i) {
    switch (i % 3) {
      case 0: s.a[i] = 1; break;
      case 1: s.b[i] = 1; break;
      case 2: s.c[i] = 1; break;
    }
  }
  return s;
}

PhaseAssignment PhaseAssignment::from_phases(const std::vector<Phase>& phases) {
  PhaseAssignment s;
  const int n = static_cast<int>(phases.size());
  s.a.assign(n, 0);
  s.b.assign(n, 0);
  s.c.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    switch (phases[i]) {
      case Phase::A: s.a[i] = 1; break;
      case Phase::B: s.b[i] = 1; break;
      case Phase::C: s.c[i] = 1; break;
    }
  }
  return s;
}

void PhaseAssignment::validate(const std::vector<int>& widths) const {
  if (a.size() != b.size() || a.size() != c.size())
    throw std::invalid_argument("PhaseAssignment: vector length mismatch");
  for (int i = 0; i < n(); ++i) {
    if (a[i] > 1 || b[i] > 1 || c[i] > 1)
      throw std::invalid_argument("PhaseAssignment: non-binary entry");
    const int expected = widths.empty() ? 1 : widths[i];
    if (width(i) != expected)
      throw std::invalid_argument("PhaseAssignment: load " + std::to_string(i) +
                                  " occupies " + std::to_string(width(i)) +
                                  " phases, expected " + std::to_string(expected));
  }
}

int count_swaps(const PhaseAssignment& prev, const PhaseAssignment& next) {
  if (prev.n() != next.n())
    throw std::invalid_argument("count_swaps: dimension mismatch");
  int swaps = 0;
  for (int i = 0; i < prev.n(); ++i) {
    if (prev.a[i] != next.a[i] || prev.b[i] != next.b[i] || prev.c[i] != next.c[i])
      ++swaps;
  }
  return swaps;
}

BoxUncertaintySet BoxUncertaintySet::absolute(std::vector<double> center,
                                              std::vector<double> half_width,
                                              bool allow_negative_lower) {
  if (center.size() != half_width.size())
    throw std::invalid_argument("BoxUncertaintySet: length mismatch");
  for (double w : half_width)
    if (!(w >= 0.0)) throw std::invalid_argument("BoxUncertaintySet: negative half_width");
  BoxUncertaintySet s;
  s.center = std::move(center);
  s.half_width = std::move(half_width);
  s.allow_negative_lower = allow_negative_lower;
  return s;
}

BoxUncertaintySet BoxUncertaintySet::relative(std::vector<double> center, double rho,
                                              bool allow_negative_lower) {
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("BoxUncertaintySet: rho outside [0,1)");
  std::vector<double> hw(center.size());
  for (size_t i = 0; i < center.size(); ++i) {
    if (center[i] < 0.0)
      throw std::invalid_argument("BoxUncertaintySet: negative center in relative form");
    hw[i] = rho * center[i];
  }
  return absolute(std::move(center), std::move(hw), allow_negative_lower);
}

std::vector<double> BoxUncertaintySet::lower() const {
  std::vector<double> lo(center.size());
  for (size_t i = 0; i < center.size(); ++i) {
    lo[i] = center[i] - half_width[i];
    if (!allow_negative_lower && lo[i] < 0.0) lo[i] = 0.0;
  }
  return lo;
}

std::vector<double> BoxUncertaintySet::upper() const {
  std::vector<double> up(center.size());
  for (size_t i = 0; i < center.size(); ++i) up[i] = center[i] + half_width[i];
  return up;
}

bool BoxUncertaintySet::contains(const std::vector<double>& d, double tol) const {
  if (d.size() != center.size()) return false;
  const auto lo = lower();
  const auto up = upper();
  for (size_t i = 0; i < d.size(); ++i)
    if (d[i] < lo[i] - tol || d[i] > up[i] + tol) return false;
  return true;
}

bool BoxUncertaintySet::is_singleton() const {
  for (double w : half_width)
    if (w != 0.0) return false;
  return true;
}

PolyhedralSet box_to_polyhedron(const BoxUncertaintySet& box) {
  const int n = box.dim();
  const auto lo = box.lower();
  const auto up = box.upper();
  PolyhedralSet s;
  s.H.assign(2 * n, std::vector<double>(n, 0.0));
  s.h.assign(2 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    s.H[i][i] = 1.0;       // d_i <= upper_i
    s.h[i] = up[i];
    s.H[n + i][i] = -1.0;  // -d_i <= -lower_i
    s.h[n + i] = -lo[i];
  }
  return s;
}

void LookAheadConfig::validate() const {
  if (t1 < 1) throw std::invalid_argument("LookAheadConfig: t1 < 1");
  if (t2 <= t1) throw std::invalid_argument("LookAheadConfig: t2 <= t1");
  if (lambda < 0.0) throw std::invalid_argument("LookAheadConfig: negative lambda");
  if (swap_budget < 0) throw std::invalid_argument("LookAheadConfig: negative swap_budget");
  initial_assignment.validate();
}

void BalancePlan::validate(const LookAheadConfig& config) const {
  if (static_cast<int>(assignments.size()) != config.t1)
    throw std::invalid_argument("BalancePlan: assignment count != t1");
  if (!(u >= 0.0) || !(v >= 0.0))
    throw std::invalid_argument("BalancePlan: negative imbalance");
  if (static_cast<int>(swap_events.size()) > config.swap_budget)
    throw std::invalid_argument("BalancePlan: swap_events exceed budget");
  // Each differing load between consecutive assignments must contribute
  // exactly one event at that snapshot.
  int expected = 0;
  const PhaseAssignment* prev = &config.initial_assignment;
  for (int t = 0; t < config.t1; ++t) {
    expected += count_swaps(*prev, assignments[t]);
    prev = &assignments[t];
  }
  if (expected != static_cast<int>(swap_events.size()))
    throw std::invalid_argument("BalancePlan: swap_events inconsistent with assignments");
  if (!(advisory_assignment == assignments.back()))
    throw std::invalid_argument("BalancePlan: advisory != terminal assignment");
}

}  // namespace phasebal
