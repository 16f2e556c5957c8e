// Brute-force reference computations for small instances. Everything here is
// exponential on purpose: the solver under test must agree with exhaustive
// enumeration, never the other way around.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "phasebal/types.hpp"

namespace oracle {

using phasebal::BoxUncertaintySet;
using phasebal::LookAheadConfig;
using phasebal::Phase;
using phasebal::PhaseAssignment;

// All 3^n single-phase assignments, in lexicographic phase order.
inline std::vector<PhaseAssignment> all_assignments(int n) {
  std::vector<PhaseAssignment> out;
  std::vector<Phase> phases(n, Phase::A);
  const long total = static_cast<long>(std::pow(3.0, n) + 0.5);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      phases[i] = static_cast<Phase>(c % 3);
      c /= 3;
    }
    out.push_back(PhaseAssignment::from_phases(phases));
  }
  return out;
}

struct PhaseSums {
  double a = 0.0, b = 0.0, c = 0.0;
};

inline PhaseSums sums_of(const PhaseAssignment& s, const std::vector<double>& d) {
  PhaseSums out;
  for (size_t i = 0; i < d.size(); ++i) {
    if (s.a[i]) out.a += d[i];
    if (s.b[i]) out.b += d[i];
    if (s.c[i]) out.c += d[i];
  }
  return out;
}

// Single-phase imbalance: max deviation of a phase sum from total/3.
inline double nu_of(const PhaseAssignment& s, const std::vector<double>& d) {
  const PhaseSums ps = sums_of(s, d);
  const double third = (ps.a + ps.b + ps.c) / 3.0;
  return std::max({std::fabs(ps.a - third), std::fabs(ps.b - third),
                   std::fabs(ps.c - third)});
}

// Between-phase imbalance: max pairwise difference of phase sums.
inline double omega_of(const PhaseAssignment& s, const std::vector<double>& d) {
  const PhaseSums ps = sums_of(s, d);
  return std::max({std::fabs(ps.a - ps.b), std::fabs(ps.b - ps.c),
                   std::fabs(ps.a - ps.c)});
}

inline double best_deterministic_nu(const std::vector<double>& d) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : all_assignments(static_cast<int>(d.size())))
    best = std::min(best, nu_of(s, d));
  return best;
}

inline double best_deterministic_omega(const std::vector<double>& d) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : all_assignments(static_cast<int>(d.size())))
    best = std::min(best, omega_of(s, d));
  return best;
}

// The 2^n corner points of a box.
inline std::vector<std::vector<double>> box_vertices(const BoxUncertaintySet& box) {
  const int n = box.dim();
  const auto lo = box.lower();
  const auto hi = box.upper();
  std::vector<std::vector<double>> out;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    out.push_back(std::move(v));
  }
  return out;
}

// Worst-case nu of a fixed assignment over a box. nu is convex in d, so the
// maximum is attained at a vertex.
inline double robust_nu(const PhaseAssignment& s, const BoxUncertaintySet& box) {
  double worst = 0.0;
  for (const auto& v : box_vertices(box)) worst = std::max(worst, nu_of(s, v));
  return worst;
}

inline double best_robust_nu(const BoxUncertaintySet& box) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : all_assignments(box.dim()))
    best = std::min(best, robust_nu(s, box));
  return best;
}

// Worst-case d^T x over a box for a fixed direction x.
inline double box_support(const BoxUncertaintySet& box, const std::vector<double>& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& v : box_vertices(box)) {
    double dot = 0.0;
    for (size_t i = 0; i < x.size(); ++i) dot += v[i] * x[i];
    worst = std::max(worst, dot);
  }
  return worst;
}

// Exhaustive two-period look-ahead: enumerate assignment sequences for
// t = 1..t1 whose cumulative swap count stays within the budget; the
// period-2 assignment is the period-1 terminal one held fixed.
inline double best_lookahead(const std::vector<BoxUncertaintySet>& sets,
                             const LookAheadConfig& cfg) {
  const int n = cfg.initial_assignment.n();
  const auto candidates = all_assignments(n);
  double best = std::numeric_limits<double>::infinity();

  struct Frame {
    std::vector<const PhaseAssignment*> seq;
    int swaps = 0;
    double u = 0.0;
  };
  std::vector<Frame> stack{{{}, 0, 0.0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const int t = static_cast<int>(f.seq.size());
    if (t == cfg.t1) {
      double v = 0.0;
      for (int k = cfg.t1; k < cfg.t2; ++k)
        v = std::max(v, robust_nu(*f.seq.back(), sets[k]));
      best = std::min(best, f.u + cfg.lambda * v);
      continue;
    }
    const PhaseAssignment& prev = t == 0 ? cfg.initial_assignment : *f.seq[t - 1];
    for (const auto& cand : candidates) {
      const int sw = f.swaps + phasebal::count_swaps(prev, cand);
      if (sw > cfg.swap_budget) continue;
      Frame next = f;
      next.seq.push_back(&cand);
      next.swaps = sw;
      next.u = std::max(f.u, robust_nu(cand, sets[t]));
      stack.push_back(std::move(next));
    }
  }
  return best;
}

// Independent two-pass mean / population standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_std: empty");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace oracle
