#pragma once

#include <string>
#include <variant>
#include <vector>

#include "phasebal/milp.hpp"
#include "phasebal/types.hpp"

namespace phasebal {

enum class ImbalanceObjective {
  MaxSinglePhase,  // largest |phase sum - total/3|
  MaxPairwise,     // largest |difference between two phase sums|
};

/// Affine expression over instance variables; used as the coefficient
/// direction x of an uncertain row d^T x <= bound.
struct AffineExpr {
  double constant = 0.0;
  std::vector<LinearTerm> terms;
};

/// Verifies that { d : H d <= h } is nonempty and bounded by solving the
/// 2n componentwise bounding LPs. Throws on failure.
void check_polyhedron(const PolyhedralSet& set);

/// Componentwise [min, max] of the polyhedron, from the same bounding LPs.
std::pair<std::vector<double>, std::vector<double>> polyhedron_extent(
    const PolyhedralSet& set);

/// Replaces the semi-infinite constraint  d^T x <= bound_var  for all
/// d in {H d <= h}  with its LP-dual certificate rows
///   h^T p <= bound_var,   H^T p = x,   p >= 0,
/// registering the fresh p variables under tag_prefix. Returns their indices.
std::vector<int> dualize_row(MilpInstance& inst, const std::vector<AffineExpr>& x,
                             const PolyhedralSet& set, int bound_var,
                             const std::string& tag_prefix);

struct BuildOptions {
  bool anchor_first_load = false;  // force load 0 to phase A (symmetry break)
};

/// Single-snapshot deterministic phase balancing on demand vector d.
MilpInstance build_deterministic(const LoadProfile& profile,
                                 const std::vector<double>& d,
                                 ImbalanceObjective objective,
                                 const BuildOptions& opts = {});

/// Single-snapshot robust phase balancing over a demand uncertainty set.
MilpInstance build_robust(const LoadProfile& profile, const PolyhedralSet& set,
                          const BuildOptions& opts = {});
MilpInstance build_robust(const LoadProfile& profile, const BoxUncertaintySet& set,
                          const BuildOptions& opts = {});

/// Two-period robust look-ahead phase balancing with a swap budget.
/// sets[t] is the demand set of snapshot t+1; sets.size() == config.t2.
MilpInstance build_lookahead(const LoadProfile& profile,
                             const std::vector<BoxUncertaintySet>& sets,
                             const LookAheadConfig& config);
MilpInstance build_lookahead(const LoadProfile& profile,
                             const std::vector<PolyhedralSet>& sets,
                             const LookAheadConfig& config);

/// Appends the per-load phase-occupancy rows: a_i + b_i + c_i = width_i.
/// vars are the indices of the a, b, c vectors in the instance.
void build_multiphase_constraints(MilpInstance& inst, const LoadProfile& profile,
                                  const std::vector<int>& a,
                                  const std::vector<int>& b,
                                  const std::vector<int>& c);

/// Decodes a solved look-ahead instance into a BalancePlan.
BalancePlan extract_plan(const MilpInstance& inst, const MilpSolution& solution,
                         const LookAheadConfig& config,
                         const std::vector<std::string>& load_ids = {});

/// Feasible warm-start point for a look-ahead instance: the initial
/// assignment held frozen, with dual certificates set in closed form.
WarmStart frozen_warm_start(const MilpInstance& inst,
                            const std::vector<BoxUncertaintySet>& sets,
                            const LookAheadConfig& config);

/// Worst-case single-phase imbalance of a fixed assignment over a box.
double robust_imbalance(const PhaseAssignment& assignment,
                        const BoxUncertaintySet& set);

// Variable naming used by the builders and extract_plan.
std::string var_assign(char phase, int t, int load);  // e.g. "a[t=3][i=17]"
std::string var_swap(char phase, int t, int load);    // e.g. "wa[t=3][i=17]"

}  // namespace phasebal
