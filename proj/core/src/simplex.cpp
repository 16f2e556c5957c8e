#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "phasebal/milp.hpp"

namespace phasebal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRcTol = 1e-9;        // reduced-cost threshold for entering
constexpr double kPivotTol = 1e-9;     // minimum admissible pivot magnitude
constexpr double kStablePivot = 1e-7;  // preferred pivot magnitude
constexpr double kPhase1Tol = 1e-7;    // residual phase-1 objective => infeasible
constexpr int kBlandStreak = 50;       // degenerate pivots before Bland's rule
constexpr long kRebuildEvery = 512;    // pivots between exact tableau rebuilds

// Dense two-phase primal simplex working on an equality tableau with
// slack/artificial logical columns. Rows are pre-flipped to rhs >= 0.
class Tableau {
 public:
  Tableau(int m, int ncols) : m_(m), stride_(ncols + 1), t_(m * (ncols + 1), 0.0) {}

  double& at(int i, int j) { return t_[i * stride_ + j]; }
  double& rhs(int i) { return t_[i * stride_ + stride_ - 1]; }

  // Pivot on (p, q); also updates the two reduced-cost rows and objectives.
  void pivot(int p, int q, std::vector<double>& rc1, std::vector<double>& rc2,
             double& z1, double& z2) {
    const double piv = at(p, q);
    const double inv = 1.0 / piv;
    double* rowp = &t_[p * stride_];
    for (int j = 0; j < stride_; ++j) rowp[j] *= inv;
    rowp[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* rowi = &t_[i * stride_];
      const double f = rowi[q];
      if (f == 0.0) continue;
      for (int j = 0; j < stride_; ++j) rowi[j] -= f * rowp[j];
      rowi[q] = 0.0;
    }
    const double f1 = rc1[q];
    if (f1 != 0.0) {
      for (int j = 0; j < stride_ - 1; ++j) rc1[j] -= f1 * rowp[j];
      rc1[q] = 0.0;
      z1 += f1 * rhsOf(rowp);
    }
    const double f2 = rc2[q];
    if (f2 != 0.0) {
      for (int j = 0; j < stride_ - 1; ++j) rc2[j] -= f2 * rowp[j];
      rc2[q] = 0.0;
      z2 += f2 * rhsOf(rowp);
    }
  }

  int rows() const { return m_; }
  int cols() const { return stride_ - 1; }

 private:
  double rhsOf(const double* row) const { return row[stride_ - 1]; }

  int m_;
  int stride_;
  std::vector<double> t_;
};

struct SimplexCtx {
  Tableau tab;
  std::vector<int> basis;        // basic column per row
  std::vector<bool> dead_row;    // linearly dependent rows dropped after phase 1
  std::vector<double> rc1, rc2;  // reduced costs, phase 1 and 2
  double z1 = 0.0, z2 = 0.0;     // current phase objectives (minimization)
  long iterations = 0;
  bool bland = false;
};

enum class StepResult { Done, Unbounded, Stalled };

// Recomputes the tableau exactly from the pristine copy via Gauss-Jordan on
// the current basis, then rederives both reduced-cost rows from the raw cost
// vectors. This is the dense analog of refactorization: without it, roundoff
// from thousands of pivots (especially tiny pivot elements in degenerate
// bases) compounds until the tableau is garbage.
bool rebuild(SimplexCtx& ctx, const Tableau& pristine,
             const std::vector<double>& cost1, const std::vector<double>& cost2) {
  const int m = ctx.tab.rows();
  const int ncols = ctx.tab.cols();
  Tableau fresh = pristine;
  std::vector<double> scratch1(ncols, 0.0), scratch2(ncols, 0.0);
  double sz1 = 0.0, sz2 = 0.0;

  // Eliminate each basic column, assigning it to the undone row where its
  // current entry is largest; the row <-> basic-variable pairing is
  // bookkeeping, so re-pairing for pivot size is free.
  std::vector<int> bcols;
  bcols.reserve(m);
  for (int i = 0; i < m; ++i)
    if (!ctx.dead_row[i]) bcols.push_back(ctx.basis[i]);
  std::vector<bool> done(m, false);
  std::vector<int> new_basis = ctx.basis;
  for (int j : bcols) {
    int r = -1;
    double best = 1e-11;
    for (int i = 0; i < m; ++i) {
      if (done[i] || ctx.dead_row[i]) continue;
      const double a = std::abs(fresh.at(i, j));
      if (a > best) { best = a; r = i; }
    }
    if (r < 0) return false;  // numerically singular basis
    fresh.pivot(r, j, scratch1, scratch2, sz1, sz2);
    done[r] = true;
    new_basis[r] = j;
  }

  // Basic values are exact now; tiny negatives are degenerate zeros.
  for (int i = 0; i < m; ++i)
    if (!ctx.dead_row[i] && fresh.rhs(i) < 0.0) {
      if (fresh.rhs(i) < -1e-6) return false;
      fresh.rhs(i) = 0.0;
    }

  ctx.tab = std::move(fresh);
  ctx.basis = std::move(new_basis);
  std::fill(ctx.rc1.begin(), ctx.rc1.end(), 0.0);
  std::fill(ctx.rc2.begin(), ctx.rc2.end(), 0.0);
  ctx.z1 = ctx.z2 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (ctx.dead_row[i]) continue;
    const double c1 = cost1[ctx.basis[i]];
    const double c2 = cost2[ctx.basis[i]];
    if (c1 != 0.0) {
      ctx.z1 += c1 * ctx.tab.rhs(i);
      for (int j = 0; j < ncols; ++j) ctx.rc1[j] -= c1 * ctx.tab.at(i, j);
    }
    if (c2 != 0.0) {
      ctx.z2 += c2 * ctx.tab.rhs(i);
      for (int j = 0; j < ncols; ++j) ctx.rc2[j] -= c2 * ctx.tab.at(i, j);
    }
  }
  for (int j = 0; j < ncols; ++j) {
    ctx.rc1[j] += cost1[j];
    ctx.rc2[j] += cost2[j];
  }
  for (int i = 0; i < m; ++i) {
    if (ctx.dead_row[i]) continue;
    ctx.rc1[ctx.basis[i]] = 0.0;
    ctx.rc2[ctx.basis[i]] = 0.0;
  }
  return true;
}

// Runs simplex pivots until optimality on the given reduced-cost row.
StepResult run_phase(SimplexCtx& ctx, std::vector<double>& rc, double& z,
                     const std::vector<bool>& allowed, long max_iters,
                     const Tableau& pristine, const std::vector<double>& cost1,
                     const std::vector<double>& cost2) {
  int streak = 0;
  long since_rebuild = 0;
  while (true) {
    if (ctx.iterations >= max_iters) return StepResult::Stalled;
    if (since_rebuild >= kRebuildEvery) {
      if (!rebuild(ctx, pristine, cost1, cost2)) return StepResult::Stalled;
      since_rebuild = 0;
    }
    // Entering column: Dantzig (most negative), Bland (lowest index) after
    // a long degeneracy streak.
    int q = -1;
    if (ctx.bland) {
      for (int j = 0; j < ctx.tab.cols(); ++j)
        if (allowed[j] && rc[j] < -kRcTol) { q = j; break; }
    } else {
      double best = -kRcTol;
      for (int j = 0; j < ctx.tab.cols(); ++j)
        if (allowed[j] && rc[j] < best) { best = rc[j]; q = j; }
    }
    if (q < 0) return StepResult::Done;

    // Ratio test, run twice: first over well-scaled pivot elements, then --
    // only if that leaves no candidate -- over anything admissible, so tiny
    // pivots never amplify roundoff when a stable alternative exists. Under
    // Bland, ratio ties go to the lowest basis variable index (anti-cycling);
    // otherwise to the largest pivot magnitude.
    int p = -1;
    for (const double piv_floor : {kStablePivot, kPivotTol}) {
      double best_ratio = kInf;
      double best_piv = 0.0;
      for (int i = 0; i < ctx.tab.rows(); ++i) {
        if (ctx.dead_row[i]) continue;
        const double a = ctx.tab.at(i, q);
        if (a <= piv_floor) continue;
        // Roundoff can leave a basic value marginally negative; clamping
        // keeps the ratio nonnegative so the iterate stays feasible.
        const double ratio = std::max(0.0, ctx.tab.rhs(i)) / a;
        bool take = false;
        if (p < 0 || ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio < best_ratio + 1e-12) {
          take = ctx.bland ? ctx.basis[i] < ctx.basis[p] : a > best_piv;
        }
        if (take) {
          best_ratio = std::min(best_ratio, ratio);
          best_piv = a;
          p = i;
        }
      }
      if (p >= 0) break;
    }
    if (p < 0) return StepResult::Unbounded;

    const double z_before = z;
    ctx.tab.pivot(p, q, ctx.rc1, ctx.rc2, ctx.z1, ctx.z2);
    ctx.basis[p] = q;
    ++ctx.iterations;
    ++since_rebuild;

    if (z_before - z < 1e-12) {
      if (++streak >= kBlandStreak) ctx.bland = true;
    } else {
      streak = 0;
    }
  }
}

}  // namespace

LpResult solve_lp(const MilpInstance& inst, const std::vector<VarBound>& fixings) {
  const int n = inst.n_vars();
  LpResult res;

  std::vector<double> lb(n, 0.0), ub(n, kInf);
  for (int i = 0; i < n; ++i)
    if (inst.variable(i).kind == VarKind::Binary) ub[i] = 1.0;
  for (const auto& f : fixings) {
    if (f.var < 0 || f.var >= n) throw std::invalid_argument("fixing: bad var index");
    lb[f.var] = std::max(lb[f.var], f.lower);
    ub[f.var] = std::min(ub[f.var], f.upper);
  }
  for (int i = 0; i < n; ++i)
    if (lb[i] > ub[i] + 1e-9) { res.status = LpStatus::Infeasible; return res; }

  // Active variables are shifted to y = x - lb with y in [0, ub - lb];
  // variables with a collapsed range are substituted out.
  std::vector<int> col_of(n, -1);
  std::vector<int> var_of;
  for (int i = 0; i < n; ++i) {
    if (ub[i] - lb[i] > 1e-12) {
      col_of[i] = static_cast<int>(var_of.size());
      var_of.push_back(i);
    }
  }
  const int nact = static_cast<int>(var_of.size());

  struct WorkRow {
    std::vector<LinearTerm> terms;  // over active columns
    RowSense sense;
    double rhs;
  };
  std::vector<WorkRow> work;
  work.reserve(inst.n_rows() + nact);
  for (int r = 0; r < inst.n_rows(); ++r) {
    const MilpRow& row = inst.row(r);
    WorkRow w{{}, row.sense, row.rhs};
    for (const auto& t : row.terms) {
      w.rhs -= t.coef * lb[t.var];
      if (col_of[t.var] >= 0) w.terms.push_back({col_of[t.var], t.coef});
    }
    if (w.terms.empty()) {
      const double viol = (w.sense == RowSense::LE)   ? -w.rhs
                          : (w.sense == RowSense::GE) ? w.rhs
                                                      : std::abs(w.rhs);
      if (viol > 1e-8) { res.status = LpStatus::Infeasible; return res; }
      continue;
    }
    work.push_back(std::move(w));
  }
  for (int j = 0; j < nact; ++j) {
    const int i = var_of[j];
    if (ub[i] < kInf) work.push_back({{{j, 1.0}}, RowSense::LE, ub[i] - lb[i]});
  }

  const int m = static_cast<int>(work.size());
  if (m == 0) {
    // Bounds-only problem: every active variable sits at its cheapest bound.
    std::vector<double> x(n);
    bool unbounded = false;
    for (int i = 0; i < n; ++i) {
      x[i] = lb[i];
      if (col_of[i] >= 0 && inst.variable(i).obj < 0.0) {
        if (ub[i] == kInf) unbounded = true;
        else x[i] = ub[i];
      }
    }
    res.status = unbounded ? LpStatus::Unbounded : LpStatus::Optimal;
    res.values = std::move(x);
    res.objective = inst.objective_value(res.values);
    return res;
  }

  // Flip rows so rhs >= 0, then attach logical columns.
  int n_slack = 0, n_art = 0;
  for (auto& w : work) {
    if (w.rhs < 0.0) {
      w.rhs = -w.rhs;
      for (auto& t : w.terms) t.coef = -t.coef;
      if (w.sense == RowSense::LE) w.sense = RowSense::GE;
      else if (w.sense == RowSense::GE) w.sense = RowSense::LE;
    }
    if (w.sense != RowSense::EQ) ++n_slack;
    if (w.sense != RowSense::LE) ++n_art;
  }
  const int ncols = nact + n_slack + n_art;
  const int art_begin = nact + n_slack;

  SimplexCtx ctx{Tableau(m, ncols), std::vector<int>(m, -1),
                 std::vector<bool>(m, false), std::vector<double>(ncols, 0.0),
                 std::vector<double>(ncols, 0.0)};

  int slack_next = nact, art_next = art_begin;
  for (int i = 0; i < m; ++i) {
    const auto& w = work[i];
    for (const auto& t : w.terms) ctx.tab.at(i, t.var) = t.coef;
    ctx.tab.rhs(i) = w.rhs;
    if (w.sense == RowSense::LE) {
      ctx.tab.at(i, slack_next) = 1.0;
      ctx.basis[i] = slack_next++;
    } else if (w.sense == RowSense::GE) {
      ctx.tab.at(i, slack_next++) = -1.0;
      ctx.tab.at(i, art_next) = 1.0;
      ctx.basis[i] = art_next++;
    } else {
      ctx.tab.at(i, art_next) = 1.0;
      ctx.basis[i] = art_next++;
    }
  }

  // Reduced costs. Phase 1 minimizes the sum of artificials, whose basic
  // rows fold into rc1; phase 2 carries the shifted original objective.
  for (int i = 0; i < m; ++i) {
    if (ctx.basis[i] >= art_begin) {
      for (int j = 0; j < ncols; ++j) ctx.rc1[j] -= ctx.tab.at(i, j);
      ctx.rc1[ctx.basis[i]] += 1.0;  // its own unit column
      ctx.z1 += ctx.tab.rhs(i);
    }
  }
  for (int j = 0; j < nact; ++j) ctx.rc2[j] = inst.variable(var_of[j]).obj;

  // Pristine copy and raw phase cost vectors, kept for exact rebuilds.
  const Tableau pristine = ctx.tab;
  std::vector<double> cost1(ncols, 0.0), cost2(ncols, 0.0);
  for (int j = art_begin; j < ncols; ++j) cost1[j] = 1.0;
  for (int j = 0; j < nact; ++j) cost2[j] = inst.variable(var_of[j]).obj;

  const long max_iters = 20000 + 200L * (m + ncols);
  const SimplexCtx ctx0 = ctx;  // initial state, kept for a stability retry

  auto attempt = [&](bool bland_from_start) -> LpStatus {
    ctx = ctx0;
    ctx.bland = bland_from_start;
    std::vector<bool> allowed(ncols, true);

    if (ctx.z1 > kPhase1Tol) {
      const StepResult r1 = run_phase(ctx, ctx.rc1, ctx.z1, allowed, max_iters,
                                      pristine, cost1, cost2);
      if (r1 == StepResult::Stalled) return LpStatus::Stalled;
      if (ctx.z1 > kPhase1Tol) return LpStatus::Infeasible;
    }

    // Exile artificials; pivot basic ones out or drop dependent rows.
    for (int j = art_begin; j < ncols; ++j) allowed[j] = false;
    for (int i = 0; i < m; ++i) {
      if (ctx.basis[i] < art_begin) continue;
      int q = -1;
      for (int j = 0; j < art_begin; ++j)
        if (std::abs(ctx.tab.at(i, j)) > 1e-7) { q = j; break; }
      if (q >= 0) {
        ctx.tab.pivot(i, q, ctx.rc1, ctx.rc2, ctx.z1, ctx.z2);
        ctx.basis[i] = q;
      } else {
        ctx.dead_row[i] = true;
      }
    }

    const StepResult r2 = run_phase(ctx, ctx.rc2, ctx.z2, allowed, max_iters,
                                    pristine, cost1, cost2);
    if (r2 == StepResult::Stalled) return LpStatus::Stalled;
    if (r2 == StepResult::Unbounded) return LpStatus::Unbounded;

    // Rebuild the tableau exactly before extraction only when drift actually
    // shows in the candidate point; the residual check is O(nnz) while a
    // refactorization costs a full Gauss-Jordan pass.
    if (ctx.iterations > 0) {
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = lb[i];
      for (int i = 0; i < m; ++i) {
        if (ctx.dead_row[i]) continue;
        const int bj = ctx.basis[i];
        if (bj < nact) x[var_of[bj]] = lb[var_of[bj]] + ctx.tab.rhs(i);
      }
      if (inst.max_violation(x) > 1e-7 && !rebuild(ctx, pristine, cost1, cost2))
        return LpStatus::Stalled;
    }
    return LpStatus::Optimal;
  };

  // Dantzig pricing first; if numerics break the basis (rare, degenerate
  // instances), restart deterministically under Bland's rule.
  LpStatus status = attempt(false);
  if (status == LpStatus::Stalled) status = attempt(true);
  if (status != LpStatus::Optimal) { res.status = status; return res; }

  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = lb[i];
  for (int i = 0; i < m; ++i) {
    if (ctx.dead_row[i]) continue;
    const int bj = ctx.basis[i];
    if (bj < nact) x[var_of[bj]] = lb[var_of[bj]] + ctx.tab.rhs(i);
  }
  res.status = LpStatus::Optimal;
  res.values = std::move(x);
  res.objective = inst.objective_value(res.values);
  res.iterations = ctx.iterations;
  res.bland_engaged = ctx.bland;
  return res;
}

}  // namespace phasebal
