#include "phasebal/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phasebal {

namespace {

constexpr double kThird = 1.0 / 3.0;
const char kPhaseLetters[3] = {'a', 'b', 'c'};

std::string idx(const std::string& key, int value) {
  return "[" + key + "=" + std::to_string(value) + "]";
}

// max_{d in box} d^T x, componentwise separable.
double box_worst_case(const std::vector<double>& lo, const std::vector<double>& up,
                      const std::vector<double>& x) {
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    worst += x[i] >= 0.0 ? up[i] * x[i] : lo[i] * x[i];
  return worst;
}

}  // namespace

std::string var_assign(char phase, int t, int load) {
  std::string name(1, phase);
  if (t > 0) name += idx("t", t);
  return name + idx("i", load);
}

std::string var_swap(char phase, int t, int load) {
  return std::string("w") + phase + idx("t", t) + idx("i", load);
}

std::pair<std::vector<double>, std::vector<double>> polyhedron_extent(
    const PolyhedralSet& set) {
  const int n = set.dim();
  const int k = set.rows();
  if (k < 1 || n < 1) throw std::invalid_argument("polyhedron: empty system");

  std::vector<double> lo(n), up(n);
  for (int i = 0; i < n; ++i) {
    for (int dir : {+1, -1}) {
      // d is sign-free, so solve over the split d = dp - dn, dp, dn >= 0,
      // minimizing dir * d_i (dir=+1 gives min, dir=-1 gives -max).
      MilpInstance probe;
      std::vector<int> dp(n), dn(n);
      for (int j = 0; j < n; ++j) {
        dp[j] = probe.add_variable("dp" + idx("i", j), VarKind::Continuous,
                                   j == i ? dir : 0.0);
        dn[j] = probe.add_variable("dn" + idx("i", j), VarKind::Continuous,
                                   j == i ? -dir : 0.0);
      }
      for (int r = 0; r < k; ++r) {
        std::vector<LinearTerm> terms;
        for (int j = 0; j < n; ++j) {
          if (set.H[r][j] != 0.0) {
            terms.push_back({dp[j], set.H[r][j]});
            terms.push_back({dn[j], -set.H[r][j]});
          }
        }
        probe.add_row(std::move(terms), RowSense::LE, set.h[r]);
      }
      const LpResult res = solve_lp(probe);
      if (res.status == LpStatus::Infeasible)
        throw std::invalid_argument("polyhedron: empty set");
      if (res.status == LpStatus::Unbounded)
        throw std::invalid_argument("polyhedron: unbounded set");
      if (res.status != LpStatus::Optimal)
        throw std::runtime_error("polyhedron: bounding LP failed");
      if (dir > 0) lo[i] = res.objective;
      else up[i] = -res.objective;
    }
  }
  return {lo, up};
}

void check_polyhedron(const PolyhedralSet& set) { (void)polyhedron_extent(set); }

std::vector<int> dualize_row(MilpInstance& inst, const std::vector<AffineExpr>& x,
                             const PolyhedralSet& set, int bound_var,
                             const std::string& tag_prefix) {
  const int n = set.dim();
  const int k = set.rows();
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("dualize_row: direction length != set dimension");
  if (k < 1) throw std::invalid_argument("dualize_row: empty polyhedron");

  std::vector<int> p(k);
  for (int j = 0; j < k; ++j)
    p[j] = inst.add_variable(tag_prefix + idx("k", j), VarKind::Continuous, 0.0,
                             "dual:" + tag_prefix + idx("row", j));

  // h^T p <= bound_var
  std::vector<LinearTerm> bound_terms;
  bound_terms.reserve(k + 1);
  for (int j = 0; j < k; ++j)
    if (set.h[j] != 0.0) bound_terms.push_back({p[j], set.h[j]});
  bound_terms.push_back({bound_var, -1.0});
  inst.add_row(std::move(bound_terms), RowSense::LE, 0.0);

  // H^T p = x  (one equality per uncertain dimension)
  for (int i = 0; i < n; ++i) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < k; ++j)
      if (set.H[j][i] != 0.0) terms.push_back({p[j], set.H[j][i]});
    for (const auto& t : x[i].terms) terms.push_back({t.var, -t.coef});
    inst.add_row(std::move(terms), RowSense::EQ, x[i].constant);
  }
  return p;
}

void build_multiphase_constraints(MilpInstance& inst, const LoadProfile& profile,
                                  const std::vector<int>& a,
                                  const std::vector<int>& b,
                                  const std::vector<int>& c) {
  for (int i = 0; i < profile.n_loads; ++i) {
    const int w = profile.phase_width[i];
    if (w < 1 || w > 3)
      throw std::invalid_argument("phase width outside {1,2,3}");
    inst.add_row({{a[i], 1.0}, {b[i], 1.0}, {c[i], 1.0}}, RowSense::EQ,
                 static_cast<double>(w));
  }
}

namespace {

struct PhaseVars {
  std::vector<int> v[3];  // a, b, c indices
};

PhaseVars add_assignment_vars(MilpInstance& inst, int n, int t) {
  PhaseVars pv;
  for (int ph = 0; ph < 3; ++ph) {
    pv.v[ph].resize(n);
    for (int i = 0; i < n; ++i) {
      const char letter = kPhaseLetters[ph];
      std::string tag = "assignment:" + std::string(1, letter);
      if (t > 0) tag += idx("t", t);
      tag += idx("load", i);
      pv.v[ph][i] =
          inst.add_variable(var_assign(letter, t, i), VarKind::Binary, 0.0, tag);
    }
  }
  return pv;
}

// The six dualized row families of one snapshot: +/-(phase - 1/3) vs bound.
void add_robust_families(MilpInstance& inst, const PhaseVars& pv,
                         const PolyhedralSet& set, int bound_var,
                         const std::string& time_suffix) {
  const int n = set.dim();
  for (int ph = 0; ph < 3; ++ph) {
    const char letter = kPhaseLetters[ph];
    std::vector<AffineExpr> plus(n), minus(n);
    for (int i = 0; i < n; ++i) {
      plus[i] = {-kThird, {{pv.v[ph][i], 1.0}}};
      minus[i] = {kThird, {{pv.v[ph][i], -1.0}}};
    }
    dualize_row(inst, plus, set, bound_var,
                std::string("p") + letter + time_suffix);
    dualize_row(inst, minus, set, bound_var,
                std::string("q") + letter + time_suffix);
  }
}

void add_anchor(MilpInstance& inst, const LoadProfile& profile, const PhaseVars& pv) {
  if (profile.phase_width[0] == 1)
    inst.add_row({{pv.v[0][0], 1.0}}, RowSense::EQ, 1.0);
}

}  // namespace

MilpInstance build_deterministic(const LoadProfile& profile,
                                 const std::vector<double>& d,
                                 ImbalanceObjective objective,
                                 const BuildOptions& opts) {
  const int n = profile.n_loads;
  if (static_cast<int>(d.size()) != n)
    throw std::invalid_argument("build_deterministic: demand length mismatch");
  for (double di : d)
    if (!(di >= 0.0)) throw std::invalid_argument("build_deterministic: negative demand");

  MilpInstance inst;
  const int u = inst.add_variable("u", VarKind::Continuous, 1.0, "objective:u");
  const PhaseVars pv = add_assignment_vars(inst, n, 0);

  if (objective == ImbalanceObjective::MaxSinglePhase) {
    double total = 0.0;
    for (double di : d) total += di;
    for (int ph = 0; ph < 3; ++ph) {
      //  -u <= d^T (phase - 1/3) <= u
      std::vector<LinearTerm> up_terms, lo_terms;
      for (int i = 0; i < n; ++i) {
        if (d[i] == 0.0) continue;
        up_terms.push_back({pv.v[ph][i], d[i]});
        lo_terms.push_back({pv.v[ph][i], -d[i]});
      }
      up_terms.push_back({u, -1.0});
      lo_terms.push_back({u, -1.0});
      inst.add_row(std::move(up_terms), RowSense::LE, total * kThird);
      inst.add_row(std::move(lo_terms), RowSense::LE, -total * kThird);
    }
  } else {
    for (int ph = 0; ph < 3; ++ph) {
      const int other = (ph + 1) % 3;
      //  -u <= d^T (phase - other) <= u
      std::vector<LinearTerm> up_terms, lo_terms;
      for (int i = 0; i < n; ++i) {
        if (d[i] == 0.0) continue;
        up_terms.push_back({pv.v[ph][i], d[i]});
        up_terms.push_back({pv.v[other][i], -d[i]});
        lo_terms.push_back({pv.v[ph][i], -d[i]});
        lo_terms.push_back({pv.v[other][i], d[i]});
      }
      up_terms.push_back({u, -1.0});
      lo_terms.push_back({u, -1.0});
      inst.add_row(std::move(up_terms), RowSense::LE, 0.0);
      inst.add_row(std::move(lo_terms), RowSense::LE, 0.0);
    }
  }

  build_multiphase_constraints(inst, profile, pv.v[0], pv.v[1], pv.v[2]);
  if (opts.anchor_first_load) add_anchor(inst, profile, pv);
  return inst;
}

MilpInstance build_robust(const LoadProfile& profile, const PolyhedralSet& set,
                          const BuildOptions& opts) {
  const int n = profile.n_loads;
  if (set.dim() != n)
    throw std::invalid_argument("build_robust: set dimension mismatch");
  check_polyhedron(set);

  MilpInstance inst;
  const int u = inst.add_variable("u", VarKind::Continuous, 1.0, "objective:u");
  const PhaseVars pv = add_assignment_vars(inst, n, 0);
  add_robust_families(inst, pv, set, u, "");
  build_multiphase_constraints(inst, profile, pv.v[0], pv.v[1], pv.v[2]);
  if (opts.anchor_first_load) add_anchor(inst, profile, pv);
  return inst;
}

MilpInstance build_robust(const LoadProfile& profile, const BoxUncertaintySet& set,
                          const BuildOptions& opts) {
  if (set.dim() != profile.n_loads)
    throw std::invalid_argument("build_robust: set dimension mismatch");
  // A box is bounded and nonempty by construction; no LP check needed.
  const PolyhedralSet poly = box_to_polyhedron(set);
  MilpInstance inst;
  const int u = inst.add_variable("u", VarKind::Continuous, 1.0, "objective:u");
  const PhaseVars pv = add_assignment_vars(inst, profile.n_loads, 0);
  add_robust_families(inst, pv, poly, u, "");
  build_multiphase_constraints(inst, profile, pv.v[0], pv.v[1], pv.v[2]);
  if (opts.anchor_first_load) add_anchor(inst, profile, pv);
  return inst;
}

namespace {

MilpInstance build_lookahead_impl(const LoadProfile& profile,
                                  const std::vector<PolyhedralSet>& sets,
                                  const LookAheadConfig& config) {
  config.validate();
  const int n = profile.n_loads;
  if (config.initial_assignment.n() != n)
    throw std::invalid_argument("build_lookahead: initial assignment size mismatch");
  config.initial_assignment.validate(profile.phase_width);
  if (static_cast<int>(sets.size()) != config.t2)
    throw std::invalid_argument("build_lookahead: need one set per snapshot");
  for (const auto& s : sets)
    if (s.dim() != n)
      throw std::invalid_argument("build_lookahead: set dimension mismatch");

  MilpInstance inst;
  const int u = inst.add_variable("u", VarKind::Continuous, 1.0, "objective:u");
  const int v = inst.add_variable("v", VarKind::Continuous, config.lambda,
                                  "objective:v");

  std::vector<PhaseVars> assign(config.t1 + 1);
  for (int t = 1; t <= config.t1; ++t) assign[t] = add_assignment_vars(inst, n, t);

  // Swap linearization w >= |phase[t] - phase[t-1]|; t = 1 compares against
  // the constant initial assignment.
  std::vector<LinearTerm> budget;
  const PhaseAssignment& init = config.initial_assignment;
  for (int t = 1; t <= config.t1; ++t) {
    for (int ph = 0; ph < 3; ++ph) {
      const char letter = kPhaseLetters[ph];
      for (int i = 0; i < n; ++i) {
        const int w = inst.add_variable(
            var_swap(letter, t, i), VarKind::Continuous, 0.0,
            "swap:w" + std::string(1, letter) + idx("t", t) + idx("load", i));
        budget.push_back({w, 1.0});
        const int cur = assign[t].v[ph][i];
        if (t == 1) {
          const double prev =
              ph == 0 ? init.a[i] : (ph == 1 ? init.b[i] : init.c[i]);
          inst.add_row({{cur, 1.0}, {w, -1.0}}, RowSense::LE, prev);
          inst.add_row({{cur, -1.0}, {w, -1.0}}, RowSense::LE, -prev);
        } else {
          const int prev = assign[t - 1].v[ph][i];
          inst.add_row({{cur, 1.0}, {prev, -1.0}, {w, -1.0}}, RowSense::LE, 0.0);
          inst.add_row({{cur, -1.0}, {prev, 1.0}, {w, -1.0}}, RowSense::LE, 0.0);
        }
      }
    }
  }
  inst.add_row(std::move(budget), RowSense::LE, 2.0 * config.swap_budget);

  // Period 1: per-snapshot robust rows bounded by u.
  for (int t = 1; t <= config.t1; ++t)
    add_robust_families(inst, assign[t], sets[t - 1], u, idx("t", t));
  // Period 2: the terminal (advisory) assignment reused, bounded by v.
  for (int t = config.t1 + 1; t <= config.t2; ++t)
    add_robust_families(inst, assign[config.t1], sets[t - 1], v, idx("t", t));

  for (int t = 1; t <= config.t1; ++t)
    build_multiphase_constraints(inst, profile, assign[t].v[0], assign[t].v[1],
                                 assign[t].v[2]);
  return inst;
}

}  // namespace

MilpInstance build_lookahead(const LoadProfile& profile,
                             const std::vector<PolyhedralSet>& sets,
                             const LookAheadConfig& config) {
  for (const auto& s : sets) check_polyhedron(s);
  return build_lookahead_impl(profile, sets, config);
}

MilpInstance build_lookahead(const LoadProfile& profile,
                             const std::vector<BoxUncertaintySet>& sets,
                             const LookAheadConfig& config) {
  std::vector<PolyhedralSet> polys;
  polys.reserve(sets.size());
  for (const auto& s : sets) polys.push_back(box_to_polyhedron(s));
  return build_lookahead_impl(profile, polys, config);
}

BalancePlan extract_plan(const MilpInstance& inst, const MilpSolution& solution,
                         const LookAheadConfig& config,
                         const std::vector<std::string>& load_ids) {
  if (!solution.has_incumbent())
    throw std::invalid_argument("extract_plan: solution carries no incumbent");
  const int n = config.initial_assignment.n();

  BalancePlan plan;
  plan.u = solution.value("u");
  plan.v = solution.value("v");
  plan.gap = solution.gap;

  for (int t = 1; t <= config.t1; ++t) {
    PhaseAssignment s;
    s.a.resize(n);
    s.b.resize(n);
    s.c.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int ph = 0; ph < 3; ++ph) {
        const double val = solution.value(var_assign(kPhaseLetters[ph], t, i));
        if (std::abs(val - std::round(val)) > 1e-6)
          throw std::runtime_error("extract_plan: fractional binary " +
                                   var_assign(kPhaseLetters[ph], t, i));
        const auto bit = static_cast<std::uint8_t>(std::round(val));
        if (ph == 0) s.a[i] = bit;
        else if (ph == 1) s.b[i] = bit;
        else s.c[i] = bit;
      }
    }
    plan.assignments.push_back(std::move(s));
  }
  plan.advisory_assignment = plan.assignments.back();

  const PhaseAssignment* prev = &config.initial_assignment;
  for (int t = 1; t <= config.t1; ++t) {
    const PhaseAssignment& cur = plan.assignments[t - 1];
    for (int i = 0; i < n; ++i) {
      if (prev->a[i] == cur.a[i] && prev->b[i] == cur.b[i] && prev->c[i] == cur.c[i])
        continue;
      SwapEvent ev;
      ev.snapshot = t;
      ev.load_id = load_ids.empty() ? "load" + std::to_string(i) : load_ids[i];
      // First phase left and first phase entered; single-phase loads have
      // exactly one of each.
      for (int ph = 0; ph < 3; ++ph) {
        const bool was = ph == 0 ? prev->a[i] : (ph == 1 ? prev->b[i] : prev->c[i]);
        const bool now = ph == 0 ? cur.a[i] : (ph == 1 ? cur.b[i] : cur.c[i]);
        if (was && !now) ev.from = static_cast<Phase>(ph);
        if (!was && now) ev.to = static_cast<Phase>(ph);
      }
      plan.swap_events.push_back(std::move(ev));
    }
    prev = &cur;
  }
  return plan;
}

double robust_imbalance(const PhaseAssignment& assignment,
                        const BoxUncertaintySet& set) {
  const int n = assignment.n();
  if (set.dim() != n)
    throw std::invalid_argument("robust_imbalance: dimension mismatch");
  const auto lo = set.lower();
  const auto up = set.upper();
  double worst = 0.0;
  for (int ph = 0; ph < 3; ++ph) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
      const double bit = ph == 0 ? assignment.a[i]
                        : ph == 1 ? assignment.b[i]
                                  : assignment.c[i];
      x[i] = bit - kThird;
    }
    worst = std::max(worst, box_worst_case(lo, up, x));
    for (double& xi : x) xi = -xi;
    worst = std::max(worst, box_worst_case(lo, up, x));
  }
  return worst;
}

WarmStart frozen_warm_start(const MilpInstance& inst,
                            const std::vector<BoxUncertaintySet>& sets,
                            const LookAheadConfig& config) {
  const int n = config.initial_assignment.n();
  const PhaseAssignment& init = config.initial_assignment;
  std::vector<double> values(inst.n_vars(), 0.0);

  for (int t = 1; t <= config.t1; ++t) {
    for (int i = 0; i < n; ++i) {
      values[inst.require_variable(var_assign('a', t, i))] = init.a[i];
      values[inst.require_variable(var_assign('b', t, i))] = init.b[i];
      values[inst.require_variable(var_assign('c', t, i))] = init.c[i];
    }
  }

  double u = 0.0, v = 0.0;
  for (int t = 1; t <= config.t2; ++t) {
    const auto& box = sets[t - 1];
    const auto lo = box.lower();
    const auto up = box.upper();
    for (int ph = 0; ph < 3; ++ph) {
      const char letter = kPhaseLetters[ph];
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) {
        const double bit = ph == 0 ? init.a[i] : (ph == 1 ? init.b[i] : init.c[i]);
        x[i] = bit - kThird;
      }
      for (int sign = 0; sign < 2; ++sign) {
        const std::string prefix =
            std::string(sign == 0 ? "p" : "q") + letter + idx("t", t);
        // Dual certificate for a box polyhedron [+I; -I]: the positive part
        // of x pairs with upper-bound rows, the negative part with lower.
        double bound = 0.0;
        for (int i = 0; i < n; ++i) {
          const double xp = std::max(x[i], 0.0);
          const double xm = std::max(-x[i], 0.0);
          values[inst.require_variable(prefix + idx("k", i))] = xp;
          values[inst.require_variable(prefix + idx("k", n + i))] = xm;
          bound += up[i] * xp - lo[i] * xm;
        }
        double& target = t <= config.t1 ? u : v;
        target = std::max(target, bound);
        for (double& xi : x) xi = -xi;
      }
    }
  }
  values[inst.require_variable("u")] = u;
  values[inst.require_variable("v")] = v;

  WarmStart ws;
  ws.objective = u + config.lambda * v;
  ws.values = std::move(values);
  return ws;
}

}  // namespace phasebal
