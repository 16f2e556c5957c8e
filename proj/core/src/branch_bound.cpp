#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "phasebal/milp.hpp"

namespace phasebal {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kFeasTol = 1e-8;
constexpr double kGapEps = 1e-6;  // denominator floor in the relative gap

struct Node {
  long id = 0;
  int parent = -1;     // index into the node pool, -1 for root
  int branch_var = -1; // variable fixed when descending from the parent
  double branch_val = 0.0;
  double bound = 0.0;  // parent LP objective (lower bound for minimization)
};

double relative_gap(double incumbent, double bound) {
  return (incumbent - bound) / std::max(std::abs(incumbent), kGapEps);
}

}  // namespace

MilpSolution solve_milp(const MilpInstance& inst, const MilpConfig& config) {
  if (inst.n_vars() == 0) throw std::invalid_argument("solve_milp: empty instance");
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  std::vector<int> binaries;
  for (int i = 0; i < inst.n_vars(); ++i)
    if (inst.variable(i).kind == VarKind::Binary) binaries.push_back(i);

  // Column weight (total constraint coefficient mass) per variable. Branching
  // on the heaviest fractional binary settles the decisions with the most
  // leverage first -- for balance models that is the largest load -- which
  // tightens node relaxations far earlier than most-fractional selection.
  std::vector<double> col_weight(inst.n_vars(), 0.0);
  for (int r = 0; r < inst.n_rows(); ++r)
    for (const auto& t : inst.row(r).terms) col_weight[t.var] += std::abs(t.coef);

  MilpSolution sol;

  bool have_incumbent = false;
  double inc_obj = 0.0;
  std::vector<double> inc_values;
  if (config.warm_start) {
    const auto& ws = config.warm_start.value();
    if (static_cast<int>(ws.values.size()) != inst.n_vars())
      throw std::invalid_argument("solve_milp: warm start has wrong length");
    if (inst.max_violation(ws.values) > 1e-6)
      throw std::invalid_argument("solve_milp: warm start violates constraints");
    have_incumbent = true;
    inc_values = ws.values;
    inc_obj = inst.objective_value(ws.values);
  }

  // Depth-first search over a LIFO stack. Balance relaxations bound at (near)
  // zero across wide bands of the tree, so best-bound order degenerates into
  // breadth-first search that reaches no integral leaf for a very long time;
  // depth-first completes every dive and produces incumbents within one
  // tree-depth of nodes. The certified global bound is the smallest bound
  // among open nodes, tracked in a multiset alongside the stack.
  std::vector<Node> pool;
  pool.push_back({0, -1, -1, 0.0, -std::numeric_limits<double>::infinity()});
  std::vector<int> open{0};
  std::multiset<double> open_bounds{pool[0].bound};

  long next_id = 1;
  long nodes_processed = 0;
  double global_bound = -std::numeric_limits<double>::infinity();
  MilpStatus final_status = MilpStatus::Infeasible;
  bool decided = false;

  std::vector<VarBound> fixings;
  while (!open.empty()) {
    // The best open bound, together with the incumbent, drives termination.
    const int node_idx = open.back();
    global_bound = *open_bounds.begin();
    if (have_incumbent) {
      // Open nodes at or above the incumbent are prunable, so the certified
      // bound never exceeds the incumbent.
      global_bound = std::min(global_bound, inc_obj);
      if (relative_gap(inc_obj, global_bound) <= config.gap_tol) {
        final_status = MilpStatus::GapLimit;
        decided = true;
        break;
      }
    }
    if (config.node_limit > 0 && nodes_processed >= config.node_limit) {
      final_status = MilpStatus::NodeLimit;
      decided = true;
      break;
    }
    if (config.time_limit > 0 && elapsed() >= config.time_limit) {
      final_status = MilpStatus::TimeLimit;
      decided = true;
      break;
    }
    open.pop_back();
    open_bounds.erase(open_bounds.find(pool[node_idx].bound));

    if (have_incumbent && pool[node_idx].bound >= inc_obj - 1e-12) continue;

    fixings.clear();
    for (int cur = node_idx; cur >= 0; cur = pool[cur].parent) {
      if (pool[cur].branch_var >= 0)
        fixings.push_back(
            {pool[cur].branch_var, pool[cur].branch_val, pool[cur].branch_val});
    }

    const LpResult lp = solve_lp(inst, fixings);
    ++nodes_processed;
    if (lp.status == LpStatus::Stalled)
      throw std::runtime_error("solve_milp: simplex stalled (singular basis?)");
    if (lp.status == LpStatus::Infeasible) continue;
    if (lp.status == LpStatus::Unbounded) {
      if (pool[node_idx].parent == -1) {
        final_status = MilpStatus::Unbounded;
        decided = true;
        break;
      }
      // An unbounded node with a bounded root relaxation cannot happen for
      // our instances; treat it as unprunable and keep searching.
      throw std::runtime_error("solve_milp: unbounded node relaxation");
    }

    if (have_incumbent && lp.objective >= inc_obj - 1e-12) continue;

    // Heaviest fractional binary, ties to the lowest variable index.
    int branch = -1;
    double best_w = -1.0;
    for (int v : binaries) {
      const double x = lp.values[v];
      const double frac = std::min(x - std::floor(x), std::ceil(x) - x);
      if (frac > kIntTol && col_weight[v] > best_w + 1e-12) {
        best_w = col_weight[v];
        branch = v;
      }
    }

    if (branch < 0) {
      // Integral: new incumbent.
      if (!have_incumbent || lp.objective < inc_obj - 1e-12) {
        have_incumbent = true;
        inc_obj = lp.objective;
        inc_values = lp.values;
      }
      continue;
    }

    // Push the rounded-away value first so the dive follows the relaxation.
    const double toward = std::round(lp.values[branch]);
    for (double val : {1.0 - toward, toward}) {
      pool.push_back({next_id++, node_idx, branch, val, lp.objective});
      open.push_back(static_cast<int>(pool.size()) - 1);
      open_bounds.insert(lp.objective);
    }
  }

  if (!decided) {
    // Tree exhausted: optimality proved (or infeasibility if no incumbent).
    global_bound = have_incumbent ? inc_obj : global_bound;
    final_status = have_incumbent ? MilpStatus::OptimalWithinGap : MilpStatus::Infeasible;
  }

  sol.status = final_status;
  sol.node_count = nodes_processed;
  sol.solve_seconds = elapsed();
  if (have_incumbent &&
      (final_status == MilpStatus::OptimalWithinGap ||
       final_status == MilpStatus::GapLimit || final_status == MilpStatus::NodeLimit ||
       final_status == MilpStatus::TimeLimit)) {
    sol.objective = inc_obj;
    sol.bound = global_bound;
    sol.gap = std::max(0.0, relative_gap(inc_obj, global_bound));
    if (inst.max_violation(inc_values) > kFeasTol * 10)
      throw std::runtime_error("solve_milp: incumbent violates constraints");
    for (int i = 0; i < inst.n_vars(); ++i) {
      double v = inc_values[i];
      if (inst.variable(i).kind == VarKind::Binary) v = std::round(v);
      sol.values.emplace(inst.variable(i).name, v);
    }
  }
  return sol;
}

}  // namespace phasebal
