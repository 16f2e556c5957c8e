#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace phasebal {

enum class VarKind { Continuous, Binary };  // continuous vars are >= 0
enum class RowSense { LE, EQ, GE };

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
  bool operator==(const LinearTerm&) const = default;
};

struct MilpRow {
  std::vector<LinearTerm> terms;  // sorted by var index, coalesced
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  bool operator==(const MilpRow&) const = default;
};

struct MilpVariable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double obj = 0.0;
  bool operator==(const MilpVariable&) const = default;
};

/// Standard-form minimization MILP: continuous vars >= 0, binaries in {0,1}.
class MilpInstance {
 public:
  int add_variable(std::string name, VarKind kind, double obj = 0.0,
                   std::string tag = {});
  void add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs);

  int n_vars() const { return static_cast<int>(vars_.size()); }
  int n_rows() const { return static_cast<int>(rows_.size()); }
  const MilpVariable& variable(int i) const { return vars_[i]; }
  const MilpRow& row(int i) const { return rows_[i]; }
  const std::vector<MilpVariable>& variables() const { return vars_; }
  const std::vector<MilpRow>& rows() const { return rows_; }

  std::optional<int> find_variable(const std::string& name) const;
  int require_variable(const std::string& name) const;

  void set_tag(const std::string& var_name, std::string tag);
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  double objective_value(const std::vector<double>& values) const;
  /// Max absolute constraint violation of a full value vector.
  double max_violation(const std::vector<double>& values) const;

  bool operator==(const MilpInstance& o) const {
    return vars_ == o.vars_ && rows_ == o.rows_ && metadata_ == o.metadata_;
  }

 private:
  std::vector<MilpVariable> vars_;
  std::vector<MilpRow> rows_;
  std::unordered_map<std::string, int> index_;
  std::map<std::string, std::string> metadata_;  // var name -> semantic tag
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Stalled };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;  // full length n_vars when Optimal
  long iterations = 0;
  bool bland_engaged = false;
};

/// Bound override for one variable (used for branching fixings).
struct VarBound {
  int var = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Primal simplex on the integrality-relaxed instance. Two-phase, Dantzig
/// pricing with Bland's rule engaged after 50 pivots without improvement.
LpResult solve_lp(const MilpInstance& inst, const std::vector<VarBound>& fixings = {});

enum class MilpStatus {
  OptimalWithinGap,  // tree exhausted, optimality proved
  GapLimit,          // stopped early with gap <= gap_tol
  Infeasible,
  Unbounded,
  NodeLimit,
  TimeLimit,
};

const char* to_string(MilpStatus s);

struct WarmStart {
  double objective = 0.0;
  std::vector<double> values;  // full length n_vars, feasible
};

struct MilpConfig {
  double gap_tol = 1e-3;  // relative optimality gap
  long node_limit = 0;    // 0 = unlimited
  double time_limit = 0;  // seconds, 0 = unlimited
  std::optional<WarmStart> warm_start;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  double objective = 0.0;
  double bound = 0.0;
  std::map<std::string, double> values;  // binaries reported rounded
  double gap = 0.0;                      // (incumbent - bound) / max(|incumbent|, eps)
  long node_count = 0;
  double solve_seconds = 0.0;

  bool has_incumbent() const;
  double value(const std::string& name) const;
};

/// Depth-first branch-and-bound over the binary variables, branching on the
/// heaviest fractional column (ties to the lowest index). Deterministic.
MilpSolution solve_milp(const MilpInstance& inst, const MilpConfig& config = {});

}  // namespace phasebal
