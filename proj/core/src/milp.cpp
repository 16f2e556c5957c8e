#include "phasebal/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phasebal {

int MilpInstance::add_variable(std::string name, VarKind kind, double obj,
                               std::string tag) {
  if (name.empty()) throw std::invalid_argument("variable name empty");
  if (index_.count(name))
    throw std::invalid_argument("duplicate variable name: " + name);
  const int idx = static_cast<int>(vars_.size());
  index_.emplace(name, idx);
  if (!tag.empty()) metadata_.emplace(name, std::move(tag));
  vars_.push_back({std::move(name), kind, obj});
  return idx;
}

void MilpInstance::add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs) {
  std::sort(terms.begin(), terms.end(),
            [](const LinearTerm& x, const LinearTerm& y) { return x.var < y.var; });
  std::vector<LinearTerm> merged;
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= n_vars())
      throw std::invalid_argument("row references unknown variable");
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const LinearTerm& t) { return t.coef == 0.0; });
  rows_.push_back({std::move(merged), sense, rhs});
}

std::optional<int> MilpInstance::find_variable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int MilpInstance::require_variable(const std::string& name) const {
  auto idx = find_variable(name);
  if (!idx) throw std::out_of_range("no such variable: " + name);
  return *idx;
}

void MilpInstance::set_tag(const std::string& var_name, std::string tag) {
  if (!index_.count(var_name))
    throw std::out_of_range("no such variable: " + var_name);
  metadata_[var_name] = std::move(tag);
}

double MilpInstance::objective_value(const std::vector<double>& values) const {
  double z = 0.0;
  for (int i = 0; i < n_vars(); ++i) z += vars_[i].obj * values[i];
  return z;
}

double MilpInstance::max_violation(const std::vector<double>& values) const {
  double worst = 0.0;
  for (const auto& row : rows_) {
    double act = 0.0;
    for (const auto& t : row.terms) act += t.coef * values[t.var];
    double viol = 0.0;
    switch (row.sense) {
      case RowSense::LE: viol = act - row.rhs; break;
      case RowSense::GE: viol = row.rhs - act; break;
      case RowSense::EQ: viol = std::abs(act - row.rhs); break;
    }
    worst = std::max(worst, viol);
  }
  for (int i = 0; i < n_vars(); ++i) {
    worst = std::max(worst, -values[i]);
    if (vars_[i].kind == VarKind::Binary) worst = std::max(worst, values[i] - 1.0);
  }
  return worst;
}

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::OptimalWithinGap: return "optimal-within-gap";
    case MilpStatus::GapLimit: return "gap-limit";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::NodeLimit: return "node-limit";
    case MilpStatus::TimeLimit: return "time-limit";
  }
  return "?";
}

bool MilpSolution::has_incumbent() const {
  return status == MilpStatus::OptimalWithinGap || status == MilpStatus::GapLimit ||
         ((status == MilpStatus::NodeLimit || status == MilpStatus::TimeLimit) &&
          !values.empty());
}

double MilpSolution::value(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw std::out_of_range("no value for " + name);
  return it->second;
}

}  // namespace phasebal
