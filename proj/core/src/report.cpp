#include "phasebal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace phasebal {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.max = std::max(s.max, x);
  }
  s.avg = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.avg) * (x - s.avg);
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

MethodSummary summarize(const std::string& method,
                        const std::vector<SnapshotMetrics>& metrics,
                        const std::vector<double>& runtimes) {
  if (metrics.empty()) throw std::invalid_argument("summarize: empty metrics");
  MethodSummary s;
  s.method = method;
  std::vector<double> omega, nu, upsilon;
  omega.reserve(metrics.size());
  nu.reserve(metrics.size());
  for (const auto& m : metrics) {
    omega.push_back(m.omega);
    nu.push_back(m.nu);
    if (m.upsilon_defined) upsilon.push_back(100.0 * m.upsilon);
  }
  s.omega = stats_of(omega);
  s.nu = stats_of(nu);
  s.upsilon = stats_of(upsilon);
  s.runtime = stats_of(runtimes);
  return s;
}

MethodSummary summarize_run(const std::string& method, const SimulationRun& run) {
  std::vector<SnapshotMetrics> metrics;
  std::vector<double> runtimes;
  for (const auto& e : run.epochs) {
    metrics.insert(metrics.end(), e.realized_metrics.begin(),
                   e.realized_metrics.end());
    runtimes.push_back(e.wall_seconds);
  }
  return summarize(method, metrics, runtimes);
}

std::vector<double> sorted_curve(const std::vector<SnapshotMetrics>& metrics) {
  if (metrics.empty()) throw std::invalid_argument("sorted_curve: empty metrics");
  std::vector<double> curve;
  curve.reserve(metrics.size());
  for (const auto& m : metrics) curve.push_back(m.omega);
  std::stable_sort(curve.begin(), curve.end(), std::greater<double>());
  return curve;
}

std::map<std::string, int> swap_histogram(
    const SimulationRun& run, const std::vector<std::string>& load_ids) {
  if (run.epochs.empty())
    throw std::invalid_argument("swap_histogram: empty run");
  std::map<std::string, int> counts;
  for (const auto& id : load_ids) counts[id] = 0;
  for (const auto& e : run.epochs) {
    const int implemented = static_cast<int>(e.realized_metrics.size());
    for (const auto& ev : e.plan.swap_events) {
      if (ev.snapshot > implemented) continue;  // advisory, never executed
      ++counts[ev.load_id];
    }
  }
  return counts;
}

void write_summary_csv(const std::vector<MethodSummary>& summaries,
                       const std::string& path) {
  auto out = open_out(path);
  out << "# std = population standard deviation\n";
  out << "method,metric,max,avg,std\n";
  for (const auto& s : summaries) {
    const std::pair<const char*, const MetricStats*> rows[] = {
        {"omega_kw", &s.omega},
        {"nu_kw", &s.nu},
        {"upsilon_pct", &s.upsilon},
        {"runtime_s", &s.runtime}};
    for (const auto& [name, st] : rows)
      out << s.method << ',' << name << ',' << fmt(st->max) << ','
          << fmt(st->avg) << ',' << fmt(st->std) << '\n';
  }
}

std::vector<MethodSummary> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<MethodSummary> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("method,", 0) == 0)
      continue;
    std::stringstream ss(line);
    std::string method, metric, maxs, avgs, stds;
    if (!std::getline(ss, method, ',') || !std::getline(ss, metric, ',') ||
        !std::getline(ss, maxs, ',') || !std::getline(ss, avgs, ',') ||
        !std::getline(ss, stds, ','))
      throw std::runtime_error(path + ": malformed summary row");
    if (out.empty() || out.back().method != method) {
      out.emplace_back();
      out.back().method = method;
    }
    MetricStats st{std::stod(maxs), std::stod(avgs), std::stod(stds)};
    auto& s = out.back();
    if (metric == "omega_kw")
      s.omega = st;
    else if (metric == "nu_kw")
      s.nu = st;
    else if (metric == "upsilon_pct")
      s.upsilon = st;
    else if (metric == "runtime_s")
      s.runtime = st;
    else
      throw std::runtime_error(path + ": unknown metric " + metric);
  }
  return out;
}

void write_summary_json(const std::vector<MethodSummary>& summaries,
                        const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : summaries) {
    auto stats = [](const MetricStats& st) {
      return nlohmann::json{{"max", st.max}, {"avg", st.avg}, {"std", st.std}};
    };
    doc.push_back({{"method", s.method},
                   {"omega_kw", stats(s.omega)},
                   {"nu_kw", stats(s.nu)},
                   {"upsilon_pct", stats(s.upsilon)},
                   {"runtime_s", stats(s.runtime)}});
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_sorted_curves_csv(const std::vector<std::string>& labels,
                             const std::vector<std::vector<double>>& curves,
                             const std::string& path) {
  if (labels.size() != curves.size())
    throw std::invalid_argument("write_sorted_curves_csv: label/curve mismatch");
  auto out = open_out(path);
  out << "rank";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  size_t rows = 0;
  for (const auto& c : curves) rows = std::max(rows, c.size());
  for (size_t r = 0; r < rows; ++r) {
    out << (r + 1);
    for (const auto& c : curves) {
      out << ',';
      if (r < c.size()) out << fmt(c[r]);
    }
    out << '\n';
  }
}

void write_swap_histogram_csv(const std::map<std::string, int>& counts,
                              const std::string& path) {
  auto out = open_out(path);
  out << "load_id,swaps\n";
  for (const auto& [id, c] : counts) out << id << ',' << c << '\n';
}

}  // namespace phasebal
