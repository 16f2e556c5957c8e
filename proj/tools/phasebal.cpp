// phasebal: build and solve phase-balancing MILPs over load time series,
// run rolling-horizon simulations, and aggregate the results.

#include <cmath>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasebal/formulation.hpp"
#include "phasebal/ingest.hpp"
#include "phasebal/milp.hpp"
#include "phasebal/mps.hpp"
#include "phasebal/report.hpp"
#include "phasebal/simulate.hpp"
#include "phasebal/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phasebal;

namespace {

constexpr const char* kVersion = "0.1.0";

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel g_log_level = LogLevel::Warn;

void init_log_level() {
  const char* env = std::getenv("PHASEBAL_LOG");
  if (!env) return;
  std::string v(env);
  if (v == "debug")
    g_log_level = LogLevel::Debug;
  else if (v == "info")
    g_log_level = LogLevel::Info;
  else if (v == "warn")
    g_log_level = LogLevel::Warn;
  else if (v == "error")
    g_log_level = LogLevel::Error;
}

void log_at(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  static std::mutex mu;
  if (lvl < g_log_level) return;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "phasebal [" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

void log_info(const std::string& msg) { log_at(LogLevel::Info, msg); }
void log_debug(const std::string& msg) { log_at(LogLevel::Debug, msg); }

struct CommonOpts {
  std::string input;
  std::string out = ".";
  std::string config;
  std::uint64_t seed = 0;
  double gap = 1e-3;
  double time_limit = 0.0;
  int jobs = 1;
};

// CLI11 only honors set_config on the top-level app, so subcommand config
// files are applied by hand after parsing; explicit flags win.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto where = path + ":" + std::to_string(lineno) + ": ";
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(where + "expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw std::runtime_error(where + "unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(val);
    opt->run_callback();
  }
}

void add_common(CLI::App* sub, CommonOpts& o, bool need_input = true) {
  auto* in = sub->add_option("--input", o.input, "input CSV (wide layout)");
  if (need_input) in->required();
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--gap", o.gap, "relative MILP gap tolerance")
      ->capture_default_str();
  sub->add_option("--time-limit", o.time_limit, "solver time limit, seconds")
      ->capture_default_str();
  sub->add_option("--jobs", o.jobs, "parallel sweep cells")
      ->capture_default_str();
  sub->add_option("--config", o.config, "key=value config file (flags win)");
}

MilpConfig solver_config(const CommonOpts& o) {
  MilpConfig cfg;
  cfg.gap_tol = o.gap;
  cfg.time_limit = o.time_limit;
  return cfg;
}

// Sub-tolerance simplex residue reads as noise next to objectives in kW.
double snap_zero(double v) { return std::fabs(v) < 1e-9 ? 0.0 : v; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const CommonOpts& o, std::uint64_t input_checksum,
                    json params) {
  json m;
  m["tool"] = "phasebal";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["input"] = o.input;
  m["input_checksum"] = input_checksum;
  m["seed"] = o.seed;
  m["tolerances"] = {{"gap", o.gap},
                     {"feasibility", 1e-8},
                     {"integrality", 1e-6}};
  m["time_limit"] = o.time_limit;
  m["params"] = std::move(params);
  std::ofstream f(dir / "manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest.json");
  f << m.dump(2) << "\n";
}

PhaseAssignment decode_assignment(const MilpSolution& sol, int n) {
  PhaseAssignment s;
  s.a.resize(n);
  s.b.resize(n);
  s.c.resize(n);
  for (int i = 0; i < n; ++i) {
    s.a[i] = sol.value(var_assign('a', 0, i)) > 0.5;
    s.b[i] = sol.value(var_assign('b', 0, i)) > 0.5;
    s.c[i] = sol.value(var_assign('c', 0, i)) > 0.5;
  }
  return s;
}

std::string assignment_string(const PhaseAssignment& s) {
  std::string out;
  for (int i = 0; i < s.n(); ++i) {
    if (s.width(i) == 1) {
      out += phase_letter(s.phase_of(i));
    } else {
      out += '[';
      if (s.a[i]) out += 'A';
      if (s.b[i]) out += 'B';
      if (s.c[i]) out += 'C';
      out += ']';
    }
  }
  return out;
}

void write_plan_json(const fs::path& path, const MilpSolution& sol,
                     const PhaseAssignment& assignment) {
  json j;
  j["status"] = to_string(sol.status);
  j["objective"] = sol.objective;
  j["bound"] = sol.bound;
  j["gap"] = sol.gap;
  j["assignment"] = assignment_string(assignment);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

int require_solved(const MilpSolution& sol) {
  if (sol.has_incumbent()) return 0;
  std::cerr << "phasebal: no solution (" << to_string(sol.status) << ")\n";
  return 1;
}

std::vector<double> rho_schedule_of(double rho1, double rho2, int t1, int t2) {
  std::vector<double> rho(t2, rho2);
  std::fill(rho.begin(), rho.begin() + t1, rho1);
  return rho;
}

struct LookaheadOpts {
  int t1 = 24;
  int t2 = 48;
  double lambda = 1.0 / 3.0;
  std::vector<int> s = {1};
  double rho1 = 0.10;
  double rho2 = 0.30;
  int start = 0;
};

void add_lookahead(CLI::App* sub, LookaheadOpts& o, bool sweep) {
  sub->add_option("--t1", o.t1, "committed snapshots")->capture_default_str();
  sub->add_option("--t2", o.t2, "horizon length")->capture_default_str();
  sub->add_option("--lambda", o.lambda, "period-2 objective weight")
      ->capture_default_str();
  auto* s_opt = sub->add_option("--s", o.s, "swap budget per horizon");
  if (!sweep) s_opt->expected(1);
  s_opt->capture_default_str();
  sub->add_option("--rho1", o.rho1, "relative box width, period 1")
      ->capture_default_str();
  sub->add_option("--rho2", o.rho2, "relative box width, period 2")
      ->capture_default_str();
  sub->add_option("--start", o.start, "first snapshot index")
      ->capture_default_str();
}

LookAheadConfig lookahead_config(const LookaheadOpts& o, int n_loads, int s) {
  LookAheadConfig cfg;
  cfg.t1 = o.t1;
  cfg.t2 = o.t2;
  cfg.lambda = o.lambda;
  cfg.swap_budget = s;
  cfg.initial_assignment = PhaseAssignment::round_robin(n_loads);
  return cfg;
}

std::vector<BoxUncertaintySet> forecast_from_dataset(const LoadDataset& data,
                                                     const LookaheadOpts& o) {
  if (o.start + o.t2 > data.profile.n_snapshots)
    throw std::runtime_error("dataset too short for the requested horizon");
  std::vector<std::vector<double>> forecast;
  for (int t = 0; t < o.t2; ++t)
    forecast.push_back(data.profile.snapshot(o.start + t));
  return forecast_box(forecast, rho_schedule_of(o.rho1, o.rho2, o.t1, o.t2));
}

int cmd_balance(const CommonOpts& common, const std::string& objective) {
  LoadDataset data = read_csv(common.input, CsvLayout::Wide);
  const ImbalanceObjective obj = objective == "pairwise"
                                     ? ImbalanceObjective::MaxPairwise
                                     : ImbalanceObjective::MaxSinglePhase;
  const std::vector<double> d = data.profile.average_demand();
  const MilpInstance inst = build_deterministic(data.profile, d, obj);
  const MilpSolution sol = solve_milp(inst, solver_config(common));
  if (int rc = require_solved(sol)) return rc;
  std::printf("u = %g\n", snap_zero(sol.objective));
  fs::create_directories(common.out);
  write_plan_json(fs::path(common.out) / "plan.json", sol,
                  decode_assignment(sol, data.profile.n_loads));
  write_manifest(common.out, "balance", common, demand_checksum(data.profile),
                 {{"objective", objective}});
  return 0;
}

int cmd_robust(const CommonOpts& common, double rho) {
  LoadDataset data = read_csv(common.input, CsvLayout::Wide);
  BoxUncertaintySet box =
      rho >= 0.0 ? BoxUncertaintySet::relative(data.profile.average_demand(), rho)
                 : estimate_box_overall(data);
  const MilpInstance inst = build_robust(data.profile, box);
  const MilpSolution sol = solve_milp(inst, solver_config(common));
  if (int rc = require_solved(sol)) return rc;
  std::printf("u = %g\n", snap_zero(sol.objective));
  fs::create_directories(common.out);
  write_plan_json(fs::path(common.out) / "plan.json", sol,
                  decode_assignment(sol, data.profile.n_loads));
  write_manifest(common.out, "robust", common, demand_checksum(data.profile),
                 {{"rho", rho}});
  return 0;
}

int cmd_lookahead(const CommonOpts& common, const LookaheadOpts& la) {
  LoadDataset data = read_csv(common.input, CsvLayout::Wide);
  const auto boxes = forecast_from_dataset(data, la);
  const LookAheadConfig cfg = lookahead_config(la, data.profile.n_loads, la.s[0]);
  const MilpInstance inst = build_lookahead(data.profile, boxes, cfg);
  MilpConfig solver = solver_config(common);
  solver.warm_start = frozen_warm_start(inst, boxes, cfg);
  const MilpSolution sol = solve_milp(inst, solver);
  if (int rc = require_solved(sol)) return rc;
  BalancePlan plan = extract_plan(inst, sol, cfg, data.profile.load_ids);
  plan.validate(cfg);
  std::printf("u = %g  v = %g  swaps = %zu\n", snap_zero(plan.u), snap_zero(plan.v),
              plan.swap_events.size());

  fs::create_directories(common.out);
  json j;
  j["status"] = to_string(sol.status);
  j["u"] = plan.u;
  j["v"] = plan.v;
  j["gap"] = plan.gap;
  j["advisory_assignment"] = assignment_string(plan.advisory_assignment);
  json assigns = json::array();
  for (const auto& a : plan.assignments) assigns.push_back(assignment_string(a));
  j["assignments"] = assigns;
  json swaps = json::array();
  for (const auto& ev : plan.swap_events)
    swaps.push_back({{"snapshot", ev.snapshot},
                     {"load_id", ev.load_id},
                     {"from", std::string(1, phase_letter(ev.from))},
                     {"to", std::string(1, phase_letter(ev.to))}});
  j["swap_events"] = swaps;
  std::ofstream f(fs::path(common.out) / "plan.json");
  if (!f) throw std::runtime_error("cannot write plan.json");
  f << j.dump(2) << "\n";
  write_manifest(common.out, "lookahead", common, demand_checksum(data.profile),
                 {{"t1", la.t1},
                  {"t2", la.t2},
                  {"lambda", la.lambda},
                  {"s", la.s[0]},
                  {"rho1", la.rho1},
                  {"rho2", la.rho2},
                  {"start", la.start}});
  return 0;
}

struct SimulateOpts {
  int epochs = 0;     // 0 = as many as the dataset allows
  int stride = 0;     // 0 = t1
  int aggregate = 1;  // hours per snapshot
  std::string label;  // summary row label; default r-LAPB(s)
};

int simulate_one(const LoadDataset& data, const CommonOpts& common,
                 const LookaheadOpts& la, const SimulateOpts& so, int s,
                 const fs::path& out_dir) {
  RollingConfig cfg;
  cfg.lookahead = lookahead_config(la, data.profile.n_loads, s);
  cfg.rho_schedule = rho_schedule_of(la.rho1, la.rho2, la.t1, la.t2);
  cfg.solver = solver_config(common);
  cfg.stride = so.stride;

  const int stride = so.stride > 0 ? so.stride : la.t1;
  int epochs = so.epochs;
  if (epochs <= 0)
    epochs = (data.profile.n_snapshots - la.start - (la.t1 - stride)) / stride;
  if (epochs <= 0) throw std::runtime_error("dataset too short to simulate");

  SimulationRun run = run_rolling(data, persistence_forecaster(data), cfg,
                                  epochs, la.start);
  run.validate();
  // Wall-clock timings stay in the log so artifacts are bit-reproducible.
  for (auto& e : run.epochs) {
    log_info("epoch " + std::to_string(e.epoch) + ": u=" + fmt(e.plan.u) +
             " wall=" + fmt(e.wall_seconds) + "s");
    e.wall_seconds = 0.0;
  }

  fs::create_directories(out_dir);
  write_run_json(run, (out_dir / "run.json").string());
  write_metrics_csv(run, (out_dir / "metrics.csv").string());
  const std::string label =
      so.label.empty() ? "r-LAPB(" + std::to_string(s) + ")" : so.label;
  write_summary_csv({summarize_run(label, run)},
                    (out_dir / "summary.csv").string());
  write_summary_json({summarize_run(label, run)},
                     (out_dir / "summary.json").string());
  write_swap_histogram_csv(swap_histogram(run, data.profile.load_ids),
                           (out_dir / "swaps.csv").string());
  std::printf("s = %d  total swaps = %d  epochs = %zu\n", s, run.total_swaps,
              run.epochs.size());
  return 0;
}

int cmd_simulate(const CommonOpts& common, const LookaheadOpts& la,
                 const SimulateOpts& so) {
  LoadDataset data = read_csv(common.input, CsvLayout::Wide);
  if (so.aggregate > 1) data = aggregate(data, so.aggregate);

  fs::create_directories(common.out);
  std::vector<int> sweep = la.s;
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());

  if (sweep.size() == 1) {
    if (int rc = simulate_one(data, common, la, so, sweep[0], common.out))
      return rc;
  } else {
    std::vector<std::thread> pool;
    std::vector<int> results(sweep.size(), 0);
    std::atomic<size_t> next{0};
    const int jobs = std::max(1, std::min<int>(common.jobs, sweep.size()));
    auto worker = [&] {
      for (size_t i = next++; i < sweep.size(); i = next++) {
        try {
          fs::path dir = fs::path(common.out) / ("s" + std::to_string(sweep[i]));
          results[i] = simulate_one(data, common, la, so, sweep[i], dir);
        } catch (const std::exception& ex) {
          log_at(LogLevel::Error, ex.what());
          results[i] = 1;
        }
      }
    };
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (int rc : results)
      if (rc) return rc;
    std::vector<MethodSummary> merged;
    for (int s : sweep) {
      fs::path dir = fs::path(common.out) / ("s" + std::to_string(s));
      auto rows = read_summary_csv((dir / "summary.csv").string());
      merged.insert(merged.end(), rows.begin(), rows.end());
    }
    write_summary_csv(merged, (fs::path(common.out) / "summary.csv").string());
  }
  json s_json = sweep;
  write_manifest(common.out, "simulate", common, demand_checksum(data.profile),
                 {{"t1", la.t1},
                  {"t2", la.t2},
                  {"lambda", la.lambda},
                  {"s", s_json},
                  {"rho1", la.rho1},
                  {"rho2", la.rho2},
                  {"start", la.start},
                  {"epochs", so.epochs},
                  {"stride", so.stride},
                  {"aggregate", so.aggregate}});
  return 0;
}

int cmd_export_mps(const CommonOpts& common, const LookaheadOpts& la,
                   const std::string& model, const std::string& mps_path) {
  LoadDataset data = read_csv(common.input, CsvLayout::Wide);
  MilpInstance inst;
  if (model == "balance") {
    inst = build_deterministic(data.profile, data.profile.average_demand(),
                               ImbalanceObjective::MaxSinglePhase);
  } else if (model == "robust") {
    inst = build_robust(data.profile,
                        BoxUncertaintySet::relative(
                            data.profile.average_demand(), la.rho1));
  } else {
    inst = build_lookahead(data.profile, forecast_from_dataset(data, la),
                           lookahead_config(la, data.profile.n_loads, la.s[0]));
  }
  fs::path path = mps_path.empty() ? fs::path(common.out) / "model.mps"
                                   : fs::path(mps_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_mps_file(inst, path.string());
  std::printf("wrote %s (%d vars, %d rows)\n", path.string().c_str(),
              inst.n_vars(), inst.n_rows());
  fs::create_directories(common.out);
  write_manifest(common.out, "export-mps", common, demand_checksum(data.profile),
                 {{"model", model}, {"mps", path.string()}});
  return 0;
}

std::vector<SnapshotMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<SnapshotMetrics> out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,snapshot,omega", 0) != 0)
    throw std::runtime_error(path + ": not a metrics CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 7) throw std::runtime_error(path + ": malformed row");
    SnapshotMetrics m;
    m.omega = std::stod(fields[2]);
    m.nu = std::stod(fields[3]);
    if (fields[4].empty()) {
      m.upsilon_defined = false;
    } else {
      m.upsilon = std::stod(fields[4]);
    }
    out.push_back(m);
  }
  return out;
}

int cmd_report(const std::vector<std::string>& inputs,
               const std::vector<std::string>& labels, const std::string& out) {
  if (!labels.empty() && labels.size() != inputs.size())
    throw std::runtime_error("--label count must match --input count");
  std::vector<MethodSummary> summaries;
  std::vector<std::string> names;
  std::vector<std::vector<double>> curves;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const auto metrics = read_metrics_csv(inputs[i]);
    const std::string label =
        i < labels.size() ? labels[i] : fs::path(inputs[i]).stem().string();
    summaries.push_back(summarize(label, metrics, {0.0}));
    names.push_back(label);
    curves.push_back(sorted_curve(metrics));
  }
  fs::create_directories(out);
  write_summary_csv(summaries, (fs::path(out) / "summary.csv").string());
  write_summary_json(summaries, (fs::path(out) / "summary.json").string());
  write_sorted_curves_csv(names, curves,
                          (fs::path(out) / "sorted_omega.csv").string());
  for (const auto& s : summaries)
    std::printf("%s: omega avg %.2f max %.2f  nu avg %.2f\n", s.method.c_str(),
                s.omega.avg, s.omega.max, s.nu.avg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"phase balancing under demand uncertainty"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOpts c_bal, c_rob, c_la, c_sim, c_mps;
  std::string objective = "single-phase";
  double rob_rho = -1.0;
  LookaheadOpts la_la, la_sim, la_mps;
  SimulateOpts sim;
  std::string mps_model = "lookahead", mps_path;
  std::vector<std::string> rep_inputs, rep_labels;
  std::string rep_out = ".";

  auto* bal = app.add_subcommand("balance", "deterministic single-snapshot MILP");
  add_common(bal, c_bal);
  bal->add_option("--objective", objective, "single-phase | pairwise")
      ->check(CLI::IsMember({"single-phase", "pairwise"}))
      ->capture_default_str();

  auto* rob = app.add_subcommand("robust", "box-robust single-snapshot MILP");
  add_common(rob, c_rob);
  rob->add_option("--rho", rob_rho,
                  "relative box width (default: estimate from history)");

  auto* la = app.add_subcommand("lookahead", "two-period robust look-ahead MILP");
  add_common(la, c_la);
  add_lookahead(la, la_la, /*sweep=*/false);

  auto* simc = app.add_subcommand("simulate", "rolling-horizon operation loop");
  add_common(simc, c_sim);
  add_lookahead(simc, la_sim, /*sweep=*/true);
  simc->add_option("--epochs", sim.epochs, "epoch count (0 = fill the data)")
      ->capture_default_str();
  simc->add_option("--stride", sim.stride, "snapshots implemented per epoch")
      ->capture_default_str();
  simc->add_option("--aggregate", sim.aggregate, "hours per snapshot")
      ->capture_default_str();
  simc->add_option("--label", sim.label, "summary row label");

  auto* mps = app.add_subcommand("export-mps", "write the model as an MPS file");
  add_common(mps, c_mps);
  add_lookahead(mps, la_mps, /*sweep=*/false);
  mps->add_option("--model", mps_model, "balance | robust | lookahead")
      ->check(CLI::IsMember({"balance", "robust", "lookahead"}))
      ->capture_default_str();
  mps->add_option("--mps", mps_path, "output path (.mps or .mps.gz)");

  auto* rep = app.add_subcommand("report", "summarize metrics CSVs");
  rep->add_option("--input", rep_inputs, "metrics.csv files")->required();
  rep->add_option("--label", rep_labels, "method labels, one per input");
  rep->add_option("--out", rep_out, "output directory")->capture_default_str();
  std::string rep_config;
  rep->add_option("--config", rep_config, "key=value config file (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (bal->parsed()) {
      apply_config(bal, c_bal.config);
      return cmd_balance(c_bal, objective);
    }
    if (rob->parsed()) {
      apply_config(rob, c_rob.config);
      return cmd_robust(c_rob, rob_rho);
    }
    if (la->parsed()) {
      apply_config(la, c_la.config);
      return cmd_lookahead(c_la, la_la);
    }
    if (simc->parsed()) {
      apply_config(simc, c_sim.config);
      return cmd_simulate(c_sim, la_sim, sim);
    }
    if (mps->parsed()) {
      apply_config(mps, c_mps.config);
      return cmd_export_mps(c_mps, la_mps, mps_model, mps_path);
    }
    if (rep->parsed()) {
      apply_config(rep, rep_config);
      return cmd_report(rep_inputs, rep_labels, rep_out);
    }
  } catch (const std::exception& ex) {
    std::cerr << "phasebal: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
