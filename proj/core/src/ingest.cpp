#include "phasebal/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace phasebal {

namespace {

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

// RFC-4180 field splitting for a single record (no embedded newlines).
std::vector<std::string> split_csv(const std::string& line, const std::string& path,
                                   int lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) fail_line(path, lineno, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

double parse_kw(const std::string& s, const std::string& path, int lineno) {
  if (s.empty()) fail_line(path, lineno, "missing kW cell");
  size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail_line(path, lineno, "malformed kW value '" + s + "'");
  }
  if (pos != s.size()) fail_line(path, lineno, "malformed kW value '" + s + "'");
  if (v < 0.0) fail_line(path, lineno, "negative kW value " + s);
  return v;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    out += ch;
  }
  return out + "\"";
}

LoadDataset make_dataset(std::vector<std::vector<double>> demand,
                         std::vector<std::string> ids, std::string note) {
  LoadDataset ds;
  ds.profile = LoadProfile::create(std::move(demand), std::move(ids));
  // Hourly, gap-free data split into 24-snapshot days; shorter series count
  // as a single day.
  ds.snapshots_per_day =
      ds.profile.n_snapshots % 24 == 0 ? 24 : ds.profile.n_snapshots;
  for (int t = 0; t < ds.profile.n_snapshots; t += ds.snapshots_per_day)
    ds.day_boundaries.push_back(t);
  ds.source_note = std::move(note);
  ds.validate();
  return ds;
}

}  // namespace

void LoadDataset::validate() const {
  if (snapshots_per_day < 1)
    throw std::invalid_argument("LoadDataset: snapshots_per_day < 1");
  if (profile.n_snapshots % snapshots_per_day != 0)
    throw std::invalid_argument("LoadDataset: snapshot count not a whole number of days");
  if (static_cast<int>(day_boundaries.size()) != profile.n_snapshots / snapshots_per_day)
    throw std::invalid_argument("LoadDataset: day_boundaries inconsistent");
  for (size_t d = 0; d < day_boundaries.size(); ++d)
    if (day_boundaries[d] != static_cast<int>(d) * snapshots_per_day)
      throw std::invalid_argument("LoadDataset: day_boundaries inconsistent");
}

LoadDataset read_csv(const std::string& path, CsvLayout layout) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);

  std::string line;
  int lineno = 0;
  if (!std::getline(f, line)) fail_line(path, 1, "empty file");
  ++lineno;
  auto header = split_csv(line, path, lineno);

  if (layout == CsvLayout::Wide) {
    size_t first_load = 0;
    if (!header.empty()) {
      std::string h0 = header[0];
      std::transform(h0.begin(), h0.end(), h0.begin(), ::tolower);
      if (h0 == "timestamp" || h0 == "time" || h0 == "t") first_load = 1;
    }
    if (header.size() <= first_load) fail_line(path, lineno, "no load columns");
    std::vector<std::string> ids(header.begin() + first_load, header.end());
    std::vector<std::vector<double>> demand(ids.size());
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto fields = split_csv(line, path, lineno);
      if (fields.size() != header.size())
        fail_line(path, lineno, "ragged row: expected " +
                                    std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
      for (size_t i = 0; i < ids.size(); ++i)
        demand[i].push_back(parse_kw(fields[first_load + i], path, lineno));
    }
    if (demand[0].empty()) fail_line(path, lineno, "no data rows");
    return make_dataset(std::move(demand), std::move(ids), "csv:" + path);
  }

  // Long layout: load_id,timestamp,kw
  if (header.size() != 3 || header[0] != "load_id" || header[1] != "timestamp" ||
      header[2] != "kw")
    fail_line(path, lineno, "long layout requires header load_id,timestamp,kw");
  std::map<std::string, std::map<std::string, double>> cells;  // id -> ts -> kw
  std::vector<std::string> id_order;
  std::vector<std::string> ts_order;  // first-appearance order
  std::map<std::string, int> seen_ts;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv(line, path, lineno);
    if (fields.size() != 3) fail_line(path, lineno, "expected 3 fields");
    const double kw = parse_kw(fields[2], path, lineno);
    if (!cells.count(fields[0])) id_order.push_back(fields[0]);
    auto& row = cells[fields[0]];
    if (!row.emplace(fields[1], kw).second)
      fail_line(path, lineno, "duplicate cell " + fields[0] + "@" + fields[1]);
    if (++seen_ts[fields[1]] == 1) ts_order.push_back(fields[1]);
  }
  if (cells.empty()) fail_line(path, lineno, "no data rows");
  const std::vector<std::string>& timestamps = ts_order;
  for (const auto& ts : timestamps) {
    if (seen_ts[ts] != static_cast<int>(cells.size()))
      throw std::invalid_argument(path + ": timestamp " + ts +
                                  " missing for some loads");
  }
  std::vector<std::vector<double>> demand;
  for (const auto& id : id_order) {
    std::vector<double> series;
    series.reserve(timestamps.size());
    for (const auto& ts : timestamps) series.push_back(cells[id].at(ts));
    demand.push_back(std::move(series));
  }
  return make_dataset(std::move(demand), std::move(id_order), "csv:" + path);
}

void write_csv(const LoadDataset& dataset, const std::string& path, CsvLayout layout) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);
  const LoadProfile& p = dataset.profile;
  char buf[40];
  if (layout == CsvLayout::Wide) {
    for (int i = 0; i < p.n_loads; ++i)
      f << (i ? "," : "") << csv_quote(p.load_ids[i]);
    f << "\n";
    for (int t = 0; t < p.n_snapshots; ++t) {
      for (int i = 0; i < p.n_loads; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.demand[i][t]);
        f << (i ? "," : "") << buf;
      }
      f << "\n";
    }
  } else {
    f << "load_id,timestamp,kw\n";
    for (int i = 0; i < p.n_loads; ++i) {
      for (int t = 0; t < p.n_snapshots; ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.demand[i][t]);
        char ts[16];
        std::snprintf(ts, sizeof(ts), "t%06d", t);
        f << csv_quote(p.load_ids[i]) << "," << ts << "," << buf << "\n";
      }
    }
  }
}

LoadDataset random_scale(const LoadDataset& dataset, std::uint64_t seed,
                         std::pair<double, double> scale_range) {
  const auto [lo, hi] = scale_range;
  if (!(lo > 0.0) || hi < lo)
    throw std::invalid_argument("random_scale: bad scale_range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  LoadDataset out = dataset;
  for (int i = 0; i < out.profile.n_loads; ++i) {
    const double factor = dist(rng);
    for (double& v : out.profile.demand[i]) v *= factor;
  }
  return out;
}

BoxUncertaintySet estimate_box(const LoadDataset& dataset, int hour_of_day) {
  if (hour_of_day < 0 || hour_of_day >= dataset.snapshots_per_day)
    throw std::invalid_argument("estimate_box: hour outside day");
  if (dataset.n_days() < 2)
    throw std::invalid_argument("estimate_box: need at least 2 days of data");
  const LoadProfile& p = dataset.profile;
  std::vector<double> center(p.n_loads, 0.0), half_width(p.n_loads, 0.0);
  for (int i = 0; i < p.n_loads; ++i) {
    for (int d = 0; d < dataset.n_days(); ++d)
      center[i] += p.demand[i][dataset.day_boundaries[d] + hour_of_day];
    center[i] /= dataset.n_days();
    for (int d = 0; d < dataset.n_days(); ++d)
      half_width[i] = std::max(
          half_width[i],
          std::abs(p.demand[i][dataset.day_boundaries[d] + hour_of_day] - center[i]));
  }
  return BoxUncertaintySet::absolute(std::move(center), std::move(half_width));
}

BoxUncertaintySet estimate_box_overall(const LoadDataset& dataset) {
  const LoadProfile& p = dataset.profile;
  std::vector<double> center = p.average_demand();
  std::vector<double> half_width(p.n_loads, 0.0);
  for (int i = 0; i < p.n_loads; ++i)
    for (int t = 0; t < p.n_snapshots; ++t)
      half_width[i] = std::max(half_width[i], std::abs(p.demand[i][t] - center[i]));
  return BoxUncertaintySet::absolute(std::move(center), std::move(half_width));
}

std::vector<BoxUncertaintySet> forecast_box(
    const std::vector<std::vector<double>>& forecast,
    const std::vector<double>& rho_schedule) {
  if (forecast.size() != rho_schedule.size())
    throw std::invalid_argument("forecast_box: schedule length mismatch");
  std::vector<BoxUncertaintySet> sets;
  sets.reserve(forecast.size());
  for (size_t t = 0; t < forecast.size(); ++t) {
    for (double v : forecast[t])
      if (v < 0.0) throw std::invalid_argument("forecast_box: negative forecast");
    sets.push_back(BoxUncertaintySet::relative(forecast[t], rho_schedule[t]));
  }
  return sets;
}

LoadDataset aggregate(const LoadDataset& dataset, int hours_per_snapshot) {
  if (hours_per_snapshot < 1 ||
      dataset.snapshots_per_day % hours_per_snapshot != 0)
    throw std::invalid_argument("aggregate: block must divide the day");
  const LoadProfile& p = dataset.profile;
  const int blocks = p.n_snapshots / hours_per_snapshot;
  std::vector<std::vector<double>> demand(p.n_loads, std::vector<double>(blocks, 0.0));
  for (int i = 0; i < p.n_loads; ++i) {
    for (int bkt = 0; bkt < blocks; ++bkt) {
      double s = 0.0;
      for (int j = 0; j < hours_per_snapshot; ++j)
        s += p.demand[i][bkt * hours_per_snapshot + j];
      demand[i][bkt] = s / hours_per_snapshot;
    }
  }
  LoadDataset out;
  out.profile = LoadProfile::create(std::move(demand), p.load_ids, p.phase_width);
  out.snapshots_per_day = dataset.snapshots_per_day / hours_per_snapshot;
  for (int t = 0; t < out.profile.n_snapshots; t += out.snapshots_per_day)
    out.day_boundaries.push_back(t);
  out.source_note = dataset.source_note + " (aggregated x" +
                    std::to_string(hours_per_snapshot) + ")";
  out.validate();
  return out;
}

std::uint64_t demand_checksum(const LoadProfile& profile) {
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&](const char* s) {
    for (; *s; ++s) {
      hash ^= static_cast<unsigned char>(*s);
      hash *= 1099511628211ull;
    }
  };
  char buf[40];
  for (int i = 0; i < profile.n_loads; ++i)
    for (int t = 0; t < profile.n_snapshots; ++t) {
      std::snprintf(buf, sizeof(buf), "%.17g,", profile.demand[i][t]);
      mix(buf);
    }
  return hash;
}

void write_dataset_sidecar(const LoadDataset& dataset, const std::string& path,
                           std::uint64_t seed, std::pair<double, double> scale_range) {
  nlohmann::json j;
  j["seed"] = seed;
  j["scale_range"] = {scale_range.first, scale_range.second};
  j["source_note"] = dataset.source_note;
  j["checksum"] = demand_checksum(dataset.profile);
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);
  f << j.dump(2) << "\n";
}

}  // namespace phasebal
