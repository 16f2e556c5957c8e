#include "phasebal/mps.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace phasebal {

namespace {

std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool name_fits(const std::string& name) {
  if (name.empty() || name.size() > 8) return false;
  for (char ch : name)
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '\'') return false;
  return true;
}

std::string pad(const std::string& s, size_t width) {
  if (s.size() >= width) return s + " ";
  return s + std::string(width - s.size(), ' ');
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

double parse_value(const std::string& s) {
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("MPS: bad numeric field " + s);
  return v;
}

}  // namespace

MpsDocument export_mps(const MilpInstance& inst, const std::string& model_name) {
  MpsDocument doc;
  doc.tags = inst.metadata();

  // Deterministic short names for variables that overflow the field width.
  std::set<std::string> taken;
  for (int i = 0; i < inst.n_vars(); ++i) {
    const std::string& name = inst.variable(i).name;
    if (name_fits(name)) taken.insert(name);
  }
  std::vector<std::string> vname(inst.n_vars());
  int serial = 0;
  for (int i = 0; i < inst.n_vars(); ++i) {
    const std::string& name = inst.variable(i).name;
    if (name_fits(name) && name != "OBJ") {
      vname[i] = name;
      continue;
    }
    char buf[16];
    do {
      std::snprintf(buf, sizeof(buf), "X%07d", serial++);
    } while (taken.count(buf));
    vname[i] = buf;
    taken.insert(buf);
    doc.name_map.emplace(buf, name);
  }
  std::vector<std::string> rname(inst.n_rows());
  for (int r = 0; r < inst.n_rows(); ++r) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "R%07d", r);
    rname[r] = buf;
  }

  std::ostringstream out;
  out << "NAME          " << model_name << "\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  for (int r = 0; r < inst.n_rows(); ++r) {
    char sense = 'L';
    switch (inst.row(r).sense) {
      case RowSense::LE: sense = 'L'; break;
      case RowSense::EQ: sense = 'E'; break;
      case RowSense::GE: sense = 'G'; break;
    }
    out << " " << sense << "  " << rname[r] << "\n";
  }

  // Column-major view.
  std::vector<std::vector<std::pair<int, double>>> cols(inst.n_vars());
  for (int r = 0; r < inst.n_rows(); ++r)
    for (const auto& t : inst.row(r).terms) cols[t.var].emplace_back(r, t.coef);

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int i = 0; i < inst.n_vars(); ++i) {
    const bool want_int = inst.variable(i).kind == VarKind::Binary;
    if (want_int != in_int) {
      char mbuf[16];
      std::snprintf(mbuf, sizeof(mbuf), "M%07d", marker++);
      out << "    " << pad(mbuf, 10) << pad("'MARKER'", 25)
          << (want_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = want_int;
    }
    // The objective entry is always emitted so empty columns survive.
    out << "    " << pad(vname[i], 10) << pad("OBJ", 10)
        << fmt_value(inst.variable(i).obj) << "\n";
    for (const auto& [r, coef] : cols[i])
      out << "    " << pad(vname[i], 10) << pad(rname[r], 10) << fmt_value(coef)
          << "\n";
  }
  if (in_int) {
    char mbuf[16];
    std::snprintf(mbuf, sizeof(mbuf), "M%07d", marker++);
    out << "    " << pad(mbuf, 10) << pad("'MARKER'", 25) << "'INTEND'\n";
  }

  out << "RHS\n";
  for (int r = 0; r < inst.n_rows(); ++r)
    if (inst.row(r).rhs != 0.0)
      out << "    " << pad("RHS", 10) << pad(rname[r], 10)
          << fmt_value(inst.row(r).rhs) << "\n";

  out << "BOUNDS\n";
  for (int i = 0; i < inst.n_vars(); ++i)
    if (inst.variable(i).kind == VarKind::Binary)
      out << " BV " << pad("BND", 10) << vname[i] << "\n";
  out << "ENDATA\n";

  doc.text = out.str();
  return doc;
}

MilpInstance parse_mps(const std::string& text,
                       const std::map<std::string, std::string>& name_map,
                       const std::map<std::string, std::string>& tags) {
  enum class Section { None, Rows, Columns, Rhs, Bounds, Done };
  Section section = Section::None;

  struct RowInfo {
    RowSense sense;
    double rhs = 0.0;
    std::vector<LinearTerm> terms;  // var index resolved later
  };
  std::vector<RowInfo> rows;
  std::map<std::string, int> row_index;
  std::string obj_row;

  struct VarInfo {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double obj = 0.0;
  };
  std::vector<VarInfo> vars;
  std::map<std::string, int> var_index;

  auto resolve_var = [&](const std::string& mps_name) {
    auto nm = name_map.find(mps_name);
    return nm == name_map.end() ? mps_name : nm->second;
  };

  bool in_int = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      const auto toks = tokenize(line);
      const std::string& kw = toks[0];
      if (kw == "NAME") continue;
      if (kw == "ROWS") section = Section::Rows;
      else if (kw == "COLUMNS") section = Section::Columns;
      else if (kw == "RHS") section = Section::Rhs;
      else if (kw == "BOUNDS") section = Section::Bounds;
      else if (kw == "ENDATA") { section = Section::Done; break; }
      else throw std::invalid_argument("MPS: unsupported section " + kw);
      continue;
    }
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    switch (section) {
      case Section::Rows: {
        if (toks.size() != 2) throw std::invalid_argument("MPS: bad ROWS line");
        if (toks[0] == "N") {
          if (!obj_row.empty()) throw std::invalid_argument("MPS: multiple N rows");
          obj_row = toks[1];
        } else {
          RowSense sense;
          if (toks[0] == "L") sense = RowSense::LE;
          else if (toks[0] == "G") sense = RowSense::GE;
          else if (toks[0] == "E") sense = RowSense::EQ;
          else throw std::invalid_argument("MPS: bad row sense " + toks[0]);
          row_index.emplace(toks[1], static_cast<int>(rows.size()));
          rows.push_back({sense});
        }
        break;
      }
      case Section::Columns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'") in_int = true;
          else if (toks[2] == "'INTEND'") in_int = false;
          else throw std::invalid_argument("MPS: bad marker " + toks[2]);
          break;
        }
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw std::invalid_argument("MPS: bad COLUMNS line: " + line);
        const std::string name = resolve_var(toks[0]);
        int vi;
        auto it = var_index.find(name);
        if (it == var_index.end()) {
          vi = static_cast<int>(vars.size());
          var_index.emplace(name, vi);
          vars.push_back({name, in_int ? VarKind::Binary : VarKind::Continuous});
        } else {
          vi = it->second;
        }
        for (size_t k = 1; k + 1 < toks.size(); k += 2) {
          const double val = parse_value(toks[k + 1]);
          if (toks[k] == obj_row) {
            vars[vi].obj = val;
          } else {
            auto rit = row_index.find(toks[k]);
            if (rit == row_index.end())
              throw std::invalid_argument("MPS: unknown row " + toks[k]);
            rows[rit->second].terms.push_back({vi, val});
          }
        }
        break;
      }
      case Section::Rhs: {
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw std::invalid_argument("MPS: bad RHS line: " + line);
        for (size_t k = 1; k + 1 < toks.size(); k += 2) {
          if (toks[k] == obj_row) continue;
          auto rit = row_index.find(toks[k]);
          if (rit == row_index.end())
            throw std::invalid_argument("MPS: unknown row " + toks[k]);
          rows[rit->second].rhs = parse_value(toks[k + 1]);
        }
        break;
      }
      case Section::Bounds: {
        if (toks.size() < 3) throw std::invalid_argument("MPS: bad BOUNDS line");
        if (toks[0] == "BV") {
          const std::string name = resolve_var(toks[2]);
          auto it = var_index.find(name);
          if (it == var_index.end())
            throw std::invalid_argument("MPS: bound on unknown column " + toks[2]);
          vars[it->second].kind = VarKind::Binary;
        } else {
          throw std::invalid_argument("MPS: unsupported bound type " + toks[0]);
        }
        break;
      }
      default:
        throw std::invalid_argument("MPS: data outside any section");
    }
  }
  if (section != Section::Done) throw std::invalid_argument("MPS: missing ENDATA");

  MilpInstance inst;
  for (const auto& v : vars) {
    std::string tag;
    auto it = tags.find(v.name);
    if (it != tags.end()) tag = it->second;
    inst.add_variable(v.name, v.kind, v.obj, tag);
  }
  for (auto& r : rows) inst.add_row(std::move(r.terms), r.sense, r.rhs);
  return inst;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_all(const std::string& path, const std::string& data) {
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    if (gzwrite(f, data.data(), static_cast<unsigned>(data.size())) !=
        static_cast<int>(data.size())) {
      gzclose(f);
      throw std::runtime_error("gzwrite failed for " + path);
    }
    gzclose(f);
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << data;
  }
}

std::string read_all(const std::string& path) {
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string data;
    char buf[1 << 16];
    int got;
    while ((got = gzread(f, buf, sizeof(buf))) > 0) data.append(buf, got);
    gzclose(f);
    return data;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

void write_mps_file(const MilpInstance& inst, const std::string& path) {
  const MpsDocument doc = export_mps(inst);
  write_all(path, doc.text);
  nlohmann::json sidecar;
  sidecar["names"] = doc.name_map;
  sidecar["tags"] = doc.tags;
  std::ofstream f(path + ".map.json");
  if (!f) throw std::runtime_error("cannot open " + path + ".map.json");
  f << sidecar.dump(2) << "\n";
}

MilpInstance read_mps_file(const std::string& path) {
  const std::string text = read_all(path);
  std::map<std::string, std::string> names, tags;
  std::ifstream f(path + ".map.json");
  if (f) {
    nlohmann::json sidecar = nlohmann::json::parse(f);
    names = sidecar.value("names", names);
    tags = sidecar.value("tags", tags);
  }
  return parse_mps(text, names, tags);
}

}  // namespace phasebal
