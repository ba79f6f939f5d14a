#pragma once

// Run configuration (a TOML subset) and on-disk artifacts: snapshot CSVs,
// norm series, manifests with SHA-256 content hashes.
//
// Accepted TOML: [section] headers, key = value with numbers (including inf),
// "strings", true/false, and flat numeric arrays [1, 2.5, inf]. Comments
// start with #. Unknown sections and keys are rejected with their line.

#include <openssl/evp.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fwlab/analysis.hpp"
#include "fwlab/errors.hpp"
#include "fwlab/grid.hpp"
#include "fwlab/model.hpp"
#include "fwlab/solver.hpp"

namespace fwlab::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kCodeVersion = "fwlab 1.0.0";

// ---------------------------------------------------------------------------
// Numbers

/// 17 significant digits: parses back to the identical double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
    throw ConfigError(where + ": not a number: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// TOML subset

using TomlValue = std::variant<double, std::string, bool, std::vector<double>>;

struct TomlEntry {
  TomlValue value;
  int line = 0;
};

struct TomlDoc {
  std::string source;
  std::map<std::string, std::map<std::string, TomlEntry>> sections;
  std::map<std::string, int> section_lines;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace detail

inline TomlDoc parse_toml(const std::string& text, const std::string& source = "<config>") {
  TomlDoc doc;
  doc.source = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      if (doc.section_lines.count(section)) fail("duplicate section [" + section + "]");
      doc.section_lines[section] = line_no;
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (section.empty()) fail("key '" + key + "' outside any section");
    if (val.empty()) fail("missing value for '" + key + "'");
    auto& sec = doc.sections[section];
    if (sec.count(key)) fail("duplicate key '" + key + "'");
    const std::string where = source + ":" + std::to_string(line_no);
    TomlValue v;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') fail("unterminated string");
      v = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      v = (val == "true");
    } else if (val.front() == '[') {
      if (val.back() != ']') fail("unterminated array (arrays must fit on one line)");
      std::vector<double> arr;
      std::string body = val.substr(1, val.size() - 2);
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        arr.push_back(parse_double(item, where));
      }
      v = std::move(arr);
    } else {
      v = parse_double(val, where);
    }
    sec[key] = {std::move(v), line_no};
  }
  return doc;
}

/// Typed, schema-checked access to a TomlDoc. Every key that is read is
/// marked; `finish()` rejects whatever was never read.
class TomlReader {
 public:
  explicit TomlReader(const TomlDoc& d) : doc_(d) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto it = doc_.sections.find(sec);
    return it != doc_.sections.end() && it->second.count(key);
  }
  bool has_section(const std::string& sec) const { return doc_.sections.count(sec) > 0; }

  std::optional<double> number(const std::string& sec, const std::string& key) {
    const auto* e = entry(sec, key);
    if (!e) return {};
    if (auto* d = std::get_if<double>(&e->value)) return *d;
    type_error(sec, key, *e, "a number");
  }
  std::optional<std::string> string(const std::string& sec, const std::string& key) {
    const auto* e = entry(sec, key);
    if (!e) return {};
    if (auto* s = std::get_if<std::string>(&e->value)) return *s;
    type_error(sec, key, *e, "a string");
  }
  std::optional<bool> boolean(const std::string& sec, const std::string& key) {
    const auto* e = entry(sec, key);
    if (!e) return {};
    if (auto* b = std::get_if<bool>(&e->value)) return *b;
    type_error(sec, key, *e, "true or false");
  }
  std::optional<std::vector<double>> array(const std::string& sec, const std::string& key) {
    const auto* e = entry(sec, key);
    if (!e) return {};
    if (auto* a = std::get_if<std::vector<double>>(&e->value)) return *a;
    if (auto* d = std::get_if<double>(&e->value)) return std::vector<double>{*d};
    type_error(sec, key, *e, "an array of numbers");
  }
  int line(const std::string& sec, const std::string& key) const {
    return doc_.sections.at(sec).at(key).line;
  }
  [[noreturn]] void fail(const std::string& sec, const std::string& key, const std::string& msg) const {
    int l = 0;
    if (has(sec, key)) l = line(sec, key);
    else if (doc_.section_lines.count(sec)) l = doc_.section_lines.at(sec);
    throw ConfigError(doc_.source + ":" + std::to_string(l) + ": [" + sec + "] " + key + ": " + msg);
  }

  void finish() const {
    for (const auto& [sec, keys] : doc_.sections) {
      if (!known_sections_.count(sec))
        throw ConfigError(doc_.source + ":" + std::to_string(doc_.section_lines.at(sec)) +
                          ": unknown section [" + sec + "]");
      for (const auto& [key, e] : keys)
        if (!seen_.count(sec + "." + key))
          throw ConfigError(doc_.source + ":" + std::to_string(e.line) + ": unknown key '" + key +
                            "' in [" + sec + "]");
    }
  }
  void declare_section(const std::string& sec) { known_sections_.insert(sec); }

 private:
  const TomlEntry* entry(const std::string& sec, const std::string& key) {
    known_sections_.insert(sec);
    seen_.insert(sec + "." + key);
    auto it = doc_.sections.find(sec);
    if (it == doc_.sections.end()) return nullptr;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
  }
  [[noreturn]] void type_error(const std::string& sec, const std::string& key, const TomlEntry& e,
                               const std::string& want) const {
    throw ConfigError(doc_.source + ":" + std::to_string(e.line) + ": [" + sec + "] " + key +
                      " must be " + want);
  }

  const TomlDoc& doc_;
  std::set<std::string> seen_;
  std::set<std::string> known_sections_;
};

// ---------------------------------------------------------------------------
// Run configuration

struct InitialData {
  std::string family = "gaussian";  // gaussian | sum-of-gaussians | chi | zero | from-file
  std::vector<double> amps{0.05};
  std::vector<double> widths{1.0};
  std::vector<double> centers{0.0};
  double mass = 0.0;  // chi family
  std::string path;   // from-file: CSV with columns x,u on the run grid
};

struct AnalysisRequest {
  std::vector<double> profile_times;
  std::vector<int> norm_orders;
  std::vector<double> norm_p{2.0};
  std::vector<int> norm_l{0};
  std::vector<double> kernel_gap_times;
  std::vector<int> kernel_gap_l{0};
  bool theta = false;
  std::optional<double> theta_value;  // used instead of computing theta
  std::optional<FitWindow> fit_window;
};

struct RunConfig {
  std::string name = "run";
  ModelParams model;
  EquationTag kind = EquationTag::ViscousFW;
  double half_length = 64.0;
  std::size_t size = 1024;
  SolverConfig solver;
  InitialData initial;
  AnalysisRequest analyses;
  std::size_t snapshot_stride = 1;  // persist every k-th snapshot (the last one always)
  fs::path base_dir;                // directory of the config file, for relative paths
};

inline EquationTag parse_kind(const std::string& s) {
  if (s == "ViscousFW") return EquationTag::ViscousFW;
  if (s == "KdVBurgers") return EquationTag::KdVBurgers;
  if (s == "Burgers") return EquationTag::Burgers;
  throw ConfigError("unknown equation kind '" + s + "' (ViscousFW | KdVBurgers | Burgers)");
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "ETDRK4") return Scheme::ETDRK4;
  if (s == "IMEX-BDF2") return Scheme::ImexBdf2;
  throw ConfigError("unknown scheme '" + s + "' (ETDRK4 | IMEX-BDF2)");
}

/// Snapshots at 0, every `dense_step` up to `dense_until`, then `log_count`
/// log-spaced times up to t_end, all rounded to the dt lattice.
inline std::vector<double> snapshot_schedule(double dt, double t_end, double dense_step,
                                             double dense_until, std::size_t log_count) {
  std::vector<double> raw{0.0};
  if (dense_step > 0.0)
    for (double t = dense_step; t <= std::min(dense_until, t_end) + 1e-12; t += dense_step)
      raw.push_back(t);
  const double start = std::max(dense_until, dense_step > 0.0 ? dense_until : dt);
  if (log_count > 0 && t_end > start) {
    const double a = std::log(start);
    const double b = std::log(t_end);
    for (std::size_t i = 1; i <= log_count; ++i)
      raw.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(log_count)));
  }
  raw.push_back(t_end);
  std::vector<double> out;
  for (double t : raw) {
    double q = std::round(t / dt) * dt;
    if (q > t_end) q = t_end;
    if (out.empty() || q > out.back() + 0.5 * dt) out.push_back(q);
  }
  out.back() = t_end;
  return out;
}

inline std::vector<int> to_ints(const std::vector<double>& v, TomlReader& r, const std::string& sec,
                                const std::string& key) {
  std::vector<int> out;
  for (double d : v) {
    if (d != std::floor(d) || std::abs(d) > 1e6) r.fail(sec, key, "expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

inline RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>") {
  const TomlDoc doc = parse_toml(text, source);
  TomlReader r(doc);
  RunConfig c;

  if (auto v = r.string("run", "name")) c.name = *v;
  if (c.name.empty() || c.name.find('/') != std::string::npos || c.name == "." || c.name == "..")
    r.fail("run", "name", "must be a plain, non-empty file name");

  if (auto v = r.number("model", "beta")) c.model.beta = *v;
  if (auto v = r.number("model", "B")) c.model.cap_b = *v;
  if (auto v = r.number("model", "b")) c.model.small_b = *v;
  if (auto v = r.number("model", "mu")) c.model.mu = *v;
  try {
    c.model.validate(true);
  } catch (const ConfigError& e) {
    r.fail("model", "", e.what());
  }

  if (auto v = r.string("equation", "kind")) {
    try {
      c.kind = parse_kind(*v);
    } catch (const ConfigError& e) {
      r.fail("equation", "kind", e.what());
    }
  }

  if (auto v = r.number("grid", "L")) c.half_length = *v;
  if (auto v = r.number("grid", "N")) {
    if (*v != std::floor(*v) || *v < 16 || *v > (1 << 24)) r.fail("grid", "N", "must be an integer in [16, 2^24]");
    c.size = static_cast<std::size_t>(*v);
  }
  try {
    Grid g(c.half_length, c.size);
  } catch (const ConfigError& e) {
    r.fail("grid", "N", e.what());
  }

  auto& s = c.solver;
  if (auto v = r.number("solver", "dt")) s.dt = *v;
  if (auto v = r.number("solver", "t_end")) s.t_end = *v;
  if (auto v = r.string("solver", "scheme")) {
    try {
      s.scheme = parse_scheme(*v);
    } catch (const ConfigError& e) {
      r.fail("solver", "scheme", e.what());
    }
  }
  if (auto v = r.boolean("solver", "moving_frame")) s.moving_frame = *v;
  if (auto v = r.number("solver", "accuracy_cap")) s.accuracy_cap = *v;
  if (auto v = r.number("solver", "blowup_amplitude")) s.blowup_amplitude = *v;
  if (!(s.blowup_amplitude > 0.0)) r.fail("solver", "blowup_amplitude", "must be > 0");
  const auto explicit_times = r.array("solver", "snapshot_times");
  const double dense_step = r.number("solver", "dense_step").value_or(0.0);
  const double dense_until = r.number("solver", "dense_until").value_or(0.0);
  const double log_count = r.number("solver", "log_count").value_or(0.0);
  if (!(s.dt > 0.0)) r.fail("solver", "dt", "must be > 0");
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) r.fail("solver", "t_end", "must be > 0");
  if (log_count < 0 || log_count != std::floor(log_count)) r.fail("solver", "log_count", "must be a non-negative integer");
  if (explicit_times) {
    s.snapshot_times = *explicit_times;
  } else {
    s.snapshot_times = snapshot_schedule(s.dt, s.t_end, dense_step, dense_until,
                                         static_cast<std::size_t>(log_count));
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    r.fail("solver", "snapshot_times", e.what());
  }

  auto& in = c.initial;
  if (auto v = r.string("initial", "family")) in.family = *v;
  const auto amp = r.array("initial", "amp");
  const auto width = r.array("initial", "width");
  const auto center = r.array("initial", "center");
  if (amp) in.amps = *amp;
  if (width) in.widths = *width;
  if (center) in.centers = *center;
  if (auto v = r.number("initial", "mass")) in.mass = *v;
  if (auto v = r.string("initial", "path")) in.path = *v;
  if (in.family == "gaussian" || in.family == "sum-of-gaussians") {
    if (in.amps.size() != in.widths.size() || in.amps.size() != in.centers.size())
      r.fail("initial", "amp", "amp, width and center must have the same length");
    if (in.family == "gaussian" && in.amps.size() != 1)
      r.fail("initial", "amp", "gaussian takes a single amp/width/center");
    for (double w : in.widths)
      if (!(w > 0.0)) r.fail("initial", "width", "widths must be > 0");
  } else if (in.family == "from-file") {
    if (in.path.empty()) r.fail("initial", "path", "required for family from-file");
  } else if (in.family != "chi" && in.family != "zero") {
    r.fail("initial", "family", "unknown family '" + in.family +
                                    "' (gaussian | sum-of-gaussians | chi | zero | from-file)");
  }

  auto& a = c.analyses;
  if (auto v = r.array("analysis", "profile_times")) a.profile_times = *v;
  if (auto v = r.array("analysis", "norm_orders")) a.norm_orders = to_ints(*v, r, "analysis", "norm_orders");
  if (auto v = r.array("analysis", "norm_p")) a.norm_p = *v;
  if (auto v = r.array("analysis", "norm_l")) a.norm_l = to_ints(*v, r, "analysis", "norm_l");
  if (auto v = r.array("analysis", "kernel_gap_times")) a.kernel_gap_times = *v;
  if (auto v = r.array("analysis", "kernel_gap_l")) a.kernel_gap_l = to_ints(*v, r, "analysis", "kernel_gap_l");
  if (auto v = r.boolean("analysis", "theta")) a.theta = *v;
  if (auto v = r.number("analysis", "theta_value")) a.theta_value = *v;
  if (auto v = r.array("analysis", "fit_window")) {
    if (v->size() != 2 || !((*v)[0] < (*v)[1])) r.fail("analysis", "fit_window", "expected [t_min, t_max]");
    a.fit_window = FitWindow{(*v)[0], (*v)[1]};
  }
  for (int o : a.norm_orders)
    if (o < 1 || o > 3) r.fail("analysis", "norm_orders", "orders are 1, 2 or 3");
  for (double p : a.norm_p)
    if (!(p >= 1.0)) r.fail("analysis", "norm_p", "p must be in [1, inf]");
  for (int l : a.norm_l)
    if (l < 0 || l > 4) r.fail("analysis", "norm_l", "l must be in 0..4");
  for (double t : a.kernel_gap_times)
    if (!(t > 0.0)) r.fail("analysis", "kernel_gap_times", "times must be > 0");

  if (auto v = r.number("output", "snapshot_stride")) {
    if (*v < 1 || *v != std::floor(*v)) r.fail("output", "snapshot_stride", "must be a positive integer");
    c.snapshot_stride = static_cast<std::size_t>(*v);
  }

  r.finish();
  return c;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline RunConfig load_run_config(const fs::path& path) {
  RunConfig c = parse_run_config(read_text(path), path.string());
  c.base_dir = path.parent_path();
  return c;
}

inline json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = {{"beta", c.model.beta}, {"B", c.model.cap_b}, {"b", c.model.small_b}, {"mu", c.model.mu}};
  j["equation"] = {{"kind", to_string(c.kind)}};
  j["grid"] = {{"L", c.half_length}, {"N", c.size}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"t_end", c.solver.t_end},
                 {"scheme", to_string(c.solver.scheme)},
                 {"moving_frame", c.solver.moving_frame},
                 {"accuracy_cap", c.solver.accuracy_cap},
                 {"blowup_amplitude", c.solver.blowup_amplitude},
                 {"snapshot_count", c.solver.snapshot_times.size()}};
  j["initial"] = {{"family", c.initial.family},
                  {"amp", c.initial.amps},
                  {"width", c.initial.widths},
                  {"center", c.initial.centers},
                  {"mass", c.initial.mass},
                  {"path", c.initial.path}};
  json a;
  a["profile_times"] = c.analyses.profile_times;
  a["norm_orders"] = c.analyses.norm_orders;
  json ps = json::array();
  for (double p : c.analyses.norm_p) ps.push_back(format_double(p));
  a["norm_p"] = ps;
  a["norm_l"] = c.analyses.norm_l;
  a["kernel_gap_times"] = c.analyses.kernel_gap_times;
  a["kernel_gap_l"] = c.analyses.kernel_gap_l;
  a["theta"] = c.analyses.theta;
  if (c.analyses.theta_value) a["theta_value"] = *c.analyses.theta_value;
  if (c.analyses.fit_window) a["fit_window"] = {c.analyses.fit_window->t_min, c.analyses.fit_window->t_max};
  j["analysis"] = a;
  j["output"] = {{"snapshot_stride", c.snapshot_stride}};
  return j;
}

// ---------------------------------------------------------------------------
// Files and hashes

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline void write_text(const fs::path& p, const std::string& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << body;
  if (!f) throw ConfigError("write failed for '" + p.string() + "'");
}

/// Output root: $FW_RUN_DIR if set, else ./runs.
inline fs::path run_root() {
  if (const char* env = std::getenv("FW_RUN_DIR"); env && *env) return env;
  return "runs";
}

inline std::string field_csv(const Field& f, double shift = 0.0) {
  std::string s = "x,u\n";
  const auto& g = f.grid();
  for (std::size_t j = 0; j < g.size(); ++j) {
    s += format_double(g.x(j) + shift);
    s += ',';
    s += format_double(f[j]);
    s += '\n';
  }
  return s;
}

/// Parses an x,u CSV; the x column must match the grid nodes (+ shift).
inline Field parse_field_csv(const std::string& text, const Grid& g, const std::string& source,
                             double shift = 0.0) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "x,u")
    throw ConfigError(source + ": expected header 'x,u'");
  Field f(g);
  std::size_t j = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (comma == std::string::npos) throw ConfigError(where + ": expected two columns");
    if (j >= g.size()) throw ConfigError(where + ": more rows than grid points");
    const double x = parse_double(line.substr(0, comma), where);
    const double u = parse_double(line.substr(comma + 1), where);
    if (std::abs(x - (g.x(j) + shift)) > 1e-9 * std::max(1.0, g.half_length()))
      throw ConfigError(where + ": x = " + format_double(x) + " does not match the grid");
    f[j++] = u;
  }
  if (j != g.size()) throw ConfigError(source + ": expected " + std::to_string(g.size()) + " rows");
  return f;
}

inline std::string norms_csv(const std::vector<NormSeries>& series) {
  std::string s = "t,value,label,p,l\n";
  for (const auto& ns : series)
    for (std::size_t i = 0; i < ns.times.size(); ++i)
      s += format_double(ns.times[i]) + "," + format_double(ns.values[i]) + "," + ns.label + "," +
           format_double(ns.p) + "," + std::to_string(ns.l) + "\n";
  return s;
}

inline std::vector<NormSeries> parse_norms_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "t,value,label,p,l")
    throw ConfigError(source + ": expected header 't,value,label,p,l'");
  std::vector<NormSeries> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cols.size() != 5) throw ConfigError(where + ": expected 5 columns");
    const double t = parse_double(cols[0], where);
    const double v = parse_double(cols[1], where);
    const double p = parse_double(cols[3], where);
    const int l = static_cast<int>(parse_double(cols[4], where));
    NormSeries* target = nullptr;
    for (auto& ns : out)
      if (ns.label == cols[2] && ns.p == p && ns.l == l) target = &ns;
    if (!target) {
      out.push_back({});
      target = &out.back();
      target->label = cols[2];
      target->p = p;
      target->l = l;
    }
    target->push(t, v);
  }
  return out;
}

inline json to_json(const DecayFit& f, const NormSeries& s) {
  return {{"label", s.label},
          {"p", format_double(s.p)},
          {"l", s.l},
          {"log_power", f.log_power},
          {"exponent", f.exponent},
          {"prefactor", f.prefactor},
          {"rms_residual", f.rms_residual},
          {"window", {f.window.t_min, f.window.t_max}},
          {"points", f.points}};
}

inline json to_json(const ThetaEstimate& e) {
  return {{"value", e.value},
          {"uncertainty", e.uncertainty},
          {"tail_slope", e.tail_slope},
          {"tail_amplitude", e.tail_amplitude}};
}

// ---------------------------------------------------------------------------
// Manifest and trajectories

/// Collects output files (relative to a run directory) and their hashes.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  const fs::path& dir() const { return dir_; }

  void write(const std::string& rel, const std::string& body) {
    write_text(dir_ / rel, body);
    files_.push_back({{"path", rel}, {"sha256", sha256_hex(body)}, {"bytes", body.size()}});
  }
  json files() const { return files_; }

 private:
  fs::path dir_;
  json files_ = json::array();
};

inline json params_json(const ModelParams& p) {
  return {{"beta", p.beta}, {"B", p.cap_b}, {"b", p.small_b}, {"mu", p.mu}};
}

/// Snapshot CSVs for the kept indices plus the trajectory block of a
/// manifest. Stored x is the frame coordinate.
inline json write_snapshots(ArtifactWriter& out, const Trajectory& traj,
                            const std::vector<std::size_t>& keep) {
  json times = json::array(), shifts = json::array(), files = json::array();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/snap_%05zu.csv", k);
    out.write(name, field_csv(traj.snapshots.at(i)));
    times.push_back(traj.times[i]);
    shifts.push_back(traj.frame_shift_at_t(traj.times[i]));
    files.push_back(name);
  }
  return {{"params", params_json(traj.params)},
          {"kind", to_string(traj.kind.tag)},
          {"grid", {{"L", traj.grid.half_length()}, {"N", traj.grid.size()}}},
          {"solver",
           {{"dt", traj.config.dt},
            {"t_end", traj.config.t_end},
            {"scheme", to_string(traj.config.scheme)},
            {"moving_frame", traj.config.moving_frame}}},
          {"times", times},
          {"frame_shifts", shifts},
          {"snapshot_files", files}};
}

inline void write_manifest(const ArtifactWriter& out, json manifest) {
  manifest["code_version"] = kCodeVersion;
  manifest["files"] = out.files();
  write_text(out.dir() / "manifest.json", manifest.dump(2) + "\n");
}

/// Writes every snapshot of `traj` into `dir` with a manifest.
inline void save_trajectory(const fs::path& dir, const Trajectory& traj) {
  ArtifactWriter out(dir);
  std::vector<std::size_t> keep(traj.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  json m;
  m["trajectory"] = write_snapshots(out, traj, keep);
  write_manifest(out, m);
}

/// Reads a trajectory back, verifying every listed content hash.
inline Trajectory load_trajectory(const fs::path& dir) {
  const json m = json::parse(read_text(dir / "manifest.json"));
  std::map<std::string, std::string> hashes;
  for (const auto& f : m.at("files")) hashes[f.at("path")] = f.at("sha256");
  const json& tj = m.at("trajectory");
  Trajectory traj;
  const auto& pj = tj.at("params");
  traj.params = {pj.at("beta"), pj.at("B"), pj.at("b"), pj.at("mu")};
  const std::string kind = tj.at("kind");
  if (kind == "AuxLinear") throw ConfigError("load_trajectory: AuxLinear runs cannot be restored");
  traj.kind = {parse_kind(kind), {}, {}};
  traj.grid = Grid(tj.at("grid").at("L").get<double>(), tj.at("grid").at("N").get<std::size_t>());
  const auto& sj = tj.at("solver");
  traj.config.dt = sj.at("dt");
  traj.config.t_end = sj.at("t_end");
  traj.config.scheme = parse_scheme(sj.at("scheme"));
  traj.config.moving_frame = sj.at("moving_frame");
  for (const auto& t : tj.at("times")) traj.times.push_back(t);
  traj.config.snapshot_times = traj.times;
  for (const auto& f : tj.at("snapshot_files")) {
    const std::string rel = f;
    const std::string body = read_text(dir / rel);
    if (!hashes.count(rel) || hashes[rel] != sha256_hex(body))
      throw ConsistencyError("load_trajectory: content hash mismatch for " + rel);
    traj.snapshots.push_back(parse_field_csv(body, traj.grid, rel));
  }
  if (traj.snapshots.size() != traj.times.size())
    throw ConsistencyError("load_trajectory: times and snapshot files differ in number");
  return traj;
}

}  // namespace fwlab::io
