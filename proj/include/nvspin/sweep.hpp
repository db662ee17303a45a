#pragma once

#include <yaml-cpp/yaml.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dynamics.hpp"
#include "oracle.hpp"

namespace nvspin {

using json = nlohmann::json;

enum class Engine { analytic, numeric, oracle, dynamics };

inline std::string engine_name(Engine e) {
  switch (e) {
    case Engine::analytic: return "analytic";
    case Engine::numeric: return "numeric";
    case Engine::oracle: return "oracle";
    case Engine::dynamics: return "dynamics";
  }
  return "?";
}

struct SweepConfig {
  ModelKind kind = ModelKind::seven_level_rate;
  PumpingParams pumping;
  FieldSetup field;
  HyperfineTensors hyperfine = HyperfineTensors::preset("13Cb");
  double eta = 1.0;
  bool room_temperature = false;
  std::optional<Vec3> omega_g, omega_e;  // two-level, rad/us; default a_g, a_e
  std::string sweep_axis = "R";
  std::vector<double> grid;
  std::vector<Engine> engines{Engine::analytic};
  bool include_spin_flip = false;
  std::size_t oracle_paths = 10000;
  std::string output = "sweep.csv";
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

// ---- structured text -> json ----

namespace detail {

inline json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& x : n) a.push_back(yaml_to_json(x));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      char* end = nullptr;
      const long long iv = std::strtoll(s.c_str(), &end, 10);
      if (!s.empty() && *end == '\0') return iv;
      const double dv = std::strtod(s.c_str(), &end);
      if (!s.empty() && *end == '\0') return dv;
      return s;
    }
  }
  return nullptr;
}

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void allow_keys(const json& o, const std::string& where, std::initializer_list<const char*> keys) {
  if (!o.is_object()) throw ValidationError(where, "expected a mapping");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : o.items())
    if (!ok.count(k)) throw ValidationError(where.empty() ? k : where + "." + k, "unknown key");
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
  return x;
}

inline double rate(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (x < 0) throw ValidationError(field, "must be non-negative");
  return x;
}

inline Vec3 vec3(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) throw ValidationError(field, "expected a 3-vector");
  return {number(v[0], field + "[0]"), number(v[1], field + "[1]"), number(v[2], field + "[2]")};
}

inline Mat3 mat3(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) throw ValidationError(field, "expected a 3x3 matrix");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = vec3(v[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]").transpose();
  return m;
}

inline std::vector<double> grid_from(const json& v, const std::string& field) {
  std::vector<double> g;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) g.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  } else if (v.is_object()) {
    allow_keys(v, field, {"start", "stop", "points", "scale"});
    if (!v.contains("start") || !v.contains("stop") || !v.contains("points"))
      throw ValidationError(field, "needs start, stop and points");
    const double a = number(v["start"], field + ".start"), b = number(v["stop"], field + ".stop");
    const int n = v["points"].is_number_integer() ? v["points"].get<int>() : -1;
    if (n < 1) throw ValidationError(field + ".points", "must be a positive integer");
    const std::string scale = v.value("scale", std::string("linear"));
    if (scale != "linear" && scale != "log") throw ValidationError(field + ".scale", "must be linear or log");
    if (scale == "log" && (a <= 0 || b <= 0)) throw ValidationError(field, "log grid needs positive bounds");
    for (int i = 0; i < n; ++i) {
      const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      g.push_back(scale == "log" ? a * std::pow(b / a, s) : a + (b - a) * s);
    }
  } else {
    throw ValidationError(field, "expected a list or a range");
  }
  if (g.empty()) throw ValidationError(field, "grid is empty");
  const bool up = std::is_sorted(g.begin(), g.end(), std::less<>()),
             down = std::is_sorted(g.begin(), g.end(), std::greater<>());
  if (!up && !down) throw ValidationError(field, "grid must be monotone");
  return g;
}

}  // namespace detail

inline json parse_structured(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      const auto [l, c] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
      throw ParseError(std::string("malformed JSON: ") + e.what(), l, c);
    }
  }
  try {
    return detail::yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed config: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

inline SweepConfig config_from_json(const json& j) {
  using namespace detail;
  SweepConfig c;
  allow_keys(j, "", {"model", "pumping", "field", "hyperfine", "two_level", "sweep", "engines", "dynamics",
                     "oracle", "output", "seed", "threads"});
  if (j.contains("model")) {
    if (!j["model"].is_string()) throw ValidationError("model", "expected a string");
    try {
      c.kind = parse_kind(j["model"].get<std::string>());
    } catch (const UnknownKind& e) {
      throw ValidationError("model", e.what());
    }
  }
  if (c.kind == ModelKind::two_level) c.pumping.gamma_s2 = 0.0;

  if (j.contains("pumping")) {
    const auto& p = j["pumping"];
    allow_keys(p, "pumping", {"R", "R_over_gamma1", "omega_R", "delta", "gamma1", "gamma_phi", "gamma_s1",
                              "gamma_s2", "gamma_s2_ratio", "gamma_s"});
    auto& q = c.pumping;
    if (p.contains("gamma1")) q.gamma1 = rate(p["gamma1"], "pumping.gamma1");
    q.gamma_s1 = q.gamma1;
    if (c.kind != ModelKind::two_level) q.gamma_s2 = q.gamma_s1 / 25.0;
    if (p.contains("gamma_phi")) q.gamma_phi = rate(p["gamma_phi"], "pumping.gamma_phi");
    if (p.contains("gamma_s1")) q.gamma_s1 = rate(p["gamma_s1"], "pumping.gamma_s1");
    if (p.contains("gamma_s")) q.gamma_s = rate(p["gamma_s"], "pumping.gamma_s");
    if (p.contains("gamma_s2") && p.contains("gamma_s2_ratio"))
      throw ValidationError("pumping.gamma_s2", "give gamma_s2 or gamma_s2_ratio, not both");
    if (p.contains("gamma_s2_ratio")) {
      const double r = rate(p["gamma_s2_ratio"], "pumping.gamma_s2_ratio");
      if (r == 0) throw ValidationError("pumping.gamma_s2_ratio", "must be positive");
      q.gamma_s2 = q.gamma_s1 / r;
    } else if (p.contains("gamma_s2")) {
      q.gamma_s2 = rate(p["gamma_s2"], "pumping.gamma_s2");
    } else if (c.kind != ModelKind::two_level) {
      q.gamma_s2 = q.gamma_s1 / 25.0;
    }
    if (p.contains("delta")) q.delta = number(p["delta"], "pumping.delta");
    if (p.contains("omega_R")) q.omega_R = rate(p["omega_R"], "pumping.omega_R");
    if (p.contains("R") && p.contains("R_over_gamma1"))
      throw ValidationError("pumping.R", "give R or R_over_gamma1, not both");
    if (p.contains("R")) q.R = rate(p["R"], "pumping.R");
    if (p.contains("R_over_gamma1")) q.R = rate(p["R_over_gamma1"], "pumping.R_over_gamma1") * q.gamma1;
  }
  if (c.pumping.gamma1 + c.pumping.gamma_phi <= 0) throw ValidationError("pumping.gamma1", "gamma1 + gamma_phi must be positive");

  if (j.contains("field")) {
    const auto& f = j["field"];
    allow_keys(f, "field", {"B", "gamma_e", "gamma_N", "D_gs", "D_es"});
    if (f.contains("B")) c.field.B = vec3(f["B"], "field.B");
    if (f.contains("gamma_e")) c.field.gamma_e = number(f["gamma_e"], "field.gamma_e");
    if (f.contains("gamma_N")) c.field.gamma_N = number(f["gamma_N"], "field.gamma_N");
    if (f.contains("D_gs")) c.field.D_gs = rate(f["D_gs"], "field.D_gs");
    if (f.contains("D_es")) c.field.D_es = rate(f["D_es"], "field.D_es");
  }

  if (j.contains("hyperfine")) {
    const auto& h = j["hyperfine"];
    allow_keys(h, "hyperfine", {"preset", "A_g", "A_e", "eta"});
    if (h.contains("preset")) {
      if (!h["preset"].is_string()) throw ValidationError("hyperfine.preset", "expected a string");
      try {
        c.hyperfine = HyperfineTensors::preset(h["preset"].get<std::string>());
      } catch (const UnknownKind& e) {
        throw ValidationError("hyperfine.preset", e.what());
      }
    }
    if (h.contains("A_g")) c.hyperfine.A_g = mat3(h["A_g"], "hyperfine.A_g");
    if (h.contains("A_e")) c.hyperfine.A_e = mat3(h["A_e"], "hyperfine.A_e");
    if (h.contains("eta")) {
      c.eta = number(h["eta"], "hyperfine.eta");
      if (c.eta <= 0) throw ValidationError("hyperfine.eta", "must be positive");
    }
  }

  if (j.contains("two_level")) {
    const auto& t = j["two_level"];
    allow_keys(t, "two_level", {"omega_g", "omega_e", "room_temperature"});
    if (t.contains("omega_g")) c.omega_g = vec3(t["omega_g"], "two_level.omega_g");
    if (t.contains("omega_e")) c.omega_e = vec3(t["omega_e"], "two_level.omega_e");
    if (t.contains("room_temperature")) {
      if (!t["room_temperature"].is_boolean()) throw ValidationError("two_level.room_temperature", "expected a boolean");
      c.room_temperature = t["room_temperature"].get<bool>();
    }
    if (c.omega_g.has_value() != c.omega_e.has_value())
      throw ValidationError("two_level", "omega_g and omega_e must be given together");
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    allow_keys(s, "sweep", {"axis", "values", "unit"});
    if (s.contains("axis")) {
      if (!s["axis"].is_string()) throw ValidationError("sweep.axis", "expected a string");
      c.sweep_axis = s["axis"].get<std::string>();
    }
    if (c.sweep_axis != "R" && c.sweep_axis != "B_z" && c.sweep_axis != "B_y" && c.sweep_axis != "eta")
      throw ValidationError("sweep.axis", "must be R, B_z, B_y or eta");
    if (!s.contains("values")) throw ValidationError("sweep.values", "missing");
    c.grid = grid_from(s["values"], "sweep.values");
    if (s.contains("unit")) {
      const std::string u = s["unit"].is_string() ? s["unit"].get<std::string>() : "";
      if (u == "gamma1" && c.sweep_axis == "R") {
        for (double& x : c.grid) x *= c.pumping.gamma1;
      } else if (u != "absolute") {
        throw ValidationError("sweep.unit", "must be absolute, or gamma1 for an R sweep");
      }
    }
    for (double x : c.grid)
      if ((c.sweep_axis == "R" && x < 0) || (c.sweep_axis == "eta" && x <= 0))
        throw ValidationError("sweep.values", "out of range for axis " + c.sweep_axis);
  } else {
    c.grid = {c.sweep_axis == "R" ? c.pumping.rate() : 0.0};
    c.sweep_axis = "none";
  }

  if (j.contains("engines")) {
    const auto& e = j["engines"];
    if (!e.is_array()) throw ValidationError("engines", "expected a list");
    c.engines.clear();
    for (const auto& x : e) {
      const std::string s = x.is_string() ? x.get<std::string>() : "";
      if (s == "analytic") c.engines.push_back(Engine::analytic);
      else if (s == "numeric") c.engines.push_back(Engine::numeric);
      else if (s == "oracle") c.engines.push_back(Engine::oracle);
      else if (s == "dynamics") c.engines.push_back(Engine::dynamics);
      else throw ValidationError("engines", "unknown engine '" + s + "'");
    }
    if (c.engines.empty()) throw ValidationError("engines", "select at least one engine");
  }
  if (j.contains("dynamics")) {
    const auto& d = j["dynamics"];
    allow_keys(d, "dynamics", {"include_spin_flip"});
    if (d.contains("include_spin_flip")) {
      if (!d["include_spin_flip"].is_boolean()) throw ValidationError("dynamics.include_spin_flip", "expected a boolean");
      c.include_spin_flip = d["include_spin_flip"].get<bool>();
    }
  }
  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    allow_keys(o, "oracle", {"paths"});
    if (o.contains("paths")) {
      if (!o["paths"].is_number_integer() || o["paths"].get<long long>() < 20)
        throw ValidationError("oracle.paths", "expected an integer >= 20");
      c.oracle_paths = o["paths"].get<std::size_t>();
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("output", "expected a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ValidationError("seed", "expected an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<long long>() < 0)
      throw ValidationError("threads", "expected a non-negative integer");
    c.threads = j["threads"].get<unsigned>();
  }
  return c;
}

inline SweepConfig parse_config(const std::string& text) { return config_from_json(parse_structured(text)); }

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---- execution ----

struct ResultRow {
  std::string sweep_name;
  double sweep_value = 0.0;
  std::string engine;
  double gamma_phi = nan, gamma_plus = nan, gamma_minus = nan;
  double T1 = nan, T2 = nan, omega_bar = nan;
  double gamma_phi_0 = nan, gamma_phi_1 = nan, gamma_pm_0 = nan, gamma_pm_1 = nan;
  std::vector<std::string> flags;
  bool failed = false;
};

struct Point {
  PumpingParams pumping;
  FieldSetup field;
  HyperfineTensors hyperfine;
};

inline Point point_at(const SweepConfig& c, double x) {
  Point p{c.pumping, c.field, c.hyperfine.scaled(c.eta)};
  if (c.sweep_axis == "R") p.pumping.R = x;
  else if (c.sweep_axis == "B_z") p.field.B.z() = x;
  else if (c.sweep_axis == "B_y") p.field.B.y() = x;
  else if (c.sweep_axis == "eta") p.hyperfine = c.hyperfine.scaled(x);
  return p;
}

inline std::pair<Vec3, Vec3> two_level_frequencies(const SweepConfig& c, const Point& p) {
  if (c.omega_g) return {*c.omega_g, *c.omega_e};
  const PrecessionVectors pv = precession_vectors(p.field, p.hyperfine);
  return {pv.a_g, pv.a_e};
}

inline void fill(ResultRow& row, const RateSet& r) {
  row.gamma_phi = r.gamma_phi;
  row.gamma_plus = r.gamma_plus;
  row.gamma_minus = r.gamma_minus;
  row.T1 = r.T1;
  row.T2 = r.T2;
  row.omega_bar = r.omega_bar;
  if (r.has_components()) {
    row.gamma_phi_0 = r.phi0;
    row.gamma_phi_1 = r.phi1;
    row.gamma_pm_0 = 0.5 * (r.plus0 + r.minus0);
    row.gamma_pm_1 = 0.5 * (r.plus1 + r.minus1);
  }
  row.flags.insert(row.flags.end(), r.flags.begin(), r.flags.end());
}

inline ResultRow run_point(const SweepConfig& c, double x, Engine e, std::uint64_t seed) {
  ResultRow row;
  row.sweep_name = c.sweep_axis;
  row.sweep_value = x;
  row.engine = engine_name(e);
  try {
    const Point p = point_at(c, x);
    if (c.kind == ModelKind::two_level) {
      const auto [wg, we] = two_level_frequencies(c, p);
      const double R = p.pumping.rate(), g1 = p.pumping.gamma1;
      const double Pe = R / (2 * R + g1);
      const Frame fr = mean_frame_two_level(p.field, wg, we, 1 - Pe, Pe);
      const RateSet an = two_level_rates(p.pumping, wg, we, fr, c.room_temperature);
      const ElectronModel m = build_electron_model(ModelKind::two_level, p.pumping, p.field);
      const Coupling F = two_level_coupling(wg, we);
      switch (e) {
        case Engine::analytic: fill(row, an); break;
        case Engine::numeric: fill(row, markov_rates_numeric(m, F, fr)); break;
        case Engine::dynamics: fill(row, dynamics_rates(m, F, p.field, an).rates); break;
        case Engine::oracle: {
          const TelegraphModel tm = telegraph_two_level(R, g1, wg, we, p.field.nuclear_zeeman());
          OracleOptions o;
          o.threads = 1;
          const auto dph = dephasing_estimate(tm, fr, 10.0 / an.gamma_phi, c.oracle_paths, seed, o, false);
          const auto rel = dephasing_estimate(tm, fr, 10.0 * an.T1, c.oracle_paths, seed, o, false);
          RateSet r;
          r.gamma_phi = dph.gamma_phi;
          r.gamma_plus = r.gamma_minus = 0.5 * rel.relaxation;
          r.omega_bar = fr.omega();
          r.finish();
          fill(row, r);
          break;
        }
      }
    } else {
      const SevenLevelAnalytic an = seven_level_rates(p.pumping, p.field, p.hyperfine);
      const ElectronModel m = build_electron_model(c.kind, p.pumping, p.field);
      switch (e) {
        case Engine::analytic: fill(row, an.rates); break;
        case Engine::numeric:
          fill(row, markov_rates_numeric(m, hyperfine_operator(p.hyperfine, p.field, m, false), an.frame));
          break;
        case Engine::dynamics:
          fill(row, dynamics_rates(m, hyperfine_operator(p.hyperfine, p.field, m, c.include_spin_flip), p.field,
                                   an.rates).rates);
          break;
        case Engine::oracle: {
          const ElectronModel mr = build_electron_model(ModelKind::seven_level_rate, p.pumping, p.field);
          const TelegraphModel tm = telegraph_from_model(mr, hyperfine_operator(p.hyperfine, p.field, mr, false), p.field);
          OracleOptions o;
          o.threads = 1;
          const auto dph = dephasing_estimate(tm, an.frame, 10.0 / an.rates.gamma_phi, c.oracle_paths, seed, o, false);
          const auto rel = dephasing_estimate(tm, an.frame, 10.0 * an.rates.T1, c.oracle_paths, seed, o, false);
          RateSet r;
          r.gamma_phi = dph.gamma_phi;
          r.gamma_plus = r.gamma_minus = 0.5 * rel.relaxation;
          r.omega_bar = an.frame.omega();
          r.finish();
          fill(row, r);
          break;
        }
      }
    }
  } catch (const std::exception& ex) {
    row = ResultRow{c.sweep_axis, x, engine_name(e)};
    row.failed = true;
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), ',', ' ');
    std::replace(msg.begin(), msg.end(), ';', ' ');
    row.flags.push_back("error:" + msg);
  }
  return row;
}

// One row per (grid point, engine) in grid order; points run on a worker pool.
inline std::vector<ResultRow> run_sweep(const SweepConfig& c) {
  const std::size_t ne = c.engines.size(), n = c.grid.size() * ne;
  std::vector<ResultRow> rows(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;)
      rows[i] = run_point(c, c.grid[i / ne], c.engines[i % ne], c.seed + i / ne);
  };
  const unsigned th = std::min<std::size_t>(n, c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency()));
  if (th <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < th; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

// ---- CSV ----

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"sweep_name", "sweep_value", "engine", "gamma_phi", "gamma_plus",
                                             "gamma_minus", "T1_us", "T2_us", "omega_bar", "gamma_phi_0",
                                             "gamma_phi_1", "gamma_pm_0", "gamma_pm_1", "flags"};
  return cols;
}

namespace detail {

inline std::string fmt(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o << std::setprecision(17) << x;
  return o.str();
}

inline double unfmt(const std::string& s) {
  if (s.empty()) return nan;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "# units: rates 1/us, times us, frequencies rad/us, fields mT\n";
  out << "# generated: " << detail::timestamp() << "\n";
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? ";" : "") + r.flags[i];
    out << r.sweep_name << ',' << detail::fmt(r.sweep_value) << ',' << r.engine << ',' << detail::fmt(r.gamma_phi)
        << ',' << detail::fmt(r.gamma_plus) << ',' << detail::fmt(r.gamma_minus) << ',' << detail::fmt(r.T1) << ','
        << detail::fmt(r.T2) << ',' << detail::fmt(r.omega_bar) << ',' << detail::fmt(r.gamma_phi_0) << ','
        << detail::fmt(r.gamma_phi_1) << ',' << detail::fmt(r.gamma_pm_0) << ',' << detail::fmt(r.gamma_pm_1) << ','
        << flags << "\n";
  }
}

inline void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out, rows);
  if (!out) throw IoError("write failed for " + path);
}

inline std::vector<ResultRow> read_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != csv_columns().size()) throw Error("malformed CSV row");
    ResultRow r;
    r.sweep_name = f[0];
    r.sweep_value = detail::unfmt(f[1]);
    r.engine = f[2];
    double* nums[] = {&r.gamma_phi, &r.gamma_plus, &r.gamma_minus, &r.T1, &r.T2, &r.omega_bar,
                      &r.gamma_phi_0, &r.gamma_phi_1, &r.gamma_pm_0, &r.gamma_pm_1};
    for (int i = 0; i < 10; ++i) *nums[i] = detail::unfmt(f[static_cast<std::size_t>(3 + i)]);
    std::stringstream fs(f[13]);
    std::string flag;
    while (std::getline(fs, flag, ';'))
      if (!flag.empty()) r.flags.push_back(flag);
    r.failed = std::any_of(r.flags.begin(), r.flags.end(), [](const std::string& s) { return s.rfind("error:", 0) == 0; });
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json row_json(const ResultRow& r) {
  auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"sweep_name", r.sweep_name}, {"sweep_value", r.sweep_value}, {"engine", r.engine},
          {"gamma_phi", num(r.gamma_phi)}, {"gamma_plus", num(r.gamma_plus)}, {"gamma_minus", num(r.gamma_minus)},
          {"T1_us", num(r.T1)}, {"T2_us", num(r.T2)}, {"omega_bar", num(r.omega_bar)},
          {"gamma_phi_0", num(r.gamma_phi_0)}, {"gamma_phi_1", num(r.gamma_phi_1)},
          {"gamma_pm_0", num(r.gamma_pm_0)}, {"gamma_pm_1", num(r.gamma_pm_1)}, {"flags", r.flags}};
}

}  // namespace nvspin
