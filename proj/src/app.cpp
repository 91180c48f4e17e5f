#include "diraclat/app.hpp"

#include "diraclat/heat_kernel.hpp"
#include "diraclat/lattice_sums.hpp"
#include "diraclat/oracle.hpp"
#include "diraclat/parallel.hpp"
#include "diraclat/quadrature.hpp"
#include "diraclat/scattering.hpp"
#include "diraclat/spectral.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <variant>

#ifndef DIRACLAT_VERSION
#define DIRACLAT_VERSION "0.0.0"
#endif

namespace diraclat::app {

using nlohmann::json;

const char* version() { return DIRACLAT_VERSION; }

namespace {

// ---- logging -------------------------------------------------------------

enum class LogLevel { Off, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("CASIMIR_LOG");
  if (!env) return LogLevel::Off;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Off;
}

void log_line(std::ostream& log, LogLevel level, const std::string& msg) {
  const LogLevel active = log_level();
  if (active == LogLevel::Off || level > active) return;
  log << (level == LogLevel::Debug ? "[debug] " : "[info] ") << msg << '\n';
}

// ---- config parsing ------------------------------------------------------

const std::set<std::string> kTasks = {"energy", "free-energy", "sum", "heat-kernel", "validate"};

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field + " must be finite");
  return x;
}

double positive(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x > 0.0)) {
    std::ostringstream os;
    os << field << " must be > 0, got " << x;
    throw ConfigError(os.str());
  }
  return x;
}

Vec2 vec2(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(field + " must be an array of two numbers");
  return Vec2(number(v[0], field + "[0]"), number(v[1], field + "[1]"));
}

// Explicit list or {"start", "stop", "count"} geometric grid; strictly increasing, positive.
std::vector<double> sweep_list(const json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(positive(v[i], field + "[" + std::to_string(i) + "]"));
  } else if (v.is_object()) {
    reject_unknown(v, field, {"start", "stop", "count"});
    if (!v.contains("start") || !v.contains("stop") || !v.contains("count"))
      throw ConfigError(field + " geometric grid needs start, stop and count");
    const double start = positive(v["start"], field + ".start");
    const double stop = positive(v["stop"], field + ".stop");
    if (!v["count"].is_number_integer() || v["count"].get<long long>() < 1)
      throw ConfigError(field + ".count must be a positive integer");
    const auto count = v["count"].get<int>();
    if (count == 1) {
      out.push_back(start);
    } else {
      for (int i = 0; i < count; ++i) out.push_back(start * std::pow(stop / start, static_cast<double>(i) / (count - 1)));
      out.back() = stop;
    }
  } else {
    throw ConfigError(field + " must be a list or a geometric grid object");
  }
  if (out.empty()) throw ConfigError(field + " must not be empty");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw ConfigError(field + " must be strictly increasing");
  return out;
}

json sweep_json(const std::vector<double>& v) { return json(v); }

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  reject_unknown(doc, "", {"task", "system", "sweep", "tolerances", "output", "free_energy", "sum", "heat_kernel"});

  if (doc.contains("task")) {
    if (!doc["task"].is_string() || !kTasks.count(doc["task"].get<std::string>()))
      throw ConfigError("task must be one of energy, free-energy, sum, heat-kernel, validate");
    cfg.task = doc["task"].get<std::string>();
  }
  if (doc.contains("system")) {
    const json& s = doc["system"];
    reject_unknown(s, "system", {"g_over_a", "b_over_a", "c_over_a"});
    cfg.system_given = true;
    if (s.contains("g_over_a")) {
      cfg.g_over_a = number(s["g_over_a"], "system.g_over_a");
      if (cfg.g_over_a == 0.0) throw ConfigError("system.g_over_a must be nonzero");
    }
    if (s.contains("b_over_a")) cfg.b_over_a = positive(s["b_over_a"], "system.b_over_a");
    if (s.contains("c_over_a")) cfg.c_over_a = vec2(s["c_over_a"], "system.c_over_a");
  }
  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    reject_unknown(s, "sweep", {"b_over_a", "Ta"});
    if (s.contains("b_over_a")) cfg.b_sweep = sweep_list(s["b_over_a"], "sweep.b_over_a");
    if (s.contains("Ta")) cfg.Ta_sweep = sweep_list(s["Ta"], "sweep.Ta");
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    reject_unknown(t, "tolerances", {"sum_tol", "quad_rel_tol", "matsubara_tail_tol"});
    if (t.contains("sum_tol")) cfg.tol.sum_tol = positive(t["sum_tol"], "tolerances.sum_tol");
    if (t.contains("quad_rel_tol")) cfg.tol.quad_rel_tol = positive(t["quad_rel_tol"], "tolerances.quad_rel_tol");
    if (t.contains("matsubara_tail_tol"))
      cfg.tol.matsubara_tail_tol = positive(t["matsubara_tail_tol"], "tolerances.matsubara_tail_tol");
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    reject_unknown(o, "output", {"format", "path"});
    if (o.contains("format")) {
      if (o["format"] == "csv")
        cfg.format = Format::Csv;
      else if (o["format"] == "json")
        cfg.format = Format::Json;
      else
        throw ConfigError("output.format must be csv or json");
    }
    if (o.contains("path")) {
      if (!o["path"].is_string()) throw ConfigError("output.path must be a string");
      cfg.output_path = o["path"].get<std::string>();
    }
  }
  if (doc.contains("free_energy")) {
    const json& f = doc["free_energy"];
    reject_unknown(f, "free_energy", {"high_T_columns"});
    if (f.contains("high_T_columns")) {
      if (!f["high_T_columns"].is_boolean()) throw ConfigError("free_energy.high_T_columns must be a boolean");
      cfg.high_T_columns = f["high_T_columns"].get<bool>();
    }
  }
  if (doc.contains("sum")) {
    const json& s = doc["sum"];
    reject_unknown(s, "sum", {"xi", "q"});
    if (s.contains("xi")) {
      if (!s["xi"].is_array() || s["xi"].empty()) throw ConfigError("sum.xi must be a non-empty list");
      cfg.sum_xi.clear();
      for (std::size_t i = 0; i < s["xi"].size(); ++i) {
        const double xi = number(s["xi"][i], "sum.xi[" + std::to_string(i) + "]");
        if (xi < 0.0) throw ConfigError("sum.xi entries must be >= 0");
        cfg.sum_xi.push_back(xi);
      }
    }
    if (s.contains("q")) {
      if (!s["q"].is_array() || s["q"].empty()) throw ConfigError("sum.q must be a non-empty list of pairs");
      cfg.sum_q.clear();
      for (std::size_t i = 0; i < s["q"].size(); ++i) cfg.sum_q.push_back(vec2(s["q"][i], "sum.q[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("heat_kernel")) {
    const json& h = doc["heat_kernel"];
    reject_unknown(h, "heat_kernel", {"t_grid", "g", "n_side", "volume"});
    if (h.contains("t_grid")) cfg.hk_t_grid = sweep_list(h["t_grid"], "heat_kernel.t_grid");
    if (h.contains("g")) cfg.hk_g = positive(h["g"], "heat_kernel.g");
    if (h.contains("n_side")) {
      if (!h["n_side"].is_number_integer() || h["n_side"].get<long long>() < 1)
        throw ConfigError("heat_kernel.n_side must be a positive integer");
      cfg.hk_n_side = h["n_side"].get<int>();
    }
    if (h.contains("volume")) cfg.hk_volume = positive(h["volume"], "heat_kernel.volume");
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["task"] = cfg.task;
  doc["system"] = {{"g_over_a", cfg.g_over_a},
                   {"b_over_a", cfg.b_over_a},
                   {"c_over_a", {cfg.c_over_a.x(), cfg.c_over_a.y()}}};
  doc["sweep"] = {{"b_over_a", sweep_json(cfg.b_sweep)}, {"Ta", sweep_json(cfg.Ta_sweep)}};
  doc["tolerances"] = {{"sum_tol", cfg.tol.sum_tol},
                       {"quad_rel_tol", cfg.tol.quad_rel_tol},
                       {"matsubara_tail_tol", cfg.tol.matsubara_tail_tol}};
  doc["output"] = {{"format", cfg.format == Format::Csv ? "csv" : "json"}, {"path", cfg.output_path}};
  doc["free_energy"] = {{"high_T_columns", cfg.high_T_columns}};
  json q = json::array();
  for (const Vec2& v : cfg.sum_q) q.push_back({v.x(), v.y()});
  doc["sum"] = {{"xi", cfg.sum_xi}, {"q", q}};
  doc["heat_kernel"] = {{"t_grid", cfg.hk_t_grid}, {"g", cfg.hk_g}, {"n_side", cfg.hk_n_side}, {"volume", cfg.hk_volume}};
  return doc.dump(2);
}

namespace {

// ---- output tables -------------------------------------------------------

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json extra = json::object();
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              out << format_double(v);
            else
              out << v;
          },
          row[i]);
    }
    out << '\n';
  }
}

void write_json(const Table& t, const RunConfig& cfg, std::ostream& out) {
  json doc;
  doc["version"] = version();
  doc["config"] = json::parse(config_to_json(cfg));
  doc["columns"] = t.columns;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) std::visit([&](const auto& v) { r.push_back(v); }, c);
    rows.push_back(r);
  }
  doc["rows"] = rows;
  for (auto it = t.extra.begin(); it != t.extra.end(); ++it) doc[it.key()] = it.value();
  out << doc.dump(2) << '\n';
}

std::string where_text(const Error& e) {
  if (!e.where()) return "";
  std::ostringstream os;
  os << " at xi = " << format_double(e.where()->xi) << ", q = (" << format_double(e.where()->q.x()) << ", "
     << format_double(e.where()->q.y()) << ")";
  return os.str();
}

// ---- commands ------------------------------------------------------------

LatticeSystem system_of(const RunConfig& cfg, double b) { return make_system(cfg.g_over_a, b, cfg.c_over_a); }

Table cmd_energy(const RunConfig& cfg, std::ostream& log) {
  Table t;
  t.columns = {"b_over_a", "E0", "err", "kernel_evals"};
  const std::vector<double> bs = cfg.b_sweep.empty() ? std::vector<double>{cfg.b_over_a} : cfg.b_sweep;
  for (double b : bs) {
    log_line(log, LogLevel::Info, "vacuum energy at b_over_a = " + format_double(b));
    const EnergyResult e = vacuum_energy(system_of(cfg, b), cfg.tol);
    t.rows.push_back({b, e.value, e.err_estimate, static_cast<long long>(e.diagnostics.at("kernel_evals"))});
  }
  return t;
}

Table cmd_free_energy(const RunConfig& cfg, std::ostream& log) {
  if (cfg.Ta_sweep.empty()) throw ConfigError("free-energy needs sweep.Ta");
  const LatticeSystem sys = system_of(cfg, cfg.b_over_a);
  Table t;
  t.columns = {"Ta", "F", "err", "n_max", "tail_bound"};
  double zeta = 0.0;
  if (cfg.high_T_columns) {
    t.columns.push_back("n0_term");
    t.columns.push_back("high_T_asymptote");
    zeta = zeta_prime_zero(sys, cfg.tol);
  }
  for (double Ta : cfg.Ta_sweep) {
    log_line(log, LogLevel::Info, "free energy at Ta = " + format_double(Ta));
    const auto [f, grid] = free_energy(sys, Ta, cfg.tol);
    std::vector<Cell> row{Ta, f.value, f.err_estimate, static_cast<long long>(grid.n_max), grid.tail_bound};
    if (cfg.high_T_columns) {
      row.emplace_back(matsubara_split(sys, Ta, cfg.tol).zero_term.value);
      row.emplace_back(high_T_asymptote(Ta, zeta, 0.0, 0.0, 0.0));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_sum(const RunConfig& cfg) {
  Table t;
  t.columns = {"xi", "q1", "q2", "method", "S", "err", "terms", "phi_tilde"};
  const LatticeSystem sys = system_of(cfg, cfg.b_over_a);
  for (double xi : cfg.sum_xi) {
    for (const Vec2& q : cfg.sum_q) {
      const ScreenedSum s = screened_sum(xi, q, cfg.tol.sum_tol);
      const double phi = 1.0 / sys.g_over_a() + s.value / (2.0 * kTwoPi);
      t.rows.push_back({xi, q.x(), q.y(), std::string(s.method == SumMethod::Direct ? "direct" : "ewald"), s.value,
                        s.err_estimate, static_cast<long long>(s.terms), phi});
    }
  }
  return t;
}

Table cmd_heat_kernel(const RunConfig& cfg) {
  Table t;
  t.columns = {"t", "exact_single_delta", "born0", "born1", "born1_per_site"};
  for (double tt : cfg.hk_t_grid) {
    t.rows.push_back({tt, exact_single_delta_trace(tt, cfg.hk_g).value, born0(tt, cfg.hk_volume).value,
                      born1(tt, cfg.hk_g, cfg.hk_n_side).value, born1_per_site(tt, cfg.hk_g).value});
  }
  if (cfg.hk_t_grid.size() >= 4 && cfg.hk_t_grid.back() <= 0.1) {
    json fits = json::object();
    for (const auto& [name, fit] : hk_coefficient_report(cfg.hk_t_grid, cfg.hk_g, cfg.hk_n_side, cfg.hk_volume)) {
      fits[name] = {{"exponent", fit.exponent},
                    {"coefficient", fit.coefficient},
                    {"slot", fit.slot},
                    {"a_coefficient", fit.a_coefficient},
                    {"residual", fit.residual}};
    }
    t.extra["fits"] = fits;
  }
  return t;
}

// ---- validation ----------------------------------------------------------

struct Check {
  std::string name;
  std::string group;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

// exp(x^2) erfc(x) = (2/sqrt(pi)) int_0^inf exp(-u^2 - 2 x u) du by adaptive quadrature.
double erfcx_by_quadrature(double x) {
  const HalfLineMap map{1.0 / (1.0 + x)};
  auto f = [&](double u) {
    const double s = map.x(u);
    return std::exp(-s * s - 2.0 * x * s) * map.jacobian(u);
  };
  const std::vector<double> bp{0.0, 0.5, 1.0};
  const QuadResult<double> r = integrate(f, std::span<const double>(bp), QuadOptions{0.0, 1e-14, 2000, false});
  return 2.0 / std::sqrt(kPi) * r.value;
}

Check relative_check(std::string name, std::string group, double value, double reference, double tol) {
  Check c;
  c.name = std::move(name);
  c.group = std::move(group);
  c.measured = std::abs(value / reference - 1.0);
  c.tolerance = tol;
  c.passed = c.measured <= tol;
  c.note = "value " + format_double(value) + " reference " + format_double(reference);
  return c;
}

void guarded(std::vector<Check>& out, const std::string& name, const std::string& group,
             const std::function<Check()>& body) {
  try {
    out.push_back(body());
  } catch (const Error& e) {
    Check c;
    c.name = name;
    c.group = group;
    c.measured = std::numeric_limits<double>::quiet_NaN();
    c.note = std::string("regime flag ") + to_string(e.kind()) + ": " + e.what();
    out.push_back(c);
  }
}

std::vector<Check> run_checks(const RunConfig& cfg, const std::string& only, std::ostream& log) {
  static const std::set<std::string> groups = {"ewald", "two-center", "lifshitz", "finite-lattice", "heat-kernel",
                                               "zero-frequency"};
  if (!only.empty() && !groups.count(only))
    throw ConfigError("--only must be one of ewald, two-center, lifshitz, finite-lattice, heat-kernel, zero-frequency");
  auto wanted = [&](const char* g) { return only.empty() || only == g; };
  // The config's system replaces the weak-coupling defaults when given explicitly.
  const double g = cfg.system_given ? cfg.g_over_a : 0.01;
  const double b = cfg.system_given ? cfg.b_over_a : 5.0;
  const Vec2 c = cfg.system_given ? cfg.c_over_a : Vec2::Zero();
  std::vector<Check> checks;

  if (wanted("ewald")) {
    log_line(log, LogLevel::Info, "checking Ewald against direct sums");
    guarded(checks, "ewald_vs_direct", "ewald", [&] {
      double worst = 0.0;
      for (double xi : {0.5, 1.0, 2.0, 5.0})
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j) {
            const Vec2 q(-kPi + kTwoPi * (i + 0.5) / 5.0, -kPi + kTwoPi * (j + 0.5) / 5.0);
            const double d = ewald_sum(xi, q, kDefaultEta, 1e-12).value - direct_sum(xi, q, 1e-12).value;
            worst = std::max(worst, std::abs(d));
          }
      return Check{"ewald_vs_direct", "ewald", worst, 2e-12, worst <= 2e-12, "max |ewald - direct|"};
    });
    guarded(checks, "ewald_eta_independence", "ewald", [&] {
      double worst = 0.0;
      for (double xi : {0.0, 0.5, 1.0, 2.0})
        for (const Vec2& q : {Vec2(1.0, 0.0), Vec2(kPi, kPi), Vec2(0.3, -2.0)}) {
          const double d = ewald_sum(xi, q, kDefaultEta, 1e-12).value - ewald_sum(xi, q, 2.0 * kDefaultEta, 1e-12).value;
          worst = std::max(worst, std::abs(d));
        }
      return Check{"ewald_eta_independence", "ewald", worst, 1e-10, worst <= 1e-10, "eta and 2 eta"};
    });
  }
  if (wanted("two-center")) {
    log_line(log, LogLevel::Info, "checking the single-site lattice against two centres");
    guarded(checks, "two_center", "two-center", [&] {
      const LatticeSystem sys = make_system(g, b, Vec2::Zero());
      const double e = finite_lattice_energy({1, sys}, cfg.tol).total.value;
      const double ref = two_center_energy(g, b);
      const double d = std::abs(e - ref);
      return Check{"two_center", "two-center", d, 1e-8, d <= 1e-8,
                   "value " + format_double(e) + " reference " + format_double(ref)};
    });
  }
  if (wanted("lifshitz")) {
    log_line(log, LogLevel::Info, "checking the weak-coupling plate limit");
    guarded(checks, "lifshitz", "lifshitz", [&] {
      const LatticeSystem sys = make_system(g, b, c);
      const double e0 = vacuum_energy(sys, cfg.tol).value;
      const double plates = lifshitz_plates(sys, cfg.tol).value;
      return relative_check("lifshitz", "lifshitz", e0, plates, 0.01);
    });
  }
  if (wanted("finite-lattice")) {
    log_line(log, LogLevel::Info, "checking finite lattices against the periodic energy");
    guarded(checks, "finite_lattice", "finite-lattice", [&] {
      const LatticeSystem sys = make_system(0.1, 1.0, Vec2::Zero());
      std::vector<int> sizes{3, 5, 7, 9};
      std::vector<double> per_cell;
      for (int n : sizes) per_cell.push_back(finite_lattice_energy({n, sys}, cfg.tol).per_cell.value);
      const double extrapolated = richardson_tableau(sizes, per_cell);
      const double e0 = vacuum_energy(sys, cfg.tol).value;
      return relative_check("finite_lattice", "finite-lattice", extrapolated, e0, 0.02);
    });
  }
  if (wanted("heat-kernel")) {
    log_line(log, LogLevel::Info, "checking heat-kernel traces");
    guarded(checks, "heat_kernel_born1", "heat-kernel", [&] {
      const double exact = exact_single_delta_trace(1.0, 0.01).value;
      const double born = born1_per_site(1.0, 0.01).value;
      return relative_check("heat_kernel_born1", "heat-kernel", exact, born, 0.01);
    });
    guarded(checks, "erfcx_quadrature", "heat-kernel", [&] {
      double worst = 0.0;
      for (int i = 0; i <= 60; ++i) {
        const double x = 0.5 * i;
        worst = std::max(worst, std::abs(erfcx(x) - erfcx_by_quadrature(x)));
      }
      return Check{"erfcx_quadrature", "heat-kernel", worst, 1e-12, worst <= 1e-12, "x in [0, 30]"};
    });
  }
  if (wanted("zero-frequency")) {
    log_line(log, LogLevel::Info, "checking the zero-frequency reflection limit");
    guarded(checks, "zero_frequency", "zero-frequency", [&] {
      // strong enough coupling that the 1/g remainder of phi~ is small against 2 pi / |q|
      const LatticeSystem sys = make_system(cfg.system_given ? g : 1.0, b, c);
      const double q = 1e-3;
      const double h2 = reflection_kernel(sys, 0.0, Vec2(q, 0.0), cfg.tol).h_abs2;
      return relative_check("zero_frequency", "zero-frequency", h2, std::exp(-2.0 * q * sys.b_over_a()), 0.01);
    });
  }
  return checks;
}

Table cmd_validate(const RunConfig& cfg, const std::string& only, std::ostream& log, bool& all_passed) {
  Table t;
  t.columns = {"check", "group", "measured", "tolerance", "status", "note"};
  all_passed = true;
  for (const Check& c : run_checks(cfg, only, log)) {
    all_passed = all_passed && c.passed;
    t.rows.push_back({c.name, c.group, c.measured, c.tolerance, std::string(c.passed ? "PASS" : "FAIL"), c.note});
  }
  return t;
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& log, const std::string& only) {
  if (!kTasks.count(cfg.task)) {
    log << "error: unknown task '" << cfg.task << "'\n";
    return kExitConfig;
  }
  try {
    cfg.tol.validate();
    (void)make_system(cfg.g_over_a, cfg.b_over_a, cfg.c_over_a);
    Table t;
    bool passed = true;
    if (cfg.task == "energy")
      t = cmd_energy(cfg, log);
    else if (cfg.task == "free-energy")
      t = cmd_free_energy(cfg, log);
    else if (cfg.task == "sum")
      t = cmd_sum(cfg);
    else if (cfg.task == "heat-kernel")
      t = cmd_heat_kernel(cfg);
    else
      t = cmd_validate(cfg, only, log, passed);
    if (cfg.format == Format::Csv)
      write_csv(t, out);
    else
      write_json(t, cfg, out);
    return passed ? kExitOk : kExitValidationFailed;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::InvalidArgument:
      case ErrorKind::NonPositiveSeparation:
      case ErrorKind::ZeroCoupling:
      case ErrorKind::WindowTooNarrow:
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
      default:
        log << "numerical failure (" << to_string(e.kind()) << "): " << e.what() << where_text(e) << '\n';
        return kExitNumerical;
    }
  }
}

int run(const Invocation& inv, std::ostream& out, std::ostream& log) {
  RunConfig cfg;
  try {
    if (!inv.config_path.empty()) {
      std::ifstream in(inv.config_path);
      if (!in) throw ConfigError("cannot read config file " + inv.config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      cfg = parse_config(buf.str());
    }
    if (!cfg.task.empty() && cfg.task != inv.command)
      throw ConfigError("config task '" + cfg.task + "' does not match command '" + inv.command + "'");
    cfg.task = inv.command;
    if (inv.format) {
      if (*inv.format == "csv")
        cfg.format = Format::Csv;
      else if (*inv.format == "json")
        cfg.format = Format::Json;
      else
        throw ConfigError("--format must be csv or json");
    }
    if (inv.output_path) cfg.output_path = *inv.output_path;
    if (inv.threads < 0) throw ConfigError("--threads must be >= 0");
    if (!inv.only.empty() && inv.command != "validate") throw ConfigError("--only applies to validate");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (inv.threads > 0) set_max_threads(inv.threads);
  if (log_level() == LogLevel::Debug) log << "[debug] resolved config " << config_to_json(cfg) << '\n';

  if (cfg.output_path.empty()) return execute(cfg, out, log, inv.only);
  std::ostringstream buffer;
  const int code = execute(cfg, buffer, log, inv.only);
  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) {
    log << "config error: cannot write output file " << cfg.output_path << '\n';
    return kExitConfig;
  }
  file << buffer.str();
  return code;
}

}  // namespace diraclat::app
