#pragma once

// Run configuration: sectioned key = value text.
//
//   schema_version = 1
//   [grid]         dimension, lengths, resolution, rescale_measure
//   [exponents]    p1..pN (interior), q1..q{N-1} (boundary): expressions
//   [coefficients] alpha, beta: expressions; eps_reg; stencil = staggered|nodal
//   [initial]      u0, v0: expressions
//   [flow]         tau, horizon, grad_tol, max_iter, snapshot_stride
//   [constants]    a b c p q d1 d2, c_star_p c_star_q c_eps c_eps2 kappa_p
//                  kappa_q G_p G_q C1, c_omega
//   [verify]       checks, pairs, horizon, r, tolerance, fit_times, scaling_t
//   [output]       dir, seed
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#include "wlab/constants.hpp"
#include "wlab/energy.hpp"
#include "wlab/expr.hpp"
#include "wlab/flow.hpp"
#include "wlab/grid.hpp"
#include "wlab/varexp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
  int line;
};

struct IniEntry {
  std::string value;
  int line = 0;
};

using IniSection = std::map<std::string, IniEntry>;
using IniDocument = std::map<std::string, IniSection>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"schema_version"}},
      {"grid", {"dimension", "lengths", "resolution", "rescale_measure"}},
      {"exponents", {"p1", "p2", "p3", "q1", "q2"}},
      {"coefficients", {"alpha", "beta", "eps_reg", "stencil"}},
      {"initial", {"u0", "v0"}},
      {"flow", {"tau", "horizon", "grad_tol", "max_iter", "snapshot_stride"}},
      {"constants",
       {"a", "b", "c", "p", "q", "d1", "d2", "c_star_p", "c_star_q", "c_eps", "c_eps2", "kappa_p", "kappa_q", "G_p",
        "G_q", "C1", "c_omega"}},
      {"verify", {"checks", "pairs", "horizon", "r", "tolerance", "fit_times", "scaling_t"}},
      {"output", {"dir", "seed"}},
  };
  return s;
}

}  // namespace detail

inline IniDocument parse_ini(std::istream& in) {
  IniDocument doc;
  doc[""];
  std::string section;
  std::string raw;
  int line = 0;
  const auto& sch = detail::schema();
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = detail::trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = detail::trim(s.substr(1, s.size() - 2));
      if (!sch.count(section) || section.empty()) throw ConfigError("unknown section [" + section + "]", line);
      if (doc.count(section)) throw ConfigError("duplicate section [" + section + "]", line);
      doc[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (!sch.at(section).count(key)) {
      throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), line);
    }
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    if (doc[section].count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    doc[section][key] = {value, line};
  }
  return doc;
}

inline IniDocument parse_ini_text(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

struct RunConfig {
  GridSpec grid;
  bool rescale_measure = false;
  std::vector<Expression> p, q;
  Expression alpha{"1"}, beta{"1"};
  double eps_reg = 1e-8;
  Stencil stencil = Stencil::staggered;
  Expression u0{"0"};
  std::optional<Expression> v0;
  FlowConfig flow;
  double horizon = 0.5;
  int snapshot_stride = 0;
  BranchInputs branch;
  bool branch_given = false;
  UnknownConstants unknowns;
  double c_omega = 1.0;
  std::vector<std::string> checks;
  int pairs = 5;
  double verify_horizon = 0.1;
  std::vector<double> verify_r{2.0};
  std::optional<double> tolerance;
  std::vector<double> fit_times;
  double scaling_t = 0.05;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

namespace detail {

class Reader {
 public:
  explicit Reader(const IniDocument& d) : doc_(d) {}

  const IniEntry* find(const std::string& sec, const std::string& key) const {
    const auto s = doc_.find(sec);
    if (s == doc_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  double number(const IniEntry& e, const std::string& key) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' must be a number, got '" + e.value + "'", e.line);
    }
  }
  double number(const std::string& sec, const std::string& key, double def) const {
    const auto* e = find(sec, key);
    return e ? number(*e, key) : def;
  }
  long integer(const std::string& sec, const std::string& key, long def) const {
    const auto* e = find(sec, key);
    if (!e) return def;
    const double v = number(*e, key);
    if (v != std::floor(v)) throw ConfigError("'" + key + "' must be an integer", e->line);
    return static_cast<long>(v);
  }
  bool boolean(const std::string& sec, const std::string& key, bool def) const {
    const auto* e = find(sec, key);
    if (!e) return def;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError("'" + key + "' must be true or false", e->line);
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key) const {
    std::vector<double> out;
    const auto* e = find(sec, key);
    if (!e) return out;
    std::string tok;
    std::istringstream in(e->value);
    while (in >> tok) {
      if (tok.back() == ',') tok.pop_back();
      if (!tok.empty()) out.push_back(number(IniEntry{tok, e->line}, key));
    }
    return out;
  }
  std::vector<std::string> words(const std::string& sec, const std::string& key) const {
    std::vector<std::string> out;
    const auto* e = find(sec, key);
    if (!e) return out;
    std::string v = e->value;
    for (auto& ch : v) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  Expression expression(const std::string& sec, const std::string& key, const std::string& def) const {
    const auto* e = find(sec, key);
    try {
      return Expression(e ? e->value : def);
    } catch (const ExprError& err) {
      throw ConfigError("'" + key + "': " + err.what(), e ? e->line : 0);
    }
  }
  int line(const std::string& sec, const std::string& key) const {
    const auto* e = find(sec, key);
    return e ? e->line : 0;
  }

 private:
  const IniDocument& doc_;
};

}  // namespace detail

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> c = {"energy_decay", "order_preserving", "nonexpansive", "submarkovian",
                                             "dissipation",  "sup_accretive",    "ultracontractivity", "proximal_residual"};
  return c;
}

inline RunConfig build_config(const IniDocument& doc) {
  detail::Reader r(doc);
  RunConfig c;
  const auto* ver = r.find("", "schema_version");
  if (!ver) throw ConfigError("missing schema_version");
  if (r.number(*ver, "schema_version") != 1.0) throw ConfigError("unsupported schema_version " + ver->value, ver->line);

  const long dim = r.integer("grid", "dimension", 2);
  if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3", r.line("grid", "dimension"));
  c.grid.dimension = static_cast<int>(dim);
  auto lengths = r.numbers("grid", "lengths");
  auto res = r.numbers("grid", "resolution");
  if (lengths.empty()) lengths.assign(static_cast<std::size_t>(dim), 1.0);
  if (res.empty()) res.assign(static_cast<std::size_t>(dim), 17.0);
  if (lengths.size() == 1) lengths.assign(static_cast<std::size_t>(dim), lengths[0]);
  if (res.size() == 1) res.assign(static_cast<std::size_t>(dim), res[0]);
  if (lengths.size() != static_cast<std::size_t>(dim)) throw ConfigError("lengths needs one value per axis", r.line("grid", "lengths"));
  if (res.size() != static_cast<std::size_t>(dim)) throw ConfigError("resolution needs one value per axis", r.line("grid", "resolution"));
  c.grid.lengths.clear();
  c.grid.resolution.clear();
  for (std::size_t a = 0; a < lengths.size(); ++a) {
    if (!(lengths[a] > 0.0)) throw ConfigError("lengths must be positive", r.line("grid", "lengths"));
    if (res[a] < 3 || res[a] != std::floor(res[a])) throw ConfigError("resolution must be an integer >= 3", r.line("grid", "resolution"));
    c.grid.lengths.push_back(lengths[a]);
    c.grid.resolution.push_back(static_cast<int>(res[a]));
  }
  c.rescale_measure = r.boolean("grid", "rescale_measure", false);

  for (long i = 1; i <= 3; ++i) {
    const std::string key = "p" + std::to_string(i);
    if (i <= dim) {
      c.p.push_back(r.expression("exponents", key, "2"));
    } else if (r.find("exponents", key)) {
      throw ConfigError("'" + key + "' exceeds the dimension", r.line("exponents", key));
    }
  }
  for (long j = 1; j <= 2; ++j) {
    const std::string key = "q" + std::to_string(j);
    if (j < dim) {
      c.q.push_back(r.expression("exponents", key, "2"));
    } else if (r.find("exponents", key)) {
      throw ConfigError("'" + key + "' exceeds the boundary dimension", r.line("exponents", key));
    }
  }
  c.alpha = r.expression("coefficients", "alpha", "1");
  c.beta = r.expression("coefficients", "beta", "1");
  c.eps_reg = r.number("coefficients", "eps_reg", 1e-8);
  if (const auto* st = r.find("coefficients", "stencil")) {
    if (st->value == "staggered") {
      c.stencil = Stencil::staggered;
    } else if (st->value == "nodal") {
      c.stencil = Stencil::nodal;
    } else {
      throw ConfigError("stencil must be staggered or nodal", st->line);
    }
  }
  c.u0 = r.expression("initial", "u0", "0");
  if (r.find("initial", "v0")) c.v0 = r.expression("initial", "v0", "0");

  c.flow.tau = r.number("flow", "tau", 1e-2);
  c.flow.grad_tol = r.number("flow", "grad_tol", 1e-10);
  c.flow.max_iter = static_cast<int>(r.integer("flow", "max_iter", 100));
  c.flow.eps_reg = c.eps_reg;
  c.horizon = r.number("flow", "horizon", 0.5);
  c.snapshot_stride = static_cast<int>(r.integer("flow", "snapshot_stride", 0));
  try {
    c.flow.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), r.line("flow", "tau"));
  }
  if (!(c.horizon > 0.0)) throw ConfigError("horizon must be positive", r.line("flow", "horizon"));
  if (c.snapshot_stride < 0) throw ConfigError("snapshot_stride must be >= 0", r.line("flow", "snapshot_stride"));

  auto& b = c.branch;
  c.branch_given = doc.count("constants") && !doc.at("constants").empty();
  b.a = r.number("constants", "a", b.a);
  b.b = r.number("constants", "b", b.b);
  b.c = r.number("constants", "c", b.c);
  b.p = r.number("constants", "p", b.p);
  b.q = r.number("constants", "q", b.q);
  b.d1 = r.number("constants", "d1", std::max(b.p, b.d1));
  b.d2 = r.number("constants", "d2", std::max(b.q, b.d2));
  auto& k = c.unknowns;
  k.c_star_p = r.number("constants", "c_star_p", k.c_star_p);
  k.c_star_q = r.number("constants", "c_star_q", k.c_star_q);
  k.c_eps = r.number("constants", "c_eps", k.c_eps);
  k.c_eps2 = r.number("constants", "c_eps2", k.c_eps2);
  k.kappa_p = r.number("constants", "kappa_p", k.kappa_p);
  k.kappa_q = r.number("constants", "kappa_q", k.kappa_q);
  k.G_p = r.number("constants", "G_p", k.G_p);
  k.G_q = r.number("constants", "G_q", k.G_q);
  k.C1 = r.number("constants", "C1", k.C1);
  c.c_omega = r.number("constants", "c_omega", 1.0);
  try {
    b.validate();
    k.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[constants] ") + e.what(), r.line("constants", "a"));
  }
  if (!(c.c_omega > 0.0)) throw ConfigError("c_omega must be positive", r.line("constants", "c_omega"));

  c.checks = r.words("verify", "checks");
  for (const auto& name : c.checks) {
    const auto& known = known_checks();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown check '" + name + "'", r.line("verify", "checks"));
    }
  }
  c.pairs = static_cast<int>(r.integer("verify", "pairs", 5));
  if (c.pairs < 1) throw ConfigError("pairs must be >= 1", r.line("verify", "pairs"));
  c.verify_horizon = r.number("verify", "horizon", 0.1);
  if (!(c.verify_horizon > 0.0)) throw ConfigError("verify horizon must be positive", r.line("verify", "horizon"));
  if (r.find("verify", "r")) c.verify_r = r.numbers("verify", "r");
  for (double v : c.verify_r) {
    if (!(v >= 2.0)) throw ConfigError("verify r must be >= 2", r.line("verify", "r"));
  }
  if (r.find("verify", "tolerance")) {
    c.tolerance = r.number("verify", "tolerance", 0.0);
    if (*c.tolerance < 0.0) throw ConfigError("tolerance must be >= 0", r.line("verify", "tolerance"));
  }
  c.fit_times = r.numbers("verify", "fit_times");
  c.scaling_t = r.number("verify", "scaling_t", 0.05);

  if (const auto* d = r.find("output", "dir")) c.out_dir = d->value;
  const double seed = r.number("output", "seed", 1.0);
  if (seed < 0 || seed != std::floor(seed)) throw ConfigError("seed must be a nonnegative integer", r.line("output", "seed"));
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return build_config(parse_ini(in));
}

/// Objects assembled from a config: grid, exponents, coefficients and energy.
struct Problem {
  Grid grid;
  VectorExponent exponents;
  CoefficientField coefficients;
  WentzellEnergy energy;
  double measure = 0.0;  // m_sigma of the closed domain before any rescaling
  bool rescaled = false;

  static Problem build(const RunConfig& c) {
    GridSpec spec = c.grid;
    double m = 0.0;
    try {
      m = Grid(spec).total_measure();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    bool rescaled = false;
    if (c.rescale_measure && std::abs(m - 1.0) > 1e-12) {
      spec.measure_scale = 1.0 / m;
      rescaled = true;
    }
    const Grid g(spec);
    auto field = [&](const Expression& e, bool boundary, const char* what) {
      Field f = boundary ? sample_boundary(g, e) : sample_nodes(g, e);
      if (!f.allFinite()) throw ConfigError(std::string(what) + " expression '" + e.text() + "' is not finite on the grid");
      return f;
    };
    std::vector<ExponentField> p, q;
    try {
      for (const auto& e : c.p) p.emplace_back(field(e, false, "exponent"));
      for (const auto& e : c.q) q.emplace_back(field(e, true, "exponent"));
      VectorExponent ex(std::move(p), std::move(q));
      CoefficientField coef(field(c.alpha, false, "alpha"), field(c.beta, true, "beta"));
      WentzellEnergy en(g, ex, coef, c.eps_reg, c.stencil);
      return Problem{g, ex, coef, en, m, rescaled};
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  PairFunction initial(const Expression& e) const {
    const Field u = sample_nodes(grid, e);
    if (!u.allFinite()) throw ConfigError("initial data '" + e.text() + "' is not finite on the grid");
    return PairFunction::conforming(grid, u);
  }
};

}  // namespace wlab
