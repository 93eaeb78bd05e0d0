#pragma once

// Property checks on flow trajectories: order preservation, non-expansivity
// in variable-exponent pair norms, submarkovianity, dissipation of the
// r-modular, and the ultracontractive decay and scaling fits.

#include "wlab/constants.hpp"
#include "wlab/energy.hpp"
#include "wlab/flow.hpp"
#include "wlab/grid.hpp"
#include "wlab/varexp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wlab {

struct VerificationReport {
  std::string name;
  std::vector<double> residuals;  // one per sample (step or pair)
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::map<std::string, std::string> metadata;
  std::map<std::string, double> values;

  void finalize() {
    worst = residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
    passed = worst <= tolerance;
  }
  /// Folds another report of the same check into this one.
  void merge(const VerificationReport& other) {
    residuals.push_back(other.worst);
    tolerance = std::max(tolerance, other.tolerance);
  }
};

// --------------------------------------------------------- random fields

/// Reproducible uniform variates: mt19937_64 mapped to [0, 1) with 53 bits.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 rng_;
};

/// Smooth trigonometric series sum_k a_k cos(pi m_k.x / L + phi_k) with
/// sum |a_k| = 1, so values lie in [-1, 1].
struct SmoothField {
  struct Mode {
    std::array<int, 3> m{0, 0, 0};
    double amplitude = 0.0;
    double phase = 0.0;
  };
  std::vector<Mode> modes;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  static SmoothField random(Sampler& s, const Grid& g, int count = 4, int max_wave = 3) {
    SmoothField f;
    for (int a = 0; a < g.dimension(); ++a) f.lengths[static_cast<std::size_t>(a)] = g.length(a);
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      Mode m;
      for (int a = 0; a < g.dimension(); ++a) m.m[static_cast<std::size_t>(a)] = s.integer(0, max_wave);
      m.amplitude = s.uniform(-1.0, 1.0);
      m.phase = s.uniform(0.0, 2.0 * std::numbers::pi);
      total += std::abs(m.amplitude);
      f.modes.push_back(m);
    }
    if (total > 0.0) {
      for (auto& m : f.modes) m.amplitude /= total;
    }
    return f;
  }

  double operator()(const std::array<double, 3>& x) const {
    double v = 0.0;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (std::size_t a = 0; a < 3; ++a) arg += std::numbers::pi * m.m[a] * x[a] / lengths[a];
      v += m.amplitude * std::cos(arg);
    }
    return v;
  }
};

inline PairFunction random_pair(Sampler& s, const Grid& g, double scale = 1.0) {
  const auto f = SmoothField::random(s, g);
  return PairFunction::conforming(g, scale * sample_nodes(g, f));
}

/// Exponent field lo + (hi - lo) (1 + f)/2 for a random smooth f.
inline ExponentField random_exponent(Sampler& s, const Grid& g, double lo, double hi, bool boundary) {
  const auto f = SmoothField::random(s, g, 3, 2);
  auto map = [&](const std::array<double, 3>& x) { return lo + (hi - lo) * 0.5 * (1.0 + f(x)); };
  return ExponentField(boundary ? sample_boundary(g, map) : sample_nodes(g, map));
}

inline VectorExponent random_vector_exponent(Sampler& s, const Grid& g, double lo, double hi) {
  std::vector<ExponentField> p, q;
  for (int i = 0; i < g.dimension(); ++i) p.push_back(random_exponent(s, g, lo, hi, false));
  for (int j = 0; j + 1 < g.dimension(); ++j) q.push_back(random_exponent(s, g, lo, hi, true));
  return VectorExponent(std::move(p), std::move(q));
}

// -------------------------------------------------------------- helpers

/// Runs jobs 0..n-1 on at most `threads` workers. Results must be written to
/// per-job slots so the outcome does not depend on scheduling.
inline void run_jobs(std::size_t n, const std::function<void(std::size_t)>& job, unsigned threads = 1) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Coefficient C of the time-discretisation allowance C tau, from the sup
/// difference of the final states at tau and tau/2 (error ~ C tau implies
/// difference ~ C tau / 2).
inline double estimate_tau_allowance(const WentzellEnergy& energy, const PairFunction& u0, double horizon,
                                     const FlowConfig& cfg) {
  FlowConfig half = cfg;
  half.tau = 0.5 * cfg.tau;
  const auto a = evolve(energy, u0, horizon, cfg).final_state();
  const auto b = evolve(energy, u0, horizon, half).final_state();
  return 2.0 * sup_pair_norm(a - b) / cfg.tau;
}

inline void describe(VerificationReport& r, const WentzellEnergy& e, const FlowConfig& cfg) {
  const auto& g = e.grid();
  std::string res;
  for (int a = 0; a < g.dimension(); ++a) res += (a ? "x" : "") + std::to_string(g.resolution(a));
  r.metadata["grid"] = res;
  r.metadata["p_range"] = std::to_string(e.exponents().p_min.min()) + ".." + std::to_string(e.exponents().p_max.max());
  r.metadata["q_range"] = std::to_string(e.exponents().q_min.min()) + ".." + std::to_string(e.exponents().q_max.max());
  r.values["tau"] = cfg.tau;
}

// --------------------------------------------------------------- checks

/// u0 <= v0 nodewise; asserts u_n <= v_n + tol at every node and step.
inline VerificationReport check_order_preserving(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                                                 double horizon, const FlowConfig& cfg, double allowance = 0.0,
                                                 double base_tol = 1e-9) {
  if ((u0.u - v0.u).maxCoeff() > 0.0) throw std::invalid_argument("check_order_preserving: need u0 <= v0");
  VerificationReport r;
  r.name = "order_preserving";
  describe(r, e, cfg);
  const auto tu = evolve(e, u0, horizon, cfg);
  const auto tv = evolve(e, v0, horizon, cfg);
  for (std::size_t n = 0; n < tu.states.size(); ++n) {
    const double viol = std::max((tu.states[n].u - tv.states[n].u).maxCoeff(), (tu.states[n].w - tv.states[n].w).maxCoeff());
    r.residuals.push_back(std::max(0.0, viol));
  }
  r.tolerance = base_tol + allowance;
  r.finalize();
  return r;
}

/// Pair norm of u_n - v_n in X^{r,s}: residual per step is the relative
/// increase over the previous step and over the initial value.
inline VerificationReport check_nonexpansive(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                                             const ExponentField& r_exp, const ExponentField& s_exp, double horizon,
                                             const FlowConfig& cfg, double allowance = 0.0, double base_tol = 1e-6) {
  VerificationReport r;
  r.name = "nonexpansive";
  describe(r, e, cfg);
  const auto& g = e.grid();
  const auto tu = evolve(e, u0, horizon, cfg);
  const auto tv = evolve(e, v0, horizon, cfg);
  const double n0 = pair_norm(g, u0 - v0, r_exp, s_exp);
  r.values["initial_norm"] = n0;
  double prev = n0;
  double last = n0;
  for (std::size_t n = 1; n < tu.states.size(); ++n) {
    const double cur = pair_norm(g, tu.states[n] - tv.states[n], r_exp, s_exp);
    const double scale = n0 > 0.0 ? n0 : 1.0;
    r.residuals.push_back(std::max({0.0, (cur - prev) / scale, (cur - n0) / scale}));
    prev = cur;
    last = cur;
  }
  r.values["final_norm"] = last;
  r.tolerance = base_tol + allowance;
  r.finalize();
  return r;
}

/// sup |u_n - v_n| must not increase from step to step.
inline VerificationReport check_submarkovian(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                                             double horizon, const FlowConfig& cfg, double allowance = 0.0,
                                             double base_tol = 1e-9) {
  VerificationReport r;
  r.name = "submarkovian";
  describe(r, e, cfg);
  const auto tu = evolve(e, u0, horizon, cfg);
  const auto tv = evolve(e, v0, horizon, cfg);
  double prev = sup_pair_norm(u0 - v0);
  for (std::size_t n = 1; n < tu.states.size(); ++n) {
    const double cur = sup_pair_norm(tu.states[n] - tv.states[n]);
    r.residuals.push_back(std::max(0.0, cur - prev));
    prev = cur;
  }
  r.tolerance = base_tol + allowance;
  r.finalize();
  return r;
}

/// Difference quotient of int_Omega |u_n - v_n|^r + int_Gamma |u_n - v_n|^r
/// per step must be <= tol (only the sign is asserted).
inline VerificationReport check_dissipation(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                                            double r_value, double horizon, const FlowConfig& cfg, double tol = 1e-10) {
  if (r_value < 2.0) throw std::invalid_argument("check_dissipation needs r >= 2");
  VerificationReport r;
  r.name = "dissipation";
  describe(r, e, cfg);
  const auto& g = e.grid();
  const auto ro = ExponentField::constant(g.num_nodes(), r_value);
  const auto rg = ExponentField::constant(g.num_boundary(), r_value);
  const auto tu = evolve(e, u0, horizon, cfg);
  const auto tv = evolve(e, v0, horizon, cfg);
  double prev = pair_modular(g, u0 - v0, ro, rg);
  const double scale = std::max(prev, 1e-300);
  for (std::size_t n = 1; n < tu.states.size(); ++n) {
    const double cur = pair_modular(g, tu.states[n] - tv.states[n], ro, rg);
    r.residuals.push_back(std::max(0.0, (cur - prev) / cfg.tau / scale));
    prev = cur;
  }
  r.values["r"] = r_value;
  r.tolerance = tol;
  r.finalize();
  return r;
}

/// Phi(u_{n+1}) <= Phi(u_n) + tol along one trajectory.
inline VerificationReport check_energy_decay(const WentzellEnergy& e, const PairFunction& u0, double horizon,
                                             const FlowConfig& cfg, double tol = 1e-10) {
  VerificationReport r;
  r.name = "energy_decay";
  describe(r, e, cfg);
  const auto tr = evolve(e, u0, horizon, cfg);
  for (std::size_t n = 1; n < tr.energies.size(); ++n) r.residuals.push_back(std::max(0.0, tr.energies[n] - tr.energies[n - 1]));
  r.tolerance = tol;
  r.finalize();
  return r;
}

/// sup |R(u) - R(v)| <= sup |u - v| for the resolvent R at several step sizes.
inline VerificationReport check_sup_accretive(const WentzellEnergy& e, const PairFunction& u, const PairFunction& v,
                                              const std::vector<double>& taus, const FlowConfig& cfg,
                                              double tol = 1e-9) {
  VerificationReport r;
  r.name = "sup_accretive";
  describe(r, e, cfg);
  const double d0 = sup_pair_norm(u - v);
  for (double tau : taus) {
    FlowConfig c = cfg;
    c.tau = tau;
    const auto ru = proximal_step(e, u, c);
    const auto rv = proximal_step(e, v, c);
    r.residuals.push_back(std::max(0.0, sup_pair_norm(ru - rv) - d0));
  }
  r.tolerance = tol;
  r.finalize();
  return r;
}

// ------------------------------------------------- ultracontractive fits

struct DecayFit {
  bool identical = false;
  int samples = 0;
  double kappa_fit = 0.0;
  double c_prime_fit = 0.0;
  double log_c_fit = 0.0;
  double rms = 0.0;
  std::vector<double> times;
  std::vector<double> sup_diff;
};

/// Least-squares fit of log D(t) = log C - kappa log t + C' t with
/// D(t) = sup |u(t) - v(t)| sampled at the given times (multiples of tau).
inline DecayFit fit_decay(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                          const std::vector<double>& sample_times, const FlowConfig& cfg) {
  DecayFit fit;
  if (sup_pair_norm(u0 - v0) == 0.0) {
    fit.identical = true;
    return fit;
  }
  if (sample_times.empty()) throw std::invalid_argument("fit_decay: no sample times");
  const double T = *std::max_element(sample_times.begin(), sample_times.end());
  const auto tu = evolve(e, u0, T, cfg);
  const auto tv = evolve(e, v0, T, cfg);
  for (double t : sample_times) {
    if (!(t > 0.0)) throw std::invalid_argument("fit_decay: sample times must be positive");
    const auto n = static_cast<std::size_t>(std::lround(t / cfg.tau));
    if (n == 0 || n >= tu.states.size()) continue;
    const double d = sup_pair_norm(tu.states[n] - tv.states[n]);
    if (d > 0.0 && std::isfinite(d)) {
      fit.times.push_back(tu.times[n]);
      fit.sup_diff.push_back(d);
    }
  }
  fit.samples = static_cast<int>(fit.times.size());
  if (fit.samples < 4) throw std::runtime_error("fit_decay: fewer than 4 usable samples");
  Eigen::MatrixXd A(fit.samples, 3);
  Eigen::VectorXd y(fit.samples);
  for (int i = 0; i < fit.samples; ++i) {
    const auto k = static_cast<std::size_t>(i);
    A(i, 0) = 1.0;
    A(i, 1) = -std::log(fit.times[k]);
    A(i, 2) = fit.times[k];
    y[i] = std::log(fit.sup_diff[k]);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  fit.log_c_fit = c[0];
  fit.kappa_fit = c[1];
  fit.c_prime_fit = c[2];
  fit.rms = std::sqrt((A * c - y).squaredNorm() / fit.samples);
  return fit;
}

struct ScalingStudy {
  std::vector<double> lambdas;
  std::vector<double> initial_norms;
  std::vector<double> sup_at_t;
  double slope = 0.0;
  double t_star = 0.0;
};

/// Sup difference at t_star for the scaled data (lambda u0, lambda v0),
/// regressed in log-log form against the initial pair norm.
inline ScalingStudy scaling_study(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0,
                                  const std::vector<double>& lambdas, double t_star, const FlowConfig& cfg,
                                  const ExponentField& r_exp, const ExponentField& s_exp, unsigned threads = 1) {
  ScalingStudy st;
  st.lambdas = lambdas;
  st.t_star = t_star;
  st.initial_norms.resize(lambdas.size());
  st.sup_at_t.resize(lambdas.size());
  const auto& g = e.grid();
  run_jobs(
      lambdas.size(),
      [&](std::size_t i) {
        const auto a = u0 * lambdas[i];
        const auto b = v0 * lambdas[i];
        st.initial_norms[i] = pair_norm(g, a - b, r_exp, s_exp);
        const auto ua = evolve(e, a, t_star, cfg).final_state();
        const auto ub = evolve(e, b, t_star, cfg).final_state();
        st.sup_at_t[i] = sup_pair_norm(ua - ub);
      },
      threads);
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  if (n < 2) throw std::invalid_argument("scaling_study: need at least two scales");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::log(st.initial_norms[static_cast<std::size_t>(i)]);
    y[i] = std::log(st.sup_at_t[static_cast<std::size_t>(i)]);
  }
  st.slope = A.colPivHouseholderQr().solve(y)[1];
  return st;
}

struct UltracontractivityFit {
  DecayFit decay;
  ScalingStudy scaling;
  double kappa_stated = 0.0;  // k1
  double kappa_limit = 0.0;   // gamma k1
  double gamma = 1.0;
  /// Smallest C with D(t) <= C e^{C' t} t^{-kappa} |u0 - v0|^gamma over the samples.
  double c_fit_bound = 0.0;
};

inline UltracontractivityFit fit_ultracontractivity(const WentzellEnergy& e, const PairFunction& u0,
                                                    const PairFunction& v0, const ExponentField& r_exp,
                                                    const ExponentField& s_exp, const std::vector<double>& sample_times,
                                                    const FlowConfig& cfg, const UltracontractivityParams& bundle,
                                                    const std::vector<double>& lambdas, double t_star,
                                                    unsigned threads = 1) {
  UltracontractivityFit f;
  f.kappa_stated = bundle.kappa;
  f.kappa_limit = bundle.kappa_alt;
  f.gamma = bundle.gamma;
  f.decay = fit_decay(e, u0, v0, sample_times, cfg);
  if (f.decay.identical) return f;
  const double n0 = pair_norm(e.grid(), u0 - v0, r_exp, s_exp);
  for (std::size_t i = 0; i < f.decay.times.size(); ++i) {
    const double t = f.decay.times[i];
    const double envelope = std::exp(f.decay.c_prime_fit * t) * std::pow(t, -f.decay.kappa_fit) * std::pow(n0, f.gamma);
    f.c_fit_bound = std::max(f.c_fit_bound, f.decay.sup_diff[i] / envelope);
  }
  if (!lambdas.empty()) f.scaling = scaling_study(e, u0, v0, lambdas, t_star, cfg, r_exp, s_exp, threads);
  return f;
}

// ----------------------------------------------------- log-Sobolev fit

struct LogSobolevFit {
  std::vector<double> eps;
  std::vector<double> c_fit;  // smallest admissible C'_eps per eps
  bool finite = true;
};

namespace detail {

/// Tangential derivative along local axis j assembled into one boundary
/// field (a slot shared by faces keeps the first face's value).
inline Field tangential_field(const Grid& g, const Field& w, int j) {
  Field out = Field::Zero(w.size());
  std::vector<bool> set(static_cast<std::size_t>(w.size()), false);
  for (std::size_t f = 0; f < g.faces().size(); ++f) {
    const Field d = tangential_gradient(g, w, f, j);
    const auto& face = g.faces()[f];
    for (std::size_t k = 0; k < face.size(); ++k) {
      const auto s = face.slots[k];
      if (!set[s]) {
        out[static_cast<Eigen::Index>(s)] = d[static_cast<Eigen::Index>(k)];
        set[s] = true;
      }
    }
  }
  return out;
}

}  // namespace detail

/// For each eps, the smallest C with
///   psi(u^{p_m} log u) <= -log eps1 + C eps1 (sum_i ||d_i u||_{p_i} + eps)
/// over the sample fields and eps1 grid (the unknown M is taken as 1).
/// Samples are made nonnegative and rescaled so that psi(u^{p_m}) = 1.
inline LogSobolevFit check_logsobolev(const Grid& g, const std::vector<Field>& samples, const VectorExponent& ex,
                                      bool boundary, const std::vector<double>& eps_grid,
                                      const std::vector<double>& eps1_grid) {
  LogSobolevFit fit;
  fit.eps = eps_grid;
  fit.c_fit.assign(eps_grid.size(), 0.0);
  const Field& wts = boundary ? g.surface_weights() : g.interior_weights();
  const ExponentField& pm = boundary ? ex.q_min : ex.p_min;
  for (const auto& raw : samples) {
    Field u = boundary ? trace(g, raw.cwiseAbs()) : Field(raw.cwiseAbs());
    if (u.maxCoeff() == 0.0) continue;
    // scale lambda with sum w (lambda u)^{pm} = 1, by bisection on log lambda
    double lo = -50.0, hi = 50.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (modular(std::exp(mid) * u, pm, wts) > 1.0 ? hi : lo) = mid;
    }
    u *= std::exp(0.5 * (lo + hi));
    double lhs = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      if (u[k] > 0.0) lhs += wts[k] * std::pow(u[k], pm[k]) * std::log(u[k]);
    }
    double grad = 0.0;
    if (boundary) {
      for (int j = 0; j + 1 < g.dimension(); ++j) {
        grad += luxemburg_norm(detail::tangential_field(g, u, j), ex.q[static_cast<std::size_t>(j)], wts);
      }
    } else {
      for (int i = 0; i < g.dimension(); ++i) {
        grad += luxemburg_norm(interior_gradient(g, u, i), ex.p[static_cast<std::size_t>(i)], wts);
      }
    }
    for (std::size_t a = 0; a < eps_grid.size(); ++a) {
      for (double e1 : eps1_grid) {
        const double need = (lhs + std::log(e1)) / (e1 * (grad + eps_grid[a]));
        fit.c_fit[a] = std::max(fit.c_fit[a], need);
      }
    }
  }
  for (double c : fit.c_fit) fit.finite = fit.finite && std::isfinite(c);
  return fit;
}

}  // namespace wlab
