#pragma once

// Implicit Euler for u' + dPhi(u) = 0 in X^2 = L^2(Omega) x L^2(Gamma):
// each step minimises (1/2tau)|v - u_n|^2_X2 + Phi(v) over conforming pairs.

#include "wlab/energy.hpp"
#include "wlab/grid.hpp"
#include "wlab/varexp.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlab {

struct FlowConfig {
  double tau = 1e-2;
  /// Relative to the problem scale 1 + |u_n|_X2 / tau.
  double grad_tol = 1e-10;
  int max_iter = 100;
  double eps_reg = 1e-8;

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("flow: tau must be positive");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("flow: grad_tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("flow: max_iter must be >= 1");
  }
};

struct StepDiagnostics {
  int iterations = 0;
  int backtracks = 0;
  int gradient_fallbacks = 0;
  double residual = 0.0;   // X^2 norm of the objective gradient at the output
  double tolerance = 0.0;  // absolute tolerance the residual was held to
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, StepDiagnostics d) : std::runtime_error(msg), diagnostics(d) {}
  StepDiagnostics diagnostics;
};

/// <f, g>_X2 = int_Omega f.u g.u + int_Gamma f.w g.w.
inline double x2_inner(const Grid& g, const PairFunction& a, const PairFunction& b) {
  return (a.u.array() * b.u.array() * g.interior_weights().array()).sum() +
         (a.w.array() * b.w.array() * g.surface_weights().array()).sum();
}

inline double x2_norm(const Grid& g, const PairFunction& a) { return std::sqrt(x2_inner(g, a, a)); }

class ProximalSolver {
 public:
  ProximalSolver(const WentzellEnergy& energy, FlowConfig cfg) : energy_(energy), cfg_(cfg) { cfg_.validate(); }

  const FlowConfig& config() const { return cfg_; }

  PairFunction step(const PairFunction& un, StepDiagnostics* diag = nullptr) const {
    const Grid& g = energy_.grid();
    if (!is_conforming(g, un)) throw std::invalid_argument("proximal_step: input pair is not conforming");
    const Field v = step_nodal(un.u, cfg_.tau, diag);
    return PairFunction::conforming(g, v);
  }

  /// Minimiser over nodal values of (1/2tau)(v-u)^T M (v-u) + Phi(v).
  Field step_nodal(const Field& u, double tau, StepDiagnostics* diag_out = nullptr) const {
    const Field& M = energy_.mass();
    const double scale = 1.0 + std::sqrt(u.dot(M.cwiseProduct(u))) / tau;
    StepDiagnostics diag;
    diag.tolerance = cfg_.grad_tol * scale;

    auto objective = [&](const Field& v) {
      const Field d = v - u;
      return 0.5 / tau * d.dot(M.cwiseProduct(d)) + energy_.nodal_energy(v);
    };
    auto gradient = [&](const Field& v) -> Field { return M.cwiseProduct(v - u) / tau + energy_.nodal_gradient(v); };
    auto x2_dual_norm = [&](const Field& gr) { return std::sqrt(gr.dot(gr.cwiseQuotient(M))); };

    Field v = u;
    double J = objective(v);
    Field gr = gradient(v);
    double res = x2_dual_norm(gr);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analysed = false;

    while (res > diag.tolerance) {
      if (diag.iterations >= cfg_.max_iter) {
        diag.residual = res;
        if (diag_out) *diag_out = diag;
        std::ostringstream os;
        os << "proximal step did not converge: residual " << res << " > tolerance " << diag.tolerance << " after "
           << diag.iterations << " iterations";
        throw SolverError(os.str(), diag);
      }
      ++diag.iterations;

      Eigen::SparseMatrix<double> H(energy_.nodal_hessian(v));
      H += Eigen::SparseMatrix<double>(M.asDiagonal() * (1.0 / tau));
      if (!analysed) {
        ldlt.analyzePattern(H);
        analysed = true;
      }
      ldlt.factorize(H);
      Field d;
      bool newton = ldlt.info() == Eigen::Success;
      if (newton) {
        d = ldlt.solve(-gr);
        newton = d.allFinite() && gr.dot(d) < 0.0;
      }
      if (!newton) {
        ++diag.gradient_fallbacks;
        d = -gr.cwiseQuotient(M) * tau;
      }

      double step = 1.0;
      const double slope = gr.dot(d);
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Field trial = v + step * d;
        const double Jt = objective(trial);
        if (Jt <= J + 1e-4 * step * slope) {
          v = trial;
          J = Jt;
          accepted = true;
          break;
        }
        // near the minimiser the decrease drops below rounding of J; accept a
        // full step that reduces the residual without raising J beyond noise
        if (ls == 0) {
          const Field gt = gradient(trial);
          const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(J) + 1.0);
          if (Jt <= J + noise && x2_dual_norm(gt) < res) {
            v = trial;
            J = std::min(J, Jt);
            accepted = true;
            break;
          }
        }
        step *= 0.5;
        ++diag.backtracks;
      }
      if (!accepted) {
        diag.residual = res;
        if (diag_out) *diag_out = diag;
        throw SolverError("proximal step line search failed to decrease the objective", diag);
      }
      gr = gradient(v);
      res = x2_dual_norm(gr);
    }
    diag.residual = res;
    if (diag_out) *diag_out = diag;
    return v;
  }

 private:
  const WentzellEnergy& energy_;
  FlowConfig cfg_;
};

inline PairFunction proximal_step(const WentzellEnergy& energy, const PairFunction& un, const FlowConfig& cfg,
                                  StepDiagnostics* diag = nullptr) {
  return ProximalSolver(energy, cfg).step(un, diag);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<PairFunction> states;
  std::vector<double> energies;
  std::vector<StepDiagnostics> diagnostics;  // diagnostics[n] belongs to the step producing states[n+1]

  const PairFunction& final_state() const { return states.back(); }
};

/// Iterates proximal steps from u0 until t = horizon (rounded to a whole
/// number of steps).
inline Trajectory evolve(const WentzellEnergy& energy, const PairFunction& u0, double horizon, const FlowConfig& cfg) {
  if (!(horizon > 0.0)) throw std::invalid_argument("evolve: horizon must be positive");
  ProximalSolver solver(energy, cfg);
  const int steps = std::max(1, static_cast<int>(std::lround(horizon / cfg.tau)));
  Trajectory tr;
  tr.times.reserve(static_cast<std::size_t>(steps) + 1);
  tr.states.reserve(static_cast<std::size_t>(steps) + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(u0);
  tr.energies.push_back(energy.total_energy(u0));
  for (int n = 0; n < steps; ++n) {
    StepDiagnostics d;
    try {
      tr.states.push_back(solver.step(tr.states.back(), &d));
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(n + 1) + ": " + e.what(), e.diagnostics);
    }
    tr.times.push_back((n + 1) * cfg.tau);
    tr.energies.push_back(energy.total_energy(tr.states.back()));
    tr.diagnostics.push_back(d);
  }
  return tr;
}

/// Writes text to path via a temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// CSV columns: step, t, energy, x2_norm, sup_norm, residual, iterations.
inline std::string trajectory_csv(const Grid& g, const Trajectory& tr) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "step,t,energy,x2_norm,sup_norm,residual,iterations\n";
  for (std::size_t n = 0; n < tr.states.size(); ++n) {
    const double res = n == 0 ? 0.0 : tr.diagnostics[n - 1].residual;
    const int it = n == 0 ? 0 : tr.diagnostics[n - 1].iterations;
    os << n << ',' << tr.times[n] << ',' << tr.energies[n] << ',' << x2_norm(g, tr.states[n]) << ','
       << sup_pair_norm(tr.states[n]) << ',' << res << ',' << it << '\n';
  }
  return os.str();
}

/// One line per node in grid order: node, x1..xN, u; the boundary slot of
/// the node or -1 is included so the trace can be read back.
inline std::string snapshot_text(const Grid& g, const PairFunction& f, double t) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# t = " << t << "\n# node";
  for (int a = 0; a < g.dimension(); ++a) os << " x" << (a + 1);
  os << " slot u\n";
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    os << k;
    const auto x = g.point(k);
    for (int a = 0; a < g.dimension(); ++a) os << ' ' << x[static_cast<std::size_t>(a)];
    os << ' ' << g.boundary_slot(k) << ' ' << f.u[static_cast<Eigen::Index>(k)] << '\n';
  }
  return os.str();
}

}  // namespace wlab
