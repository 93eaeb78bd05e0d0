#pragma once

// The discrete Wentzell functional
//   Phi(u) = sum_i int_Omega |d_i u|^{p_i}/p_i + int_Omega alpha |u|^{p_M}/p_M
//          + sum_j int_Gamma |d_tau_j w|^{q_j}/q_j + int_Gamma beta |w|^{q_M}/q_M,
// its exact gradient and Hessian. Every term is a weighted sum of a convex
// density applied to rows of a sparse linear map, so the gradient is the
// adjoint of that map applied to the density derivative.

#include "wlab/grid.hpp"
#include "wlab/varexp.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wlab {

/// Reaction coefficients alpha (interior nodes) and beta (boundary slots).
struct CoefficientField {
  Field alpha;
  Field beta;
  double alpha0 = 0.0;
  double beta0 = 0.0;

  CoefficientField() = default;
  CoefficientField(Field a, Field b) : alpha(std::move(a)), beta(std::move(b)) {
    if (alpha.size() == 0 || beta.size() == 0) throw std::invalid_argument("coefficient fields must be non-empty");
    if (!alpha.allFinite() || !beta.allFinite()) throw std::invalid_argument("coefficient fields must be finite");
    alpha0 = alpha.minCoeff();
    beta0 = beta.minCoeff();
    if (!(alpha0 > 0.0) || !(beta0 > 0.0)) throw std::invalid_argument("coefficients need alpha0 > 0 and beta0 > 0");
  }
  static CoefficientField constant(const Grid& g, double a, double b) {
    return {Field::Constant(static_cast<Eigen::Index>(g.num_nodes()), a),
            Field::Constant(static_cast<Eigen::Index>(g.num_boundary()), b)};
  }
};

/// Pointwise density F_r(g) = |g|^r / r and its derivatives. For r < 2 the
/// regularised form ((g^2 + eps^2)^{r/2} - eps^r) / r is used instead.
struct Density {
  static double value(double g, double r, double eps) {
    if (r < 2.0 && eps > 0.0) return (std::pow(g * g + eps * eps, 0.5 * r) - std::pow(eps, r)) / r;
    const double a = std::abs(g);
    return a == 0.0 ? 0.0 : std::pow(a, r) / r;
  }
  /// phi_r(g) = (g^2 + eps^2)^{(r-2)/2} g.
  static double first(double g, double r, double eps) {
    if (r < 2.0 && eps > 0.0) return std::pow(g * g + eps * eps, 0.5 * (r - 2.0)) * g;
    const double a = std::abs(g);
    if (a == 0.0) return 0.0;
    return std::pow(a, r - 2.0) * g;
  }
  static double second(double g, double r, double eps) {
    if (r < 2.0 && eps > 0.0) {
      const double s = g * g + eps * eps;
      return std::pow(s, 0.5 * (r - 4.0)) * ((r - 1.0) * g * g + eps * eps);
    }
    const double a = std::abs(g);
    if (r == 2.0) return 1.0;
    if (a == 0.0) return 0.0;
    return (r - 1.0) * std::pow(a, r - 2.0);
  }
};

/// Sum over rows k of weight_k * F_{exponent_k}((D x)_k).
struct EnergyBlock {
  SparseRowMatrix D;
  Field weight;
  Field exponent;
};

enum class Stencil {
  staggered,  // two-point differences on grid edges (default)
  nodal       // central / one-sided second-order differences at nodes
};

class WentzellEnergy {
 public:
  WentzellEnergy(const Grid& grid, VectorExponent exps, CoefficientField coef, double eps_reg = 1e-8,
                 Stencil stencil = Stencil::staggered)
      : grid_(grid), exps_(std::move(exps)), coef_(std::move(coef)), eps_(eps_reg), stencil_(stencil) {
    exps_.check_carriers(grid_);
    if (static_cast<std::size_t>(coef_.alpha.size()) != grid_.num_nodes() ||
        static_cast<std::size_t>(coef_.beta.size()) != grid_.num_boundary()) {
      throw std::invalid_argument("coefficient carriers do not match the grid");
    }
    if (eps_ < 0.0) throw std::invalid_argument("eps_reg must be >= 0");
    if (eps_ == 0.0 && (exps_.p_min.min() < 2.0 || exps_.q_min.min() < 2.0)) {
      throw std::invalid_argument("eps_reg = 0 requires all exponents >= 2");
    }
    assemble();
  }

  const Grid& grid() const { return grid_; }
  const VectorExponent& exponents() const { return exps_; }
  const CoefficientField& coefficients() const { return coef_; }
  double eps_reg() const { return eps_; }
  Stencil stencil() const { return stencil_; }

  double interior_energy(const Field& u) const {
    check_field(u, grid_.num_nodes(), "interior_energy");
    double e = 0.0;
    for (const auto& b : interior_) e += block_energy(b, u);
    return e;
  }

  double boundary_energy(const Field& w) const {
    check_field(w, grid_.num_boundary(), "boundary_energy");
    double e = 0.0;
    for (const auto& b : boundary_) e += block_energy(b, w);
    return e;
  }

  double total_energy(const PairFunction& f) const {
    require_conforming(f);
    return interior_energy(f.u) + boundary_energy(f.w);
  }

  /// Energy of the conforming pair generated by nodal values u.
  double nodal_energy(const Field& u) const { return interior_energy(u) + boundary_energy(trace(grid_, u)); }

  /// Euclidean gradient of nodal_energy with respect to the nodal values.
  Field nodal_gradient(const Field& u) const {
    check_field(u, grid_.num_nodes(), "nodal_gradient");
    Field g = Field::Zero(u.size());
    for (const auto& b : interior_) g += block_gradient(b, u);
    const Field w = trace(grid_, u);
    Field gb = Field::Zero(w.size());
    for (const auto& b : boundary_) gb += block_gradient(b, w);
    scatter_add(gb, g);
    return g;
  }

  /// Euclidean Hessian of nodal_energy.
  SparseRowMatrix nodal_hessian(const Field& u) const {
    check_field(u, grid_.num_nodes(), "nodal_hessian");
    const auto n = static_cast<Eigen::Index>(grid_.num_nodes());
    Eigen::SparseMatrix<double> H(n, n);
    for (const auto& b : interior_) H += block_hessian(b, u);
    const Field w = trace(grid_, u);
    for (const auto& b : boundary_) {
      const Eigen::SparseMatrix<double> Dn = b.D * trace_matrix_;
      H += block_hessian_with(b, w, Dn);
    }
    return SparseRowMatrix(H);
  }

  /// Diagonal of the X^2 mass matrix over nodes: interior weight plus
  /// surface weight at boundary nodes. <u, v>_X2 = u^T diag(M) v.
  const Field& mass() const { return mass_; }

  /// Riesz representative of dPhi in X^2, returned as a conforming pair.
  PairFunction energy_gradient(const PairFunction& f) const {
    require_conforming(f);
    Field g = nodal_gradient(f.u);
    g.array() /= mass_.array();
    return PairFunction::conforming(grid_, std::move(g));
  }

  const std::vector<EnergyBlock>& interior_blocks() const { return interior_; }
  const std::vector<EnergyBlock>& boundary_blocks() const { return boundary_; }

 private:
  static void check_field(const Field& f, std::size_t n, const char* what) {
    if (static_cast<std::size_t>(f.size()) != n) throw std::invalid_argument(std::string(what) + ": field size mismatch");
  }
  void require_conforming(const PairFunction& f) const {
    if (!is_conforming(grid_, f)) throw std::invalid_argument("pair is not conforming (w must equal trace(u))");
  }

  double block_energy(const EnergyBlock& b, const Field& x) const {
    const Field d = b.D * x;
    double e = 0.0;
    for (Eigen::Index k = 0; k < d.size(); ++k) e += b.weight[k] * Density::value(d[k], b.exponent[k], eps_);
    return e;
  }
  Field block_gradient(const EnergyBlock& b, const Field& x) const {
    const Field d = b.D * x;
    Field s(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) s[k] = b.weight[k] * Density::first(d[k], b.exponent[k], eps_);
    return b.D.transpose() * s;
  }
  Eigen::SparseMatrix<double> block_hessian(const EnergyBlock& b, const Field& x) const {
    return block_hessian_with(b, x, Eigen::SparseMatrix<double>(b.D));
  }
  Eigen::SparseMatrix<double> block_hessian_with(const EnergyBlock& b, const Field& x,
                                                 const Eigen::SparseMatrix<double>& Dn) const {
    const Field d = b.D * x;
    Field s(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) s[k] = b.weight[k] * Density::second(d[k], b.exponent[k], eps_);
    Eigen::SparseMatrix<double> t = Dn.transpose() * s.asDiagonal();
    return t * Dn;
  }

  void scatter_add(const Field& boundary_values, Field& nodal) const {
    const auto& nodes = grid_.boundary_nodes();
    for (std::size_t s = 0; s < nodes.size(); ++s) {
      nodal[static_cast<Eigen::Index>(nodes[s])] += boundary_values[static_cast<Eigen::Index>(s)];
    }
  }

  void assemble() {
    const auto n = static_cast<Eigen::Index>(grid_.num_nodes());
    const auto nb = static_cast<Eigen::Index>(grid_.num_boundary());
    const auto& nodes = grid_.boundary_nodes();

    std::vector<Triplet> tr;
    for (std::size_t s = 0; s < nodes.size(); ++s) tr.emplace_back(static_cast<int>(s), static_cast<int>(nodes[s]), 1.0);
    trace_matrix_.resize(nb, n);
    trace_matrix_.setFromTriplets(tr.begin(), tr.end());

    mass_ = grid_.interior_weights();
    scatter_add(grid_.surface_weights(), mass_);

    if (stencil_ == Stencil::staggered) {
      assemble_staggered();
    } else {
      assemble_nodal();
    }

    // reaction terms
    EnergyBlock ra;
    ra.D.resize(n, n);
    ra.D.setIdentity();
    ra.weight = grid_.interior_weights().cwiseProduct(coef_.alpha);
    ra.exponent = exps_.p_max.values();
    interior_.push_back(std::move(ra));

    EnergyBlock rb;
    rb.D.resize(nb, nb);
    rb.D.setIdentity();
    rb.weight = grid_.surface_weights().cwiseProduct(coef_.beta);
    rb.exponent = exps_.q_max.values();
    boundary_.push_back(std::move(rb));
  }

  void assemble_staggered() {
    const int dim = grid_.dimension();
    const auto n = static_cast<Eigen::Index>(grid_.num_nodes());
    const double scale = grid_.spec().measure_scale;
    for (int axis = 0; axis < dim; ++axis) {
      const double h = grid_.spacing(axis);
      const auto stride = grid_.stride(axis);
      const auto& pa = exps_.p[static_cast<std::size_t>(axis)];
      std::vector<Triplet> tr;
      std::vector<double> w, e;
      int row = 0;
      for (std::size_t k = 0; k < grid_.num_nodes(); ++k) {
        const auto idx = grid_.multi_index(k);
        if (idx[static_cast<std::size_t>(axis)] == grid_.resolution(axis) - 1) continue;
        const std::size_t k2 = k + stride;
        tr.emplace_back(row, static_cast<int>(k), -1.0 / h);
        tr.emplace_back(row, static_cast<int>(k2), 1.0 / h);
        double weight = h * scale;
        for (int other = 0; other < dim; ++other) {
          if (other != axis) weight *= grid_.trapezoid_weight(other, idx[static_cast<std::size_t>(other)]);
        }
        w.push_back(weight);
        e.push_back(0.5 * (pa[static_cast<Eigen::Index>(k)] + pa[static_cast<Eigen::Index>(k2)]));
        ++row;
      }
      interior_.push_back(make_block(tr, row, n, w, e));
    }

    const auto nb = static_cast<Eigen::Index>(grid_.num_boundary());
    for (int j = 0; j < dim - 1; ++j) {
      const auto& qj = exps_.q[static_cast<std::size_t>(j)];
      std::vector<Triplet> tr;
      std::vector<double> w, e;
      int row = 0;
      for (const auto& face : grid_.faces()) {
        const int axis = face.tangential_axes[static_cast<std::size_t>(j)];
        const double h = grid_.spacing(axis);
        for (std::size_t k = 0; k < face.size(); ++k) {
          const int c = face.local_coord(k, j);
          if (c == face.extent[static_cast<std::size_t>(j)] - 1) continue;
          const std::size_t k2 = j == 0 ? face.local_index(c + 1, face.local_coord(k, 1))
                                        : face.local_index(face.local_coord(k, 0), c + 1);
          const auto s1 = face.slots[k];
          const auto s2 = face.slots[k2];
          tr.emplace_back(row, static_cast<int>(s1), -1.0 / h);
          tr.emplace_back(row, static_cast<int>(s2), 1.0 / h);
          double weight = h * scale;
          if (dim == 3) {
            const int oj = 1 - j;
            weight *= grid_.trapezoid_weight(face.tangential_axes[static_cast<std::size_t>(oj)], face.local_coord(k, oj));
          }
          w.push_back(weight);
          e.push_back(0.5 * (qj[static_cast<Eigen::Index>(s1)] + qj[static_cast<Eigen::Index>(s2)]));
          ++row;
        }
      }
      boundary_.push_back(make_block(tr, row, nb, w, e));
    }
  }

  void assemble_nodal() {
    const int dim = grid_.dimension();
    for (int axis = 0; axis < dim; ++axis) {
      EnergyBlock b;
      b.D = interior_gradient_matrix(grid_, axis);
      b.weight = grid_.interior_weights();
      b.exponent = exps_.p[static_cast<std::size_t>(axis)].values();
      interior_.push_back(std::move(b));
    }
    const auto nb = static_cast<Eigen::Index>(grid_.num_boundary());
    for (int j = 0; j < dim - 1; ++j) {
      const auto& qj = exps_.q[static_cast<std::size_t>(j)];
      std::vector<Triplet> tr;
      std::vector<double> w, e;
      int row = 0;
      for (std::size_t fid = 0; fid < grid_.faces().size(); ++fid) {
        const auto& face = grid_.faces()[fid];
        const SparseRowMatrix G = tangential_gradient_matrix(grid_, fid, j);
        for (Eigen::Index r = 0; r < G.rows(); ++r) {
          for (SparseRowMatrix::InnerIterator it(G, r); it; ++it) tr.emplace_back(row, static_cast<int>(it.col()), it.value());
          const auto k = static_cast<std::size_t>(r);
          w.push_back(face.weights[k]);
          e.push_back(qj[static_cast<Eigen::Index>(face.slots[k])]);
          ++row;
        }
      }
      boundary_.push_back(make_block(tr, row, nb, w, e));
    }
  }

  static EnergyBlock make_block(const std::vector<Triplet>& tr, int rows, Eigen::Index cols, const std::vector<double>& w,
                                const std::vector<double>& e) {
    EnergyBlock b;
    b.D.resize(rows, cols);
    b.D.setFromTriplets(tr.begin(), tr.end());
    b.weight = Eigen::Map<const Field>(w.data(), static_cast<Eigen::Index>(w.size()));
    b.exponent = Eigen::Map<const Field>(e.data(), static_cast<Eigen::Index>(e.size()));
    return b;
  }

  Grid grid_;
  VectorExponent exps_;
  CoefficientField coef_;
  double eps_;
  Stencil stencil_;
  std::vector<EnergyBlock> interior_;
  std::vector<EnergyBlock> boundary_;
  Eigen::SparseMatrix<double> trace_matrix_;
  Field mass_;
};

/// Quantities of the elementary vector inequality
/// (|a|^{r-2}a - |b|^{r-2}b).(a - b) >= 0 and its lower bounds.
struct MonotonicityGap {
  double lhs = 0.0;
  double sum_form = 0.0;  // (|a| + |b|)^{r-2} |a - b|^2
  double power_form = 0.0;  // |a - b|^r
};

inline MonotonicityGap monotonicity_gap(const Field& a, const Field& b, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("monotonicity_gap needs r > 1");
  if (a.size() != b.size()) throw std::invalid_argument("monotonicity_gap: size mismatch");
  auto flux = [r](const Field& v) -> Field {
    const double n = v.norm();
    if (n == 0.0) return Field::Zero(v.size());
    return std::pow(n, r - 2.0) * v;
  };
  MonotonicityGap g;
  const Field d = a - b;
  g.lhs = (flux(a) - flux(b)).dot(d);
  const double dn = d.norm();
  const double s = a.norm() + b.norm();
  g.sum_form = s == 0.0 ? 0.0 : std::pow(s, r - 2.0) * dn * dn;
  g.power_form = std::pow(dn, r);
  return g;
}

}  // namespace wlab
