#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wlab {

using Field = Eigen::VectorXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Box [0, L_1] x ... x [0, L_N] sampled by a uniform tensor grid.
struct GridSpec {
  int dimension = 2;
  std::vector<double> lengths;
  std::vector<int> resolution;
  /// Multiplies every quadrature weight (interior and surface). Used to
  /// normalise |Omega| + sigma(Gamma) to one.
  double measure_scale = 1.0;
};

/// One flat face of the box boundary.
struct Face {
  int normal_axis = 0;
  int side = 0;  // 0: x_axis = 0, 1: x_axis = L_axis
  std::array<double, 3> normal{0.0, 0.0, 0.0};
  std::vector<int> tangential_axes;  // increasing order, size N-1
  std::array<int, 2> extent{1, 1};   // node counts along tangential axes
  std::vector<std::size_t> nodes;    // global node ids, first tangential axis fastest
  std::vector<std::size_t> slots;    // boundary-field index of each face node
  std::vector<double> weights;       // face trapezoid weights
  std::vector<bool> on_face_edge;

  std::size_t size() const { return nodes.size(); }
  /// Position of a face node along tangential axis j.
  int local_coord(std::size_t k, int j) const {
    return j == 0 ? static_cast<int>(k % static_cast<std::size_t>(extent[0]))
                  : static_cast<int>(k / static_cast<std::size_t>(extent[0]));
  }
  std::size_t local_index(int i0, int i1) const {
    return static_cast<std::size_t>(i0) + static_cast<std::size_t>(extent[0]) * static_cast<std::size_t>(i1);
  }
};

class Grid {
 public:
  explicit Grid(GridSpec spec) : spec_(std::move(spec)) {
    validate();
    build();
  }

  const GridSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  int resolution(int axis) const { return spec_.resolution[static_cast<std::size_t>(axis)]; }
  double length(int axis) const { return spec_.lengths[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return length(axis) / (resolution(axis) - 1); }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_boundary() const { return boundary_nodes_.size(); }

  std::array<int, 3> multi_index(std::size_t node) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dimension(); ++a) {
      const auto n = static_cast<std::size_t>(resolution(a));
      idx[static_cast<std::size_t>(a)] = static_cast<int>(node % n);
      node /= n;
    }
    return idx;
  }

  std::size_t node_index(const std::array<int, 3>& idx) const {
    std::size_t node = 0;
    for (int a = dimension() - 1; a >= 0; --a) {
      node = node * static_cast<std::size_t>(resolution(a)) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    }
    return node;
  }

  /// Stride between neighbouring nodes along an axis.
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  double coordinate(std::size_t node, int axis) const {
    return multi_index(node)[static_cast<std::size_t>(axis)] * spacing(axis);
  }
  std::array<double, 3> point(std::size_t node) const {
    const auto idx = multi_index(node);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dimension(); ++a) x[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(a)] * spacing(a);
    return x;
  }

  bool is_boundary(std::size_t node) const { return slot_of_[node] >= 0; }
  /// Boundary-field index of a node, or -1 for strictly interior nodes.
  long boundary_slot(std::size_t node) const { return slot_of_[node]; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_nodes_; }
  /// True for boundary nodes shared by two or more faces (box edges and corners).
  bool is_edge_slot(std::size_t slot) const { return face_count_[slot] > 1; }

  const Field& interior_weights() const { return interior_weights_; }
  const Field& surface_weights() const { return surface_weights_; }
  const std::vector<Face>& faces() const { return faces_; }

  double volume() const {
    double v = spec_.measure_scale;
    for (int a = 0; a < dimension(); ++a) v *= length(a);
    return v;
  }
  double surface_measure() const {
    double s = 0.0;
    for (const auto& f : faces_) {
      double area = spec_.measure_scale;
      for (int t : f.tangential_axes) area *= length(t);
      s += area;
    }
    return s;
  }
  /// |Omega| + sigma(Gamma).
  double total_measure() const { return volume() + surface_measure(); }

  /// 1D trapezoid weight of grid index i on an axis.
  double trapezoid_weight(int axis, int i) const {
    const double h = spacing(axis);
    return (i == 0 || i == resolution(axis) - 1) ? 0.5 * h : h;
  }

 private:
  void validate() const {
    if (spec_.dimension != 2 && spec_.dimension != 3) {
      throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(spec_.dimension));
    }
    const auto n = static_cast<std::size_t>(spec_.dimension);
    if (spec_.lengths.size() != n || spec_.resolution.size() != n) {
      throw std::invalid_argument("grid lengths/resolution must have one entry per axis");
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (!(spec_.lengths[a] > 0.0) || !std::isfinite(spec_.lengths[a])) {
        throw std::invalid_argument("grid side lengths must be positive and finite");
      }
      if (spec_.resolution[a] < 3) {
        throw std::invalid_argument("grid resolution must be >= 3 on every axis");
      }
    }
    if (!(spec_.measure_scale > 0.0)) throw std::invalid_argument("measure_scale must be positive");
  }

  void build() {
    const int dim = dimension();
    num_nodes_ = 1;
    for (int a = 0; a < dim; ++a) {
      strides_[static_cast<std::size_t>(a)] = num_nodes_;
      num_nodes_ *= static_cast<std::size_t>(resolution(a));
    }

    interior_weights_.resize(static_cast<Eigen::Index>(num_nodes_));
    slot_of_.assign(num_nodes_, -1);
    for (std::size_t node = 0; node < num_nodes_; ++node) {
      const auto idx = multi_index(node);
      double w = spec_.measure_scale;
      bool on_boundary = false;
      for (int a = 0; a < dim; ++a) {
        const int i = idx[static_cast<std::size_t>(a)];
        w *= trapezoid_weight(a, i);
        on_boundary = on_boundary || i == 0 || i == resolution(a) - 1;
      }
      interior_weights_[static_cast<Eigen::Index>(node)] = w;
      if (on_boundary) {
        slot_of_[node] = static_cast<long>(boundary_nodes_.size());
        boundary_nodes_.push_back(node);
      }
    }

    surface_weights_ = Field::Zero(static_cast<Eigen::Index>(boundary_nodes_.size()));
    face_count_.assign(boundary_nodes_.size(), 0);
    for (int axis = 0; axis < dim; ++axis) {
      for (int side = 0; side < 2; ++side) {
        faces_.push_back(make_face(axis, side));
        const Face& f = faces_.back();
        for (std::size_t k = 0; k < f.size(); ++k) {
          surface_weights_[static_cast<Eigen::Index>(f.slots[k])] += f.weights[k];
          ++face_count_[f.slots[k]];
        }
      }
    }
  }

  Face make_face(int axis, int side) const {
    Face f;
    f.normal_axis = axis;
    f.side = side;
    f.normal[static_cast<std::size_t>(axis)] = side == 0 ? -1.0 : 1.0;
    for (int a = 0; a < dimension(); ++a) {
      if (a != axis) f.tangential_axes.push_back(a);
    }
    f.extent[0] = resolution(f.tangential_axes[0]);
    f.extent[1] = dimension() == 3 ? resolution(f.tangential_axes[1]) : 1;
    const int fixed = side == 0 ? 0 : resolution(axis) - 1;
    for (int i1 = 0; i1 < f.extent[1]; ++i1) {
      for (int i0 = 0; i0 < f.extent[0]; ++i0) {
        std::array<int, 3> idx{0, 0, 0};
        idx[static_cast<std::size_t>(axis)] = fixed;
        idx[static_cast<std::size_t>(f.tangential_axes[0])] = i0;
        double w = spec_.measure_scale * trapezoid_weight(f.tangential_axes[0], i0);
        bool edge = i0 == 0 || i0 == f.extent[0] - 1;
        if (dimension() == 3) {
          idx[static_cast<std::size_t>(f.tangential_axes[1])] = i1;
          w *= trapezoid_weight(f.tangential_axes[1], i1);
          edge = edge || i1 == 0 || i1 == f.extent[1] - 1;
        }
        const std::size_t node = node_index(idx);
        f.nodes.push_back(node);
        f.slots.push_back(static_cast<std::size_t>(slot_of_[node]));
        f.weights.push_back(w);
        f.on_face_edge.push_back(edge);
      }
    }
    return f;
  }

  GridSpec spec_;
  std::size_t num_nodes_ = 0;
  std::array<std::size_t, 3> strides_{1, 1, 1};
  Field interior_weights_;
  Field surface_weights_;
  std::vector<long> slot_of_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<int> face_count_;
  std::vector<Face> faces_;
};

inline Grid build_grid(int dimension, std::vector<double> lengths, std::vector<int> resolution) {
  return Grid(GridSpec{dimension, std::move(lengths), std::move(resolution), 1.0});
}

namespace detail {

struct Stencil3 {
  std::array<int, 3> offset;  // positions along the line
  std::array<double, 3> coeff;
  int size;
};

// Second-order first-derivative stencil at position k of a line of n points.
inline Stencil3 derivative_stencil(int k, int n, double h) {
  const double s = 1.0 / (2.0 * h);
  if (k == 0) return {{0, 1, 2}, {-3.0 * s, 4.0 * s, -1.0 * s}, 3};
  if (k == n - 1) return {{n - 3, n - 2, n - 1}, {1.0 * s, -4.0 * s, 3.0 * s}, 3};
  return {{k - 1, k + 1, 0}, {-s, s, 0.0}, 2};
}

inline void check_field(const Field& f, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(f.size()) != n) {
    throw std::invalid_argument(std::string(what) + ": field size does not match carrier");
  }
}

}  // namespace detail

/// Nodal derivative along an axis: central differences inside, second-order
/// one-sided differences on the two end planes.
inline SparseRowMatrix interior_gradient_matrix(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dimension()) throw std::out_of_range("interior_gradient: axis out of range");
  std::vector<Triplet> trip;
  trip.reserve(g.num_nodes() * 3);
  const int n = g.resolution(axis);
  const double h = g.spacing(axis);
  const auto stride = static_cast<long>(g.stride(axis));
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const int k = g.multi_index(node)[static_cast<std::size_t>(axis)];
    const auto st = detail::derivative_stencil(k, n, h);
    const long base = static_cast<long>(node) - static_cast<long>(k) * stride;
    for (int s = 0; s < st.size; ++s) {
      trip.emplace_back(static_cast<int>(node), static_cast<int>(base + st.offset[static_cast<std::size_t>(s)] * stride),
                        st.coeff[static_cast<std::size_t>(s)]);
    }
  }
  SparseRowMatrix d(static_cast<Eigen::Index>(g.num_nodes()), static_cast<Eigen::Index>(g.num_nodes()));
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

/// Same stencil as interior_gradient_matrix, summed as differences from the
/// centre node so that constants give exactly zero.
inline Field interior_gradient(const Grid& g, const Field& u, int axis) {
  detail::check_field(u, g.num_nodes(), "interior_gradient");
  if (axis < 0 || axis >= g.dimension()) throw std::out_of_range("interior_gradient: axis out of range");
  const int n = g.resolution(axis);
  const double h = g.spacing(axis);
  const auto stride = static_cast<long>(g.stride(axis));
  Field d(u.size());
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const int k = g.multi_index(node)[static_cast<std::size_t>(axis)];
    const auto st = detail::derivative_stencil(k, n, h);
    const long base = static_cast<long>(node) - static_cast<long>(k) * stride;
    const double centre = u[static_cast<Eigen::Index>(node)];
    double v = 0.0;
    for (int s = 0; s < st.size; ++s) {
      v += st.coeff[static_cast<std::size_t>(s)] * (u[base + st.offset[static_cast<std::size_t>(s)] * stride] - centre);
    }
    d[static_cast<Eigen::Index>(node)] = v;
  }
  return d;
}

/// Tangential derivative on one face, as a map from the boundary field to
/// values at that face's nodes. Stencils never leave the face.
inline SparseRowMatrix tangential_gradient_matrix(const Grid& g, std::size_t face_id, int j) {
  if (face_id >= g.faces().size()) throw std::out_of_range("tangential_gradient: face out of range");
  const Face& f = g.faces()[face_id];
  if (j < 0 || j >= g.dimension() - 1) throw std::out_of_range("tangential_gradient: axis does not belong to face");
  const int axis = f.tangential_axes[static_cast<std::size_t>(j)];
  const int n = f.extent[static_cast<std::size_t>(j)];
  const double h = g.spacing(axis);
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const int i0 = f.local_coord(k, 0);
    const int i1 = f.local_coord(k, 1);
    const int pos = j == 0 ? i0 : i1;
    const auto st = detail::derivative_stencil(pos, n, h);
    for (int s = 0; s < st.size; ++s) {
      const int p = st.offset[static_cast<std::size_t>(s)];
      const std::size_t kk = j == 0 ? f.local_index(p, i1) : f.local_index(i0, p);
      trip.emplace_back(static_cast<int>(k), static_cast<int>(f.slots[kk]), st.coeff[static_cast<std::size_t>(s)]);
    }
  }
  SparseRowMatrix d(static_cast<Eigen::Index>(f.size()), static_cast<Eigen::Index>(g.num_boundary()));
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

inline Field tangential_gradient(const Grid& g, const Field& boundary_field, std::size_t face_id, int j) {
  detail::check_field(boundary_field, g.num_boundary(), "tangential_gradient");
  return tangential_gradient_matrix(g, face_id, j) * boundary_field;
}

inline double integrate_interior(const Grid& g, const Field& f) {
  detail::check_field(f, g.num_nodes(), "integrate_interior");
  if (!f.allFinite()) throw std::domain_error("integrate_interior: non-finite input");
  return g.interior_weights().dot(f);
}

inline double integrate_boundary(const Grid& g, const Field& f) {
  detail::check_field(f, g.num_boundary(), "integrate_boundary");
  if (!f.allFinite()) throw std::domain_error("integrate_boundary: non-finite input");
  return g.surface_weights().dot(f);
}

/// Restriction of nodal values to the boundary nodes.
inline Field trace(const Grid& g, const Field& u) {
  detail::check_field(u, g.num_nodes(), "trace");
  Field w(static_cast<Eigen::Index>(g.num_boundary()));
  const auto& nodes = g.boundary_nodes();
  for (std::size_t s = 0; s < nodes.size(); ++s) w[static_cast<Eigen::Index>(s)] = u[static_cast<Eigen::Index>(nodes[s])];
  return w;
}

/// Evaluate a function of the coordinates at every node.
template <class F>
Field sample_nodes(const Grid& g, F&& fn) {
  Field u(static_cast<Eigen::Index>(g.num_nodes()));
  for (std::size_t n = 0; n < g.num_nodes(); ++n) u[static_cast<Eigen::Index>(n)] = fn(g.point(n));
  return u;
}

/// Evaluate a function of the coordinates at every boundary node.
template <class F>
Field sample_boundary(const Grid& g, F&& fn) {
  Field w(static_cast<Eigen::Index>(g.num_boundary()));
  const auto& nodes = g.boundary_nodes();
  for (std::size_t s = 0; s < nodes.size(); ++s) w[static_cast<Eigen::Index>(s)] = fn(g.point(nodes[s]));
  return w;
}

}  // namespace wlab
