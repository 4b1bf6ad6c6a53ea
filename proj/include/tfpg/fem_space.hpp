#pragma once

// P1 finite elements on the unit interval and the unit square with
// homogeneous Dirichlet conditions eliminated at assembly.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "tfpg/errors.hpp"
#include "tfpg/quadrature.hpp"
#include "tfpg/time_gram.hpp"

namespace tfpg {

/// Which diagonal splits each square of the 2-D grid.
/// Uniform: lower-left to upper-right everywhere.
/// Alternating: flips with the parity of the square (union-jack pattern).
enum class DiagonalPattern { Uniform, Alternating };

struct SpatialMesh {
  int dim = 1;
  int M = 2;
  double h = 0.5;
  std::vector<Eigen::Vector2d> nodes;          // y = 0 in 1-D
  std::vector<std::array<int, 3>> elements;    // 1-D uses the first two entries
  std::vector<int> interior_index;             // -1 on the boundary
  std::vector<int> interior_nodes;             // inverse of interior_index
  DiagonalPattern pattern = DiagonalPattern::Uniform;

  [[nodiscard]] int vertices_per_element() const { return dim + 1; }
  [[nodiscard]] int num_interior() const { return static_cast<int>(interior_nodes.size()); }
  [[nodiscard]] int node_id(int i, int j = 0) const { return j * (M + 1) + i; }
};

using SpatialFunction = std::function<double(double x, double y)>;

inline SpatialMesh build_mesh(int dim, int M, DiagonalPattern pattern = DiagonalPattern::Uniform) {
  detail::require(dim == 1 || dim == 2, "build_mesh: dim must be 1 or 2");
  detail::require(M >= 2, "build_mesh: M must be at least 2, got " + std::to_string(M));
  SpatialMesh mesh;
  mesh.dim = dim;
  mesh.M = M;
  mesh.h = 1.0 / M;
  mesh.pattern = pattern;
  const auto coord = [M](int i) { return i == M ? 1.0 : static_cast<double>(i) / M; };
  const int rows = dim == 1 ? 1 : M + 1;
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i <= M; ++i) mesh.nodes.emplace_back(coord(i), dim == 1 ? 0.0 : coord(j));

  if (dim == 1) {
    for (int i = 0; i < M; ++i) mesh.elements.push_back({i, i + 1, -1});
  } else {
    for (int j = 0; j < M; ++j) {
      for (int i = 0; i < M; ++i) {
        const int p00 = mesh.node_id(i, j);
        const int p10 = mesh.node_id(i + 1, j);
        const int p01 = mesh.node_id(i, j + 1);
        const int p11 = mesh.node_id(i + 1, j + 1);
        if (pattern == DiagonalPattern::Alternating && (i + j) % 2 == 1) {
          mesh.elements.push_back({p00, p10, p01});
          mesh.elements.push_back({p10, p11, p01});
        } else {
          mesh.elements.push_back({p00, p10, p11});
          mesh.elements.push_back({p00, p11, p01});
        }
      }
    }
  }

  mesh.interior_index.assign(mesh.nodes.size(), -1);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const int i = static_cast<int>(n) % (M + 1);
    const int j = static_cast<int>(n) / (M + 1);
    const bool interior = i > 0 && i < M && (dim == 1 || (j > 0 && j < M));
    if (interior) {
      mesh.interior_index[n] = static_cast<int>(mesh.interior_nodes.size());
      mesh.interior_nodes.push_back(static_cast<int>(n));
    }
  }
  return mesh;
}

/// Signed area of a triangle element (positive for counter-clockwise).
inline double signed_area(const SpatialMesh& mesh, const std::array<int, 3>& e) {
  const Eigen::Vector2d a = mesh.nodes[e[1]] - mesh.nodes[e[0]];
  const Eigen::Vector2d b = mesh.nodes[e[2]] - mesh.nodes[e[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

struct SpatialMatrices {
  SparseMatrix mass;
  SparseMatrix stiffness;
};

namespace detail {

struct ElementMatrices {
  Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d stiffness = Eigen::Matrix3d::Zero();
};

inline ElementMatrices element_matrices(const SpatialMesh& mesh, const std::array<int, 3>& e) {
  ElementMatrices m;
  if (mesh.dim == 1) {
    const double len = mesh.nodes[e[1]].x() - mesh.nodes[e[0]].x();
    m.mass.topLeftCorner<2, 2>() << len / 3.0, len / 6.0, len / 6.0, len / 3.0;
    m.stiffness.topLeftCorner<2, 2>() << 1.0 / len, -1.0 / len, -1.0 / len, 1.0 / len;
    return m;
  }
  const double area = signed_area(mesh, e);
  Eigen::Matrix<double, 2, 3> grads;
  for (int v = 0; v < 3; ++v) {
    const Eigen::Vector2d& p = mesh.nodes[e[(v + 1) % 3]];
    const Eigen::Vector2d& q = mesh.nodes[e[(v + 2) % 3]];
    grads.col(v) << (p.y() - q.y()) / (2.0 * area), (q.x() - p.x()) / (2.0 * area);
  }
  m.stiffness = area * grads.transpose() * grads;
  m.mass = Eigen::Matrix3d::Constant(area / 12.0);
  m.mass.diagonal().setConstant(area / 6.0);
  return m;
}

}  // namespace detail

/// Mass and stiffness on all nodes, before boundary elimination.
inline SpatialMatrices assemble_full(const SpatialMesh& mesh) {
  const int n = static_cast<int>(mesh.nodes.size());
  const int nv = mesh.vertices_per_element();
  std::vector<Eigen::Triplet<double>> mt;
  std::vector<Eigen::Triplet<double>> st;
  for (const auto& e : mesh.elements) {
    const auto em = detail::element_matrices(mesh, e);
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        mt.emplace_back(e[a], e[b], em.mass(a, b));
        st.emplace_back(e[a], e[b], em.stiffness(a, b));
      }
  }
  SpatialMatrices out{SparseMatrix(n, n), SparseMatrix(n, n)};
  out.mass.setFromTriplets(mt.begin(), mt.end());
  out.stiffness.setFromTriplets(st.begin(), st.end());
  return out;
}

/// Mass and stiffness restricted to interior unknowns.
inline SpatialMatrices assemble(const SpatialMesh& mesh) {
  const int N = mesh.num_interior();
  const int nv = mesh.vertices_per_element();
  std::vector<Eigen::Triplet<double>> mt;
  std::vector<Eigen::Triplet<double>> st;
  for (const auto& e : mesh.elements) {
    const auto em = detail::element_matrices(mesh, e);
    for (int a = 0; a < nv; ++a) {
      const int ia = mesh.interior_index[e[a]];
      if (ia < 0) continue;
      for (int b = 0; b < nv; ++b) {
        const int ib = mesh.interior_index[e[b]];
        if (ib < 0) continue;
        mt.emplace_back(ia, ib, em.mass(a, b));
        st.emplace_back(ia, ib, em.stiffness(a, b));
      }
    }
  }
  SpatialMatrices out{SparseMatrix(N, N), SparseMatrix(N, N)};
  out.mass.setFromTriplets(mt.begin(), mt.end());
  out.stiffness.setFromTriplets(st.begin(), st.end());
  return out;
}

struct SpatialEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, M-orthonormal
};

/// Leading `count` generalized eigenpairs of A psi = lambda M psi (dense).
inline SpatialEigen eigendecompose(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                   int count = -1) {
  const int N = static_cast<int>(mass.rows());
  if (count < 0) count = N;
  detail::require(count >= 1 && count <= N,
                  "eigendecompose: count must lie in [1, N], got " + std::to_string(count));
  const Eigen::MatrixXd A = Eigen::MatrixXd(stiffness);
  const Eigen::MatrixXd Mm = Eigen::MatrixXd(mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Mm);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecompose: generalized eigensolver did not converge (N=" +
                       std::to_string(N) + ")");
  SpatialEigen out{solver.eigenvalues().head(count), solver.eigenvectors().leftCols(count)};
  return out;
}

/// Solver for one fixed SPD matrix: sparse Cholesky up to `direct_limit`
/// unknowns, Jacobi-preconditioned conjugate gradients above.
class SpdSolver {
public:
  enum class Method { Auto, Direct, Iterative };

  explicit SpdSolver(const SparseMatrix& S, double tol = 1e-12, Method method = Method::Auto,
                     int direct_limit = 250000)
      : tol_(tol), n_(static_cast<int>(S.rows())) {
    detail::require(S.rows() == S.cols(), "spd_solve: matrix must be square");
    detail::require(tol > 0.0, "spd_solve: tolerance must be positive");
    direct_ = method == Method::Direct || (method == Method::Auto && n_ <= direct_limit);
    matrix_ = S;  // the iterative solver keeps a reference to it
    if (direct_) {
      llt_.compute(matrix_);
      if (llt_.info() != Eigen::Success)
        throw NumericError("spd_solve: Cholesky factorization failed; matrix not SPD");
    } else {
      cg_.setTolerance(tol);
      cg_.setMaxIterations(10 * n_);
      cg_.compute(matrix_);
    }
  }

  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  [[nodiscard]] bool direct() const { return direct_; }
  [[nodiscard]] int size() const { return n_; }
  void set_max_iterations(int iters) {
    detail::require(iters > 0, "spd_solve: iteration cap must be positive");
    cg_.setMaxIterations(iters);
  }

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    detail::require(rhs.size() == n_, "spd_solve: right-hand side has wrong length");
    if (rhs.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(n_);
    if (direct_) {
      Eigen::VectorXd x = llt_.solve(rhs);
      if (llt_.info() != Eigen::Success) throw NumericError("spd_solve: back substitution failed");
      return x;
    }
    Eigen::VectorXd x = cg_.solve(rhs);
    if (cg_.info() != Eigen::Success)
      throw NumericError("spd_solve: conjugate gradients hit the iteration cap (" +
                         std::to_string(10 * n_) + ") with relative residual " +
                         std::to_string(cg_.error()));
    return x;
  }

private:
  double tol_;
  int n_;
  bool direct_ = true;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg_;
};

inline Eigen::VectorXd spd_solve(const SparseMatrix& S, const Eigen::VectorXd& rhs,
                                 double tol = 1e-12) {
  return SpdSolver(S, tol).solve(rhs);
}

namespace detail {
// Degree-4 symmetric rule on the reference triangle; weights sum to 1.
struct TriangleRule {
  std::array<std::array<double, 3>, 6> bary;
  std::array<double, 6> weights;
};

inline const TriangleRule& triangle_rule() {
  static const TriangleRule rule = [] {
    TriangleRule r{};
    const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
    r.bary = {{{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1}, {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}
}  // namespace detail

/// (w, phi_i) for every interior basis function, by elementwise quadrature
/// (4-point Gauss on intervals, degree-4 rule on triangles).
inline Eigen::VectorXd load_vector(const SpatialMesh& mesh, const SpatialFunction& w) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_interior());
  if (mesh.dim == 1) {
    const GaussRule& g = gauss_legendre_unit(4);
    for (const auto& e : mesh.elements) {
      const double x0 = mesh.nodes[e[0]].x();
      const double x1 = mesh.nodes[e[1]].x();
      const double len = x1 - x0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double s = g.nodes[q];
        const double f = w(x0 + s * len, 0.0) * g.weights[q] * len;
        if (const int i = mesh.interior_index[e[0]]; i >= 0) b[i] += f * (1.0 - s);
        if (const int i = mesh.interior_index[e[1]]; i >= 0) b[i] += f * s;
      }
    }
    return b;
  }
  const auto& rule = detail::triangle_rule();
  for (const auto& e : mesh.elements) {
    const double area = signed_area(mesh, e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      const Eigen::Vector2d p =
          l[0] * mesh.nodes[e[0]] + l[1] * mesh.nodes[e[1]] + l[2] * mesh.nodes[e[2]];
      const double f = w(p.x(), p.y()) * rule.weights[q] * area;
      for (int v = 0; v < 3; ++v)
        if (const int i = mesh.interior_index[e[v]]; i >= 0) b[i] += f * l[v];
    }
  }
  return b;
}

/// L^2 projection onto the Dirichlet P1 space.
inline Eigen::VectorXd l2_project_space(const SpatialMesh& mesh, const SparseMatrix& mass,
                                        const SpatialFunction& w, double tol = 1e-12) {
  return spd_solve(mass, load_vector(mesh, w), tol);
}

/// Nodal interpolant on interior nodes.
inline Eigen::VectorXd interpolate(const SpatialMesh& mesh, const SpatialFunction& w) {
  Eigen::VectorXd v(mesh.num_interior());
  for (int i = 0; i < mesh.num_interior(); ++i) {
    const auto& p = mesh.nodes[mesh.interior_nodes[i]];
    v[i] = w(p.x(), p.y());
  }
  return v;
}

/// Value at (x, y) of the finite element function with interior values v.
inline double eval_fe(const SpatialMesh& mesh, const Eigen::VectorXd& v, double x, double y = 0.0) {
  const double eps = 1e-14;
  detail::require(x >= -eps && x <= 1.0 + eps && (mesh.dim == 1 || (y >= -eps && y <= 1.0 + eps)),
                  "eval_fe: point outside the domain");
  detail::require(v.size() == mesh.num_interior(), "eval_fe: coefficient length mismatch");
  const auto value = [&](int node) {
    const int i = mesh.interior_index[node];
    return i < 0 ? 0.0 : v[i];
  };
  const int M = mesh.M;
  const int i = std::clamp(static_cast<int>(std::floor(x * M)), 0, M - 1);
  const double s = std::clamp(x * M - i, 0.0, 1.0);
  if (mesh.dim == 1) return (1.0 - s) * value(mesh.node_id(i)) + s * value(mesh.node_id(i + 1));
  const int j = std::clamp(static_cast<int>(std::floor(y * M)), 0, M - 1);
  const double r = std::clamp(y * M - j, 0.0, 1.0);
  const double v00 = value(mesh.node_id(i, j));
  const double v10 = value(mesh.node_id(i + 1, j));
  const double v01 = value(mesh.node_id(i, j + 1));
  const double v11 = value(mesh.node_id(i + 1, j + 1));
  const bool flipped = mesh.pattern == DiagonalPattern::Alternating && (i + j) % 2 == 1;
  if (!flipped) {
    if (r <= s) return v00 + s * (v10 - v00) + r * (v11 - v10);  // (p00, p10, p11)
    return v00 + r * (v01 - v00) + s * (v11 - v01);               // (p00, p11, p01)
  }
  if (r + s <= 1.0) return v00 + s * (v10 - v00) + r * (v01 - v00);  // (p00, p10, p01)
  return v11 + (1.0 - s) * (v01 - v11) + (1.0 - r) * (v10 - v11);     // (p10, p11, p01)
}

/// ||w - v_h||_{L^2} by elementwise quadrature (6-point Gauss, degree-4 triangle rule).
inline double l2_error(const SpatialMesh& mesh, const Eigen::VectorXd& v, const SpatialFunction& w) {
  CompensatedSum sum;
  const auto nodal = [&](int node) {
    const int i = mesh.interior_index[node];
    return i < 0 ? 0.0 : v[i];
  };
  if (mesh.dim == 1) {
    const GaussRule& g = gauss_legendre_unit(6);
    for (const auto& e : mesh.elements) {
      const double x0 = mesh.nodes[e[0]].x();
      const double len = mesh.nodes[e[1]].x() - x0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double s = g.nodes[q];
        const double d = w(x0 + s * len, 0.0) - ((1.0 - s) * nodal(e[0]) + s * nodal(e[1]));
        sum += g.weights[q] * len * d * d;
      }
    }
    return std::sqrt(sum.value());
  }
  const auto& rule = detail::triangle_rule();
  for (const auto& e : mesh.elements) {
    const double area = signed_area(mesh, e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      const Eigen::Vector2d p =
          l[0] * mesh.nodes[e[0]] + l[1] * mesh.nodes[e[1]] + l[2] * mesh.nodes[e[2]];
      const double uh = l[0] * nodal(e[0]) + l[1] * nodal(e[1]) + l[2] * nodal(e[2]);
      const double d = w(p.x(), p.y()) - uh;
      sum += rule.weights[q] * area * d * d;
    }
  }
  return std::sqrt(sum.value());
}

}  // namespace tfpg
