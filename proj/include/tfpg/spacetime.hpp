#pragma once

// Space-time Petrov-Galerkin solve of d^alpha u - Laplace u = f with zero
// initial and boundary data: P1 in space, fractionalized piecewise
// constants in time, cell indicators as temporal test functions.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfpg/errors.hpp"
#include "tfpg/fem_space.hpp"
#include "tfpg/frac_ode.hpp"
#include "tfpg/frac_time.hpp"
#include "tfpg/temporal_mesh.hpp"
#include "tfpg/time_gram.hpp"
#include "tfpg/time_source.hpp"

namespace tfpg {

struct SourceTerm {
  TimeSource time;
  SpatialFunction space;
};

/// f(x,t) = sum_i g_i(t) w_i(x).
struct SeparableSource {
  std::vector<SourceTerm> terms;
};

/// Benchmark data: (a)-(d) on the unit interval, (e)-(f) on the unit square.
inline bool valid_case(char c) { return c >= 'a' && c <= 'f'; }

inline int case_dimension(char c) {
  detail::require(valid_case(c), std::string("unknown case '") + c + "'");
  return c <= 'd' ? 1 : 2;
}

inline SeparableSource case_source(char c) {
  detail::require(valid_case(c), std::string("unknown case '") + c + "'");
  const SpatialFunction bubble1 = [](double x, double) { return x * (1.0 - x); };
  const SpatialFunction bubble2 = [](double x, double y) { return x * (1.0 - x) * y * (1.0 - y); };
  const SpatialFunction one = [](double, double) { return 1.0; };
  switch (c) {
    case 'a': return {{{ExpMinusOneSource{}, bubble1}}};
    case 'b': return {{{ExpSource{}, bubble1}}};
    case 'c': return {{{make_power_source(-0.3), bubble1}}};
    case 'd': return {{{make_power_source(-0.3), one}}};
    case 'e': return {{{SinSource{}, bubble2}}};
    default: return {{{make_power_source(-0.3), bubble2}}};
  }
}

/// Predicted L^2(Q_T) rate alpha + s for the benchmark cases.
inline double case_theoretical_rate(char c, double alpha) {
  detail::require(valid_case(c), std::string("unknown case '") + c + "'");
  switch (c) {
    case 'a':
    case 'e': return alpha + 1.0;
    case 'b': return alpha + 0.5;
    default: return alpha + 0.2;
  }
}

struct SpaceTimeSolution {
  RowMatrix U;  // row k: spatial coefficients of the k-th differenced trial function
  TemporalMesh tmesh;
  SpatialMesh smesh;
};

/// F(l, i) = (\int_{t_{l-1}}^{t_l} g) (w, phi_i), summed over terms.
inline RowMatrix assemble_load(const SeparableSource& source, const TemporalMesh& tmesh,
                               const SpatialMesh& smesh) {
  detail::require(!source.terms.empty(), "assemble_load: source has no terms");
  RowMatrix F = RowMatrix::Zero(tmesh.K(), smesh.num_interior());
  for (const auto& term : source.terms) {
    const auto slabs = slab_integrals(tmesh, term.time);
    const Eigen::VectorXd space = load_vector(smesh, term.space);
    for (int l = 0; l < tmesh.K(); ++l) F.row(l) += slabs[l] * space.transpose();
  }
  return F;
}

namespace detail {
inline void check_shapes(const RowMatrix& X, const TemporalMesh& tmesh, const SpatialMatrices& mats,
                         const char* what) {
  require(X.rows() == tmesh.K() && X.cols() == mats.mass.rows(),
          std::string(what) + ": array must be K x N (" + std::to_string(tmesh.K()) + " x " +
              std::to_string(mats.mass.rows()) + ")");
}

// H(i, l) = s[k0 + i - l] for the block rows k0..k0+B-1 and history columns l < k0.
inline Eigen::MatrixXd toeplitz_block(const std::vector<double>& s, int k0, int B) {
  Eigen::MatrixXd T(B, k0);
  for (int i = 0; i < B; ++i)
    for (int l = 0; l < k0; ++l) T(i, l) = s[k0 + i - l];
  return T;
}
}  // namespace detail

/// Time stepping for the block lower-triangular system:
///   (tau Gamma(alpha+1) M + beta s_0 A) U_k = F_k - beta A sum_{l<k} s_{k-l} U_l.
/// The history is applied in blocks so most of the work is matrix products.
inline RowMatrix step_solve(const RowMatrix& F, const TemporalMesh& tmesh,
                            const SpatialMatrices& mats, double tol = 1e-12,
                            SpdSolver::Method method = SpdSolver::Method::Auto) {
  detail::check_shapes(F, tmesh, mats, "step_solve");
  const TemporalSystem sys = assemble_temporal_system(tmesh, BasisVariant::Differenced);
  const auto& s = sys.stiffness_column;
  const double beta = sys.stiffness_scale;
  const int K = tmesh.K();
  const int N = static_cast<int>(mats.mass.rows());
  const SparseMatrix S = sys.mass_scale * mats.mass + (beta * s[0]) * mats.stiffness;
  const SpdSolver solver(S, tol, method);

  RowMatrix U = RowMatrix::Zero(K, N);
  RowMatrix V = RowMatrix::Zero(K, N);  // A U_l
  constexpr int block = 64;
  for (int k0 = 0; k0 < K; k0 += block) {
    const int B = std::min(block, K - k0);
    RowMatrix history = RowMatrix::Zero(B, N);
    if (k0 > 0) history.noalias() = detail::toeplitz_block(s, k0, B) * V.topRows(k0);
    for (int i = 0; i < B; ++i) {
      const int k = k0 + i;
      Eigen::VectorXd h = history.row(i).transpose();
      for (int l = k0; l < k; ++l) h += s[k - l] * V.row(l).transpose();
      const Eigen::VectorXd rhs = F.row(k).transpose() - beta * h;
      try {
        U.row(k) = solver.solve(rhs).transpose();
      } catch (const NumericError& e) {
        throw NumericError("step_solve: step " + std::to_string(k + 1) + ": " + e.what());
      }
      V.row(k) = (mats.stiffness * U.row(k).transpose()).transpose();
    }
  }
  return U;
}

/// Left-hand side of the space-time system applied to U.
inline RowMatrix forward_apply(const RowMatrix& U, const TemporalMesh& tmesh,
                               const SpatialMatrices& mats) {
  detail::check_shapes(U, tmesh, mats, "forward_apply");
  const TemporalSystem sys = assemble_temporal_system(tmesh, BasisVariant::Differenced);
  const int K = tmesh.K();
  const RowMatrix MU = (U * mats.mass).eval();     // symmetric, so rows of M U_k
  const RowMatrix AU = (U * mats.stiffness).eval();
  RowMatrix F = sys.mass_scale * MU;
  for (int k = 0; k < K; ++k)
    for (int l = 0; l <= k; ++l) F.row(k) += sys.stiffness_scale * sys.stiffness_column[k - l] * AU.row(l);
  return F;
}

/// Modewise solve in the generalized eigenbasis; one scalar problem per mode.
inline RowMatrix spectral_oracle_solve(const RowMatrix& F, const SpatialEigen& eig,
                                       const TemporalMesh& tmesh) {
  const Eigen::Index N = eig.vectors.rows();
  detail::require(eig.vectors.cols() == N && eig.values.size() == N,
                  "spectral_oracle_solve: eigendecomposition must be complete");
  detail::require(F.rows() == tmesh.K() && F.cols() == N,
                  "spectral_oracle_solve: load array must be K x N");
  const Eigen::MatrixXd modal_loads = F * eig.vectors;  // K x N
  Eigen::MatrixXd C(tmesh.K(), N);
  std::vector<double> loads(tmesh.K());
  for (Eigen::Index j = 0; j < N; ++j) {
    for (int k = 0; k < tmesh.K(); ++k) loads[k] = modal_loads(k, j);
    const auto c = solve_ode_with_loads(tmesh, eig.values[j], loads);
    for (int k = 0; k < tmesh.K(); ++k) C(k, j) = c.coeffs[k];
  }
  return C * eig.vectors.transpose();
}

inline SpaceTimeSolution solve_spacetime(const SeparableSource& source, const TemporalMesh& tmesh,
                                         const SpatialMesh& smesh, const SpatialMatrices& mats,
                                         double tol = 1e-12) {
  const RowMatrix F = assemble_load(source, tmesh, smesh);
  return SpaceTimeSolution{step_solve(F, tmesh, mats, tol), tmesh, smesh};
}

inline double eval_solution(const SpaceTimeSolution& sol, double x, double y, double t) {
  const Eigen::VectorXd v = evaluate_rows(sol.tmesh, sol.U, t);
  return eval_fe(sol.smesh, v, x, y);
}

struct SpaceTimeErrors {
  double l2_qt_rel = 0.0;     // L^2(Q_T)
  double l2_final_rel = 0.0;  // L^2(Omega) at t = T
  double deriv_rel = 0.0;     // ||d^alpha e||_{L^2(Q_T)} / ||u||_{L^2(Q_T)}
};

/// Errors against one reference on the same spatial mesh, reusable across
/// coarse temporal meshes.
class SpaceTimeErrorMeter {
public:
  SpaceTimeErrorMeter(const SpaceTimeSolution& reference, const SpatialMatrices& mats,
                      TimeNorm norm = TimeNorm::ReferenceNodes)
      : tmesh_(reference.tmesh),
        M_(reference.smesh.M),
        dim_(reference.smesh.dim),
        norm_(norm),
        integrator_(reference.tmesh, reference.U, mats.mass),
        deriv_(std::tgamma(reference.tmesh.alpha() + 1.0) * reference.U) {
    final_ = evaluate_rows(tmesh_, reference.U, tmesh_.T());
    final_sq_ = final_.dot(mats.mass * final_);
  }

  [[nodiscard]] SpaceTimeErrors operator()(const SpaceTimeSolution& sol) const {
    detail::require(sol.smesh.M == M_ && sol.smesh.dim == dim_,
                    "spacetime_error: spatial meshes differ");
    detail::require(sol.tmesh.T() == tmesh_.T() && sol.tmesh.alpha() == tmesh_.alpha(),
                    "spacetime_error: temporal meshes differ in T or alpha");
    const auto& mass = integrator_.metric();
    const double ref_sq = integrator_.reference_norm_sq(norm_);
    detail::require(ref_sq > 0.0, "spacetime_error: reference solution is zero");
    SpaceTimeErrors e;
    e.l2_qt_rel = std::sqrt(integrator_.error_norm_sq(sol.tmesh, sol.U, norm_) / ref_sq);
    const Eigen::VectorXd d = evaluate_rows(sol.tmesh, sol.U, sol.tmesh.T()) - final_;
    e.l2_final_rel = std::sqrt(d.dot(mass * d) / final_sq_);
    const RowMatrix deriv = std::tgamma(sol.tmesh.alpha() + 1.0) * sol.U;
    e.deriv_rel =
        std::sqrt(piecewise_constant_distance_sq(sol.tmesh, deriv, tmesh_, deriv_, mass) / ref_sq);
    return e;
  }

private:
  TemporalMesh tmesh_;
  int M_;
  int dim_;
  TimeNorm norm_;
  TemporalErrorIntegrator integrator_;
  RowMatrix deriv_;
  Eigen::VectorXd final_;
  double final_sq_ = 0.0;
};

inline SpaceTimeErrors spacetime_error(const SpaceTimeSolution& sol, const SpaceTimeSolution& ref,
                                       const SpatialMatrices& mats,
                                       TimeNorm norm = TimeNorm::ReferenceNodes) {
  return SpaceTimeErrorMeter(ref, mats, norm)(sol);
}

/// Plain-text matrix dump: "rows cols" then one row per line, 17 significant digits.
inline void write_matrix(std::ostream& out, const RowMatrix& X) {
  out << X.rows() << ' ' << X.cols() << '\n';
  out << std::scientific << std::setprecision(16);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) out << (j ? " " : "") << X(i, j);
    out << '\n';
  }
}

inline RowMatrix read_matrix(std::istream& in) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw DomainError("read_matrix: malformed header");
  RowMatrix X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string token;
      if (!(in >> token)) throw DomainError("read_matrix: truncated data");
      char* end = nullptr;
      X(i, j) = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') throw DomainError("read_matrix: bad number '" + token + "'");
    }
  return X;
}

}  // namespace tfpg
