#pragma once

// L^2-in-time inner products between fractionalized trial functions on
// (possibly different) uniform meshes, and the error norms built on them.
//
// Everything is expressed in the cumulative basis (t - t_j)_+^alpha, where a
// function's coefficients are increments and stay small. Space-time
// functions carry one coefficient row per basis function; the spatial inner
// product is a sparse SPD matrix (the 1x1 identity for scalar problems).

#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tfpg/errors.hpp"
#include "tfpg/frac_time.hpp"
#include "tfpg/quadrature.hpp"
#include "tfpg/temporal_mesh.hpp"

namespace tfpg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Gram matrix of the cumulative basis on one uniform mesh.
///
/// Entry (j,k) = tau^{2 alpha + 1} g(|j-k|, K - max(j,k)) with
/// g(m, n) = \int_0^n x^alpha (x+m)^alpha dx, accumulated cell by cell so
/// that every entry is built from the same per-cell rules.
class UniformPowerGram {
public:
  explicit UniformPowerGram(const TemporalMesh& mesh) : mesh_(mesh) {
    const int K = mesh.K();
    const double a = mesh.alpha();
    table_.resize(K);
    const GaussRule& jacobi = gauss_jacobi_unit(12, a);
    const GaussRule& near = gauss_legendre_unit(12);
    const GaussRule& mid = gauss_legendre_unit(8);
    const GaussRule& far = gauss_legendre_unit(5);
    for (int m = 0; m < K; ++m) {
      auto& row = table_[m];
      row.resize(K - m);
      if (m == 0) {
        for (int n = 1; n <= K; ++n) row[n - 1] = std::pow(n, 2.0 * a + 1.0) / (2.0 * a + 1.0);
        continue;
      }
      CompensatedSum running;
      for (int i = 0; i < K - m; ++i) {
        double cell = 0.0;
        if (i == 0) {
          for (std::size_t q = 0; q < jacobi.size(); ++q)
            cell += jacobi.weights[q] * std::pow(jacobi.nodes[q] + m, a);
        } else {
          const GaussRule& rule = i < 4 ? near : (i < 32 ? mid : far);
          for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = i + rule.nodes[q];
            cell += rule.weights[q] * std::pow(x * (x + m), a);
          }
        }
        running += cell;
        row[i] = running.value();
      }
    }
    scale_ = std::pow(mesh.tau(), 2.0 * a + 1.0);
  }

  [[nodiscard]] const TemporalMesh& mesh() const { return mesh_; }

  /// \int_0^T (t - t_j)_+^alpha (t - t_k)_+^alpha dt, 0-based j,k < K.
  [[nodiscard]] double entry(int j, int k) const {
    const int m = std::abs(j - k);
    const int n = mesh_.K() - std::max(j, k);
    return scale_ * table_[m][n - 1];
  }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    const int K = mesh_.K();
    Eigen::MatrixXd G(K, K);
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k) G(j, k) = entry(j, k);
    return G;
  }

private:
  TemporalMesh mesh_;
  std::vector<std::vector<double>> table_;
  double scale_ = 1.0;
};

namespace detail {
inline void require_compatible(const TemporalMesh& a, const TemporalMesh& b, const char* what) {
  require(a.T() == b.T() && a.alpha() == b.alpha(),
          std::string(what) + ": meshes differ in T or alpha");
}
}  // namespace detail

/// (phi_j^coarse, phi_k^fine) for the cumulative bases of two meshes on the
/// same interval. Coarse nodes that coincide with fine nodes reuse the fine
/// lattice table; the rest use graded power-pair quadrature.
inline Eigen::MatrixXd cross_power_gram(const TemporalMesh& coarse, const UniformPowerGram& fine) {
  const TemporalMesh& fm = fine.mesh();
  detail::require_compatible(coarse, fm, "cross_power_gram");
  const int Kc = coarse.K();
  const int Kf = fm.K();
  Eigen::MatrixXd G(Kc, Kf);
  for (int j = 0; j < Kc; ++j) {
    // coarse node j sits at fine position j*Kf/Kc
    const long long num = static_cast<long long>(j) * Kf;
    if (num % Kc == 0) {
      const int jf = static_cast<int>(num / Kc);
      for (int k = 0; k < Kf; ++k) G(j, k) = fine.entry(jf, k);
    } else {
      const double a = coarse.node(j);
      for (int k = 0; k < Kf; ++k)
        G(j, k) = power_pair_integral(a, fm.node(k), fm.T(), fm.alpha(), 12);
    }
  }
  return G;
}

/// sum_{ij} A_ij B_ij with compensation.
inline double frobenius_dot(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B) {
  CompensatedSum s;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) s += A(i, j) * B(i, j);
  return s.value();
}

/// Increments of consecutive rows: cumulative-basis coefficients from
/// differenced-basis coefficients.
inline RowMatrix cumulative_rows(const RowMatrix& differenced) {
  RowMatrix out = differenced;
  for (Eigen::Index k = out.rows() - 1; k >= 1; --k) out.row(k) -= differenced.row(k - 1);
  return out;
}

inline SparseMatrix identity_metric(int n = 1) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

/// How the time integral in an L^2(0,T; L^2_M) distance is realized.
///
/// Exact integrates the piecewise-power functions exactly (lattice Gram
/// tables). ReferenceNodes applies the trapezoid rule on the reference
/// mesh nodes; this is the discrete norm the benchmark tables were
/// produced with.
enum class TimeNorm { Exact, ReferenceNodes };

inline std::string to_string(TimeNorm n) {
  return n == TimeNorm::Exact ? "exact" : "reference-nodes";
}

/// Values of the cumulative basis at the nodes of `at`: E(j,k) = (t_{j+1} - s_k)_+^alpha.
/// Node lags are formed from integer numerators so coincident nodes give 0.
inline Eigen::MatrixXd nodal_basis_values(const TemporalMesh& at, const TemporalMesh& basis) {
  detail::require(at.T() == basis.T(), "nodal_basis_values: meshes on different intervals");
  const long long Ka = at.K();
  const long long Kb = basis.K();
  const double unit = at.T() / static_cast<double>(Ka * Kb);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(Ka, Kb);
  for (long long j = 0; j < Ka; ++j) {
    for (long long k = 0; k < Kb; ++k) {
      const long long lag = (j + 1) * Kb - k * Ka;
      if (lag > 0) E(j, k) = std::pow(static_cast<double>(lag) * unit, basis.alpha());
    }
  }
  return E;
}

/// L^2(0,T; L^2_M) distances to one fixed reference function.
class TemporalErrorIntegrator {
public:
  /// `reference` holds differenced-basis coefficients (K_ref x N).
  TemporalErrorIntegrator(const TemporalMesh& reference_mesh, const RowMatrix& reference,
                          SparseMatrix metric)
      : mesh_(reference_mesh), metric_(std::move(metric)) {
    detail::require(reference.rows() == reference_mesh.K(),
                    "TemporalErrorIntegrator: reference rows must equal K");
    detail::require(reference.cols() == metric_.rows(),
                    "TemporalErrorIntegrator: metric size does not match reference");
    differenced_ = reference;
    cumulative_ = cumulative_rows(reference);
    nodal_ = nodal_basis_values(mesh_, mesh_) * cumulative_;
    nodal_sq_ = trapezoid(nodal_);
  }

  [[nodiscard]] const TemporalMesh& reference_mesh() const { return mesh_; }
  [[nodiscard]] const RowMatrix& reference_coefficients() const { return differenced_; }
  [[nodiscard]] const SparseMatrix& metric() const { return metric_; }

  /// Reference values at t_1..t_K of the reference mesh.
  [[nodiscard]] const RowMatrix& reference_nodal_values() const { return nodal_; }

  [[nodiscard]] double reference_norm_sq(TimeNorm norm = TimeNorm::Exact) const {
    if (norm == TimeNorm::ReferenceNodes) return nodal_sq_;
    ensure_exact();
    return exact_sq_;
  }

  /// ||u - u_ref||^2 for u given by differenced coefficients on `mesh`.
  [[nodiscard]] double error_norm_sq(const TemporalMesh& mesh, const RowMatrix& coefficients,
                                     TimeNorm norm = TimeNorm::Exact) const {
    detail::require(coefficients.rows() == mesh.K() && coefficients.cols() == metric_.rows(),
                    "error_norm_sq: coefficient shape mismatch");
    detail::require_compatible(mesh, mesh_, "error_norm_sq");
    const RowMatrix Y = cumulative_rows(coefficients);
    if (norm == TimeNorm::ReferenceNodes) {
      const RowMatrix D = nodal_basis_values(mesh_, mesh) * Y - nodal_;
      return trapezoid(D);
    }
    ensure_exact();
    if (mesh.K() == mesh_.K()) {
      const RowMatrix D = Y - cumulative_;
      const Eigen::MatrixXd S = (D * metric_) * D.transpose();
      return std::max(0.0, frobenius_dot(gram_->dense(), S));
    }
    const UniformPowerGram own(mesh);
    const Eigen::MatrixXd S_cc = (Y * metric_) * Y.transpose();
    const Eigen::MatrixXd S_cf = Y * weighted_.transpose();
    const Eigen::MatrixXd G_cf = cross_power_gram(mesh, *gram_);
    const double value =
        frobenius_dot(own.dense(), S_cc) - 2.0 * frobenius_dot(G_cf, S_cf) + exact_sq_;
    return std::max(0.0, value);
  }

private:
  // trapezoid on t_0..t_K with a zero value at t_0
  [[nodiscard]] double trapezoid(const RowMatrix& values) const {
    const RowMatrix weighted = values * metric_;
    CompensatedSum s;
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
      const double w = j + 1 == values.rows() ? 0.5 : 1.0;
      s += w * values.row(j).dot(weighted.row(j));
    }
    return mesh_.tau() * s.value();
  }

  void ensure_exact() const {
    std::call_once(*exact_once_, [this] {
      gram_ = std::make_unique<UniformPowerGram>(mesh_);
      weighted_ = cumulative_ * metric_;
      const Eigen::MatrixXd S = weighted_ * cumulative_.transpose();
      exact_sq_ = frobenius_dot(gram_->dense(), S);
    });
  }

  TemporalMesh mesh_;
  SparseMatrix metric_;
  RowMatrix differenced_;
  RowMatrix cumulative_;
  RowMatrix nodal_;
  double nodal_sq_ = 0.0;
  std::unique_ptr<std::once_flag> exact_once_ = std::make_unique<std::once_flag>();
  mutable std::unique_ptr<UniformPowerGram> gram_;
  mutable RowMatrix weighted_;
  mutable double exact_sq_ = 0.0;
};

/// \int_0^T |p(t) - q(t)|_M^2 dt for two piecewise-constant-in-time fields
/// (rows = cells) on uniform meshes of the same interval; exact.
inline double piecewise_constant_distance_sq(const TemporalMesh& mp, const RowMatrix& p,
                                             const TemporalMesh& mq, const RowMatrix& q,
                                             const SparseMatrix& metric) {
  detail::require(mp.T() == mq.T(), "piecewise_constant_distance_sq: different intervals");
  const long long Kp = mp.K();
  const long long Kq = mq.K();
  // Breakpoints i/Kp and j/Kq compared exactly as i*Kq vs j*Kp.
  long long i = 0;
  long long j = 0;
  long long position = 0;  // current left end in units of T/(Kp*Kq)
  const double unit = mp.T() / static_cast<double>(Kp * Kq);
  CompensatedSum total;
  Eigen::VectorXd diff(p.cols());
  while (i < Kp && j < Kq) {
    const long long next_p = (i + 1) * Kq;
    const long long next_q = (j + 1) * Kp;
    const long long next = std::min(next_p, next_q);
    diff = (p.row(i) - q.row(j)).transpose();
    total += static_cast<double>(next - position) * unit * diff.dot(metric * diff);
    position = next;
    if (next_p == next) ++i;
    if (next_q == next) ++j;
  }
  return total.value();
}

/// Value at time t of a function given by differenced coefficients.
inline Eigen::VectorXd evaluate_rows(const TemporalMesh& mesh, const RowMatrix& differenced,
                                     double t) {
  detail::require(t >= 0.0 && t <= mesh.T(), "evaluate_rows: t outside [0, T]");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(differenced.cols());
  for (int k = 1; k <= mesh.K(); ++k) {
    const double w = trial_basis(mesh, k, BasisVariant::Differenced, t);
    if (w != 0.0) out += w * differenced.row(k - 1).transpose();
  }
  return out;
}

}  // namespace tfpg
