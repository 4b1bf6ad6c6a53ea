#pragma once

// Riemann-Liouville calculus on the fractionalized piecewise-constant trial
// space, the Toeplitz temporal matrices, the cell-average projection and
// the inf-sup (stability) constant of that projection on the trial space.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tfpg/errors.hpp"
#include "tfpg/quadrature.hpp"
#include "tfpg/temporal_mesh.hpp"

namespace tfpg {

namespace detail {

inline void check_length(const TemporalMesh& mesh, std::size_t n, const char* what) {
  require(n == static_cast<std::size_t>(mesh.K()),
          std::string(what) + ": length " + std::to_string(n) + " does not match K=" +
              std::to_string(mesh.K()));
}

// (1+h)^p + (1-h)^p - 2 without cancellation for small h.
inline double second_difference_unit(double p, double h) {
  if (h > 0.1) return std::pow(1.0 + h, p) + std::pow(1.0 - h, p) - 2.0;
  // 2 * sum_{j>=1} binom(p, 2j) h^{2j}
  double binom = 1.0;
  double h_pow = 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 40; ++j) {
    binom *= (p - (2 * j - 2)) * (p - (2 * j - 1)) / ((2.0 * j - 1.0) * (2.0 * j));
    h_pow *= h * h;
    const double term = binom * h_pow;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return 2.0 * sum;
}

}  // namespace detail

/// d_k = k^{alpha+1} - (k-1)^{alpha+1}, k = 1..K.
inline std::vector<double> cumulative_weights(double alpha, int K) {
  detail::require(K >= 1, "cumulative_weights: K must be at least 1");
  const double p = alpha + 1.0;
  std::vector<double> d(K);
  d[0] = 1.0;
  for (int k = 2; k <= K; ++k)
    d[k - 1] = -std::pow(k, p) * std::expm1(p * std::log1p(-1.0 / k));
  return d;
}

/// e_k = d_{k+1} - d_k = (k+1)^{alpha+1} + (k-1)^{alpha+1} - 2 k^{alpha+1}, k = 1..count.
inline std::vector<double> differenced_weights(double alpha, int count) {
  const double p = alpha + 1.0;
  std::vector<double> e(std::max(count, 0));
  for (int k = 1; k <= count; ++k)
    e[k - 1] = std::pow(k, p) * detail::second_difference_unit(p, 1.0 / k);
  return e;
}

/// Convert between the two trial bases; the represented function is unchanged.
inline TrialCoeffs to_cumulative(const TrialCoeffs& c) {
  if (c.variant == BasisVariant::Cumulative) return c;
  TrialCoeffs out{std::vector<double>(c.coeffs.size()), BasisVariant::Cumulative};
  double previous = 0.0;
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
    out.coeffs[k] = c.coeffs[k] - previous;
    previous = c.coeffs[k];
  }
  return out;
}

inline TrialCoeffs to_differenced(const TrialCoeffs& c) {
  if (c.variant == BasisVariant::Differenced) return c;
  TrialCoeffs out{std::vector<double>(c.coeffs.size()), BasisVariant::Differenced};
  double running = 0.0;
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
    running += c.coeffs[k];
    out.coeffs[k] = running;
  }
  return out;
}

/// Value of the k-th basis function (1-based) at t.
inline double trial_basis(const TemporalMesh& mesh, int k, BasisVariant variant, double t) {
  const double a = mesh.alpha();
  const double left = mesh.node(k - 1);
  if (t <= left) return 0.0;
  double v = std::pow(t - left, a);
  if (variant == BasisVariant::Differenced && t > mesh.node(k)) v -= std::pow(t - mesh.node(k), a);
  return v;
}

/// Evaluate sum_k c_k phi_k(t) exactly (closed-form powers).
inline double eval_trial(const TemporalMesh& mesh, const TrialCoeffs& coeffs, double t) {
  detail::check_length(mesh, coeffs.coeffs.size(), "eval_trial");
  if (!(t >= 0.0 && t <= mesh.T()))
    throw DomainError("eval_trial: t=" + std::to_string(t) + " outside [0, T]");
  const TrialCoeffs cum = to_cumulative(coeffs);
  CompensatedSum sum;
  for (int k = 1; k <= mesh.K(); ++k) {
    const double left = mesh.node(k - 1);
    if (t <= left) break;
    sum += cum.coeffs[k - 1] * std::pow(t - left, mesh.alpha());
  }
  return sum.value();
}

/// Exact Riemann-Liouville derivative of order alpha of a trial function;
/// it is piecewise constant on the mesh.
inline PiecewiseConstant frac_deriv_trial(const TemporalMesh& mesh, const TrialCoeffs& coeffs) {
  detail::check_length(mesh, coeffs.coeffs.size(), "frac_deriv_trial");
  const double g = std::tgamma(mesh.alpha() + 1.0);
  const TrialCoeffs diff = to_differenced(coeffs);
  PiecewiseConstant out{diff.coeffs};
  for (double& v : out.values) v *= g;
  return out;
}

/// Left-sided Riemann-Liouville integral of order alpha of a piecewise
/// constant, returned as a trial function: I^alpha chi_[t_{k-1},t_k] = phi_k / Gamma(alpha+1)
/// in the differenced basis.
inline TrialCoeffs frac_integral_piecewise(const TemporalMesh& mesh, const PiecewiseConstant& p) {
  detail::check_length(mesh, p.values.size(), "frac_integral_piecewise");
  const double g = std::tgamma(mesh.alpha() + 1.0);
  TrialCoeffs out{p.values, BasisVariant::Differenced};
  for (double& v : out.coeffs) v /= g;
  return out;
}

/// Lower-triangular Toeplitz temporal matrices of the space-time system,
/// tested against the cell indicators chi_l:
///   stiffness(l,k) = (phi_k, chi_l) = stiffness_scale * column[l-k]
///   mass(l,k)      = (d^alpha phi_k, chi_l)
/// The mass is tau*Gamma(alpha+1) times the lower matrix of ones
/// (Cumulative) or times the identity (Differenced).
struct TemporalSystem {
  BasisVariant variant = BasisVariant::Differenced;
  double stiffness_scale = 0.0;
  std::vector<double> stiffness_column;
  double mass_scale = 0.0;

  [[nodiscard]] int size() const { return static_cast<int>(stiffness_column.size()); }

  [[nodiscard]] Eigen::MatrixXd stiffness_matrix() const {
    const int K = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K);
    for (int l = 0; l < K; ++l)
      for (int k = 0; k <= l; ++k) m(l, k) = stiffness_scale * stiffness_column[l - k];
    return m;
  }

  [[nodiscard]] Eigen::MatrixXd mass_matrix() const {
    const int K = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K);
    for (int l = 0; l < K; ++l) {
      if (variant == BasisVariant::Differenced)
        m(l, l) = mass_scale;
      else
        for (int k = 0; k <= l; ++k) m(l, k) = mass_scale;
    }
    return m;
  }
};

inline TemporalSystem assemble_temporal_system(const TemporalMesh& mesh,
                                               BasisVariant variant = BasisVariant::Differenced) {
  const double a = mesh.alpha();
  TemporalSystem sys;
  sys.variant = variant;
  sys.stiffness_scale = std::pow(mesh.tau(), a + 1.0) / (a + 1.0);
  sys.mass_scale = mesh.tau() * std::tgamma(a + 1.0);
  if (variant == BasisVariant::Cumulative) {
    sys.stiffness_column = cumulative_weights(a, mesh.K());
  } else {
    // Diagonal is d_1 = 1; below it e_1, e_2, ...
    sys.stiffness_column.resize(mesh.K());
    sys.stiffness_column[0] = 1.0;
    const auto e = differenced_weights(a, mesh.K() - 1);
    std::copy(e.begin(), e.end(), sys.stiffness_column.begin() + 1);
  }
  return sys;
}

/// Cell averages are already piecewise constant.
inline PiecewiseConstant project_pi_tau(const TemporalMesh& mesh, const PiecewiseConstant& p) {
  detail::check_length(mesh, p.values.size(), "project_pi_tau");
  return p;
}

/// Cell averages of a trial function, in closed form.
inline PiecewiseConstant project_pi_tau(const TemporalMesh& mesh, const TrialCoeffs& coeffs) {
  detail::check_length(mesh, coeffs.coeffs.size(), "project_pi_tau");
  const TrialCoeffs cum = to_cumulative(coeffs);
  const auto d = cumulative_weights(mesh.alpha(), mesh.K());
  const double scale = std::pow(mesh.tau(), mesh.alpha()) / (mesh.alpha() + 1.0);
  PiecewiseConstant out{std::vector<double>(mesh.K())};
  for (int m = 0; m < mesh.K(); ++m) {
    CompensatedSum s;
    for (int k = 0; k <= m; ++k) s += cum.coeffs[k] * d[m - k];
    out.values[m] = scale * s.value();
  }
  return out;
}

/// Cell averages of a general integrable function, by tanh-sinh quadrature
/// per cell (tolerates integrable endpoint singularities).
inline PiecewiseConstant project_pi_tau(const TemporalMesh& mesh,
                                        const std::function<double(double)>& f,
                                        double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  PiecewiseConstant out{std::vector<double>(mesh.K())};
  for (int l = 0; l < mesh.K(); ++l) {
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        integrator.integrate(f, mesh.node(l), mesh.node(l + 1), tol, &error, &l1);
    if (!std::isfinite(value) || error > 1e3 * tol * std::max(l1, 1e-300))
      throw NumericError("project_pi_tau: quadrature did not converge on cell " +
                         std::to_string(l + 1));
    out.values[l] = value / mesh.tau();
  }
  return out;
}

/// L^2(0,T) norm of a piecewise constant.
inline double l2_norm(const TemporalMesh& mesh, const PiecewiseConstant& p) {
  CompensatedSum s;
  for (double v : p.values) s += v * v;
  return std::sqrt(mesh.tau() * s.value());
}

/// Gram matrix (phi_k, phi_l) of the cumulative basis. Diagonal entries in
/// closed form, off-diagonal ones by endpoint-weighted Gauss quadrature.
inline Eigen::MatrixXd trial_gram(const TemporalMesh& mesh) {
  const int K = mesh.K();
  const double a = mesh.alpha();
  Eigen::MatrixXd G(K, K);
  for (int k = 0; k < K; ++k) {
    G(k, k) = std::pow(mesh.T() - mesh.node(k), 2.0 * a + 1.0) / (2.0 * a + 1.0);
    for (int l = k + 1; l < K; ++l) {
      G(k, l) = power_pair_integral_checked(mesh.node(k), mesh.node(l), mesh.T(), a);
      G(l, k) = G(k, l);
    }
  }
  return G;
}

/// Squared L^2 norm of the cell averages, as a Gram matrix on the cumulative
/// basis: A(k,l) = (Pi phi_k, Pi phi_l).
inline Eigen::MatrixXd projected_gram(const TemporalMesh& mesh) {
  const int K = mesh.K();
  const auto d = cumulative_weights(mesh.alpha(), K);
  const double scale = std::pow(mesh.tau(), mesh.alpha()) / (mesh.alpha() + 1.0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(K, K);  // P(m,k): average of phi_k on cell m
  for (int m = 0; m < K; ++m)
    for (int k = 0; k <= m; ++k) P(m, k) = scale * d[m - k];
  return mesh.tau() * P.transpose() * P;
}

/// Best constant c with c ||v||^2 <= ||Pi v||^2 over the trial space:
/// the smallest eigenvalue of A x = mu G x.
/// A and G both scale like T^{2 alpha + 1}, so c depends on (alpha, K) only.
/// It is evaluated on [0, 1]: for large K the Gram matrix is ill-conditioned
/// and rounding in the scaled entries would otherwise show up around 1e-9.
inline double stability_constant(double alpha, int K, double T = 1.0) {
  const TemporalMesh given(T, K, alpha);  // argument checks
  const TemporalMesh mesh(1.0, given.K(), given.alpha());
  const Eigen::MatrixXd G = trial_gram(mesh);
  const Eigen::MatrixXd A = projected_gram(mesh);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, G, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("stability_constant: generalized eigensolve failed (alpha=" +
                       std::to_string(alpha) + ", K=" + std::to_string(K) + ")");
  return solver.eigenvalues().minCoeff();
}

/// Fractional Ritz projection: the trial function whose alpha-derivative is
/// the cell-average projection of the given alpha-derivative data.
inline TrialCoeffs fractional_ritz_project(const TemporalMesh& mesh,
                                           const PiecewiseConstant& dalpha_cell_averages) {
  return frac_integral_piecewise(mesh, dalpha_cell_averages);
}

/// ||v - w||_{L^2(0,T)} for a trial function w and a callable v, by
/// tanh-sinh quadrature on each cell.
inline double l2_distance(const TemporalMesh& mesh, const TrialCoeffs& w,
                          const std::function<double(double)>& v, double tol = 1e-12) {
  const TrialCoeffs cum = to_cumulative(w);
  const double a = mesh.alpha();
  boost::math::quadrature::tanh_sinh<double> integrator;
  CompensatedSum total;
  for (int l = 0; l < mesh.K(); ++l) {
    auto sq = [&](double t) {
      double s = 0.0;
      for (int k = 0; k <= l; ++k) s += cum.coeffs[k] * std::pow(t - mesh.node(k), a);
      const double diff = v(t) - s;
      return diff * diff;
    };
    total += integrator.integrate(sq, mesh.node(l), mesh.node(l + 1), tol);
  }
  return std::sqrt(total.value());
}

}  // namespace tfpg
