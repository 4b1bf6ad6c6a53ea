#pragma once

// Gauss rules under an algebraic endpoint weight and the singular
// power-product integrals that all temporal Gram matrices are built from.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tfpg/errors.hpp"

namespace tfpg {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      carry_ += (sum_ - t) + value;
    else
      carry_ += (value - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double value) {
    add(value);
    return *this;
  }
  [[nodiscard]] double value() const { return sum_ + carry_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Nodes and weights on [0,1] for the weight s^exponent.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Golub-Welsch for the Jacobi weight (1+x)^b on [-1,1], mapped to [0,1].
inline GaussRule build_gauss_jacobi(int n, double b) {
  require(n >= 1, "quadrature order must be positive");
  require(b > -1.0, "Jacobi exponent must exceed -1");
  const double a = 0.0;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  diag(0) = (b - a) / (a + b + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    diag(k) = (b * b - a * a) / (s * (s + 2.0));
    const double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericError("Golub-Welsch eigensolve failed");

  const double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
  const double scale = std::pow(2.0, -b - 1.0);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v = solver.eigenvectors()(0, k);
    rule.nodes[k] = 0.5 * (solver.eigenvalues()(k) + 1.0);
    rule.weights[k] = scale * mu0 * v * v;
  }
  return rule;
}

}  // namespace detail

/// Gauss rule for \int_0^1 s^exponent g(s) ds, exact for polynomials g of
/// degree 2n-1. Rules are built once and cached process-wide.
inline const GaussRule& gauss_jacobi_unit(int n, double exponent) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, exponent}];
  if (!slot) slot = std::make_unique<GaussRule>(detail::build_gauss_jacobi(n, exponent));
  return *slot;
}

inline const GaussRule& gauss_legendre_unit(int n) { return gauss_jacobi_unit(n, 0.0); }

/// \int_{max(a,b)}^{T} (t-a)^alpha (t-b)^alpha dt.
///
/// With d = |b-a| the integrand is x^alpha (x+d)^alpha on [0, T-max(a,b)].
/// The first piece [0, min(d, L)] carries the endpoint singularity in the
/// Jacobi weight; the rest is split geometrically ([d,2d], [2d,4d], ...) so
/// that every Legendre panel sees its nearest singularity at least one panel
/// length away.
inline double power_pair_integral(double a, double b, double T, double alpha, int order = 12) {
  if (a > b) std::swap(a, b);
  const double L = T - b;
  if (L <= 0.0) return 0.0;
  const double d = b - a;
  if (d <= 0.0) return std::pow(L, 2.0 * alpha + 1.0) / (2.0 * alpha + 1.0);

  CompensatedSum total;
  const double first = std::min(d, L);
  {
    const GaussRule& rule = gauss_jacobi_unit(order, alpha);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * std::pow(first * rule.nodes[i] + d, alpha);
    total += std::pow(first, alpha + 1.0) * s;
  }
  const GaussRule& legendre = gauss_legendre_unit(order);
  for (double lo = d; lo < L; lo *= 2.0) {
    const double hi = std::min(2.0 * lo, L);
    const double width = hi - lo;
    double s = 0.0;
    for (std::size_t i = 0; i < legendre.size(); ++i) {
      const double x = lo + width * legendre.nodes[i];
      s += legendre.weights[i] * std::pow(x * (x + d), alpha);
    }
    total += width * s;
  }
  return total.value();
}

/// Same integral, doubling the rule order from 8 until successive values
/// agree to `tol` relative.
inline double power_pair_integral_checked(double a, double b, double T, double alpha,
                                          double tol = 1e-12) {
  double previous = power_pair_integral(a, b, T, alpha, 8);
  for (int order = 16; order <= 128; order *= 2) {
    const double current = power_pair_integral(a, b, T, alpha, order);
    if (std::abs(current - previous) <= tol * std::abs(current)) return current;
    previous = current;
  }
  throw NumericError("power_pair_integral: no convergence at order 128");
}

}  // namespace tfpg
