#pragma once

// Two-parameter Mittag-Leffler function on the real axis and reference
// solutions of the scalar fractional ODE  d^alpha u + lambda u = f, u(0)=0.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "tfpg/errors.hpp"
#include "tfpg/time_source.hpp"

namespace tfpg {

struct MittagLefflerParams {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Which evaluation route `mittag_leffler` takes for a given argument.
enum class MittagLefflerBranch { Series, Asymptotic, Integral, Exponential };

namespace detail {

inline bool near_nonpositive_integer(double x) {
  return x <= 0.0 && std::abs(x - std::round(x)) < 1e-14;
}

// 1/Gamma(x), zero at the poles, finite for large negative x.
inline long double rgamma(long double x) {
  if (near_nonpositive_integer(static_cast<double>(x))) return 0.0L;
  if (x > 0.0L) return std::exp(-std::lgamma(x));
  // Reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
  const long double s = boost::math::sin_pi(x);
  return std::exp(std::lgamma(1.0L - x)) * s / std::numbers::pi_v<long double>;
}

inline void check_params(const MittagLefflerParams& p, double z) {
  require(p.alpha > 0.0 && p.alpha <= 1.0,
          "mittag_leffler: alpha=" + std::to_string(p.alpha) + " outside supported range (0,1]");
  require(std::isfinite(p.beta), "mittag_leffler: beta must be finite");
  require(std::isfinite(z), "mittag_leffler: z must be finite");
}

}  // namespace detail

/// Taylor series sum z^k / Gamma(alpha k + beta), summed in extended
/// precision with compensation.
inline double mittag_leffler_series(const MittagLefflerParams& p, double z) {
  detail::check_params(p, z);
  if (z == 0.0) return static_cast<double>(detail::rgamma(p.beta));
  const long double a = p.alpha;
  const long double b = p.beta;
  const long double log_abs_z = std::log(std::abs(static_cast<long double>(z)));
  const bool negative = z < 0.0;
  // Terms peak near alpha k ~ |z|^{1/alpha}.
  const double peak = std::pow(std::abs(z), 1.0 / p.alpha) / p.alpha;
  if (peak > 5.0e4)
    throw DomainError("mittag_leffler_series: |z|=" + std::to_string(std::abs(z)) +
                      " too large for alpha=" + std::to_string(p.alpha));

  long double sum = 0.0L;
  long double carry = 0.0L;
  const int max_terms = static_cast<int>(peak) + 2000;
  for (int k = 0; k < max_terms; ++k) {
    const long double x = a * k + b;
    long double term;
    if (x > 0.0L) {
      term = std::exp(k * log_abs_z - std::lgamma(x));
    } else {
      term = std::pow(std::abs(static_cast<long double>(z)), k) * detail::rgamma(x);
    }
    if (negative && (k % 2 == 1)) term = -term;
    const long double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      carry += (sum - t) + term;
    else
      carry += (term - t) + sum;
    sum = t;
    if (k > peak && std::abs(term) <= 1e-21L * std::abs(sum + carry)) {
      const double result = static_cast<double>(sum + carry);
      if (!std::isfinite(result))
        throw DomainError("mittag_leffler_series: result overflows double precision");
      return result;
    }
  }
  throw NumericError("mittag_leffler_series: series did not converge");
}

/// Real-axis asymptotic expansion for z -> -infinity with optimal truncation.
struct AsymptoticValue {
  double value = 0.0;
  double error_estimate = 0.0;  ///< magnitude of the first omitted nonzero term
};

inline AsymptoticValue mittag_leffler_asymptotic(const MittagLefflerParams& p, double z) {
  detail::check_params(p, z);
  detail::require(z < 0.0, "mittag_leffler_asymptotic: requires z < 0");
  const long double log_abs_z = std::log(std::abs(static_cast<long double>(z)));
  long double sum = 0.0L;
  long double previous = std::numeric_limits<long double>::infinity();
  AsymptoticValue out;
  out.error_estimate = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const long double x = static_cast<long double>(p.beta) - static_cast<long double>(p.alpha) * k;
    if (detail::near_nonpositive_integer(static_cast<double>(x))) continue;
    // |z|^{-k} / Gamma(x), via reflection for x < 0
    long double magnitude;
    long double sign;
    if (x > 0.0L) {
      magnitude = std::exp(-k * log_abs_z - std::lgamma(x));
      sign = std::tgamma(x) > 0 ? 1.0L : -1.0L;
    } else {
      const long double s = boost::math::sin_pi(x);
      magnitude = std::exp(std::lgamma(1.0L - x) - k * log_abs_z) * std::abs(s) /
                  std::numbers::pi_v<long double>;
      sign = s > 0 ? 1.0L : -1.0L;
    }
    if (magnitude > previous) {
      out.error_estimate = static_cast<double>(magnitude);
      break;
    }
    previous = magnitude;
    const long double zk_sign = (k % 2 == 1) ? -1.0L : 1.0L;  // sign of z^{-k}
    sum -= zk_sign * sign * magnitude;
    out.error_estimate = static_cast<double>(magnitude);
  }
  out.value = static_cast<double>(sum);
  return out;
}

/// Integral representation on the negative real axis (0 < alpha < 1):
///   E(z) = 1/(pi alpha) \int_0^inf r^{(1-beta)/alpha} exp(-r^{1/alpha})
///          (r sin(pi(1-beta)) - z sin(pi(1-beta+alpha))) / (r^2 - 2 r z cos(pi alpha) + z^2) dr
/// valid for beta < 1 + alpha; larger beta go through the recurrence
///   E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
inline double mittag_leffler_integral(const MittagLefflerParams& p, double z, double tol = 1e-13) {
  detail::check_params(p, z);
  detail::require(z < 0.0, "mittag_leffler_integral: requires z < 0");
  detail::require(p.alpha < 1.0, "mittag_leffler_integral: requires alpha < 1");
  const double a = p.alpha;
  const double b = p.beta;
  if (b >= 1.0 + a) {
    const MittagLefflerParams lower{a, b - a};
    return (mittag_leffler_integral(lower, z, tol) - static_cast<double>(detail::rgamma(b - a))) / z;
  }
  const double pi = std::numbers::pi;
  const double s1 = boost::math::sin_pi(1.0 - b);
  const double s2 = boost::math::sin_pi(1.0 - b + a);
  const double c = boost::math::cos_pi(a);
  const double power = (1.0 - b) / a;
  auto kernel = [&](double r) {
    if (r <= 0.0) return power == 0.0 ? (-z * s2) / (z * z) / (pi * a) : 0.0;
    const double num = r * s1 - z * s2;
    const double den = r * r - 2.0 * r * z * c + z * z;
    return std::pow(r, power) * std::exp(-std::pow(r, 1.0 / a)) * num / den / (pi * a);
  };
  const double upper = std::pow(80.0, a);
  double total = 0.0;
  double error = 0.0;
  double l1_total = 0.0;
  auto integrate = [&](double lo, double hi) {
    if (hi <= lo) return;
    double err = 0.0;
    double l1 = 0.0;
    double v;
    // exp(-r^{1/alpha}) and r^power are not smooth at r = 0.
    if (lo == 0.0) {
      boost::math::quadrature::tanh_sinh<double> ts;
      v = ts.integrate(kernel, lo, hi, tol, &err, &l1);
    } else {
      v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(kernel, lo, hi, 10, tol,
                                                                        &err, &l1);
    }
    total += v;
    error += err;
    l1_total += l1;
  };
  // The denominator is smallest near r = -z cos(pi alpha) when alpha > 1/2.
  const double peak = z * c;
  if (peak > 0.0 && peak < upper) {
    integrate(0.0, peak);
    integrate(peak, upper);
  } else {
    integrate(0.0, upper);
  }
  if (!std::isfinite(total) || error > 1e2 * tol * std::max(l1_total, 1e-300))
    throw NumericError("mittag_leffler_integral: quadrature did not converge (alpha=" +
                       std::to_string(a) + ", beta=" + std::to_string(b) +
                       ", z=" + std::to_string(z) + ")");
  return total;
}

/// Branch `mittag_leffler` takes for (p, z).
inline MittagLefflerBranch mittag_leffler_branch(const MittagLefflerParams& p, double z) {
  detail::check_params(p, z);
  if (p.alpha == 1.0 && (p.beta == 1.0 || p.beta == 2.0)) return MittagLefflerBranch::Exponential;
  if (z >= 0.0) return MittagLefflerBranch::Series;
  // Series cancellation grows like exp(|z|^{1/alpha}); extended precision
  // absorbs up to about e^10.
  if (std::pow(-z, 1.0 / p.alpha) <= 10.0) return MittagLefflerBranch::Series;
  if (p.alpha == 1.0) return MittagLefflerBranch::Series;
  const AsymptoticValue asym = mittag_leffler_asymptotic(p, z);
  if (asym.error_estimate <= 1e-16 * std::abs(asym.value)) return MittagLefflerBranch::Asymptotic;
  return MittagLefflerBranch::Integral;
}

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta), 0 < alpha <= 1.
///
/// Relative accuracy is about 1e-12 on the negative axis; positive z is
/// supported as long as the result is representable.
inline double mittag_leffler(const MittagLefflerParams& p, double z) {
  switch (mittag_leffler_branch(p, z)) {
    case MittagLefflerBranch::Exponential:
      if (p.beta == 1.0) return std::exp(z);
      return z == 0.0 ? 1.0 : std::expm1(z) / z;
    case MittagLefflerBranch::Series:
      if (p.alpha == 1.0 && std::abs(z) > 30.0)
        throw DomainError("mittag_leffler: alpha=1 with beta=" + std::to_string(p.beta) +
                          " is only supported for |z| <= 30");
      return mittag_leffler_series(p, z);
    case MittagLefflerBranch::Asymptotic:
      return mittag_leffler_asymptotic(p, z).value;
    case MittagLefflerBranch::Integral:
      return mittag_leffler_integral(p, z);
  }
  return 0.0;
}

inline double mittag_leffler(double alpha, double beta, double z) {
  return mittag_leffler(MittagLefflerParams{alpha, beta}, z);
}

namespace detail {
inline void check_ode_reference_args(double alpha, double lambda, double t) {
  require(alpha > 0.0 && alpha <= 1.0, "ode_reference: alpha must lie in (0,1]");
  require(lambda >= 0.0, "ode_reference: lambda must be nonnegative");
  require(t >= 0.0, "ode_reference: t must be nonnegative");
}
}  // namespace detail

/// Solution of d^alpha u + lambda u = f by the convolution with the scalar
/// solution kernel s^{alpha-1} E_{alpha,alpha}(-lambda s^alpha). The
/// substitution w = s^alpha removes the kernel singularity:
///   u(t) = (1/alpha) \int_0^{t^alpha} E_{alpha,alpha}(-lambda w) f(t - w^{1/alpha}) dw.
inline double ode_reference_convolution(double alpha, double lambda, const TimeSource& source,
                                        double t, double tol = 1e-10) {
  detail::check_ode_reference_args(alpha, lambda, t);
  detail::validate(source);
  if (t == 0.0) return 0.0;
  auto integrand = [&](double w) {
    const double s = std::pow(w, 1.0 / alpha);
    const double lag = std::max(t - s, 0.0);
    if (lag == 0.0 && std::holds_alternative<PowerSource>(source)) return 0.0;
    return mittag_leffler(alpha, alpha, -lambda * w) * source_value(source, lag);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(integrand, 0.0, std::pow(t, alpha), tol, &error, &l1);
  if (!std::isfinite(value) || error > 1e2 * tol * std::max(l1, 1e-300))
    throw NumericError("ode_reference: convolution quadrature did not converge at t=" +
                       std::to_string(t));
  return value / alpha;
}

/// Reference solution u(t). Constant sources use the closed form
/// c t^alpha E_{alpha,alpha+1}(-lambda t^alpha); everything else goes
/// through the convolution.
inline double ode_reference(double alpha, double lambda, const TimeSource& source, double t,
                            double tol = 1e-10) {
  detail::check_ode_reference_args(alpha, lambda, t);
  if (const auto* c = std::get_if<ConstantSource>(&source)) {
    if (t == 0.0) return 0.0;
    const double ta = std::pow(t, alpha);
    return c->value * ta * mittag_leffler(alpha, alpha + 1.0, -lambda * ta);
  }
  return ode_reference_convolution(alpha, lambda, source, t, tol);
}

}  // namespace tfpg
