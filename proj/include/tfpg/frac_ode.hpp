#pragma once

// Petrov-Galerkin solve of d^alpha u + lambda u = f, u(0) = 0, with trial
// functions from the fractionalized space and cell-indicator tests.

#include <cmath>
#include <string>
#include <vector>

#include "tfpg/errors.hpp"
#include "tfpg/frac_time.hpp"
#include "tfpg/temporal_mesh.hpp"
#include "tfpg/time_gram.hpp"
#include "tfpg/time_source.hpp"

namespace tfpg {

struct OdeProblem {
  TemporalMesh mesh;
  double lambda = 0.0;
  TimeSource source = ConstantSource{1.0};
};

struct OdeSolution {
  TrialCoeffs coeffs;
  OdeProblem problem;
};

namespace detail {
inline void validate(const OdeProblem& p) {
  require(std::isfinite(p.lambda) && p.lambda >= 0.0,
          "OdeProblem: lambda must be nonnegative, got " + std::to_string(p.lambda));
  validate(p.source);
}
}  // namespace detail

/// Cell l value = \int_{t_{l-1}}^{t_l} f dt.
inline PiecewiseConstant slab_loads(const TemporalMesh& mesh, const TimeSource& source) {
  return PiecewiseConstant{slab_integrals(mesh, source)};
}

/// Forward substitution for (mass + lambda * stiffness) c = loads.
inline TrialCoeffs solve_ode_with_loads(const TemporalMesh& mesh, double lambda,
                                        const std::vector<double>& loads,
                                        BasisVariant variant = BasisVariant::Differenced) {
  detail::check_length(mesh, loads.size(), "solve_ode_with_loads");
  const TemporalSystem sys = assemble_temporal_system(mesh, variant);
  const int K = mesh.K();
  const double beta = lambda * sys.stiffness_scale;
  const auto& s = sys.stiffness_column;
  TrialCoeffs out{std::vector<double>(K, 0.0), variant};
  auto& c = out.coeffs;
  const double diag = sys.mass_scale + beta * s[0];
  double running = 0.0;  // sum of earlier coefficients (cumulative mass)
  for (int k = 0; k < K; ++k) {
    CompensatedSum history;
    for (int l = 0; l < k; ++l) history += s[k - l] * c[l];
    double rhs = loads[k] - beta * history.value();
    if (variant == BasisVariant::Cumulative) rhs -= sys.mass_scale * running;
    c[k] = rhs / diag;
    running += c[k];
  }
  return out;
}

inline OdeSolution solve_ode(const OdeProblem& problem,
                             BasisVariant variant = BasisVariant::Differenced) {
  detail::validate(problem);
  const auto loads = slab_loads(problem.mesh, problem.source);
  return OdeSolution{solve_ode_with_loads(problem.mesh, problem.lambda, loads.values, variant),
                     problem};
}

/// Largest Galerkin residual |(d^alpha u + lambda u, chi_l) - (f, chi_l)|
/// relative to the largest load.
inline double galerkin_residual(const OdeSolution& sol) {
  const auto& mesh = sol.problem.mesh;
  const TemporalSystem sys = assemble_temporal_system(mesh, sol.coeffs.variant);
  Eigen::Map<const Eigen::VectorXd> c(sol.coeffs.coeffs.data(), mesh.K());
  const Eigen::VectorXd lhs =
      sys.mass_matrix() * c + sol.problem.lambda * (sys.stiffness_matrix() * c);
  const auto loads = slab_loads(mesh, sol.problem.source).values;
  double worst = 0.0;
  double scale = 0.0;
  for (int l = 0; l < mesh.K(); ++l) {
    worst = std::max(worst, std::abs(lhs[l] - loads[l]));
    scale = std::max(scale, std::abs(loads[l]));
  }
  return scale > 0.0 ? worst / scale : worst;
}

struct OdeErrors {
  double l2_rel = 0.0;
  double halpha_rel = 0.0;
};

namespace detail {
inline RowMatrix as_rows(const TrialCoeffs& c) {
  const TrialCoeffs d = to_differenced(c);
  RowMatrix m(static_cast<Eigen::Index>(d.coeffs.size()), 1);
  for (std::size_t k = 0; k < d.coeffs.size(); ++k) m(static_cast<Eigen::Index>(k), 0) = d.coeffs[k];
  return m;
}

inline RowMatrix derivative_rows(const TemporalMesh& mesh, const TrialCoeffs& c) {
  const auto d = frac_deriv_trial(mesh, c).values;
  return Eigen::Map<const RowMatrix>(d.data(), static_cast<Eigen::Index>(d.size()), 1);
}
}  // namespace detail

/// Error norms against one reference solution, reusable across coarse meshes.
/// The fractional-derivative error is exact and normalized by the reference
/// L^2 norm; `norm` picks how the L^2 time integrals are realized.
class OdeErrorMeter {
public:
  explicit OdeErrorMeter(const OdeSolution& reference, TimeNorm norm = TimeNorm::ReferenceNodes)
      : reference_(reference),
        norm_(norm),
        integrator_(reference.problem.mesh, detail::as_rows(reference.coeffs), identity_metric()),
        deriv_(detail::derivative_rows(reference.problem.mesh, reference.coeffs)) {}

  [[nodiscard]] OdeErrors operator()(const OdeSolution& sol) const {
    const auto& rm = reference_.problem.mesh;
    const auto& m = sol.problem.mesh;
    detail::require(m.T() == rm.T() && m.alpha() == rm.alpha(),
                    "ode_error_norms: meshes differ in T or alpha");
    const double ref_sq = integrator_.reference_norm_sq(norm_);
    detail::require(ref_sq > 0.0, "ode_error_norms: reference solution is zero");
    OdeErrors e;
    e.l2_rel = std::sqrt(integrator_.error_norm_sq(m, detail::as_rows(sol.coeffs), norm_) / ref_sq);
    const double d2 = piecewise_constant_distance_sq(m, detail::derivative_rows(m, sol.coeffs), rm,
                                                     deriv_, integrator_.metric());
    e.halpha_rel = std::sqrt(d2 / ref_sq);
    return e;
  }

private:
  OdeSolution reference_;
  TimeNorm norm_;
  TemporalErrorIntegrator integrator_;
  RowMatrix deriv_;
};

inline OdeErrors ode_error_norms(const OdeSolution& sol, const OdeSolution& reference,
                                 TimeNorm norm = TimeNorm::ReferenceNodes) {
  return OdeErrorMeter(reference, norm)(sol);
}

}  // namespace tfpg
