#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "tfpg/benchmarks.hpp"
#include "tfpg/frac_time.hpp"

using namespace tfpg;

namespace {

TrialCoeffs cumulative(std::vector<double> c) { return {std::move(c), BasisVariant::Cumulative}; }
TrialCoeffs differenced(std::vector<double> c) { return {std::move(c), BasisVariant::Differenced}; }

}  // namespace

TEST(TemporalMesh, RejectsBadParameters) {
  EXPECT_THROW(TemporalMesh(1.0, 0, 0.5), DomainError);
  EXPECT_THROW(TemporalMesh(0.0, 4, 0.5), DomainError);
  EXPECT_THROW(TemporalMesh(1.0, 4, 0.0), DomainError);
  EXPECT_THROW(TemporalMesh(1.0, 4, 1.0), DomainError);
}

TEST(TemporalMesh, LastNodeIsExactlyT) {
  const TemporalMesh m(0.7, 3, 0.5);
  EXPECT_EQ(m.node(3), 0.7);
  EXPECT_EQ(m.cell_of(0.7), 2);
  EXPECT_EQ(m.cell_of(0.0), 0);
}

TEST(EvalTrial, FirstBasisAtFirstNodeIsTauToAlpha) {
  const TemporalMesh m(1.0, 5, 0.3);
  EXPECT_NEAR(eval_trial(m, cumulative({1, 0, 0, 0, 0}), 0.2), std::pow(0.2, 0.3), 1e-15);
}

TEST(EvalTrial, VanishesAtZero) {
  const TemporalMesh m(1.0, 3, 0.6);
  EXPECT_EQ(eval_trial(m, differenced({1.5, -2.0, 3.0}), 0.0), 0.0);
  EXPECT_EQ(eval_trial(m, cumulative({1.5, -2.0, 3.0}), 0.0), 0.0);
}

TEST(EvalTrial, TwoCellSum) {
  const TemporalMesh m(1.0, 2, 0.5);
  EXPECT_NEAR(eval_trial(m, cumulative({1, 1}), 1.0), 1.0 + std::sqrt(0.5), 1e-15);
}

TEST(EvalTrial, OutsideIntervalIsDomainError) {
  const TemporalMesh m(1.0, 2, 0.5);
  EXPECT_THROW(eval_trial(m, cumulative({1, 1}), 1.5), DomainError);
  EXPECT_THROW(eval_trial(m, cumulative({1, 1}), -0.1), DomainError);
  EXPECT_THROW(eval_trial(m, cumulative({1}), 0.5), DomainError);
}

TEST(EvalTrial, BasisVariantsRepresentTheSameFunction) {
  const TemporalMesh m(2.0, 6, 0.45);
  const auto d = differenced({0.3, -1.0, 2.0, 0.5, 0.0, 1.2});
  const auto c = to_cumulative(d);
  for (double t : {0.0, 0.1, 0.33, 0.9, 1.5, 2.0})
    EXPECT_NEAR(eval_trial(m, d, t), eval_trial(m, c, t), 1e-14);
  const auto back = to_differenced(c);
  for (std::size_t i = 0; i < d.coeffs.size(); ++i)
    EXPECT_NEAR(back.coeffs[i], d.coeffs[i], 1e-15);
}

TEST(TrialBasis, DifferencedBasisIsLocalOnlyInItsDerivative) {
  const TemporalMesh m(1.0, 4, 0.5);
  EXPECT_EQ(trial_basis(m, 2, BasisVariant::Differenced, 0.2), 0.0);
  EXPECT_NEAR(trial_basis(m, 2, BasisVariant::Differenced, 0.5), std::sqrt(0.25), 1e-15);
  EXPECT_NEAR(trial_basis(m, 2, BasisVariant::Differenced, 1.0),
              std::sqrt(0.75) - std::sqrt(0.5), 1e-15);
}

TEST(FracDerivTrial, DifferencedIsScaledCoefficients) {
  const TemporalMesh m(1.0, 3, 0.7);
  const auto p = frac_deriv_trial(m, differenced({1, 2, 3}));
  const double g = std::tgamma(1.7);
  EXPECT_NEAR(p.values[0], g, 1e-15);
  EXPECT_NEAR(p.values[1], 2 * g, 1e-15);
  EXPECT_NEAR(p.values[2], 3 * g, 1e-15);
}

TEST(FracDerivTrial, FirstCumulativeBasisHasConstantDerivative) {
  const TemporalMesh m(1.0, 4, 0.4);
  for (double v : frac_deriv_trial(m, cumulative({1, 0, 0, 0})).values)
    EXPECT_NEAR(v, std::tgamma(1.4), 1e-15);
}

TEST(FracDerivTrial, HalfOrderExample) {
  const TemporalMesh m(1.0, 2, 0.5);
  const auto p = frac_deriv_trial(m, differenced({2, 0}));
  EXPECT_NEAR(p.values[0], std::sqrt(M_PI), 1e-15);
  EXPECT_EQ(p.values[1], 0.0);
}

TEST(FracDerivTrial, InvertsTheFractionalIntegral) {
  const TemporalMesh m(1.0, 7, 0.35);
  const PiecewiseConstant p{{0.1, -2.0, 3.5, 0.0, 4.0, -1.0, 0.25}};
  const auto back = frac_deriv_trial(m, frac_integral_piecewise(m, p));
  for (int l = 0; l < 7; ++l) EXPECT_NEAR(back.values[l], p.values[l], 1e-14);
}

TEST(ToeplitzWeights, HalfOrderValues) {
  const auto d = cumulative_weights(0.5, 2);
  EXPECT_EQ(d[0], 1.0);
  EXPECT_NEAR(d[1], 1.8284271247461903, 1e-15);
  EXPECT_NEAR(differenced_weights(0.5, 1)[0], 0.8284271247461903, 1e-15);
}

TEST(ToeplitzWeights, PositiveMonotoneAndTelescoping) {
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const int K = 1024;
    const auto d = cumulative_weights(a, K);
    const auto e = differenced_weights(a, K);
    for (int k = 0; k < K; ++k) {
      EXPECT_GT(d[k], 0.0);
      EXPECT_GT(e[k], 0.0);
      if (k + 1 < K) {
        EXPECT_LT(e[k + 1], e[k]);
        EXPECT_GT(d[k + 1], d[k]) << "d_k grows like k^alpha";
      }
    }
    CompensatedSum s;
    for (double v : d) s += v;
    EXPECT_NEAR(s.value(), std::pow(K, a + 1.0), 1e-12 * std::pow(K, a + 1.0));
    // e_k = d_{k+1} - d_k
    for (int k = 0; k + 1 < K; ++k) EXPECT_NEAR(e[k], d[k + 1] - d[k], 1e-11 * d[k + 1]);
  }
}

TEST(TemporalSystemAssembly, DifferencedMassIsScaledIdentity) {
  const TemporalMesh m(1.0, 10, 0.5);
  const auto sys = assemble_temporal_system(m, BasisVariant::Differenced);
  EXPECT_NEAR(sys.mass_scale, 0.0886226925452758, 1e-15);
  const Eigen::MatrixXd M = sys.mass_matrix();
  EXPECT_TRUE(M.isApprox(sys.mass_scale * Eigen::MatrixXd::Identity(10, 10)));
}

// The Toeplitz closed forms must equal the Galerkin entries (phi_k, chi_l) and
// (d^alpha phi_k, chi_l), which are computed here by brute-force quadrature.
TEST(TemporalSystemAssembly, MatchesDirectIntegrationOfBasisAgainstIndicators) {
  const TemporalMesh m(1.3, 5, 0.6);
  const auto& rule = gauss_jacobi_unit(20, 0.0);
  for (auto variant : {BasisVariant::Cumulative, BasisVariant::Differenced}) {
    const auto sys = assemble_temporal_system(m, variant);
    const Eigen::MatrixXd S = sys.stiffness_matrix();
    const Eigen::MatrixXd Mm = sys.mass_matrix();
    for (int l = 0; l < 5; ++l) {
      for (int k = 0; k < 5; ++k) {
        // Integrate phi_k over cell l; kinks only at nodes, and each cell
        // piece is t^alpha-like at its left end, so use Jacobi on the cell.
        double s = 0.0;
        const double lo = m.node(l);
        const double hi = m.node(l + 1);
        const auto& jr = gauss_jacobi_unit(20, m.alpha());
        const auto& lr = rule;
        // split phi_k into its powers and integrate each exactly
        const auto piece = [&](double left) {
          if (hi <= left) return 0.0;
          if (lo <= left) {
            double v = 0.0;
            for (std::size_t i = 0; i < jr.size(); ++i) v += jr.weights[i];
            return std::pow(hi - left, m.alpha() + 1.0) * v;
          }
          double v = 0.0;
          for (std::size_t i = 0; i < lr.size(); ++i)
            v += lr.weights[i] * std::pow(lo + (hi - lo) * lr.nodes[i] - left, m.alpha());
          return (hi - lo) * v;
        };
        s = piece(m.node(k));
        if (variant == BasisVariant::Differenced) s -= piece(m.node(k + 1));
        EXPECT_NEAR(S(l, k), s, 1e-13) << to_string(variant) << " l=" << l << " k=" << k;

        const auto dphi = frac_deriv_trial(
            m, TrialCoeffs{[&] {
                             std::vector<double> c(5, 0.0);
                             c[k] = 1.0;
                             return c;
                           }(),
                           variant});
        EXPECT_NEAR(Mm(l, k), m.tau() * dphi.values[l], 1e-14);
      }
    }
  }
}

TEST(ProjectPiTau, ConstantsAreReproduced) {
  const TemporalMesh m(1.0, 4, 0.5);
  for (double v : project_pi_tau(m, [](double) { return 2.5; }).values) EXPECT_NEAR(v, 2.5, 1e-14);
}

TEST(ProjectPiTau, FirstBasisAverage) {
  const TemporalMesh m(1.0, 8, 0.3);
  const auto p = project_pi_tau(m, cumulative({1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_NEAR(p.values[0], std::pow(0.125, 0.3) / 1.3, 1e-15);
  const TemporalMesh one(1.0, 1, 0.5);
  EXPECT_NEAR(project_pi_tau(one, cumulative({1})).values[0], 2.0 / 3.0, 1e-15);
}

TEST(ProjectPiTau, ClosedFormAgreesWithQuadrature) {
  const TemporalMesh m(1.0, 6, 0.55);
  const auto c = differenced({1.0, -0.5, 2.0, 0.0, 0.3, -1.1});
  const auto exact = project_pi_tau(m, c);
  const auto quad = project_pi_tau(m, [&](double t) { return eval_trial(m, c, t); });
  for (int l = 0; l < 6; ++l) EXPECT_NEAR(exact.values[l], quad.values[l], 1e-12);
}

TEST(ProjectPiTau, IsIdempotentOnPiecewiseConstants) {
  const TemporalMesh m(1.0, 5, 0.5);
  const PiecewiseConstant p{{1.0, 0.1, -3.0, 1e-300, 7.0}};
  const auto q = project_pi_tau(m, project_pi_tau(m, p));
  EXPECT_EQ(q.values, p.values);
}

TEST(ProjectPiTau, IsNonExpansiveOnRandomTrialFunctions) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> pickK(1, 24);
  std::uniform_real_distribution<double> pickA(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const TemporalMesh m(1.0, pickK(rng), pickA(rng));
    std::vector<double> c(m.K());
    for (double& v : c) v = coef(rng);
    const Eigen::Map<const Eigen::VectorXd> x(c.data(), m.K());
    const double vv = x.dot(trial_gram(m) * x);
    const double pp = std::pow(l2_norm(m, project_pi_tau(m, cumulative(c))), 2);
    EXPECT_LE(pp, vv * (1.0 + 1e-12));
  }
}

TEST(TrialGram, SingleCellClosedForm) {
  EXPECT_NEAR(trial_gram(TemporalMesh(1.0, 1, 0.5))(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(trial_gram(TemporalMesh(2.0, 1, 0.3))(0, 0), std::pow(2.0, 1.6) / 1.6, 1e-14);
  const auto G = trial_gram(TemporalMesh(1.0, 2, 0.5));
  EXPECT_NEAR(G(0, 1), 0.21007919375623388, 1e-13);
  EXPECT_EQ(G(0, 1), G(1, 0));
}

TEST(TrialGram, CholeskySucceeds) {
  for (double a : {0.1, 0.5, 0.9}) {
    for (int K : {40, 160}) {
      Eigen::LLT<Eigen::MatrixXd> llt(trial_gram(TemporalMesh(1.0, K, a)));
      EXPECT_EQ(llt.info(), Eigen::Success) << "alpha=" << a << " K=" << K;
    }
  }
}

TEST(StabilityConstant, SingleCellClosedForm) {
  for (double a : {0.1, 0.5, 0.9})
    EXPECT_NEAR(stability_constant(a, 1), (2 * a + 1) / ((a + 1) * (a + 1)), 1e-13);
  EXPECT_NEAR(stability_constant(0.5, 1), 8.0 / 9.0, 1e-14);
}

// Two-cell values from a 50-digit generalized eigen-solve.
TEST(StabilityConstant, TwoCellOracle) {
  EXPECT_NEAR(stability_constant(0.5, 2), 0.69642837866030299545, 1e-12);
  EXPECT_NEAR(stability_constant(0.3, 2), 0.85998540826471739935, 1e-12);
}

TEST(StabilityConstant, InvariantUnderTimeRescaling) {
  for (double a : {0.3, 0.7})
    for (int K : {3, 17, 40})
      EXPECT_NEAR(stability_constant(a, K, 1.0), stability_constant(a, K, 2.0), 1e-10);
}

TEST(StabilityConstant, LiesInUnitInterval) {
  for (double a : {0.1, 0.5, 0.9, 0.98})
    for (int K : {1, 5, 20}) {
      const double c = stability_constant(a, K);
      EXPECT_GT(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
}

TEST(StabilityConstant, PublishedSpotValues) {
  EXPECT_NEAR(stability_constant(0.3, 20), 0.7711, 1e-3);
  EXPECT_NEAR(stability_constant(0.5, 160), 0.4700, 1e-3);
}

TEST(FractionalRitz, ReproducesTrialMembers) {
  const TemporalMesh m(1.0, 4, 0.5);
  const double g = std::tgamma(1.5);
  const auto r = to_cumulative(fractional_ritz_project(m, PiecewiseConstant{{g, g, g, g}}));
  EXPECT_NEAR(r.coeffs[0], 1.0, 1e-15);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(r.coeffs[k], 0.0, 1e-15);
}

TEST(FractionalRitz, ConvergesAtOrderAlphaPlusOneForSmoothData) {
  // v = t^{alpha+1}, d^alpha v = Gamma(alpha+2) t
  for (double a : {0.3, 0.6}) {
    std::vector<double> logK, logE;
    for (int K = 16; K <= 256; K *= 2) {
      const TemporalMesh m(1.0, K, a);
      PiecewiseConstant p{std::vector<double>(K)};
      for (int l = 0; l < K; ++l) p.values[l] = std::tgamma(a + 2.0) * (l + 0.5) / K;
      const auto w = fractional_ritz_project(m, p);
      logK.push_back(std::log(K));
      logE.push_back(std::log(l2_distance(m, w, [a](double t) { return std::pow(t, a + 1.0); })));
    }
    const double mx = std::accumulate(logK.begin(), logK.end(), 0.0) / logK.size();
    const double my = std::accumulate(logE.begin(), logE.end(), 0.0) / logE.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < logK.size(); ++i) {
      sxy += (logK[i] - mx) * (logE[i] - my);
      sxx += (logK[i] - mx) * (logK[i] - mx);
    }
    EXPECT_NEAR(-sxy / sxx, a + 1.0, 0.1) << "alpha=" << a;
  }
}
