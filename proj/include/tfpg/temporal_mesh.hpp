#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tfpg/errors.hpp"

namespace tfpg {

/// Uniform partition of [0,T] into K cells, together with the fractional
/// order alpha in (0,1) that defines the trial space on it.
class TemporalMesh {
public:
  TemporalMesh(double T, int K, double alpha) : T_(T), K_(K), alpha_(alpha), tau_(T / K) {
    detail::require(std::isfinite(T) && T > 0.0, "TemporalMesh: T must be positive and finite");
    detail::require(K >= 1, "TemporalMesh: K must be at least 1");
    detail::require(alpha > 0.0 && alpha < 1.0,
                    "TemporalMesh: alpha must lie in the open interval (0,1), got " +
                        std::to_string(alpha));
  }

  [[nodiscard]] double T() const { return T_; }
  [[nodiscard]] int K() const { return K_; }
  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] double alpha() const { return alpha_; }

  /// Grid point t_k, k = 0..K; t_K is T exactly.
  [[nodiscard]] double node(int k) const { return k == K_ ? T_ : k * tau_; }

  /// Cell index l (0-based) with t in [t_l, t_{l+1}); t == T maps to the last cell.
  [[nodiscard]] int cell_of(double t) const {
    const int l = static_cast<int>(std::floor(t / tau_));
    return std::clamp(l, 0, K_ - 1);
  }

  /// Orders this close to 1 make the inf-sup constant collapse.
  [[nodiscard]] bool near_degenerate() const { return alpha_ > 0.95; }

  bool operator==(const TemporalMesh&) const = default;

private:
  double T_;
  int K_;
  double alpha_;
  double tau_;
};

/// Two equivalent bases for the fractionalized trial space.
///
/// Cumulative:  phi_k(t) = (t - t_{k-1})_+^alpha
/// Differenced: phi_k(t) = (t - t_{k-1})_+^alpha - (t - t_k)_+^alpha
enum class BasisVariant { Cumulative, Differenced };

inline std::string to_string(BasisVariant v) {
  return v == BasisVariant::Cumulative ? "cumulative" : "differenced";
}

struct TrialCoeffs {
  std::vector<double> coeffs;
  BasisVariant variant = BasisVariant::Differenced;
};

/// Cell values on [t_{l-1}, t_l), l = 1..K.
struct PiecewiseConstant {
  std::vector<double> values;
};

}  // namespace tfpg
