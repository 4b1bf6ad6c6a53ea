#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "tfpg/errors.hpp"
#include "tfpg/temporal_mesh.hpp"

namespace tfpg {

/// Catalog of temporal source factors with closed-form slab integrals.
struct ConstantSource {
  double value = 1.0;
};
struct ExpSource {};          // e^t
struct ExpMinusOneSource {};  // e^t - 1
struct SinSource {};          // sin t
struct PowerSource {
  double exponent = 0.0;  // t^exponent, exponent > -1
};

using TimeSource = std::variant<ConstantSource, ExpSource, ExpMinusOneSource, SinSource, PowerSource>;

namespace detail {
template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline void validate(const TimeSource& g) {
  if (const auto* p = std::get_if<PowerSource>(&g))
    require(p->exponent > -1.0, "PowerSource: exponent " + std::to_string(p->exponent) +
                                    " <= -1 is not integrable at t=0");
}
}  // namespace detail

inline TimeSource make_power_source(double exponent) {
  TimeSource g = PowerSource{exponent};
  detail::validate(g);
  return g;
}

inline double source_value(const TimeSource& g, double t) {
  return std::visit(detail::overloaded{
                        [](const ConstantSource& c) { return c.value; },
                        [t](const ExpSource&) { return std::exp(t); },
                        [t](const ExpMinusOneSource&) { return std::expm1(t); },
                        [t](const SinSource&) { return std::sin(t); },
                        [t](const PowerSource& p) { return std::pow(t, p.exponent); },
                    },
                    g);
}

/// \int_a^b g(t) dt in closed form.
inline double source_integral(const TimeSource& g, double a, double b) {
  detail::validate(g);
  return std::visit(detail::overloaded{
                        [&](const ConstantSource& c) { return c.value * (b - a); },
                        [&](const ExpSource&) { return std::exp(a) * std::expm1(b - a); },
                        [&](const ExpMinusOneSource&) {
                          return std::exp(a) * std::expm1(b - a) - (b - a);
                        },
                        [&](const SinSource&) {
                          // cos a - cos b
                          return 2.0 * std::sin(0.5 * (a + b)) * std::sin(0.5 * (b - a));
                        },
                        [&](const PowerSource& p) {
                          const double q = p.exponent + 1.0;
                          return (std::pow(b, q) - std::pow(a, q)) / q;
                        },
                    },
                    g);
}

inline std::string describe(const TimeSource& g) {
  return std::visit(detail::overloaded{
                        [](const ConstantSource& c) { return "const(" + std::to_string(c.value) + ")"; },
                        [](const ExpSource&) { return std::string("exp"); },
                        [](const ExpMinusOneSource&) { return std::string("expm1"); },
                        [](const SinSource&) { return std::string("sin"); },
                        [](const PowerSource& p) { return "pow(" + std::to_string(p.exponent) + ")"; },
                    },
                    g);
}

/// Slab integrals \int_{t_{l-1}}^{t_l} g dt for every cell.
inline std::vector<double> slab_integrals(const TemporalMesh& mesh, const TimeSource& g) {
  detail::validate(g);
  std::vector<double> out(mesh.K());
  for (int l = 0; l < mesh.K(); ++l) out[l] = source_integral(g, mesh.node(l), mesh.node(l + 1));
  return out;
}

}  // namespace tfpg
