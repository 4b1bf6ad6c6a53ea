#pragma once

// Published benchmark values for the standard study grid: T = 1,
// K = 10, 20, ..., 320 (inf-sup: 20, ..., 640), reference tau = 1/2000.

#include <array>
#include <optional>
#include <vector>

namespace tfpg::bench {

inline constexpr std::array<int, 6> kStudyK{10, 20, 40, 80, 160, 320};
inline constexpr std::array<int, 6> kInfsupK{20, 40, 80, 160, 320, 640};
inline constexpr std::array<double, 4> kStudyAlpha{0.3, 0.5, 0.7, 0.9};
inline constexpr std::array<double, 5> kInfsupAlpha{0.3, 0.5, 0.7, 0.9, 0.98};

struct Row {
  char tag;  // case letter, or 'l' / 'h' for the scalar L^2 / H^alpha rows
  double alpha;
  std::array<double, 6> values;
  std::optional<double> rate;
  std::optional<double> theory;
};

// Stability constant c(alpha, K), rows in kInfsupAlpha order.
inline const std::array<std::array<double, 6>, 5>& infsup_table() {
  static const std::array<std::array<double, 6>, 5> t{{
      {0.7711, 0.7697, 0.7693, 0.7693, 0.7693, 0.7692},
      {0.4754, 0.4714, 0.4703, 0.4700, 0.4700, 0.4699},
      {0.1982, 0.1911, 0.1891, 0.1886, 0.1884, 0.1884},
      {0.0326, 0.0251, 0.0228, 0.0221, 0.0220, 0.0219},
      {0.0076, 0.0030, 0.0015, 0.0011, 0.0010, 0.0010},
  }};
  return t;
}

// Scalar problem d^alpha u + u = e^t: relative L^2 and H^alpha errors.
inline const std::vector<Row>& ode_table() {
  static const std::vector<Row> t{
      {'l', 0.3, {8.49e-3, 3.96e-3, 1.92e-3, 9.57e-4, 4.68e-4, 2.36e-4}, 1.03, 1.10},
      {'h', 0.3, {3.15e-2, 1.78e-2, 1.04e-2, 6.18e-3, 3.75e-3, 2.33e-3}, 0.75, 0.80},
      {'l', 0.5, {3.88e-3, 1.51e-3, 5.89e-4, 2.29e-4, 8.74e-5, 3.37e-5}, 1.36, 1.50},
      {'h', 0.5, {3.20e-2, 1.74e-2, 9.48e-3, 5.12e-3, 2.78e-3, 1.54e-3}, 0.87, 1.00},
      {'l', 0.7, {1.66e-3, 5.15e-4, 1.59e-4, 4.94e-5, 1.52e-5, 4.73e-6}, 1.69, 1.70},
      {'h', 0.7, {2.98e-2, 1.53e-2, 7.81e-3, 3.96e-3, 2.01e-3, 1.04e-3}, 0.96, 1.00},
      {'l', 0.9, {8.51e-4, 2.21e-4, 5.74e-5, 1.49e-5, 3.91e-6, 1.03e-6}, 1.93, 1.90},
      {'h', 0.9, {2.84e-2, 1.42e-2, 7.12e-3, 3.56e-3, 1.78e-3, 9.10e-4}, 0.99, 1.00},
  };
  return t;
}

// 1-D cases (a)-(d), h = 1/2000: relative L^2(Q_T) errors.
inline const std::vector<Row>& pde1d_table() {
  static const std::vector<Row> t{
      {'a', 0.3, {1.85e-2, 7.50e-3, 3.07e-3, 1.27e-3, 5.17e-4, 2.12e-4}, 1.28, 1.30},
      {'a', 0.5, {8.95e-3, 3.16e-3, 1.12e-3, 4.03e-4, 1.42e-4, 5.05e-5}, 1.49, 1.50},
      {'a', 0.7, {4.71e-3, 1.45e-3, 4.44e-4, 1.36e-4, 4.12e-5, 1.26e-5}, 1.70, 1.70},
      {'a', 0.9, {2.84e-3, 7.60e-4, 2.00e-4, 5.27e-5, 1.38e-5, 3.65e-6}, 1.92, 1.90},
      {'b', 0.3, {2.66e-2, 1.76e-2, 1.14e-2, 7.33e-3, 4.48e-3, 2.77e-3}, 0.65, 0.80},
      {'b', 0.5, {2.87e-2, 1.58e-2, 8.17e-3, 3.99e-3, 1.81e-3, 8.20e-4}, 1.02, 1.00},
      {'b', 0.7, {2.21e-2, 8.94e-3, 3.28e-3, 1.12e-3, 3.67e-4, 1.18e-4}, 1.50, 1.20},
      {'b', 0.9, {1.23e-2, 3.53e-3, 9.64e-4, 2.57e-4, 6.76e-5, 1.77e-5}, 1.88, 1.40},
      {'c', 0.3, {2.90e-1, 2.36e-1, 1.90e-1, 1.52e-1, 1.18e-1, 9.08e-2}, 0.33, 0.50},
      {'c', 0.5, {2.44e-1, 1.73e-1, 1.18e-1, 7.90e-2, 5.10e-2, 3.27e-2}, 0.58, 0.70},
      {'c', 0.7, {1.80e-1, 1.01e-1, 5.48e-2, 2.89e-2, 1.51e-2, 8.01e-3}, 0.89, 0.90},
      {'c', 0.9, {1.10e-1, 4.92e-2, 2.15e-2, 9.55e-3, 4.29e-3, 1.95e-3}, 1.16, 1.10},
      {'d', 0.3, {2.90e-1, 2.36e-1, 1.90e-1, 1.52e-1, 1.18e-1, 9.10e-2}, 0.33, 0.50},
      {'d', 0.5, {2.45e-1, 1.73e-1, 1.19e-1, 7.96e-2, 5.16e-2, 3.34e-2}, 0.57, 0.70},
      {'d', 0.7, {1.81e-1, 1.02e-1, 5.59e-2, 2.99e-2, 1.60e-2, 8.66e-3}, 0.87, 0.90},
      {'d', 0.9, {1.12e-1, 5.11e-2, 2.31e-2, 1.05e-2, 4.81e-3, 2.21e-3}, 1.13, 1.10},
  };
  return t;
}

// 1-D cases (c)-(d): relative L^2(Omega) error at t = T.
inline const std::vector<Row>& final_time_table() {
  static const std::vector<Row> t{
      {'c', 0.3, {6.20e-3, 2.46e-3, 9.83e-4, 3.92e-4, 1.54e-4, 5.91e-5}, 1.34, std::nullopt},
      {'c', 0.5, {2.26e-3, 7.82e-4, 2.71e-4, 9.39e-5, 3.23e-5, 1.08e-5}, 1.54, std::nullopt},
      {'c', 0.7, {4.37e-4, 1.36e-4, 4.16e-5, 1.26e-5, 3.82e-6, 1.13e-6}, 1.71, std::nullopt},
      {'c', 0.9, {3.13e-4, 6.68e-5, 1.57e-5, 3.63e-6, 7.96e-7, 1.60e-7}, 2.18, std::nullopt},
      {'d', 0.3, {6.20e-3, 2.46e-3, 9.83e-4, 3.92e-4, 1.54e-4, 5.91e-5}, 1.34, std::nullopt},
      {'d', 0.5, {2.26e-3, 7.82e-4, 2.70e-4, 9.38e-5, 3.23e-5, 1.08e-5}, 1.54, std::nullopt},
      {'d', 0.7, {4.54e-4, 1.36e-4, 4.16e-5, 1.26e-5, 3.81e-6, 1.13e-6}, 1.73, std::nullopt},
      {'d', 0.9, {2.46e-3, 1.19e-4, 1.58e-5, 3.63e-6, 7.98e-7, 1.60e-7}, 2.78, std::nullopt},
  };
  return t;
}

// 2-D cases (e)-(f), h = 1/100: relative L^2(Q_T) errors.
inline const std::vector<Row>& pde2d_table() {
  static const std::vector<Row> t{
      {'e', 0.3, {1.50e-2, 6.15e-3, 2.52e-3, 1.05e-3, 4.26e-4, 1.75e-4}, 1.28, 1.30},
      {'e', 0.5, {8.38e-3, 3.06e-3, 1.10e-3, 4.02e-4, 1.41e-4, 5.05e-5}, 1.47, 1.50},
      {'e', 0.7, {5.65e-3, 1.88e-3, 6.00e-4, 1.85e-4, 5.54e-5, 1.67e-5}, 1.68, 1.70},
      {'e', 0.9, {4.46e-3, 1.30e-3, 3.52e-4, 9.28e-5, 2.41e-5, 6.31e-6}, 1.89, 1.90},
      {'f', 0.3, {3.31e-1, 2.78e-1, 2.31e-1, 1.91e-1, 1.54e-1, 1.22e-1}, 0.28, 0.50},
      {'f', 0.5, {3.15e-1, 2.39e-1, 1.77e-1, 1.27e-1, 8.74e-2, 5.90e-2}, 0.48, 0.70},
      {'f', 0.7, {2.76e-1, 1.73e-1, 1.01e-1, 5.60e-2, 2.98e-2, 1.58e-2}, 0.82, 0.90},
      {'f', 0.9, {2.06e-1, 9.81e-2, 4.37e-2, 1.92e-2, 8.50e-3, 3.81e-3}, 1.15, 1.10},
  };
  return t;
}

/// Row for (tag, alpha) in a table, or nullptr.
inline const Row* find(const std::vector<Row>& table, char tag, double alpha) {
  for (const auto& r : table)
    if (r.tag == tag && r.alpha == alpha) return &r;
  return nullptr;
}

}  // namespace tfpg::bench
