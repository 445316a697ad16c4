// Shared helpers for the test suites: random states and independent oracles.

#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "nmq/quantum_core.hpp"

namespace nmq::testing {

/// Random full-rank density matrix rho = A A^dagger / Tr(A A^dagger).
inline DensityMatrix random_density(int n_qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  CMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = Complex{g(rng), g(rng)};
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  // Symmetrise away rounding so the checked constructor sees exact Hermiticity.
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix(rho);
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Concurrence of an X-shaped two-qubit state (only diagonal and anti-diagonal
/// entries non-zero).
inline double x_state_concurrence(const DensityMatrix& rho) {
  const double c1 = std::abs(rho(0, 3)) - std::sqrt(rho(1, 1).real() * rho(2, 2).real());
  const double c2 = std::abs(rho(1, 2)) - std::sqrt(rho(0, 0).real() * rho(3, 3).real());
  return 2.0 * std::max({0.0, c1, c2});
}

// Closed-form degree of non-Markovianity. The entanglement curves
// E = e^{-a t} |A sin(w t) + cos(w t)| have their extrema where sin(w t) = 0,
// with |E| = e^{-a k pi / w}, and touch zero in between; summing the revivals
// gives q / (1 - q).

/// AD, ratio = lambda/gamma_0: q = exp(-ratio pi / |d|), |d| = sqrt(2 ratio - ratio^2).
inline double ad_nm_closed_form(double ratio) {
  if (ratio >= 2.0) return 0.0;
  const double d = std::sqrt(2.0 * ratio - ratio * ratio);
  const double q = std::exp(-ratio * std::numbers::pi / d);
  return q / (1.0 - q);
}

/// PD, at = alpha*tau: q = exp(-pi / mu), mu = sqrt(16 at^2 - 1).
inline double pd_nm_closed_form(double at) {
  if (at <= 0.25) return 0.0;
  const double mu = std::sqrt(16.0 * at * at - 1.0);
  const double q = std::exp(-std::numbers::pi / mu);
  return q / (1.0 - q);
}

}  // namespace nmq::testing
