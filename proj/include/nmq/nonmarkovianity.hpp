// nonmarkovianity.hpp
// Entanglement-based degree of non-Markovianity: one half of the Bell pair
// (|00> + |11>)/sqrt(2) is sent through the channel while the other half stays
// isolated, and every increase of the concurrence along the way is summed.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmq/channels.hpp"
#include "nmq/quantum_core.hpp"

namespace nmq {

/// Wootters concurrence of a two-qubit state. The decreasing square roots of
/// the eigenvalues of rho (Y x Y) rho* (Y x Y) are obtained as singular values
/// of sqrt(rho) * sqrt(rho~), which keeps the small ones accurate.
inline double concurrence(const DensityMatrix& rho) {
  if (rho.n_qubits() != 2) throw DimensionError("concurrence expects a two-qubit state");
  const Eigen::Matrix4cd r = rho.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed in concurrence");
  const Eigen::Vector4d ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10) throw ValidationError("concurrence input is not positive semidefinite");
  const Eigen::Vector4d root = ev.cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd sqrt_rho = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();

  // Y x Y is real: anti-diagonal with signs (-1, 1, 1, -1).
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd sqrt_flipped = yy * sqrt_rho.conjugate() * yy;

  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(sqrt_rho * sqrt_flipped);
  const Eigen::Vector4d s = svd.singularValues();  // descending
  return std::clamp(s(0) - s(1) - s(2) - s(3), 0.0, 1.0);
}

inline DensityMatrix bell_phi_plus() {
  CVector a = CVector::Zero(4);
  a(0) = 1.0 / std::numbers::sqrt2;
  a(3) = 1.0 / std::numbers::sqrt2;
  return DensityMatrix::pure(StateVector(std::move(a)));
}

/// Concurrence at time t of the Bell pair whose qubit 0 went through the
/// channel; qubit 1 is the isolated reference.
inline double bell_entanglement(ChannelKind kind, double x, double t) {
  static const DensityMatrix bell = bell_phi_plus();
  return concurrence(apply_channel(bell, channel_kraus(kind, t, x), 0));
}

/// Discretisation of the time integral.
struct NmGridConfig {
  double t_max = 40.0;
  int n_steps = 4000;
  double refine_tol = 1e-6;
  int max_halvings = 8;

  void validate() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("grid t_max must be positive");
    if (n_steps < 2) throw ValidationError("grid needs at least 2 steps");
    if (!(refine_tol > 0.0)) throw ValidationError("refine tolerance must be positive");
    if (max_halvings < 0) throw ValidationError("max_halvings must be non-negative");
  }
};

/// Chooses the integration horizon per parameter so that the entanglement
/// envelope has decayed by `efolds` e-foldings: exp(-x t / 2) for AD, capped
/// below at t = 2 efolds; exp(-t / (2 x)) for PD.
struct NmGridPolicy {
  double efolds = 20.0;
  int n_steps = 4000;
  double refine_tol = 1e-6;

  NmGridConfig for_param(ChannelKind kind, double x) const {
    NmGridConfig cfg;
    cfg.t_max = kind == ChannelKind::AmplitudeDamping ? 2.0 * efolds / std::min(x, 1.0) : 2.0 * efolds * x;
    cfg.n_steps = n_steps;
    cfg.refine_tol = refine_tol;
    cfg.validate();
    return cfg;
  }
};

inline NmGridConfig default_grid(ChannelKind kind, double x) { return NmGridPolicy{}.for_param(kind, x); }

struct EntanglementTrajectory {
  std::vector<double> times;
  std::vector<double> values;
};

inline EntanglementTrajectory trajectory(ChannelKind kind, double x, const NmGridConfig& cfg) {
  cfg.validate();
  (void)ChannelParam{kind, x};
  EntanglementTrajectory out;
  out.times.resize(cfg.n_steps + 1);
  out.values.resize(cfg.n_steps + 1);
  const double h = cfg.t_max / cfg.n_steps;
  for (int k = 0; k <= cfg.n_steps; ++k) {
    out.times[k] = k * h;
    out.values[k] = bell_entanglement(kind, x, out.times[k]);
  }
  return out;
}

namespace detail {

// Golden-section search for the extremum of a unimodal function on [a, b].
template <class Fn>
double golden_extremum(Fn&& fn, double a, double b, bool maximise) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto better = [&](double u, double v) { return maximise ? u > v : u < v; };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  const double tol = 1e-13 * (1.0 + std::abs(b));
  while (b - a > tol) {
    if (better(fc, fd)) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return better(fc, fd) ? fc : fd;
}

}  // namespace detail

/// Sum of positive increments of `values` sampled on a uniform grid of
/// [0, t_max], after replacing every interior grid extremum by the extremum
/// located between its neighbours.
template <class Fn>
double positive_variation(Fn&& entanglement, const std::vector<double>& values, double t_max) {
  const auto n = static_cast<int>(values.size()) - 1;
  const double h = t_max / n;
  double total = 0.0;
  double prev = values[0];
  for (int k = 1; k <= n; ++k) {
    double v = values[k];
    if (k < n) {
      const bool is_max = values[k - 1] < v && v >= values[k + 1];
      const bool is_min = values[k - 1] > v && v <= values[k + 1];
      if (is_max || is_min) {
        const double found = detail::golden_extremum(entanglement, (k - 1) * h, (k + 1) * h, is_max);
        v = is_max ? std::max(v, found) : std::min(v, found);
      }
    }
    total += std::max(0.0, v - prev);
    prev = v;
  }
  return total;
}

/// Degree of non-Markovianity of an arbitrary entanglement curve E(t): the grid
/// is halved until successive estimates agree within refine_tol.
template <class Fn>
double nm_measure_of(Fn&& entanglement, const NmGridConfig& cfg) {
  cfg.validate();
  int n = cfg.n_steps;
  std::vector<double> values(n + 1);
  for (int k = 0; k <= n; ++k) values[k] = entanglement(cfg.t_max * k / n);
  double estimate = positive_variation(entanglement, values, cfg.t_max);
  for (int halving = 1; halving <= cfg.max_halvings; ++halving) {
    std::vector<double> finer(2 * n + 1);
    for (int k = 0; k <= n; ++k) finer[2 * k] = values[k];
    for (int k = 0; k < n; ++k) finer[2 * k + 1] = entanglement(cfg.t_max * (2 * k + 1) / (2 * n));
    n *= 2;
    values = std::move(finer);
    const double refined = positive_variation(entanglement, values, cfg.t_max);
    if (std::abs(refined - estimate) < cfg.refine_tol) return refined;
    estimate = refined;
  }
  throw NumericalError("non-Markovianity did not converge after " + std::to_string(cfg.max_halvings) + " grid halvings");
}

inline double nm_measure(ChannelKind kind, double x, const NmGridConfig& cfg) {
  (void)ChannelParam{kind, x};
  return nm_measure_of([&](double t) { return bell_entanglement(kind, x, t); }, cfg);
}

inline double nm_measure(ChannelKind kind, double x) { return nm_measure(kind, x, default_grid(kind, x)); }

}  // namespace nmq
