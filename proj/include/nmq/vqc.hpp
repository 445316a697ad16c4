// vqc.hpp
// Variational probe circuit: the system qubit starts in |0>, is rotated about
// y by phi_0, then interacts N times with the environment (interaction time
// t_i, ancilla reset afterwards), each interaction followed by a rotation
// phi_i. The estimate is w0 + w1 <sigma_z>.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nmq/channels.hpp"
#include "nmq/quantum_core.hpp"

namespace nmq {

enum class VqcBackend {
  KrausReset,        // Kraus maps on the single system qubit
  ExplicitAncillas,  // (1+N)-qubit pure state, one fresh ancilla per interaction
};

inline std::string_view to_string(VqcBackend b) {
  return b == VqcBackend::KrausReset ? "kraus-reset" : "explicit-ancillas";
}

inline VqcBackend parse_backend(std::string_view s) {
  if (s == "kraus-reset") return VqcBackend::KrausReset;
  if (s == "explicit-ancillas") return VqcBackend::ExplicitAncillas;
  throw ValidationError("unknown backend '" + std::string(s) + "' (expected kraus-reset or explicit-ancillas)");
}

inline constexpr int kMaxInteractions = 5;

struct VqcConfig {
  ChannelKind kind = ChannelKind::AmplitudeDamping;
  int n_interactions = 2;
  VqcBackend backend = VqcBackend::KrausReset;

  void validate() const {
    if (n_interactions < 1 || n_interactions > kMaxInteractions)
      throw ValidationError("n_interactions must be in [1, " + std::to_string(kMaxInteractions) + "]");
  }
};

struct VqcParams {
  std::vector<double> phis;   // phi_0 .. phi_N
  std::vector<double> times;  // t_1 .. t_N
  double w0 = 0.0;
  double w1 = 1.0;

  void validate(const VqcConfig& cfg) const {
    cfg.validate();
    if (static_cast<int>(phis.size()) != cfg.n_interactions + 1) throw ValidationError("expected N+1 rotation angles");
    if (static_cast<int>(times.size()) != cfg.n_interactions) throw ValidationError("expected N interaction times");
    for (double p : phis)
      if (!std::isfinite(p)) throw ValidationError("rotation angles must be finite");
    for (double t : times)
      if (!std::isfinite(t) || t < 0.0) throw ValidationError("interaction times must be finite and non-negative");
    if (!std::isfinite(w0) || !std::isfinite(w1)) throw ValidationError("readout weights must be finite");
  }
};

/// p(t, x) for AD, Lambda(t, x) for PD.
inline double channel_factor(ChannelKind kind, double t, double x) {
  return kind == ChannelKind::AmplitudeDamping ? ad_decay(t, x) : pd_coherence(t, x);
}

/// Cached cos/sin of a y-rotation angle.
struct RotationAngle {
  double c = 1.0;
  double s = 0.0;

  RotationAngle() = default;
  explicit RotationAngle(double phi) : c(std::cos(phi)), s(std::sin(phi)) {}
};

/// Single-qubit state of the Kraus-reset backend. Both channels have real Kraus
/// operators and Ry is real, so rho = [[a, b], [b, d]] stays real symmetric.
struct RealQubitState {
  double a = 1.0;
  double b = 0.0;
  double d = 0.0;

  /// rho -> Ry(phi) rho Ry(phi)^T
  void rotate(const RotationAngle& r) {
    const double mean = 0.5 * (a + d);
    const double half_diff = 0.5 * (a - d);
    const double na = mean + r.c * half_diff - r.s * b;
    const double nd = mean - r.c * half_diff + r.s * b;
    b = r.s * half_diff + r.c * b;
    a = na;
    d = nd;
  }

  /// AD Kraus pair {|0><0| + sqrt(p)|1><1|, sqrt(1-p)|0><1|}.
  void amplitude_damp(double p) {
    p = std::clamp(p, 0.0, 1.0);
    a += (1.0 - p) * d;
    b *= std::sqrt(p);
    d *= p;
  }

  /// PD Kraus pair {sqrt((1+L)/2) I, sqrt((1-L)/2) Z}.
  void phase_damp(double coherence) { b *= std::clamp(coherence, -1.0, 1.0); }

  void apply(ChannelKind kind, double factor) {
    if (kind == ChannelKind::AmplitudeDamping)
      amplitude_damp(factor);
    else
      phase_damp(factor);
  }

  double sigma_z() const { return std::clamp(a - d, -1.0, 1.0); }
};

/// <sigma_z> of the Kraus-reset circuit given precomputed rotations
/// (N+1 of them) and channel factors (N of them).
inline double forward_from_factors(ChannelKind kind, std::span<const RotationAngle> rotations,
                                   std::span<const double> factors) {
  RealQubitState rho;
  rho.rotate(rotations[0]);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    rho.apply(kind, factors[i]);
    rho.rotate(rotations[i + 1]);
  }
  return rho.sigma_z();
}

namespace detail {

inline double forward_kraus_reset(const VqcConfig& cfg, const VqcParams& p, double x) {
  std::vector<double> factors(p.times.size());
  for (std::size_t i = 0; i < factors.size(); ++i) factors[i] = channel_factor(cfg.kind, p.times[i], x);
  std::vector<RotationAngle> rotations(p.phis.begin(), p.phis.end());
  return forward_from_factors(cfg.kind, rotations, factors);
}

inline double forward_explicit_ancillas(const VqcConfig& cfg, const VqcParams& p, double x) {
  const int n = 1 + cfg.n_interactions;
  StateVector psi = StateVector::basis(n, 0);
  psi = apply(psi, embed(ry(p.phis[0]), 0, n));
  for (int i = 0; i < cfg.n_interactions; ++i) {
    const double theta = dilation_angle(cfg.kind, p.times[i], x);
    psi = apply(psi, dilation_unitary(cfg.kind, theta, 0, i + 1, n));
    psi = apply(psi, embed(ry(p.phis[i + 1]), 0, n));
  }
  const DensityMatrix system = partial_trace(DensityMatrix::pure(psi), {0});
  return expectation(system, sigma_z());
}

}  // namespace detail

/// <sigma_z> of the system qubit at the end of the circuit.
inline double forward(const VqcConfig& cfg, const VqcParams& p, double x) {
  p.validate(cfg);
  (void)ChannelParam{cfg.kind, x};
  return cfg.backend == VqcBackend::KrausReset ? detail::forward_kraus_reset(cfg, p, x)
                                               : detail::forward_explicit_ancillas(cfg, p, x);
}

inline double predict(const VqcConfig& cfg, const VqcParams& p, double x) { return p.w0 + p.w1 * forward(cfg, p, x); }

}  // namespace nmq
