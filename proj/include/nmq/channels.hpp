// channels.hpp
// Amplitude-damping (AD) and phase-damping (PD) qubit channels: closed-form
// decay functions, Kraus sets, dilation angles and dilation circuits.
//
// Units: gamma_0 = 1 for AD, so the channel parameter is lambda/gamma_0 and
// time is gamma_0 t. alpha = 1 for PD, so the parameter is alpha*tau and time
// is alpha t.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nmq/quantum_core.hpp"

namespace nmq {

enum class ChannelKind { AmplitudeDamping, PhaseDamping };

inline std::string_view to_string(ChannelKind kind) {
  return kind == ChannelKind::AmplitudeDamping ? "ad" : "pd";
}

inline ChannelKind parse_channel_kind(std::string_view s) {
  if (s == "ad" || s == "AD" || s == "amplitude-damping") return ChannelKind::AmplitudeDamping;
  if (s == "pd" || s == "PD" || s == "phase-damping") return ChannelKind::PhaseDamping;
  throw ValidationError("unknown channel kind '" + std::string(s) + "' (expected ad or pd)");
}

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Range over which the estimator is trained: lambda/gamma_0 in [0.1, 3] for
/// AD, alpha*tau in [0.1, 0.75] for PD.
inline ParamRange working_range(ChannelKind kind) {
  return kind == ChannelKind::AmplitudeDamping ? ParamRange{0.1, 3.0} : ParamRange{0.1, 0.75};
}

/// Markovian for lambda/gamma_0 >= 2 (AD) and alpha*tau <= 1/4 (PD).
inline double markovian_threshold(ChannelKind kind) {
  return kind == ChannelKind::AmplitudeDamping ? 2.0 : 0.25;
}

/// The single scalar feature describing a channel instance.
struct ChannelParam {
  ChannelKind kind = ChannelKind::AmplitudeDamping;
  double value = 1.0;

  ChannelParam() = default;
  ChannelParam(ChannelKind k, double v) : kind(k), value(v) {
    if (!std::isfinite(v) || v <= 0.0) throw ValidationError("channel parameter must be positive and finite");
  }
};

inline constexpr double kDomainTol = 1e-9;

namespace detail {

inline void check_time(double t) {
  if (!std::isfinite(t) || t < 0.0) throw ValidationError("time must be finite and non-negative");
}

inline void check_param(double x) {
  if (!std::isfinite(x) || x <= 0.0) throw ValidationError("channel parameter must be positive and finite");
}

// e^{-a s} (cosh(m s) + k sinh(m s)) with 0 <= m < a, evaluated without
// overflow for large s and without cancellation for small m s.
inline double damped_hyperbolic(double a, double m, double k, double s) {
  const double slow = std::exp((m - a) * s);
  const double fast = std::exp(-(m + a) * s);
  const double cosh_part = 0.5 * (slow + fast);
  const double sinh_part = (2.0 * m * s < 50.0) ? 0.5 * fast * std::expm1(2.0 * m * s) : 0.5 * (slow - fast);
  return cosh_part + k * sinh_part;
}

inline double clamp_unit(double v, double lo, double hi, const char* what) {
  if (!std::isfinite(v) || v < lo - kDomainTol || v > hi + kDomainTol)
    throw ValidationError(std::string(what) + " outside its domain");
  return std::clamp(v, lo, hi);
}

}  // namespace detail

/// Excited-state survival factor p(t) of the resonant AD channel with a
/// Lorentzian bath, ratio = lambda/gamma_0. The square root of d^2 =
/// ratio^2 - 2 ratio is taken per regime in real arithmetic.
inline double ad_decay(double t, double ratio) {
  detail::check_time(t);
  detail::check_param(ratio);
  const double a = ratio / 2.0;
  double amplitude = 0.0;
  if (ratio > 2.0) {
    const double d = std::sqrt(ratio * ratio - 2.0 * ratio);
    amplitude = detail::damped_hyperbolic(a, d / 2.0, ratio / d, t);
  } else if (ratio < 2.0) {
    const double d = std::sqrt(2.0 * ratio - ratio * ratio);
    amplitude = std::exp(-a * t) * (ratio / d * std::sin(d * t / 2.0) + std::cos(d * t / 2.0));
  } else {
    amplitude = std::exp(-a * t) * (1.0 + a * t);
  }
  return std::min(amplitude * amplitude, 1.0);
}

/// Coherence multiplier Lambda(t) of the random-telegraph PD channel,
/// at = alpha*tau. Oscillatory for at > 1/4.
inline double pd_coherence(double t, double at) {
  detail::check_time(t);
  detail::check_param(at);
  const double s = t / (2.0 * at);
  const double m2 = 16.0 * at * at - 1.0;
  double value = 0.0;
  if (m2 > 0.0) {
    const double mu = std::sqrt(m2);
    value = std::exp(-s) * (std::cos(mu * s) + std::sin(mu * s) / mu);
  } else if (m2 < 0.0) {
    const double mu = std::sqrt(-m2);
    value = detail::damped_hyperbolic(1.0, mu, 1.0 / mu, s);
  } else {
    value = std::exp(-s) * (1.0 + s);
  }
  return std::clamp(value, -1.0, 1.0);
}

/// Single-qubit Kraus operators of a CPTP map.
class KrausSet {
 public:
  explicit KrausSet(std::vector<CMatrix> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw ValidationError("Kraus set is empty");
    for (const auto& m : ops_)
      if (m.rows() != 2 || m.cols() != 2) throw DimensionError("Kraus operators must be 2x2");
#if NMQ_CHECKED
    if (completeness_defect() >= kStructureTol) throw ValidationError("Kraus set is not trace preserving");
#endif
  }

  static KrausSet identity() { return KrausSet({CMatrix::Identity(2, 2)}); }

  const std::vector<CMatrix>& operators() const { return ops_; }

  /// max |sum M^dagger M - I|
  double completeness_defect() const {
    CMatrix sum = CMatrix::Zero(2, 2);
    for (const auto& m : ops_) sum += m.adjoint() * m;
    return detail::max_abs(sum - CMatrix::Identity(2, 2));
  }

 private:
  std::vector<CMatrix> ops_;
};

inline KrausSet ad_kraus(double p) {
  p = detail::clamp_unit(p, 0.0, 1.0, "AD survival factor");
  return KrausSet({matrix2(1.0, 0.0, 0.0, std::sqrt(p)), matrix2(0.0, std::sqrt(1.0 - p), 0.0, 0.0)});
}

inline KrausSet pd_kraus(double coherence) {
  coherence = detail::clamp_unit(coherence, -1.0, 1.0, "PD coherence factor");
  const double keep = std::sqrt((1.0 + coherence) / 2.0);
  const double flip = std::sqrt((1.0 - coherence) / 2.0);
  return KrausSet({matrix2(keep, 0.0, 0.0, keep), matrix2(flip, 0.0, 0.0, -flip)});
}

/// Kraus set of `kind` after interaction time t at parameter x.
inline KrausSet channel_kraus(ChannelKind kind, double t, double x) {
  return kind == ChannelKind::AmplitudeDamping ? ad_kraus(ad_decay(t, x)) : pd_kraus(pd_coherence(t, x));
}

/// rho -> sum_i M_i rho M_i^dagger with the M_i acting on `target`.
inline DensityMatrix apply_channel(const DensityMatrix& rho, const KrausSet& ks, int target) {
  const int n = rho.n_qubits();
  detail::check_qubit(target, n);
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& m : ks.operators()) {
    const CMatrix lifted = n == 1 ? m : embed(m, target, n);
    out += lifted * rho.matrix() * lifted.adjoint();
  }
  return DensityMatrix(std::move(out));
}

/// 2 arccos(sqrt(p)), in [0, pi].
inline double ad_dilation_angle(double p) {
  p = detail::clamp_unit(p, 0.0, 1.0, "AD survival factor");
  return 2.0 * std::acos(std::sqrt(p));
}

/// 2 arccos(Lambda), in [0, 2 pi]; negative Lambda is allowed.
inline double pd_dilation_angle(double coherence) {
  coherence = detail::clamp_unit(coherence, -1.0, 1.0, "PD coherence factor");
  return 2.0 * std::acos(coherence);
}

inline double dilation_angle(ChannelKind kind, double t, double x) {
  return kind == ChannelKind::AmplitudeDamping ? ad_dilation_angle(ad_decay(t, x))
                                               : pd_dilation_angle(pd_coherence(t, x));
}

/// AD dilation: controlled-Ry(theta) from system to ancilla, then CNOT from
/// ancilla to system.
inline Unitary ad_dilation_unitary(double theta, int system, int ancilla, int n) {
  return controlled(pauli_x_gate(), ancilla, system, n) * controlled(ry(theta), system, ancilla, n);
}

/// PD dilation: controlled-Ry(theta) from system to ancilla.
inline Unitary pd_dilation_unitary(double theta, int system, int ancilla, int n) {
  return controlled(ry(theta), system, ancilla, n);
}

inline Unitary dilation_unitary(ChannelKind kind, double theta, int system, int ancilla, int n) {
  return kind == ChannelKind::AmplitudeDamping ? ad_dilation_unitary(theta, system, ancilla, n)
                                               : pd_dilation_unitary(theta, system, ancilla, n);
}

namespace detail {

inline void check_dilation_input(const DensityMatrix& rho) {
  if (rho.n_qubits() != 2) throw DimensionError("dilation expects a system+ancilla two-qubit state");
#if NMQ_CHECKED
  const DensityMatrix anc = partial_trace(rho, {1});
  if (std::abs(anc(0, 0) - Complex{1.0}) > 1e-10) throw ValidationError("ancilla is not in |0>");
#endif
}

}  // namespace detail

/// Runs the AD dilation circuit on (system=qubit 0, ancilla=qubit 1).
inline DensityMatrix ad_dilation(const DensityMatrix& rho_sys_anc, double theta) {
  detail::check_dilation_input(rho_sys_anc);
  return apply_unitary(rho_sys_anc, ad_dilation_unitary(theta, 0, 1, 2));
}

/// Runs the PD dilation circuit on (system=qubit 0, ancilla=qubit 1).
inline DensityMatrix pd_dilation(const DensityMatrix& rho_sys_anc, double theta) {
  detail::check_dilation_input(rho_sys_anc);
  return apply_unitary(rho_sys_anc, pd_dilation_unitary(theta, 0, 1, 2));
}

}  // namespace nmq
