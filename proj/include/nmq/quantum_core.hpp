// quantum_core.hpp
// Dense complex linear algebra for few-qubit states: gates, tensor products,
// partial trace and expectation values.
//
// Basis convention: qubit 0 is the most significant bit of the basis label,
// so for two qubits |q0 q1> maps to index 2*q0 + q1.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmq/error.hpp"

// Structural validation (Hermiticity, unitarity, normalisation) is compiled in
// for checked builds only; dimension and index checks are always on.
#if !defined(NMQ_CHECKED)
#if defined(NDEBUG)
#define NMQ_CHECKED 0
#else
#define NMQ_CHECKED 1
#endif
#endif

namespace nmq {

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr int kMaxQubits = 6;
inline constexpr double kStructureTol = 1e-12;

namespace detail {

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline int qubits_for_dim(Eigen::Index dim) {
  if (!is_power_of_two(dim)) throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (n > kMaxQubits) throw DimensionError("more than " + std::to_string(kMaxQubits) + " qubits");
  return n;
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " must be square");
}

}  // namespace detail

/// Unitary operator on one or more qubits.
class Unitary {
 public:
  explicit Unitary(CMatrix m) : m_(std::move(m)) {
    detail::require_square(m_, "unitary");
    n_qubits_ = detail::qubits_for_dim(m_.rows());
#if NMQ_CHECKED
    if (!detail::all_finite(m_)) throw ValidationError("unitary has non-finite entries");
    const CMatrix defect = m_.adjoint() * m_ - CMatrix::Identity(m_.rows(), m_.cols());
    if (detail::max_abs(defect) >= kStructureTol) throw ValidationError("matrix is not unitary");
#endif
  }

  static Unitary identity(int n_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    return Unitary(CMatrix::Identity(dim, dim));
  }

  const CMatrix& matrix() const { return m_; }
  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return m_.rows(); }

  Unitary operator*(const Unitary& rhs) const {
    if (dim() != rhs.dim()) throw DimensionError("unitary product dimension mismatch");
    return Unitary(CMatrix(m_ * rhs.m_));
  }

 private:
  CMatrix m_;
  int n_qubits_ = 0;
};

/// Normalised pure state of n qubits.
class StateVector {
 public:
  explicit StateVector(CVector amplitudes) : a_(std::move(amplitudes)) {
    n_qubits_ = detail::qubits_for_dim(a_.size());
#if NMQ_CHECKED
    if (std::abs(a_.squaredNorm() - 1.0) >= kStructureTol) throw ValidationError("state vector is not normalised");
#endif
  }

  /// Computational basis state |index> on n qubits.
  static StateVector basis(int n_qubits, Eigen::Index index) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    if (index < 0 || index >= dim) throw IndexError("basis index out of range");
    CVector a = CVector::Zero(dim);
    a(index) = 1.0;
    return StateVector(std::move(a));
  }

  const CVector& amplitudes() const { return a_; }
  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return a_.size(); }

 private:
  CVector a_;
  int n_qubits_ = 0;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {
    detail::require_square(m_, "density matrix");
    n_qubits_ = detail::qubits_for_dim(m_.rows());
#if NMQ_CHECKED
    validate();
#endif
  }

  static DensityMatrix pure(const StateVector& psi) {
    return DensityMatrix(CMatrix(psi.amplitudes() * psi.amplitudes().adjoint()));
  }

  static DensityMatrix basis(int n_qubits, Eigen::Index index) { return pure(StateVector::basis(n_qubits, index)); }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    return DensityMatrix(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
  }

  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return m_.rows(); }

  void validate() const {
    if (!detail::all_finite(m_)) throw ValidationError("density matrix has non-finite entries");
    if (detail::max_abs(m_ - m_.adjoint()) >= kStructureTol) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - Complex{1.0}) >= kStructureTol) throw ValidationError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw ValidationError("density matrix is not positive semidefinite");
  }

 private:
  CMatrix m_;
  int n_qubits_ = 0;
};

/// Hermitian observable.
class Observable {
 public:
  explicit Observable(CMatrix m) : m_(std::move(m)) {
    detail::require_square(m_, "observable");
    n_qubits_ = detail::qubits_for_dim(m_.rows());
#if NMQ_CHECKED
    if (detail::max_abs(m_ - m_.adjoint()) >= kStructureTol) throw ValidationError("observable is not Hermitian");
#endif
  }

  const CMatrix& matrix() const { return m_; }
  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
  int n_qubits_ = 0;
};

// ---------------------------------------------------------------------------
// Gates and observables

inline CMatrix matrix2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Rotation about the y axis: [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
inline Unitary ry(double theta) {
  if (!std::isfinite(theta)) throw ValidationError("rotation angle must be finite");
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  return Unitary(matrix2(c, -s, s, c));
}

inline Unitary pauli_x_gate() { return Unitary(matrix2(0.0, 1.0, 1.0, 0.0)); }

inline Unitary hadamard() {
  const double r = 1.0 / std::numbers::sqrt2;
  return Unitary(matrix2(r, r, r, -r));
}

inline Observable sigma_x() { return Observable(matrix2(0.0, 1.0, 1.0, 0.0)); }
inline Observable sigma_y() { return Observable(matrix2(0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0)); }
inline Observable sigma_z() { return Observable(matrix2(1.0, 0.0, 0.0, -1.0)); }
inline Observable identity_observable(int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  return Observable(CMatrix::Identity(dim, dim));
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.matrix(), b.matrix()));
}

namespace detail {

inline void check_qubit(int q, int n) {
  if (n < 1 || n > kMaxQubits) throw IndexError("qubit count " + std::to_string(n) + " out of range");
  if (q < 0 || q >= n) throw IndexError("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n) + " qubits");
}

inline Eigen::Index bit_of(int q, int n) { return Eigen::Index{1} << (n - 1 - q); }

}  // namespace detail

/// Lifts a single-qubit operator onto `target` of an n-qubit register.
inline CMatrix embed(const CMatrix& op, int target, int n) {
  detail::check_qubit(target, n);
  if (op.rows() != 2 || op.cols() != 2) throw DimensionError("embed expects a single-qubit operator");
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index bit = detail::bit_of(target, n);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Eigen::Index rb = (r & bit) ? 1 : 0;
    for (Eigen::Index cb = 0; cb < 2; ++cb) {
      const Eigen::Index c = cb ? (r | bit) : (r & ~bit);
      out(r, c) = op(rb, cb);
    }
  }
  return out;
}

inline Unitary embed(const Unitary& u, int target, int n) { return Unitary(embed(u.matrix(), target, n)); }

inline Observable embed(const Observable& o, int target, int n) { return Observable(embed(o.matrix(), target, n)); }

/// Applies `u` to `target` when `control` is |1>, identity otherwise.
inline Unitary controlled(const Unitary& u, int control, int target, int n) {
  detail::check_qubit(control, n);
  detail::check_qubit(target, n);
  if (control == target) throw IndexError("control and target must differ");
  if (u.n_qubits() != 1) throw DimensionError("controlled expects a single-qubit unitary");
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index cbit = detail::bit_of(control, n);
  CMatrix lifted = embed(u.matrix(), target, n);
  for (Eigen::Index r = 0; r < dim; ++r) {
    if (r & cbit) continue;
    lifted.row(r).setZero();
    lifted(r, r) = 1.0;
  }
  return Unitary(std::move(lifted));
}

inline StateVector apply(const StateVector& psi, const Unitary& u) {
  if (psi.dim() != u.dim()) throw DimensionError("state/unitary dimension mismatch");
  return StateVector(CVector(u.matrix() * psi.amplitudes()));
}

/// Returns U rho U^dagger.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const Unitary& u) {
  if (rho.dim() != u.dim()) throw DimensionError("density matrix/unitary dimension mismatch");
  return DensityMatrix(CMatrix(u.matrix() * rho.matrix() * u.matrix().adjoint()));
}

/// Reduced density matrix on the qubits listed in `keep` (kept in ascending order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  if (keep.empty()) throw IndexError("partial_trace needs at least one kept qubit");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) throw IndexError("duplicate qubit in kept set");
  for (int q : kept) detail::check_qubit(q, n);
  if (static_cast<int>(kept.size()) == n) return rho;

  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  const int nk = static_cast<int>(kept.size());
  const int nt = static_cast<int>(traced.size());
  auto full_index = [&](Eigen::Index k_idx, Eigen::Index t_idx) {
    Eigen::Index idx = 0;
    for (int i = 0; i < nk; ++i)
      if (k_idx & (Eigen::Index{1} << (nk - 1 - i))) idx |= detail::bit_of(kept[i], n);
    for (int i = 0; i < nt; ++i)
      if (t_idx & (Eigen::Index{1} << (nt - 1 - i))) idx |= detail::bit_of(traced[i], n);
    return idx;
  };

  const Eigen::Index dk = Eigen::Index{1} << nk;
  const Eigen::Index dt = Eigen::Index{1} << nt;
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (Eigen::Index t = 0; t < dt; ++t) acc += rho(full_index(r, t), full_index(c, t));
      out(r, c) = acc;
    }
  return DensityMatrix(std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// Tr(rho A). The imaginary residue must vanish to 1e-10.
inline double expectation(const DensityMatrix& rho, const Observable& obs) {
  if (rho.dim() != obs.dim()) throw DimensionError("density matrix/observable dimension mismatch");
  const Complex value = (rho.matrix() * obs.matrix()).trace();
  if (std::abs(value.imag()) >= 1e-10) throw ValidationError("expectation value has an imaginary part");
  return value.real();
}

}  // namespace nmq
