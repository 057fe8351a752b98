#pragma once
// Dense linear algebra and Pauli/state helpers for few-qubit open-system
// simulation.
//
// Conventions used throughout the library:
//   - qubit 0 is the leftmost tensor factor, i.e. the most significant bit
//     of a computational-basis index; |0> is the ground state
//   - density matrices are trace-1, Hermitian, PSD Eigen::MatrixXcd
//   - column-stacking vectorization: vec(A rho B) = (B^T (x) A) vec(rho)

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr Complex kI{0.0, 1.0};

inline Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

// ---------------------------------------------------------------------------
// Tensor products and vectorization
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix kron_all(const std::vector<Matrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: empty factor list");
  Matrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

// Column-stacking: vec(m) concatenates the columns of m.  Eigen stores
// column-major, so this is a straight copy of the coefficient array.
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim)
    throw std::invalid_argument("unvec: size " + std::to_string(v.size()) +
                                " is not dim^2 = " + std::to_string(dim * dim));
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

// ---------------------------------------------------------------------------
// Pauli algebra
// ---------------------------------------------------------------------------

inline const Matrix& pauli(char label) {
  static const Matrix id = [] { Matrix m(2, 2); m << 1, 0, 0, 1; return m; }();
  static const Matrix x = [] { Matrix m(2, 2); m << 0, 1, 1, 0; return m; }();
  static const Matrix y = [] { Matrix m(2, 2); m << 0, -kI, kI, 0; return m; }();
  static const Matrix z = [] { Matrix m(2, 2); m << 1, 0, 0, -1; return m; }();
  switch (label) {
    case 'I': return id;
    case 'X': return x;
    case 'Y': return y;
    case 'Z': return z;
    default:
      throw std::invalid_argument(std::string("pauli: unknown label '") + label +
                                  "' (expected I, X, Y or Z)");
  }
}

// "ZIZ" -> Z (x) I (x) Z; string length sets the qubit count.
inline Matrix pauli_string(const std::string& labels) {
  if (labels.empty()) throw std::invalid_argument("pauli_string: empty label string");
  Matrix out = pauli(labels[0]);
  for (std::size_t k = 1; k < labels.size(); ++k) out = kron(out, pauli(labels[k]));
  return out;
}

// Embed a single-qubit operator at position `qubit` of an n-qubit register.
inline Matrix embed_single(const Matrix& op, int qubit, int n_qubits) {
  if (op.rows() != 2 || op.cols() != 2)
    throw std::invalid_argument("embed_single: operator must be 2x2");
  if (qubit < 0 || qubit >= n_qubits)
    throw std::invalid_argument("embed_single: qubit index " + std::to_string(qubit) +
                                " out of range for " + std::to_string(n_qubits) + " qubits");
  std::vector<Matrix> factors;
  factors.reserve(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) factors.push_back(q == qubit ? op : identity(2));
  return kron_all(factors);
}

// |1><1| on each of two (not necessarily adjacent) qubits; the generator of
// CZ-type and dispersive-ZZ terms.
inline Matrix two_excitation_projector(int qubit_a, int qubit_b, int n_qubits) {
  if (qubit_a == qubit_b)
    throw std::invalid_argument("two_excitation_projector: qubits must differ");
  Matrix p1(2, 2);
  p1 << 0, 0, 0, 1;
  return embed_single(p1, qubit_a, n_qubits) * embed_single(p1, qubit_b, n_qubits);
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

inline Vector basis_state(int n_qubits, Eigen::Index index) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  if (index < 0 || index >= dim)
    throw std::invalid_argument("basis_state: index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

inline Vector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

// Two-qubit Bell states, amplitudes over |00>,|01>,|10>,|11>.
inline Vector bell_phi_plus() { Vector v(4); v << 1, 0, 0, 1; return v / std::sqrt(2.0); }
inline Vector bell_phi_minus() { Vector v(4); v << 1, 0, 0, -1; return v / std::sqrt(2.0); }
inline Vector bell_psi_plus() { Vector v(4); v << 0, 1, 1, 0; return v / std::sqrt(2.0); }
inline Vector bell_psi_minus() { Vector v(4); v << 0, 1, -1, 0; return v / std::sqrt(2.0); }

inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline bool is_hermitian(const Matrix& m, double tol = 1e-9) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - identity(m.rows())).cwiseAbs().maxCoeff() <= tol;
}

inline double min_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  return solver.eigenvalues().minCoeff();
}

// Throws std::runtime_error naming `where` if rho is not a density matrix.
inline void assert_density(const Matrix& rho, const std::string& where,
                           double trace_tol = 1e-9, double psd_tol = 1e-8) {
  if (rho.rows() != rho.cols())
    throw std::runtime_error(where + ": state matrix is not square");
  if (!rho.allFinite()) throw std::runtime_error(where + ": state has non-finite entries");
  if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
      std::abs(rho.trace().imag()) > trace_tol)
    throw std::runtime_error(where + ": trace deviates from 1 by more than tolerance");
  if (!is_hermitian(rho, trace_tol))
    throw std::runtime_error(where + ": state is not Hermitian");
  if (min_eigenvalue(0.5 * (rho + rho.adjoint())) < -psd_tol)
    throw std::runtime_error(where + ": state has a negative eigenvalue beyond tolerance");
}

// ---------------------------------------------------------------------------
// Reductions and figures of merit
// ---------------------------------------------------------------------------

// Keep the listed qubits (ascending order preserved), trace out the rest.
inline Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep, int n_qubits) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("partial_trace: state dimension does not match qubit count");
  std::vector<bool> kept(static_cast<std::size_t>(n_qubits), false);
  for (int q : keep) {
    if (q < 0 || q >= n_qubits)
      throw std::invalid_argument("partial_trace: keep index out of range");
    if (kept[static_cast<std::size_t>(q)])
      throw std::invalid_argument("partial_trace: duplicate keep index");
    kept[static_cast<std::size_t>(q)] = true;
  }
  const int n_keep = static_cast<int>(keep.size());
  const int n_tr = n_qubits - n_keep;
  const Eigen::Index dim_keep = Eigen::Index(1) << n_keep;
  const Eigen::Index dim_tr = Eigen::Index(1) << n_tr;

  // Map (kept bits, traced bits) back to a full register index.  Bit 0 of a
  // register index addresses the last (rightmost) qubit.
  auto merge = [&](Eigen::Index k_bits, Eigen::Index t_bits) {
    Eigen::Index full = 0;
    int kp = n_keep - 1, tp = n_tr - 1;
    for (int q = n_qubits - 1; q >= 0; --q) {
      const int shift = n_qubits - 1 - q;
      if (kept[static_cast<std::size_t>(q)]) {
        full |= ((k_bits >> (n_keep - 1 - kp)) & 1) << shift;
        --kp;
      } else {
        full |= ((t_bits >> (n_tr - 1 - tp)) & 1) << shift;
        --tp;
      }
    }
    return full;
  };

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  for (Eigen::Index i = 0; i < dim_keep; ++i)
    for (Eigen::Index j = 0; j < dim_keep; ++j)
      for (Eigen::Index t = 0; t < dim_tr; ++t) out(i, j) += rho(merge(i, t), merge(j, t));
  return out;
}

// Tr(op * rho) for Hermitian op; rejects non-Hermitian observables.
inline double expectation(const Matrix& rho, const Matrix& op, double herm_tol = 1e-9) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols())
    throw std::invalid_argument("expectation: operator/state dimension mismatch");
  if (!is_hermitian(op, herm_tol))
    throw std::invalid_argument("expectation: observable is not Hermitian");
  return (op * rho).trace().real();
}

// Principal square root of a PSD Hermitian matrix (negative eigenvalues from
// roundoff are clamped to zero).
inline Matrix sqrtm_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}

// Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const Matrix root = sqrtm_psd(rho);
  const double tr = sqrtm_psd(root * sigma * root).trace().real();
  return tr * tr;
}

// Pure target shortcut: F = <psi| rho |psi>.
inline double fidelity(const Matrix& rho, const Vector& psi) {
  if (psi.size() != rho.rows())
    throw std::invalid_argument("fidelity: state/vector dimension mismatch");
  return (psi.adjoint() * rho * psi)(0).real();
}

// Pure-pure overlap |<a|b>|^2.
inline double fidelity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity: vector size mismatch");
  return std::norm(Complex((a.adjoint() * b)(0)));
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

}  // namespace paritysim
