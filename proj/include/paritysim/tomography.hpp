#pragma once
// State tomography: exact Pauli sets, finite-shot count sampling through a
// row-stochastic assignment matrix, inverse-assignment correction, and
// maximum-likelihood reconstruction (linear inversion followed by projection
// onto the physical simplex).

#include "paritysim/device.hpp"
#include "paritysim/qops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

using PauliSet = std::map<std::string, double>;

inline int qubit_count_of(const Matrix& rho) {
  int n = 0;
  Eigen::Index d = rho.rows();
  while (d > 1) {
    if (d % 2 != 0) throw std::invalid_argument("tomography: dimension is not a power of two");
    d /= 2;
    ++n;
  }
  return n;
}

// All non-identity Pauli labels over n qubits, lexicographic in {I,X,Y,Z}.
inline std::vector<std::string> pauli_labels(int n_qubits) {
  const char alphabet[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> out;
  const int total = 1 << (2 * n_qubits);
  for (int code = 1; code < total; ++code) {  // skip the all-identity label
    std::string label(static_cast<std::size_t>(n_qubits), 'I');
    int c = code;
    for (int q = n_qubits - 1; q >= 0; --q) {
      label[static_cast<std::size_t>(q)] = alphabet[c % 4];
      c /= 4;
    }
    out.push_back(std::move(label));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// All 3^n measurement bases over {X,Y,Z}, lexicographic.
inline std::vector<std::string> measurement_bases(int n_qubits) {
  std::vector<std::string> out{""};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<std::string> next;
    for (const auto& prefix : out)
      for (char p : {'X', 'Y', 'Z'}) next.push_back(prefix + p);
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline PauliSet exact_pauli_set(const Matrix& rho) {
  const int n = qubit_count_of(rho);
  PauliSet out;
  for (const auto& label : pauli_labels(n)) out[label] = expectation(rho, pauli_string(label));
  return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// Basis-change unitary mapping the measured Pauli onto Z: U P U^dag = Z.
inline Matrix basis_rotation(char p) {
  Matrix u(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  switch (p) {
    case 'Z': return identity(2);
    case 'X':
      // R_y(-pi/2)
      u << s, s, -s, s;
      return u;
    case 'Y':
      // R_x(+pi/2)
      u << s, -kI * s, -kI * s, s;
      return u;
    default: throw std::invalid_argument("tomography: bad basis character");
  }
}

inline Matrix basis_rotation(const std::string& basis) {
  Matrix u = basis_rotation(basis.at(0));
  for (std::size_t k = 1; k < basis.size(); ++k) u = kron(u, basis_rotation(basis[k]));
  return u;
}

// 53-bit uniform double in [0, 1); fully determined by the mt19937_64 stream.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ShotRecord {
  std::string basis;                 // e.g. "ZX"
  std::vector<std::int64_t> counts;  // per computational outcome
  std::int64_t shots = 0;
};

// Reported-outcome probabilities for a basis measurement: rotate, read the
// diagonal, push through the assignment confusion (row = true state).
inline Eigen::VectorXd reported_probabilities(const Matrix& rho, const std::string& basis,
                                              const Eigen::MatrixXd& assignment) {
  const Matrix u = basis_rotation(basis);
  const Matrix rotated = u * rho * u.adjoint();
  Eigen::VectorXd truth = rotated.diagonal().real().cwiseMax(0.0);
  truth /= truth.sum();
  if (assignment.rows() != truth.size() || assignment.cols() != truth.size())
    throw std::invalid_argument("tomography: assignment matrix dimension mismatch");
  return assignment.transpose() * truth;
}

inline ShotRecord sample_counts(const Matrix& rho, const std::string& basis,
                                std::int64_t shots, const Eigen::MatrixXd& assignment,
                                std::mt19937_64& rng) {
  if (shots <= 0) throw std::invalid_argument("tomography: shots must be positive");
  const Eigen::VectorXd p = reported_probabilities(rho, basis, assignment);
  ShotRecord rec{basis, std::vector<std::int64_t>(static_cast<std::size_t>(p.size()), 0), shots};
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng);
    double acc = 0.0;
    Eigen::Index pick = p.size() - 1;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p(i);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    ++rec.counts[static_cast<std::size_t>(pick)];
  }
  return rec;
}

// Invert the readout confusion: f_true = (A^T)^{-1} f_reported.
inline Eigen::VectorXd corrected_frequencies(const ShotRecord& rec,
                                             const Eigen::MatrixXd& assignment) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(rec.counts.size()));
  for (std::size_t i = 0; i < rec.counts.size(); ++i)
    f(static_cast<Eigen::Index>(i)) =
        static_cast<double>(rec.counts[i]) / static_cast<double>(rec.shots);
  return assignment.transpose().fullPivLu().solve(f);
}

// Average Pauli estimates over every record whose basis is compatible with
// the label (non-identity positions must match the measured basis).
inline PauliSet estimate_pauli_set(const std::vector<ShotRecord>& records,
                                   const Eigen::MatrixXd& assignment) {
  if (records.empty()) throw std::invalid_argument("tomography: no shot records");
  const int n = static_cast<int>(records.front().basis.size());
  PauliSet sums;
  std::map<std::string, int> hits;
  for (const auto& label : pauli_labels(n)) {
    sums[label] = 0.0;
    hits[label] = 0;
  }
  for (const auto& rec : records) {
    if (static_cast<int>(rec.basis.size()) != n)
      throw std::invalid_argument("tomography: mixed register sizes in shot records");
    const Eigen::VectorXd f = corrected_frequencies(rec, assignment);
    for (auto& [label, sum] : sums) {
      bool compatible = true;
      for (int q = 0; q < n; ++q)
        if (label[static_cast<std::size_t>(q)] != 'I' &&
            label[static_cast<std::size_t>(q)] != rec.basis[static_cast<std::size_t>(q)]) {
          compatible = false;
          break;
        }
      if (!compatible) continue;
      double value = 0.0;
      for (Eigen::Index z = 0; z < f.size(); ++z) {
        int parity = 0;
        for (int q = 0; q < n; ++q)
          if (label[static_cast<std::size_t>(q)] != 'I')
            parity ^= static_cast<int>((z >> (n - 1 - q)) & 1);
        value += (parity ? -1.0 : 1.0) * f(z);
      }
      sum += value;
      ++hits[label];
    }
  }
  PauliSet out;
  for (auto& [label, sum] : sums) {
    if (hits[label] == 0)
      throw std::invalid_argument("tomography: records do not cover label " + label);
    out[label] = sum / hits[label];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood reconstruction
// ---------------------------------------------------------------------------

// Project eigenvalues onto the probability simplex (closest PSD unit-trace
// state in Frobenius norm), then rebuild the matrix.
inline Matrix project_to_physical(const Matrix& rho_lin) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho_lin + rho_lin.adjoint()));
  Eigen::VectorXd lam = solver.eigenvalues();
  const Eigen::Index d = lam.size();
  std::vector<double> sorted(lam.data(), lam.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (1.0 - cumulative) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] + candidate > 0.0) shift = candidate;
  }
  Eigen::VectorXd clipped = (lam.array() + shift).cwiseMax(0.0);
  clipped /= clipped.sum();
  return solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
}

// Linear inversion from a complete Pauli set, then physical projection.
inline Matrix mle_reconstruct(const PauliSet& set, int n_qubits) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  Matrix rho = identity(dim);
  for (const auto& label : pauli_labels(n_qubits)) {
    auto it = set.find(label);
    if (it == set.end())
      throw std::invalid_argument("tomography: Pauli set is missing label " + label);
    rho += it->second * pauli_string(label);
  }
  rho /= static_cast<double>(dim);
  return project_to_physical(rho);
}

// Full finite-shot tomography of a state through a given assignment matrix.
inline Matrix tomograph(const Matrix& rho, const Eigen::MatrixXd& assignment,
                        std::int64_t shots_per_basis, std::mt19937_64& rng) {
  const int n = qubit_count_of(rho);
  std::vector<ShotRecord> records;
  for (const auto& basis : measurement_bases(n))
    records.push_back(sample_counts(rho, basis, shots_per_basis, assignment, rng));
  return mle_reconstruct(estimate_pauli_set(records, assignment), n);
}

// Assignment matrix for a subset of the register's qubits.
inline Eigen::MatrixXd assignment_for(const DeviceModel& model, const std::vector<int>& qubits) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (int q : qubits) {
    if (q < 0 || q >= kNumQubits) throw std::invalid_argument("tomography: bad qubit index");
    const Eigen::Matrix2d& a = model.assignment[static_cast<std::size_t>(q)];
    Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(i * 2, j * 2, 2, 2) = out(i, j) * a;
    out = next;
  }
  return out;
}

}  // namespace paritysim
