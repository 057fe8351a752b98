#pragma once
// Shared test utilities: seeded random states and matrices.

#include "paritysim/qops.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

namespace testutil {

using paritysim::Complex;
using paritysim::Matrix;
using paritysim::Vector;

inline Vector random_pure(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

// Random full-rank density matrix (mixture of dim random pure states).
inline Matrix random_density(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  Matrix rho = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double w = uni(rng);
    const Vector psi = random_pure(dim, rng);
    rho += w * (psi * psi.adjoint());
    total += w;
  }
  return rho / total;
}

inline Matrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  return 0.5 * (m + m.adjoint());
}

inline Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  const Matrix exponent = paritysim::kI * random_hermitian(dim, rng);
  return exponent.exp();
}

}  // namespace testutil
