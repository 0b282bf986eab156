#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qreduce/errors.hpp"

namespace qreduce {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr Eigen::Index kMaxDimension = 64;

/// Magnitude below which an amplitude of a unit vector counts as zero when
/// fixing the phase of a canonical representative.
inline constexpr double kAmplitudeThreshold = 1e-14;

/// Squared norm of `psi`; throws DomainError for the zero vector or
/// non-finite amplitudes.
template <typename Derived>
double checked_squared_norm(const Eigen::MatrixBase<Derived>& psi) {
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DomainError("state vector must be nonzero with finite amplitudes");
  }
  return n2;
}

/// Unit-norm representative whose first nonzero amplitude is real positive.
StateVector canonical_representative(const StateVector& psi);

/// Physical pure state: the equivalence class of a StateVector under
/// nonzero complex scaling.
class Ray {
 public:
  explicit Ray(const StateVector& psi);

  const StateVector& representative() const { return rep_; }
  Eigen::Index dimension() const { return rep_.size(); }

  /// Equal iff canonical representatives agree to `tol` in max-norm.
  bool approx_equal(const Ray& other, double tol = 1e-12) const;
  friend bool operator==(const Ray& a, const Ray& b) { return a.approx_equal(b); }

 private:
  StateVector rep_;
};

struct MomentTriple {
  double mean = 0.0;      // <H>
  double variance = 0.0;  // <(H - <H>)^2>
  double third = 0.0;     // <(H - <H>)^3>
};

struct Eigenspace {
  double eigenvalue = 0.0;
  Matrix basis;  // orthonormal columns

  Eigen::Index dimension() const { return basis.cols(); }
  Matrix projector() const { return basis * basis.adjoint(); }
};

/// Hermitian observable with a cached spectral decomposition.
///
/// The matrix is checked for Hermiticity to 1e-12 relative tolerance and
/// then stored in exactly Hermitian form. Eigenvalues closer than
/// `degeneracy_tol * norm()` are merged into a single eigenspace.
class Observable {
 public:
  explicit Observable(const Matrix& m, double degeneracy_tol = 1e-9);

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dimension() const { return matrix_.rows(); }

  /// Spectral norm, max |eigenvalue|.
  double norm() const { return norm_; }

  /// Ascending eigenvalues, one per eigenvector column.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }

  const std::vector<Eigenspace>& eigenspaces() const { return spaces_; }
  /// Eigenspace index owning eigenvector column `level`.
  Eigen::Index eigenspace_of_level(Eigen::Index level) const { return level_space_[level]; }
  double degeneracy_tolerance() const { return degeneracy_tol_; }

 private:
  Matrix matrix_;
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
  double norm_ = 0.0;
  double degeneracy_tol_ = 1e-9;
  std::vector<Eigenspace> spaces_;
  std::vector<Eigen::Index> level_space_;
};

/// Eigenspaces with ascending eigenvalues, merged at the observable's own
/// degeneracy tolerance.
const std::vector<Eigenspace>& eigensystem(const Observable& h);

/// Eigenspaces re-merged at a different relative tolerance.
std::vector<Eigenspace> eigensystem(const Observable& h, double degeneracy_tol);

template <typename Derived>
MomentTriple moments(const Observable& h, const Eigen::MatrixBase<Derived>& psi) {
  if (psi.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  const double n2 = checked_squared_norm(psi);
  const StateVector hpsi = h.matrix() * psi;
  MomentTriple m;
  m.mean = psi.dot(hpsi).real() / n2;
  // Centred vector (H - <H>)psi keeps the variance non-negative by construction.
  const StateVector centred = hpsi - m.mean * psi;
  const double c2 = centred.squaredNorm();
  m.variance = c2 / n2;
  m.third = (centred.dot(h.matrix() * centred).real() - m.mean * c2) / n2;
  return m;
}

template <typename Derived>
double expectation(const Observable& h, const Eigen::MatrixBase<Derived>& psi) {
  if (psi.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  const double n2 = checked_squared_norm(psi);
  return psi.dot(h.matrix() * psi).real() / n2;
}

template <typename Derived>
double variance(const Observable& h, const Eigen::MatrixBase<Derived>& psi) {
  return moments(h, psi).variance;
}

template <typename Derived>
double third_central_moment(const Observable& h, const Eigen::MatrixBase<Derived>& psi) {
  return moments(h, psi).third;
}

/// ||P_k psi||^2 / ||psi||^2 for each eigenspace k.
std::vector<double> eigenspace_weights(const Observable& h, const StateVector& psi);

}  // namespace qreduce
