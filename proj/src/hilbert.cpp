#include "qreduce/hilbert.hpp"

#include <algorithm>

namespace qreduce {

StateVector canonical_representative(const StateVector& psi) {
  const double n2 = checked_squared_norm(psi);
  StateVector unit = psi / std::sqrt(n2);
  for (Eigen::Index j = 0; j < unit.size(); ++j) {
    const double mag = std::abs(unit[j]);
    if (mag > kAmplitudeThreshold) {
      unit *= std::conj(unit[j]) / mag;
      unit[j] = Complex(std::abs(unit[j]), 0.0);
      break;
    }
  }
  return unit;
}

Ray::Ray(const StateVector& psi) : rep_(canonical_representative(psi)) {}

bool Ray::approx_equal(const Ray& other, double tol) const {
  if (dimension() != other.dimension()) return false;
  return (rep_ - other.rep_).cwiseAbs().maxCoeff() <= tol;
}

namespace {

std::vector<Eigenspace> group_levels(const Eigen::VectorXd& values, const Matrix& vectors,
                                     double abs_tol, std::vector<Eigen::Index>* level_space) {
  std::vector<Eigenspace> spaces;
  const Eigen::Index n = values.size();
  if (level_space) level_space->assign(static_cast<std::size_t>(n), 0);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    // Chain merge: consecutive ascending levels within tolerance join.
    while (end < n && values[end] - values[end - 1] <= abs_tol) ++end;
    Eigenspace space;
    space.eigenvalue = values.segment(start, end - start).mean();
    space.basis = vectors.middleCols(start, end - start);
    if (level_space) {
      for (Eigen::Index j = start; j < end; ++j) {
        (*level_space)[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(spaces.size());
      }
    }
    spaces.push_back(std::move(space));
    start = end;
  }
  return spaces;
}

}  // namespace

Observable::Observable(const Matrix& m, double degeneracy_tol) : degeneracy_tol_(degeneracy_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ValidationError("observable must be a nonempty square matrix");
  }
  if (m.rows() > kMaxDimension) throw ValidationError("observable dimension exceeds 64");
  if (!m.allFinite()) throw ValidationError("observable has non-finite entries");
  if (!(degeneracy_tol >= 0.0)) throw ValidationError("degeneracy tolerance must be >= 0");

  const double scale = m.norm();
  const double asym = (m - m.adjoint()).norm();
  if (asym > 1e-12 * scale) throw ValidationError("observable is not Hermitian");

  matrix_ = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
  if (solver.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  norm_ = eigenvalues_.cwiseAbs().maxCoeff();
  spaces_ = group_levels(eigenvalues_, eigenvectors_, degeneracy_tol_ * norm_, &level_space_);
}

const std::vector<Eigenspace>& eigensystem(const Observable& h) { return h.eigenspaces(); }

std::vector<Eigenspace> eigensystem(const Observable& h, double degeneracy_tol) {
  if (!(degeneracy_tol >= 0.0)) throw ValidationError("degeneracy tolerance must be >= 0");
  return group_levels(h.eigenvalues(), h.eigenvectors(), degeneracy_tol * h.norm(), nullptr);
}

std::vector<double> eigenspace_weights(const Observable& h, const StateVector& psi) {
  if (psi.size() != h.dimension()) throw ValidationError("state and observable dimensions differ");
  const double n2 = checked_squared_norm(psi);
  const StateVector coeffs = h.eigenvectors().adjoint() * psi;
  std::vector<double> weights(h.eigenspaces().size(), 0.0);
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    weights[static_cast<std::size_t>(h.eigenspace_of_level(j))] += std::norm(coeffs[j]) / n2;
  }
  return weights;
}

}  // namespace qreduce
