#include "qreduce/epr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qreduce/projective.hpp"

namespace qreduce {

FilterCoupling FilterCoupling::from_list(double up_up, double up_down, double down_down, double down_up) {
  FilterCoupling c;
  c.lambda << up_up, up_down, down_up, down_down;
  return c;
}

std::array<double, 4> FilterCoupling::to_list() const {
  return {lambda(0, 0), lambda(0, 1), lambda(1, 1), lambda(1, 0)};
}

bool FilterCoupling::nondegenerate(double tol) const {
  const auto v = to_list();
  const double scale = lambda.cwiseAbs().maxCoeff();
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      if (std::abs(v[a] - v[b]) <= tol * scale) return false;
  return true;
}

StateVector singlet_state() {
  StateVector s = StateVector::Zero(4);
  s[two_qubit::kUpDown] = 1.0 / std::numbers::sqrt2;
  s[two_qubit::kDownUp] = -1.0 / std::numbers::sqrt2;
  return s;
}

std::pair<Eigen::Vector2cd, Eigen::Vector2cd> rotated_basis(double theta) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  return {Eigen::Vector2cd(c, s), Eigen::Vector2cd(-s, c)};
}

Eigen::Vector4cd product_vector(const Eigen::Vector2cd& first, const Eigen::Vector2cd& second) {
  return segre_coordinates(first, second);
}

namespace {

std::array<Eigen::Vector2cd, 2> basis_for(const FilterOrientation& o, RotatedSide side) {
  if (o.side == side) {
    auto [up, down] = rotated_basis(o.theta);
    return {up, down};
  }
  return {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(0.0, 1.0)};
}

}  // namespace

Eigen::Vector4cd epr_product_state(const FilterOrientation& o, int i, int j) {
  if (i < 0 || i > 1 || j < 0 || j > 1) throw ValidationError("product state labels must be 0 or 1");
  const auto first = basis_for(o, RotatedSide::kFirst);
  const auto second = basis_for(o, RotatedSide::kSecond);
  return product_vector(first[static_cast<std::size_t>(i)], second[static_cast<std::size_t>(j)]);
}

Observable build_epr_hamiltonian(const FilterCoupling& c, const FilterOrientation& o, double e0) {
  if (!c.finite() || !std::isfinite(e0)) throw ValidationError("filter couplings must be finite");
  if (!std::isfinite(o.theta)) throw ValidationError("filter angle must be finite");
  Matrix h = e0 * Matrix::Identity(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Eigen::Vector4cd v = epr_product_state(o, i, j);
      h += c.lambda(i, j) * (v * v.adjoint());
    }
  return Observable(h);
}

namespace {

void check_angle(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw ValidationError("theta must lie in [0, pi]");
  }
}

}  // namespace

BornTable epr_born_joint(double theta) {
  check_angle(theta);
  const StateVector s = singlet_state();
  const FilterOrientation o{theta, RotatedSide::kFirst};
  auto prob = [&](int i, int j) {
    return transition_probability(ProjectivePoint(s), ProjectivePoint(StateVector(epr_product_state(o, i, j))));
  };
  return {prob(0, 1), prob(0, 0), prob(1, 1), prob(1, 0)};
}

double epr_born_conditional(double theta) {
  const BornTable t = epr_born_joint(theta);
  return t.rup_down / (t.rup_down + t.rdown_down);
}

}  // namespace qreduce
