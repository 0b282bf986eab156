#pragma once

#include <array>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qreduce/hilbert.hpp"

namespace qreduce {

/// Detector couplings lambda_{ij} for the projector onto v_i (x) v_j,
/// i, j in {0 = up, 1 = down}.
struct FilterCoupling {
  Eigen::Matrix2d lambda = Eigen::Matrix2d::Zero();

  /// From (lambda_11, lambda_12, lambda_22, lambda_21) in the usual 1-based labels.
  static FilterCoupling from_list(double up_up, double up_down, double down_down, double down_up);
  /// Back to (lambda_11, lambda_12, lambda_22, lambda_21).
  std::array<double, 4> to_list() const;

  bool finite() const { return lambda.allFinite(); }
  /// All four couplings pairwise distinct beyond `tol * max|lambda|`.
  bool nondegenerate(double tol = 1e-9) const;
};

enum class RotatedSide { kFirst = 1, kSecond = 2 };

struct FilterOrientation {
  double theta = 0.0;  // relative analyser angle, radians
  RotatedSide side = RotatedSide::kFirst;
};

/// (1, 0, 0, -1) / sqrt 2 in the (x:y:z:w) basis order.
StateVector singlet_state();

/// Rotated one-particle basis: cos(t/2) up + sin(t/2) down and
/// -sin(t/2) up + cos(t/2) down.
std::pair<Eigen::Vector2cd, Eigen::Vector2cd> rotated_basis(double theta);

/// Two-particle product vector v (x) u in the (x:y:z:w) basis order.
Eigen::Vector4cd product_vector(const Eigen::Vector2cd& first, const Eigen::Vector2cd& second);

/// Filter Hamiltonian sum lambda_ij |v_i v_j><v_i v_j| + e0, with the
/// selected particle's basis rotated by theta.
Observable build_epr_hamiltonian(const FilterCoupling& c, const FilterOrientation& o, double e0 = 0.0);

/// Product eigenvector v_i (x) v_j of the Hamiltonian built with `o`.
Eigen::Vector4cd epr_product_state(const FilterOrientation& o, int i, int j);

/// Singlet Born probabilities over the rotated product basis. Entries are
/// named for the rotated particle (r = rotated up, rd = rotated down) and
/// the other particle (u, d).
struct BornTable {
  double rup_down = 0.0;    // rotated-up (x) down       : cos^2(t/2)/2
  double rup_up = 0.0;      // rotated-up (x) up         : sin^2(t/2)/2
  double rdown_down = 0.0;  // rotated-down (x) down     : sin^2(t/2)/2
  double rdown_up = 0.0;    // rotated-down (x) up       : cos^2(t/2)/2

  double sum() const { return rup_down + rup_up + rdown_down + rdown_up; }
};

BornTable epr_born_joint(double theta);

/// P(rotated particle up | other particle down) = cos^2(theta/2).
double epr_born_conditional(double theta);

}  // namespace qreduce
