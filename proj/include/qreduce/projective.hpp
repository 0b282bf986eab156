#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qreduce/exact.hpp"
#include "qreduce/hilbert.hpp"

namespace qreduce {

/// Coordinate order of C^2 (x) C^2 used throughout: (x:y:z:w) holds the
/// amplitudes of (up.down, up.up, down.down, down.up).
namespace two_qubit {
inline constexpr Eigen::Index kUpDown = 0;      // x
inline constexpr Eigen::Index kUpUp = 1;        // y
inline constexpr Eigen::Index kDownDown = 2;    // z
inline constexpr Eigen::Index kDownUp = 3;      // w

/// Coordinate index of v_i (x) v_j, with 0 = up, 1 = down.
constexpr Eigen::Index index(int first, int second) {
  constexpr Eigen::Index table[2][2] = {{kUpUp, kUpDown}, {kDownUp, kDownDown}};
  return table[first][second];
}
}  // namespace two_qubit

/// Point of CP^{n-1}, stored as its canonical ray representative.
class ProjectivePoint {
 public:
  explicit ProjectivePoint(const StateVector& homogeneous) : ray_(homogeneous) {}
  ProjectivePoint(std::initializer_list<Complex> coords)
      : ray_(Eigen::Map<const StateVector>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}
  explicit ProjectivePoint(const Ray& ray) : ray_(ray) {}

  const StateVector& coordinates() const { return ray_.representative(); }
  const Ray& ray() const { return ray_; }
  Eigen::Index dimension() const { return ray_.dimension(); }

  friend bool operator==(const ProjectivePoint& a, const ProjectivePoint& b) {
    return a.ray_.approx_equal(b.ray_, 1e-12);
  }

 private:
  Ray ray_;
};

/// <a|b> with conjugation on the left, for any scalar type.
template <typename DA, typename DB>
typename DA::Scalar hermitian_inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  typename DA::Scalar acc{0};
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += conjugate(a[i]) * b[i];
  return acc;
}

/// |<X|Y>|^2 / (<X|X><Y|Y>) in the scalar's own arithmetic.
template <typename DA, typename DB>
auto transition_probability(const Eigen::MatrixBase<DA>& x, const Eigen::MatrixBase<DB>& y) {
  const auto xy = hermitian_inner(x, y);
  const auto xx = hermitian_inner(x, x);
  const auto yy = hermitian_inner(y, y);
  if (is_zero(xx) || is_zero(yy)) throw DomainError("transition probability of a zero point");
  return (xy * conjugate(xy)) / (xx * yy);
}

double transition_probability(const ProjectivePoint& x, const ProjectivePoint& y);

/// Fubini-Study geodesic distance in [0, pi]; cos^2(theta/2) equals the
/// transition probability.
double fs_distance(const ProjectivePoint& x, const ProjectivePoint& y);

struct ChartCoordinates {
  int chart_index = 1;          // 1-based index of the coordinate set to one
  StateVector affine;           // z^a / z^chart for a != chart, in order

  /// Real coordinates (Re affine..., Im affine...), length 2(n-1).
  Eigen::VectorXd real_coordinates() const;
};

ChartCoordinates to_chart(const ProjectivePoint& p, int chart_index);
ProjectivePoint from_chart(const ChartCoordinates& c);

/// Segre image of ((a:b),(c:d)): coordinates (ad : ac : bd : bc).
template <typename D1, typename D2>
Eigen::Matrix<typename D1::Scalar, 4, 1> segre_coordinates(const Eigen::MatrixBase<D1>& first,
                                                           const Eigen::MatrixBase<D2>& second) {
  if ((is_zero(first[0]) && is_zero(first[1])) || (is_zero(second[0]) && is_zero(second[1]))) {
    throw DomainError("segre embedding of a zero pair");
  }
  Eigen::Matrix<typename D1::Scalar, 4, 1> out;
  out[two_qubit::kUpDown] = first[0] * second[1];
  out[two_qubit::kUpUp] = first[0] * second[0];
  out[two_qubit::kDownDown] = first[1] * second[1];
  out[two_qubit::kDownUp] = first[1] * second[0];
  return out;
}

ProjectivePoint segre_embed(const Eigen::Vector2cd& first, const Eigen::Vector2cd& second);

/// xw - yz; vanishes exactly on product states.
template <typename Derived>
typename Derived::Scalar quadric_form(const Eigen::MatrixBase<Derived>& p) {
  return p[0] * p[3] - p[1] * p[2];
}

/// 2|xw - yz| / ||p||^2 in [0, 1]: 0 on product states, 1 when maximally
/// entangled.
double quadric_residual(const StateVector& p);
double quadric_residual(const ProjectivePoint& p);

bool is_disentangled(const ProjectivePoint& p, double tol);

/// Distinguished points of CP^3. The product points on the line P0P1 use
/// the Segre-consistent labels: up_down = (1:0:0:0), down_up = (0:0:0:1).
template <typename Scalar>
struct NamedPoints {
  using Point = Eigen::Matrix<Scalar, 4, 1>;
  Point singlet;    // P0 = (1:0:0:-1)
  Point triplet0;   // P1 = (1:0:0:1)
  Point up_up;      // (0:1:0:0)
  Point down_down;  // (0:0:1:0)
  Point up_down;    // (1:0:0:0)
  Point down_up;    // (0:0:0:1)
};

template <typename Scalar>
NamedPoints<Scalar> named_points() {
  using P = typename NamedPoints<Scalar>::Point;
  const Scalar o{0}, l{1};
  return {P(l, o, o, -l), P(l, o, o, l), P(o, l, o, o), P(o, o, l, o), P(l, o, o, o), P(o, o, o, l)};
}

struct GeometryCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Tangent lines to the conic {x^2 = yz, x = w} at P_upup and P_downdown,
/// intersected in exact arithmetic, must meet at P1.
bool tangent_intersection_check();

/// Every exact incidence relation among the named points.
std::vector<GeometryCheck> geometry_selftest();

/// Max |coordinate velocity from the Hamiltonian vector field on the CP^1
/// chart z^2 != 0 - chart velocity of the Schrodinger flow -i H psi|.
double fs_flow_check_cp1(const Observable& h, const ProjectivePoint& p);

}  // namespace qreduce
