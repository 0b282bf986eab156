#include "qreduce/projective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qreduce {

double transition_probability(const ProjectivePoint& x, const ProjectivePoint& y) {
  if (x.dimension() != y.dimension()) throw ValidationError("points live in different spaces");
  return std::clamp(std::norm(x.coordinates().dot(y.coordinates())), 0.0, 1.0);
}

double fs_distance(const ProjectivePoint& x, const ProjectivePoint& y) {
  if (x.dimension() != y.dimension()) throw ValidationError("points live in different spaces");
  const StateVector& u = x.coordinates();
  const StateVector& v = y.coordinates();
  const Complex overlap = u.dot(v);
  // atan2 of the orthogonal and parallel parts stays accurate near 0 and pi.
  const double perp = (v - overlap * u).norm();
  return 2.0 * std::atan2(perp, std::abs(overlap));
}

Eigen::VectorXd ChartCoordinates::real_coordinates() const {
  Eigen::VectorXd out(2 * affine.size());
  out << affine.real(), affine.imag();
  return out;
}

ChartCoordinates to_chart(const ProjectivePoint& p, int chart_index) {
  const Eigen::Index n = p.dimension();
  if (chart_index < 1 || chart_index > n) {
    throw ChartDomainError(chart_index, "chart index " + std::to_string(chart_index) +
                                            " outside [1, " + std::to_string(n) + "]");
  }
  const StateVector& z = p.coordinates();
  const Complex pivot = z[chart_index - 1];
  if (std::abs(pivot) <= 1e-12) {
    throw ChartDomainError(chart_index, "coordinate " + std::to_string(chart_index) +
                                            " vanishes; point lies outside chart " +
                                            std::to_string(chart_index));
  }
  ChartCoordinates c;
  c.chart_index = chart_index;
  c.affine.resize(n - 1);
  for (Eigen::Index j = 0, a = 0; j < n; ++j) {
    if (j == chart_index - 1) continue;
    c.affine[a++] = z[j] / pivot;
  }
  return c;
}

ProjectivePoint from_chart(const ChartCoordinates& c) {
  const Eigen::Index n = c.affine.size() + 1;
  if (c.chart_index < 1 || c.chart_index > n) {
    throw ChartDomainError(c.chart_index, "chart index out of range");
  }
  StateVector z(n);
  for (Eigen::Index j = 0, a = 0; j < n; ++j) {
    z[j] = (j == c.chart_index - 1) ? Complex(1.0) : c.affine[a++];
  }
  return ProjectivePoint(z);
}

ProjectivePoint segre_embed(const Eigen::Vector2cd& first, const Eigen::Vector2cd& second) {
  if (first.squaredNorm() == 0.0 || second.squaredNorm() == 0.0) {
    throw DomainError("segre embedding of a zero pair");
  }
  return ProjectivePoint(StateVector(segre_coordinates(first, second)));
}

double quadric_residual(const StateVector& p) {
  if (p.size() != 4) throw ValidationError("quadric residual needs a point of CP^3");
  const double n2 = checked_squared_norm(p);
  return std::min(1.0, 2.0 * std::abs(quadric_form(p)) / n2);
}

double quadric_residual(const ProjectivePoint& p) { return quadric_residual(p.coordinates()); }

bool is_disentangled(const ProjectivePoint& p, double tol) {
  if (!(tol > 0.0)) throw ValidationError("disentanglement tolerance must be positive");
  return quadric_residual(p) < tol;
}

namespace {

using GR = GaussianRational;
using Exact4 = ExactVector<4>;
using Exact3 = ExactVector<3>;

bool proportional(const Exact4& u, const Exact4& v) {
  bool u_zero = true, v_zero = true;
  for (int i = 0; i < 4; ++i) {
    u_zero = u_zero && u[i].is_zero();
    v_zero = v_zero && v[i].is_zero();
  }
  if (u_zero || v_zero) return false;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (u[i] * v[j] != u[j] * v[i]) return false;
  return true;
}

bool orthogonal(const Exact4& u, const Exact4& v) { return hermitian_inner(u, v).is_zero(); }

// Conic x^2 - yz on the plane L = {x = w}, in plane coordinates (x, y, z).
Eigen::Matrix<GR, 3, 3> conic_matrix() {
  Eigen::Matrix<GR, 3, 3> a;
  const GR half_neg = GR::fraction(-1, 2);
  a << GR(1), GR(0), GR(0),
       GR(0), GR(0), half_neg,
       GR(0), half_neg, GR(0);
  return a;
}

GR bilinear(const Eigen::Matrix<GR, 3, 3>& a, const Exact3& p, const Exact3& q) {
  GR acc(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) acc += p[i] * a(i, j) * q[j];
  return acc;
}

Exact3 cross(const Exact3& a, const Exact3& b) {
  return Exact3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

bool in_plane_l(const Exact4& p) { return p[0] == p[3]; }

Exact3 plane_coordinates(const Exact4& p) { return Exact3(p[0], p[1], p[2]); }

Exact4 lift_from_plane(const Exact3& p) { return Exact4(p[0], p[1], p[2], p[0]); }

bool on_conic(const Exact4& p) { return in_plane_l(p) && p[0] * p[0] == p[1] * p[2]; }

// Symmetric bilinear form of xw - yz.
GR quadric_bilinear(const Exact4& u, const Exact4& v) {
  return GR::fraction(1, 2) * (u[0] * v[3] + u[3] * v[0] - u[1] * v[2] - u[2] * v[1]);
}

}  // namespace

bool tangent_intersection_check() {
  const auto pts = named_points<GR>();
  if (!on_conic(pts.up_up) || !on_conic(pts.down_down)) return false;
  const auto a = conic_matrix();
  const Exact3 p = plane_coordinates(pts.up_up);
  const Exact3 q = plane_coordinates(pts.down_down);
  // Polar lines of points on the conic are the tangents there.
  const Exact3 tangent_p = a * p;
  const Exact3 tangent_q = a * q;
  const Exact3 meet = cross(tangent_p, tangent_q);
  if (meet[0].is_zero() && meet[1].is_zero() && meet[2].is_zero()) return false;
  // Each tangent touches the conic only at its own point: the meet point lies
  // on both lines and off the conic, so the restriction has a double root.
  for (const Exact3* base : {&p, &q}) {
    if (!bilinear(a, *base, meet).is_zero()) return false;
  }
  if (bilinear(a, meet, meet).is_zero()) return false;
  const Exact4 lifted = lift_from_plane(meet);
  return proportional(lifted, pts.triplet0) && lifted[1].is_zero() && lifted[2].is_zero() &&
         in_plane_l(lifted);
}

std::vector<GeometryCheck> geometry_selftest() {
  const auto pts = named_points<GR>();
  std::vector<GeometryCheck> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  add("P0 conjugate to P1", transition_probability(pts.singlet, pts.triplet0).is_zero(),
      "transition probability of (1:0:0:-1) and (1:0:0:1) is 0");
  add("P_upup conjugate to P_downdown",
      transition_probability(pts.up_up, pts.down_down).is_zero(),
      "transition probability of (0:1:0:0) and (0:0:1:0) is 0");

  {
    const Exact4 l1(GR(1), GR(0), GR(0), GR(1)), l2(GR(0), GR(1), GR(0), GR(0)),
        l3(GR(0), GR(0), GR(1), GR(0));
    add("P0 orthogonal to triplet plane L",
        orthogonal(pts.singlet, l1) && orthogonal(pts.singlet, l2) && orthogonal(pts.singlet, l3),
        "P0 is conjugate to the spanning points of {x = w}");
  }

  {
    bool ok = true;
    for (const Exact4* p : {&pts.up_up, &pts.down_down, &pts.up_down, &pts.down_up}) {
      ok = ok && quadric_form(*p).is_zero();
    }
    add("product points on quadric Q", ok, "xw = yz at P_upup, P_downdown, P_updown, P_downup");
  }
  add("P0 and P1 off quadric Q",
      !quadric_form(pts.singlet).is_zero() && !quadric_form(pts.triplet0).is_zero(),
      "xw - yz = -1 at P0 and 1 at P1");

  add("P_upup and P_downdown on conic C", on_conic(pts.up_up) && on_conic(pts.down_down),
      "x = w and x^2 = yz hold");
  add("conic C is Q restricted to L", [&] {
    // On x = w the quadric equation xw = yz reads x^2 = yz.
    for (int s = -2; s <= 2; ++s)
      for (int t = -2; t <= 2; ++t) {
        const Exact4 c(GR(s * t), GR(s * s), GR(t * t), GR(s * t));
        if (!in_plane_l(c) || !quadric_form(c).is_zero() || !on_conic(c)) return false;
      }
    return true;
  }(), "parametrised conic points (st : s^2 : t^2 : st) lie on Q and in L");

  add("P1 satisfies y = z = 0, x = w",
      pts.triplet0[1].is_zero() && pts.triplet0[2].is_zero() && in_plane_l(pts.triplet0),
      "P1 = (1:0:0:1)");

  add("tangents at P_upup and P_downdown meet at P1", tangent_intersection_check(),
      "polar lines z = 0 and y = 0 of the conic meet at (1:0:0) -> (1:0:0:1)");

  {
    // Line mu*P1 + nu*P0 = (mu+nu : 0 : 0 : mu-nu); restrict xw - yz to it.
    const GR a = quadric_bilinear(pts.triplet0, pts.triplet0);
    const GR b = quadric_bilinear(pts.triplet0, pts.singlet);
    const GR c = quadric_bilinear(pts.singlet, pts.singlet);
    const GR disc = b * b - a * c;
    // Roots mu/nu = (-b +- 1)/a when the discriminant is exactly 1.
    bool ok = !a.is_zero() && disc == GR(1);
    std::vector<Exact4> hits;
    if (ok) {
      for (const GR& root : {(-b + GR(1)) / a, (-b - GR(1)) / a}) {
        const Exact4 point = root * pts.triplet0 + pts.singlet;
        ok = ok && quadric_form(point).is_zero();
        hits.push_back(point);
      }
      ok = ok && (-b + GR(1)) / a == GR(1) && (-b - GR(1)) / a == GR(-1);
      ok = ok && proportional(hits[0], pts.up_down) && proportional(hits[1], pts.down_up);
    }
    add("line P0P1 meets Q exactly at mu = +-nu", ok,
        "restricted form mu^2 - nu^2 has roots mu/nu = 1 -> (1:0:0:0) and -1 -> (0:0:0:1)");
  }

  {
    // Conic points (st : s^2 : t^2 : st); inner product with P_upup is s^2.
    bool ok = true;
    for (int s = -3; s <= 3; ++s)
      for (int t = -3; t <= 3; ++t) {
        if (s == 0 && t == 0) continue;
        const Exact4 c(GR(s * t), GR(s * s), GR(t * t), GR(s * t));
        const bool conj = orthogonal(pts.up_up, c);
        if (conj != (s == 0)) ok = false;
        if (conj && !proportional(c, pts.down_down)) ok = false;
      }
    add("P_downdown is the unique conic point conjugate to P_upup", ok,
        "<P_upup | (st:s^2:t^2:st)> = s^2 vanishes only at (0:0:1:0)");
  }

  {
    bool ok = true;
    const int vals[] = {-2, -1, 0, 1, 2};
    for (int a : vals)
      for (int bi : vals)
        for (int c : vals)
          for (int di : vals) {
            const ExactVector<2> first(GR(a), GR(0, bi));
            const ExactVector<2> second(GR(c, 1), GR(0, di));
            if (first[0].is_zero() && first[1].is_zero()) continue;
            ok = ok && quadric_form(segre_coordinates(first, second)).is_zero();
          }
    add("Segre images lie on quadric Q", ok, "((a:b),(c:d)) -> (ad:ac:bd:bc) satisfies xw = yz");
  }

  {
    const ExactVector<2> up(GR(1), GR(0)), down(GR(0), GR(1));
    add("Segre image of (up, up) is P_upup and of (down, down) is P_downdown",
        proportional(segre_coordinates(up, up), pts.up_up) &&
            proportional(segre_coordinates(down, down), pts.down_down) &&
            proportional(segre_coordinates(up, down), pts.up_down) &&
            proportional(segre_coordinates(down, up), pts.down_up),
        "basis order (up.down, up.up, down.down, down.up)");
  }

  return checks;
}

double fs_flow_check_cp1(const Observable& h, const ProjectivePoint& p) {
  if (h.dimension() != 2 || p.dimension() != 2) throw ValidationError("flow check runs on CP^1");
  const ChartCoordinates chart = to_chart(p, 2);
  const Complex w = chart.affine[0];
  const Eigen::Vector2cd psi(w, Complex(1.0));
  const Eigen::Matrix2cd& hm = h.matrix();

  // Chart velocity of the ambient Schrodinger flow d psi/dt = -i H psi.
  const Eigen::Vector2cd psi_dot = Complex(0.0, -1.0) * (hm * psi);
  const Complex w_dot = psi_dot[0] - w * psi_dot[1];

  // Hamiltonian vector field 2 Omega^{ab} d_b H with the Fubini-Study metric
  // g = 4|dw|^2 / (1+|w|^2)^2 and Kahler form of the same density.
  const double n2 = psi.squaredNorm();
  const double energy = psi.dot(hm * psi).real() / n2;
  const Eigen::Vector2cd centred = hm * psi - energy * psi;
  const Eigen::Vector2cd e1(Complex(1.0), Complex(0.0));
  const Eigen::Vector2cd e2(Complex(0.0, 1.0), Complex(0.0));
  const Eigen::Vector2d grad(2.0 * e1.dot(centred).real() / n2, 2.0 * e2.dot(centred).real() / n2);

  const double density = 4.0 / (n2 * n2);
  const Eigen::Matrix2d metric = density * Eigen::Matrix2d::Identity();
  Eigen::Matrix2d omega;
  omega << 0.0, density, -density, 0.0;
  const Eigen::Matrix2d metric_inv = metric.inverse();
  const Eigen::Matrix2d omega_up = metric_inv * omega * metric_inv;
  const Eigen::Vector2d velocity = 2.0 * omega_up * grad;

  return std::max(std::abs(velocity[0] - w_dot.real()), std::abs(velocity[1] - w_dot.imag()));
}

}  // namespace qreduce
