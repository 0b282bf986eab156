#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qreduce/epr.hpp"
#include "qreduce/projective.hpp"
#include "test_support.hpp"

namespace qreduce {
namespace {

constexpr double kPi = std::numbers::pi;

ProjectivePoint random_point(std::mt19937_64& rng, Eigen::Index n) {
  return ProjectivePoint(testing::random_state(rng, n));
}

TEST(TransitionProbability, Examples) {
  const ProjectivePoint x{1.0, 2.0, Complex(0.0, 1.0)};
  EXPECT_NEAR(transition_probability(x, x), 1.0, 1e-15);
  EXPECT_EQ(transition_probability(ProjectivePoint{1.0, 0.0}, ProjectivePoint{0.0, 1.0}), 0.0);
  const ProjectivePoint singlet(singlet_state());
  EXPECT_NEAR(transition_probability(singlet, ProjectivePoint{0.0, 0.0, 0.0, 1.0}), 0.5, 1e-15);
}

TEST(TransitionProbability, ZeroPointRejected) {
  EXPECT_THROW(ProjectivePoint(StateVector::Zero(3)), DomainError);
  const StateVector z = StateVector::Zero(2), e = StateVector::Unit(2, 0);
  EXPECT_THROW(transition_probability(z, e), DomainError);
}

TEST(FsDistance, Examples) {
  const ProjectivePoint x{1.0, Complex(0.5, 0.5)};
  EXPECT_NEAR(fs_distance(x, x), 0.0, 1e-7);
  EXPECT_NEAR(fs_distance(ProjectivePoint{1.0, 0.0, 0.0}, ProjectivePoint{0.0, 0.0, 1.0}), kPi, 1e-15);
  EXPECT_NEAR(fs_distance(ProjectivePoint{1.0, 0.0}, ProjectivePoint{1.0, 1.0}), kPi / 2.0, 1e-15);
}

TEST(Chart, Examples) {
  const ChartCoordinates a = to_chart(ProjectivePoint{0.0, 1.0}, 2);
  ASSERT_EQ(a.affine.size(), 1);
  EXPECT_EQ(a.affine[0], Complex(0.0));
  EXPECT_NEAR(std::abs(to_chart(ProjectivePoint{1.0, 1.0}, 2).affine[0] - 1.0), 0.0, 1e-15);
  const ChartCoordinates s = to_chart(ProjectivePoint(singlet_state()), 1);
  ASSERT_EQ(s.affine.size(), 3);
  EXPECT_NEAR(std::abs(s.affine[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.affine[1]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.affine[2] - (-1.0)), 0.0, 1e-15);
}

TEST(Chart, OutsideDomainNamesIndex) {
  try {
    to_chart(ProjectivePoint{1.0, 0.0, 2.0}, 2);
    FAIL() << "expected ChartDomainError";
  } catch (const ChartDomainError& e) {
    EXPECT_EQ(e.chart_index(), 2);
  }
  EXPECT_THROW(to_chart(ProjectivePoint{1.0, 1.0}, 3), ChartDomainError);
  EXPECT_THROW(to_chart(ProjectivePoint{1.0, 1.0}, 0), ChartDomainError);
}

TEST(Segre, Examples) {
  using V = Eigen::Vector2cd;
  EXPECT_TRUE(segre_embed(V(1, 0), V(1, 0)) == (ProjectivePoint{0.0, 1.0, 0.0, 0.0}));
  EXPECT_TRUE(segre_embed(V(0, 1), V(0, 1)) == (ProjectivePoint{0.0, 0.0, 1.0, 0.0}));
  const ProjectivePoint p = segre_embed(V(1, 1), V(1, -1));
  EXPECT_TRUE(p == (ProjectivePoint{-1.0, 1.0, -1.0, 1.0}));
  EXPECT_EQ(quadric_residual(p), 0.0);
  EXPECT_THROW(segre_embed(V(0, 0), V(1, 0)), DomainError);
}

TEST(Segre, MatchesTensorProductUnderBasisOrder) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Vector2cd a = testing::random_state(rng, 2), b = testing::random_state(rng, 2);
    // Kronecker product in the (uu, ud, du, dd) order, permuted to (ud, uu, dd, du).
    StateVector kron(4);
    kron << a[0] * b[1], a[0] * b[0], a[1] * b[1], a[1] * b[0];
    EXPECT_TRUE(segre_embed(a, b) == ProjectivePoint(kron));
  }
}

TEST(QuadricResidual, Examples) {
  EXPECT_NEAR(quadric_residual(ProjectivePoint(singlet_state())), 1.0, 1e-15);
  EXPECT_NEAR(quadric_residual(ProjectivePoint{1.0, 0.0, 0.0, 1.0}), 1.0, 1e-15);
}

TEST(IsDisentangled, Examples) {
  EXPECT_TRUE(is_disentangled(ProjectivePoint{1.0, 0.0, 0.0, 0.0}, 1e-9));
  EXPECT_FALSE(is_disentangled(ProjectivePoint(singlet_state()), 1e-9));
  EXPECT_TRUE(is_disentangled(ProjectivePoint{1.0, 1e-6, 0.0, 0.0}, 1e-9));
  EXPECT_THROW(is_disentangled(ProjectivePoint{1.0, 0.0, 0.0, 0.0}, 0.0), ValidationError);
}

TEST(NamedPoints, Relations) {
  const auto p = named_points<Complex>();
  auto pt = [](const Eigen::Vector4cd& v) { return ProjectivePoint(StateVector(v)); };
  EXPECT_EQ(transition_probability(pt(p.singlet), pt(p.triplet0)), 0.0);
  EXPECT_EQ(transition_probability(pt(p.up_up), pt(p.down_down)), 0.0);
  for (const auto& v : {p.up_up, p.down_down, p.up_down, p.down_up}) EXPECT_EQ(quadric_residual(pt(v)), 0.0);
  // Conic {x = w, x^2 = yz}.
  for (const auto& v : {p.up_up, p.down_down}) {
    EXPECT_EQ(v[0], v[3]);
    EXPECT_EQ(v[0] * v[0], v[1] * v[2]);
  }
  // Line (mu+nu : 0 : 0 : mu-nu) meets Q only at mu = +-nu: the residual of
  // the line point is |mu^2 - nu^2| scaled, zero exactly at the two product points.
  for (double t = -3.0; t <= 3.0; t += 0.25) {
    const double mu = t, nu = 1.0;
    const ProjectivePoint q{mu + nu, 0.0, 0.0, mu - nu};
    const double expected = 2.0 * std::abs(mu * mu - nu * nu) / (2.0 * (mu * mu + nu * nu));
    EXPECT_NEAR(quadric_residual(q), expected, 1e-15);
  }
  EXPECT_TRUE((ProjectivePoint{2.0, 0.0, 0.0, 0.0}) == pt(p.up_down));
  EXPECT_TRUE((ProjectivePoint{0.0, 0.0, 0.0, -2.0}) == pt(p.down_up));
}

TEST(Geometry, TangentIntersectionAndSelftest) {
  EXPECT_TRUE(tangent_intersection_check());
  const auto checks = geometry_selftest();
  EXPECT_GE(checks.size(), 10u);
  bool saw_line = false, saw_conic = false;
  for (const auto& c : checks) {
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    saw_line = saw_line || c.name.find("mu = +-nu") != std::string::npos;
    saw_conic = saw_conic || c.name.find("on conic") != std::string::npos;
  }
  EXPECT_TRUE(saw_line);
  EXPECT_TRUE(saw_conic);
}

TEST(FlowCheck, Examples) {
  const Observable id(Matrix::Identity(2, 2));
  EXPECT_LT(fs_flow_check_cp1(id, ProjectivePoint{0.3, 1.0}), 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d(1, 1) = 1.0;
  const Observable h(d);
  EXPECT_LT(fs_flow_check_cp1(h, ProjectivePoint{1.0, 1.0}), 1e-8);
  EXPECT_LT(fs_flow_check_cp1(h, ProjectivePoint{0.0, 1.0}), 1e-15);
  EXPECT_THROW(fs_flow_check_cp1(h, ProjectivePoint{1.0, 0.0}), ChartDomainError);
}

// Properties.

TEST(ProjectiveProperty, CosineSquaredRelation) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = 1 + rep % 8;
    const ProjectivePoint x = random_point(rng, n), y = random_point(rng, n);
    const double c = std::cos(fs_distance(x, y) / 2.0);
    EXPECT_NEAR(c * c, transition_probability(x, y), 1e-12);
  }
}

TEST(ProjectiveProperty, TriangleInequality) {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = 2 + rep % 7;
    const ProjectivePoint a = random_point(rng, n), b = random_point(rng, n), c = random_point(rng, n);
    EXPECT_LE(fs_distance(a, c), fs_distance(a, b) + fs_distance(b, c) + 1e-12);
  }
}

TEST(ProjectiveProperty, RepresentativeIndependence) {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 1 + rep % 8;
    const StateVector x = testing::random_state(rng, n), y = testing::random_state(rng, n);
    const ProjectivePoint px(x), py(y);
    const ProjectivePoint sx(StateVector(testing::random_scalar(rng) * x));
    const ProjectivePoint sy(StateVector(testing::random_scalar(rng) * y));
    EXPECT_NEAR(transition_probability(px, py), transition_probability(sx, sy), 1e-12);
    EXPECT_NEAR(fs_distance(px, py), fs_distance(sx, sy), 1e-12);
    EXPECT_NEAR(transition_probability(x, y).real(), transition_probability(px, py), 1e-12);
    EXPECT_NEAR(transition_probability(px, py), transition_probability(py, px), 1e-15);
  }
}

TEST(ProjectiveProperty, ChartRoundTrip) {
  std::mt19937_64 rng(34);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 2 + rep % 7;
    const ProjectivePoint p = random_point(rng, n);
    const int chart = 1 + rep % static_cast<int>(n);
    const ChartCoordinates c = to_chart(p, chart);
    EXPECT_EQ(c.real_coordinates().size(), 2 * (n - 1));
    EXPECT_TRUE(from_chart(c) == p);
    const ChartCoordinates again = to_chart(from_chart(c), chart);
    EXPECT_LE((again.affine - c.affine).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + c.affine.cwiseAbs().maxCoeff()));
  }
}

TEST(ProjectiveProperty, SegreImagesOnQuadric) {
  std::mt19937_64 rng(35);
  for (int rep = 0; rep < 300; ++rep) {
    const ProjectivePoint p = segre_embed(testing::random_state(rng, 2), testing::random_state(rng, 2));
    EXPECT_LT(quadric_residual(p), 1e-12);
  }
}

TEST(ProjectiveProperty, ResidualInvariantUnderLocalUnitaries) {
  std::mt19937_64 rng(36);
  auto random_unitary = [&] {
    Eigen::Matrix2cd a = testing::random_hermitian(rng, 2);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(Complex(0.0, 1.0) * a);
    return Eigen::Matrix2cd(es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                            es.eigenvectors().inverse());
  };
  for (int rep = 0; rep < 200; ++rep) {
    const StateVector psi = testing::random_state(rng, 4);
    // Amplitude matrix M[i][j] of v_i (x) v_j; local unitaries act as U1 M U2^T.
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = psi[two_qubit::index(i, j)];
    const Eigen::Matrix2cd u1 = random_unitary(), u2 = random_unitary();
    const Eigen::Matrix2cd mm = u1 * m * u2.transpose();
    StateVector rotated(4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) rotated[two_qubit::index(i, j)] = mm(i, j);
    EXPECT_NEAR(quadric_residual(psi), quadric_residual(rotated), 1e-10);
  }
}

TEST(ProjectiveProperty, ZeroResidualMeansRankOne) {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 200; ++rep) {
    StateVector psi;
    if (rep % 2 == 0) {
      psi = segre_embed(testing::random_state(rng, 2), testing::random_state(rng, 2)).coordinates();
    } else {
      psi = testing::random_state(rng, 4);
    }
    Eigen::Matrix2cd amp;
    amp << psi[1], psi[0], psi[3], psi[2];  // [[y, x], [w, z]]
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(amp);
    const bool rank_one = svd.singularValues()[1] < 1e-10 * svd.singularValues()[0];
    if (quadric_residual(psi) < 1e-12) EXPECT_TRUE(rank_one);
    if (rep % 2 == 1) EXPECT_FALSE(rank_one);
  }
}

TEST(ProjectiveProperty, FlowCheckRandom) {
  std::mt19937_64 rng(38);
  for (int rep = 0; rep < 100; ++rep) {
    const Observable h(testing::random_hermitian(rng, 2, 3.0));
    StateVector p = testing::random_state(rng, 2);
    EXPECT_LT(fs_flow_check_cp1(h, ProjectivePoint(p)), 1e-8);
  }
}

}  // namespace
}  // namespace qreduce
