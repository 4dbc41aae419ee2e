#include <gtest/gtest.h>

#include <cmath>

#include "rvr/errors.hpp"
#include "rvr/geometry.hpp"
#include "rvr/oracles.hpp"
#include "rvr/problems.hpp"

using namespace rvr;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

const Manifold S1 = Manifold::sphere(2);
const Manifold S2 = Manifold::sphere(3);
const Manifold R2 = Manifold::euclidean(2);

}  // namespace

TEST(Exp, EuclideanAddsVectors) {
  const Point x(R2, v2(1, 2));
  EXPECT_TRUE(exp(x, TangentVector(x, v2(3, -1))).coords().isApprox(v2(4, 1)));
}

TEST(Exp, QuarterTurnOnCircle) {
  const Point x(S1, v2(1, 0));
  const Point y = exp(x, TangentVector(x, v2(0, M_PI / 2)));
  EXPECT_NEAR(y.coords()[0], 0.0, 1e-15);
  EXPECT_NEAR(y.coords()[1], 1.0, 1e-15);
}

TEST(Exp, ZeroVectorIsIdentity) {
  for (const Manifold& m : {S2, Manifold::euclidean(3)}) {
    Rng rng(1);
    const Point x = random_point(m, rng);
    EXPECT_EQ(exp(x, TangentVector::zero(x)).coords(), x.coords());
  }
}

TEST(Exp, StaysOnSphereForLongSteps) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const Point x = random_point(S2, rng);
    const TangentVector v = 37.0 * random_tangent(x, rng);
    EXPECT_NEAR(exp(x, v).coords().norm(), 1.0, 1e-12);
  }
}

TEST(Exp, RejectsVectorFromOtherBase) {
  const Point x(S1, v2(1, 0)), y(S1, v2(0, 1));
  EXPECT_THROW(exp(x, TangentVector(y, v2(1, 0))), StructuralError);
}

TEST(Log, SelfIsZero) {
  const Point x(S2, v3(0, 0, 1));
  EXPECT_EQ(log(x, x).norm(), 0.0);
}

TEST(Log, QuarterTurnOnCircle) {
  const Point x(S1, v2(1, 0)), y(S1, v2(0, 1));
  const Vec v = log(x, y).coords();
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], M_PI / 2, 1e-15);
}

TEST(Log, EuclideanSubtracts) {
  const Point x(R2, v2(0, 0)), y(R2, v2(2, 3));
  EXPECT_EQ(log(x, y).coords(), v2(2, 3));
}

TEST(Log, AntipodalIsDomainError) {
  const Point x(S2, v3(1, 0, 0)), y(S2, v3(-1, 0, 0));
  EXPECT_THROW(log(x, y), DomainError);
}

TEST(Log, RoundTripWithExp) {
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const Point x = random_point(S2, rng);
    TangentVector v = random_tangent(x, rng);
    v *= std::uniform_real_distribution<double>(0.0, 3.0)(rng) / v.norm();
    EXPECT_LE((log(x, exp(x, v)) - v).norm(), 1e-8);
  }
}

TEST(Transport, IdentityWhenEndpointsAgree) {
  Rng rng(4);
  const Point x = random_point(S2, rng);
  const TangentVector v = random_tangent(x, rng);
  EXPECT_LE((transport(x, x, v).coords() - v.coords()).norm(), 1e-15);
}

TEST(Transport, EuclideanKeepsCoordinates) {
  const Point x(R2, v2(0, 0)), y(R2, v2(5, -1));
  EXPECT_EQ(transport(x, y, TangentVector(x, v2(1, 2))).coords(), v2(1, 2));
}

TEST(Transport, NormalToGeodesicPlaneIsFixed) {
  const Point x(S2, v3(1, 0, 0)), y(S2, v3(0, 1, 0));
  const Vec w = transport(x, y, TangentVector(x, v3(0, 0, 1))).coords();
  EXPECT_LE((w - v3(0, 0, 1)).norm(), 1e-15);
}

TEST(Transport, AlongGeodesicDirectionRotates) {
  // Velocity of the geodesic from e1 to e2 is e2 at x and -e1 at y.
  const Point x(S2, v3(1, 0, 0)), y(S2, v3(0, 1, 0));
  const Vec w = transport(x, y, TangentVector(x, v3(0, 1, 0))).coords();
  EXPECT_LE((w - v3(-1, 0, 0)).norm(), 1e-15);
}

TEST(Transport, IsometryAndTangency) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const Point x = random_point(Manifold::sphere(6), rng);
    const Point y = random_point(Manifold::sphere(6), rng);
    const TangentVector u = random_tangent(x, rng), w = random_tangent(x, rng);
    const TangentVector tu = transport(x, y, u), tw = transport(x, y, w);
    EXPECT_NEAR(inner(y, tu, tw), inner(x, u, w), 1e-10);
    EXPECT_TRUE(tu.is_tangent(1e-12));
  }
}

TEST(Inner, NormAndBilinearity) {
  const Point x(S2, v3(0, 0, 1));
  const TangentVector e(x, v3(1, 0, 0));
  EXPECT_EQ(inner(x, e, e), 1.0);
  EXPECT_EQ(inner(x, 2.0 * e, 3.0 * e), 6.0);
  EXPECT_EQ(inner(x, e, TangentVector(x, v3(0, 1, 0))), 0.0);
}

TEST(Dist, Examples) {
  EXPECT_NEAR(dist(Point(S1, v2(1, 0)), Point(S1, v2(0, 1))), M_PI / 2, 1e-15);
  EXPECT_EQ(dist(Point(R2, v2(0, 0)), Point(R2, v2(3, 4))), 5.0);
  const Point x(S2, v3(1, 0, 0));
  EXPECT_EQ(dist(x, x), 0.0);
  EXPECT_NEAR(dist(x, Point(S2, v3(-1, 0, 0))), M_PI, 1e-15);
}

TEST(Dist, TriangleInequalityOnSphere) {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const Point a = random_point(S2, rng), b = random_point(S2, rng), c = random_point(S2, rng);
    EXPECT_LE(dist(a, c), dist(a, b) + dist(b, c) + 1e-12);
  }
}

TEST(Project, Examples) {
  const Point x(S2, v3(1, 0, 0));
  EXPECT_EQ(project_tangent(x, v3(1, 1, 0)).coords(), v3(0, 1, 0));
  EXPECT_EQ(project_tangent(x, v3(3, 0, 0)).norm(), 0.0);
  EXPECT_EQ(project_tangent(x, v3(0, 2, -1)).coords(), v3(0, 2, -1));
}

TEST(Project, Idempotent) {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const Point x = random_point(S2, rng);
    const Vec u = Vec::NullaryExpr(3, [&] { return std::normal_distribution<double>()(rng); });
    const TangentVector p1 = project_tangent(x, u);
    EXPECT_LE((project_tangent(x, p1.coords()) - p1).norm(), 1e-15);
  }
}

TEST(Zeta, Examples) {
  EXPECT_EQ(zeta(0.5, 2.0), 1.0);
  EXPECT_NEAR(zeta(-1.0, 1e-9), 1.0, 1e-12);
  EXPECT_NEAR(zeta(-1.0, 1.0), 1.0 / std::tanh(1.0), 1e-15);
  EXPECT_NEAR(zeta(-1.0, 1.0), 1.3130352854993312, 1e-15);
}

TEST(GeometryMeta, Examples) {
  EXPECT_EQ(geometry_meta(S2, 1.0).zeta, 1.0);
  EXPECT_EQ(geometry_meta(Manifold::euclidean(4), 10.0).zeta, 1.0);
  EXPECT_NEAR(geometry_meta(Manifold::euclidean(4), 10.0, -1.0).zeta, 10.0 / std::tanh(10.0),
              1e-12);
}

TEST(Point, RejectsOffSphere) {
  EXPECT_THROW(Point(S1, v2(1, 1)), DomainError);
  EXPECT_THROW(Point(S1, v3(1, 0, 0)), StructuralError);
}

TEST(TrigBound, HoldsOnSphereTriangles) {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const Point x = random_point(S2, rng);
    TangentVector a = random_tangent(x, rng), b = random_tangent(x, rng);
    a *= std::uniform_real_distribution<double>(0.0, 1.2)(rng) / a.norm();
    b *= std::uniform_real_distribution<double>(0.0, 1.2)(rng) / b.norm();
    EXPECT_GE(trig_bound_margin(x, exp(x, a), exp(x, b), 1.0), -1e-9);
  }
}
