#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "rvr/errors.hpp"
#include "rvr/oracles.hpp"
#include "rvr/problems.hpp"

using namespace rvr;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Mat cols(std::initializer_list<Vec> vs) {
  Mat m(vs.begin()->size(), static_cast<Eigen::Index>(vs.size()));
  Eigen::Index j = 0;
  for (const auto& v : vs) m.col(j++) = v;
  return m;
}

// Central difference on the ambient coordinates of a Euclidean problem.
double fd_euclidean(const Problem& p, const Vec& x, const Vec& v, double h) {
  const Manifold& m = p.manifold();
  return (p.value(Point(m, x + h * v)) - p.value(Point(m, x - h * v))) / (2 * h);
}

}  // namespace

// ----------------------------------------------------------------- Rayleigh

TEST(Rayleigh, ValueWithIdentityCovariance) {
  const auto p = make_rayleigh(cols({v2(1, 0), v2(0, 1)}));
  EXPECT_DOUBLE_EQ(p->value(Point(p->manifold(), v2(1, 0))), -1.0);
  EXPECT_DOUBLE_EQ(p->value(Point(p->manifold(), v2(0.6, 0.8))), -1.0);
}

TEST(Rayleigh, SingleSampleOptimum) {
  const auto p = make_rayleigh(cols({v2(1, 0)}));
  ASSERT_TRUE(p->meta().f_star);
  EXPECT_DOUBLE_EQ(*p->meta().f_star, -1.0);
  EXPECT_NEAR(std::abs((*p->meta().x_star)[0]), 1.0, 1e-15);
  EXPECT_TRUE(p->meta().sign_symmetric_optimum);
  EXPECT_DOUBLE_EQ(p->meta().L, 3.0);
}

TEST(Rayleigh, DiagonalOptimum) {
  const auto p = make_rayleigh(cols({v2(2, 0), v2(0, 1)}));
  EXPECT_NEAR(*p->meta().f_star, -4.0, 1e-14);
  const Point x(p->manifold(), v2(-1, 0));
  EXPECT_NEAR(*p->dist_to_opt(x), 0.0, 1e-7);
}

TEST(Rayleigh, ComponentGradientOnCircle) {
  const auto p = make_rayleigh(cols({v2(1, 0)}));
  const double r = 1.0 / std::sqrt(2.0);
  const Point x(p->manifold(), v2(r, r));
  const TangentVector g = p->component_gradient(0, x);
  EXPECT_NEAR(g.coords()[0], -r, 1e-15);
  EXPECT_NEAR(g.coords()[1], r, 1e-15);
  TangentVector u = project_tangent(x, v2(-1, 1));
  u *= 1.0 / u.norm();
  const double fd = finite_diff_directional(
      [&](const Point& y) { return p->component_value(0, y); }, x, u, 1e-6);
  EXPECT_NEAR(fd, inner(x, g, u), 1e-8);
}

TEST(Rayleigh, OrthogonalSampleGivesZeroGradient) {
  const auto p = make_rayleigh(cols({v2(0, 3)}));
  EXPECT_EQ(p->component_gradient(0, Point(p->manifold(), v2(1, 0))).norm(), 0.0);
}

TEST(Rayleigh, ZeroGradientAtTopEigenvector) {
  const Mat Z = gaussian_samples(3, 7, 4);
  const auto p = make_rayleigh(Z);
  Eigen::SelfAdjointEigenSolver<Mat> es(Z * Z.transpose());
  const Point x(p->manifold(), es.eigenvectors().col(2));
  EXPECT_LE(p->exact_gradient(x).norm(), 1e-10 * es.eigenvalues()[2]);
  EXPECT_NEAR(*p->meta().f_star, -es.eigenvalues()[2], 1e-12 * es.eigenvalues()[2]);
}

TEST(Rayleigh, GradientMatchesFiniteDifferences) {
  const auto p = make_rayleigh(gaussian_samples(8, 30, 5));
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Point x = random_point(p->manifold(), rng);
    TangentVector v = random_tangent(x, rng);
    v *= 1.0 / v.norm();
    const TangentVector g = p->exact_gradient(x);
    EXPECT_NEAR(finite_diff_directional(*p, x, v, 1e-5), inner(x, g, v),
                1e-5 * std::max(1.0, g.norm()));
    EXPECT_TRUE(g.is_tangent(1e-10 * std::max(1.0, g.norm())));
  }
}

TEST(Rayleigh, LargeDimensionSkipsOptimum) {
  const auto p = make_rayleigh(gaussian_samples(65, 3, 1));
  EXPECT_FALSE(p->meta().f_star);
  EXPECT_FALSE(p->dist_to_opt(Point::normalized(p->manifold(), Vec::Ones(65))));
}

// ---------------------------------------------------------------- quadratic

TEST(Quadratic, IdenticalComponents) {
  const Vec b = v2(0.5, -2.0);
  const auto p = make_quadratic_from({{Mat::Identity(2, 2), b}, {Mat::Identity(2, 2), b}});
  EXPECT_EQ(*p->meta().x_star, b);
  EXPECT_EQ(*p->meta().f_star, 0.0);
  EXPECT_EQ(p->meta().mu, 1.0);
  EXPECT_EQ(p->meta().L, 1.0);
}

TEST(Quadratic, SingleComponentMeta) {
  Mat H = Mat::Zero(2, 2);
  H(0, 0) = 0.1;
  H(1, 1) = 1.0;
  const auto p = make_quadratic_from({{H, v2(1, 1)}});
  EXPECT_DOUBLE_EQ(p->meta().mu, 0.1);
  EXPECT_DOUBLE_EQ(p->meta().L, 1.0);
  const Point x(p->manifold(), v2(3, -1));
  EXPECT_EQ(p->value(x), p->component_value(0, x));
}

TEST(Quadratic, ComponentGradientIsShift) {
  const auto p = make_quadratic_from({{Mat::Identity(2, 2), v2(1, 2)}, {Mat::Identity(2, 2), v2(0, 0)}});
  const Point x(p->manifold(), v2(4, 4));
  EXPECT_EQ(p->component_gradient(0, x).coords(), v2(3, 2));
}

TEST(Quadratic, RandomInstanceConstants) {
  const auto p = make_quadratic(50, 20, 0.1, 1.0, 3);
  const auto& m = p->meta();
  EXPECT_EQ(m.mu, 0.1);
  EXPECT_EQ(m.L, 1.0);
  const Point xs(p->manifold(), *m.x_star);
  EXPECT_LE(p->exact_gradient(xs).norm(), 1e-12);
  EXPECT_NEAR(p->value(xs), *m.f_star, 1e-12);

  // Independent oracle: assemble the Hessians by differencing gradients.
  Mat Hbar = Mat::Zero(20, 20);
  const Point zero(p->manifold(), Vec::Zero(20));
  for (std::size_t i = 0; i < 50; ++i) {
    Mat Hi(20, 20);
    const Vec g0 = p->component_gradient(i, zero).coords();
    for (int j = 0; j < 20; ++j)
      Hi.col(j) = p->component_gradient(i, Point(p->manifold(), Vec::Unit(20, j))).coords() - g0;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Hi + Hi.transpose()));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-12);
    Hbar += Hi / 50.0;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Hbar + Hbar.transpose()));
  EXPECT_NEAR(es.eigenvalues().minCoeff(), 0.1, 1e-10);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-10);
  // x* solves Hbar x = -grad f(0) + Hbar 0.
  const Vec xs_oracle = Hbar.ldlt().solve(-p->exact_gradient(zero).coords());
  EXPECT_LE((xs_oracle - *m.x_star).norm(), 1e-10);
}

TEST(Quadratic, GradientMatchesFiniteDifferences) {
  const auto p = make_quadratic(10, 6, 0.2, 1.0, 9);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Point x = random_point(p->manifold(), rng);
    Vec v = random_tangent(x, rng).coords();
    v.normalize();
    EXPECT_NEAR(fd_euclidean(*p, x.coords(), v, 1e-5), p->exact_gradient(x).coords().dot(v), 1e-8);
  }
}

// ---------------------------------------------------------------- batches

TEST(Batch, FullBatchIsFullGradient) {
  const auto p = make_rayleigh(gaussian_samples(4, 6, 1));
  Rng rng(3);
  const Point x = random_point(p->manifold(), rng);
  EXPECT_EQ(p->minibatch_gradient(p->full_batch(), x).coords(), p->full_gradient(x).coords());
  Batch single;
  single.indices = {2};
  EXPECT_EQ(p->minibatch_gradient(single, x).coords(), p->component_gradient(2, x).coords());
}

TEST(Batch, IdenticalComponentsAnyBatch) {
  const Vec z = (Vec(3) << 1, 2, 2).finished();
  const auto p = make_rayleigh(cols({z, z, z}));
  Rng rng(4);
  const Point x = random_point(p->manifold(), rng);
  const Vec ref = p->component_gradient(0, x).coords();
  for (int t = 0; t < 10; ++t)
    EXPECT_LE((p->minibatch_gradient(p->sample_batch(2, rng), x).coords() - ref).norm(),
              1e-13 * ref.norm());
}

TEST(Batch, Validation) {
  const auto p = make_rayleigh(gaussian_samples(3, 4, 1));
  Batch empty;
  EXPECT_THROW(p->check_batch(empty), StructuralError);
  Batch out_of_range;
  out_of_range.indices = {4};
  EXPECT_THROW(p->check_batch(out_of_range), StructuralError);
  Batch dup;
  dup.indices = {1, 1};
  EXPECT_THROW(p->check_batch(dup), StructuralError);
  dup.replacement = true;
  EXPECT_NO_THROW(p->check_batch(dup));
}

TEST(Batch, EvaluationCounter) {
  const auto p = make_rayleigh(gaussian_samples(3, 5, 1));
  Rng rng(5);
  const Point x = random_point(p->manifold(), rng);
  p->reset_gradient_evaluations();
  p->full_gradient(x);
  p->component_gradient(0, x);
  p->minibatch_gradient(p->sample_batch(3, rng), x);
  p->exact_gradient(x);
  EXPECT_EQ(p->gradient_evaluations(), 9u);
}

TEST(Sampling, WithoutReplacementIsUniform) {
  Rng rng(6);
  std::vector<int> hits(10, 0);
  for (int t = 0; t < 20000; ++t) {
    const auto idx = sample_without_replacement(10, 3, rng);
    ASSERT_EQ(idx.size(), 3u);
    ASSERT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    ASSERT_TRUE(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    for (auto i : idx) ++hits[i];
  }
  // Each index appears with probability 3/10; binomial sd is about 65.
  for (int h : hits) EXPECT_NEAR(h, 6000, 400);
}

// ------------------------------------------------------------------ online

TEST(Online, SingleAtomHasZeroSigma) {
  const Vec z = (Vec(3) << 1, -1, 2).finished();
  const auto p = make_online(OnlineDistribution::uniform_atoms(cols({z})), 1);
  EXPECT_EQ(p->meta().sigma, 0.0);
  EXPECT_TRUE(p->is_online());
  EXPECT_THROW(p->n(), StructuralError);
  const auto fs = make_rayleigh(cols({z}));
  Rng rng(7);
  const Point x = random_point(p->manifold(), rng);
  EXPECT_NEAR(p->value(x), fs->value(x), 1e-14);
  EXPECT_LE((p->minibatch_gradient(p->sample_batch(4, rng), x) - fs->full_gradient(x)).norm(),
            1e-13);
}

TEST(Online, TwoAtomsMatchFiniteSum) {
  // The finite sum uses f_i = -n (z_i^T x)^2, so atoms carry a sqrt(n) factor.
  const Vec z1 = (Vec(3) << 1, 0, 2).finished(), z2 = (Vec(3) << 0, -1, 1).finished();
  const double s = std::sqrt(2.0);
  const auto on = make_online(OnlineDistribution::uniform_atoms(cols({s * z1, s * z2})), 1);
  const auto fs = make_rayleigh(cols({z1, z2}));
  Rng rng(8);
  const Point x = random_point(on->manifold(), rng);
  EXPECT_NEAR(on->value(x), fs->value(x), 1e-13);
  EXPECT_LE((on->exact_gradient(x) - fs->exact_gradient(x)).norm(), 1e-13);
  EXPECT_NEAR(*on->meta().f_star, *fs->meta().f_star, 1e-12);
}

TEST(Online, MonteCarloMeanMatchesExpectedGradient) {
  const auto p = make_online(OnlineDistribution::gaussian(Mat::Identity(2, 2)), 3);
  Rng rng(9);
  const Point x = Point::normalized(p->manifold(), v2(0.3, 1.0));
  const int N = 100000;
  Vec sum = Vec::Zero(2), sq = Vec::Zero(2);
  for (int t = 0; t < N; ++t) {
    const Vec g = p->minibatch_gradient(p->sample_batch(1, rng), x).coords();
    sum += g;
    sq += g.cwiseProduct(g);
  }
  const Vec mean = sum / N;
  const Vec se = ((sq / N - mean.cwiseProduct(mean)) / N).cwiseSqrt();
  const Vec exact = p->exact_gradient(x).coords();
  for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(mean[j] - exact[j]), 3 * se[j] + 1e-15);
}

TEST(Online, GradientMatchesFiniteDifferences) {
  Mat F = Mat::Identity(5, 5);
  F(0, 0) = 2.0;
  F(1, 0) = 0.5;
  const auto p = make_online(OnlineDistribution::gaussian(F), 4);
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const Point x = random_point(p->manifold(), rng);
    TangentVector v = random_tangent(x, rng);
    v *= 1.0 / v.norm();
    EXPECT_NEAR(finite_diff_directional(*p, x, v, 1e-5), inner(x, p->exact_gradient(x), v), 1e-5);
  }
}

// --------------------------------------------------------------------- CSV

TEST(SamplesCsv, LoadsRowsAsColumns) {
  const auto path = std::filesystem::temp_directory_path() / "rvr_samples_ok.csv";
  std::ofstream(path) << "1,2,3\n4,5,6\n";
  const Mat Z = load_samples_csv(path.string());
  ASSERT_EQ(Z.rows(), 3);
  ASSERT_EQ(Z.cols(), 2);
  EXPECT_EQ(Z(1, 0), 2.0);
  EXPECT_EQ(Z(2, 1), 6.0);
}

TEST(SamplesCsv, Errors) {
  EXPECT_THROW(load_samples_csv("/nonexistent/rvr.csv"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "rvr_samples_bad.csv";
  std::ofstream(path) << "1,2,3\n4,5\n";
  EXPECT_THROW(load_samples_csv(path.string()), StructuralError);
}
