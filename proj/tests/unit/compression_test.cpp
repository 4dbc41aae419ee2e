#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

#include "rvr/compression.hpp"
#include "rvr/errors.hpp"
#include "rvr/problems.hpp"

using namespace rvr;

namespace {

TangentVector at_origin(const Vec& v) {
  const Point x(Manifold::euclidean(static_cast<int>(v.size())), Vec::Zero(v.size()));
  return {x, v};
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double a : xs) v(i++) = a;
  return v;
}

}  // namespace

TEST(Compressor, Constants) {
  const auto id = Compressor::identity(7);
  EXPECT_EQ(id.omega(), 0.0);
  EXPECT_EQ(id.rho_q(), 7.0);
  const auto r = Compressor::randk(2, 8);
  EXPECT_EQ(r.omega(), 3.0);
  EXPECT_EQ(r.rho_q(), 2.0);
  EXPECT_EQ(Compressor::randk(5, 5).omega(), 0.0);
}

TEST(Compressor, ParseSpecs) {
  EXPECT_EQ(Compressor::parse("identity", 4).kind(), Compressor::Kind::identity);
  const auto r = Compressor::parse("randk:3", 10);
  EXPECT_EQ(r.kind(), Compressor::Kind::randk);
  EXPECT_EQ(r.k(), 3);
  EXPECT_EQ(r.describe(), "randk:3");
  for (const char* bad : {"randk:", "randk:x", "randk:3x", "topk:2", "randk:0", "randk:11"})
    EXPECT_THROW(Compressor::parse(bad, 10), ConfigError) << bad;
}

TEST(Compressor, KAboveDimensionRejected) {
  EXPECT_THROW(Compressor::randk(5, 4), ConfigError);
  EXPECT_THROW(Compressor::randk(0, 4), ConfigError);
}

TEST(Compress, IdentityReturnsInput) {
  Rng rng(1);
  const TangentVector v = at_origin(vec({1.5, -2, 0, 4}));
  EXPECT_EQ(Compressor::identity(4).compress(v, rng).coords(), v.coords());
}

TEST(Compress, RandKFullSelectionReturnsInput) {
  Rng rng(2);
  const TangentVector v = at_origin(vec({1.5, -2, 0.25, 4}));
  for (int t = 0; t < 10; ++t)
    EXPECT_EQ(Compressor::randk(4, 4).compress(v, rng).coords(), v.coords());
}

TEST(Compress, RandK1OnTwoCoordinates) {
  const auto op = Compressor::randk(1, 2);
  const TangentVector v = at_origin(vec({2, 4}));
  Rng rng(3);
  int first = 0;
  for (int t = 0; t < 4000; ++t) {
    const Vec q = op.compress(v, rng).coords();
    const bool a = q == vec({4, 0}), b = q == vec({0, 8});
    ASSERT_TRUE(a || b) << q.transpose();
    first += a;
  }
  EXPECT_NEAR(first / 4000.0, 0.5, 4 * 0.5 / std::sqrt(4000.0));

  const auto outs = op.enumerate(v);
  ASSERT_EQ(outs.size(), 2u);
  EXPECT_EQ(outs[0].first, 0.5);
  EXPECT_EQ(outs[0].second.coords(), vec({4, 0}));
  EXPECT_EQ(outs[1].second.coords(), vec({0, 8}));
}

TEST(Compress, RandKKeepsExactlyKDistinctCoordinates) {
  Rng rng(4);
  const auto op = Compressor::randk(3, 9);
  const TangentVector v = at_origin(Vec::LinSpaced(9, 1, 9));
  for (int t = 0; t < 200; ++t) {
    const auto msg = op.compress_message(v, rng);
    EXPECT_EQ(message_cost(msg), 3u);
    std::set<int> seen;
    for (const auto& [j, val] : msg.entries) {
      ASSERT_GE(j, 0);
      ASSERT_LT(j, 9);
      seen.insert(j);
      EXPECT_EQ(val, 3.0 * v.coords()(j));
    }
    EXPECT_EQ(seen.size(), 3u);
    EXPECT_EQ((msg.to_tangent().coords().array() != 0).count(), 3);
  }
}

TEST(Compress, DimensionMismatchIsStructural) {
  Rng rng(5);
  EXPECT_THROW(Compressor::randk(1, 3).compress(at_origin(vec({1, 2})), rng), StructuralError);
}

// Every k-subset by bitmask, independent of the library's enumerator.
TEST(RandKEnumeration, UnbiasedAndExactOmega) {
  Rng rng(6);
  for (int d = 1; d <= 6; ++d) {
    const Vec v = Vec::NullaryExpr(d, [&] { return std::normal_distribution<double>()(rng); });
    for (int k = 1; k <= d; ++k) {
      Vec mean = Vec::Zero(d);
      double err = 0.0;
      int count = 0;
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        if (std::popcount(mask) != k) continue;
        Vec q = Vec::Zero(d);
        for (int j = 0; j < d; ++j)
          if (mask >> j & 1u) q(j) = v(j) * d / k;
        mean += q;
        err += (q - v).squaredNorm();
        ++count;
      }
      mean /= count;
      err /= count;
      EXPECT_LE((mean - v).lpNorm<Eigen::Infinity>(), 1e-14 * v.lpNorm<Eigen::Infinity>());
      EXPECT_NEAR(err, (static_cast<double>(d) / k - 1.0) * v.squaredNorm(),
                  1e-13 * v.squaredNorm());

      const auto outs = Compressor::randk(k, d).enumerate(at_origin(v));
      ASSERT_EQ(static_cast<int>(outs.size()), count);
      Vec lib_mean = Vec::Zero(d);
      double mass = 0.0;
      for (const auto& [p, q] : outs) {
        lib_mean += p * q.coords();
        mass += p;
      }
      EXPECT_NEAR(mass, 1.0, 1e-14);
      EXPECT_LE((lib_mean - mean).lpNorm<Eigen::Infinity>(), 1e-13 * (1 + v.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST(RandKEnumeration, RefusesLargeInstances) {
  const TangentVector v = at_origin(Vec::Ones(40));
  EXPECT_THROW(Compressor::randk(20, 40).enumerate(v), RefusedError);
}

TEST(ConicVariance, Examples) {
  Rng rng(7);
  const TangentVector v = at_origin(vec({1, -2, 3, 0.5}));
  const auto id = verify_conic_variance(Compressor::identity(4), v, 10000, rng);
  EXPECT_EQ(id.empirical_omega, 0.0);
  EXPECT_TRUE(id.pass);
  const auto r1 = verify_conic_variance(Compressor::randk(1, 4), v, 20000, rng);
  EXPECT_TRUE(r1.pass);
  EXPECT_NEAR(r1.empirical_omega, 3.0, 0.1);
  const auto r2 = verify_conic_variance(Compressor::randk(2, 4), v, 20000, rng);
  EXPECT_TRUE(r2.pass);
  EXPECT_NEAR(r2.empirical_omega, 1.0, 0.05);
}

TEST(ConicVariance, ZeroVectorPassesVacuously) {
  Rng rng(8);
  const auto r = verify_conic_variance(Compressor::randk(1, 3), at_origin(Vec::Zero(3)), 10000, rng);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.empirical_omega, 0.0);
}

TEST(ConicVariance, TooFewTrialsRejected) {
  Rng rng(9);
  EXPECT_THROW(verify_conic_variance(Compressor::randk(1, 3), at_origin(Vec::Ones(3)), 9999, rng),
               ConfigError);
}

TEST(MessageCost, Examples) {
  Rng rng(10);
  EXPECT_EQ(message_cost(dense_message(at_origin(Vec::Ones(50)))), 50u);
  EXPECT_EQ(message_cost(Compressor::randk(3, 50).compress_message(at_origin(Vec::Ones(50)), rng)), 3u);
  // Zero values are still stored and charged.
  const auto zero = Compressor::randk(3, 50).compress_message(at_origin(Vec::Zero(50)), rng);
  EXPECT_EQ(message_cost(zero), 3u);
  EXPECT_EQ(message_cost(Compressor::identity(6).compress_message(at_origin(Vec::Zero(6)), rng)), 6u);
}

TEST(RhoQ, MeanNonzeroCountMatches) {
  Rng rng(11);
  const auto op = Compressor::randk(7, 30);
  const TangentVector v = at_origin(Vec::LinSpaced(30, 1, 30));
  double total = 0.0;
  for (int t = 0; t < 10000; ++t)
    total += static_cast<double>((op.compress(v, rng).coords().array() != 0).count());
  EXPECT_NEAR(total / 10000, op.rho_q(), 0.01 * op.rho_q());
}

TEST(RandK, MonteCarloLargeDimension) {
  Rng rng(12);
  const auto op = Compressor::randk(10, 100);
  const Vec v = Vec::NullaryExpr(100, [&] { return std::normal_distribution<double>()(rng); });
  const TangentVector tv = at_origin(v);
  Vec mean = Vec::Zero(100);
  double err = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const Vec q = op.compress(tv, rng).coords();
    mean += q;
    err += (q - v).squaredNorm();
  }
  mean /= trials;
  err /= trials;
  EXPECT_NEAR(err / v.squaredNorm(), 9.0, 0.02 * 9.0);
  // Per-coordinate standard error is |v_j| sqrt(9 / trials).
  for (int j = 0; j < 100; ++j)
    EXPECT_NEAR(mean(j), v(j), 5 * std::abs(v(j)) * std::sqrt(9.0 / trials) + 1e-12);
}
