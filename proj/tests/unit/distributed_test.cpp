#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "rvr/distributed.hpp"
#include "rvr/errors.hpp"
#include "rvr/oracles.hpp"

using namespace rvr;

namespace {

std::vector<ProblemPtr> equal_workers(const ProblemPtr& parent, std::size_t w) {
  return make_worker_problems(parent, partition_shard_equal(parent->n(), w));
}

MarinaConfig mcfg(double eta, double p, std::uint64_t K, std::uint64_t seed = 0) {
  MarinaConfig c;
  c.eta = eta;
  c.p = p;
  c.K = K;
  c.seed = seed;
  c.keep_iterates = true;
  return c;
}

// Single-component workers with random PSD Hessians; L_i is known exactly.
struct SmallInstance {
  std::vector<ProblemPtr> workers;
  std::vector<double> L;
};

SmallInstance small_instance(int d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  SmallInstance s;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat A = Mat::NullaryExpr(d, d, [&] { return nd(rng); });
    const Mat H = A * A.transpose() / d + 0.1 * Mat::Identity(d, d);
    const Vec b = Vec::NullaryExpr(d, [&] { return nd(rng); });
    s.workers.push_back(make_quadratic_from({{H, b}}));
    s.L.push_back(Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().maxCoeff());
  }
  return s;
}

}  // namespace

// ------------------------------------------------------------- defaults

TEST(MarinaDefaults, Stepsize) {
  EXPECT_EQ(default_stepsize_marina(2.0, 0.3, 0.0, 5), 0.5);
  EXPECT_EQ(default_stepsize_marina(1.0, 0.5, 4.0, 4), 0.5);
  const double eta = default_stepsize_marina(1.0, 1.0 / 11, 10.0, 10);
  EXPECT_NEAR(eta, 1.0 / (1.0 + std::sqrt(10.0)), 1e-15);
  EXPECT_NEAR(eta, 0.2403, 5e-5);
  EXPECT_THROW(default_stepsize_marina(1.0, 0.0, 1.0, 1), ConfigError);
  EXPECT_THROW(default_stepsize_marina(-1.0, 0.5, 1.0, 1), ConfigError);
}

TEST(MarinaDefaults, StepsizePl) {
  // omega = 0 and p = 1 leave min(1/L, 1/(2 mu)).
  EXPECT_EQ(default_stepsize_marina_pl(2.0, 1.0, 0.0, 3, 0.1), 0.5);
  EXPECT_EQ(default_stepsize_marina_pl(1.0, 1.0, 0.0, 3, 2.0), 0.25);
  EXPECT_NEAR(default_stepsize_marina_pl(1.0, 0.5, 4.0, 4, 0.01),
              1.0 / (1.0 + std::sqrt(2.0)), 1e-15);
  EXPECT_THROW(default_stepsize_marina_pl(1.0, 0.5, 1.0, 1, 0.0), ConfigError);
}

TEST(MarinaDefaults, P) {
  EXPECT_EQ(default_p_marina(20, 20), 1.0);
  EXPECT_EQ(default_p_marina(Compressor::randk(1, 10).rho_q(), 10), 0.1);
  EXPECT_EQ(default_p_marina(Compressor::randk(5, 50).rho_q(), 50), 0.1);
  EXPECT_THROW(default_p_marina(0.0, 5), ConfigError);
  EXPECT_THROW(default_p_marina(6.0, 5), ConfigError);
}

TEST(MarinaDefaults, ExpectedComm) {
  EXPECT_EQ(expected_comm_per_round(1.0, 3, 17), 17.0);
  EXPECT_EQ(expected_comm_per_round(0.5, 2, 10), 6.0);
  for (int d : {10, 50}) {
    for (double rho : {1.0, 3.0, 7.0}) {
      const double e = expected_comm_per_round(rho / d, rho, d);
      EXPECT_NEAR(e, rho * (2.0 - rho / d), 1e-12);
      EXPECT_LE(e, 2.0 * rho);
    }
  }
}

// ---------------------------------------------------------- partitioning

TEST(Partition, ShardEqualSizes) {
  const auto s = partition_shard_equal(10, 3);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(s[1], (std::vector<std::size_t>{4, 5, 6}));
  EXPECT_EQ(s[2], (std::vector<std::size_t>{7, 8, 9}));
  EXPECT_THROW(partition_shard_equal(3, 4), ConfigError);
  EXPECT_THROW(partition_shard_equal(3, 0), ConfigError);
}

TEST(Partition, DirichletCoversEveryIndexOnce) {
  for (double alpha : {0.05, 1.0, 50.0}) {
    const auto s = partition("shard-dirichlet:" + std::to_string(alpha), 40, 7, 3);
    ASSERT_EQ(s.size(), 7u);
    std::multiset<std::size_t> all;
    for (const auto& shard : s) {
      EXPECT_FALSE(shard.empty());
      all.insert(shard.begin(), shard.end());
    }
    EXPECT_EQ(all.size(), 40u);
    EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), 40u);
  }
  EXPECT_EQ(partition("shard-dirichlet:0.5", 40, 7, 3), partition("shard-dirichlet:0.5", 40, 7, 3));
}

TEST(Partition, BadSpecs) {
  for (const char* bad : {"shard-dirichlet:", "shard-dirichlet:-1", "shard-dirichlet:1x", "random"})
    EXPECT_THROW(partition(bad, 10, 2, 0), ConfigError) << bad;
}

// --------------------------------------------------------- worker mean

TEST(WorkerMean, ValueAndGradientAreMeans) {
  const auto q = make_quadratic(12, 5, 0.1, 1.0, 4);
  const auto workers = equal_workers(q, 4);
  const WorkerMeanProblem mean(workers);
  EXPECT_EQ(mean.n(), 4u);
  Rng rng(1);
  const Point x = random_point(q->manifold(), rng);
  EXPECT_NEAR(mean.value(x), q->value(x), 1e-12);
  EXPECT_LE((mean.exact_gradient(x) - q->exact_gradient(x)).norm(), 1e-12);
}

TEST(WorkerMean, RejectsMixedManifolds) {
  const auto a = make_quadratic(2, 3, 0.1, 1.0, 1);
  const auto b = make_rayleigh(gaussian_samples(3, 2, 1));
  EXPECT_THROW(WorkerMeanProblem({a, b}), ConfigError);
  EXPECT_THROW(WorkerMeanProblem({}), ConfigError);
}

// ------------------------------------------------------------------ runs

TEST(Marina, IdentityCompressorMatchesGradientDescent) {
  const auto q = make_quadratic(16, 6, 0.1, 1.0, 5);
  const auto workers = equal_workers(q, 4);
  const WorkerMeanProblem global(workers);
  Rng rng(2);
  const Point x0 = random_point(q->manifold(), rng);
  const auto m = rmarina_run(workers, x0, Compressor::identity(6), mcfg(0.5, 0.2, 200, 3));
  OptimizerConfig c;
  c.eta = 0.5;
  c.K = 200;
  c.keep_iterates = true;
  const auto g = rgd_run(global, x0, c);
  ASSERT_EQ(m.iterates.size(), g.iterates.size());
  for (std::size_t k = 0; k < m.iterates.size(); ++k)
    EXPECT_LE((m.iterates[k] - g.iterates[k]).lpNorm<Eigen::Infinity>(), 1e-12) << k;
}

TEST(Marina, IdentityOnSphereMatchesGradientDescent) {
  const auto r = make_rayleigh(gaussian_samples(5, 12, 6));
  const auto workers = equal_workers(r, 3);
  const WorkerMeanProblem global(workers);
  Rng rng(3);
  const Point x0 = random_point(r->manifold(), rng);
  const double eta = 0.5 / r->meta().L;
  const auto m = rmarina_run(workers, x0, Compressor::identity(5), mcfg(eta, 0.3, 100));
  OptimizerConfig c;
  c.eta = eta;
  c.K = 100;
  c.keep_iterates = true;
  const auto g = rgd_run(global, x0, c);
  for (std::size_t k = 0; k < m.iterates.size(); ++k)
    EXPECT_LE((m.iterates[k] - g.iterates[k]).lpNorm<Eigen::Infinity>(), 1e-10) << k;
}

TEST(Marina, DenseRoundsChargeDPerWorker) {
  const auto q = make_quadratic(10, 7, 0.1, 1.0, 6);
  const auto workers = equal_workers(q, 5);
  Rng rng(4);
  const Point x0 = random_point(q->manifold(), rng);
  CommLedger ledger;
  const auto t = rmarina_run(workers, x0, Compressor::randk(2, 7), mcfg(0.3, 1.0, 40), &ledger);
  EXPECT_EQ(ledger.rounds, 40u);
  for (auto c : ledger.per_worker) EXPECT_EQ(c, 7u * 41u);
  EXPECT_EQ(ledger.mean_per_worker_per_round(), 7.0);
  EXPECT_EQ(t.total_comm_coords, 7u * 5u * 41u);
  for (std::size_t k = 1; k < t.records.size(); ++k)
    EXPECT_EQ(*t.records[k].comm_coords - *t.records[k - 1].comm_coords, 7u * 5u);
}

TEST(Marina, LedgerMatchesTraceTotals) {
  const auto q = make_quadratic(12, 9, 0.1, 1.0, 7);
  const auto workers = equal_workers(q, 3);
  Rng rng(5);
  const Point x0 = random_point(q->manifold(), rng);
  CommLedger ledger;
  const auto t = rmarina_run(workers, x0, Compressor::randk(2, 9), mcfg(0.2, 0.25, 300, 1), &ledger);
  EXPECT_EQ(ledger.total(), t.total_comm_coords);
  EXPECT_EQ(*t.records.back().comm_coords, t.total_comm_coords);
  EXPECT_EQ(ledger.initial_per_worker, 9u);
  // Every per-round cost is either 2 or 9 per worker, and all workers agree.
  EXPECT_EQ(ledger.per_worker[0], ledger.per_worker[1]);
  EXPECT_EQ(ledger.per_worker[1], ledger.per_worker[2]);
  const std::uint64_t traffic = ledger.per_worker[0] - 9;
  const std::uint64_t dense = (traffic - 2 * 300) / 7;
  EXPECT_EQ(dense * 9 + (300 - dense) * 2, traffic);
}

TEST(Marina, LedgerMeanConverges) {
  const auto q = make_quadratic(4, 20, 0.1, 1.0, 8);
  const auto workers = equal_workers(q, 4);
  Rng rng(6);
  const Point x0 = random_point(q->manifold(), rng);
  const auto op = Compressor::randk(2, 20);
  const double p = default_p_marina(op.rho_q(), 20);
  CommLedger ledger;
  MarinaConfig c = mcfg(0.1, p, 10000, 2);
  c.keep_iterates = false;
  c.trace_stride = 1000;
  rmarina_run(workers, x0, op, c, &ledger);
  const double expect = expected_comm_per_round(p, op.rho_q(), 20);
  EXPECT_NEAR(ledger.mean_per_worker_per_round(), expect, 0.02 * expect);
}

TEST(Marina, Deterministic) {
  const auto q = make_quadratic(8, 6, 0.1, 1.0, 9);
  const auto workers = equal_workers(q, 4);
  Rng rng(7);
  const Point x0 = random_point(q->manifold(), rng);
  const auto a = rmarina_run(workers, x0, Compressor::randk(1, 6), mcfg(0.2, 0.2, 100, 11));
  const auto b = rmarina_run(workers, x0, Compressor::randk(1, 6), mcfg(0.2, 0.2, 100, 11));
  const auto c = rmarina_run(workers, x0, Compressor::randk(1, 6), mcfg(0.2, 0.2, 100, 12));
  EXPECT_EQ(a.iterates, b.iterates);
  EXPECT_NE(a.iterates, c.iterates);
}

TEST(Marina, InvalidConfigs) {
  const auto q = make_quadratic(4, 3, 0.1, 1.0, 1);
  const auto workers = equal_workers(q, 2);
  Rng rng(8);
  const Point x0 = random_point(q->manifold(), rng);
  EXPECT_THROW(rmarina_run(workers, x0, Compressor::identity(3), mcfg(0.0, 0.5, 1)), ConfigError);
  EXPECT_THROW(rmarina_run(workers, x0, Compressor::identity(3), mcfg(0.1, 0.0, 1)), ConfigError);
  EXPECT_THROW(rmarina_run(workers, x0, Compressor::identity(4), mcfg(0.1, 0.5, 1)), ConfigError);
  const Point s(Manifold::sphere(3), Vec::Unit(3, 0));
  EXPECT_THROW(rmarina_run(workers, s, Compressor::identity(3), mcfg(0.1, 0.5, 1)), ConfigError);
  // PL mode without f*.
  const WorkerMeanProblem unknown(workers);
  EXPECT_THROW(rmarina_run_pl(workers, x0, Compressor::identity(3), mcfg(0.1, 0.5, 1), unknown),
               ConfigError);
}

TEST(MarinaPl, InitialLyapunovIsDelta0) {
  const auto q = make_quadratic(8, 5, 0.1, 1.0, 10);
  const auto workers = equal_workers(q, 4);
  const WorkerMeanProblem global(workers, q->meta().f_star, q->meta().x_star, false, 0.1);
  Rng rng(9);
  const Point x0 = random_point(q->manifold(), rng);
  const auto t = rmarina_run_pl(workers, x0, Compressor::randk(1, 5), mcfg(0.1, 0.2, 0), global);
  ASSERT_EQ(t.records.size(), 1u);
  const double delta0 = q->value(x0) - *q->meta().f_star;
  EXPECT_NEAR(*t.records[0].lyapunov, delta0, 1e-14 * std::max(1.0, delta0));
  EXPECT_NEAR(t.delta0, delta0, 1e-12 * std::max(1.0, delta0));
  EXPECT_EQ(t.lyapunov_kind, "marina-pl");
}

TEST(MarinaPl, DenseIdentityIsGradientDescent) {
  const auto q = make_quadratic(8, 5, 0.1, 1.0, 11);
  const auto workers = equal_workers(q, 2);
  const WorkerMeanProblem global(workers, q->meta().f_star, q->meta().x_star, false, 0.1);
  Rng rng(10);
  const Point x0 = random_point(q->manifold(), rng);
  const double eta = default_stepsize_marina_pl(1.0, 1.0, 0.0, 2, 0.1);
  EXPECT_EQ(eta, 1.0);
  const auto m = rmarina_run_pl(workers, x0, Compressor::identity(5), mcfg(eta, 1.0, 50), global);
  OptimizerConfig c;
  c.eta = eta;
  c.K = 50;
  c.keep_iterates = true;
  const auto g = rgd_run(global, x0, c);
  for (std::size_t k = 0; k < m.iterates.size(); ++k)
    EXPECT_LE((m.iterates[k] - g.iterates[k]).lpNorm<Eigen::Infinity>(), 1e-12);
  // g stays exact, so the Lyapunov value is the function gap.
  for (const auto& r : m.records)
    EXPECT_NEAR(*r.lyapunov, r.f_value - *q->meta().f_star, 1e-12);
}

// ------------------------------------------------------------ enumeration

TEST(MarinaEnumeration, SingleWorkerMeanIsGradient) {
  const auto s = small_instance(4, 1, 12);
  Rng rng(11);
  const Point x = random_point(s.workers[0]->manifold(), rng);
  const Point y = exp(x, 0.3 * random_tangent(x, rng));
  const std::vector<TangentVector> g = {s.workers[0]->exact_gradient(x)};
  for (int k = 1; k <= 4; ++k) {
    for (double p : {0.0, 0.25, 1.0}) {
      const auto outs = enumerate_marina(s.workers, x, y, g, Compressor::randk(k, 4), p);
      EXPECT_NEAR(total_probability(outs), 1.0, 1e-14);
      const Vec mean = brute_force_mean(outs).coords();
      EXPECT_LE((mean - s.workers[0]->exact_gradient(y).coords()).norm(), 1e-12);
    }
  }
}

TEST(MarinaEnumeration, RecursionBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed % 3;
    const int d = 2 + static_cast<int>(seed % 3);
    const auto s = small_instance(d, n, 100 + seed);
    const double L = *std::max_element(s.L.begin(), s.L.end());
    Rng rng(seed);
    const Point x = random_point(s.workers[0]->manifold(), rng);
    const Point y = exp(x, random_tangent(x, rng));
    std::vector<TangentVector> g;
    Vec gmean = Vec::Zero(d);
    for (const auto& w : s.workers) {
      g.push_back(w->exact_gradient(x) + 0.5 * random_tangent(x, rng));
      gmean += g.back().coords() / static_cast<double>(n);
    }
    const WorkerMeanProblem f(s.workers);
    const auto op = Compressor::randk(1, d);
    for (double p : {0.1, 0.5, 0.9}) {
      const auto outs = enumerate_marina(s.workers, x, y, g, op, p);
      const double lhs = expected_squared_error(outs, f.exact_gradient(y));
      const double rhs = (1 - p) * op.omega() * L * L / n * (y.coords() - x.coords()).squaredNorm() +
                         (1 - p) * (gmean - f.exact_gradient(x).coords()).squaredNorm();
      EXPECT_LE(lhs, rhs + 1e-9) << "seed " << seed << " p " << p;
    }
  }
}

TEST(MarinaEnumeration, RefusesLargeProducts) {
  const auto s = small_instance(8, 3, 13);
  Rng rng(12);
  const Point x = random_point(s.workers[0]->manifold(), rng);
  std::vector<TangentVector> g;
  for (const auto& w : s.workers) g.push_back(w->exact_gradient(x));
  EXPECT_THROW(enumerate_marina(s.workers, x, x, g, Compressor::randk(4, 8), 0.5), RefusedError);
}
