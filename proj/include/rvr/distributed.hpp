#ifndef RVR_DISTRIBUTED_HPP
#define RVR_DISTRIBUTED_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rvr/compression.hpp"
#include "rvr/optimizers.hpp"
#include "rvr/problems.hpp"

namespace rvr {

/// Objective f = (1/n) sum_i f_i with one f_i per worker. Component i is the
/// whole local objective of worker i. Used for metrics and stepsize defaults.
class WorkerMeanProblem final : public Problem {
 public:
  /// f_star / x_star are passed through when the caller knows them (for
  /// example equal shards of a problem with a known optimum), as is the
  /// strong convexity / PL constant mu.
  WorkerMeanProblem(std::vector<ProblemPtr> workers,
                    std::optional<double> f_star = std::nullopt,
                    std::optional<Vec> x_star = std::nullopt,
                    bool sign_symmetric = false, double mu = 0.0);
  const std::vector<ProblemPtr>& workers() const { return workers_; }

 protected:
  double do_component_value(std::size_t i, const Point& x) const override;
  Vec do_component_ambient_gradient(std::size_t i,
                                    const Point& x) const override;

 private:
  std::vector<ProblemPtr> workers_;
};

struct MarinaConfig {
  double eta = 0.0;
  double p = 1.0;
  std::uint64_t K = 0;
  std::uint64_t seed = 0;
  std::uint64_t trace_stride = 1;
  bool keep_iterates = false;
};

/// Coordinates received from each worker. The initial dense g^0 upload is
/// kept apart from the per-round traffic.
struct CommLedger {
  std::vector<std::uint64_t> per_worker;
  std::uint64_t initial_per_worker = 0;
  std::uint64_t rounds = 0;

  std::uint64_t total() const;
  /// Mean coordinates per worker per round, excluding the initial upload.
  double mean_per_worker_per_round() const;
};

/// Runs R-MARINA over the worker objectives. One coin per round is shared by
/// all workers. Every worker draws its compressor randomness from its own
/// stream. On the sphere the server re-projects the averaged estimator onto
/// the tangent space. `global` supplies metrics and must have the workers'
/// manifold; it defaults to their plain mean.
RunTrace rmarina_run(const std::vector<ProblemPtr>& workers, const Point& x0,
                     const Compressor& compressor, const MarinaConfig& config,
                     CommLedger* ledger = nullptr,
                     const Problem* global = nullptr);

/// Same loop, tracking f - f* + (eta/p)|g - grad f|^2. Needs f* on `global`.
RunTrace rmarina_run_pl(const std::vector<ProblemPtr>& workers, const Point& x0,
                        const Compressor& compressor, const MarinaConfig& config,
                        const Problem& global, CommLedger* ledger = nullptr);

double default_stepsize_marina(double L, double p, double omega, std::size_t n);
double default_stepsize_marina_pl(double L, double p, double omega,
                                  std::size_t n, double mu);
double default_p_marina(double rho_q, int d);
/// Per-worker per-round expectation p d + (1 - p) rho_Q.
double expected_comm_per_round(double p, double rho_q, int d);

/// Contiguous shards whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> partition_shard_equal(std::size_t n,
                                                            std::size_t workers);
/// Shard sizes drawn from Dirichlet(alpha); every worker gets >= 1 component.
std::vector<std::vector<std::size_t>> partition_shard_dirichlet(
    std::size_t n, std::size_t workers, double alpha, std::uint64_t seed);
/// "shard-equal" or "shard-dirichlet:<alpha>".
std::vector<std::vector<std::size_t>> partition(const std::string& spec,
                                                std::size_t n,
                                                std::size_t workers,
                                                std::uint64_t seed);

std::vector<ProblemPtr> make_worker_problems(
    const ProblemPtr& parent, const std::vector<std::vector<std::size_t>>& shards);

}  // namespace rvr

#endif  // RVR_DISTRIBUTED_HPP
