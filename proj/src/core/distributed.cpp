#include "rvr/distributed.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "recorder.hpp"
#include "rvr/errors.hpp"

namespace rvr {

namespace {

ProblemMeta worker_mean_meta(const std::vector<ProblemPtr>& workers,
                             std::optional<double> f_star,
                             std::optional<Vec> x_star, bool sign_symmetric,
                             double mu) {
  if (workers.empty()) throw ConfigError("need at least one worker");
  ProblemMeta meta;
  meta.n = workers.size();
  meta.d = workers.front()->meta().d;
  for (const auto& w : workers) {
    if (!w) throw StructuralError("null worker problem");
    if (!(w->manifold() == workers.front()->manifold()))
      throw ConfigError("workers live on different manifolds");
    if (w->is_online()) throw ConfigError("workers must hold finite sums");
    meta.L = std::max(meta.L, w->meta().L);
  }
  meta.f_star = f_star;
  meta.x_star = std::move(x_star);
  meta.sign_symmetric_optimum = sign_symmetric;
  if (!(mu >= 0.0)) throw ConfigError("mu must be nonnegative");
  meta.mu = mu;
  return meta;
}

std::string worker_mean_tag(const std::vector<ProblemPtr>& workers) {
  std::ostringstream os;
  os << "workers:" << workers.size();
  if (!workers.empty()) os << ":" << workers.front()->tag();
  return os.str();
}

// Kahan-compensated mean of the worker vectors, always in worker-id order.
Vec compensated_mean(const std::vector<TangentVector>& parts) {
  const auto d = parts.front().coords().size();
  Vec sum = Vec::Zero(d);
  Vec comp = Vec::Zero(d);
  for (const auto& part : parts) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double y = part.coords()(j) - comp(j);
      const double t = sum(j) + y;
      comp(j) = (t - sum(j)) - y;
      sum(j) = t;
    }
  }
  return sum / static_cast<double>(parts.size());
}

void validate_marina(const std::vector<ProblemPtr>& workers, const Point& x0,
                     const Compressor& compressor, const MarinaConfig& config,
                     const Problem& global) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta))
    throw ConfigError("eta must be a positive finite number");
  if (!(config.p > 0.0 && config.p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  if (config.trace_stride < 1) throw ConfigError("trace_stride must be >= 1");
  for (const auto& w : workers)
    if (!(w->manifold() == x0.manifold()))
      throw ConfigError("worker manifold does not match the initial point");
  if (!(global.manifold() == x0.manifold()))
    throw ConfigError("metric problem lives on a different manifold");
  if (compressor.dim() != x0.dim())
    throw ConfigError("compressor dimension does not match the manifold");
}

RunTrace marina_loop(const std::vector<ProblemPtr>& workers, const Point& x0,
                     const Compressor& compressor, const MarinaConfig& config,
                     CommLedger* ledger, const Problem& global, bool pl_mode) {
  validate_marina(workers, x0, compressor, config, global);
  if (pl_mode && !global.meta().f_star)
    throw ConfigError("R-MARINA PL mode needs a known f*");

  OptimizerConfig echo;
  echo.eta = config.eta;
  echo.p = config.p;
  echo.K = config.K;
  echo.seed = config.seed;
  echo.trace_stride = config.trace_stride;
  echo.keep_iterates = config.keep_iterates;
  detail::Recorder rec(global, echo, pl_mode ? "rmarina-pl" : "rmarina");
  rec.trace().params = {{"eta", detail::fmt(config.eta)},
                        {"p", detail::fmt(config.p)},
                        {"K", std::to_string(config.K)},
                        {"seed", std::to_string(config.seed)},
                        {"trace_stride", std::to_string(config.trace_stride)},
                        {"workers", std::to_string(workers.size())},
                        {"compressor", compressor.describe()}};
  if (pl_mode) rec.set_lyapunov_kind("marina-pl");

  const std::size_t n = workers.size();
  const auto d = static_cast<std::uint64_t>(x0.dim());
  Rng coin = make_stream(config.seed, "coin");
  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    streams.push_back(make_stream(config.seed, "compressor", i));

  CommLedger local_ledger;
  CommLedger& book = ledger ? *ledger : local_ledger;
  book = CommLedger{};
  book.per_worker.assign(n, d);
  book.initial_per_worker = d;

  Point x = x0;
  std::vector<TangentVector> g_i;
  std::vector<TangentVector> grad_i;
  std::uint64_t evals = 0;
  for (const auto& w : workers) {
    grad_i.push_back(w->full_gradient(x));
    g_i.push_back(grad_i.back());
    evals += w->n();
  }
  std::uint64_t comm = d * n;
  TangentVector g(x, compensated_mean(g_i));

  const double weight = config.eta / config.p;
  auto lyap = [&]() -> std::optional<double> {
    if (!pl_mode) return std::nullopt;
    return lyapunov_estimator(global, x, g, weight);
  };
  rec.record(0, evals, x, lyap(), comm);

  for (std::uint64_t k = 1; k <= config.K; ++k) {
    const Point x_new = exp(x, -config.eta * g);
    const bool dense = flip(coin, config.p);
    for (std::size_t i = 0; i < n; ++i) {
      TangentVector grad_new = workers[i]->full_gradient(x_new);
      evals += workers[i]->n();
      std::uint64_t cost = d;
      if (dense) {
        g_i[i] = grad_new;
      } else {
        const TangentVector diff = grad_new - transport(x, x_new, grad_i[i]);
        const CompressedMessage msg = compressor.compress_message(diff, streams[i]);
        cost = message_cost(msg);
        g_i[i] = transport(x, x_new, g_i[i]) + msg.to_tangent();
      }
      grad_i[i] = std::move(grad_new);
      book.per_worker[i] += cost;
      comm += cost;
    }
    ++book.rounds;
    x = x_new;
    Vec mean = compensated_mean(g_i);
    g = x.manifold().is_sphere() ? project_tangent(x, mean) : TangentVector(x, std::move(mean));
    if (rec.due(k)) rec.record(k, evals, x, lyap(), comm);
  }
  return rec.finish(evals, comm);
}

}  // namespace

WorkerMeanProblem::WorkerMeanProblem(std::vector<ProblemPtr> workers,
                                     std::optional<double> f_star,
                                     std::optional<Vec> x_star,
                                     bool sign_symmetric, double mu)
    : Problem(workers.empty() || !workers.front() ? Manifold::euclidean(1)
                                                  : workers.front()->manifold(),
              worker_mean_meta(workers, f_star, std::move(x_star), sign_symmetric, mu),
              worker_mean_tag(workers)),
      workers_(std::move(workers)) {}

double WorkerMeanProblem::do_component_value(std::size_t i,
                                             const Point& x) const {
  return workers_[i]->value(x);
}

Vec WorkerMeanProblem::do_component_ambient_gradient(std::size_t i,
                                                     const Point& x) const {
  return workers_[i]->exact_gradient(x).coords();
}

std::uint64_t CommLedger::total() const {
  return std::accumulate(per_worker.begin(), per_worker.end(), std::uint64_t{0});
}

double CommLedger::mean_per_worker_per_round() const {
  if (rounds == 0 || per_worker.empty()) return 0.0;
  const double traffic = static_cast<double>(total()) -
                         static_cast<double>(initial_per_worker * per_worker.size());
  return traffic / (static_cast<double>(rounds) * per_worker.size());
}

RunTrace rmarina_run(const std::vector<ProblemPtr>& workers, const Point& x0,
                     const Compressor& compressor, const MarinaConfig& config,
                     CommLedger* ledger, const Problem* global) {
  if (global) return marina_loop(workers, x0, compressor, config, ledger, *global, false);
  const WorkerMeanProblem mean(workers);
  return marina_loop(workers, x0, compressor, config, ledger, mean, false);
}

RunTrace rmarina_run_pl(const std::vector<ProblemPtr>& workers, const Point& x0,
                        const Compressor& compressor, const MarinaConfig& config,
                        const Problem& global, CommLedger* ledger) {
  return marina_loop(workers, x0, compressor, config, ledger, global, true);
}

double default_stepsize_marina(double L, double p, double omega, std::size_t n) {
  if (!(L > 0.0) || !(p > 0.0 && p <= 1.0) || !(omega >= 0.0) || n < 1)
    throw ConfigError("default_stepsize_marina: invalid arguments");
  return 1.0 / (L * (1.0 + std::sqrt((1.0 - p) / p * omega / static_cast<double>(n))));
}

double default_stepsize_marina_pl(double L, double p, double omega,
                                  std::size_t n, double mu) {
  if (!(L > 0.0) || !(p > 0.0 && p <= 1.0) || !(omega >= 0.0) || n < 1 ||
      !(mu > 0.0))
    throw ConfigError("default_stepsize_marina_pl: invalid arguments");
  const double smooth =
      1.0 / (L * (1.0 + std::sqrt(2.0 * (1.0 - p) * omega / (p * static_cast<double>(n)))));
  return std::min(smooth, p / (2.0 * mu));
}

double default_p_marina(double rho_q, int d) {
  if (d < 1 || !(rho_q > 0.0) || rho_q > d)
    throw ConfigError("default_p_marina: need 0 < rho_Q <= d");
  return rho_q / d;
}

double expected_comm_per_round(double p, double rho_q, int d) {
  if (!(p >= 0.0 && p <= 1.0) || d < 1 || !(rho_q > 0.0) || rho_q > d)
    throw ConfigError("expected_comm_per_round: invalid arguments");
  return p * d + (1.0 - p) * rho_q;
}

std::vector<std::vector<std::size_t>> partition_shard_equal(std::size_t n,
                                                            std::size_t workers) {
  if (workers < 1 || workers > n)
    throw ConfigError("shard-equal: need 1 <= workers <= n");
  std::vector<std::vector<std::size_t>> shards(workers);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  std::size_t next = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t size = base + (w < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) shards[w].push_back(next++);
  }
  return shards;
}

std::vector<std::vector<std::size_t>> partition_shard_dirichlet(
    std::size_t n, std::size_t workers, double alpha, std::uint64_t seed) {
  if (workers < 1 || workers > n)
    throw ConfigError("shard-dirichlet: need 1 <= workers <= n");
  if (!(alpha > 0.0)) throw ConfigError("shard-dirichlet: alpha must be positive");
  Rng rng = make_stream(seed, "partition");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> weights(workers);
  for (auto& w : weights) w = gamma(rng);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::vector<std::size_t>> shards(workers);
  for (std::size_t i = 0; i < n; ++i) shards[pick(rng)].push_back(i);
  // Empty workers take the last component of the currently largest shard.
  for (auto& shard : shards) {
    if (!shard.empty()) continue;
    auto largest = std::max_element(
        shards.begin(), shards.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    shard.push_back(largest->back());
    largest->pop_back();
  }
  for (auto& shard : shards) std::sort(shard.begin(), shard.end());
  return shards;
}

std::vector<std::vector<std::size_t>> partition(const std::string& spec,
                                                std::size_t n,
                                                std::size_t workers,
                                                std::uint64_t seed) {
  if (spec == "shard-equal") return partition_shard_equal(n, workers);
  const std::string prefix = "shard-dirichlet:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string rest = spec.substr(prefix.size());
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size())
      throw ConfigError("partition: bad alpha in '" + spec + "'");
    return partition_shard_dirichlet(n, workers, alpha, seed);
  }
  throw ConfigError("partition: unknown strategy '" + spec +
                    "' (expected shard-equal or shard-dirichlet:<alpha>)");
}

std::vector<ProblemPtr> make_worker_problems(
    const ProblemPtr& parent, const std::vector<std::vector<std::size_t>>& shards) {
  std::vector<ProblemPtr> out;
  out.reserve(shards.size());
  for (const auto& shard : shards)
    out.push_back(std::make_shared<SubsetProblem>(parent, shard));
  return out;
}

}  // namespace rvr
