#include "rvr/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "rvr/errors.hpp"
#include "recorder.hpp"

namespace rvr {

namespace {

void require_finite_sum(const Problem& problem, const char* algo) {
  if (problem.is_online())
    throw ConfigError(std::string(algo) + " needs a finite-sum problem");
}

void validate_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ConfigError("eta must be a positive finite number");
}

void validate_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
}

void validate_stride(const OptimizerConfig& c) {
  if (c.trace_stride < 1) throw ConfigError("trace_stride must be >= 1");
}

void validate_batch(const Problem& problem, std::size_t size, const char* name) {
  if (size < 1) throw ConfigError(std::string(name) + " must be >= 1");
  if (!problem.is_online() && size > problem.n())
    throw ConfigError(std::string(name) + " exceeds the number of components");
}

}  // namespace

StepStreams StepStreams::from_seed(std::uint64_t seed) {
  return {make_stream(seed, "sampling"), make_stream(seed, "coin")};
}

// ------------------------------------------------------------- estimators

TangentVector lsvrg_estimator(const Problem& problem, const Point& x,
                              const Point& y, const TangentVector& full_grad_at_y,
                              const Batch& batch) {
  const TangentVector at_x = problem.minibatch_gradient(batch, x);
  const TangentVector at_y = problem.minibatch_gradient(batch, y);
  // Ordered so that y == x yields the full gradient bit for bit.
  TangentVector g = at_x - transport(y, x, at_y);
  g += transport(y, x, full_grad_at_y);
  return g;
}

TangentVector page_difference_estimator(const Problem& problem,
                                        const Point& x_old, const Point& x_new,
                                        const TangentVector& g,
                                        const Batch& batch) {
  const TangentVector at_new = problem.minibatch_gradient(batch, x_new);
  const TangentVector at_old = problem.minibatch_gradient(batch, x_old);
  return at_new + transport(x_old, x_new, g - at_old);
}

// ------------------------------------------------------------------ steps

LsvrgState rlsvrg_init(const Problem& problem, const Point& x0) {
  require_finite_sum(problem, "R-LSVRG");
  LsvrgState s{x0, x0, problem.full_gradient(x0), 0, problem.n()};
  return s;
}

LsvrgState rlsvrg_step(const Problem& problem, const LsvrgState& state,
                       double eta, double p, std::size_t B, StepStreams& rng) {
  const Batch batch = problem.sample_batch(B, rng.sampling);
  const TangentVector g =
      lsvrg_estimator(problem, state.x, state.y, state.full_grad_at_y, batch);
  LsvrgState next{exp(state.x, -eta * g), state.y, state.full_grad_at_y,
                  state.step + 1, state.grad_evals + 2 * B};
  if (flip(rng.coin, p)) {
    next.y = state.x;
    next.full_grad_at_y = problem.full_gradient(state.x);
    next.grad_evals += problem.n();
  }
  return next;
}

PageState rpage_init(const Problem& problem, const Point& x0, std::size_t B,
                     StepStreams& rng) {
  const Batch batch = problem.sample_batch(B, rng.sampling);
  return PageState{x0, x0, problem.minibatch_gradient(batch, x0), 0, B};
}

PageState rpage_step(const Problem& problem, const PageState& state, double eta,
                     double p, std::size_t B, std::size_t b, StepStreams& rng) {
  PageState next{state.x, exp(state.x, -eta * state.g), state.g, state.step + 1,
                 state.grad_evals};
  if (flip(rng.coin, p)) {
    const Batch batch = problem.sample_batch(B, rng.sampling);
    next.g = problem.minibatch_gradient(batch, next.x);
    next.grad_evals += B;
  } else {
    const Batch batch = problem.sample_batch(b, rng.sampling);
    next.g = page_difference_estimator(problem, state.x, next.x, state.g, batch);
    next.grad_evals += 2 * b;
  }
  return next;
}

// -------------------------------------------------------------------- runs

RunTrace rgd_run(const Problem& problem, const Point& x0,
                 const OptimizerConfig& config) {
  require_finite_sum(problem, "R-GD");
  validate_eta(config.eta);
  validate_stride(config);
  detail::Recorder rec(problem, config, "rgd");
  Point x = x0;
  std::uint64_t evals = 0;
  rec.record(0, evals, x);
  for (std::uint64_t k = 1; k <= config.K; ++k) {
    x = exp(x, -config.eta * problem.full_gradient(x));
    evals += problem.n();
    if (rec.due(k)) rec.record(k, evals, x);
  }
  return rec.finish(evals);
}

RunTrace rsgd_run(const Problem& problem, const Point& x0,
                  const OptimizerConfig& config) {
  validate_eta(config.eta);
  validate_stride(config);
  validate_batch(problem, config.b, "b");
  detail::Recorder rec(problem, config, "rsgd");
  StepStreams rng = StepStreams::from_seed(config.seed);
  Point x = x0;
  std::uint64_t evals = 0;
  rec.record(0, evals, x);
  for (std::uint64_t k = 1; k <= config.K; ++k) {
    const Batch batch = problem.sample_batch(config.b, rng.sampling);
    x = exp(x, -config.eta * problem.minibatch_gradient(batch, x));
    evals += config.b;
    if (rec.due(k)) rec.record(k, evals, x);
  }
  return rec.finish(evals);
}

RunTrace rsvrg_run(const Problem& problem, const Point& x0,
                   const OptimizerConfig& config) {
  require_finite_sum(problem, "R-SVRG");
  validate_eta(config.eta);
  validate_stride(config);
  validate_batch(problem, config.B, "B");
  const std::size_t m = config.inner_loop_m == 0 ? problem.n() : config.inner_loop_m;
  detail::Recorder rec(problem, config, "rsvrg");
  StepStreams rng = StepStreams::from_seed(config.seed);
  Point x = x0;
  Point y = x0;
  TangentVector full = TangentVector::zero(x0);
  std::uint64_t evals = 0;
  rec.record(0, evals, x);
  for (std::uint64_t k = 0; k < config.K; ++k) {
    if (k % m == 0) {
      y = x;
      full = problem.full_gradient(y);
      evals += problem.n();
    }
    const Batch batch = problem.sample_batch(config.B, rng.sampling);
    x = exp(x, -config.eta * lsvrg_estimator(problem, x, y, full, batch));
    evals += 2 * config.B;
    if (rec.due(k + 1)) rec.record(k + 1, evals, x);
  }
  return rec.finish(evals);
}

RunTrace rlsvrg_run(const Problem& problem, const Point& x0,
                    const OptimizerConfig& config) {
  require_finite_sum(problem, "R-LSVRG");
  validate_eta(config.eta);
  validate_p(config.p);
  validate_stride(config);
  validate_batch(problem, config.B, "B");
  if (!(config.zeta >= 1.0)) throw ConfigError("zeta must be >= 1");
  const auto& meta = problem.meta();
  const bool track = meta.mu > 0.0 && meta.x_star.has_value();

  detail::Recorder rec(problem, config, "rlsvrg");
  if (track) rec.set_lyapunov_kind("lsvrg");
  StepStreams rng = StepStreams::from_seed(config.seed);
  LsvrgState s = rlsvrg_init(problem, x0);
  auto lyap = [&](const LsvrgState& st) -> std::optional<double> {
    if (!track) return std::nullopt;
    return lyapunov_lsvrg(problem, st.x, st.y, config.p, config.zeta);
  };
  rec.record(0, s.grad_evals, s.x, lyap(s));
  for (std::uint64_t k = 1; k <= config.K; ++k) {
    s = rlsvrg_step(problem, s, config.eta, config.p, config.B, rng);
    if (rec.due(k)) rec.record(k, s.grad_evals, s.x, lyap(s));
  }
  return rec.finish(s.grad_evals);
}

RunTrace rpage_run(const Problem& problem, const Point& x0,
                   const OptimizerConfig& config) {
  validate_eta(config.eta);
  validate_p(config.p);
  validate_stride(config);
  validate_batch(problem, config.B, "B");
  validate_batch(problem, config.b, "b");
  if (config.b > config.B) throw ConfigError("need b <= B");
  const bool track = problem.meta().f_star.has_value();
  const double weight = 2.0 / config.p;

  detail::Recorder rec(problem, config, "rpage");
  if (track) rec.set_lyapunov_kind("page-pl");
  StepStreams rng = StepStreams::from_seed(config.seed);
  PageState s = rpage_init(problem, x0, config.B, rng);
  auto lyap = [&](const PageState& st) -> std::optional<double> {
    if (!track) return std::nullopt;
    return lyapunov_estimator(problem, st.x, st.g, weight);
  };
  rec.record(0, s.grad_evals, s.x, lyap(s));
  for (std::uint64_t k = 1; k <= config.K; ++k) {
    s = rpage_step(problem, s, config.eta, config.p, config.B, config.b, rng);
    if (rec.due(k)) rec.record(k, s.grad_evals, s.x, lyap(s));
  }
  return rec.finish(s.grad_evals);
}

// --------------------------------------------------------- hyperparameters

double default_stepsize_lsvrg(double mu, double L, double zeta) {
  if (!(mu > 0.0 && L > 0.0 && zeta > 0.0))
    throw ConfigError("default_stepsize_lsvrg: mu, L, zeta must be positive");
  return mu / (16.0 * L * L * zeta);
}

double default_stepsize_page(double L, double p, double b) {
  if (!(L > 0.0)) throw ConfigError("default_stepsize_page: L must be positive");
  validate_p(p);
  if (!(b >= 1.0)) throw ConfigError("default_stepsize_page: b must be >= 1");
  return 1.0 / (L * (1.0 + std::sqrt((1.0 - p) / (p * b))));
}

double default_p_page(std::size_t B, std::size_t b) {
  if (b < 1 || b > B) throw ConfigError("default_p_page: need 1 <= b <= B");
  return static_cast<double>(b) / static_cast<double>(B + b);
}

double default_stepsize_page_pl(double L, double p, double b, double mu) {
  if (!(mu > 0.0)) throw ConfigError("default_stepsize_page_pl: mu must be positive");
  return std::min(default_stepsize_page(L, p, b), p / (2.0 * mu));
}

std::size_t default_batch_online(double sigma, double eps) {
  if (!(sigma >= 0.0) || !(eps > 0.0))
    throw ConfigError("default_batch_online: need sigma >= 0 and eps > 0");
  const double B = std::ceil(2.0 * sigma * sigma / (eps * eps));
  return std::max<std::size_t>(1, static_cast<std::size_t>(B));
}

bool validate_stepsize(double a, double b_lin, double eta) {
  if (!(a > 0.0 && b_lin > 0.0))
    throw ConfigError("validate_stepsize: a and b must be positive");
  return a * eta * eta + b_lin * eta <= 1.0;
}

// -------------------------------------------------------------- Lyapunov

double lyapunov_lsvrg(const Problem& problem, const Point& x, const Point& y,
                      double p, double zeta) {
  const auto& meta = problem.meta();
  if (!meta.x_star) throw StructuralError("lyapunov_lsvrg: x* unknown");
  validate_p(p);
  const Point star(problem.manifold(), *meta.x_star);
  const double d = dist(x, star);
  const double coef =
      3.0 * meta.mu * meta.mu / (64.0 * p * meta.L * meta.L * zeta);
  return d * d + coef * log(y, star).squared_norm();
}

double lyapunov_estimator(const Problem& problem, const Point& x,
                          const TangentVector& g, double weight) {
  const auto& f_star = problem.meta().f_star;
  if (!f_star) throw StructuralError("Lyapunov needs a known f*");
  const TangentVector err = g - problem.exact_gradient(x);
  return problem.value(x) - *f_star + weight * err.squared_norm();
}

}  // namespace rvr
