#ifndef RVR_OPTIMIZERS_HPP
#define RVR_OPTIMIZERS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rvr/geometry.hpp"
#include "rvr/problems.hpp"
#include "rvr/rng.hpp"

namespace rvr {

struct OptimizerConfig {
  double eta = 0.0;
  double p = 1.0;
  /// Primary minibatch. R-LSVRG uses it as the per-step sample count.
  std::size_t B = 1;
  std::size_t b = 1;
  std::uint64_t K = 0;
  std::uint64_t seed = 0;
  /// R-SVRG inner loop length; 0 means n.
  std::size_t inner_loop_m = 0;
  std::uint64_t trace_stride = 1;
  /// Curvature constant used by the R-LSVRG Lyapunov weight.
  double zeta = 1.0;
  /// Keep the iterate of every recorded step in RunTrace::iterates.
  bool keep_iterates = false;
};

struct TraceRecord {
  std::uint64_t step = 0;
  std::uint64_t grad_evals = 0;
  std::optional<std::uint64_t> comm_coords;
  double f_value = 0.0;
  double grad_norm_sq = 0.0;
  std::optional<double> dist_to_opt;
  std::optional<double> lyapunov;
};

struct RunTrace {
  std::string algorithm;
  std::string problem_tag;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  /// Parallel to `records` when the run kept its iterates.
  std::vector<Vec> iterates;
  double wall_time_s = 0.0;
  std::uint64_t total_grad_evals = 0;
  std::uint64_t total_comm_coords = 0;
  /// f(x0) - f*; with unknown f* the best observed value stands in and
  /// `delta0_surrogate` is set.
  double delta0 = 0.0;
  bool delta0_surrogate = false;
  std::string lyapunov_kind;
  /// Config echo as ordered key/value pairs.
  std::vector<std::pair<std::string, std::string>> params;
};

// ------------------------------------------------------------------ states

struct LsvrgState {
  Point x;
  Point y;
  TangentVector full_grad_at_y;
  std::uint64_t step = 0;
  std::uint64_t grad_evals = 0;
};

struct PageState {
  Point x_prev;
  Point x;
  TangentVector g;
  std::uint64_t step = 0;
  std::uint64_t grad_evals = 0;
};

/// Independent randomness sources of one run.
struct StepStreams {
  Rng sampling;
  Rng coin;

  static StepStreams from_seed(std::uint64_t seed);
};

// ------------------------------------------------------------- estimators

/// (grad f_I(x) - T grad f_I(y)) + T full_grad_at_y with T the transport y -> x.
TangentVector lsvrg_estimator(const Problem& problem, const Point& x,
                              const Point& y, const TangentVector& full_grad_at_y,
                              const Batch& batch);

/// PAGE low-probability branch: grad f_I(x_new) + T(g - grad f_I(x_old)).
/// The same batch is evaluated at both points.
TangentVector page_difference_estimator(const Problem& problem,
                                        const Point& x_old, const Point& x_new,
                                        const TangentVector& g,
                                        const Batch& batch);

// ------------------------------------------------------------------ steps

LsvrgState rlsvrg_init(const Problem& problem, const Point& x0);
/// One step with a per-step sample of `B` components (B = 1 is the printed
/// single-sample form). The anchor moves to the pre-step iterate on refresh.
LsvrgState rlsvrg_step(const Problem& problem, const LsvrgState& state,
                       double eta, double p, std::size_t B, StepStreams& rng);

PageState rpage_init(const Problem& problem, const Point& x0, std::size_t B,
                     StepStreams& rng);
PageState rpage_step(const Problem& problem, const PageState& state, double eta,
                     double p, std::size_t B, std::size_t b, StepStreams& rng);

// -------------------------------------------------------------------- runs

RunTrace rgd_run(const Problem& problem, const Point& x0,
                 const OptimizerConfig& config);
/// Minibatch of size b, without replacement (b = 1 is single-sample SGD).
RunTrace rsgd_run(const Problem& problem, const Point& x0,
                  const OptimizerConfig& config);
RunTrace rsvrg_run(const Problem& problem, const Point& x0,
                   const OptimizerConfig& config);
RunTrace rlsvrg_run(const Problem& problem, const Point& x0,
                    const OptimizerConfig& config);
/// Finite sums and online problems. Records the PL Lyapunov
/// f - f* + (2/p)|g - grad f|^2 when f* is known.
RunTrace rpage_run(const Problem& problem, const Point& x0,
                   const OptimizerConfig& config);

// --------------------------------------------------------- hyperparameters

double default_stepsize_lsvrg(double mu, double L, double zeta);
double default_stepsize_page(double L, double p, double b);
double default_p_page(std::size_t B, std::size_t b);
double default_stepsize_page_pl(double L, double p, double b, double mu);
/// Online minibatch size ceil(2 sigma^2 / eps^2), at least 1.
std::size_t default_batch_online(double sigma, double eps);
/// a eta^2 + b_lin eta <= 1.
bool validate_stepsize(double a, double b_lin, double eta);

// -------------------------------------------------------------- Lyapunov

/// d^2(x, x*) + 3 mu^2 / (64 p L^2 zeta) |Log_y(x*)|^2.
double lyapunov_lsvrg(const Problem& problem, const Point& x, const Point& y,
                      double p, double zeta);
/// f(x) - f* + weight |g - grad f(x)|^2.
double lyapunov_estimator(const Problem& problem, const Point& x,
                          const TangentVector& g, double weight);

}  // namespace rvr

#endif  // RVR_OPTIMIZERS_HPP
