#ifndef RVR_ORACLES_HPP
#define RVR_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "rvr/compression.hpp"
#include "rvr/geometry.hpp"
#include "rvr/optimizers.hpp"
#include "rvr/problems.hpp"

namespace rvr {

// ------------------------------------------------------ finite differences

/// Central difference of f along the geodesic t -> Exp_x(t v):
/// (f(Exp_x(h v)) - f(Exp_x(-h v))) / 2h. Needs |v| = 1, h in [1e-8, 1e-3].
double finite_diff_directional(const std::function<double(const Point&)>& f,
                               const Point& x, const TangentVector& v_unit,
                               double h);
double finite_diff_directional(const Problem& problem, const Point& x,
                               const TangentVector& v_unit, double h);

// ------------------------------------------------------------ enumeration

/// One equally weighted or coin-weighted outcome of a randomized estimator.
struct Outcome {
  double prob;
  TangentVector value;
};

inline constexpr std::size_t kEnumerationLimit = 10000;

/// R-LSVRG estimator over every size-B index set at fixed (x, y).
std::vector<Outcome> enumerate_lsvrg(const Problem& problem, const Point& x,
                                     const Point& y,
                                     const TangentVector& full_grad_at_y,
                                     std::size_t B = 1);

/// Next PAGE estimator at x_new: coin (p) times every B-set, (1 - p) times
/// every b-set in the difference branch.
std::vector<Outcome> enumerate_page(const Problem& problem, const Point& x_old,
                                    const Point& x_new, const TangentVector& g,
                                    double p, std::size_t B, std::size_t b);

/// Next server estimator of R-MARINA: shared coin times the product of every
/// worker's compressor outcomes. `local_g` and `local_grad_old` are the
/// workers' estimators and gradients at x_old.
std::vector<Outcome> enumerate_marina(const std::vector<ProblemPtr>& workers,
                                      const Point& x_old, const Point& x_new,
                                      const std::vector<TangentVector>& local_g,
                                      const Compressor& compressor, double p);

/// Exact expectation of the enumerated estimator.
TangentVector brute_force_mean(const std::vector<Outcome>& outcomes);
double total_probability(const std::vector<Outcome>& outcomes);
/// E|value - target|^2.
double expected_squared_error(const std::vector<Outcome>& outcomes,
                              const TangentVector& target);

// ------------------------------------------------------------------ rates

struct RateEnvelope {
  enum class Kind { linear, sublinear };
  Kind kind = Kind::linear;
  /// Linear: contraction factor per step. Sublinear: constant C in C/k.
  double value = 0.0;
  double slack = 1.0;
  std::uint64_t k_min = 10;

  static RateEnvelope linear(double factor, double slack = 1.05);
  static RateEnvelope sublinear(double C, double slack = 1.2);
};

struct RateCheck {
  bool pass = true;
  /// Largest observed / allowed over the checked records.
  double worst_ratio = 0.0;
  std::uint64_t worst_step = 0;
};

/// Linear: every recorded Lyapunov value <= Phi^0 (factor slack)^k.
/// Sublinear: running-min grad_norm_sq <= slack C / k for k >= k_min.
RateCheck check_rate(const RunTrace& trace, const RateEnvelope& envelope);

/// Record-wise mean over traces recorded at the same steps. Optional fields
/// survive only when every trace has them.
RunTrace mean_trace(const std::vector<RunTrace>& traces);
/// Replaces grad_norm_sq by its running minimum.
RunTrace running_min_grad(RunTrace trace);

// --------------------------------------------------------------- Lyapunov

double lyapunov_lsvrg(const Problem& problem, const LsvrgState& state, double p,
                      double zeta);
/// f(x) - f* + (2/p)|g - grad f(x)|^2.
double lyapunov_page_pl(const Problem& problem, const PageState& state, double p);

// --------------------------------------------------------------- geometry

/// zeta b^2 + c^2 - 2 b c cos(A) - a^2 for the geodesic triangle with vertex
/// x and the other corners y, z (A is the angle at x). Nonnegative when the
/// distance bound holds.
double trig_bound_margin(const Point& x, const Point& y, const Point& z,
                         double zeta);

/// Right side minus left side of the one-step distance inequality for
/// x_next = Exp_xs(-eta g) and reference point x.
double distance_corollary_margin(const Point& xs, const TangentVector& g,
                                 double eta, const Point& x, double zeta);

/// |lhs - rhs| of the dot-product identity
/// <grad, -eta g> + M eta^2/2 |g|^2 =
///   -eta/2 |grad|^2 - (1/(2 eta) - M/2)|eta g|^2 + eta/2 |g - grad|^2.
double dot_identity_gap(const Vec& grad, const Vec& g, double eta, double M);

}  // namespace rvr

#endif  // RVR_ORACLES_HPP
