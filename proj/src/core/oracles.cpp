#include "rvr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rvr/errors.hpp"

namespace rvr {

namespace {

// Number of k-subsets of [n] as a double, so overflow shows up as "large".
double choose(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

// Calls fn on every sorted k-subset of [n].
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Batch batch_of(const std::vector<std::size_t>& idx) {
  Batch b;
  b.indices = idx;
  return b;
}

void require_finite(const Problem& problem) {
  if (problem.is_online())
    throw StructuralError("enumeration needs a finite-sum problem");
}

}  // namespace

// ------------------------------------------------------ finite differences

double finite_diff_directional(const std::function<double(const Point&)>& f,
                               const Point& x, const TangentVector& v_unit,
                               double h) {
  if (!(h >= 1e-8 && h <= 1e-3))
    throw ConfigError("finite differences: h must lie in [1e-8, 1e-3]");
  if (std::abs(v_unit.norm() - 1.0) > 1e-9)
    throw ConfigError("finite differences: direction must have unit norm");
  const double plus = f(exp(x, h * v_unit));
  const double minus = f(exp(x, -h * v_unit));
  return (plus - minus) / (2.0 * h);
}

double finite_diff_directional(const Problem& problem, const Point& x,
                               const TangentVector& v_unit, double h) {
  return finite_diff_directional(
      [&problem](const Point& p) { return problem.value(p); }, x, v_unit, h);
}

// ------------------------------------------------------------ enumeration

std::vector<Outcome> enumerate_lsvrg(const Problem& problem, const Point& x,
                                     const Point& y,
                                     const TangentVector& full_grad_at_y,
                                     std::size_t B) {
  require_finite(problem);
  const std::size_t n = problem.n();
  if (B < 1 || B > n) throw ConfigError("enumerate_lsvrg: need 1 <= B <= n");
  const double count = choose(n, B);
  if (count > kEnumerationLimit)
    throw RefusedError("enumerate_lsvrg: too many index sets");
  std::vector<Outcome> out;
  for_each_subset(n, B, [&](const std::vector<std::size_t>& idx) {
    out.push_back({1.0 / count,
                   lsvrg_estimator(problem, x, y, full_grad_at_y, batch_of(idx))});
  });
  return out;
}

std::vector<Outcome> enumerate_page(const Problem& problem, const Point& x_old,
                                    const Point& x_new, const TangentVector& g,
                                    double p, std::size_t B, std::size_t b) {
  require_finite(problem);
  const std::size_t n = problem.n();
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("enumerate_page: p outside [0, 1]");
  if (b < 1 || b > B || B > n) throw ConfigError("enumerate_page: need 1 <= b <= B <= n");
  const double heads = choose(n, B);
  const double tails = choose(n, b);
  if (heads + tails > kEnumerationLimit)
    throw RefusedError("enumerate_page: too many outcomes");
  std::vector<Outcome> out;
  if (p > 0.0) {
    for_each_subset(n, B, [&](const std::vector<std::size_t>& idx) {
      out.push_back({p / heads, problem.minibatch_gradient(batch_of(idx), x_new)});
    });
  }
  if (p < 1.0) {
    for_each_subset(n, b, [&](const std::vector<std::size_t>& idx) {
      out.push_back({(1.0 - p) / tails,
                     page_difference_estimator(problem, x_old, x_new, g, batch_of(idx))});
    });
  }
  return out;
}

std::vector<Outcome> enumerate_marina(const std::vector<ProblemPtr>& workers,
                                      const Point& x_old, const Point& x_new,
                                      const std::vector<TangentVector>& local_g,
                                      const Compressor& compressor, double p) {
  if (workers.empty() || local_g.size() != workers.size())
    throw StructuralError("enumerate_marina: one estimator per worker expected");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("enumerate_marina: p outside [0, 1]");
  const std::size_t n = workers.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<TangentVector> dense;
  std::vector<std::vector<std::pair<double, TangentVector>>> options;
  double combos = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TangentVector grad_new = workers[i]->exact_gradient(x_new);
    const TangentVector grad_old = workers[i]->exact_gradient(x_old);
    dense.push_back(grad_new);
    const TangentVector diff = grad_new - transport(x_old, x_new, grad_old);
    const TangentVector carried = transport(x_old, x_new, local_g[i]);
    auto outcomes = compressor.enumerate(diff, kEnumerationLimit);
    for (auto& [prob, q] : outcomes) q = carried + q;
    combos *= static_cast<double>(outcomes.size());
    if (combos > kEnumerationLimit)
      throw RefusedError("enumerate_marina: too many outcomes");
    options.push_back(std::move(outcomes));
  }

  auto finish = [&](const Vec& sum) {
    const Vec mean = sum * inv_n;
    return x_new.manifold().is_sphere() ? project_tangent(x_new, mean)
                                        : TangentVector(x_new, mean);
  };

  std::vector<Outcome> out;
  if (p > 0.0) {
    Vec sum = Vec::Zero(x_new.dim());
    for (const auto& v : dense) sum += v.coords();
    out.push_back({p, finish(sum)});
  }
  if (p < 1.0) {
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      double prob = 1.0 - p;
      Vec sum = Vec::Zero(x_new.dim());
      for (std::size_t i = 0; i < n; ++i) {
        prob *= options[i][pick[i]].first;
        sum += options[i][pick[i]].second.coords();
      }
      out.push_back({prob, finish(sum)});
      std::size_t i = 0;
      while (i < n && ++pick[i] == options[i].size()) pick[i++] = 0;
      if (i == n) break;
    }
  }
  return out;
}

TangentVector brute_force_mean(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw StructuralError("brute_force_mean: no outcomes");
  Vec acc = Vec::Zero(outcomes.front().value.coords().size());
  for (const auto& o : outcomes) acc += o.prob * o.value.coords();
  return {outcomes.front().value.base(), std::move(acc)};
}

double total_probability(const std::vector<Outcome>& outcomes) {
  double s = 0.0;
  for (const auto& o : outcomes) s += o.prob;
  return s;
}

double expected_squared_error(const std::vector<Outcome>& outcomes,
                              const TangentVector& target) {
  double s = 0.0;
  for (const auto& o : outcomes)
    s += o.prob * (o.value.coords() - target.coords()).squaredNorm();
  return s;
}

// ------------------------------------------------------------------ rates

RateEnvelope RateEnvelope::linear(double factor, double slack) {
  if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("linear envelope: factor in (0, 1)");
  if (!(slack >= 1.0)) throw ConfigError("envelope slack must be >= 1");
  return {Kind::linear, factor, slack, 0};
}

RateEnvelope RateEnvelope::sublinear(double C, double slack) {
  if (!(C > 0.0)) throw ConfigError("sublinear envelope: C must be positive");
  if (!(slack >= 1.0)) throw ConfigError("envelope slack must be >= 1");
  return {Kind::sublinear, C, slack, 10};
}

RateCheck check_rate(const RunTrace& trace, const RateEnvelope& envelope) {
  RateCheck out;
  if (trace.records.empty()) throw StructuralError("check_rate: empty trace");
  if (envelope.kind == RateEnvelope::Kind::linear) {
    for (const auto& r : trace.records)
      if (!r.lyapunov) throw StructuralError("check_rate: trace has no Lyapunov values");
    const double phi0 = *trace.records.front().lyapunov;
    const double rate = envelope.value * envelope.slack;
    for (const auto& r : trace.records) {
      const double bound = phi0 * std::pow(rate, static_cast<double>(r.step));
      const double value = *r.lyapunov;
      double ratio = 0.0;
      if (value > 0.0) ratio = bound > 0.0 ? value / bound : INFINITY;
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.worst_step = r.step;
      }
      if (value > bound) out.pass = false;
    }
    return out;
  }
  double running = INFINITY;
  for (const auto& r : trace.records) {
    running = std::min(running, r.grad_norm_sq);
    if (r.step < envelope.k_min) continue;
    const double bound = envelope.slack * envelope.value / static_cast<double>(r.step);
    const double ratio = running / bound;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_step = r.step;
    }
    if (running > bound) out.pass = false;
  }
  return out;
}

RunTrace mean_trace(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw StructuralError("mean_trace: no traces");
  RunTrace out = traces.front();
  out.iterates.clear();
  out.seed = 0;
  const double m = static_cast<double>(traces.size());
  for (std::size_t j = 0; j < out.records.size(); ++j) {
    TraceRecord& acc = out.records[j];
    double grad_evals = 0.0, comm = 0.0, f = 0.0, gn = 0.0, dist = 0.0, lyap = 0.0;
    bool has_comm = true, has_dist = true, has_lyap = true;
    for (const auto& t : traces) {
      if (t.records.size() != out.records.size() || t.records[j].step != acc.step)
        throw StructuralError("mean_trace: traces recorded different steps");
      const auto& r = t.records[j];
      grad_evals += static_cast<double>(r.grad_evals);
      f += r.f_value;
      gn += r.grad_norm_sq;
      if (r.comm_coords) comm += static_cast<double>(*r.comm_coords); else has_comm = false;
      if (r.dist_to_opt) dist += *r.dist_to_opt; else has_dist = false;
      if (r.lyapunov) lyap += *r.lyapunov; else has_lyap = false;
    }
    acc.grad_evals = static_cast<std::uint64_t>(std::llround(grad_evals / m));
    acc.f_value = f / m;
    acc.grad_norm_sq = gn / m;
    acc.comm_coords = has_comm ? std::optional<std::uint64_t>(std::llround(comm / m)) : std::nullopt;
    acc.dist_to_opt = has_dist ? std::optional<double>(dist / m) : std::nullopt;
    acc.lyapunov = has_lyap ? std::optional<double>(lyap / m) : std::nullopt;
  }
  double delta0 = 0.0;
  for (const auto& t : traces) delta0 += t.delta0;
  out.delta0 = delta0 / m;
  return out;
}

RunTrace running_min_grad(RunTrace trace) {
  double running = INFINITY;
  for (auto& r : trace.records) {
    running = std::min(running, r.grad_norm_sq);
    r.grad_norm_sq = running;
  }
  return trace;
}

// --------------------------------------------------------------- Lyapunov

double lyapunov_lsvrg(const Problem& problem, const LsvrgState& state, double p,
                      double zeta) {
  return lyapunov_lsvrg(problem, state.x, state.y, p, zeta);
}

double lyapunov_page_pl(const Problem& problem, const PageState& state, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  return lyapunov_estimator(problem, state.x, state.g, 2.0 / p);
}

// --------------------------------------------------------------- geometry

double trig_bound_margin(const Point& x, const Point& y, const Point& z,
                         double zeta) {
  const TangentVector u = log(x, y);
  const TangentVector v = log(x, z);
  const double b = u.norm();
  const double c = v.norm();
  const double a = dist(y, z);
  // b c cos(A) is the inner product of the two initial velocities.
  const double bc_cos = b > 0.0 && c > 0.0 ? inner(x, u, v) : 0.0;
  return zeta * b * b + c * c - 2.0 * bc_cos - a * a;
}

double distance_corollary_margin(const Point& xs, const TangentVector& g,
                                 double eta, const Point& x, double zeta) {
  const Point next = exp(xs, -eta * g);
  const double lhs = inner(xs, -g, log(xs, x));
  const double d0 = dist(xs, x);
  const double d1 = dist(next, x);
  const double rhs = (d0 * d0 - d1 * d1) / (2.0 * eta) + 0.5 * zeta * eta * g.squared_norm();
  return rhs - lhs;
}

double dot_identity_gap(const Vec& grad, const Vec& g, double eta, double M) {
  const double lhs = grad.dot(-eta * g) + 0.5 * M * eta * eta * g.squaredNorm();
  const double rhs = -0.5 * eta * grad.squaredNorm() -
                     (1.0 / (2.0 * eta) - 0.5 * M) * (eta * g).squaredNorm() +
                     0.5 * eta * (g - grad).squaredNorm();
  return std::abs(lhs - rhs);
}

}  // namespace rvr
