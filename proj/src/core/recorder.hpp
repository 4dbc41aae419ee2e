#ifndef RVR_SRC_RECORDER_HPP
#define RVR_SRC_RECORDER_HPP

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>

#include "rvr/optimizers.hpp"

namespace rvr::detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Collects records at the configured stride and fills the trace summary.
class Recorder {
 public:
  Recorder(const Problem& problem, const OptimizerConfig& config,
           std::string algorithm)
      : problem_(problem),
        config_(config),
        start_(std::chrono::steady_clock::now()) {
    trace_.algorithm = std::move(algorithm);
    trace_.problem_tag = problem.tag();
    trace_.seed = config.seed;
    trace_.params = {{"eta", fmt(config.eta)},
                     {"p", fmt(config.p)},
                     {"B", std::to_string(config.B)},
                     {"b", std::to_string(config.b)},
                     {"K", std::to_string(config.K)},
                     {"seed", std::to_string(config.seed)},
                     {"inner_loop_m", std::to_string(config.inner_loop_m)},
                     {"trace_stride", std::to_string(config.trace_stride)},
                     {"zeta", fmt(config.zeta)}};
  }

  bool due(std::uint64_t step) const {
    return step % config_.trace_stride == 0 || step == config_.K;
  }

  void set_lyapunov_kind(std::string kind) { trace_.lyapunov_kind = std::move(kind); }

  void record(std::uint64_t step, std::uint64_t grad_evals, const Point& x,
              std::optional<double> lyapunov = std::nullopt,
              std::optional<std::uint64_t> comm = std::nullopt) {
    TraceRecord r;
    r.comm_coords = comm;
    r.step = step;
    r.grad_evals = grad_evals;
    r.f_value = problem_.value(x);
    r.grad_norm_sq = problem_.exact_gradient(x).squared_norm();
    r.dist_to_opt = problem_.dist_to_opt(x);
    r.lyapunov = lyapunov;
    trace_.records.push_back(r);
    if (config_.keep_iterates) trace_.iterates.push_back(x.coords());
  }

  RunTrace& trace() { return trace_; }

  RunTrace finish(std::uint64_t grad_evals, std::uint64_t comm = 0) {
    trace_.total_grad_evals = grad_evals;
    trace_.total_comm_coords = comm;
    trace_.wall_time_s = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    finalize_delta0(trace_, problem_.meta().f_star);
    return std::move(trace_);
  }

  static void finalize_delta0(RunTrace& trace, std::optional<double> f_star) {
    if (trace.records.empty()) return;
    const double f0 = trace.records.front().f_value;
    if (f_star) {
      trace.delta0 = f0 - *f_star;
      trace.delta0_surrogate = false;
      return;
    }
    double best = f0;
    for (const auto& r : trace.records) best = std::min(best, r.f_value);
    trace.delta0 = f0 - best;
    trace.delta0_surrogate = true;
  }

 private:
  const Problem& problem_;
  const OptimizerConfig& config_;
  RunTrace trace_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace rvr::detail

#endif  // RVR_SRC_RECORDER_HPP
