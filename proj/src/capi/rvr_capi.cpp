#include "rvr/rvr.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "rvr/errors.hpp"
#include "rvr/harness.hpp"
#include "rvr/optimizers.hpp"
#include "rvr/problems.hpp"

struct rvr_problem {
  rvr::ProblemPtr ptr;
};

struct rvr_trace {
  rvr::RunTrace trace;
};

namespace {

thread_local std::string g_last_error;

rvr_status fail(rvr_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <class F>
rvr_status guarded(F&& body) {
  try {
    body();
    return RVR_OK;
  } catch (const rvr::StructuralError& e) {
    return fail(RVR_ERR_STRUCTURAL, e.what());
  } catch (const rvr::DomainError& e) {
    return fail(RVR_ERR_DOMAIN, e.what());
  } catch (const rvr::ConfigError& e) {
    return fail(RVR_ERR_CONFIG, e.what());
  } catch (const rvr::IoError& e) {
    return fail(RVR_ERR_IO, e.what());
  } catch (const rvr::RefusedError& e) {
    return fail(RVR_ERR_REFUSED, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RVR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RVR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RVR_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw rvr::StructuralError(std::string(name) + " is NULL");
}

rvr::Point point_from(const rvr::Problem& p, const double* x) {
  const int d = p.manifold().ambient_dim();
  return rvr::Point(p.manifold(), Eigen::Map<const rvr::Vec>(x, d));
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rvr::RunOverrides overrides_from(const rvr_overrides* o) {
  rvr::RunOverrides r;
  if (!o) return r;
  if (o->has_seed) r.seed = o->seed;
  if (o->out) r.out = std::string(o->out);
  if (o->has_stride) r.stride = o->stride;
  return r;
}

}  // namespace

extern "C" {

const char* rvr_version(void) { return rvr::kVersion; }

const char* rvr_status_name(rvr_status status) {
  switch (status) {
    case RVR_OK: return "ok";
    case RVR_ERR_STRUCTURAL: return "structural";
    case RVR_ERR_DOMAIN: return "domain";
    case RVR_ERR_CONFIG: return "config";
    case RVR_ERR_IO: return "io";
    case RVR_ERR_REFUSED: return "refused";
    case RVR_ERR_INTERNAL: return "internal";
    case RVR_ERR_VERIFY_FAILED: return "verify_failed";
  }
  return "unknown";
}

const char* rvr_last_error_message(void) { return g_last_error.c_str(); }

rvr_status rvr_problem_quadratic(size_t n, int d, double mu, double L, uint64_t seed,
                                 rvr_problem** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rvr_problem{rvr::make_quadratic(n, d, mu, L, seed)};
  });
}

rvr_status rvr_problem_rayleigh_gaussian(size_t n, int d, uint64_t seed,
                                         rvr_problem** out) {
  return guarded([&] {
    require(out, "out");
    if (n < 1 || d < 2) throw rvr::ConfigError("rayleigh needs n >= 1 and d >= 2");
    *out = new rvr_problem{rvr::make_rayleigh(rvr::gaussian_samples(d, n, seed))};
  });
}

rvr_status rvr_problem_rayleigh(const double* samples, int d, size_t n,
                                rvr_problem** out) {
  return guarded([&] {
    require(out, "out");
    require(samples, "samples");
    if (n < 1 || d < 2) throw rvr::ConfigError("rayleigh needs n >= 1 and d >= 2");
    const rvr::Mat Z = Eigen::Map<const rvr::Mat>(samples, d, static_cast<Eigen::Index>(n));
    *out = new rvr_problem{rvr::make_rayleigh(Z)};
  });
}

rvr_status rvr_problem_rayleigh_csv(const char* path, rvr_problem** out) {
  return guarded([&] {
    require(out, "out");
    require(path, "path");
    *out = new rvr_problem{rvr::make_rayleigh(rvr::load_samples_csv(path))};
  });
}

void rvr_problem_free(rvr_problem* problem) { delete problem; }

rvr_status rvr_problem_get_info(const rvr_problem* problem, rvr_problem_info* out) {
  return guarded([&] {
    require(problem, "problem");
    require(out, "out");
    const auto& m = problem->ptr->meta();
    out->n = m.n.value_or(0);
    out->d = m.d;
    out->on_sphere = problem->ptr->manifold().is_sphere() ? 1 : 0;
    out->L = m.L;
    out->mu = m.mu;
    out->has_f_star = m.f_star ? 1 : 0;
    out->f_star = m.f_star.value_or(0.0);
  });
}

rvr_status rvr_problem_value(const rvr_problem* problem, const double* x, double* out) {
  return guarded([&] {
    require(problem, "problem");
    require(x, "x");
    require(out, "out");
    *out = problem->ptr->value(point_from(*problem->ptr, x));
  });
}

rvr_status rvr_problem_gradient(const rvr_problem* problem, const double* x,
                                double* grad) {
  return guarded([&] {
    require(problem, "problem");
    require(x, "x");
    require(grad, "grad");
    const auto g = problem->ptr->exact_gradient(point_from(*problem->ptr, x));
    Eigen::Map<rvr::Vec>(grad, g.coords().size()) = g.coords();
  });
}

rvr_status rvr_problem_random_point(const rvr_problem* problem, uint64_t seed,
                                    double* x) {
  return guarded([&] {
    require(problem, "problem");
    require(x, "x");
    rvr::Rng rng = rvr::make_stream(seed, "init");
    const auto p = rvr::random_point(problem->ptr->manifold(), rng);
    Eigen::Map<rvr::Vec>(x, p.coords().size()) = p.coords();
  });
}

void rvr_run_options_init(rvr_run_options* o) {
  if (!o) return;
  *o = rvr_run_options{};
  o->method = "rgd";
  o->p = 1.0;
  o->B = 1;
  o->b = 1;
  o->trace_stride = 1;
  o->zeta = 1.0;
}

rvr_status rvr_run(const rvr_problem* problem, const double* x0,
                   const rvr_run_options* options, rvr_trace** out) {
  return guarded([&] {
    require(problem, "problem");
    require(x0, "x0");
    require(options, "options");
    require(options->method, "options->method");
    require(out, "out");
    rvr::OptimizerConfig c;
    c.eta = options->eta;
    c.p = options->p;
    c.B = options->B;
    c.b = options->b;
    c.K = options->K;
    c.seed = options->seed;
    c.inner_loop_m = options->inner_loop_m;
    c.trace_stride = options->trace_stride;
    c.zeta = options->zeta;
    const rvr::Problem& p = *problem->ptr;
    const rvr::Point x = point_from(p, x0);
    const std::string m = options->method;
    rvr::RunTrace t;
    if (m == "rgd") t = rvr::rgd_run(p, x, c);
    else if (m == "rsgd") t = rvr::rsgd_run(p, x, c);
    else if (m == "rsvrg") t = rvr::rsvrg_run(p, x, c);
    else if (m == "rlsvrg") t = rvr::rlsvrg_run(p, x, c);
    else if (m == "rpage") t = rvr::rpage_run(p, x, c);
    else throw rvr::ConfigError("unknown method '" + m + "'");
    *out = new rvr_trace{std::move(t)};
  });
}

void rvr_trace_free(rvr_trace* trace) { delete trace; }

rvr_status rvr_trace_size(const rvr_trace* trace, size_t* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    *out = trace->trace.records.size();
  });
}

rvr_status rvr_trace_row_at(const rvr_trace* trace, size_t index, rvr_trace_row* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    if (index >= trace->trace.records.size())
      throw rvr::StructuralError("trace row index out of range");
    const auto& r = trace->trace.records[index];
    out->step = r.step;
    out->grad_evals = r.grad_evals;
    out->has_comm_coords = r.comm_coords ? 1 : 0;
    out->comm_coords = r.comm_coords.value_or(0);
    out->f_value = r.f_value;
    out->grad_norm_sq = r.grad_norm_sq;
    out->has_dist_to_opt = r.dist_to_opt ? 1 : 0;
    out->dist_to_opt = r.dist_to_opt.value_or(0.0);
    out->has_lyapunov = r.lyapunov ? 1 : 0;
    out->lyapunov = r.lyapunov.value_or(0.0);
  });
}

rvr_status rvr_trace_total_grad_evals(const rvr_trace* trace, uint64_t* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    *out = trace->trace.total_grad_evals;
  });
}

rvr_status rvr_trace_write_csv(const rvr_trace* trace, const char* path) {
  return guarded([&] {
    require(trace, "trace");
    require(path, "path");
    rvr::write_trace_csv(trace->trace, path);
  });
}

rvr_status rvr_experiment_run(const char* config_path, const rvr_overrides* overrides,
                              size_t* n_traces) {
  return guarded([&] {
    require(config_path, "config_path");
    const auto paths =
        rvr::run_experiment(rvr::load_config(config_path), overrides_from(overrides));
    if (n_traces) *n_traces = paths.size();
  });
}

rvr_status rvr_verify(const char* suite, char** report_json) {
  bool passed = false;
  const rvr_status st = guarded([&] {
    require(report_json, "report_json");
    *report_json = nullptr;
    const auto report = rvr::run_verify(suite ? suite : "all");
    passed = report.pass();
    *report_json = dup_string(report.to_json());
  });
  if (st != RVR_OK) return st;
  return passed ? RVR_OK : fail(RVR_ERR_VERIFY_FAILED, "verification failed");
}

rvr_status rvr_bench(const char* preset, const char* out_dir,
                     const rvr_overrides* overrides, char** report_json) {
  return guarded([&] {
    require(preset, "preset");
    require(out_dir, "out_dir");
    require(report_json, "report_json");
    *report_json = nullptr;
    *report_json = dup_string(rvr::run_bench(preset, out_dir, overrides_from(overrides)));
  });
}

void rvr_string_free(char* s) { std::free(s); }

}  // extern "C"
