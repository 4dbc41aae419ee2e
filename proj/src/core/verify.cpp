#include <cmath>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "rvr/compression.hpp"
#include "rvr/distributed.hpp"
#include "rvr/errors.hpp"
#include "rvr/harness.hpp"
#include "rvr/oracles.hpp"

namespace rvr {

namespace {

using Checks = std::vector<VerifyCheck>;

std::string sci(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << v;
  return ss.str();
}

void add(Checks& out, const std::string& suite, const std::string& name, bool pass,
         const std::string& detail) {
  out.push_back({suite, name, pass, detail});
}

// Tangent vector at x with norm drawn uniformly from [0, r_max].
TangentVector random_step(const Point& x, Rng& rng, double r_max) {
  TangentVector v = random_tangent(x, rng);
  std::uniform_real_distribution<double> u(0.0, r_max);
  const double n = v.norm();
  return n > 0.0 ? (u(rng) / n) * v : v;
}

void geometry_suite(Checks& out) {
  const char* S = "geometry";
  Rng rng = make_stream(11, "verify-geometry");
  for (const Manifold& m : {Manifold::sphere(5), Manifold::euclidean(5)}) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Point x = random_point(m, rng);
      const TangentVector v = random_step(x, rng, m.is_sphere() ? 3.0 : 5.0);
      worst = std::max(worst, (log(x, exp(x, v)) - v).norm());
    }
    add(out, S, "exp_log_roundtrip " + m.describe(), worst <= 1e-8, "max error " + sci(worst));

    double iso = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Point x = random_point(m, rng);
      const Point y = exp(x, random_step(x, rng, m.is_sphere() ? 3.0 : 5.0));
      const TangentVector u = random_tangent(x, rng), w = random_tangent(x, rng);
      const TangentVector tu = transport(x, y, u), tw = transport(x, y, w);
      iso = std::max(iso, std::abs(inner(y, tu, tw) - inner(x, u, w)));
      iso = std::max(iso, std::abs(tu.norm() - u.norm()));
    }
    add(out, S, "transport_isometry " + m.describe(), iso <= 1e-10, "max error " + sci(iso));
  }

  const Manifold sphere = Manifold::sphere(4);
  const double z = geometry_meta(sphere, M_PI / 2).zeta;
  double worst = INFINITY;
  for (int t = 0; t < 1000; ++t) {
    const Point x = random_point(sphere, rng);
    const Point y = exp(x, random_step(x, rng, 1.0));
    const Point w = exp(x, random_step(x, rng, 1.0));
    worst = std::min(worst, trig_bound_margin(x, y, w, z));
  }
  add(out, S, "trig_bound sphere", worst >= -1e-9, "min margin " + sci(worst));
}

std::vector<std::pair<std::string, ProblemPtr>> sample_problems() {
  Mat atoms = gaussian_samples(6, 5, 9);
  return {{"quadratic", make_quadratic(12, 6, 0.1, 1.0, 5)},
          {"rayleigh", make_rayleigh(gaussian_samples(6, 20, 5))},
          {"online-atoms", make_online(OnlineDistribution::uniform_atoms(atoms), 5)}};
}

void problems_suite(Checks& out) {
  const char* S = "problems";
  Rng rng = make_stream(12, "verify-problems");
  for (const auto& [name, p] : sample_problems()) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Point x = random_point(p->manifold(), rng);
      const TangentVector g = p->exact_gradient(x);
      TangentVector v = random_tangent(x, rng);
      v *= 1.0 / v.norm();
      const double fd = finite_diff_directional(*p, x, v, 1e-5);
      worst = std::max(worst, std::abs(fd - inner(x, g, v)) / std::max(1.0, g.norm()));
    }
    add(out, S, "gradient_vs_finite_difference " + name, worst <= 1e-5,
        "max scaled error " + sci(worst));
    if (p->is_online()) continue;

    const Point x = random_point(p->manifold(), rng);
    Vec mean = Vec::Zero(x.dim());
    for (std::size_t i = 0; i < p->n(); ++i) mean += p->component_gradient(i, x).coords();
    mean /= static_cast<double>(p->n());
    p->reset_gradient_evaluations();
    const TangentVector full = p->full_gradient(x);
    const double err = (full.coords() - mean).norm() / std::max(1.0, mean.norm());
    add(out, S, "full_gradient_is_component_mean " + name, err <= 1e-12,
        "relative error " + sci(err));
    add(out, S, "full_gradient_charges_n " + name, p->gradient_evaluations() == p->n(),
        "charged " + std::to_string(p->gradient_evaluations()));
  }
}

bool same_iterates(const RunTrace& a, const RunTrace& b) {
  if (a.iterates.size() != b.iterates.size()) return false;
  for (std::size_t i = 0; i < a.iterates.size(); ++i)
    if (a.iterates[i] != b.iterates[i]) return false;
  return true;
}

void optimizers_suite(Checks& out) {
  const char* S = "optimizers";
  Rng rng = make_stream(13, "verify-optimizers");
  const ProblemPtr ray = make_rayleigh(gaussian_samples(5, 8, 2));
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Point x = random_point(ray->manifold(), rng);
      const Point y = random_point(ray->manifold(), rng);
      for (std::size_t B : {1, 2}) {
        const auto outs = enumerate_lsvrg(*ray, x, y, ray->exact_gradient(y), B);
        const TangentVector g = ray->exact_gradient(x);
        worst = std::max(worst, (brute_force_mean(outs) - g).norm() / std::max(1.0, g.norm()));
      }
    }
    add(out, S, "lsvrg_unbiased_enumeration", worst <= 1e-10, "max relative bias " + sci(worst));
  }

  const Point x0 = random_point(ray->manifold(), rng);
  OptimizerConfig c;
  c.eta = 1e-3 / ray->meta().L;
  c.K = 200;
  c.seed = 4;
  c.keep_iterates = true;
  {
    OptimizerConfig pc = c;
    pc.p = 1.0;
    pc.B = 3;
    pc.b = 1;
    OptimizerConfig sc = c;
    sc.b = 3;
    add(out, S, "page_p1_equals_minibatch_sgd",
        same_iterates(rpage_run(*ray, x0, pc), rsgd_run(*ray, x0, sc)), "bitwise");
    pc.B = ray->n();
    add(out, S, "page_p1_fullbatch_equals_gd",
        same_iterates(rpage_run(*ray, x0, pc), rgd_run(*ray, x0, c)), "bitwise");
  }
  {
    OptimizerConfig sc = c;
    sc.inner_loop_m = 1;
    add(out, S, "svrg_inner1_equals_gd",
        same_iterates(rsvrg_run(*ray, x0, sc), rgd_run(*ray, x0, c)), "bitwise");
  }
  {
    const ProblemPtr q = make_quadratic(10, 5, 0.2, 1.0, 8);
    OptimizerConfig gc;
    gc.eta = 1.0 / q->meta().L;
    gc.K = 200;
    Rng r0 = make_stream(1, "init");
    const RunTrace t = rgd_run(*q, random_point(q->manifold(), r0), gc);
    double worst = 0.0;
    for (std::size_t i = 1; i < t.records.size(); ++i)
      worst = std::max(worst, t.records[i].f_value - t.records[i - 1].f_value);
    add(out, S, "gd_monotone_on_quadratic", worst <= 1e-12, "max increase " + sci(worst));
  }
}

void compression_suite(Checks& out) {
  const char* S = "compression";
  Rng rng = make_stream(14, "verify-compression");
  double bias = 0.0, omega_err = 0.0;
  for (int d = 1; d <= 6; ++d) {
    const Manifold m = Manifold::euclidean(d);
    const Point x = random_point(m, rng);
    const TangentVector v = random_tangent(x, rng);
    for (int k = 1; k <= d; ++k) {
      const Compressor q = Compressor::randk(k, d);
      Vec mean = Vec::Zero(d);
      double second = 0.0;
      for (const auto& [prob, w] : q.enumerate(v)) {
        mean += prob * w.coords();
        second += prob * (w - v).squared_norm();
      }
      bias = std::max(bias, (mean - v.coords()).norm() / v.norm());
      omega_err = std::max(omega_err, std::abs(second / v.squared_norm() - q.omega()));
    }
  }
  add(out, S, "randk_unbiased_enumeration", bias <= 1e-12, "max relative bias " + sci(bias));
  add(out, S, "randk_omega_enumeration", omega_err <= 1e-12, "max error " + sci(omega_err));

  const Manifold m = Manifold::euclidean(100);
  const Point x = random_point(m, rng);
  const TangentVector v = random_tangent(x, rng);
  const Compressor q = Compressor::randk(10, 100);
  const auto rep = verify_conic_variance(q, v, 100000, rng);
  const double rel = std::abs(rep.empirical_omega - q.omega()) / q.omega();
  add(out, S, "randk_omega_monte_carlo d=100 k=10", rel <= 0.02,
      "omega_hat " + sci(rep.empirical_omega) + ", relative error " + sci(rel));
}

void distributed_suite(Checks& out) {
  const char* S = "distributed";
  const ProblemPtr q = make_quadratic(8, 20, 0.1, 1.0, 21);
  const auto workers = make_worker_problems(q, partition_shard_equal(8, 8));
  const WorkerMeanProblem global(workers, q->meta().f_star, q->meta().x_star);
  Rng r0 = make_stream(2, "init");
  const Point x0 = random_point(q->manifold(), r0);
  {
    MarinaConfig mc;
    mc.eta = 0.5 / global.meta().L;
    mc.p = 0.3;
    mc.K = 300;
    mc.seed = 3;
    mc.keep_iterates = true;
    const RunTrace a = rmarina_run(workers, x0, Compressor::identity(20), mc, nullptr, &global);
    OptimizerConfig gc;
    gc.eta = mc.eta;
    gc.K = mc.K;
    gc.keep_iterates = true;
    const RunTrace b = rgd_run(global, x0, gc);
    double worst = a.iterates.size() == b.iterates.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.iterates.size(), b.iterates.size()); ++i)
      worst = std::max(worst, (a.iterates[i] - b.iterates[i]).norm());
    add(out, S, "marina_identity_equals_gd", worst <= 1e-12, "max iterate gap " + sci(worst));
  }
  {
    const Compressor c = Compressor::randk(5, 20);
    MarinaConfig mc;
    mc.p = default_p_marina(c.rho_q(), 20);
    mc.eta = default_stepsize_marina(global.meta().L, mc.p, c.omega(), workers.size());
    mc.K = 10000;
    mc.seed = 5;
    mc.trace_stride = 1000;
    CommLedger ledger;
    rmarina_run(workers, x0, c, mc, &ledger, &global);
    const double expect = expected_comm_per_round(mc.p, c.rho_q(), 20);
    const double rel = std::abs(ledger.mean_per_worker_per_round() - expect) / expect;
    add(out, S, "ledger_mean_cost", rel <= 0.02,
        "mean " + sci(ledger.mean_per_worker_per_round()) + " expected " + sci(expect));
  }
}

void oracles_suite(Checks& out) {
  const char* S = "oracles";
  Rng rng = make_stream(15, "verify-oracles");
  double gap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::normal_distribution<double> nd;
    Vec a(7), b(7);
    for (int i = 0; i < 7; ++i) a[i] = nd(rng), b[i] = nd(rng);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    gap = std::max(gap, dot_identity_gap(a, b, u(rng), u(rng)));
  }
  add(out, S, "dot_identity", gap <= 1e-12, "max gap " + sci(gap));

  const ProblemPtr ray = make_rayleigh(gaussian_samples(4, 6, 3));
  double worst = 0.0, mass = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Point x = random_point(ray->manifold(), rng);
    const Point y = exp(x, random_step(x, rng, 0.5));
    const TangentVector g = ray->exact_gradient(x) + 0.1 * random_tangent(x, rng);
    const double p = 0.3;
    const auto outs = enumerate_page(*ray, x, y, g, p, 6, 2);
    mass = std::max(mass, std::abs(total_probability(outs) - 1.0));
    const TangentVector expect =
        ray->exact_gradient(y) + (1.0 - p) * transport(x, y, g - ray->exact_gradient(x));
    worst = std::max(worst, (brute_force_mean(outs) - expect).norm() / std::max(1.0, expect.norm()));
  }
  add(out, S, "page_enumeration_mean", worst <= 1e-10, "max relative error " + sci(worst));
  add(out, S, "page_enumeration_mass", mass <= 1e-12, "max mass error " + sci(mass));

  const ProblemPtr q = make_quadratic(10, 5, 0.2, 1.0, 8);
  OptimizerConfig gc;
  gc.eta = 1.0 / q->meta().L;
  gc.K = 300;
  Rng r0 = make_stream(1, "init");
  RunTrace t = rgd_run(*q, random_point(q->manifold(), r0), gc);
  // Gradient descent on a mu-strongly convex L-smooth function contracts the
  // optimality gap by 1 - mu/L per step.
  for (auto& r : t.records) r.lyapunov = r.f_value - *q->meta().f_star;
  const auto rc = check_rate(t, RateEnvelope::linear(1.0 - q->meta().mu / q->meta().L));
  add(out, S, "gd_linear_envelope", rc.pass, "worst ratio " + sci(rc.worst_ratio));
}

const std::vector<std::pair<std::string, std::function<void(Checks&)>>>& suites() {
  static const std::vector<std::pair<std::string, std::function<void(Checks&)>>> s = {
      {"geometry", geometry_suite},       {"problems", problems_suite},
      {"optimizers", optimizers_suite},   {"compression", compression_suite},
      {"distributed", distributed_suite}, {"oracles", oracles_suite}};
  return s;
}

}  // namespace

bool VerifyReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["pass"] = pass();
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    arr.push_back({{"suite", c.suite}, {"name", c.name}, {"pass", c.pass},
                   {"detail", c.detail}});
  return j.dump(2);
}

VerifyReport run_verify(const std::string& suite) {
  VerifyReport report;
  bool found = false;
  for (const auto& [name, fn] : suites()) {
    if (suite != "all" && suite != name) continue;
    found = true;
    try {
      fn(report.checks);
    } catch (const Error& e) {
      report.checks.push_back({name, "suite raised", false, e.what()});
    }
  }
  if (!found) throw ConfigError("unknown verify suite '" + suite + "'");
  return report;
}

}  // namespace rvr
