#include "rvr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "recorder.hpp"
#include "rvr/distributed.hpp"
#include "rvr/errors.hpp"

namespace rvr {

namespace fs = std::filesystem;
using detail::fmt;

namespace {

const std::set<std::string> kExperimentKeys = {"seeds", "out", "trace_stride",
                                               "threads", "x0_seed"};
const std::set<std::string> kProblemKeys = {
    "type", "n", "d", "mu", "L", "seed", "csv", "workers", "partition", "dist", "atoms"};
const std::set<std::string> kAlgorithmKeys = {
    "method", "eta", "p", "B", "b", "K", "inner_loop_m", "compressor", "zeta", "eps"};
const std::set<std::string> kMethods = {"rgd",   "rsgd",    "rsvrg",   "rlsvrg",
                                        "rpage", "rpage-pl", "rmarina", "rmarina-pl"};

std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

void check_keys(const std::map<std::string, std::string>& kv,
                const std::set<std::string>& allowed, const std::string& section) {
  for (const auto& [k, v] : kv)
    if (!allowed.count(k))
      throw ConfigError("unknown key '" + k + "' in section [" + section + "]");
}

const std::string* find(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

bool is_auto(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto* v = find(kv, key);
  return !v || *v == "auto";
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" +
                      text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': integer out of range");
  }
}

double get_double(const std::map<std::string, std::string>& kv,
                  const std::string& key, double fallback) {
  const auto* v = find(kv, key);
  return v ? to_double(key, *v) : fallback;
}

std::uint64_t get_uint(const std::map<std::string, std::string>& kv,
                       const std::string& key, std::uint64_t fallback) {
  const auto* v = find(kv, key);
  return v ? to_uint(key, *v) : fallback;
}

std::uint64_t require_uint(const std::map<std::string, std::string>& kv,
                           const std::string& key, const std::string& section) {
  const auto* v = find(kv, key);
  if (!v) throw ConfigError("missing key '" + key + "' in section [" + section + "]");
  return to_uint(key, *v);
}

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative())
    if (const char* root = std::getenv("RVR_OUT_ROOT"); root && *root)
      return fs::path(root) / p;
  return p;
}

// Problem plus the pieces a distributed run needs.
struct Setup {
  ProblemPtr problem;
  std::vector<ProblemPtr> workers;
  std::shared_ptr<const WorkerMeanProblem> global;
};

Setup build_setup(const std::map<std::string, std::string>& spec, bool distributed) {
  Setup s;
  s.problem = build_problem(spec);
  if (!distributed) return s;
  if (s.problem->is_online())
    throw ConfigError("distributed methods need a finite-sum problem");
  const std::size_t n = s.problem->n();
  const std::size_t w = get_uint(spec, "workers", n);
  if (w < 1 || w > n)
    throw ConfigError("key 'workers': need 1 <= workers <= n");
  const auto* part = find(spec, "partition");
  const auto shards = partition(part ? *part : "shard-equal", n, w,
                                get_uint(spec, "seed", 0));
  s.workers = make_worker_problems(s.problem, shards);
  bool equal = true;
  for (const auto& sh : shards) equal = equal && sh.size() == shards[0].size();
  const auto& m = s.problem->meta();
  if (equal)
    s.global = std::make_shared<WorkerMeanProblem>(s.workers, m.f_star, m.x_star,
                                                   m.sign_symmetric_optimum, m.mu);
  else
    s.global = std::make_shared<WorkerMeanProblem>(s.workers);
  return s;
}

// Algorithm section with every "auto" resolved against the problem.
struct Resolved {
  std::string method;
  OptimizerConfig opt;
  std::string compressor = "identity";
};

Resolved resolve(const std::string& label,
                 const std::map<std::string, std::string>& kv, const Setup& s,
                 std::uint64_t stride) {
  Resolved r;
  const std::string section = "algorithm:" + label;
  const auto* method = find(kv, "method");
  if (!method) throw ConfigError("missing key 'method' in section [" + section + "]");
  if (!kMethods.count(*method))
    throw ConfigError("key 'method': unknown method '" + *method + "'");
  r.method = *method;
  r.opt.K = require_uint(kv, "K", section);
  r.opt.trace_stride = stride;
  r.opt.zeta = is_auto(kv, "zeta")
                   ? geometry_meta(s.problem->manifold(), 1.0).zeta
                   : to_double("zeta", kv.at("zeta"));

  const bool distributed = r.method == "rmarina" || r.method == "rmarina-pl";
  const Problem& prob = distributed ? *s.global : *s.problem;
  const auto& meta = prob.meta();
  const bool finite = !prob.is_online();
  if (!finite && r.method != "rpage" && r.method != "rpage-pl" && r.method != "rsgd")
    throw ConfigError("method '" + r.method + "' needs a finite-sum problem");

  auto num = [&](const std::string& key, double autoval) {
    return is_auto(kv, key) ? autoval : to_double(key, kv.at(key));
  };
  auto count = [&](const std::string& key, std::uint64_t autoval) {
    return is_auto(kv, key) ? autoval : to_uint(key, kv.at(key));
  };
  auto need_eta = [&](const char* why) {
    if (is_auto(kv, "eta"))
      throw ConfigError("key 'eta': auto needs " + std::string(why) +
                        "; set eta explicitly");
  };

  if (r.method == "rgd") {
    r.opt.eta = num("eta", 1.0 / meta.L);
  } else if (r.method == "rsgd") {
    r.opt.b = count("b", 1);
    r.opt.eta = num("eta", 1.0 / meta.L);
  } else if (r.method == "rsvrg" || r.method == "rlsvrg") {
    if (is_auto(kv, "eta") && !(meta.mu > 0.0)) need_eta("mu > 0");
    r.opt.eta = is_auto(kv, "eta")
                    ? default_stepsize_lsvrg(meta.mu, meta.L, r.opt.zeta)
                    : to_double("eta", kv.at("eta"));
    r.opt.inner_loop_m = count("inner_loop_m", 0);
    r.opt.B = count("B", 1);
    r.opt.p = num("p", 1.0 / static_cast<double>(prob.n()));
  } else if (r.method == "rpage" || r.method == "rpage-pl") {
    std::size_t B_auto;
    if (finite) {
      B_auto = prob.n();
    } else {
      B_auto = default_batch_online(meta.sigma, num("eps", 1e-2));
    }
    r.opt.B = count("B", B_auto);
    if (r.opt.B < 1) throw ConfigError("key 'B': must be >= 1");
    r.opt.b = count("b", std::max<std::size_t>(
                              1, static_cast<std::size_t>(std::floor(
                                     std::sqrt(static_cast<double>(r.opt.B))))));
    r.opt.p = num("p", default_p_page(r.opt.B, r.opt.b));
    if (r.method == "rpage") {
      r.opt.eta = num("eta", default_stepsize_page(meta.L, r.opt.p,
                                                   static_cast<double>(r.opt.b)));
    } else {
      if (is_auto(kv, "eta") && !(meta.mu > 0.0)) need_eta("mu > 0");
      r.opt.eta = is_auto(kv, "eta")
                      ? default_stepsize_page_pl(meta.L, r.opt.p,
                                                 static_cast<double>(r.opt.b), meta.mu)
                      : to_double("eta", kv.at("eta"));
    }
  } else {
    r.compressor = find(kv, "compressor") ? kv.at("compressor") : "identity";
    const int d = prob.manifold().ambient_dim();
    const Compressor q = Compressor::parse(r.compressor, d);
    r.opt.p = num("p", default_p_marina(q.rho_q(), d));
    const std::size_t w = s.workers.size();
    if (r.method == "rmarina") {
      r.opt.eta = num("eta", default_stepsize_marina(meta.L, r.opt.p, q.omega(), w));
    } else {
      if (is_auto(kv, "eta") && !(meta.mu > 0.0)) need_eta("mu > 0");
      r.opt.eta = is_auto(kv, "eta") ? default_stepsize_marina_pl(meta.L, r.opt.p,
                                                                   q.omega(), w, meta.mu)
                                     : to_double("eta", kv.at("eta"));
    }
  }
  return r;
}

RunTrace execute_one(const Resolved& r, const Setup& s, const Point& x0,
                     std::uint64_t seed) {
  OptimizerConfig c = r.opt;
  c.seed = seed;
  if (r.method == "rgd") return rgd_run(*s.problem, x0, c);
  if (r.method == "rsgd") return rsgd_run(*s.problem, x0, c);
  if (r.method == "rsvrg") return rsvrg_run(*s.problem, x0, c);
  if (r.method == "rlsvrg") return rlsvrg_run(*s.problem, x0, c);
  if (r.method == "rpage" || r.method == "rpage-pl") return rpage_run(*s.problem, x0, c);
  MarinaConfig mc;
  mc.eta = c.eta;
  mc.p = c.p;
  mc.K = c.K;
  mc.seed = seed;
  mc.trace_stride = c.trace_stride;
  const Compressor q = Compressor::parse(r.compressor, x0.dim());
  if (r.method == "rmarina") return rmarina_run(s.workers, x0, q, mc, nullptr, s.global.get());
  return rmarina_run_pl(s.workers, x0, q, mc, *s.global);
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string opt_field(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

}  // namespace

// ------------------------------------------------------------------ config

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  ExperimentConfig cfg;
  cfg.source = source;
  bool have_problem = false;
  std::set<std::string> labels;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError("key '" + name + "' outside any section");
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : section) kv[trim(k)] = trim(v.data());
    const std::string sec = trim(name);
    if (sec == "experiment") {
      check_keys(kv, kExperimentKeys, sec);
      cfg.experiment = kv;
    } else if (sec == "problem") {
      check_keys(kv, kProblemKeys, sec);
      cfg.problem = kv;
      have_problem = true;
    } else if (sec.rfind("algorithm:", 0) == 0) {
      const std::string label = trim(sec.substr(10));
      if (label.empty() || label.find_first_of("/\\ ") != std::string::npos)
        throw ConfigError("section [" + sec + "]: invalid algorithm label");
      if (!labels.insert(label).second)
        throw ConfigError("duplicate algorithm label '" + label + "'");
      check_keys(kv, kAlgorithmKeys, sec);
      if (!find(kv, "method"))
        throw ConfigError("missing key 'method' in section [" + sec + "]");
      if (!kMethods.count(kv.at("method")))
        throw ConfigError("key 'method': unknown method '" + kv.at("method") + "'");
      if (!find(kv, "K"))
        throw ConfigError("missing key 'K' in section [" + sec + "]");
      cfg.algorithms.emplace_back(label, kv);
    } else {
      throw ConfigError("unknown section [" + sec + "]");
    }
  }
  if (!have_problem) throw ConfigError("missing section [problem]");
  if (cfg.algorithms.empty()) throw ConfigError("no [algorithm:<label>] section");
  if (!find(cfg.problem, "type")) throw ConfigError("missing key 'type' in section [problem]");
  if (const auto* s = find(cfg.experiment, "seeds")) parse_seeds(*s);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("key 'seeds': empty entry");
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(to_uint("seeds", item));
      continue;
    }
    const auto lo = to_uint("seeds", trim(item.substr(0, dash)));
    const auto hi = to_uint("seeds", trim(item.substr(dash + 1)));
    if (hi < lo) throw ConfigError("key 'seeds': descending range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("key 'seeds': no seeds");
  return out;
}

ProblemPtr build_problem(const std::map<std::string, std::string>& spec) {
  const auto* type = find(spec, "type");
  if (!type) throw ConfigError("missing key 'type' in section [problem]");
  const std::uint64_t seed = get_uint(spec, "seed", 0);
  if (*type == "quadratic") {
    const auto n = require_uint(spec, "n", "problem");
    const auto d = require_uint(spec, "d", "problem");
    return make_quadratic(n, static_cast<int>(d), get_double(spec, "mu", 0.1),
                          get_double(spec, "L", 1.0), seed);
  }
  if (*type == "rayleigh") {
    const auto n = require_uint(spec, "n", "problem");
    const auto d = require_uint(spec, "d", "problem");
    if (n < 1 || d < 2) throw ConfigError("rayleigh needs n >= 1 and d >= 2");
    return make_rayleigh(gaussian_samples(static_cast<int>(d), n, seed));
  }
  if (*type == "rayleigh-csv") {
    const auto* csv = find(spec, "csv");
    if (!csv) throw ConfigError("missing key 'csv' in section [problem]");
    return make_rayleigh(load_samples_csv(*csv));
  }
  if (*type == "online") {
    const auto d = require_uint(spec, "d", "problem");
    if (d < 2) throw ConfigError("online needs d >= 2");
    const auto* dist = find(spec, "dist");
    const std::string kind = dist ? *dist : "gaussian";
    const int di = static_cast<int>(d);
    if (kind == "gaussian") {
      // Anisotropic covariance so the leading eigenvector is well separated.
      Mat factor = Mat::Zero(di, di);
      for (int j = 0; j < di; ++j)
        factor(j, j) = 1.0 - 0.9 * static_cast<double>(j) / std::max(1, di - 1);
      return make_online(OnlineDistribution::gaussian(factor), seed);
    }
    if (kind == "atoms") {
      const auto m = get_uint(spec, "atoms", 16);
      if (m < 1) throw ConfigError("key 'atoms': must be >= 1");
      return make_online(OnlineDistribution::uniform_atoms(gaussian_samples(di, m, seed)),
                         seed);
    }
    throw ConfigError("key 'dist': unknown distribution '" + kind + "'");
  }
  throw ConfigError("key 'type': unknown problem type '" + *type + "'");
}

unsigned thread_count() {
  if (const char* env = std::getenv("RVR_THREADS"); env && *env) {
    const auto n = to_uint("RVR_THREADS", env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<LabelledTrace> execute_experiment(const ExperimentConfig& config,
                                              const RunOverrides& overrides) {
  std::vector<std::uint64_t> seeds = {0};
  if (const auto* s = find(config.experiment, "seeds")) seeds = parse_seeds(*s);
  if (overrides.seed) seeds = {*overrides.seed};
  std::uint64_t stride = get_uint(config.experiment, "trace_stride", 1);
  if (overrides.stride) stride = *overrides.stride;
  if (stride < 1) throw ConfigError("key 'trace_stride': must be >= 1");
  const auto* x0_key = find(config.experiment, "x0_seed");
  const std::optional<std::uint64_t> x0_seed =
      x0_key ? std::optional<std::uint64_t>(to_uint("x0_seed", *x0_key)) : std::nullopt;
  unsigned threads = find(config.experiment, "threads")
                         ? static_cast<unsigned>(to_uint("threads", config.experiment.at("threads")))
                         : thread_count();

  bool distributed = false;
  for (const auto& [label, kv] : config.algorithms)
    distributed = distributed || kv.at("method") == "rmarina" || kv.at("method") == "rmarina-pl";
  const Setup setup = build_setup(config.problem, distributed);

  std::vector<Resolved> algos;
  for (const auto& [label, kv] : config.algorithms)
    algos.push_back(resolve(label, kv, setup, stride));

  const std::size_t total = algos.size() * seeds.size();
  std::vector<LabelledTrace> out(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    const std::size_t a = idx / seeds.size();
    const std::uint64_t seed = seeds[idx % seeds.size()];
    Rng init = make_stream(x0_seed.value_or(seed), "init");
    const Point x0 = random_point(setup.problem->manifold(), init);
    RunTrace t = execute_one(algos[a], setup, x0, seed);
    t.params.insert(t.params.begin(), {"method", algos[a].method});
    if (algos[a].method == "rmarina" || algos[a].method == "rmarina-pl")
      t.params.emplace_back("compressor", algos[a].compressor);
    out[idx] = {config.algorithms[a].first, std::move(t)};
  });
  return out;
}

std::vector<std::string> run_experiment(const ExperimentConfig& config,
                                        const RunOverrides& overrides) {
  auto traces = execute_experiment(config, overrides);
  const auto* out_key = find(config.experiment, "out");
  const fs::path dir = resolve_out(overrides.out ? *overrides.out
                                                 : (out_key ? *out_key : "rvr_out"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  std::vector<std::string> paths;
  for (const auto& lt : traces) {
    const std::string stem = lt.label + "_seed" + std::to_string(lt.trace.seed);
    const fs::path csv = dir / (stem + ".csv");
    write_trace_csv(lt.trace, csv.string());
    write_trace_sidecar(lt.trace, lt.label, &config, (dir / (stem + ".json")).string());
    paths.push_back(csv.string());
  }
  write_summary_csv(summarize(traces), (dir / "summary.csv").string());
  return paths;
}

// ------------------------------------------------------------------ traces

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "step,grad_evals,comm_coords,f_value,grad_norm_sq,dist_to_opt,lyapunov\n";
  std::uint64_t last = 0;
  bool first = true;
  for (const auto& r : trace.records) {
    if (!first && r.step <= last)
      throw StructuralError("trace steps must increase strictly");
    first = false;
    last = r.step;
    out << r.step << ',' << r.grad_evals << ','
        << (r.comm_coords ? std::to_string(*r.comm_coords) : std::string()) << ','
        << fmt(r.f_value) << ',' << fmt(r.grad_norm_sq) << ','
        << opt_field(r.dist_to_opt) << ',' << opt_field(r.lyapunov) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "step,grad_evals,comm_coords,f_value,grad_norm_sq,dist_to_opt,lyapunov")
    throw StructuralError("'" + path + "': unexpected trace header");
  RunTrace t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 7)
      throw StructuralError("'" + path + "' line " + std::to_string(lineno) +
                            ": expected 7 fields");
    try {
      TraceRecord r;
      r.step = std::stoull(f[0]);
      r.grad_evals = std::stoull(f[1]);
      if (!f[2].empty()) r.comm_coords = std::stoull(f[2]);
      r.f_value = std::stod(f[3]);
      r.grad_norm_sq = std::stod(f[4]);
      if (!f[5].empty()) r.dist_to_opt = std::stod(f[5]);
      if (!f[6].empty()) r.lyapunov = std::stod(f[6]);
      if (!t.records.empty() && r.step <= t.records.back().step)
        throw StructuralError("'" + path + "' line " + std::to_string(lineno) +
                              ": steps must increase strictly");
      t.records.push_back(r);
    } catch (const std::logic_error&) {
      throw StructuralError("'" + path + "' line " + std::to_string(lineno) +
                            ": bad number");
    }
  }
  if (!t.records.empty()) t.total_grad_evals = t.records.back().grad_evals;
  fs::path side(path);
  side.replace_extension(".json");
  if (std::ifstream js(side); js) {
    try {
      const auto j = nlohmann::json::parse(js);
      t.algorithm = j.value("algorithm", "");
      t.problem_tag = j.value("problem_tag", "");
      t.seed = j.value("seed", std::uint64_t{0});
      t.wall_time_s = j.value("runtime_s", 0.0);
    } catch (const nlohmann::json::exception&) {
      throw StructuralError("'" + side.string() + "': malformed sidecar");
    }
  }
  return t;
}

void write_trace_sidecar(const RunTrace& trace, const std::string& label,
                         const ExperimentConfig* config, const std::string& path) {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["algorithm"] = trace.algorithm;
  j["problem_tag"] = trace.problem_tag;
  j["seed"] = trace.seed;
  j["version"] = kVersion;
  j["runtime_s"] = trace.wall_time_s;
  j["total_grad_evals"] = trace.total_grad_evals;
  j["total_comm_coords"] = trace.total_comm_coords;
  j["delta0"] = trace.delta0;
  j["delta0_surrogate"] = trace.delta0_surrogate;
  j["lyapunov_kind"] = trace.lyapunov_kind;
  auto& params = j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : trace.params) params[k] = v;
  if (config) {
    auto& c = j["config"];
    c["source"] = config->source;
    c["experiment"] = config->experiment;
    c["problem"] = config->problem;
    auto& algos = c["algorithms"] = nlohmann::ordered_json::object();
    for (const auto& [l, kv] : config->algorithms) algos[l] = kv;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// ----------------------------------------------------------------- summary

std::vector<SummarySeries> summarize(const std::vector<LabelledTrace>& traces) {
  if (traces.empty()) throw StructuralError("summarize needs at least one trace");
  for (const auto& t : traces) {
    if (t.trace.problem_tag != traces.front().trace.problem_tag)
      throw StructuralError("summarize: traces come from different problems ('" +
                            traces.front().trace.problem_tag + "' and '" +
                            t.trace.problem_tag + "')");
    if (t.trace.records.empty())
      throw StructuralError("summarize: trace '" + t.label + "' has no records");
  }
  std::vector<std::string> order;
  for (const auto& t : traces)
    if (std::find(order.begin(), order.end(), t.label) == order.end())
      order.push_back(t.label);

  std::vector<SummarySeries> out;
  for (const auto& label : order) {
    std::vector<const RunTrace*> group;
    for (const auto& t : traces)
      if (t.label == label) group.push_back(&t.trace);
    std::uint64_t budget = std::numeric_limits<std::uint64_t>::max();
    for (const auto* t : group) budget = std::min(budget, t->records.back().grad_evals);

    // Running minimum of |grad f|^2 per trace.
    std::vector<std::vector<double>> gmin(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& r : group[i]->records) gmin[i].push_back(m = std::min(m, r.grad_norm_sq));
    }

    SummarySeries s;
    s.label = label;
    s.traces = group.size();
    std::vector<std::size_t> cursor(group.size(), 0);
    std::uint64_t prev = 0;
    bool first = true;
    for (const auto& grid : group.front()->records) {
      const std::uint64_t g = grid.grad_evals;
      if (g > budget) break;
      if (!first && g == prev) continue;
      first = false;
      prev = g;
      SummaryRow row;
      row.grad_evals = static_cast<double>(g);
      row.gn_min_lo = row.f_lo = std::numeric_limits<double>::infinity();
      row.gn_min_hi = row.f_hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < group.size(); ++i) {
        const auto& recs = group[i]->records;
        // Last record within the budget g; every trace starts at step 0.
        while (cursor[i] + 1 < recs.size() && recs[cursor[i] + 1].grad_evals <= g) ++cursor[i];
        const double gn = gmin[i][cursor[i]];
        const double f = recs[cursor[i]].f_value;
        row.gn_min_mean += gn;
        row.f_mean += f;
        row.gn_min_lo = std::min(row.gn_min_lo, gn);
        row.gn_min_hi = std::max(row.gn_min_hi, gn);
        row.f_lo = std::min(row.f_lo, f);
        row.f_hi = std::max(row.f_hi, f);
      }
      row.gn_min_mean /= static_cast<double>(group.size());
      row.f_mean /= static_cast<double>(group.size());
      s.rows.push_back(row);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const std::vector<SummarySeries>& series,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "label,traces,grad_evals,gn_min_mean,gn_min_lo,gn_min_hi,f_mean,f_lo,f_hi\n";
  for (const auto& s : series)
    for (const auto& r : s.rows)
      out << s.label << ',' << s.traces << ',' << fmt(r.grad_evals) << ','
          << fmt(r.gn_min_mean) << ',' << fmt(r.gn_min_lo) << ',' << fmt(r.gn_min_hi)
          << ',' << fmt(r.f_mean) << ',' << fmt(r.f_lo) << ',' << fmt(r.f_hi) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace rvr
