#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "rvr/errors.hpp"
#include "rvr/harness.hpp"

namespace rvr {

namespace fs = std::filesystem;

namespace {

std::optional<std::uint64_t> first_crossing(const RunTrace& t, double threshold) {
  for (const auto& r : t.records)
    if (std::sqrt(r.grad_norm_sq) <= threshold) return r.grad_evals;
  return std::nullopt;
}

void thin(RunTrace& t, std::uint64_t stride) {
  if (t.records.empty()) return;
  const std::uint64_t last = t.records.back().step;
  std::erase_if(t.records, [&](const TraceRecord& r) {
    return r.step % stride != 0 && r.step != last;
  });
}

nlohmann::ordered_json crossing_json(const std::optional<std::uint64_t>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string preset_config(const std::string& preset) {
  if (preset == "page-rayleigh")
    return "[experiment]\nseeds = 0-19\ntrace_stride = 10\nx0_seed = 7\n"
           "[problem]\ntype = rayleigh\nn = 100\nd = 10\nseed = 3\n"
           "[algorithm:page]\nmethod = rpage\nK = 2000\n"
           "[algorithm:gd]\nmethod = rgd\nK = 200\n";
  if (preset == "marina-quadratic")
    return "[experiment]\nseeds = 0-19\ntrace_stride = 10\nx0_seed = 7\n"
           "[problem]\ntype = quadratic\nn = 8\nd = 20\nmu = 0.1\nL = 1\nseed = 3\n"
           "workers = 8\n"
           "[algorithm:marina-rand5]\nmethod = rmarina\ncompressor = randk:5\nK = 4000\n"
           "[algorithm:marina-dense]\nmethod = rmarina\ncompressor = identity\nK = 1000\n";
  return {};
}

}  // namespace

std::size_t EigvCompareResult::wins() const {
  return static_cast<std::size_t>(std::count_if(
      seeds.begin(), seeds.end(), [](const auto& s) { return s.lsvrg_not_worse; }));
}

EigvCompareResult run_eigv_compare(const EigvCompareOptions& o) {
  if (o.trace_stride < 1 || o.file_stride < 1)
    throw ConfigError("eigv-compare: strides must be >= 1");
  const Mat Z = gaussian_samples(o.d, o.n, o.data_seed);
  const ProblemPtr problem = make_rayleigh(Z);

  EigvCompareResult res;
  res.eta = o.eta;
  if (res.eta == 0.0)
    res.eta = 1.0 / (4.0 * static_cast<double>(o.n) * Z.colwise().squaredNorm().maxCoeff());

  std::vector<std::uint64_t> seeds = o.seeds;
  if (seeds.empty())
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);

  res.seeds.resize(seeds.size());
  std::vector<std::pair<RunTrace, RunTrace>> runs(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      const std::uint64_t seed = seeds[i];
      Rng init = make_stream(seed, "init");
      const Point x0 = random_point(problem->manifold(), init);
      OptimizerConfig c;
      c.eta = res.eta;
      c.K = o.K;
      c.seed = seed;
      c.p = 1.0 / static_cast<double>(o.n);
      c.inner_loop_m = o.n;
      c.trace_stride = o.trace_stride;
      RunTrace a = rlsvrg_run(*problem, x0, c);
      RunTrace b = rsvrg_run(*problem, x0, c);
      EigvSeedResult& r = res.seeds[i];
      r.seed = seed;
      r.lsvrg_not_worse = true;
      for (double th : o.thresholds) {
        const auto ca = first_crossing(a, th);
        const auto cb = first_crossing(b, th);
        r.lsvrg_evals.push_back(ca);
        r.svrg_evals.push_back(cb);
        if (!ca || (cb && *ca > *cb)) r.lsvrg_not_worse = false;
      }
      thin(a, o.file_stride);
      thin(b, o.file_stride);
      runs[i] = {std::move(a), std::move(b)};
    }
  };
  const unsigned threads = std::min<unsigned>(thread_count(), seeds.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& [a, b] : runs) res.traces.push_back({"rlsvrg", std::move(a)});
  for (auto& [a, b] : runs) res.traces.push_back({"rsvrg", std::move(b)});
  return res;
}

std::string run_bench(const std::string& preset, const std::string& out,
                      const RunOverrides& overrides) {
  nlohmann::ordered_json report;
  report["preset"] = preset;

  if (preset == "eigv-compare") {
    EigvCompareOptions o;
    if (overrides.seed) o.seeds = {*overrides.seed};
    if (overrides.stride) o.file_stride = *overrides.stride;
    const auto res = run_eigv_compare(o);

    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    for (const auto& lt : res.traces) {
      const std::string stem = lt.label + "_seed" + std::to_string(lt.trace.seed);
      write_trace_csv(lt.trace, (dir / (stem + ".csv")).string());
      write_trace_sidecar(lt.trace, lt.label, nullptr, (dir / (stem + ".json")).string());
    }
    write_summary_csv(summarize(res.traces), (dir / "summary.csv").string());

    std::ofstream cross(dir / "crossings.csv", std::ios::trunc);
    if (!cross) throw IoError("cannot write crossings.csv");
    cross << "seed,threshold,rlsvrg_grad_evals,rsvrg_grad_evals\n";
    for (const auto& s : res.seeds)
      for (std::size_t k = 0; k < o.thresholds.size(); ++k) {
        cross << s.seed << ',' << o.thresholds[k] << ',';
        if (s.lsvrg_evals[k]) cross << *s.lsvrg_evals[k];
        cross << ',';
        if (s.svrg_evals[k]) cross << *s.svrg_evals[k];
        cross << '\n';
      }

    report["eta"] = res.eta;
    report["K"] = o.K;
    report["thresholds"] = o.thresholds;
    report["wins"] = res.wins();
    report["seeds_run"] = res.seeds.size();
    auto& per = report["seeds"] = nlohmann::ordered_json::array();
    for (const auto& s : res.seeds) {
      nlohmann::ordered_json e;
      e["seed"] = s.seed;
      e["rlsvrg"] = nlohmann::ordered_json::array();
      e["rsvrg"] = nlohmann::ordered_json::array();
      for (const auto& v : s.lsvrg_evals) e["rlsvrg"].push_back(crossing_json(v));
      for (const auto& v : s.svrg_evals) e["rsvrg"].push_back(crossing_json(v));
      e["rlsvrg_not_worse"] = s.lsvrg_not_worse;
      per.push_back(e);
    }
    report["out"] = dir.string();
    return report.dump(2);
  }

  const std::string text = preset_config(preset);
  if (text.empty()) throw ConfigError("unknown bench preset '" + preset + "'");
  RunOverrides ov = overrides;
  ov.out = out;
  const auto paths = run_experiment(parse_config(text, "preset:" + preset), ov);
  report["traces"] = paths;
  report["out"] = out;
  return report.dump(2);
}

}  // namespace rvr
