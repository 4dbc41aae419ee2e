#ifndef RVR_HARNESS_HPP
#define RVR_HARNESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvr/optimizers.hpp"
#include "rvr/problems.hpp"

namespace rvr {

inline constexpr const char* kVersion = "0.1.0";

// ------------------------------------------------------------------ config

/// Parsed experiment file. Sections:
///   [experiment]        seeds, out, trace_stride, threads, x0_seed
///   [problem]           type and its parameters
///   [algorithm:<label>] method and hyperparameters ("auto" where allowed)
/// Values stay as strings until the run resolves them against the problem.
struct ExperimentConfig {
  std::map<std::string, std::string> experiment;
  std::map<std::string, std::string> problem;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> algorithms;
  std::string source;
};

/// Reads and schema-checks a config. Unknown sections or keys raise
/// ConfigError naming the key, as does an unreadable file.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Command-line overrides applied on top of the file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> stride;
};

/// Seeds from "0-19", "1,2,5" or a single number.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

ProblemPtr build_problem(const std::map<std::string, std::string>& spec);

/// Runs every (algorithm, seed) pair, writes <out>/<label>_seed<k>.csv plus a
/// .json sidecar each, and <out>/summary.csv. Returns the trace paths.
std::vector<std::string> run_experiment(const ExperimentConfig& config,
                                        const RunOverrides& overrides = {});

/// One labelled run, resolved but not written.
struct LabelledTrace {
  std::string label;
  RunTrace trace;
};
std::vector<LabelledTrace> execute_experiment(const ExperimentConfig& config,
                                              const RunOverrides& overrides = {});

// ------------------------------------------------------------------ traces

void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);
/// Sidecar with config echo, seed, library version and runtime.
void write_trace_sidecar(const RunTrace& trace, const std::string& label,
                         const ExperimentConfig* config, const std::string& path);

// ----------------------------------------------------------------- summary

struct SummaryRow {
  double grad_evals = 0.0;
  double gn_min_mean = 0.0, gn_min_lo = 0.0, gn_min_hi = 0.0;
  double f_mean = 0.0, f_lo = 0.0, f_hi = 0.0;
};

struct SummarySeries {
  std::string label;
  std::size_t traces = 0;
  std::vector<SummaryRow> rows;
};

/// Aligns the traces of each label on the gradient-evaluation grid of its
/// first trace, up to the smallest final budget, and reports mean, min and
/// max of the running-min |grad f|^2 and of f. Traces of different problems
/// raise StructuralError.
std::vector<SummarySeries> summarize(const std::vector<LabelledTrace>& traces);
void write_summary_csv(const std::vector<SummarySeries>& series,
                       const std::string& path);

// ------------------------------------------------------------------ verify

struct VerifyCheck {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool pass() const;
  std::string to_json() const;
};

/// Suites: geometry, problems, optimizers, compression, distributed,
/// oracles, all.
VerifyReport run_verify(const std::string& suite);

// ------------------------------------------------------------------- bench

/// Threshold crossings of one seed in the eigenvector comparison: first
/// recorded gradient-evaluation count with |grad f| <= threshold.
struct EigvSeedResult {
  std::uint64_t seed = 0;
  std::vector<std::optional<std::uint64_t>> lsvrg_evals;
  std::vector<std::optional<std::uint64_t>> svrg_evals;
  /// R-LSVRG reached every threshold, each no later than R-SVRG.
  bool lsvrg_not_worse = false;
};

struct EigvCompareOptions {
  int d = 50;
  std::size_t n = 500;
  std::uint64_t data_seed = 1;
  std::vector<std::uint64_t> seeds;  // empty means 0..19
  std::uint64_t K = 500000;
  /// Metric stride while running; crossings are read at this resolution.
  std::uint64_t trace_stride = 10;
  /// Stride of the records kept in the result and written to disk.
  std::uint64_t file_stride = 50;
  std::vector<double> thresholds = {1e-2, 1e-4, 1e-6};
  /// Shared stepsize; 0 means 1 / (4 n max_i |z_i|^2).
  double eta = 0.0;
};

struct EigvCompareResult {
  double eta = 0.0;
  std::vector<EigvSeedResult> seeds;
  std::vector<LabelledTrace> traces;
  std::size_t wins() const;
};

/// R-LSVRG (p = 1/n) against R-SVRG (inner loop n) at one shared stepsize on
/// the Rayleigh problem with standard Gaussian samples.
EigvCompareResult run_eigv_compare(const EigvCompareOptions& options);

/// Presets: eigv-compare, page-rayleigh, marina-quadratic. Writes traces and
/// a summary under `out`; returns a JSON report.
std::string run_bench(const std::string& preset, const std::string& out,
                      const RunOverrides& overrides = {});

/// Worker count from RVR_THREADS, else the hardware concurrency.
unsigned thread_count();

}  // namespace rvr

#endif  // RVR_HARNESS_HPP
