#ifndef RVR_PROBLEMS_HPP
#define RVR_PROBLEMS_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rvr/geometry.hpp"
#include "rvr/rng.hpp"

namespace rvr {

/// Problem constants. `n` is empty for online (expectation) problems.
struct ProblemMeta {
  std::optional<std::size_t> n;
  int d = 0;
  double L = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::optional<double> f_star;
  std::optional<Vec> x_star;
  // Rayleigh quotients: -x_star is an equally good optimizer.
  bool sign_symmetric_optimum = false;
};

/// A set of component indices (finite sums) or fresh draws (online problems;
/// one sample per column of `samples`, indexed by `indices`).
struct Batch {
  std::vector<std::size_t> indices;
  bool replacement = false;
  Mat samples;

  std::size_t size() const { return indices.size(); }
};

/// Oracle bundle for f(x) = (1/n) sum_i f_i(x) or f(x) = E f(x, xi).
///
/// Every call to a gradient method except `exact_gradient` is charged to an
/// internal evaluation counter: one unit per component gradient. The counter
/// exists so optimizers' own bookkeeping can be audited independently.
/// Instances are immutable after construction apart from that counter and
/// are shared through `std::shared_ptr<const Problem>`.
class Problem {
 public:
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
  virtual ~Problem() = default;

  const Manifold& manifold() const { return manifold_; }
  const ProblemMeta& meta() const { return meta_; }
  bool is_online() const { return !meta_.n.has_value(); }
  /// Component count; throws StructuralError for online problems.
  std::size_t n() const;
  /// Short fingerprint identifying the problem instance in traces.
  const std::string& tag() const { return tag_; }

  double value(const Point& x) const;
  double component_value(std::size_t i, const Point& x) const;

  TangentVector component_gradient(std::size_t i, const Point& x) const;
  /// Mean of the batch's component gradients. A without-replacement batch
  /// covering all n components is evaluated through the full-gradient path.
  TangentVector minibatch_gradient(const Batch& batch, const Point& x) const;
  /// Charged n evaluations. Not available for online problems.
  TangentVector full_gradient(const Point& x) const;
  /// Exact gradient of f for metrics. Never charged.
  TangentVector exact_gradient(const Point& x) const;

  /// Finite sums: `size` indices, without replacement unless requested.
  /// Online problems: `size` fresh draws from the distribution.
  Batch sample_batch(std::size_t size, Rng& rng, bool replacement = false) const;
  Batch full_batch() const;
  /// Validates index range, emptiness and distinctness.
  void check_batch(const Batch& batch) const;

  std::uint64_t gradient_evaluations() const { return evals_.load(); }
  void reset_gradient_evaluations() const { evals_.store(0); }

  /// Distance to the known optimizer (sign-invariant when the optimum is).
  std::optional<double> dist_to_opt(const Point& x) const;

 protected:
  Problem(Manifold manifold, ProblemMeta meta, std::string tag);

  virtual double do_component_value(std::size_t i, const Point& x) const = 0;
  virtual Vec do_component_ambient_gradient(std::size_t i,
                                            const Point& x) const = 0;
  /// Defaults to the component mean.
  virtual double do_value(const Point& x) const;
  virtual Vec do_full_ambient_gradient(const Point& x) const;
  /// Online problems override these three.
  virtual double do_sample_value(const Vec& sample, const Point& x) const;
  virtual Vec do_sample_ambient_gradient(const Vec& sample,
                                         const Point& x) const;
  virtual Mat do_draw_samples(std::size_t count, Rng& rng) const;

  void charge(std::uint64_t k) const { evals_.fetch_add(k); }
  void set_meta(ProblemMeta meta) { meta_ = std::move(meta); }

 private:
  friend class SubsetProblem;

  Manifold manifold_;
  ProblemMeta meta_;
  std::string tag_;
  mutable std::atomic<std::uint64_t> evals_{0};
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// One quadratic component f_i(x) = 1/2 (x - b)^T H (x - b).
struct QuadraticComponent {
  Mat H;
  Vec b;
};

/// Euclidean finite-sum quadratic. mu and L are measured from the data:
/// mu = lambda_min of the mean Hessian, L = largest component eigenvalue.
ProblemPtr make_quadratic_from(std::vector<QuadraticComponent> components);

/// Random mu-strongly convex quadratic on R^d with n components. The mean
/// Hessian has eigenvalues spread linearly over [mu, L]; each component
/// Hessian stays within [0, L] in the same eigenbasis. meta.mu/L are the
/// requested constants, x_star and f_star are stored.
ProblemPtr make_quadratic(std::size_t n, int d, double mu, double L,
                          std::uint64_t seed);

/// Leading-eigenvector problem f(x) = -x^T A x on the unit sphere, with
/// A = sum_i z_i z_i^T and f_i(x) = -n (z_i^T x)^2 so that f is their mean.
/// Samples are the columns of `samples` (d x n).
/// meta.L = 3 lambda_max(A); f_star = -lambda_max(A) when d <= 64.
ProblemPtr make_rayleigh(const Mat& samples);

/// Standard Gaussian samples, d x n, from `seed`.
Mat gaussian_samples(int d, std::size_t n, std::uint64_t seed);

/// Reads samples from CSV, one sample per row, and returns them as columns
/// (d x n). Throws IoError when unreadable, StructuralError on ragged rows.
Mat load_samples_csv(const std::string& path);

struct OnlineDistribution {
  enum class Kind { gaussian, atoms };
  Kind kind = Kind::gaussian;
  /// Gaussian: z = factor * w with w standard normal, so the covariance is
  /// factor * factor^T.
  Mat factor;
  /// Atoms: one column per atom, drawn uniformly.
  Mat atoms;

  static OnlineDistribution gaussian(Mat factor);
  static OnlineDistribution uniform_atoms(Mat atoms);
};

/// Online Rayleigh problem f(x) = E[-(z^T x)^2]. sigma is estimated by Monte
/// Carlo (1e4 draws at the first basis vector) from `seed`.
ProblemPtr make_online(const OnlineDistribution& dist, std::uint64_t seed);

/// Finite-sum restricted to a subset of another problem's components; the
/// local objective is the mean over that subset.
class SubsetProblem final : public Problem {
 public:
  SubsetProblem(ProblemPtr parent, std::vector<std::size_t> indices);
  const std::vector<std::size_t>& indices() const { return indices_; }

 protected:
  double do_component_value(std::size_t i, const Point& x) const override;
  Vec do_component_ambient_gradient(std::size_t i,
                                    const Point& x) const override;

 private:
  ProblemPtr parent_;
  std::vector<std::size_t> indices_;
};

/// Distinct indices drawn uniformly without replacement, sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng);

/// Uniformly random point on the manifold (sphere) or standard normal point.
Point random_point(const Manifold& m, Rng& rng);
/// Standard normal ambient vector projected onto T_x M.
TangentVector random_tangent(const Point& x, Rng& rng);

}  // namespace rvr

#endif  // RVR_PROBLEMS_HPP
