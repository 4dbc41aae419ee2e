#include "rvr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "rvr/errors.hpp"

namespace rvr {

namespace {

std::string hash_hex(const Mat& data) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t count = static_cast<std::size_t>(data.size()) * sizeof(double);
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Vec standard_normal(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vec v(d);
  for (int j = 0; j < d; ++j) v(j) = normal(rng);
  return v;
}

struct TopEigen {
  double lambda_max = 0.0;
  std::optional<Vec> vector;
};

constexpr int kDenseEigenLimit = 64;

TopEigen top_eigen(const Mat& A) {
  TopEigen out;
  if (A.rows() <= kDenseEigenLimit) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    out.lambda_max = es.eigenvalues()(A.rows() - 1);
    out.vector = es.eigenvectors().col(A.rows() - 1);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    out.lambda_max = es.eigenvalues()(A.rows() - 1);
  }
  return out;
}

// ---------------------------------------------------------------- quadratic

class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::vector<QuadraticComponent> comps, ProblemMeta meta,
                   Mat mean_hessian, Vec linear, double offset, std::string tag)
      : Problem(Manifold::euclidean(meta.d), std::move(meta), std::move(tag)),
        comps_(std::move(comps)),
        mean_hessian_(std::move(mean_hessian)),
        linear_(std::move(linear)),
        offset_(offset) {}

  void finalize_meta(ProblemMeta meta) { set_meta(std::move(meta)); }

  double evaluate(const Vec& x) const {
    return 0.5 * x.dot(mean_hessian_ * x) - linear_.dot(x) + offset_;
  }
  Vec gradient(const Vec& x) const { return mean_hessian_ * x - linear_; }

 protected:
  double do_component_value(std::size_t i, const Point& x) const override {
    const Vec r = x.coords() - comps_[i].b;
    return 0.5 * r.dot(comps_[i].H * r);
  }
  Vec do_component_ambient_gradient(std::size_t i,
                                    const Point& x) const override {
    return comps_[i].H * (x.coords() - comps_[i].b);
  }
  double do_value(const Point& x) const override { return evaluate(x.coords()); }
  Vec do_full_ambient_gradient(const Point& x) const override {
    return gradient(x.coords());
  }

 private:
  std::vector<QuadraticComponent> comps_;
  Mat mean_hessian_;
  Vec linear_;
  double offset_;
};

ProblemPtr build_quadratic(std::vector<QuadraticComponent> comps,
                           std::optional<std::pair<double, double>> constants,
                           std::string tag) {
  if (comps.empty()) throw StructuralError("quadratic: no components");
  const auto d = comps.front().b.size();
  if (d < 1) throw StructuralError("quadratic: empty dimension");
  Mat Hbar = Mat::Zero(d, d);
  Vec c = Vec::Zero(d);
  double offset = 0.0;
  double L = 0.0;
  for (const auto& comp : comps) {
    if (comp.b.size() != d || comp.H.rows() != d || comp.H.cols() != d)
      throw StructuralError("quadratic: inconsistent component dimensions");
    Hbar += comp.H;
    const Vec Hb = comp.H * comp.b;
    c += Hb;
    offset += 0.5 * comp.b.dot(Hb);
    if (!constants) {
      Eigen::SelfAdjointEigenSolver<Mat> es(comp.H, Eigen::EigenvaluesOnly);
      L = std::max(L, es.eigenvalues()(d - 1));
    }
  }
  const double inv_n = 1.0 / static_cast<double>(comps.size());
  Hbar *= inv_n;
  c *= inv_n;
  offset *= inv_n;

  ProblemMeta meta;
  meta.n = comps.size();
  meta.d = static_cast<int>(d);
  if (constants) {
    meta.mu = constants->first;
    meta.L = constants->second;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(Hbar, Eigen::EigenvaluesOnly);
    meta.mu = std::max(0.0, es.eigenvalues()(0));
    meta.L = L;
  }
  if (!(meta.L > 0.0)) throw ConfigError("quadratic: all Hessians vanish");
  if (meta.mu > 0.0) meta.x_star = Vec(Hbar.ldlt().solve(c));

  auto problem = std::make_shared<QuadraticProblem>(
      std::move(comps), meta, std::move(Hbar), std::move(c), offset,
      std::move(tag));
  if (meta.x_star) {
    meta.f_star = problem->evaluate(*meta.x_star);
    // f_star is evaluated on the same path as value(), so value(x_star)
    // reproduces it bit for bit.
    problem->finalize_meta(meta);
  }
  return problem;
}

// ----------------------------------------------------------------- rayleigh

class RayleighProblem final : public Problem {
 public:
  RayleighProblem(Mat samples, Mat A, ProblemMeta meta, std::string tag)
      : Problem(Manifold::sphere(meta.d), std::move(meta), std::move(tag)),
        samples_(std::move(samples)),
        A_(std::move(A)),
        scale_(static_cast<double>(samples_.cols())) {}

 protected:
  double do_component_value(std::size_t i, const Point& x) const override {
    const double s = samples_.col(static_cast<Eigen::Index>(i)).dot(x.coords());
    return -scale_ * s * s;
  }
  Vec do_component_ambient_gradient(std::size_t i,
                                    const Point& x) const override {
    const auto z = samples_.col(static_cast<Eigen::Index>(i));
    return (-2.0 * scale_ * z.dot(x.coords())) * z;
  }
  double do_value(const Point& x) const override {
    return -x.coords().dot(A_ * x.coords());
  }
  Vec do_full_ambient_gradient(const Point& x) const override {
    return -2.0 * (A_ * x.coords());
  }

 private:
  Mat samples_;
  Mat A_;
  double scale_;
};

// ------------------------------------------------------------------- online

class OnlineRayleighProblem final : public Problem {
 public:
  OnlineRayleighProblem(OnlineDistribution dist, Mat cov, ProblemMeta meta,
                        std::string tag)
      : Problem(Manifold::sphere(meta.d), std::move(meta), std::move(tag)),
        dist_(std::move(dist)),
        cov_(std::move(cov)) {}

  void finalize_meta(ProblemMeta meta) { set_meta(std::move(meta)); }

  Vec sample_gradient(const Vec& z, const Vec& x) const {
    return (-2.0 * z.dot(x)) * z;
  }

 protected:
  double do_component_value(std::size_t, const Point&) const override {
    throw StructuralError("online problems have no indexed components");
  }
  Vec do_component_ambient_gradient(std::size_t, const Point&) const override {
    throw StructuralError("online problems have no indexed components");
  }
  double do_value(const Point& x) const override {
    if (dist_.kind == OnlineDistribution::Kind::gaussian)
      return -x.coords().dot(cov_ * x.coords());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < dist_.atoms.cols(); ++j)
      acc += do_sample_value(dist_.atoms.col(j), x);
    return acc / static_cast<double>(dist_.atoms.cols());
  }
  Vec do_full_ambient_gradient(const Point& x) const override {
    if (dist_.kind == OnlineDistribution::Kind::gaussian)
      return -2.0 * (cov_ * x.coords());
    Vec acc = Vec::Zero(x.dim());
    for (Eigen::Index j = 0; j < dist_.atoms.cols(); ++j)
      acc += sample_gradient(dist_.atoms.col(j), x.coords());
    return acc / static_cast<double>(dist_.atoms.cols());
  }
  double do_sample_value(const Vec& z, const Point& x) const override {
    const double s = z.dot(x.coords());
    return -s * s;
  }
  Vec do_sample_ambient_gradient(const Vec& z, const Point& x) const override {
    return sample_gradient(z, x.coords());
  }
  Mat do_draw_samples(std::size_t count, Rng& rng) const override {
    const auto d = static_cast<Eigen::Index>(meta().d);
    Mat out(d, static_cast<Eigen::Index>(count));
    if (dist_.kind == OnlineDistribution::Kind::gaussian) {
      for (std::size_t j = 0; j < count; ++j)
        out.col(static_cast<Eigen::Index>(j)) =
            dist_.factor * standard_normal(static_cast<int>(dist_.factor.cols()), rng);
    } else {
      std::uniform_int_distribution<Eigen::Index> pick(0, dist_.atoms.cols() - 1);
      for (std::size_t j = 0; j < count; ++j)
        out.col(static_cast<Eigen::Index>(j)) = dist_.atoms.col(pick(rng));
    }
    return out;
  }

 private:
  OnlineDistribution dist_;
  Mat cov_;
};

}  // namespace

// ------------------------------------------------------------------ Problem

Problem::Problem(Manifold manifold, ProblemMeta meta, std::string tag)
    : manifold_(manifold), meta_(std::move(meta)), tag_(std::move(tag)) {
  if (!(meta_.L > 0.0)) throw ConfigError("problem: L must be positive");
  if (meta_.mu < 0.0 || meta_.mu > meta_.L)
    throw ConfigError("problem: need 0 <= mu <= L");
  if (meta_.sigma < 0.0) throw ConfigError("problem: sigma must be >= 0");
}

std::size_t Problem::n() const {
  if (!meta_.n) throw StructuralError("online problem has no component count");
  return *meta_.n;
}

double Problem::value(const Point& x) const {
  if (!(x.manifold() == manifold_))
    throw StructuralError("value: point is on a different manifold");
  return do_value(x);
}

double Problem::component_value(std::size_t i, const Point& x) const {
  if (i >= n()) throw StructuralError("component index out of range");
  return do_component_value(i, x);
}

TangentVector Problem::component_gradient(std::size_t i,
                                          const Point& x) const {
  if (!(x.manifold() == manifold_))
    throw StructuralError("gradient: point is on a different manifold");
  if (i >= n()) throw StructuralError("component index out of range");
  charge(1);
  return project_tangent(x, do_component_ambient_gradient(i, x));
}

void Problem::check_batch(const Batch& batch) const {
  if (batch.indices.empty()) throw StructuralError("empty batch");
  if (is_online()) {
    if (batch.samples.cols() != static_cast<Eigen::Index>(batch.size()) ||
        batch.samples.rows() != meta_.d)
      throw StructuralError("online batch does not carry its samples");
    for (auto i : batch.indices)
      if (i >= batch.size()) throw StructuralError("batch index out of range");
    return;
  }
  const std::size_t count = n();
  for (auto i : batch.indices)
    if (i >= count) throw StructuralError("batch index out of range");
  if (!batch.replacement) {
    std::unordered_set<std::size_t> seen(batch.indices.begin(),
                                         batch.indices.end());
    if (seen.size() != batch.indices.size())
      throw StructuralError("batch without replacement repeats an index");
  }
}

TangentVector Problem::minibatch_gradient(const Batch& batch,
                                          const Point& x) const {
  if (!(x.manifold() == manifold_))
    throw StructuralError("gradient: point is on a different manifold");
  check_batch(batch);
  if (!is_online() && !batch.replacement && batch.size() == n()) {
    charge(batch.size());
    return project_tangent(x, do_full_ambient_gradient(x));
  }
  Vec acc = Vec::Zero(meta_.d);
  if (is_online()) {
    for (auto i : batch.indices)
      acc += do_sample_ambient_gradient(batch.samples.col(static_cast<Eigen::Index>(i)), x);
  } else {
    for (auto i : batch.indices) acc += do_component_ambient_gradient(i, x);
  }
  charge(batch.size());
  if (batch.size() > 1) acc /= static_cast<double>(batch.size());
  return project_tangent(x, acc);
}

TangentVector Problem::full_gradient(const Point& x) const {
  if (!(x.manifold() == manifold_))
    throw StructuralError("gradient: point is on a different manifold");
  const std::size_t count = n();
  charge(count);
  return project_tangent(x, do_full_ambient_gradient(x));
}

TangentVector Problem::exact_gradient(const Point& x) const {
  if (!(x.manifold() == manifold_))
    throw StructuralError("gradient: point is on a different manifold");
  return project_tangent(x, do_full_ambient_gradient(x));
}

Batch Problem::sample_batch(std::size_t size, Rng& rng,
                            bool replacement) const {
  if (size == 0) throw StructuralError("empty batch");
  Batch batch;
  batch.replacement = replacement;
  if (is_online()) {
    batch.replacement = true;
    batch.indices.resize(size);
    for (std::size_t j = 0; j < size; ++j) batch.indices[j] = j;
    batch.samples = do_draw_samples(size, rng);
    return batch;
  }
  const std::size_t count = n();
  if (replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    batch.indices.resize(size);
    for (auto& i : batch.indices) i = pick(rng);
  } else {
    if (size > count)
      throw ConfigError("batch larger than the number of components");
    batch.indices = sample_without_replacement(count, size, rng);
  }
  return batch;
}

Batch Problem::full_batch() const {
  Batch batch;
  batch.indices.resize(n());
  for (std::size_t i = 0; i < batch.indices.size(); ++i) batch.indices[i] = i;
  return batch;
}

std::optional<double> Problem::dist_to_opt(const Point& x) const {
  if (!meta_.x_star) return std::nullopt;
  const Point star(manifold_, *meta_.x_star);
  double d = dist(x, star);
  if (meta_.sign_symmetric_optimum)
    d = std::min(d, dist(x, Point(manifold_, -*meta_.x_star)));
  return d;
}

double Problem::do_value(const Point& x) const {
  const std::size_t count = n();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += do_component_value(i, x);
  return acc / static_cast<double>(count);
}

Vec Problem::do_full_ambient_gradient(const Point& x) const {
  const std::size_t count = n();
  Vec acc = Vec::Zero(meta_.d);
  for (std::size_t i = 0; i < count; ++i)
    acc += do_component_ambient_gradient(i, x);
  if (count > 1) acc /= static_cast<double>(count);
  return acc;
}

double Problem::do_sample_value(const Vec&, const Point&) const {
  throw StructuralError("finite-sum problems do not draw samples");
}

Vec Problem::do_sample_ambient_gradient(const Vec&, const Point&) const {
  throw StructuralError("finite-sum problems do not draw samples");
}

Mat Problem::do_draw_samples(std::size_t, Rng&) const {
  throw StructuralError("finite-sum problems do not draw samples");
}

// ---------------------------------------------------------------- factories

ProblemPtr make_quadratic_from(std::vector<QuadraticComponent> components) {
  std::ostringstream tag;
  std::uint64_t h = 0;
  for (const auto& c : components) {
    h = h * 31 + std::hash<std::string>{}(hash_hex(c.H) + hash_hex(c.b));
  }
  tag << "quadratic:n=" << components.size() << ":h=" << std::hex << h;
  return build_quadratic(std::move(components), std::nullopt, tag.str());
}

ProblemPtr make_quadratic(std::size_t n, int d, double mu, double L,
                          std::uint64_t seed) {
  if (n == 0 || d < 1) throw ConfigError("quadratic: need n >= 1 and d >= 1");
  if (!(mu > 0.0) || mu > L)
    throw ConfigError("quadratic: need 0 < mu <= L");
  Rng rng = make_stream(seed, "quadratic");

  Mat gauss(d, d);
  for (int i = 0; i < d; ++i) gauss.col(i) = standard_normal(d, rng);
  const Mat Q = Eigen::HouseholderQR<Mat>(gauss).householderQ();

  Vec lambda(d);
  for (int j = 0; j < d; ++j)
    lambda(j) = d == 1 ? mu : mu + (L - mu) * j / static_cast<double>(d - 1);

  // Per-component spectra: lambda + r_j * eps_ij with eps centred over i and
  // |eps| <= 1, so the mean Hessian is exactly Q diag(lambda) Q^T and every
  // component eigenvalue stays in [0, L].
  Mat eps = Mat::Zero(static_cast<Eigen::Index>(n), d);
  if (n > 1) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) eps(static_cast<Eigen::Index>(i), j) = unif(rng);
      eps.col(j).array() -= eps.col(j).mean();
      const double peak = eps.col(j).cwiseAbs().maxCoeff();
      if (peak > 1.0) eps.col(j) /= peak;
    }
  }

  std::vector<QuadraticComponent> comps(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec spectrum(d);
    for (int j = 0; j < d; ++j) {
      const double room = 0.95 * std::min(lambda(j), L - lambda(j));
      spectrum(j) = lambda(j) + room * eps(static_cast<Eigen::Index>(i), j);
    }
    Mat H = Q * spectrum.asDiagonal() * Q.transpose();
    comps[i].H = 0.5 * (H + H.transpose());
    comps[i].b = standard_normal(d, rng);
  }
  std::ostringstream tag;
  tag << "quadratic:n=" << n << ":d=" << d << ":mu=" << mu << ":L=" << L
      << ":seed=" << seed;
  return build_quadratic(std::move(comps), std::make_pair(mu, L), tag.str());
}

ProblemPtr make_rayleigh(const Mat& samples) {
  if (samples.cols() < 1) throw StructuralError("rayleigh: need n >= 1 samples");
  if (samples.rows() < 2) throw StructuralError("rayleigh: need d >= 2");
  if (!samples.allFinite()) throw StructuralError("rayleigh: non-finite sample");
  Mat A = samples * samples.transpose();
  A = 0.5 * (A + A.transpose());
  const TopEigen top = top_eigen(A);
  if (!(top.lambda_max > 0.0)) throw ConfigError("rayleigh: all samples are zero");

  ProblemMeta meta;
  meta.n = static_cast<std::size_t>(samples.cols());
  meta.d = static_cast<int>(samples.rows());
  meta.L = 3.0 * top.lambda_max;
  if (top.vector) {
    meta.f_star = -top.lambda_max;
    meta.x_star = top.vector->normalized();
    meta.sign_symmetric_optimum = true;
  }
  std::ostringstream tag;
  tag << "rayleigh:n=" << samples.cols() << ":d=" << samples.rows()
      << ":h=" << hash_hex(samples);
  return std::make_shared<RayleighProblem>(samples, std::move(A), meta, tag.str());
}

Mat gaussian_samples(int d, std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, "rayleigh-samples");
  Mat Z(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    Z.col(static_cast<Eigen::Index>(i)) = standard_normal(d, rng);
  return Z;
}

Mat load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw StructuralError("sample file " + path + ": bad number on line " +
                              std::to_string(line_no));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw StructuralError("sample file " + path + ": ragged row on line " +
                            std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw StructuralError("sample file " + path + " is empty");
  Mat Z(static_cast<Eigen::Index>(rows.front().size()),
        static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      Z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[i][j];
  return Z;
}

OnlineDistribution OnlineDistribution::gaussian(Mat factor) {
  OnlineDistribution d;
  d.kind = Kind::gaussian;
  d.factor = std::move(factor);
  return d;
}

OnlineDistribution OnlineDistribution::uniform_atoms(Mat atoms) {
  OnlineDistribution d;
  d.kind = Kind::atoms;
  d.atoms = std::move(atoms);
  return d;
}

ProblemPtr make_online(const OnlineDistribution& dist, std::uint64_t seed) {
  Mat cov;
  int d = 0;
  if (dist.kind == OnlineDistribution::Kind::gaussian) {
    if (dist.factor.rows() < 2 || dist.factor.cols() < 1)
      throw StructuralError("online: gaussian factor must be d x m with d >= 2");
    d = static_cast<int>(dist.factor.rows());
    cov = dist.factor * dist.factor.transpose();
  } else {
    if (dist.atoms.rows() < 2 || dist.atoms.cols() < 1)
      throw StructuralError("online: need at least one atom of dimension >= 2");
    d = static_cast<int>(dist.atoms.rows());
    cov = dist.atoms * dist.atoms.transpose() /
          static_cast<double>(dist.atoms.cols());
  }
  cov = 0.5 * (cov + cov.transpose());
  const TopEigen top = top_eigen(cov);
  if (!(top.lambda_max > 0.0)) throw ConfigError("online: degenerate distribution");

  ProblemMeta meta;
  meta.d = d;
  meta.L = 3.0 * top.lambda_max;
  if (top.vector) {
    meta.f_star = -top.lambda_max;
    meta.x_star = top.vector->normalized();
    meta.sign_symmetric_optimum = true;
  }
  std::ostringstream tag;
  tag << "online:d=" << d << ":h="
      << hash_hex(dist.kind == OnlineDistribution::Kind::gaussian ? dist.factor
                                                                  : dist.atoms)
      << ":seed=" << seed;
  auto problem = std::make_shared<OnlineRayleighProblem>(dist, cov, meta, tag.str());

  // Monte-Carlo estimate of sigma^2 = E|grad f(x, xi) - grad f(x)|^2.
  constexpr std::size_t kDraws = 10000;
  Rng rng = make_stream(seed, "online-sigma");
  const Point ref(Manifold::sphere(d), Vec::Unit(d, 0));
  const Vec exact = problem->exact_gradient(ref).coords();
  Batch one = problem->sample_batch(kDraws, rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < kDraws; ++j) {
    const Vec g = project_tangent(
        ref, problem->sample_gradient(one.samples.col(static_cast<Eigen::Index>(j)),
                                      ref.coords())).coords();
    acc += (g - exact).squaredNorm();
  }
  meta.sigma = std::sqrt(acc / static_cast<double>(kDraws));
  problem->finalize_meta(meta);
  return problem;
}

// ----------------------------------------------------------------- subsets

namespace {

ProblemMeta subset_meta(const ProblemPtr& parent,
                        const std::vector<std::size_t>& indices) {
  if (!parent) throw StructuralError("subset: null parent");
  if (indices.empty()) throw StructuralError("subset: empty index set");
  const std::size_t count = parent->n();
  std::unordered_set<std::size_t> seen;
  for (auto i : indices) {
    if (i >= count) throw StructuralError("subset: index out of range");
    if (!seen.insert(i).second) throw StructuralError("subset: repeated index");
  }
  ProblemMeta meta;
  meta.n = indices.size();
  meta.d = parent->meta().d;
  meta.L = parent->meta().L;
  return meta;
}

std::string subset_tag(const ProblemPtr& parent,
                       const std::vector<std::size_t>& indices) {
  std::ostringstream os;
  os << parent->tag() << "[";
  for (std::size_t k = 0; k < indices.size(); ++k)
    os << (k ? "," : "") << indices[k];
  os << "]";
  return os.str();
}

}  // namespace

SubsetProblem::SubsetProblem(ProblemPtr parent, std::vector<std::size_t> indices)
    : Problem(parent ? parent->manifold() : Manifold::euclidean(1),
              subset_meta(parent, indices), subset_tag(parent, indices)),
      parent_(std::move(parent)),
      indices_(std::move(indices)) {}

double SubsetProblem::do_component_value(std::size_t i, const Point& x) const {
  return parent_->do_component_value(indices_[i], x);
}

Vec SubsetProblem::do_component_ambient_gradient(std::size_t i,
                                                 const Point& x) const {
  return parent_->do_component_ambient_gradient(indices_[i], x);
}

// ------------------------------------------------------------------ helpers

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng) {
  if (k > n) throw ConfigError("cannot draw more indices than components");
  // Floyd's algorithm: k draws, no O(n) scratch.
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Point random_point(const Manifold& m, Rng& rng) {
  Vec v = standard_normal(m.ambient_dim(), rng);
  if (m.is_sphere()) return Point::normalized(m, v);
  return Point(m, std::move(v));
}

TangentVector random_tangent(const Point& x, Rng& rng) {
  return project_tangent(x, standard_normal(x.dim(), rng));
}

}  // namespace rvr
