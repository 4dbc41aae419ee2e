#include "rvr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rvr/errors.hpp"

namespace rvr {

namespace {

constexpr double kUnitNormTol = 1e-12;
constexpr double kAntipodalMargin = 1e-9;

void require_dim(const Manifold& m, const Vec& v, const char* what) {
  if (v.size() != m.ambient_dim()) {
    std::ostringstream os;
    os << what << ": expected " << m.ambient_dim() << " coordinates, got "
       << v.size();
    throw StructuralError(os.str());
  }
}

}  // namespace

Manifold Manifold::sphere(int ambient_dim) {
  if (ambient_dim < 2)
    throw StructuralError("sphere needs ambient dimension >= 2");
  return {ManifoldKind::sphere, ambient_dim};
}

Manifold Manifold::euclidean(int dim) {
  if (dim < 1) throw StructuralError("euclidean space needs dimension >= 1");
  return {ManifoldKind::euclidean, dim};
}

std::string Manifold::describe() const {
  std::ostringstream os;
  if (is_sphere())
    os << "sphere(" << dim_ << ")";
  else
    os << "euclidean(" << dim_ << ")";
  return os.str();
}

Point::Point(Manifold manifold, Vec coords)
    : manifold_(manifold), coords_(std::move(coords)) {
  require_dim(manifold_, coords_, "point");
  if (manifold_.is_sphere() &&
      std::abs(coords_.norm() - 1.0) > kUnitNormTol)
    throw DomainError("point is not on the unit sphere");
}

Point Point::normalized(Manifold manifold, const Vec& coords) {
  if (!manifold.is_sphere()) return Point(manifold, coords);
  const double n = coords.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw DomainError("cannot normalize a zero or non-finite vector");
  return Point(manifold, coords / n);
}

bool Point::same_as(const Point& other) const {
  return manifold_ == other.manifold_ && coords_ == other.coords_;
}

TangentVector::TangentVector(Point base_point, Vec v)
    : base_(std::move(base_point)), coords_(std::move(v)) {
  require_dim(base_.manifold(), coords_, "tangent vector");
}

TangentVector TangentVector::zero(const Point& base_point) {
  return {base_point, Vec::Zero(base_point.dim())};
}

bool TangentVector::is_tangent(double tol) const {
  if (!base_.manifold().is_sphere()) return true;
  return std::abs(base_.coords().dot(coords_)) <=
         tol * std::max(1.0, coords_.norm());
}

TangentVector TangentVector::operator-() const { return {base_, -coords_}; }

TangentVector& TangentVector::operator+=(const TangentVector& other) {
  require_based_at(other, base_, "tangent addition");
  coords_ += other.coords_;
  return *this;
}

TangentVector& TangentVector::operator-=(const TangentVector& other) {
  require_based_at(other, base_, "tangent subtraction");
  coords_ -= other.coords_;
  return *this;
}

TangentVector& TangentVector::operator*=(double s) {
  coords_ *= s;
  return *this;
}

TangentVector operator+(TangentVector a, const TangentVector& b) {
  a += b;
  return a;
}

TangentVector operator-(TangentVector a, const TangentVector& b) {
  a -= b;
  return a;
}

TangentVector operator*(double s, TangentVector v) {
  v *= s;
  return v;
}

void require_same_manifold(const Point& x, const Point& y, const char* what) {
  if (!(x.manifold() == y.manifold())) {
    std::ostringstream os;
    os << what << ": points live on " << x.manifold().describe() << " and "
       << y.manifold().describe();
    throw StructuralError(os.str());
  }
}

void require_based_at(const TangentVector& v, const Point& x,
                      const char* what) {
  if (!v.base().same_as(x)) {
    std::ostringstream os;
    os << what << ": tangent vector is not based at the given point";
    throw StructuralError(os.str());
  }
}

Point exp(const Point& x, const TangentVector& v) {
  require_based_at(v, x, "exp");
  if (!x.manifold().is_sphere()) return Point(x.manifold(), x.coords() + v.coords());
  const double t = v.norm();
  if (t == 0.0) return x;
  const Vec moved = std::cos(t) * x.coords() + (std::sin(t) / t) * v.coords();
  return Point::normalized(x.manifold(), moved);
}

TangentVector log(const Point& x, const Point& y) {
  require_same_manifold(x, y, "log");
  if (!x.manifold().is_sphere()) return {x, y.coords() - x.coords()};
  if (x.same_as(y)) return TangentVector::zero(x);
  const double c = x.coords().dot(y.coords());
  if (c <= -1.0 + kAntipodalMargin)
    throw DomainError("log: antipodal points have no unique geodesic");
  Vec u = y.coords() - c * x.coords();
  const double s = u.norm();
  if (s == 0.0) return TangentVector::zero(x);
  const double theta = std::atan2(s, c);
  u *= theta / s;
  return {x, std::move(u)};
}

TangentVector transport(const Point& x, const Point& y,
                        const TangentVector& v) {
  require_same_manifold(x, y, "transport");
  require_based_at(v, x, "transport");
  if (!x.manifold().is_sphere() || x.same_as(y)) return {y, v.coords()};
  const TangentVector u = log(x, y);
  const double theta = u.norm();
  if (theta == 0.0) return {y, v.coords()};
  const Vec e = u.coords() / theta;
  const double a = e.dot(v.coords());
  Vec out = v.coords() + ((std::cos(theta) - 1.0) * a) * e -
            (std::sin(theta) * a) * x.coords();
  return {y, std::move(out)};
}

double inner(const Point& x, const TangentVector& u, const TangentVector& v) {
  require_based_at(u, x, "inner");
  require_based_at(v, x, "inner");
  return u.coords().dot(v.coords());
}

double dist(const Point& x, const Point& y) {
  require_same_manifold(x, y, "dist");
  const double chord = (x.coords() - y.coords()).norm();
  if (!x.manifold().is_sphere()) return chord;
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

TangentVector project_tangent(const Point& x, const Vec& ambient) {
  require_dim(x.manifold(), ambient, "project_tangent");
  if (!x.manifold().is_sphere()) return {x, ambient};
  return {x, ambient - x.coords().dot(ambient) * x.coords()};
}

double zeta(double kappa_min, double diameter) {
  if (!(diameter > 0.0)) throw ConfigError("zeta: diameter must be positive");
  if (kappa_min >= 0.0) return 1.0;
  const double s = std::sqrt(std::abs(kappa_min)) * diameter;
  if (s < 1e-8) return 1.0 + s * s / 3.0;
  return s / std::tanh(s);
}

GeometryMeta geometry_meta(const Manifold& manifold, double diameter,
                           std::optional<double> kappa_min_override) {
  if (!(diameter > 0.0))
    throw ConfigError("geometry_meta: diameter must be positive");
  double kappa = 0.0;
  if (manifold.is_sphere()) {
    if (diameter >= std::numbers::pi)
      throw DomainError(
          "geometry_meta: sphere regions need diameter < pi for an "
          "invertible exponential map");
    kappa = 1.0;
  }
  GeometryMeta meta{kappa, kappa, diameter, 1.0};
  if (kappa_min_override) {
    meta.kappa_min = *kappa_min_override;
    meta.kappa_max = std::max(meta.kappa_max, meta.kappa_min);
  }
  meta.zeta = zeta(meta.kappa_min, diameter);
  return meta;
}

}  // namespace rvr
