#ifndef RVR_GEOMETRY_HPP
#define RVR_GEOMETRY_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace rvr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { sphere, euclidean };

/// A manifold from the supported family: the unit sphere S^{d-1} embedded in
/// R^d, or Euclidean space R^d. Points and tangent vectors are stored in
/// ambient coordinates, so `ambient_dim()` is the length of every coordinate
/// vector on this manifold.
class Manifold {
 public:
  static Manifold sphere(int ambient_dim);
  static Manifold euclidean(int dim);

  ManifoldKind kind() const { return kind_; }
  int ambient_dim() const { return dim_; }
  bool is_sphere() const { return kind_ == ManifoldKind::sphere; }
  std::string describe() const;

  friend bool operator==(const Manifold&, const Manifold&) = default;

 private:
  Manifold(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {}
  ManifoldKind kind_;
  int dim_;
};

/// A point on a manifold. Sphere points have unit norm to within 1e-12.
class Point {
 public:
  /// Validates the on-manifold invariant; throws DomainError when violated.
  Point(Manifold manifold, Vec coords);

  /// Sphere only: rescales an arbitrary nonzero vector onto the sphere.
  static Point normalized(Manifold manifold, const Vec& coords);

  const Manifold& manifold() const { return manifold_; }
  const Vec& coords() const { return coords_; }
  int dim() const { return manifold_.ambient_dim(); }

  bool same_as(const Point& other) const;

 private:
  Manifold manifold_;
  Vec coords_;
};

/// A vector in the tangent space at `base`, in ambient coordinates.
///
/// Tangency is not enforced at construction: compressed messages on the
/// sphere are allowed to leave T_x M until the receiver re-projects them.
/// Use `is_tangent()` to audit.
class TangentVector {
 public:
  TangentVector(Point base_point, Vec v);
  static TangentVector zero(const Point& base_point);

  const Point& base() const { return base_; }
  const Vec& coords() const { return coords_; }
  Vec& coords() { return coords_; }
  double norm() const { return coords_.norm(); }
  double squared_norm() const { return coords_.squaredNorm(); }
  bool is_tangent(double tol = 1e-10) const;

  TangentVector operator-() const;
  TangentVector& operator+=(const TangentVector& other);
  TangentVector& operator-=(const TangentVector& other);
  TangentVector& operator*=(double s);

 private:
  Point base_;
  Vec coords_;
};

TangentVector operator+(TangentVector a, const TangentVector& b);
TangentVector operator-(TangentVector a, const TangentVector& b);
TangentVector operator*(double s, TangentVector v);

/// Exp_x(v). On the sphere: cos|v| x + sin|v| v/|v|, renormalized.
Point exp(const Point& x, const TangentVector& v);

/// Exp_x^{-1}(y). Throws DomainError on the sphere when <x,y> <= -1 + 1e-9.
TangentVector log(const Point& x, const Point& y);

/// Parallel transport of v from T_x M to T_y M along the minimizing geodesic.
TangentVector transport(const Point& x, const Point& y, const TangentVector& v);

double inner(const Point& x, const TangentVector& u, const TangentVector& v);

/// Geodesic distance. Antipodal sphere points are at distance pi.
double dist(const Point& x, const Point& y);

/// Orthogonal projection of an ambient vector onto T_x M.
TangentVector project_tangent(const Point& x, const Vec& ambient);

/// Curvature-driven constant: sqrt|k| D / tanh(sqrt|k| D) for k < 0, else 1.
double zeta(double kappa_min, double diameter);

struct GeometryMeta {
  double kappa_min;
  double kappa_max;  // stored for completeness; no algorithm consumes it
  double diameter;
  double zeta;
};

/// Curvature constants of the manifold restricted to a region of diameter D.
/// `kappa_min_override` replaces the lower curvature bound (stress testing).
GeometryMeta geometry_meta(const Manifold& manifold, double diameter,
                           std::optional<double> kappa_min_override = {});

// Internal helpers shared by the modules.
void require_same_manifold(const Point& x, const Point& y, const char* what);
void require_based_at(const TangentVector& v, const Point& x, const char* what);

}  // namespace rvr

#endif  // RVR_GEOMETRY_HPP
