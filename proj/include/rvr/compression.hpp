#ifndef RVR_COMPRESSION_HPP
#define RVR_COMPRESSION_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rvr/geometry.hpp"
#include "rvr/rng.hpp"

namespace rvr {

/// Sparse message in ambient coordinates. Entries are stored even when their
/// value is zero; the cost is the number of stored entries.
struct CompressedMessage {
  Point base;
  std::vector<std::pair<int, double>> entries;
  int origin_dim = 0;

  TangentVector to_tangent() const;
};

std::size_t message_cost(const CompressedMessage& msg);

/// Every coordinate of v; costs d.
CompressedMessage dense_message(const TangentVector& v);

/// Unbiased compressor with conic variance omega and expected density rho_Q.
class Compressor {
 public:
  enum class Kind { identity, randk };

  static Compressor identity(int d);
  /// Keeps k uniformly chosen coordinates scaled by d/k. Needs 1 <= k <= d.
  static Compressor randk(int k, int d);
  /// "identity" or "randk:<k>".
  static Compressor parse(const std::string& spec, int d);

  Kind kind() const { return kind_; }
  int k() const { return k_; }
  int dim() const { return d_; }
  double omega() const;
  double rho_q() const;
  std::string describe() const;

  CompressedMessage compress_message(const TangentVector& v, Rng& rng) const;
  TangentVector compress(const TangentVector& v, Rng& rng) const;

  /// All equally likely outcomes with their probabilities. Throws
  /// RefusedError above `limit` outcomes.
  std::vector<std::pair<double, TangentVector>> enumerate(
      const TangentVector& v, std::size_t limit = 10000) const;

 private:
  Compressor(Kind kind, int k, int d) : kind_(kind), k_(k), d_(d) {}
  Kind kind_;
  int k_;
  int d_;
};

struct ConicVarianceReport {
  double empirical_omega = 0.0;
  bool pass = false;
};

/// Monte-Carlo estimate of E|Q(v) - v|^2 / |v|^2 over `trials` draws (at
/// least 1e4); passes when it is <= omega (1 + 5 / sqrt(trials)).
ConicVarianceReport verify_conic_variance(const Compressor& op,
                                          const TangentVector& v,
                                          std::size_t trials, Rng& rng);

}  // namespace rvr

#endif  // RVR_COMPRESSION_HPP
