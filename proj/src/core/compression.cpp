#include "rvr/compression.hpp"

#include <cmath>
#include <numeric>

#include "rvr/errors.hpp"
#include "rvr/problems.hpp"

namespace rvr {

TangentVector CompressedMessage::to_tangent() const {
  Vec v = Vec::Zero(origin_dim);
  for (const auto& [j, value] : entries) v(j) = value;
  return {base, std::move(v)};
}

std::size_t message_cost(const CompressedMessage& msg) {
  return msg.entries.size();
}

CompressedMessage dense_message(const TangentVector& v) {
  CompressedMessage msg{v.base(), {}, static_cast<int>(v.coords().size())};
  msg.entries.reserve(v.coords().size());
  for (int j = 0; j < msg.origin_dim; ++j) msg.entries.emplace_back(j, v.coords()(j));
  return msg;
}

Compressor Compressor::identity(int d) {
  if (d < 1) throw ConfigError("compressor: dimension must be >= 1");
  return {Kind::identity, d, d};
}

Compressor Compressor::randk(int k, int d) {
  if (d < 1) throw ConfigError("compressor: dimension must be >= 1");
  if (k < 1 || k > d)
    throw ConfigError("randk: need 1 <= k <= d, got k=" + std::to_string(k) +
                      " d=" + std::to_string(d));
  return {Kind::randk, k, d};
}

Compressor Compressor::parse(const std::string& spec, int d) {
  if (spec == "identity") return identity(d);
  const std::string prefix = "randk:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string rest = spec.substr(prefix.size());
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size())
      throw ConfigError("compressor: bad k in '" + spec + "'");
    return randk(k, d);
  }
  throw ConfigError("compressor: unknown spec '" + spec +
                    "' (expected identity or randk:<k>)");
}

double Compressor::omega() const {
  if (kind_ == Kind::identity) return 0.0;
  return static_cast<double>(d_) / k_ - 1.0;
}

double Compressor::rho_q() const {
  return kind_ == Kind::identity ? d_ : k_;
}

std::string Compressor::describe() const {
  return kind_ == Kind::identity ? "identity" : "randk:" + std::to_string(k_);
}

CompressedMessage Compressor::compress_message(const TangentVector& v,
                                               Rng& rng) const {
  if (v.coords().size() != d_)
    throw StructuralError("compressor: vector dimension does not match");
  if (kind_ == Kind::identity) return dense_message(v);
  const double scale = static_cast<double>(d_) / k_;
  CompressedMessage msg{v.base(), {}, d_};
  msg.entries.reserve(k_);
  for (auto j : sample_without_replacement(d_, k_, rng)) {
    const int jj = static_cast<int>(j);
    msg.entries.emplace_back(jj, scale * v.coords()(jj));
  }
  return msg;
}

TangentVector Compressor::compress(const TangentVector& v, Rng& rng) const {
  return compress_message(v, rng).to_tangent();
}

std::vector<std::pair<double, TangentVector>> Compressor::enumerate(
    const TangentVector& v, std::size_t limit) const {
  if (v.coords().size() != d_)
    throw StructuralError("compressor: vector dimension does not match");
  std::vector<std::pair<double, TangentVector>> out;
  if (kind_ == Kind::identity) {
    out.emplace_back(1.0, v);
    return out;
  }
  // C(d, k), refusing before it overflows the limit.
  double count = 1.0;
  for (int i = 1; i <= k_; ++i) count = count * (d_ - k_ + i) / i;
  if (count > static_cast<double>(limit))
    throw RefusedError("randk enumeration has too many outcomes");
  const double prob = 1.0 / std::round(count);
  const double scale = static_cast<double>(d_) / k_;
  std::vector<int> idx(k_);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Vec q = Vec::Zero(d_);
    for (int j : idx) q(j) = scale * v.coords()(j);
    out.emplace_back(prob, TangentVector(v.base(), std::move(q)));
    int pos = k_ - 1;
    while (pos >= 0 && idx[pos] == d_ - k_ + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < k_; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

ConicVarianceReport verify_conic_variance(const Compressor& op,
                                          const TangentVector& v,
                                          std::size_t trials, Rng& rng) {
  if (trials < 10000) throw ConfigError("verify_conic_variance: need >= 1e4 trials");
  const double norm2 = v.squared_norm();
  if (norm2 == 0.0) return {0.0, true};
  double acc = 0.0;
  for (std::size_t t = 0; t < trials; ++t)
    acc += (op.compress(v, rng).coords() - v.coords()).squaredNorm();
  const double omega_hat = acc / static_cast<double>(trials) / norm2;
  const double bound = op.omega() * (1.0 + 5.0 / std::sqrt(static_cast<double>(trials)));
  return {omega_hat, omega_hat <= bound};
}

}  // namespace rvr
