#ifndef RVR_ERRORS_HPP
#define RVR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rvr {

// Every error raised by the library derives from Error so the C API can map
// it onto a stable error code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or wiring problems: dimension mismatch, wrong base point, index out
// of range, empty batch, missing trace metric.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Mathematically undefined requests, e.g. the logarithm between antipodal
// points on the sphere.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied parameters (stepsize, probability, batch sizes,
// unknown config keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Enumeration oracles refuse instances whose outcome space is too large.
class RefusedError : public Error {
 public:
  using Error::Error;
};

}  // namespace rvr

#endif  // RVR_ERRORS_HPP
