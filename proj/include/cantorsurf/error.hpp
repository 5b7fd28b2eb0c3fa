#pragma once

#include <stdexcept>
#include <string>

namespace cantorsurf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct DepthExceeded : Error {
  int max_depth;
  DepthExceeded(int requested, int max)
      : Error("depth " + std::to_string(requested) + " exceeds max representable depth " + std::to_string(max)),
        max_depth(max) {}
};
struct InfeasibleGeometry : Error { using Error::Error; };
struct RoutingFailure : Error { using Error::Error; };
struct SamplingFailure : Error { using Error::Error; };
struct BudgetInfeasible : Error {
  double log_plateau_radius;
  BudgetInfeasible(const std::string &msg, double logr) : Error(msg), log_plateau_radius(logr) {}
};
struct QuadratureError : Error {
  double achieved;
  QuadratureError(const std::string &msg, double a) : Error(msg), achieved(a) {}
};
struct ConfigError : Error { using Error::Error; };
struct InternalError : Error { using Error::Error; };

} // namespace cantorsurf
