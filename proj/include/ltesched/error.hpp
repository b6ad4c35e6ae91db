#pragma once

#include <stdexcept>
#include <string>

namespace ltesched {

/// Invalid input or configuration (bad scenario key, out-of-range parameter).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed: non-convergence, quadrature failure, or a
/// model evaluated outside its domain.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace detail
}  // namespace ltesched
