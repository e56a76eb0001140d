#ifndef NLD_ERROR_HPP
#define NLD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nld {

/// Invalid input: bad sizes, out-of-range parameters, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver declined to run because a mathematical precondition fails
/// (irreducibility, s(L_inf) >= 0, F identically zero, asymmetry).
/// The CLI maps this to exit status 2.
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical method did not converge or hit an internal consistency bound.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nld

#endif  // NLD_ERROR_HPP
