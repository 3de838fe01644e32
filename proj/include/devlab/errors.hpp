#ifndef DEVLAB_ERRORS_HPP
#define DEVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace devlab {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (e.g. truncating below the support).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised for malformed arguments (non-finite inputs, inverted intervals).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The model does not satisfy the hypotheses an operation needs, e.g. a
/// finite right endpoint with positive density there.
class UnsupportedRegime : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace devlab

#endif  // DEVLAB_ERRORS_HPP
