#pragma once

#include <stdexcept>
#include <string>

namespace merw {

/// Invalid parameters or an inconsistent walk state.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was requested outside the memory regime where it is defined.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside a series' disc of convergence and similar domain issues.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// ODE integration or quadrature could not meet its contract.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace merw
