#pragma once

#include <stdexcept>
#include <string>

namespace growthlab {

/// Input violates an operation's domain (delta out of range, z out of range, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A modulus fails its structural requirements (non-monotone table, bad parameters).
class InvalidModulus : public std::invalid_argument {
 public:
  explicit InvalidModulus(const std::string& what) : std::invalid_argument(what) {}
};

/// A map constructor could not certify its output (omega(eps) >= 1, glue not monotone,
/// no admissible frame endpoint found).
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// A diffeomorphism turned out numerically invalid mid-computation (derivative <= 0).
class InvalidDiffeo : public std::runtime_error {
 public:
  explicit InvalidDiffeo(const std::string& what) : std::runtime_error(what) {}
};

/// 1/|phi| integrand hits a zero of phi inside the integration interval.
class SingularIntegral : public std::runtime_error {
 public:
  explicit SingularIntegral(const std::string& what) : std::runtime_error(what) {}
};

/// A bound/fit/scenario specification is incomplete or inconsistent.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace growthlab
