#pragma once

#include <stdexcept>
#include <string>

namespace fast {

/// Operands disagree on qubit or mode count.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A caller-side precondition was violated (e.g. a non-commuting pair handed
/// to a joint measurement).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid experiment configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem too large for dense simulation. Maps to CLI exit code 2.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading a config or writing an artifact failed. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampled ancilla branch has (numerically) zero probability.
class DegenerateBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chained pair-product estimate is too small to carry a reliable sign.
class UnreliableLinkError : public std::runtime_error {
 public:
  UnreliableLinkError(const std::string& chain, std::size_t position, double value)
      : std::runtime_error("unreliable link in chain " + chain + " at position " +
                           std::to_string(position) + " (estimate " + std::to_string(value) +
                           ")"),
        chain_(chain),
        position_(position) {}

  const std::string& chain() const { return chain_; }
  std::size_t position() const { return position_; }

 private:
  std::string chain_;
  std::size_t position_;
};

}  // namespace fast
