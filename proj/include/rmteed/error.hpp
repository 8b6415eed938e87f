#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rmteed {

enum class ErrorKind {
  MalformedInput,
  UnrecoverableRow,
  InsufficientHistory,
  AspectRatio,
  DegenerateRow,
  Shape,
  Parameter,
  Contract,
  Domain,
  Configuration,
  InvariantViolation,
  NumericalFailure,
  Divergence,
  IllConditioned,
};

// Numerical failures map to CLI exit code 2, everything else to 1.
constexpr bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::NumericalFailure || kind == ErrorKind::Divergence ||
         kind == ErrorKind::IllConditioned;
}

/// Library error carrying a machine-readable kind and the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedInput: return "malformed-input";
    case ErrorKind::UnrecoverableRow: return "unrecoverable-row";
    case ErrorKind::InsufficientHistory: return "insufficient-history";
    case ErrorKind::AspectRatio: return "aspect-ratio";
    case ErrorKind::DegenerateRow: return "degenerate-row";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::InvariantViolation: return "invariant-violation";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::IllConditioned: return "ill-conditioned";
  }
  return "unknown";
}

}  // namespace rmteed
