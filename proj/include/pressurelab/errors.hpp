#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pressurelab {

enum class ErrorKind {
  NonExpanding,
  NonMarkov,
  BadSpec,
  EscapedRepeller,
  SingularMatrix,
  EpsilonTooLarge,
  NoConvergence,
  MatrixTooLarge,
  NoSignChange,
  NotSemiConjugate,
  HorizonExceeded,
  PerturbationTooLarge,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library carries a kind and the module that
/// raised it, so the CLI can attribute errors without parsing messages.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " [" + module + "]: " + what),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonExpanding: return "NonExpanding";
    case ErrorKind::NonMarkov: return "NonMarkov";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::EscapedRepeller: return "EscapedRepeller";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::MatrixTooLarge: return "MatrixTooLarge";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::NotSemiConjugate: return "NotSemiConjugate";
    case ErrorKind::HorizonExceeded: return "HorizonExceeded";
    case ErrorKind::PerturbationTooLarge: return "PerturbationTooLarge";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace pressurelab
