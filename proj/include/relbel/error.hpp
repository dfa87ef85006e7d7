#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relbel {

enum class ErrorCode {
  NonStochasticRow,
  NegativeMass,
  PriorNotNormalized,
  ImpossibleObservation,
  EmptyFiber,
  DimensionMismatch,
  BadRange,
  ZeroCells,
  NegativeDensity,
  AllZeroMass,
  IndexOutOfRange,
  ZeroPriorPositivePosterior,
  ZeroPriorMass,
  BadEta,
  BadGamma,
  RuleSpaceTooLarge,
  InvalidSpec,
  BothDensitiesZero,
  RankDeficient,
  ZeroDirection,
  GridTooCoarse,
  NearSingularMagnifier,
  TieAtMaximizer,
  SeparationViolated,
  NoAttainableGamma,
  Io,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonStochasticRow: return "NonStochasticRow";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::PriorNotNormalized: return "PriorNotNormalized";
    case ErrorCode::ImpossibleObservation: return "ImpossibleObservation";
    case ErrorCode::EmptyFiber: return "EmptyFiber";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::ZeroCells: return "ZeroCells";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::AllZeroMass: return "AllZeroMass";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroPriorPositivePosterior: return "ZeroPriorPositivePosterior";
    case ErrorCode::ZeroPriorMass: return "ZeroPriorMass";
    case ErrorCode::BadEta: return "BadEta";
    case ErrorCode::BadGamma: return "BadGamma";
    case ErrorCode::RuleSpaceTooLarge: return "RuleSpaceTooLarge";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BothDensitiesZero: return "BothDensitiesZero";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NearSingularMagnifier: return "NearSingularMagnifier";
    case ErrorCode::TieAtMaximizer: return "TieAtMaximizer";
    case ErrorCode::SeparationViolated: return "SeparationViolated";
    case ErrorCode::NoAttainableGamma: return "NoAttainableGamma";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Numerical guards fire on valid input that the requested computation cannot
/// resolve reliably. Everything else is an input validation failure.
constexpr bool is_numerical_guard(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::GridTooCoarse:
    case ErrorCode::NearSingularMagnifier:
    case ErrorCode::TieAtMaximizer:
    case ErrorCode::SeparationViolated:
    case ErrorCode::RuleSpaceTooLarge:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + " [" + field + "]: " + detail),
        code_(code),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string field, const std::string& detail) {
  throw Error(code, std::move(field), detail);
}

}  // namespace relbel
