#include "torusfill/errors.hpp"

namespace torusfill {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NotHolomorphic: return "NotHolomorphic";
    case ErrorCode::CurveThroughZero: return "CurveThroughZero";
    case ErrorCode::Undersampled: return "Undersampled";
    case ErrorCode::NonzeroWinding: return "NonzeroWinding";
    case ErrorCode::ZeroSection: return "ZeroSection";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LeafHitZero: return "LeafHitZero";
    case ErrorCode::ContinuationStuck: return "ContinuationStuck";
    case ErrorCode::FoliationDegenerate: return "FoliationDegenerate";
    case ErrorCode::PointNotEnclosed: return "PointNotEnclosed";
    case ErrorCode::TargetToleranceMissed: return "TargetToleranceMissed";
    case ErrorCode::PointsCollide: return "PointsCollide";
    case ErrorCode::ModuliCollision: return "ModuliCollision";
    case ErrorCode::StarShapeViolation: return "StarShapeViolation";
    case ErrorCode::IntegrationFailure: return "IntegrationFailure";
    case ErrorCode::CoincidenceCheckFailed: return "CoincidenceCheckFailed";
    case ErrorCode::FamilyValidationFailed: return "FamilyValidationFailed";
  }
  return "Unknown";
}

const char* error_hypothesis(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHolomorphic: return "holomorphy";
    case ErrorCode::CurveThroughZero: return "nonvanishing";
    case ErrorCode::Undersampled: return "resolution";
    case ErrorCode::NonzeroWinding: return "zero winding";
    case ErrorCode::ZeroSection: return "nonvanishing";
    case ErrorCode::DegenerateGradient: return "nonvanishing gradient";
    case ErrorCode::NoConvergence: return "contraction";
    case ErrorCode::LeafHitZero: return "nonvanishing";
    case ErrorCode::ContinuationStuck: return "continuation";
    case ErrorCode::FoliationDegenerate: return "injectivity";
    case ErrorCode::PointNotEnclosed: return "enclosure";
    case ErrorCode::TargetToleranceMissed: return "convergence";
    case ErrorCode::PointsCollide: return "injectivity";
    case ErrorCode::ModuliCollision: return "level separation";
    case ErrorCode::StarShapeViolation: return "radial graph";
    case ErrorCode::IntegrationFailure: return "smooth flow";
    case ErrorCode::CoincidenceCheckFailed: return "uniqueness";
    case ErrorCode::FamilyValidationFailed: return "monotonicity";
    default: return "input validity";
  }
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::OutOfRange:
    case ErrorCode::InvalidGrid:
    case ErrorCode::PointsCollide:
    case ErrorCode::ModuliCollision:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message +
                         " [hypothesis: " + error_hypothesis(code) + "]"),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace torusfill
