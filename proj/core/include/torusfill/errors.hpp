#pragma once

#include <stdexcept>
#include <string>

namespace torusfill {

enum class ErrorCode {
  InvalidInput,      // malformed arguments, grids, or files
  OutOfRange,        // parameter outside the modeled range
  InvalidGrid,       // grid size not a power of two >= 16
  NotHolomorphic,    // negative-frequency energy above tolerance
  CurveThroughZero,  // a sampled curve has a vanishing sample
  Undersampled,      // phase increment per sample too large to trust
  NonzeroWinding,    // zero winding required for a continuous log branch
  ZeroSection,       // w = 0 is excluded from every torus fiber
  DegenerateGradient,
  NoConvergence,
  LeafHitZero,         // interior modulus of a leaf collapsed
  ContinuationStuck,   // step control hit its floor
  FoliationDegenerate, // disjointness or transversality check failed
  PointNotEnclosed,    // target point not swept by the family
  TargetToleranceMissed,
  PointsCollide,      // motion injectivity violated
  ModuliCollision,    // two motion points share a modulus
  StarShapeViolation, // a transported fiber is not a radial graph
  IntegrationFailure,
  CoincidenceCheckFailed,
  FamilyValidationFailed,
};

const char* error_code_name(ErrorCode code);

// Short name of the mathematical hypothesis a failure violates
// (winding, injectivity, nonvanishing, monotonicity, ...).
const char* error_hypothesis(ErrorCode code);

// True for errors that indicate bad input rather than a failed certificate.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }
  const char* hypothesis() const { return error_hypothesis(code_); }

 private:
  ErrorCode code_;
};

// Continuation failures carry the last parameter value that converged.
class ContinuationError : public Error {
 public:
  ContinuationError(const std::string& message, double last_good_t)
      : Error(ErrorCode::ContinuationStuck, message), last_good_t_(last_good_t) {}
  double last_good_t() const { return last_good_t_; }

 private:
  double last_good_t_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace torusfill
