#pragma once

#include <stdexcept>
#include <string>

namespace hybridyn {

// Error taxonomy mirrors the CLI exit codes: validation failures (bad
// parameters, incompatible grids, malformed config) exit 1, numerical
// failures during a run exit 2, filesystem trouble exits 3.

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- validation --------------------------------------------------------

struct GridMismatch : ValidationError {
  using ValidationError::ValidationError;
};

// Grid spacing too coarse to resolve the coarse-graining kernel.
struct KernelUnderresolved : ValidationError {
  using ValidationError::ValidationError;
};

// Wavefunction / phase-space grid does not contain the required support.
struct GridTooNarrow : ValidationError {
  using ValidationError::ValidationError;
};

// Matrix-valued inputs disagree on the quantum dimension d.
struct DimMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct InvalidDensityMatrix : ValidationError {
  using ValidationError::ValidationError;
};

struct InvalidDistribution : ValidationError {
  using ValidationError::ValidationError;
};

// Closed-form propagation asked for on a state outside the supported family.
struct UnsupportedClassicalState : ValidationError {
  using ValidationError::ValidationError;
};

struct ParseError : ValidationError {
  ParseError(const std::string& msg, int line_no)
      : ValidationError("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
  int line;
};

// -- numerical ---------------------------------------------------------

// Pointer projection or hit at an outcome of essentially zero probability.
struct ZeroProbabilityOutcome : NumericalError {
  using NumericalError::NumericalError;
};

// Conditional state requested where the classical density is below threshold.
struct ConditionOnNullEvent : NumericalError {
  using NumericalError::NumericalError;
};

struct StepTooLarge : NumericalError {
  using NumericalError::NumericalError;
};

struct NonFiniteState : NumericalError {
  using NumericalError::NumericalError;
};

// Transform-domain off-diagonal propagation would amplify rounding noise
// beyond recovery for this input.
struct OffDiagonalUnstable : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace hybridyn
