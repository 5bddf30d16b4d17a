#pragma once

#include <stdexcept>
#include <string>

namespace epf {

// Base class for all engine errors. The CLI maps subclasses onto its
// exit-code contract (1 I/O, 2 validation, 3 statistical degeneracy).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dataio
struct IoError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct GapError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct InsufficientHistory : Error { using Error::Error; };

// transform
struct WindowTooLarge : Error { using Error::Error; };
struct MissingParams : Error { using Error::Error; };
struct EmptyTraining : Error { using Error::Error; };

// lear
struct NonFinite : Error { using Error::Error; };
struct TooFewRows : Error { using Error::Error; };
struct LagUnavailable : Error { using Error::Error; };

// evaluate
struct DateMismatch : Error { using Error::Error; };
struct MissingNaiveHistory : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct DivisionByZero : Error { using Error::Error; };

// generic precondition violations (bad flag combinations, empty input lists)
struct InvalidArgument : Error { using Error::Error; };

}  // namespace epf
