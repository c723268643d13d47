#pragma once

#include <stdexcept>
#include <string>

namespace corm {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Construction / parameter errors.
struct NonPositiveParameter : Error { using Error::Error; };
struct UnsupportedFamily : Error { using Error::Error; };
struct InvalidIndex : Error { using Error::Error; };
struct IntegrabilityFailure : Error { using Error::Error; };

// Numerical-engine errors.
struct EvaluationFailure : Error { using Error::Error; };
struct NonPositiveSamples : Error { using Error::Error; };
struct StepUnderflow : Error { using Error::Error; };
struct NoisePlateau : Error { using Error::Error; };
struct NonConvergentMoment : Error { using Error::Error; };
struct DegenerateGrid : Error { using Error::Error; };

// Simulation / workflow errors.
struct IllPosedSpec : Error { using Error::Error; };
struct NonExponentialScores : Error { using Error::Error; };
struct TruncationBudgetExceeded : Error { using Error::Error; };

// Spec-file parsing; line is 1-based, 0 when unknown.
struct SpecParseError : Error {
    int line = 0;
    SpecParseError(const std::string& msg, int line_no = 0)
        : Error(msg), line(line_no) {}
};

} // namespace corm
