#pragma once

#include <stdexcept>
#include <string>

namespace histwalk {

/// Base for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Root finder exhausted its iteration budget.
struct NonConvergence : Error {
    using Error::Error;
};

/// Monte Carlo grid left too few nonzero estimates to fit a slope.
struct DegenerateEstimate : Error {
    using Error::Error;
};

/// Birth-death chain with a non-positive required transition probability.
struct InvalidChain : Error {
    using Error::Error;
};

/// Arguments outside the documented domain of an operation.
struct InvalidInput : Error {
    using Error::Error;
};

/// Model violates the assumptions an operation depends on.
struct AssumptionViolation : Error {
    using Error::Error;
};

/// Too many exit-time samples hit the step cap.
struct ExcessCensoring : Error {
    using Error::Error;
};

} // namespace histwalk
