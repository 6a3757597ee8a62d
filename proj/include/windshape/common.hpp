#pragma once

#include <stdexcept>
#include <string>

namespace windshape {

// Requested operating point violates actuator or speed limits.
struct EnvelopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Power reference cannot be met at the given wind speed.
struct InfeasibleReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Controller synthesis failed (CARE breakdown, unstable loop, bad weights).
struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric routine did not converge or produced an unusable result.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace windshape
