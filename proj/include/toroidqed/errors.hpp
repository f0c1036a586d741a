#pragma once

#include <stdexcept>
#include <string>

namespace toroidqed {

// Input violates an operation's precondition.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Linear response matrix is singular (zero damping at an exact degeneracy).
struct DegenerateParameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative method failed (non-convergence, rank deficiency, unresolvable width).
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration file, override or grid.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

}  // namespace toroidqed
