#pragma once

#include <stdexcept>
#include <string>

namespace lmsexact {

// Bad or inconsistent system description (dimensions, coefficients, presets).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A moment of the driving noise was requested beyond the stored table.
struct MomentOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The closure discovered more state variables than the configured cap allows.
struct CapExceededError : std::runtime_error {
    CapExceededError(const std::string& msg, long long reached_, long long cap_)
        : std::runtime_error(msg), reached(reached_), cap(cap_) {}
    long long reached;
    long long cap;
};

// A fixed point was requested for a model whose recursion does not contract.
struct UnstableError : std::runtime_error {
    UnstableError(const std::string& msg, double beta_, double rho_)
        : std::runtime_error(msg), beta(beta_), rho(rho_) {}
    double beta;
    double rho;
};

// Linear-algebra layer failure (non-convergence, singular solve, bad input).
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lmsexact
