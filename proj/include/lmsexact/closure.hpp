#pragma once

#include "lmsexact/state_space.hpp"

namespace lmsexact {

// Exact-expectation closure. Starting from the tracked moments of interest,
// each state variable's one-step recursion is derived symbolically: shift the
// variable's noise lags by one, substitute the deviation update for every
// deviation factor, expand, and take expectations. Whatever expectation shows
// up on the right-hand side and is not yet tracked becomes a new state
// variable; the worklist runs until the system closes.
//
// Seeds: order 1 tracks E[wt_i] for every adaptive tap. Order 2 additionally
// seeds every pair E[wt_i wt_j] (i <= j) and the variables appearing in the
// mean-square-error functional, so the MSE is evaluable from the state.

struct DeriveOptions {
    long long cap = 2'000'000;   // maximum number of state variables
    bool build_matrices = true;  // false: discovery only, for counting
};

StateSpaceModel derive_model(const SystemConfig& cfg, int order,
                             const DeriveOptions& opts = {});

// Closed-system size for a generic configuration of the given shape (all MA
// taps and plant coefficients nonzero). Throws CapExceededError past the cap.
long long count_equations(int n_adaptive, int ma_order, int p_excess, int order,
                          long long cap = 2'000'000);

// Output functionals by name; mse requires a second-order model.
const OutputFunctional& mse_functional(const StateSpaceModel& model);
std::vector<OutputFunctional> mean_weight_functionals(const StateSpaceModel& model);

// E[state] at k = 0 for w(0) = 0 (so the deviation starts at w_star) and a
// stationary prehistory of the driving noise.
std::vector<double> initial_state(const StateSpaceModel& model);

} // namespace lmsexact
