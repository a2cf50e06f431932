#pragma once

#include <Eigen/Dense>

#include "lmsexact/state_space.hpp"

namespace lmsexact {

// Input-process moment matrices. Indexing follows the regressor convention
// x_i = x(k-i) for the adaptive part and xbar_a = x(k-N-a) for the tail.
// k4 is the fourth-moment matrix of the adaptive regressor, laid out so that
// k4(i + j*N, a + b*N) = E[x_i x_a x_b x_j].
struct MomentMatrices {
    Eigen::MatrixXd r_x;          // N x N,  E[x_i x_l]
    Eigen::MatrixXd r_xbar;       // N x P,  E[x_i xbar_a]
    Eigen::MatrixXd r_xbarxbar;   // P x P,  E[xbar_a xbar_b]
    Eigen::MatrixXd k4;           // N^2 x N^2
};

MomentMatrices compute_moment_matrices(const SystemConfig& cfg);

// Classical small-step analysis under the independence assumption.
// First order: E[wt](k+1) = (I - beta R_x) E[wt](k) - beta R_xbar wbar.
StateSpaceModel ia_first_order(const SystemConfig& cfg);

// Second order: the redundant vec(E[wt wt^T]) state plus the mean block,
// derived by reducing the same symbolic update with every noise factor split
// off on its own (the independence assumption applied mechanically). For a
// white input this collapses to the familiar Kronecker form
//   vec' = [I - beta(R (+) R) + beta^2 K4] vec + beta^2 sigma_nu^2 vec(R).
StateSpaceModel ia_second_order(const SystemConfig& cfg);

// Mean-convergence step-size bound 2 / tr(R_x).
double ia_beta_bound_mean(const SystemConfig& cfg);

} // namespace lmsexact
