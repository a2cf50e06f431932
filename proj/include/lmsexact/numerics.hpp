#pragma once

#include <cstdint>
#include <utility>

#include "lmsexact/state_space.hpp"

namespace lmsexact {

struct IterateOptions {
    long long k_max = 1000;
    long long record_stride = 1;      // record outputs every this many steps
    double divergence_norm = 1e12;    // sup-norm blowup threshold
    bool fast_forward = true;         // stop advancing once the state is numerically
                                      // at a fixed point (the remaining steps cannot
                                      // change it); recorded outputs repeat the value
};

struct IterateResult {
    std::vector<std::string> output_names;
    std::vector<long long> ks;                  // recorded iteration indices
    std::vector<std::vector<double>> curve;     // curve[t][output]
    std::vector<double> final_state;
    std::vector<double> final_outputs;
    bool diverged = false;
    long long diverged_at = -1;
    long long fixed_point_at = -1;              // -1 when never reached
};

IterateResult iterate(const StateSpaceModel& model, double beta,
                      const IterateOptions& opts);

// Solves (I - A(beta)) y = f(beta) and checks the recursion actually
// contracts; throws UnstableError when the spectral radius reaches 1.
std::vector<double> steady_state(const StateSpaceModel& model, double beta,
                                 bool check_stability = true);

struct SpectralOptions {
    double tol = 1e-10;          // relative accuracy of the dominant modulus
    int krylov = 32;             // Arnoldi subspace dimension
    int max_restarts = 80;
    int dense_cutoff = 512;      // below this, use a dense eigensolver
    bool force_iterative = false;
    std::uint64_t seed = 0x5eed5eed5eedULL;
};

double spectral_radius(const CSRMatrix& a, const SpectralOptions& opts = {});
double spectral_radius(const StateSpaceModel& model, double beta,
                       const SpectralOptions& opts = {});

struct StabilityReport {
    std::string model_kind;
    double beta_max = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double tolerance = 0.0;
    bool found = false;                               // a crossing was bracketed
    std::vector<std::pair<double, double>> samples;   // (beta, spectral radius)
};

// Geometric scan of (lo, hi] for the first upward crossing of radius 1,
// then bisection of the bracketing interval to the requested relative width.
StabilityReport find_beta_max(const StateSpaceModel& model, double lo, double hi,
                              int scan_points = 64, double tol = 1e-5,
                              const SpectralOptions& sopts = {});

} // namespace lmsexact
