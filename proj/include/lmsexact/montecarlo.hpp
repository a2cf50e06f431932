#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmsexact/config.hpp"
#include "lmsexact/philox.hpp"

namespace lmsexact {

// Unit-variance sampler over one Philox stream. Draws are strictly ordered,
// so a (seed, stream) pair names one reproducible sequence no matter which
// thread consumes it. The gaussian path is Box-Muller with both halves used
// in order; the laplacian path is the inverse CDF at scale 1/sqrt(2).
class UnitSampler {
public:
    // dist_tag is "gaussian-unit" or "laplacian-unit"; anything else throws
    // ConfigError (custom moment tables have no sampler).
    UnitSampler(const std::string& dist_tag, std::uint64_t seed, std::uint64_t stream);

    double next();       // one draw from the named distribution
    double gaussian();   // gaussian draw regardless of the tag (measurement noise)

private:
    Philox4x32 eng_;
    bool laplacian_ = false;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

struct TrialPlan {
    SystemConfig cfg;                    // cfg.beta is the step size used
    long long trials = 10000;
    long long iterations = 300;          // recorded steps k = 0..iterations-1
    std::uint64_t seed = 1;
    double divergence_threshold = 10.0;  // per-coefficient magnitude limit
    int threads = 0;                     // 0: hardware concurrency
    long long block_size = 1024;         // accumulation granularity
};

// Ensemble averages over completed trials. A trial that trips the divergence
// threshold is dropped from every average (its partial curve would poison the
// means) but still counted in diverged_trials.
struct SimulationResult {
    long long trials = 0;
    long long iterations = 0;
    std::uint64_t seed = 0;
    long long diverged_trials = 0;
    long long trials_completed = 0;
    std::vector<std::vector<double>> mean_w;    // [k][tap]
    std::vector<std::vector<double>> stderr_w;  // [k][tap]
    std::vector<double> mse;                    // [k], ensemble mean of e^2(k)
    std::vector<double> stderr_mse;             // [k]
};

SimulationResult run(const TrialPlan& plan);

// Fraction of trials that diverge within `iterations` steps, per step size.
std::vector<double> divergence_probability(const SystemConfig& cfg,
                                           const std::vector<double>& betas,
                                           long long trials, long long iterations,
                                           std::uint64_t seed,
                                           double threshold = 10.0);

} // namespace lmsexact
