#pragma once

#include <map>
#include <string>
#include <vector>

#include "lmsexact/errors.hpp"

namespace lmsexact {

// Even moments gamma_n = E[u^n] of the zero-mean noise that drives the
// moving-average input. The density is assumed even-symmetric, so every odd
// moment is identically zero and only even orders are stored. The named
// presets are unit-variance; custom tables may use any positive gamma_2.
// Queries above the stored maximum are an error, never an extrapolation.
class MomentSpec {
public:
    MomentSpec() = default;

    static MomentSpec gaussian_unit(int max_order);
    static MomentSpec laplacian_unit(int max_order);
    static MomentSpec custom(std::map<int, double> even_moments,
                             std::string tag = "custom");

    // gamma(0) == 1, gamma(odd) == 0, gamma(2k) from the table.
    double gamma(int n) const;

    int max_order() const { return max_order_; }
    const std::string& tag() const { return tag_; }
    bool has(int n) const;
    const std::map<int, double>& table() const { return even_; }

    // Diagnostics hook: reductions are supposed to discard odd-power factors
    // structurally, before ever asking for a moment. Tests assert this stays 0.
    mutable long long odd_queries = 0;

private:
    std::map<int, double> even_;
    std::string tag_ = "unset";
    int max_order_ = 0;
};

// tag is "gaussian-unit" or "laplacian-unit".
MomentSpec moments_for(const std::string& tag, int max_order);

// Worst-case moment order any reduction can request for a given closure, from
// the power bound on state-variable noise factors: each derivation shift adds
// at most 2*order to the power at one lag, and lags run up to the maximum
// update lag L (= N+M-2 at order 1, N+P+M-2 at order 2).
int required_moment_order(int n_adaptive, int ma_order, int p_excess, int order);

// Deficient-length LMS identification setup. The plant has N+P coefficients,
// the adaptive filter only N; the first N entries of w_star are the part the
// filter can represent, the trailing P entries are the unmodelled tail.
struct SystemConfig {
    int n_adaptive = 0;             // N, adaptive filter length
    int p_excess = 0;               // P, unmodelled plant taps
    int ma_order = 1;               // M, length of the MA input coloring
    std::vector<double> b_coeffs;   // MA taps b_0..b_{M-1}
    std::vector<double> w_star;     // plant coefficients, length N+P
    double beta = 0.0;              // step size (models keep it symbolic)
    double noise_variance = 0.0;    // variance of the measurement noise
    MomentSpec moments;

    int full_length() const { return n_adaptive + p_excess; }
    std::vector<double> w_bar_star() const;   // unmodelled tail, length P
    void validate() const;                    // throws ConfigError
};

// Named experiment setups: "config1" sets every plant coefficient to 1,
// "config2" keeps the modelled part at 1 and shrinks the tail to 0.01.
// MA taps are [1] for M=1 and [1, -0.9] for M=2; beta is left to the caller.
SystemConfig preset_scenario(const std::string& name, int n_adaptive,
                             int ma_order, int p_excess,
                             const std::string& dist_tag = "gaussian-unit");

} // namespace lmsexact
