#include "lmsexact/config.hpp"

#include <cmath>
#include <sstream>

namespace lmsexact {

MomentSpec MomentSpec::gaussian_unit(int max_order) {
    if (max_order < 2) max_order = 2;
    MomentSpec s;
    s.tag_ = "gaussian-unit";
    s.max_order_ = max_order - (max_order % 2);
    double g = 1.0; // E[u^{2m}] = (2m-1)!!
    for (int m = 1; 2 * m <= s.max_order_; ++m) {
        g *= 2.0 * m - 1.0;
        s.even_[2 * m] = g;
    }
    return s;
}

MomentSpec MomentSpec::laplacian_unit(int max_order) {
    if (max_order < 2) max_order = 2;
    MomentSpec s;
    s.tag_ = "laplacian-unit";
    s.max_order_ = max_order - (max_order % 2);
    double g = 1.0; // E[u^{2m}] = (2m)!/2^m for unit variance
    for (int m = 1; 2 * m <= s.max_order_; ++m) {
        g *= (2.0 * m) * (2.0 * m - 1.0) / 2.0;
        s.even_[2 * m] = g;
    }
    return s;
}

MomentSpec MomentSpec::custom(std::map<int, double> even_moments, std::string tag) {
    MomentSpec s;
    s.tag_ = std::move(tag);
    for (const auto& [n, v] : even_moments) {
        if (n <= 0 || n % 2 != 0)
            throw ConfigError("custom moment table may only contain positive even orders, got order " +
                              std::to_string(n));
        if (!std::isfinite(v))
            throw ConfigError("custom moment of order " + std::to_string(n) + " is not finite");
    }
    if (!even_moments.count(2))
        throw ConfigError("custom moment table must define order 2");
    if (even_moments.at(2) <= 0.0)
        throw ConfigError("driving noise variance (gamma_2) must be positive");
    s.even_ = std::move(even_moments);
    s.max_order_ = s.even_.rbegin()->first;
    return s;
}

bool MomentSpec::has(int n) const {
    if (n < 0) return false;
    if (n == 0 || n % 2 != 0) return true;
    return even_.count(n) != 0;
}

double MomentSpec::gamma(int n) const {
    if (n < 0) throw MomentOrderError("negative moment order " + std::to_string(n));
    if (n == 0) return 1.0;
    if (n % 2 != 0) {
        ++odd_queries; // reductions should have discarded this term already
        return 0.0;
    }
    auto it = even_.find(n);
    if (it == even_.end()) {
        std::ostringstream os;
        os << "moment of order " << n << " not available for '" << tag_
           << "' (stored up to " << max_order_ << "); rebuild the moment table with a higher order";
        throw MomentOrderError(os.str());
    }
    return it->second;
}

MomentSpec moments_for(const std::string& tag, int max_order) {
    if (tag == "gaussian-unit") return MomentSpec::gaussian_unit(max_order);
    if (tag == "laplacian-unit") return MomentSpec::laplacian_unit(max_order);
    throw ConfigError("unknown moment preset '" + tag +
                      "' (expected gaussian-unit or laplacian-unit)");
}

int required_moment_order(int n_adaptive, int ma_order, int p_excess, int order) {
    if (order != 1 && order != 2)
        throw ConfigError("moment order bound defined for analysis orders 1 and 2");
    int max_lag = (order == 1) ? n_adaptive + ma_order - 2
                               : n_adaptive + p_excess + ma_order - 2;
    if (max_lag < 0) max_lag = 0;
    return 2 * order * (max_lag + 1);
}

std::vector<double> SystemConfig::w_bar_star() const {
    return std::vector<double>(w_star.begin() + n_adaptive, w_star.end());
}

void SystemConfig::validate() const {
    if (n_adaptive < 1)
        throw ConfigError("adaptive length N must be at least 1");
    if (p_excess < 0)
        throw ConfigError("unmodelled tap count P cannot be negative");
    if (ma_order < 1)
        throw ConfigError("MA order M must be at least 1");
    if ((int)b_coeffs.size() != ma_order)
        throw ConfigError("expected " + std::to_string(ma_order) + " MA taps, got " +
                          std::to_string(b_coeffs.size()));
    if ((int)w_star.size() != n_adaptive + p_excess)
        throw ConfigError("expected " + std::to_string(n_adaptive + p_excess) +
                          " plant coefficients, got " + std::to_string(w_star.size()));
    for (double b : b_coeffs)
        if (!std::isfinite(b)) throw ConfigError("MA taps must be finite");
    for (double w : w_star)
        if (!std::isfinite(w)) throw ConfigError("plant coefficients must be finite");
    bool any = false;
    for (double b : b_coeffs) any = any || b != 0.0;
    if (!any) throw ConfigError("MA taps are all zero, the input would vanish");
    if (!std::isfinite(beta) || beta < 0.0)
        throw ConfigError("step size must be finite and nonnegative");
    if (!std::isfinite(noise_variance) || noise_variance < 0.0)
        throw ConfigError("measurement noise variance must be finite and nonnegative");
    if (moments.max_order() < 2)
        throw ConfigError("moment table is empty; build one with moments_for()");
}

SystemConfig preset_scenario(const std::string& name, int n_adaptive, int ma_order,
                             int p_excess, const std::string& dist_tag) {
    SystemConfig cfg;
    cfg.n_adaptive = n_adaptive;
    cfg.p_excess = p_excess;
    cfg.ma_order = ma_order;
    if (ma_order == 1)
        cfg.b_coeffs = {1.0};
    else if (ma_order == 2)
        cfg.b_coeffs = {1.0, -0.9};
    else
        throw ConfigError("presets define MA taps for M=1 and M=2 only");

    cfg.w_star.assign(n_adaptive + p_excess, 1.0);
    if (name == "config1") {
        // all plant coefficients already 1
    } else if (name == "config2") {
        for (int i = n_adaptive; i < n_adaptive + p_excess; ++i) cfg.w_star[i] = 0.01;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected config1 or config2)");
    }

    cfg.noise_variance = 0.01;
    cfg.moments = moments_for(dist_tag, required_moment_order(n_adaptive, ma_order, p_excess, 2));
    cfg.validate();
    return cfg;
}

} // namespace lmsexact
