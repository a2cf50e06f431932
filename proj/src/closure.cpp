#include "lmsexact/closure.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace lmsexact {

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<Factor>& f) const {
        std::size_t h = 1469598103934665603ull;
        for (const auto& x : f) {
            h = (h ^ (std::size_t)x.kind) * 1099511628211ull;
            h = (h ^ (std::size_t)x.idx) * 1099511628211ull;
            h = (h ^ (std::size_t)x.pow) * 1099511628211ull;
        }
        return h;
    }
};
struct KeyEq {
    bool operator()(const std::vector<Factor>& a, const std::vector<Factor>& b) const {
        return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
    }
};

class ClosureBuilder {
public:
    ClosureBuilder(const SystemConfig& cfg, int order, const DeriveOptions& opts)
        : cfg_(cfg), order_(order), opts_(opts) {
        cfg.validate();
        if (order != 1 && order != 2)
            throw ConfigError("analysis order must be 1 or 2");
        int need = required_moment_order(cfg.n_adaptive, cfg.ma_order, cfg.p_excess, order);
        if (cfg.moments.max_order() < need && cfg.moments.tag() != "custom")
            throw MomentOrderError("moment table stores up to order " +
                                   std::to_string(cfg.moments.max_order()) + " but this closure can request " +
                                   std::to_string(need));
        exprs_ = expand_deviation_update(cfg);
    }

    StateSpaceModel build() {
        const auto t0 = std::chrono::steady_clock::now();
        seed();
        // The worklist is the variable list itself: discovery appends, so
        // scanning by index processes seeds first, then BFS order.
        for (int v = 0; v < (int)vars_.size(); ++v) derive_row(v);

        StateSpaceModel m;
        m.kind = order_ == 1 ? "exact-1" : "exact-2";
        m.order = order_;
        m.cfg = cfg_;
        m.variables = std::move(vars_);
        const int n = (int)m.variables.size();
        for (int d = 0; d < 3; ++d) {
            m.a[d] = SparseMatrix::from_triplets(n, n, std::move(tri_[d]));
            m.stats.nnz += (long long)m.a[d].nnz();
        }
        if (opts_.build_matrices) {
            force_.resize(n);
            for (int d = 0; d < 3; ++d) m.forcing[d].assign(n, 0.0);
            for (int i = 0; i < n; ++i)
                for (int d = 0; d < 3; ++d) m.forcing[d][i] = force_[i].c[d];
            attach_outputs(m);
        }
        m.stats.n_vars = n;
        m.stats.derive_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return m;
    }

    long long count() {
        seed();
        for (int v = 0; v < (int)vars_.size(); ++v) derive_row(v);
        return (long long)vars_.size();
    }

private:
    int intern(const std::vector<Factor>& key) {
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        if ((long long)vars_.size() >= opts_.cap)
            throw CapExceededError("closure needs more than " + std::to_string(opts_.cap) +
                                       " state variables",
                                   (long long)vars_.size() + 1, opts_.cap);
        const int id = (int)vars_.size();
        StateVariable v;
        v.mono.factors = key;
        vars_.push_back(std::move(v));
        index_.emplace(key, id);
        return id;
    }

    void seed() {
        if (order_ == 1) {
            for (int i = 0; i < cfg_.n_adaptive; ++i)
                intern({{Gen::dev, (std::uint16_t)i, 1}});
            return;
        }
        for (int i = 0; i < cfg_.n_adaptive; ++i)
            for (int j = i; j < cfg_.n_adaptive; ++j) {
                if (i == j)
                    intern({{Gen::dev, (std::uint16_t)i, 2}});
                else
                    intern({{Gen::dev, (std::uint16_t)i, 1}, {Gen::dev, (std::uint16_t)j, 1}});
            }
        for (int i = 0; i < cfg_.n_adaptive; ++i)
            intern({{Gen::dev, (std::uint16_t)i, 1}});
        const Expression err = expand_error(cfg_);
        mse_lc_ = take_expectation(multiply(err, err), cfg_.moments, cfg_.noise_variance,
                                   ReduceMode::exact);
        for (const auto& [mono, poly] : mse_lc_.terms) intern(mono.factors);
    }

    const Expression& source_for(const std::vector<Factor>& devs) {
        int i, j;
        if (devs.size() == 1 && devs[0].pow == 1) return exprs_[devs[0].idx];
        if (devs.size() == 1) {
            i = j = devs[0].idx;   // pow == 2
        } else {
            i = devs[0].idx;
            j = devs[1].idx;
        }
        const long key = (long)i * cfg_.n_adaptive + j;
        auto it = pair_cache_.find(key);
        if (it == pair_cache_.end())
            it = pair_cache_.emplace(key, multiply(exprs_[i], exprs_[j])).first;
        return it->second;
    }

    void derive_row(int v) {
        // vars_ may reallocate while this row discovers new variables
        shifted_.clear();
        devs_.clear();
        for (const auto& f : vars_[v].mono.factors) {
            if (f.kind == Gen::u)
                shifted_.push_back({Gen::u, (std::uint16_t)(f.idx - 1), f.pow});
            else
                devs_.push_back(f);
        }
        const Expression& src = source_for(devs_);
        const bool build = opts_.build_matrices;
        if (build) {
            force_.resize(vars_.size() > force_.size() ? vars_.size() : force_.size());
            row_.clear();
        }

        for (const auto& m : src.terms) {
            const bool joint = m.has_dev();
            if (!build && !joint) continue;   // pure forcing, discovers nothing
            double coeff = m.coeff;
            residual_.clear();
            if (!merge_reduce(m, joint, coeff)) continue;
            if (coeff == 0.0) continue;
            if (residual_.empty()) {
                if (build) force_[v].add(m.beta_deg, coeff);
            } else {
                const int col = intern(residual_);
                if (build) row_.push_back({col, m.beta_deg, coeff});
            }
        }

        if (build) flush_row(v);
    }

    // Multiplies the shifted noise part into one update-product monomial and
    // reduces in place. Returns false when an odd lag-0 or noise power kills
    // the term; otherwise scales coeff and leaves the residual in residual_.
    bool merge_reduce(const Monomial& m, bool joint, double& coeff) {
        std::size_t i = 0, j = 0;
        const auto& sf = shifted_;
        const auto& mf = m.factors;
        while (i < sf.size() || j < mf.size()) {
            Factor f;
            if (j >= mf.size()) {
                f = sf[i++];
            } else if (i >= sf.size()) {
                f = mf[j++];
            } else if (sf[i].kind == mf[j].kind && sf[i].idx == mf[j].idx) {
                f = sf[i];
                f.pow = (std::uint16_t)(sf[i].pow + mf[j].pow);
                ++i;
                ++j;
            } else if (factor_id_less(sf[i], mf[j])) {
                f = sf[i++];
            } else {
                f = mf[j++];
            }
            switch (f.kind) {
                case Gen::u:
                    if (f.idx == 0 || !joint) {
                        if (f.pow % 2 == 1) return false;
                        coeff *= cfg_.moments.gamma(f.pow);
                    } else {
                        residual_.push_back(f);
                    }
                    break;
                case Gen::dev:
                    residual_.push_back(f);
                    break;
                case Gen::nu:
                    if (f.pow % 2 == 1) return false;
                    if (f.pow != 2)
                        throw MomentOrderError("measurement-noise power above 2 in a row derivation");
                    coeff *= cfg_.noise_variance;
                    break;
            }
        }
        return true;
    }

    void flush_row(int v) {
        std::sort(row_.begin(), row_.end(), [](const RowEntry& a, const RowEntry& b) {
            if (a.col != b.col) return a.col < b.col;
            return a.beta_deg < b.beta_deg;
        });
        for (std::size_t i = 0; i < row_.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < row_.size() && row_[j].col == row_[i].col &&
                   row_[j].beta_deg == row_[i].beta_deg) {
                sum += row_[j].value;
                ++j;
            }
            if (sum != 0.0) tri_[row_[i].beta_deg].push_back({v, row_[i].col, sum});
            i = j;
        }
    }

    void attach_outputs(StateSpaceModel& m) {
        if (order_ == 2) {
            OutputFunctional mse;
            mse.name = "mse";
            mse.constant = mse_lc_.constant.c[0];
            for (const auto& [mono, poly] : mse_lc_.terms) {
                if (poly.c[1] != 0.0 || poly.c[2] != 0.0)
                    throw NumericsError("mean-square error picked up a step-size dependence");
                mse.coeffs.push_back({index_.at(mono.factors), poly.c[0]});
            }
            std::sort(mse.coeffs.begin(), mse.coeffs.end());
            m.outputs.push_back(std::move(mse));
        }
        for (int i = 0; i < cfg_.n_adaptive; ++i) {
            OutputFunctional w;
            w.name = "w" + std::to_string(i);
            w.constant = cfg_.w_star[i];
            w.coeffs = {{index_.at({{Gen::dev, (std::uint16_t)i, 1}}), -1.0}};
            m.outputs.push_back(std::move(w));
        }
    }

    struct RowEntry {
        int col;
        int beta_deg;
        double value;
    };

    const SystemConfig& cfg_;
    int order_;
    DeriveOptions opts_;
    std::vector<Expression> exprs_;
    std::unordered_map<long, Expression> pair_cache_;
    std::unordered_map<std::vector<Factor>, int, KeyHash, KeyEq> index_;
    std::vector<StateVariable> vars_;
    LinearCombination mse_lc_;
    std::vector<Triplet> tri_[3];
    std::vector<BetaPoly> force_;
    std::vector<RowEntry> row_;
    std::vector<Factor> shifted_, devs_, residual_;
};

} // namespace

StateSpaceModel derive_model(const SystemConfig& cfg, int order, const DeriveOptions& opts) {
    return ClosureBuilder(cfg, order, opts).build();
}

long long count_equations(int n_adaptive, int ma_order, int p_excess, int order,
                          long long cap) {
    // Generic shape: positive irrational-ish taps and plant coefficients so no
    // coefficient sum can cancel; the discovered support is then exactly the
    // structural one.
    SystemConfig cfg;
    cfg.n_adaptive = n_adaptive;
    cfg.p_excess = p_excess;
    cfg.ma_order = ma_order;
    cfg.b_coeffs.resize(ma_order);
    for (int m = 0; m < ma_order; ++m) cfg.b_coeffs[m] = std::sqrt(2.0 + m);
    cfg.w_star.resize(n_adaptive + p_excess);
    for (int i = 0; i < n_adaptive + p_excess; ++i) cfg.w_star[i] = std::sqrt(3.0 + i);
    cfg.noise_variance = 0.01;
    cfg.moments = MomentSpec::gaussian_unit(
        required_moment_order(n_adaptive, ma_order, p_excess, order));
    DeriveOptions opts;
    opts.cap = cap;
    opts.build_matrices = false;
    return ClosureBuilder(cfg, order, opts).count();
}

const OutputFunctional& mse_functional(const StateSpaceModel& model) {
    if (model.order < 2)
        throw ConfigError("the mean-square error needs a second-order model");
    return model.output("mse");
}

std::vector<OutputFunctional> mean_weight_functionals(const StateSpaceModel& model) {
    std::vector<OutputFunctional> out;
    for (int i = 0; i < model.cfg.n_adaptive; ++i)
        out.push_back(model.output("w" + std::to_string(i)));
    return out;
}

std::vector<double> initial_state(const StateSpaceModel& model) {
    std::vector<double> y0(model.dim(), 0.0);
    for (int v = 0; v < model.dim(); ++v) {
        double val = 1.0;
        for (const auto& f : model.variables[v].mono.factors) {
            if (f.kind == Gen::u) {
                // distinct prehistory lags are independent draws
                if (f.pow % 2 == 1) {
                    val = 0.0;
                    break;
                }
                val *= model.cfg.moments.gamma(f.pow);
            } else if (f.kind == Gen::dev) {
                // w(0) = 0, so the deviation starts exactly at w_star
                val *= std::pow(model.cfg.w_star[f.idx], (double)f.pow);
            } else {
                throw NumericsError("state variable contains a measurement-noise factor");
            }
        }
        y0[v] = val;
    }
    return y0;
}

} // namespace lmsexact
