#include "lmsexact/expression.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace lmsexact {

bool Monomial::same_key(const Monomial& o) const {
    return beta_deg == o.beta_deg && factors.size() == o.factors.size() &&
           std::equal(factors.begin(), factors.end(), o.factors.begin());
}

int Monomial::dev_degree() const {
    int d = 0;
    for (const auto& f : factors)
        if (f.kind == Gen::dev) d += f.pow;
    return d;
}

bool Monomial::has_dev() const {
    for (const auto& f : factors)
        if (f.kind == Gen::dev) return true;
    return false;
}

int compare_key(const Monomial& a, const Monomial& b) {
    const std::size_t n = std::min(a.factors.size(), b.factors.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Factor &fa = a.factors[i], &fb = b.factors[i];
        if (fa.kind != fb.kind) return fa.kind < fb.kind ? -1 : 1;
        if (fa.idx != fb.idx) return fa.idx < fb.idx ? -1 : 1;
        if (fa.pow != fb.pow) return fa.pow < fb.pow ? -1 : 1;
    }
    if (a.factors.size() != b.factors.size())
        return a.factors.size() < b.factors.size() ? -1 : 1;
    if (a.beta_deg != b.beta_deg) return a.beta_deg < b.beta_deg ? -1 : 1;
    return 0;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.coeff = a.coeff * b.coeff;
    r.beta_deg = a.beta_deg + b.beta_deg;
    r.factors.reserve(a.factors.size() + b.factors.size());
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        const Factor &fa = a.factors[i], &fb = b.factors[j];
        if (fa.kind == fb.kind && fa.idx == fb.idx) {
            r.factors.push_back({fa.kind, fa.idx, (std::uint16_t)(fa.pow + fb.pow)});
            ++i;
            ++j;
        } else if (factor_id_less(fa, fb)) {
            r.factors.push_back(fa);
            ++i;
        } else {
            r.factors.push_back(fb);
            ++j;
        }
    }
    for (; i < a.factors.size(); ++i) r.factors.push_back(a.factors[i]);
    for (; j < b.factors.size(); ++j) r.factors.push_back(b.factors[j]);
    return r;
}

Expression Expression::from_terms(std::vector<Monomial> raw) {
    for (auto& m : raw)
        std::sort(m.factors.begin(), m.factors.end(),
                  [](const Factor& x, const Factor& y) { return factor_id_less(x, y); });
    std::sort(raw.begin(), raw.end(),
              [](const Monomial& x, const Monomial& y) { return compare_key(x, y) < 0; });
    Expression e;
    e.terms.reserve(raw.size());
    for (auto& m : raw) {
        if (!e.terms.empty() && e.terms.back().same_key(m))
            e.terms.back().coeff += m.coeff;
        else
            e.terms.push_back(std::move(m));
        if (!e.terms.empty() && e.terms.back().coeff == 0.0) e.terms.pop_back();
    }
    return e;
}

Expression add(const Expression& a, const Expression& b) {
    std::vector<Monomial> all;
    all.reserve(a.terms.size() + b.terms.size());
    all.insert(all.end(), a.terms.begin(), a.terms.end());
    all.insert(all.end(), b.terms.begin(), b.terms.end());
    return Expression::from_terms(std::move(all));
}

Expression multiply(const Expression& a, const Expression& b) {
    std::vector<Monomial> prods;
    prods.reserve(a.terms.size() * b.terms.size());
    for (const auto& ma : a.terms)
        for (const auto& mb : b.terms) prods.push_back(mono_mul(ma, mb));
    return Expression::from_terms(std::move(prods));
}

Expression scale(const Expression& a, double c) {
    if (c == 0.0) return {};
    Expression r = a;
    for (auto& m : r.terms) m.coeff *= c;
    return r;
}

Expression scale_beta(const Expression& a, double factor, int beta_inc) {
    Expression r = scale(a, factor);
    for (auto& m : r.terms) m.beta_deg += beta_inc;
    return r;
}

static void append_factor(std::string& s, const Factor& f) {
    char buf[48];
    switch (f.kind) {
        case Gen::u:
            if (f.idx == 0)
                std::snprintf(buf, sizeof buf, "u(k)");
            else
                std::snprintf(buf, sizeof buf, "u(k-%u)", (unsigned)f.idx);
            break;
        case Gen::dev:
            std::snprintf(buf, sizeof buf, "wt%u", (unsigned)f.idx);
            break;
        case Gen::nu:
            std::snprintf(buf, sizeof buf, "nu");
            break;
    }
    s += buf;
    if (f.pow > 1) {
        std::snprintf(buf, sizeof buf, "^%u", (unsigned)f.pow);
        s += buf;
    }
}

std::string to_string(const Monomial& m) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", m.coeff);
    std::string s = buf;
    if (m.beta_deg == 1) s += "*B";
    if (m.beta_deg >= 2) {
        std::snprintf(buf, sizeof buf, "*B^%d", m.beta_deg);
        s += buf;
    }
    for (const auto& f : m.factors) {
        s += '*';
        append_factor(s, f);
    }
    return s;
}

std::string to_string(const Expression& e) {
    if (e.terms.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < e.terms.size(); ++i) {
        if (i) s += " + ";
        s += to_string(e.terms[i]);
    }
    return s;
}

Expression input_tap(const SystemConfig& cfg, int lag) {
    std::vector<Monomial> terms;
    for (int m = 0; m < cfg.ma_order; ++m) {
        if (cfg.b_coeffs[m] == 0.0) continue;
        Monomial t;
        t.coeff = cfg.b_coeffs[m];
        t.factors = {{Gen::u, (std::uint16_t)(lag + m), 1}};
        terms.push_back(std::move(t));
    }
    return Expression::from_terms(std::move(terms));
}

// The bracket shared by every tap update: x^T(k) wt(k) + xbar^T(k) wbar + nu(k).
static Expression update_bracket(const SystemConfig& cfg) {
    Expression inner;
    for (int l = 0; l < cfg.n_adaptive; ++l) {
        Expression xl = input_tap(cfg, l);
        for (auto& m : xl.terms) {
            m.factors.push_back({Gen::dev, (std::uint16_t)l, 1});
            std::sort(m.factors.begin(), m.factors.end(),
                      [](const Factor& x, const Factor& y) { return factor_id_less(x, y); });
        }
        inner = add(inner, xl);
    }
    const auto wbar = cfg.w_bar_star();
    for (int a = 0; a < cfg.p_excess; ++a) {
        if (wbar[a] == 0.0) continue;
        inner = add(inner, scale(input_tap(cfg, cfg.n_adaptive + a), wbar[a]));
    }
    Monomial nu;
    nu.factors = {{Gen::nu, 0, 1}};
    inner = add(inner, Expression::from_terms({nu}));
    return inner;
}

std::vector<Expression> expand_deviation_update(const SystemConfig& cfg) {
    cfg.validate();
    const Expression bracket = update_bracket(cfg);
    std::vector<Expression> out;
    out.reserve(cfg.n_adaptive);
    for (int i = 0; i < cfg.n_adaptive; ++i) {
        Monomial ident;
        ident.factors = {{Gen::dev, (std::uint16_t)i, 1}};
        Expression e = Expression::from_terms({ident});
        e = add(e, scale_beta(multiply(input_tap(cfg, i), bracket), -1.0, 1));
        out.push_back(std::move(e));
    }
    return out;
}

Expression expand_error(const SystemConfig& cfg) {
    cfg.validate();
    return update_bracket(cfg);
}

void BetaPoly::add(int deg, double v) {
    if (deg < 0 || deg > 2)
        throw NumericsError("beta degree " + std::to_string(deg) +
                            " outside the supported polynomial range");
    c[deg] += v;
}

ReducedTerm reduce_monomial(const Monomial& m, const MomentSpec& moments,
                            double noise_variance, ReduceMode mode) {
    ReducedTerm out;
    out.coeff = m.coeff;
    out.beta_deg = m.beta_deg;
    if (m.coeff == 0.0) return out;

    const bool joint = (mode == ReduceMode::exact) && m.has_dev();
    for (const auto& f : m.factors) {
        switch (f.kind) {
            case Gen::nu:
                // nu(k) is independent of everything else in the monomial.
                if (f.pow % 2 == 1) return out;   // odd symmetric, dies
                if (f.pow == 2) {
                    out.coeff *= noise_variance;
                } else {
                    throw MomentOrderError("measurement-noise power " +
                                           std::to_string(f.pow) +
                                           " cannot arise in a second-order reduction");
                }
                break;
            case Gen::u:
                if (f.idx == 0 || !joint) {
                    // lag-0 samples are independent of the deviation state; in
                    // independence mode every lag factors out the same way.
                    if (f.pow % 2 == 1) return out;   // structural kill, no lookup
                    out.coeff *= moments.gamma(f.pow);
                } else {
                    out.residual.factors.push_back(f);
                }
                break;
            case Gen::dev:
                out.residual.factors.push_back(f);
                break;
        }
    }
    out.alive = out.coeff != 0.0;
    return out;
}

LinearCombination take_expectation(const Expression& e, const MomentSpec& moments,
                                   double noise_variance, ReduceMode mode) {
    LinearCombination lc;
    std::map<std::vector<Factor>, BetaPoly, bool (*)(const std::vector<Factor>&,
                                                     const std::vector<Factor>&)>
        acc(+[](const std::vector<Factor>& a, const std::vector<Factor>& b) {
            return std::lexicographical_compare(
                a.begin(), a.end(), b.begin(), b.end(), [](const Factor& x, const Factor& y) {
                    if (x.kind != y.kind) return x.kind < y.kind;
                    if (x.idx != y.idx) return x.idx < y.idx;
                    return x.pow < y.pow;
                });
        });
    for (const auto& m : e.terms) {
        ReducedTerm r = reduce_monomial(m, moments, noise_variance, mode);
        if (!r.alive) continue;
        if (r.residual.factors.empty())
            lc.constant.add(r.beta_deg, r.coeff);
        else
            acc[r.residual.factors].add(r.beta_deg, r.coeff);
    }
    lc.terms.reserve(acc.size());
    for (auto& [key, poly] : acc) {
        if (poly.is_zero()) continue;
        Monomial res;
        res.factors = key;
        lc.terms.emplace_back(std::move(res), poly);
    }
    return lc;
}

} // namespace lmsexact
