#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lmsexact/config.hpp"

namespace lmsexact {

// Symbolic layer for the deviation recursion. Expressions are multilinear
// polynomials over three kinds of generators:
//   u(k-j)   driving-noise samples, identified by their lag j >= 0
//   wt_i(k)  deviation coordinates w_star_i - w_i(k)
//   nu(k)    the measurement noise sample
// Numeric data (MA taps, plant tail, moments) is folded into coefficients at
// construction time. The step size stays formal: every term carries the power
// of beta it was produced with, so one derivation yields the whole family of
// models parameterized by beta.

enum class Gen : std::uint8_t { u = 0, dev = 1, nu = 2 };

struct Factor {
    Gen kind;
    std::uint16_t idx;   // lag for u, tap index for dev, unused for nu
    std::uint16_t pow;
};

inline bool factor_id_less(const Factor& a, const Factor& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.idx < b.idx;
}
inline bool operator==(const Factor& a, const Factor& b) {
    return a.kind == b.kind && a.idx == b.idx && a.pow == b.pow;
}

struct Monomial {
    double coeff = 1.0;
    int beta_deg = 0;
    std::vector<Factor> factors;   // sorted by (kind, idx), unique ids, pow >= 1

    bool same_key(const Monomial& o) const;
    int dev_degree() const;
    bool has_dev() const;
};

// -1 / 0 / +1 ordering of (factors, beta_deg); ignores the coefficient.
int compare_key(const Monomial& a, const Monomial& b);

Monomial mono_mul(const Monomial& a, const Monomial& b);

struct Expression {
    std::vector<Monomial> terms;   // canonical: key-sorted, unique keys, nonzero coeffs

    static Expression from_terms(std::vector<Monomial> raw);   // normalizes
    std::size_t size() const { return terms.size(); }
};

Expression add(const Expression& a, const Expression& b);
Expression multiply(const Expression& a, const Expression& b);
Expression scale(const Expression& a, double c);
// Multiplies by (factor * beta^beta_inc); used to attach the -beta update gain.
Expression scale_beta(const Expression& a, double factor, int beta_inc);

std::string to_string(const Monomial& m);
std::string to_string(const Expression& e);

// One deviation-update expression per adaptive tap:
//   wt_i(k+1) = wt_i(k) - beta x(k-i) [ sum_l x(k-l) wt_l(k)
//                                       + sum_a x(k-N-a) wbar_a + nu(k) ]
// with x(k-j) expanded through the MA taps into u generators.
std::vector<Expression> expand_deviation_update(const SystemConfig& cfg);

// Error signal e(k) = sum_i x(k-i) wt_i(k) + sum_a x(k-N-a) wbar_a + nu(k).
Expression expand_error(const SystemConfig& cfg);

// x(k-lag) as an expression in u generators.
Expression input_tap(const SystemConfig& cfg, int lag);

// Coefficients of a beta polynomial; degree at most 2 arises here (one factor
// of beta per update expression, at most two expressions multiplied).
struct BetaPoly {
    std::array<double, 3> c{{0.0, 0.0, 0.0}};

    void add(int deg, double v);
    bool is_zero() const { return c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0; }
    double at(double beta) const { return c[0] + beta * (c[1] + beta * c[2]); }
};

enum class ReduceMode {
    exact,        // keep joint noise/deviation moments together
    independence  // classical assumption: every u factors out on its own
};

// Expectation of a single monomial. Either the term dies (odd lag-0 power,
// single nu factor), or it reduces to coeff * residual where the residual is
// a canonical monomial of surviving generators (empty when fully numeric).
struct ReducedTerm {
    bool alive = false;
    double coeff = 0.0;
    int beta_deg = 0;
    Monomial residual;   // coeff 1, beta_deg 0
};
ReducedTerm reduce_monomial(const Monomial& m, const MomentSpec& moments,
                            double noise_variance, ReduceMode mode);

// Expectation of a whole expression: a constant plus a combination of
// expectations of residual monomials (the prospective state variables).
struct LinearCombination {
    BetaPoly constant;
    std::vector<std::pair<Monomial, BetaPoly>> terms;   // key-sorted
};
LinearCombination take_expectation(const Expression& e, const MomentSpec& moments,
                                   double noise_variance,
                                   ReduceMode mode = ReduceMode::exact);

} // namespace lmsexact
