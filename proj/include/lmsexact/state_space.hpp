#pragma once

#include <array>
#include <string>
#include <vector>

#include "lmsexact/config.hpp"
#include "lmsexact/expression.hpp"
#include "lmsexact/sparse.hpp"

namespace lmsexact {

// One scalar the closure tracks: the expectation of a monomial in noise lags
// (all >= 1) and deviation coordinates, e.g. E[u(k-1)^2 wt0(k)].
struct StateVariable {
    Monomial mono;   // coeff 1, beta_deg 0, canonical factor order

    int dev_degree() const { return mono.dev_degree(); }
    std::string name() const;
};

// Linear functional of the state: value = sum coeffs * y + constant. Used for
// the mean weights and the mean-square error.
struct OutputFunctional {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;   // sorted by state index
    double constant = 0.0;

    double value(const std::vector<double>& state) const;
};

// y(k+1) = A(beta) y(k) + f(beta) with A and f quadratic polynomials in the
// step size: A = A0 + beta A1 + beta^2 A2, f = f0 + beta f1 + beta^2 f2.
// First-order families have empty quadratic parts.
struct StateSpaceModel {
    std::string kind;    // "exact-1", "exact-2", "ia-1", "ia-2"
    int order = 0;
    SystemConfig cfg;

    std::vector<StateVariable> variables;
    std::array<SparseMatrix, 3> a;               // by beta power
    std::array<std::vector<double>, 3> forcing;  // by beta power
    std::vector<OutputFunctional> outputs;

    struct Stats {
        long long n_vars = 0;
        long long nnz = 0;
        double derive_seconds = 0.0;
    } stats;

    int dim() const { return (int)variables.size(); }
    const OutputFunctional& output(const std::string& name) const;
    bool has_output(const std::string& name) const;
    std::vector<double> output_values(const std::vector<double>& state) const;
    std::vector<std::string> output_names() const;
};

// A(beta) and f(beta) at a concrete step size.
CSRMatrix evaluate_transition(const StateSpaceModel& m, double beta);
std::vector<double> evaluate_forcing(const StateSpaceModel& m, double beta);

} // namespace lmsexact
