#include "lmsexact/state_space.hpp"

#include <algorithm>

namespace lmsexact {

std::string StateVariable::name() const {
    if (mono.factors.empty()) return "E[1]";
    std::string s = "E[";
    for (std::size_t i = 0; i < mono.factors.size(); ++i) {
        Monomial one;
        one.factors = {mono.factors[i]};
        std::string t = to_string(one);   // "1*u(k-1)^2"
        if (i) s += ' ';
        s += t.substr(2);
    }
    s += ']';
    return s;
}

double OutputFunctional::value(const std::vector<double>& state) const {
    double v = constant;
    for (const auto& [idx, c] : coeffs) v += c * state[idx];
    return v;
}

const OutputFunctional& StateSpaceModel::output(const std::string& n) const {
    for (const auto& o : outputs)
        if (o.name == n) return o;
    throw ConfigError("model has no output named '" + n + "'");
}

bool StateSpaceModel::has_output(const std::string& n) const {
    for (const auto& o : outputs)
        if (o.name == n) return true;
    return false;
}

std::vector<double> StateSpaceModel::output_values(const std::vector<double>& state) const {
    std::vector<double> v;
    v.reserve(outputs.size());
    for (const auto& o : outputs) v.push_back(o.value(state));
    return v;
}

std::vector<std::string> StateSpaceModel::output_names() const {
    std::vector<std::string> v;
    v.reserve(outputs.size());
    for (const auto& o : outputs) v.push_back(o.name);
    return v;
}

CSRMatrix evaluate_transition(const StateSpaceModel& m, double beta) {
    std::vector<Triplet> all;
    all.reserve(m.a[0].nnz() + m.a[1].nnz() + m.a[2].nnz());
    const double s[3] = {1.0, beta, beta * beta};
    for (int d = 0; d < 3; ++d)
        for (const auto& t : m.a[d].entries)
            all.push_back({t.row, t.col, t.value * s[d]});
    return to_csr(SparseMatrix::from_triplets(m.dim(), m.dim(), std::move(all)));
}

std::vector<double> evaluate_forcing(const StateSpaceModel& m, double beta) {
    std::vector<double> f(m.dim(), 0.0);
    const double s[3] = {1.0, beta, beta * beta};
    for (int d = 0; d < 3; ++d) {
        if (m.forcing[d].empty()) continue;
        for (int i = 0; i < m.dim(); ++i) f[i] += s[d] * m.forcing[d][i];
    }
    return f;
}

} // namespace lmsexact
