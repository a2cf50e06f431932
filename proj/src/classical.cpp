#include "lmsexact/classical.hpp"

#include <algorithm>

#include "lmsexact/closure.hpp"

namespace lmsexact {

namespace {

// E[x(k-l1) ... x(k-ln)] via the same reduction machinery the closure uses;
// with no deviation factors present the expectation is a plain number.
double product_moment(const SystemConfig& cfg, std::initializer_list<int> lags) {
    Expression prod;
    prod.terms.push_back(Monomial{});   // the constant 1
    for (int lag : lags) prod = multiply(prod, input_tap(cfg, lag));
    const LinearCombination lc =
        take_expectation(prod, cfg.moments, cfg.noise_variance, ReduceMode::exact);
    if (!lc.terms.empty())
        throw NumericsError("input-moment expression failed to reduce to a constant");
    if (lc.constant.c[1] != 0.0 || lc.constant.c[2] != 0.0)
        throw NumericsError("input moment acquired a step-size dependence");
    return lc.constant.c[0];
}

} // namespace

MomentMatrices compute_moment_matrices(const SystemConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_adaptive, p = cfg.p_excess;
    MomentMatrices mm;
    mm.r_x.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) mm.r_x(i, l) = product_moment(cfg, {i, l});
    mm.r_xbar.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a) mm.r_xbar(i, a) = product_moment(cfg, {i, n + a});
    mm.r_xbarxbar.resize(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            mm.r_xbarxbar(a, b) = product_moment(cfg, {n + a, n + b});
    mm.k4.resize(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    mm.k4(i + j * n, a + b * n) = product_moment(cfg, {i, a, b, j});
    return mm;
}

double ia_beta_bound_mean(const SystemConfig& cfg) {
    const MomentMatrices mm = compute_moment_matrices(cfg);
    return 2.0 / mm.r_x.trace();
}

StateSpaceModel ia_first_order(const SystemConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_adaptive;
    const MomentMatrices mm = compute_moment_matrices(cfg);
    const auto wbar = cfg.w_bar_star();

    StateSpaceModel m;
    m.kind = "ia-1";
    m.order = 1;
    m.cfg = cfg;
    for (int i = 0; i < n; ++i) {
        StateVariable v;
        v.mono.factors = {{Gen::dev, (std::uint16_t)i, 1}};
        m.variables.push_back(std::move(v));
    }

    std::vector<Triplet> t0, t1;
    for (int i = 0; i < n; ++i) {
        t0.push_back({i, i, 1.0});
        for (int l = 0; l < n; ++l)
            if (mm.r_x(i, l) != 0.0) t1.push_back({i, l, -mm.r_x(i, l)});
    }
    m.a[0] = SparseMatrix::from_triplets(n, n, std::move(t0));
    m.a[1] = SparseMatrix::from_triplets(n, n, std::move(t1));
    m.a[2] = SparseMatrix::from_triplets(n, n, {});

    for (int d = 0; d < 3; ++d) m.forcing[d].assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int a = 0; a < cfg.p_excess; ++a) v += mm.r_xbar(i, a) * wbar[a];
        m.forcing[1][i] = -v;
    }

    for (int i = 0; i < n; ++i) {
        OutputFunctional w;
        w.name = "w" + std::to_string(i);
        w.constant = cfg.w_star[i];
        w.coeffs = {{i, -1.0}};
        m.outputs.push_back(std::move(w));
    }
    m.stats.n_vars = n;
    m.stats.nnz = (long long)(m.a[0].nnz() + m.a[1].nnz());
    return m;
}

StateSpaceModel ia_second_order(const SystemConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_adaptive;
    const int dim = n * n + n;
    const auto exprs = expand_deviation_update(cfg);
    const MomentMatrices mm = compute_moment_matrices(cfg);
    const auto wbar = cfg.w_bar_star();

    StateSpaceModel m;
    m.kind = "ia-2";
    m.order = 2;
    m.cfg = cfg;

    // state: vec of the deviation correlation matrix (entry (i,j) at i + j*n,
    // mirror slots both kept), then the n mean deviations
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            StateVariable v;
            if (i == j)
                v.mono.factors = {{Gen::dev, (std::uint16_t)i, 2}};
            else if (i < j)
                v.mono.factors = {{Gen::dev, (std::uint16_t)i, 1}, {Gen::dev, (std::uint16_t)j, 1}};
            else
                v.mono.factors = {{Gen::dev, (std::uint16_t)j, 1}, {Gen::dev, (std::uint16_t)i, 1}};
            m.variables.push_back(std::move(v));
        }
    for (int i = 0; i < n; ++i) {
        StateVariable v;
        v.mono.factors = {{Gen::dev, (std::uint16_t)i, 1}};
        m.variables.push_back(std::move(v));
    }

    std::vector<Triplet> tri[3];
    std::vector<std::array<double, 3>> force(dim, {0.0, 0.0, 0.0});

    // under independence a deviation monomial maps straight onto state slots;
    // an off-diagonal coefficient is split over the two mirror columns so the
    // matrix acts symmetrically on consistent states
    auto add_row = [&](int row, const LinearCombination& lc) {
        for (const auto& [mono, poly] : lc.terms) {
            int col;
            double split = 1.0;
            if (mono.dev_degree() == 1) {
                col = n * n + mono.factors[0].idx;
            } else if (mono.factors.size() == 1) {
                col = mono.factors[0].idx * (n + 1);
            } else {
                const int a = mono.factors[0].idx, b = mono.factors[1].idx;
                col = -1;
                split = 0.5;
                for (int d = 0; d < 3; ++d)
                    if (poly.c[d] != 0.0) {
                        tri[d].push_back({row, a + b * n, 0.5 * poly.c[d]});
                        tri[d].push_back({row, b + a * n, 0.5 * poly.c[d]});
                    }
                continue;
            }
            (void)split;
            for (int d = 0; d < 3; ++d)
                if (poly.c[d] != 0.0) tri[d].push_back({row, col, poly.c[d]});
        }
        for (int d = 0; d < 3; ++d) force[row][d] += lc.constant.c[d];
    };

    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const LinearCombination lc = take_expectation(
                multiply(exprs[i], exprs[j]), cfg.moments, cfg.noise_variance,
                ReduceMode::independence);
            add_row(i + j * n, lc);
            if (i != j) add_row(j + i * n, lc);
        }
    for (int i = 0; i < n; ++i)
        add_row(n * n + i,
                take_expectation(exprs[i], cfg.moments, cfg.noise_variance,
                                 ReduceMode::independence));

    for (int d = 0; d < 3; ++d)
        m.a[d] = SparseMatrix::from_triplets(dim, dim, std::move(tri[d]));
    for (int d = 0; d < 3; ++d) {
        m.forcing[d].assign(dim, 0.0);
        for (int r = 0; r < dim; ++r) m.forcing[d][r] = force[r][d];
    }

    // MSE = tr(R_x R_wt) + 2 wbar^T R_xbar^T E[wt] + wbar^T R_xbarxbar wbar + sigma_nu^2
    OutputFunctional mse;
    mse.name = "mse";
    mse.constant = cfg.noise_variance;
    for (int a = 0; a < cfg.p_excess; ++a)
        for (int b = 0; b < cfg.p_excess; ++b)
            mse.constant += wbar[a] * mm.r_xbarxbar(a, b) * wbar[b];
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
            if (mm.r_x(i, a) != 0.0) mse.coeffs.push_back({a + i * n, mm.r_x(i, a)});
    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int a = 0; a < cfg.p_excess; ++a) v += mm.r_xbar(i, a) * wbar[a];
        if (v != 0.0) mse.coeffs.push_back({n * n + i, 2.0 * v});
    }
    std::sort(mse.coeffs.begin(), mse.coeffs.end());
    m.outputs.push_back(std::move(mse));

    for (int i = 0; i < n; ++i) {
        OutputFunctional w;
        w.name = "w" + std::to_string(i);
        w.constant = cfg.w_star[i];
        w.coeffs = {{n * n + i, -1.0}};
        m.outputs.push_back(std::move(w));
    }

    m.stats.n_vars = dim;
    m.stats.nnz = (long long)(m.a[0].nnz() + m.a[1].nnz() + m.a[2].nnz());
    return m;
}

} // namespace lmsexact
