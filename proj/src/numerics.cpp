#include "lmsexact/numerics.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "lmsexact/closure.hpp"

namespace lmsexact {

namespace {

bool sup_norm_bad(const std::vector<double>& y, double limit) {
    for (double v : y)
        if (!std::isfinite(v) || std::fabs(v) > limit) return true;
    return false;
}

} // namespace

IterateResult iterate(const StateSpaceModel& model, double beta, const IterateOptions& opts) {
    if (opts.k_max < 0) throw NumericsError("negative iteration count");
    const CSRMatrix a = evaluate_transition(model, beta);
    const std::vector<double> f = evaluate_forcing(model, beta);

    IterateResult res;
    res.output_names = model.output_names();
    std::vector<double> y = initial_state(model);
    std::vector<double> y_prev = y, y_next(y.size());

    const long long stride = std::max<long long>(1, opts.record_stride);
    auto record = [&](long long k, const std::vector<double>& state) {
        res.ks.push_back(k);
        res.curve.push_back(model.output_values(state));
    };

    record(0, y);
    for (long long k = 1; k <= opts.k_max; ++k) {
        a.multiply(y, y_next);
        for (std::size_t i = 0; i < y_next.size(); ++i) y_next[i] += f[i];

        if (sup_norm_bad(y_next, opts.divergence_norm)) {
            res.diverged = true;
            res.diverged_at = k;
            y = y_next;
            break;
        }
        // Once the map revisits a state bit-for-bit, every later step repeats
        // it (the recursion is deterministic), so the k_max result is known.
        if (opts.fast_forward && (y_next == y || y_next == y_prev)) {
            res.fixed_point_at = k;
            y = y_next;
            for (long long kk = k; kk <= opts.k_max; ++kk)
                if (kk % stride == 0 || kk == opts.k_max) record(kk, y);
            break;
        }
        std::swap(y_prev, y);
        std::swap(y, y_next);

        if (k % stride == 0 || k == opts.k_max) record(k, y);
    }

    res.final_state = y;
    res.final_outputs = model.output_values(y);
    return res;
}

std::vector<double> steady_state(const StateSpaceModel& model, double beta,
                                 bool check_stability) {
    const int n = model.dim();
    if (check_stability) {
        const double rho = spectral_radius(model, beta);
        if (!(rho < 1.0))
            throw UnstableError("recursion does not contract at beta = " + std::to_string(beta) +
                                    " (spectral radius " + std::to_string(rho) + ")",
                                beta, rho);
    }

    const CSRMatrix a = evaluate_transition(model, beta);
    const std::vector<double> f = evaluate_forcing(model, beta);

    Eigen::SparseMatrix<double> lhs(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(a.val.size() + n);
        for (int i = 0; i < n; ++i)
            for (int p = a.ptr[i]; p < a.ptr[i + 1]; ++p)
                trip.emplace_back(i, a.col[p], -a.val[p]);
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
        lhs.setFromTriplets(trip.begin(), trip.end());
    }
    lhs.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(lhs);
    lu.factorize(lhs);
    if (lu.info() != Eigen::Success)
        throw UnstableError("steady-state system is singular at beta = " + std::to_string(beta),
                            beta, 1.0);

    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = f[i];
    Eigen::VectorXd y = lu.solve(rhs);

    // a couple of refinement sweeps; the factorization residual should land
    // well below the 1e-10 documented bound
    double fnorm = rhs.norm();
    if (fnorm == 0.0) fnorm = 1.0;
    for (int pass = 0; pass < 4; ++pass) {
        Eigen::VectorXd r = rhs - lhs * y;
        if (r.norm() <= 1e-13 * fnorm) break;
        y += lu.solve(r);
    }
    const double resid = (rhs - lhs * y).norm();
    if (!(resid <= 1e-10 * fnorm) || !y.allFinite())
        throw NumericsError("steady-state solve residual " + std::to_string(resid) +
                            " exceeds tolerance at beta = " + std::to_string(beta));

    return std::vector<double>(y.data(), y.data() + n);
}

namespace {

double dense_spectral_radius(const CSRMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.n, a.n);
    for (int i = 0; i < a.n; ++i)
        for (int p = a.ptr[i]; p < a.ptr[i + 1]; ++p) d(i, a.col[p]) += a.val[p];
    Eigen::EigenSolver<Eigen::MatrixXd> es(d, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericsError("dense eigensolver failed");
    double rho = 0.0;
    for (int i = 0; i < a.n; ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
    return rho;
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Restarted Arnoldi. A plain power loop stalls on the clustered spectra these
// models have at small step sizes, so a Krylov subspace with Ritz extraction
// does the job instead; complex dominant pairs come out of the small dense
// eigenproblem for free.
double arnoldi_spectral_radius(const CSRMatrix& a, const SpectralOptions& opts) {
    const int n = a.n;
    const int m = std::min(opts.krylov, n);
    std::uint64_t seed = opts.seed;

    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = (double)(splitmix64(seed) >> 11) * (1.0 / 9007199254740992.0) - 0.5;
    v.normalize();

    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd w(n);

    double best = 0.0, prev = -1.0;
    for (int restart = 0; restart < opts.max_restarts; ++restart) {
        H.setZero();
        V.col(0) = v;
        int built = m;
        for (int j = 0; j < m; ++j) {
            a.multiply(V.col(j).data(), w.data());
            for (int pass = 0; pass < 2; ++pass) {   // MGS with reorthogonalization
                for (int i = 0; i <= j; ++i) {
                    const double h = V.col(i).dot(w);
                    w -= h * V.col(i);
                    if (pass == 0)
                        H(i, j) = h;
                    else
                        H(i, j) += h;
                }
            }
            const double hn = w.norm();
            H(j + 1, j) = hn;
            if (hn < 1e-14) {   // invariant subspace: Ritz values are exact
                built = j + 1;
                break;
            }
            V.col(j + 1) = w / hn;
        }

        Eigen::MatrixXd Hm = H.topLeftCorner(built, built);
        Eigen::EigenSolver<Eigen::MatrixXd> es(Hm, /*computeEigenvectors=*/true);
        if (es.info() != Eigen::Success) throw NumericsError("Arnoldi Ritz solve failed");

        int dom = 0;
        double rho = 0.0;
        for (int i = 0; i < built; ++i) {
            const double mag = std::abs(es.eigenvalues()[i]);
            if (mag > rho) {
                rho = mag;
                dom = i;
            }
        }
        best = rho;
        if (built < m) return best;   // exact breakdown

        const double res =
            H(m, m - 1) * std::abs(es.eigenvectors().col(dom)[built - 1]);
        const double change = std::fabs(rho - prev);
        if (prev >= 0.0 && change <= opts.tol * std::max(rho, 1e-300) &&
            res <= 1e-8 * std::max(rho, 1e-300))
            return best;
        prev = rho;

        // restart in the direction of the leading Ritz vectors
        Eigen::VectorXcd mix = Eigen::VectorXcd::Zero(built);
        std::vector<int> order(built);
        for (int i = 0; i < built; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
        });
        const int keep = std::min(3, built);
        for (int t = 0; t < keep; ++t) mix += es.eigenvectors().col(order[t]);
        Eigen::VectorXd cand = (V.leftCols(built) * mix).real();
        if (cand.norm() < 1e-14) {
            for (int i = 0; i < n; ++i)
                cand[i] = (double)(splitmix64(seed) >> 11) * (1.0 / 9007199254740992.0) - 0.5;
        }
        v = cand.normalized();
    }

    if (prev >= 0.0 && std::fabs(best - prev) <= 1e-6 * std::max(best, 1e-300))
        return best;   // good enough for a stability verdict, if not to full tol
    throw NumericsError("spectral radius iteration did not converge");
}

} // namespace

double spectral_radius(const CSRMatrix& a, const SpectralOptions& opts) {
    if (a.n == 0) return 0.0;
    if (!opts.force_iterative && a.n <= opts.dense_cutoff) return dense_spectral_radius(a);
    return arnoldi_spectral_radius(a, opts);
}

double spectral_radius(const StateSpaceModel& model, double beta, const SpectralOptions& opts) {
    return spectral_radius(evaluate_transition(model, beta), opts);
}

StabilityReport find_beta_max(const StateSpaceModel& model, double lo, double hi,
                              int scan_points, double tol, const SpectralOptions& sopts) {
    if (!(lo > 0.0) || !(hi > lo)) throw NumericsError("scan range must satisfy 0 < lo < hi");
    if (scan_points < 2) throw NumericsError("need at least two scan points");

    StabilityReport rep;
    rep.model_kind = model.kind;
    rep.tolerance = tol;

    auto rho_at = [&](double beta) {
        const double r = spectral_radius(model, beta, sopts);
        rep.samples.emplace_back(beta, r);
        return r;
    };

    const double ratio = std::pow(hi / lo, 1.0 / (scan_points - 1));
    double prev_beta = lo;
    double prev_rho = rho_at(lo);
    if (prev_rho >= 1.0)
        throw NumericsError("already unstable at the scan start beta = " + std::to_string(lo) +
                            "; widen the range downward");

    double blo = 0.0, bhi = 0.0;
    for (int i = 1; i < scan_points; ++i) {
        const double beta = (i == scan_points - 1) ? hi : lo * std::pow(ratio, i);
        const double r = rho_at(beta);
        if (prev_rho < 1.0 && r >= 1.0) {
            blo = prev_beta;
            bhi = beta;
            break;
        }
        prev_beta = beta;
        prev_rho = r;
    }
    if (bhi == 0.0) {
        rep.found = false;
        rep.beta_max = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    while ((bhi - blo) > tol * blo) {
        const double mid = 0.5 * (blo + bhi);
        if (rho_at(mid) >= 1.0)
            bhi = mid;
        else
            blo = mid;
    }
    rep.found = true;
    rep.bracket_lo = blo;
    rep.bracket_hi = bhi;
    rep.beta_max = 0.5 * (blo + bhi);
    return rep;
}

} // namespace lmsexact
