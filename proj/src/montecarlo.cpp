#include "lmsexact/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "lmsexact/philox.hpp"

namespace lmsexact {

UnitSampler::UnitSampler(const std::string& dist_tag, std::uint64_t seed,
                         std::uint64_t stream)
    : eng_(seed, stream) {
    if (dist_tag == "gaussian-unit") {
        laplacian_ = false;
    } else if (dist_tag == "laplacian-unit") {
        laplacian_ = true;
    } else {
        throw ConfigError("no sampler for moment table '" + dist_tag +
                          "'; simulation needs gaussian-unit or laplacian-unit");
    }
}

double UnitSampler::gaussian() {   // Box-Muller, pairs cached
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = eng_.uniform01(), u2 = eng_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

double UnitSampler::next() {
    if (!laplacian_) return gaussian();
    // inverse CDF, scale 1/sqrt(2) for unit variance
    const double u = eng_.uniform01() - 0.5;
    const double s = u < 0.0 ? -1.0 : 1.0;
    return -s * std::log(1.0 - 2.0 * std::fabs(u)) * 0.70710678118654752440;
}

namespace {

// fail early (and uniformly) when the config has no sampler
void require_sampler(const SystemConfig& cfg) { (void)UnitSampler(cfg.moments.tag(), 0, 0); }

struct TrialScratch {
    std::vector<double> w;        // adaptive coefficients
    std::vector<double> x_ring;   // x(k), x(k-1), ..., newest at head
    std::vector<double> u_ring;   // u(k), ..., newest at head
};

// One trial of the adaptive filter. Records w(k) and e(k)^2 for
// k = 0..iterations-1 into `curve` (row-major, n+1 wide) when it is non-null.
// Returns false as soon as a coefficient magnitude passes the threshold.
bool run_trial(const SystemConfig& cfg, long long iterations, double threshold,
               std::uint64_t seed, std::uint64_t trial, double* curve, TrialScratch& s) {
    const int n = cfg.n_adaptive, p = cfg.p_excess, m = cfg.ma_order;
    const int taps = n + p;
    UnitSampler smp(cfg.moments.tag(), seed, trial);
    const double sigma_nu = std::sqrt(cfg.noise_variance);
    const double beta = cfg.beta;

    s.w.assign(n, 0.0);
    s.u_ring.assign(m, 0.0);
    s.x_ring.assign(taps, 0.0);
    int u_head = 0, x_head = 0;
    auto push_u = [&](double v) {
        u_head = (u_head + m - 1) % m;
        s.u_ring[u_head] = v;
    };
    auto push_x = [&]() {
        double x = 0.0;
        for (int j = 0; j < m; ++j) x += cfg.b_coeffs[j] * s.u_ring[(u_head + j) % m];
        x_head = (x_head + taps - 1) % taps;
        s.x_ring[x_head] = x;
    };

    // stationary prehistory: the regressor is fully populated before k = 0
    for (int j = 0; j < m - 1; ++j) push_u(smp.next());
    for (int j = 0; j < taps - 1; ++j) {
        push_u(smp.next());
        push_x();
    }

    for (long long k = 0; k < iterations; ++k) {
        push_u(smp.next());
        push_x();
        const double nu = sigma_nu * smp.gaussian();

        double d = nu, y = 0.0;
        for (int i = 0; i < taps; ++i) d += cfg.w_star[i] * s.x_ring[(x_head + i) % taps];
        for (int i = 0; i < n; ++i) y += s.w[i] * s.x_ring[(x_head + i) % taps];
        const double e = d - y;

        if (curve) {
            double* row = curve + k * (n + 1);
            for (int i = 0; i < n; ++i) row[i] = s.w[i];
            row[n] = e * e;
        }

        bool bad = !std::isfinite(e);
        for (int i = 0; i < n; ++i) {
            s.w[i] += beta * s.x_ring[(x_head + i) % taps] * e;
            bad = bad || !std::isfinite(s.w[i]) || std::fabs(s.w[i]) > threshold;
        }
        if (bad) return false;
    }
    return true;
}

// Per-block accumulator: sums and sums of squares for each recorded quantity,
// in extended precision.
struct BlockAccum {
    std::vector<long double> sum, sumsq;   // iterations * (n+1) each
    long long completed = 0;
    long long diverged = 0;

    void init(std::size_t cells) {
        sum.assign(cells, 0.0L);
        sumsq.assign(cells, 0.0L);
    }
    void absorb(const double* curve, std::size_t cells) {
        for (std::size_t i = 0; i < cells; ++i) {
            const long double v = curve[i];
            sum[i] += v;
            sumsq[i] += v * v;
        }
        ++completed;
    }
    void merge(const BlockAccum& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
        }
        completed += o.completed;
        diverged += o.diverged;
    }
};

// Streaming pairwise reduction: blocks arrive in index order and are folded
// carry-style, so the combination tree (and the floating-point result) is a
// function of the block count alone, not of thread scheduling.
struct PairwiseFolder {
    std::vector<std::optional<BlockAccum>> levels;

    void push(BlockAccum b) {
        for (std::size_t l = 0;; ++l) {
            if (l == levels.size()) levels.emplace_back();
            if (!levels[l]) {
                levels[l] = std::move(b);
                return;
            }
            levels[l]->merge(b);
            b = std::move(*levels[l]);
            levels[l].reset();
        }
    }
    BlockAccum total(std::size_t cells) {
        BlockAccum t;
        t.init(cells);
        for (auto& l : levels)
            if (l) t.merge(*l);
        return t;
    }
};

} // namespace

SimulationResult run(const TrialPlan& plan) {
    plan.cfg.validate();
    require_sampler(plan.cfg);
    if (plan.trials < 1 || plan.iterations < 1)
        throw ConfigError("simulation needs at least one trial and one iteration");

    const int n = plan.cfg.n_adaptive;
    const std::size_t cells = (std::size_t)plan.iterations * (n + 1);
    const long long block = std::max<long long>(1, plan.block_size);
    const long long n_blocks = (plan.trials + block - 1) / block;

    int threads = plan.threads > 0 ? plan.threads : (int)std::thread::hardware_concurrency();
    if (threads < 1) threads = 1;
    threads = (int)std::min<long long>(threads, n_blocks);

    std::atomic<long long> next_block{0};
    std::mutex mu;
    std::map<long long, BlockAccum> arrived;
    long long expect = 0;
    PairwiseFolder folder;

    auto worker = [&]() {
        TrialScratch scratch;
        std::vector<double> curve(cells);
        while (true) {
            const long long b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            BlockAccum acc;
            acc.init(cells);
            const long long t0 = b * block;
            const long long t1 = std::min(plan.trials, t0 + block);
            for (long long t = t0; t < t1; ++t) {
                if (run_trial(plan.cfg, plan.iterations, plan.divergence_threshold,
                              plan.seed, (std::uint64_t)t, curve.data(), scratch))
                    acc.absorb(curve.data(), cells);
                else
                    ++acc.diverged;
            }
            std::lock_guard<std::mutex> lock(mu);
            arrived.emplace(b, std::move(acc));
            while (!arrived.empty() && arrived.begin()->first == expect) {
                folder.push(std::move(arrived.begin()->second));
                arrived.erase(arrived.begin());
                ++expect;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BlockAccum total = folder.total(cells);

    SimulationResult res;
    res.trials = plan.trials;
    res.iterations = plan.iterations;
    res.seed = plan.seed;
    res.diverged_trials = total.diverged;
    res.trials_completed = total.completed;

    const long long c = total.completed;
    auto mean_se = [&](std::size_t cell, double& mean, double& se) {
        if (c == 0) {
            mean = se = std::nan("");
            return;
        }
        const long double mu_ = total.sum[cell] / c;
        mean = (double)mu_;
        if (c < 2) {
            se = std::nan("");
            return;
        }
        long double var = (total.sumsq[cell] - (long double)c * mu_ * mu_) / (c - 1);
        if (var < 0.0L) var = 0.0L;   // rounding guard
        se = (double)std::sqrt((double)(var / c));
    };

    res.mean_w.assign(plan.iterations, std::vector<double>(n));
    res.stderr_w.assign(plan.iterations, std::vector<double>(n));
    res.mse.resize(plan.iterations);
    res.stderr_mse.resize(plan.iterations);
    for (long long k = 0; k < plan.iterations; ++k) {
        for (int i = 0; i < n; ++i)
            mean_se((std::size_t)k * (n + 1) + i, res.mean_w[k][i], res.stderr_w[k][i]);
        mean_se((std::size_t)k * (n + 1) + n, res.mse[k], res.stderr_mse[k]);
    }
    return res;
}

std::vector<double> divergence_probability(const SystemConfig& cfg,
                                           const std::vector<double>& betas,
                                           long long trials, long long iterations,
                                           std::uint64_t seed, double threshold) {
    cfg.validate();
    require_sampler(cfg);
    std::vector<double> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        SystemConfig c = cfg;
        c.beta = beta;

        std::atomic<long long> next{0}, diverged{0};
        int threads = (int)std::thread::hardware_concurrency();
        if (threads < 1) threads = 1;
        auto worker = [&]() {
            TrialScratch scratch;
            long long local = 0;
            while (true) {
                const long long t = next.fetch_add(1);
                if (t >= trials) break;
                if (!run_trial(c, iterations, threshold, seed, (std::uint64_t)t, nullptr,
                               scratch))
                    ++local;
            }
            diverged += local;
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        out.push_back((double)diverged.load() / (double)trials);
    }
    return out;
}

} // namespace lmsexact
