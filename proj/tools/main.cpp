#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lmsexact/classical.hpp"
#include "lmsexact/closure.hpp"
#include "lmsexact/errors.hpp"
#include "lmsexact/io.hpp"
#include "lmsexact/montecarlo.hpp"
#include "lmsexact/numerics.hpp"

using namespace lmsexact;

namespace {

std::string short6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file: " + path);
    return f;
}

std::string normalize_dist(const std::string& d) {
    if (d == "gaussian" || d == "gaussian-unit") return "gaussian-unit";
    if (d == "laplacian" || d == "laplacian-unit") return "laplacian-unit";
    throw ConfigError("unknown distribution: " + d);
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Shared "where does the system come from" option block: a config file, or a
// named preset plus the filter/plant/input shape.
struct Src {
    std::string config;
    std::string preset;
    std::string dist = "gaussian";
    int n = 1;
    int m = 1;
    int p = 0;
    double beta = kUnset;
    double noise = kUnset;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config, "JSON config file");
        cmd->add_option("--preset", preset,
                        "named plant setup: config1 (all-ones plant) or "
                        "config2 (small unmodelled tail)");
        cmd->add_option("-n,--n", n, "adaptive filter length N");
        cmd->add_option("-m,--m", m, "moving-average input length M (1 = white)");
        cmd->add_option("-p,--p", p, "unmodelled plant taps P");
        cmd->add_option("--dist", dist, "driving-noise density: gaussian | laplacian");
        cmd->add_option("--beta", beta, "step size (overrides the config file)");
        cmd->add_option("--noise-variance", noise, "measurement noise variance override");
    }

    SystemConfig resolve() const {
        SystemConfig cfg;
        if (!config.empty()) {
            cfg = load_config_file(config);
        } else if (!preset.empty()) {
            cfg = preset_scenario(preset, n, m, p, normalize_dist(dist));
        } else {
            throw ConfigError("give either --config FILE or --preset NAME with -n/-m/-p");
        }
        if (!std::isnan(beta)) cfg.beta = beta;
        if (!std::isnan(noise)) cfg.noise_variance = noise;
        cfg.validate();
        return cfg;
    }
};

StateSpaceModel build_model(const SystemConfig& cfg, const std::string& kind,
                            int order, long long cap) {
    if (kind == "exact") {
        DeriveOptions opts;
        opts.cap = cap;
        return derive_model(cfg, order, opts);
    }
    if (kind == "ia")
        return order == 1 ? ia_first_order(cfg) : ia_second_order(cfg);
    throw ConfigError("unknown model kind: " + kind + " (want exact or ia)");
}

double pick_beta(const StateSpaceModel& model, double flag_beta) {
    double beta = std::isnan(flag_beta) ? model.cfg.beta : flag_beta;
    if (beta <= 0.0)
        throw ConfigError("step size must be positive; set --beta or the config's beta");
    return beta;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& a) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void print_matrix(const std::string& name, const Eigen::MatrixXd& a) {
    std::cout << name << " (" << a.rows() << "x" << a.cols() << "):\n";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        std::cout << " ";
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            std::cout << " " << short6(a(i, j));
        std::cout << "\n";
    }
}

struct GridSpec {
    double lo = 0.0, hi = 0.0;
    int steps = 0;
};

// "lo:hi:steps", geometric spacing.
GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    char trailing = 0;
    int got = std::sscanf(s.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.steps, &trailing);
    if (got != 3 || g.lo <= 0.0 || g.hi <= g.lo || g.steps < 2)
        throw ConfigError("bad grid '" + s + "', want lo:hi:steps with 0 < lo < hi");
    return g;
}

std::vector<double> grid_points(const GridSpec& g) {
    std::vector<double> betas(g.steps);
    for (int i = 0; i < g.steps; ++i)
        betas[i] = g.lo * std::pow(g.hi / g.lo, (double)i / (g.steps - 1));
    return betas;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment-space analysis of the deficient-length LMS adaptive "
                 "filter with a moving-average input: exact closed recursions, "
                 "classical small-step approximations, and a Monte Carlo checker"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    // ---- derive ----
    auto* cd = app.add_subcommand(
        "derive", "Derive a state-space moment model and optionally save it");
    Src sd;
    sd.attach(cd);
    int d_order = 1;
    std::string d_kind = "exact", d_out;
    long long d_cap = 2'000'000;
    bool d_vars = false;
    cd->add_option("--order", d_order, "moment order: 1 (means) or 2 (correlations)")
        ->check(CLI::Range(1, 2));
    cd->add_option("--kind", d_kind, "exact | ia (independence assumption)");
    cd->add_option("--cap", d_cap, "abort if the closure needs more state variables");
    cd->add_option("-o,--out", d_out, "write the model as JSON");
    cd->add_flag("--variables", d_vars, "list the tracked state variables");

    // ---- count ----
    auto* cc = app.add_subcommand(
        "count", "Closed-system size for a filter/input shape, without building it");
    int c_n = 1, c_m = 1, c_p = 0, c_order = 1;
    long long c_cap = 2'000'000;
    cc->add_option("-n,--n", c_n, "adaptive filter length N")->required();
    cc->add_option("-m,--m", c_m, "moving-average input length M")->required();
    cc->add_option("-p,--p", c_p, "unmodelled plant taps P");
    cc->add_option("--order", c_order, "moment order")->check(CLI::Range(1, 2));
    cc->add_option("--cap", c_cap, "abort past this many state variables");

    // ---- iterate ----
    auto* ci = app.add_subcommand(
        "iterate", "Run a model's recursion and emit the learning curve");
    Src si;
    si.attach(ci);
    int i_order = 2;
    std::string i_kind = "exact", i_model, i_out;
    long long i_k = 1000, i_stride = 1, i_cap = 2'000'000;
    bool i_no_ff = false;
    ci->add_option("--order", i_order, "moment order")->check(CLI::Range(1, 2));
    ci->add_option("--kind", i_kind, "exact | ia");
    ci->add_option("--model", i_model, "load a saved model instead of deriving");
    ci->add_option("-k,--iterations", i_k, "number of steps");
    ci->add_option("--stride", i_stride, "record every this many steps");
    ci->add_option("--cap", i_cap, "state-variable cap for the derivation");
    ci->add_option("-o,--out", i_out, "CSV output (k plus one column per output)");
    ci->add_flag("--no-fast-forward", i_no_ff,
                 "keep stepping even after the state stops changing");

    // ---- steady-state ----
    auto* cs = app.add_subcommand(
        "steady-state", "Fixed point of a model's recursion at a given step size");
    Src ss;
    ss.attach(cs);
    int s_order = 2;
    std::string s_kind = "exact", s_model, s_out;
    long long s_cap = 2'000'000;
    bool s_no_check = false;
    cs->add_option("--order", s_order, "moment order")->check(CLI::Range(1, 2));
    cs->add_option("--kind", s_kind, "exact | ia");
    cs->add_option("--model", s_model, "load a saved model instead of deriving");
    cs->add_option("--cap", s_cap, "state-variable cap for the derivation");
    cs->add_option("-o,--out", s_out, "JSON output of the outputs and state");
    cs->add_flag("--no-stability-check", s_no_check,
                 "solve the linear system even if the recursion diverges");

    // ---- stability ----
    auto* ct = app.add_subcommand(
        "stability", "Largest stable step size, or a spectral-radius sweep");
    Src st;
    st.attach(ct);
    int t_order = 2;
    std::string t_kind = "exact", t_model, t_out, t_grid, t_format = "csv";
    long long t_cap = 2'000'000;
    double t_lo = 1e-4, t_hi = 1.0, t_tol = 1e-5, t_rho_at = kUnset;
    int t_points = 64;
    bool t_empirical = false;
    long long t_trials = 500, t_iters = 2000;
    std::uint64_t t_seed = 1;
    ct->add_option("--order", t_order, "moment order")->check(CLI::Range(1, 2));
    ct->add_option("--kind", t_kind, "exact | ia");
    ct->add_option("--model", t_model, "load a saved model instead of deriving");
    ct->add_option("--cap", t_cap, "state-variable cap for the derivation");
    ct->add_option("--lo", t_lo, "search bracket lower end");
    ct->add_option("--hi", t_hi, "search bracket upper end");
    ct->add_option("--points", t_points, "scan points before bisection");
    ct->add_option("--tol", t_tol, "relative width of the final bracket");
    ct->add_option("--rho-at", t_rho_at, "just print the spectral radius at this beta");
    ct->add_option("--beta-grid", t_grid, "lo:hi:steps sweep instead of a search");
    ct->add_flag("--empirical", t_empirical,
                 "add Monte Carlo divergence fractions to the sweep");
    ct->add_option("--trials", t_trials, "trials per grid point for --empirical");
    ct->add_option("--iterations", t_iters, "steps per trial for --empirical");
    ct->add_option("--seed", t_seed, "random seed for --empirical");
    ct->add_option("--format", t_format, "csv | json for --out");
    ct->add_option("-o,--out", t_out, "write the sweep or search samples");

    // ---- simulate ----
    auto* cm = app.add_subcommand(
        "simulate", "Monte Carlo ensemble of the actual filter recursion");
    Src sm;
    sm.attach(cm);
    long long m_trials = 10000, m_iters = 300, m_block = 1024;
    std::uint64_t m_seed = 1;
    int m_threads = 0;
    double m_thresh = 10.0;
    std::string m_out;
    cm->add_option("--trials", m_trials, "ensemble size");
    cm->add_option("--iterations", m_iters, "steps per trial");
    cm->add_option("--seed", m_seed, "random seed (same seed, same averages)");
    cm->add_option("--threads", m_threads, "worker threads (0 = all cores)");
    cm->add_option("--threshold", m_thresh, "per-coefficient divergence magnitude");
    cm->add_option("--block", m_block, "trials per accumulation block");
    cm->add_option("-o,--out", m_out, "CSV of ensemble means and standard errors");

    // ---- compare ----
    auto* cp = app.add_subcommand(
        "compare", "Exact vs independence-assumption curves, with a Monte Carlo check");
    Src sp;
    sp.attach(cp);
    long long p_k = 300, p_trials = 10000, p_cap = 2'000'000;
    std::uint64_t p_seed = 1;
    int p_threads = 0;
    std::string p_out;
    bool p_skip_mc = false;
    cp->add_option("-k,--iterations", p_k, "steps");
    cp->add_option("--trials", p_trials, "Monte Carlo ensemble size");
    cp->add_option("--seed", p_seed, "random seed");
    cp->add_option("--threads", p_threads, "worker threads (0 = all cores)");
    cp->add_option("--cap", p_cap, "state-variable cap for the derivation");
    cp->add_flag("--theory-only", p_skip_mc, "skip the Monte Carlo column");
    cp->add_option("-o,--out", p_out, "CSV with both theories and the simulation");

    // ---- moments ----
    auto* cq = app.add_subcommand(
        "moments", "Input-process moment matrices and the classical step-size bound");
    Src sq;
    sq.attach(cq);
    std::string q_out, q_format = "json";
    bool q_k4 = false;
    cq->add_flag("--k4", q_k4, "also print the fourth-moment matrix");
    cq->add_option("--format", q_format, "json (the only format for --out)");
    cq->add_option("-o,--out", q_out, "write the matrices as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(cd)) {
            SystemConfig cfg = sd.resolve();
            StateSpaceModel model = build_model(cfg, d_kind, d_order, d_cap);
            std::cout << "kind=" << model.kind << " dim=" << model.dim()
                      << " nnz=" << model.stats.nnz
                      << " derive_seconds=" << short6(model.stats.derive_seconds)
                      << "\n";
            if (d_vars)
                for (int i = 0; i < model.dim(); ++i)
                    std::cout << "  y[" << i << "] = " << model.variables[i].name()
                              << "\n";
            if (!d_out.empty()) {
                save_model(model, d_out);
                std::cout << "wrote " << d_out << "\n";
            }
        } else if (app.got_subcommand(cc)) {
            long long n = count_equations(c_n, c_m, c_p, c_order, c_cap);
            std::cout << n << "\n";
        } else if (app.got_subcommand(ci)) {
            StateSpaceModel model =
                !i_model.empty() ? load_model(i_model)
                                 : build_model(si.resolve(), i_kind, i_order, i_cap);
            double beta = pick_beta(model, si.beta);
            IterateOptions opts;
            opts.k_max = i_k;
            opts.record_stride = i_stride;
            opts.fast_forward = !i_no_ff;
            IterateResult res = iterate(model, beta, opts);
            if (!i_out.empty()) {
                std::ofstream f = open_out(i_out);
                std::vector<std::string> head{"k"};
                for (const auto& nm : res.output_names) head.push_back(nm);
                write_row(f, head);
                for (std::size_t t = 0; t < res.ks.size(); ++t) {
                    std::vector<std::string> row{std::to_string(res.ks[t])};
                    for (double v : res.curve[t]) row.push_back(format_double(v));
                    write_row(f, row);
                }
            }
            if (res.diverged)
                std::cout << "diverged at k=" << res.diverged_at << "\n";
            else
                for (std::size_t i = 0; i < res.output_names.size(); ++i)
                    std::cout << res.output_names[i] << "(k=" << i_k
                              << ") = " << format_double(res.final_outputs[i]) << "\n";
        } else if (app.got_subcommand(cs)) {
            StateSpaceModel model =
                !s_model.empty() ? load_model(s_model)
                                 : build_model(ss.resolve(), s_kind, s_order, s_cap);
            double beta = pick_beta(model, ss.beta);
            std::vector<double> y = steady_state(model, beta, !s_no_check);
            std::vector<double> outs = model.output_values(y);
            std::vector<std::string> names = model.output_names();
            for (std::size_t i = 0; i < names.size(); ++i)
                std::cout << names[i] << " = " << format_double(outs[i]) << "\n";
            if (!s_out.empty()) {
                nlohmann::ordered_json j;
                j["beta"] = beta;
                j["kind"] = model.kind;
                for (std::size_t i = 0; i < names.size(); ++i)
                    j["outputs"][names[i]] = outs[i];
                j["state"] = y;
                open_out(s_out) << j.dump(1) << "\n";
            }
        } else if (app.got_subcommand(ct)) {
            StateSpaceModel model =
                !t_model.empty() ? load_model(t_model)
                                 : build_model(st.resolve(), t_kind, t_order, t_cap);
            if (!std::isnan(t_rho_at)) {
                std::cout << "rho(" << format_double(t_rho_at)
                          << ") = " << format_double(spectral_radius(model, t_rho_at))
                          << "\n";
            } else if (!t_grid.empty()) {
                GridSpec g = parse_grid(t_grid);
                std::vector<double> betas = grid_points(g);
                std::vector<double> rhos(betas.size());
                for (std::size_t i = 0; i < betas.size(); ++i)
                    rhos[i] = spectral_radius(model, betas[i]);
                std::vector<double> div;
                if (t_empirical)
                    div = divergence_probability(model.cfg, betas, t_trials, t_iters,
                                                 t_seed);
                nlohmann::ordered_json j = nlohmann::ordered_json::array();
                for (std::size_t i = 0; i < betas.size(); ++i) {
                    std::cout << "beta=" << short6(betas[i])
                              << " rho=" << short6(rhos[i]);
                    if (t_empirical)
                        std::cout << " diverged_fraction=" << short6(div[i]);
                    std::cout << "\n";
                    nlohmann::ordered_json e{{"beta", betas[i]}, {"rho", rhos[i]}};
                    if (t_empirical) e["diverged_fraction"] = div[i];
                    j.push_back(std::move(e));
                }
                if (!t_out.empty()) {
                    std::ofstream f = open_out(t_out);
                    if (t_format == "json") {
                        f << j.dump(1) << "\n";
                    } else {
                        std::vector<std::string> head{"beta", "rho"};
                        if (t_empirical) head.push_back("diverged_fraction");
                        write_row(f, head);
                        for (std::size_t i = 0; i < betas.size(); ++i) {
                            std::vector<std::string> row{format_double(betas[i]),
                                                         format_double(rhos[i])};
                            if (t_empirical) row.push_back(format_double(div[i]));
                            write_row(f, row);
                        }
                    }
                }
            } else {
                StabilityReport rep = find_beta_max(model, t_lo, t_hi, t_points, t_tol);
                if (rep.found)
                    std::cout << "beta_max = " << format_double(rep.beta_max)
                              << "  (bracket " << format_double(rep.bracket_lo) << " .. "
                              << format_double(rep.bracket_hi) << ")\n";
                else
                    std::cout << "no instability found in (" << short6(t_lo) << ", "
                              << short6(t_hi) << "]\n";
                if (!t_out.empty()) {
                    std::ofstream f = open_out(t_out);
                    if (t_format == "json") {
                        nlohmann::ordered_json j;
                        j["kind"] = model.kind;
                        j["found"] = rep.found;
                        if (rep.found) {
                            j["beta_max"] = rep.beta_max;
                            j["bracket"] = {rep.bracket_lo, rep.bracket_hi};
                        }
                        j["samples"] = nlohmann::ordered_json::array();
                        for (auto& [b, r] : rep.samples)
                            j["samples"].push_back({{"beta", b}, {"rho", r}});
                        f << j.dump(1) << "\n";
                    } else {
                        write_row(f, {"beta", "rho"});
                        for (auto& [b, r] : rep.samples)
                            write_row(f, {format_double(b), format_double(r)});
                    }
                }
            }
        } else if (app.got_subcommand(cm)) {
            TrialPlan plan;
            plan.cfg = sm.resolve();
            if (plan.cfg.beta <= 0.0)
                throw ConfigError("simulate needs a positive --beta");
            plan.trials = m_trials;
            plan.iterations = m_iters;
            plan.seed = m_seed;
            plan.threads = m_threads;
            plan.divergence_threshold = m_thresh;
            plan.block_size = m_block;
            SimulationResult res = run(plan);
            std::cout << "trials=" << res.trials
                      << " completed=" << res.trials_completed
                      << " diverged=" << res.diverged_trials << "\n";
            if (res.trials_completed > 0) {
                long long last = res.iterations - 1;
                std::cout << "mse(k=" << last << ") = " << short6(res.mse[last])
                          << " +- " << short6(res.stderr_mse[last]) << "\n";
            }
            if (!m_out.empty()) {
                std::ofstream f = open_out(m_out);
                int taps = plan.cfg.n_adaptive;
                std::vector<std::string> head{"k"};
                for (int i = 0; i < taps; ++i) head.push_back("mean_w" + std::to_string(i));
                for (int i = 0; i < taps; ++i)
                    head.push_back("stderr_w" + std::to_string(i));
                head.push_back("mse");
                head.push_back("stderr_mse");
                write_row(f, head);
                for (long long k = 0; k < res.iterations; ++k) {
                    std::vector<std::string> row{std::to_string(k)};
                    for (int i = 0; i < taps; ++i)
                        row.push_back(format_double(res.mean_w[k][i]));
                    for (int i = 0; i < taps; ++i)
                        row.push_back(format_double(res.stderr_w[k][i]));
                    row.push_back(format_double(res.mse[k]));
                    row.push_back(format_double(res.stderr_mse[k]));
                    write_row(f, row);
                }
            }
        } else if (app.got_subcommand(cp)) {
            SystemConfig cfg = sp.resolve();
            if (cfg.beta <= 0.0) throw ConfigError("compare needs a positive --beta");
            DeriveOptions dop;
            dop.cap = p_cap;
            StateSpaceModel exact = derive_model(cfg, 2, dop);
            StateSpaceModel ia = ia_second_order(cfg);
            IterateOptions iop;
            iop.k_max = p_k;
            IterateResult re = iterate(exact, cfg.beta, iop);
            IterateResult ri = iterate(ia, cfg.beta, iop);
            SimulationResult mc;
            if (!p_skip_mc) {
                TrialPlan plan;
                plan.cfg = cfg;
                plan.trials = p_trials;
                plan.iterations = p_k + 1;
                plan.seed = p_seed;
                plan.threads = p_threads;
                mc = run(plan);
            }
            int mse_e = -1, mse_i = -1;
            for (std::size_t i = 0; i < re.output_names.size(); ++i)
                if (re.output_names[i] == "mse") mse_e = (int)i;
            for (std::size_t i = 0; i < ri.output_names.size(); ++i)
                if (ri.output_names[i] == "mse") mse_i = (int)i;
            if (!p_out.empty()) {
                std::ofstream f = open_out(p_out);
                std::vector<std::string> head{"k", "mse_exact", "mse_ia"};
                if (!p_skip_mc) {
                    head.push_back("mse_mc");
                    head.push_back("stderr_mc");
                }
                write_row(f, head);
                for (std::size_t t = 0; t < re.ks.size(); ++t) {
                    long long k = re.ks[t];
                    std::vector<std::string> row{std::to_string(k),
                                                 format_double(re.curve[t][mse_e]),
                                                 format_double(ri.curve[t][mse_i])};
                    if (!p_skip_mc) {
                        row.push_back(format_double(mc.mse[k]));
                        row.push_back(format_double(mc.stderr_mse[k]));
                    }
                    write_row(f, row);
                }
            }
            std::cout << "mse(k=" << p_k << "): exact=" << short6(re.final_outputs[mse_e])
                      << " ia=" << short6(ri.final_outputs[mse_i]);
            if (!p_skip_mc) {
                double z_e = 0.0, z_i = 0.0;
                for (long long k = 1; k <= p_k; ++k) {
                    double se = mc.stderr_mse[k] > 0 ? mc.stderr_mse[k] : 1.0;
                    z_e = std::max(z_e, std::abs(re.curve[k][mse_e] - mc.mse[k]) / se);
                    z_i = std::max(z_i, std::abs(ri.curve[k][mse_i] - mc.mse[k]) / se);
                }
                std::cout << " mc=" << short6(mc.mse[p_k]) << " +- "
                          << short6(mc.stderr_mse[p_k])
                          << "\nmax |theory - mc| / stderr over k: exact="
                          << short6(z_e) << " ia=" << short6(z_i);
            }
            std::cout << "\n";
        } else if (app.got_subcommand(cq)) {
            SystemConfig cfg = sq.resolve();
            MomentMatrices mm = compute_moment_matrices(cfg);
            print_matrix("R_x", mm.r_x);
            if (cfg.p_excess > 0) {
                print_matrix("R_xbar", mm.r_xbar);
                print_matrix("R_xbarxbar", mm.r_xbarxbar);
            }
            if (q_k4) print_matrix("K4", mm.k4);
            std::cout << "classical mean-convergence bound 2/tr(R_x) = "
                      << format_double(ia_beta_bound_mean(cfg)) << "\n";
            if (!q_out.empty()) {
                if (q_format != "json")
                    throw ConfigError("moments --out only writes json");
                nlohmann::ordered_json j;
                j["r_x"] = matrix_to_json(mm.r_x);
                j["r_xbar"] = matrix_to_json(mm.r_xbar);
                j["r_xbarxbar"] = matrix_to_json(mm.r_xbarxbar);
                j["k4"] = matrix_to_json(mm.k4);
                j["mean_bound"] = ia_beta_bound_mean(cfg);
                open_out(q_out) << j.dump(1) << "\n";
            }
        }
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const UnstableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const MomentOrderError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
