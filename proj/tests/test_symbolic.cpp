#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lmsexact/expression.hpp"
#include "lmsexact/montecarlo.hpp"

using namespace lmsexact;

namespace {

Monomial mono(double coeff, int beta_deg, std::vector<Factor> fs) {
    Monomial m;
    m.coeff = coeff;
    m.beta_deg = beta_deg;
    m.factors = std::move(fs);
    return m;
}

Factor fu(int lag, int pow = 1) { return {Gen::u, (std::uint16_t)lag, (std::uint16_t)pow}; }
Factor fd(int tap, int pow = 1) { return {Gen::dev, (std::uint16_t)tap, (std::uint16_t)pow}; }
Factor fn(int pow = 1) { return {Gen::nu, 0, (std::uint16_t)pow}; }

// coefficient of the term with the given factor key and beta degree, 0 if absent
double coeff_of(const Expression& e, std::vector<Factor> fs, int beta_deg) {
    Monomial probe = mono(1.0, beta_deg, std::move(fs));
    std::sort(probe.factors.begin(), probe.factors.end(),
              [](const Factor& a, const Factor& b) { return factor_id_less(a, b); });
    for (const auto& t : e.terms)
        if (t.same_key(probe)) return t.coeff;
    return 0.0;
}

bool approx_same(const Expression& a, const Expression& b, double tol = 1e-12) {
    if (a.terms.size() != b.terms.size()) return false;
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (compare_key(a.terms[i], b.terms[i]) != 0) return false;
        double ca = a.terms[i].coeff, cb = b.terms[i].coeff;
        if (std::abs(ca - cb) > tol * std::max({1.0, std::abs(ca), std::abs(cb)}))
            return false;
    }
    return true;
}

Expression random_expr(std::mt19937_64& rng, int max_lag, int max_pow,
                       bool with_dev, bool with_nu) {
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_int_distribution<int> nterms(1, 5), pw(1, max_pow), bd(0, 1),
        coin(0, 1);
    std::vector<Monomial> terms;
    for (int t = nterms(rng); t-- > 0;) {
        Monomial m;
        m.coeff = coeff(rng);
        m.beta_deg = bd(rng);
        for (int lag = 0; lag <= max_lag; ++lag)
            if (coin(rng)) m.factors.push_back(fu(lag, pw(rng)));
        if (with_dev && coin(rng)) m.factors.push_back(fd(coin(rng)));
        if (with_nu && coin(rng)) m.factors.push_back(fn(1 + coin(rng)));
        terms.push_back(std::move(m));
    }
    return Expression::from_terms(std::move(terms));
}

double eval_term(const Monomial& m, double beta, const std::vector<double>& u,
                 double nu) {
    double v = m.coeff;
    for (int d = 0; d < m.beta_deg; ++d) v *= beta;
    for (const auto& f : m.factors) {
        double base = f.kind == Gen::u ? u[f.idx] : nu;
        for (int p = 0; p < f.pow; ++p) v *= base;
    }
    return v;
}

} // namespace

TEST_CASE("canonical form merges keys and drops zeros") {
    Expression e = Expression::from_terms(
        {mono(2.0, 1, {fu(1), fd(0)}), mono(0.5, 1, {fd(0), fu(1)}),
         mono(3.0, 0, {fu(2, 2)}), mono(-3.0, 0, {fu(2, 2)}), mono(1.0, 2, {})});
    CHECK(e.size() == 2);
    CHECK(coeff_of(e, {fu(1), fd(0)}, 1) == 2.5);
    CHECK(coeff_of(e, {}, 2) == 1.0);
    // same factors at a different beta degree is a different key
    Expression split = Expression::from_terms(
        {mono(1.0, 0, {fu(1)}), mono(1.0, 1, {fu(1)})});
    CHECK(split.size() == 2);
}

TEST_CASE("deviation update expansion, one adaptive tap over a two-tap MA input") {
    SystemConfig cfg = preset_scenario("config1", 1, 2, 1);
    cfg.w_star = {2.0, 0.7};   // tail coefficient 0.7 folds into the expansion
    cfg.validate();

    auto upd = expand_deviation_update(cfg);
    REQUIRE(upd.size() == 1);
    const Expression& e = upd[0];
    CHECK(e.size() == 10);

    CHECK(coeff_of(e, {fd(0)}, 0) == 1.0);
    CHECK(coeff_of(e, {fu(0, 2), fd(0)}, 1) == -1.0);
    CHECK(coeff_of(e, {fu(0), fu(1), fd(0)}, 1) == doctest::Approx(1.8));
    CHECK(coeff_of(e, {fu(1, 2), fd(0)}, 1) == doctest::Approx(-0.81));
    CHECK(coeff_of(e, {fu(0), fu(1)}, 1) == doctest::Approx(-0.7));
    CHECK(coeff_of(e, {fu(0), fu(2)}, 1) == doctest::Approx(0.63));
    CHECK(coeff_of(e, {fu(1, 2)}, 1) == doctest::Approx(0.63));
    CHECK(coeff_of(e, {fu(1), fu(2)}, 1) == doctest::Approx(-0.567));
    CHECK(coeff_of(e, {fu(0), fn()}, 1) == -1.0);
    CHECK(coeff_of(e, {fu(1), fn()}, 1) == doctest::Approx(0.9));

    Expression err = expand_error(cfg);
    CHECK(err.size() == 5);
    CHECK(coeff_of(err, {fu(0), fd(0)}, 0) == 1.0);
    CHECK(coeff_of(err, {fu(1), fd(0)}, 0) == doctest::Approx(-0.9));
    CHECK(coeff_of(err, {fu(1)}, 0) == doctest::Approx(0.7));
    CHECK(coeff_of(err, {fu(2)}, 0) == doctest::Approx(-0.63));
    CHECK(coeff_of(err, {fn()}, 0) == 1.0);

    Expression tap = input_tap(cfg, 1);
    CHECK(tap.size() == 2);
    CHECK(coeff_of(tap, {fu(1)}, 0) == 1.0);
    CHECK(coeff_of(tap, {fu(2)}, 0) == doctest::Approx(-0.9));
}

TEST_CASE("algebra properties on random expressions") {
    std::mt19937_64 rng(0xa1b2c3);
    for (int rep = 0; rep < 40; ++rep) {
        Expression a = random_expr(rng, 3, 2, true, true);
        Expression b = random_expr(rng, 3, 2, true, true);
        Expression c = random_expr(rng, 3, 2, true, true);

        CHECK(approx_same(add(a, b), add(b, a)));
        CHECK(approx_same(multiply(a, b), multiply(b, a)));
        CHECK(approx_same(add(add(a, b), c), add(a, add(b, c))));
        CHECK(approx_same(multiply(multiply(a, b), c), multiply(a, multiply(b, c)),
                          1e-10));
        CHECK(approx_same(multiply(a, add(b, c)),
                          add(multiply(a, b), multiply(a, c)), 1e-10));
        CHECK(approx_same(scale(add(a, b), 1.75),
                          add(scale(a, 1.75), scale(b, 1.75))));
        // scaling by zero annihilates, scaling by one is the identity
        CHECK(scale(a, 0.0).terms.empty());
        CHECK(approx_same(scale(a, 1.0), a));
    }
}

TEST_CASE("scale_beta shifts the formal step-size power") {
    Expression a = Expression::from_terms(
        {mono(2.0, 0, {fu(1)}), mono(-1.0, 1, {fd(0)})});
    Expression s = scale_beta(a, -0.5, 1);
    CHECK(coeff_of(s, {fu(1)}, 1) == -1.0);
    CHECK(coeff_of(s, {fd(0)}, 2) == 0.5);
}

TEST_CASE("measurement-noise reduction rules") {
    MomentSpec g = MomentSpec::gaussian_unit(8);

    ReducedTerm odd = reduce_monomial(mono(2.0, 1, {fn(1)}), g, 0.25, ReduceMode::exact);
    CHECK_FALSE(odd.alive);
    ReducedTerm odd3 = reduce_monomial(mono(2.0, 1, {fn(3)}), g, 0.25, ReduceMode::exact);
    CHECK_FALSE(odd3.alive);

    ReducedTerm sq = reduce_monomial(mono(2.0, 2, {fn(2)}), g, 0.25, ReduceMode::exact);
    CHECK(sq.alive);
    CHECK(sq.coeff == 0.5);
    CHECK(sq.residual.factors.empty());

    CHECK_THROWS_AS(reduce_monomial(mono(1.0, 0, {fn(4)}), g, 0.25, ReduceMode::exact),
                    MomentOrderError);

    // zero-variance noise keeps the term but kills the value
    ReducedTerm z = reduce_monomial(mono(2.0, 0, {fn(2)}), g, 0.0, ReduceMode::exact);
    CHECK_FALSE(z.alive);
}

TEST_CASE("joint moments factor only where independence actually holds") {
    MomentSpec g = MomentSpec::gaussian_unit(8);

    // lag 0 always splits off; lagged samples stay joint with the deviation
    ReducedTerm r = reduce_monomial(mono(1.0, 0, {fu(0, 2), fu(1, 2), fd(0, 2)}), g,
                                    0.0, ReduceMode::exact);
    CHECK(r.alive);
    CHECK(r.coeff == 1.0);   // gamma_2 = 1
    REQUIRE(r.residual.factors.size() == 2);
    CHECK(r.residual.factors[0] == fu(1, 2));
    CHECK(r.residual.factors[1] == fd(0, 2));

    ReducedTerm ia = reduce_monomial(mono(1.0, 0, {fu(0, 2), fu(1, 2), fd(0, 2)}), g,
                                     0.0, ReduceMode::independence);
    CHECK(ia.alive);
    REQUIRE(ia.residual.factors.size() == 1);
    CHECK(ia.residual.factors[0] == fd(0, 2));

    // a deviation-free monomial factors into a product of single-lag moments
    ReducedTerm pure = reduce_monomial(mono(2.0, 0, {fu(1, 2), fu(3, 4)}), g, 0.0,
                                       ReduceMode::exact);
    CHECK(pure.alive);
    CHECK(pure.coeff == doctest::Approx(2.0 * 1.0 * 3.0));
    CHECK(pure.residual.factors.empty());

    // odd power at lag 0 kills a joint term outright
    CHECK_FALSE(reduce_monomial(mono(1.0, 0, {fu(0, 3), fd(0)}), g, 0.0,
                                ReduceMode::exact)
                    .alive);
}

TEST_CASE("white one-tap recursions from first principles") {
    // N=1, M=1, P=0: E[wt0(k+1)]   = (1 - B g2) E[wt0]
    //                E[wt0^2(k+1)] = (1 - 2B g2 + B^2 g4) E[wt0^2] + B^2 g2 s2
    SystemConfig cfg = preset_scenario("config1", 1, 1, 0);
    cfg.noise_variance = 0.3;
    for (const char* tag : {"gaussian-unit", "laplacian-unit"}) {
        cfg.moments = moments_for(tag, 8);
        double g2 = cfg.moments.gamma(2), g4 = cfg.moments.gamma(4);
        auto upd = expand_deviation_update(cfg);

        LinearCombination mean =
            take_expectation(upd[0], cfg.moments, cfg.noise_variance);
        CHECK(mean.constant.is_zero());
        REQUIRE(mean.terms.size() == 1);
        CHECK(mean.terms[0].first.factors == std::vector<Factor>{fd(0)});
        CHECK(mean.terms[0].second.c[0] == 1.0);
        CHECK(mean.terms[0].second.c[1] == doctest::Approx(-g2));
        CHECK(mean.terms[0].second.c[2] == 0.0);

        LinearCombination sq = take_expectation(multiply(upd[0], upd[0]),
                                                cfg.moments, cfg.noise_variance);
        CHECK(sq.constant.c[0] == 0.0);
        CHECK(sq.constant.c[1] == 0.0);
        CHECK(sq.constant.c[2] == doctest::Approx(g2 * 0.3));
        REQUIRE(sq.terms.size() == 1);
        CHECK(sq.terms[0].first.factors == std::vector<Factor>{fd(0, 2)});
        CHECK(sq.terms[0].second.c[0] == 1.0);
        CHECK(sq.terms[0].second.c[1] == doctest::Approx(-2.0 * g2));
        CHECK(sq.terms[0].second.c[2] == doctest::Approx(g4));
    }
}

TEST_CASE("mean update row matches the hand expansion, colored input") {
    SystemConfig cfg = preset_scenario("config1", 1, 2, 1);
    cfg.w_star = {2.0, 0.7};
    cfg.validate();
    auto upd = expand_deviation_update(cfg);

    for (auto mode : {ReduceMode::exact, ReduceMode::independence}) {
        LinearCombination lc =
            take_expectation(upd[0], cfg.moments, cfg.noise_variance, mode);
        // forcing: -B b0 b1 wbar g2
        CHECK(lc.constant.c[0] == 0.0);
        CHECK(lc.constant.c[1] == doctest::Approx(0.63));
        if (mode == ReduceMode::exact) {
            REQUIRE(lc.terms.size() == 2);
            CHECK(lc.terms[0].first.factors == std::vector<Factor>{fu(1, 2), fd(0)});
            CHECK(lc.terms[0].second.c[1] == doctest::Approx(-0.81));
            CHECK(lc.terms[1].first.factors == std::vector<Factor>{fd(0)});
            CHECK(lc.terms[1].second.c[0] == 1.0);
            CHECK(lc.terms[1].second.c[1] == doctest::Approx(-1.0));
        } else {
            // everything collapses onto E[wt0] with the full input power 1.81
            REQUIRE(lc.terms.size() == 1);
            CHECK(lc.terms[0].first.factors == std::vector<Factor>{fd(0)});
            CHECK(lc.terms[0].second.c[0] == 1.0);
            CHECK(lc.terms[0].second.c[1] == doctest::Approx(-1.81));
        }
    }
}

TEST_CASE("deviation-free expectations match sampled averages") {
    const double beta = 0.3, nu_var = 0.4;
    std::mt19937_64 rng(77);
    for (const char* tag : {"gaussian-unit", "laplacian-unit"}) {
        MomentSpec spec = moments_for(tag, 12);
        long long odd_before = spec.odd_queries;
        // heavy laplacian tails make the empirical variance of very high
        // powers converge too slowly for a meaningful z-score, so the power
        // budget is tighter there
        const int max_pow = std::string(tag) == "gaussian-unit" ? 3 : 2;
        for (int rep = 0; rep < 4; ++rep) {
            Expression a = random_expr(rng, 3, max_pow, false, true);
            Expression b = random_expr(rng, 3, max_pow, false, false);
            Expression e = multiply(a, b);   // u powers up to 6, nu up to 2

            LinearCombination lc = take_expectation(e, spec, nu_var);
            REQUIRE(lc.terms.empty());
            double predicted = lc.constant.at(beta);

            UnitSampler u_draw(tag, 1234, rep);
            UnitSampler nu_draw("gaussian-unit", 4321, rep);
            const long long samples = 2'000'000;
            double acc = 0.0, acc2 = 0.0;
            std::vector<double> u(4);
            for (long long s = 0; s < samples; ++s) {
                for (auto& x : u) x = u_draw.next();
                double nu = nu_draw.next() * std::sqrt(nu_var);
                double v = 0.0;
                for (const auto& t : e.terms) v += eval_term(t, beta, u, nu);
                acc += v;
                acc2 += v * v;
            }
            double mean = acc / samples;
            double var = acc2 / samples - mean * mean;
            double se = std::sqrt(var / samples);
            INFO(std::string(tag) << " rep " << rep << ": " << mean << " vs "
                                  << predicted << " se " << se);
            CHECK(std::abs(mean - predicted) <= 3.0 * se + 1e-12);
        }
        // structural kill happens before any moment lookup
        CHECK(spec.odd_queries == odd_before);
    }
}

TEST_CASE("expectation never queries odd moments across random joint inputs") {
    std::mt19937_64 rng(31337);
    MomentSpec spec = MomentSpec::gaussian_unit(12);
    for (int rep = 0; rep < 200; ++rep) {
        Expression a = random_expr(rng, 3, 3, true, true);
        Expression b = random_expr(rng, 3, 3, true, false);
        Expression e = multiply(a, b);
        take_expectation(e, spec, 0.5, ReduceMode::exact);
        take_expectation(e, spec, 0.5, ReduceMode::independence);
    }
    CHECK(spec.odd_queries == 0);
}
