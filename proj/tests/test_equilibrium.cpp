#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ratings/equilibrium.hpp"
#include "ratings/mechanics.hpp"
#include "support.hpp"

using namespace ratings;

namespace {

MarketParams fig2(double k, double q = 1.0) { return validate_params({1.0, 0.1, 2.0, 1.0, 1.0, k, q}); }
MarketParams fig3(double q = 0.08) { return validate_params({0.2, 0.5, 3.0, 1.0, 1.5, 0.8204, q}); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// lambda_B giving buyers the same payoff as G-rated sellers at lambda_G,
// from the oracle payoffs.
double oracle_bi(double lg, const MarketParams& p) {
    const double target = oracle::payoff(true, lg, p);
    return oracle::bisect([&](double lb) { return oracle::payoff(false, lb, p) - target; }, 1e-10, 1e8);
}

// Solutions of u_G(lambda_G) = u_B(lambda_B) on each monotone piece of u_G.
std::array<double, 3> oracle_branches(double lb, double g_lo, double g_hi, const MarketParams& p) {
    const double target = oracle::payoff(false, lb, p);
    auto f = [&](double lg) { return oracle::payoff(true, lg, p) - target; };
    return {oracle::bisect(f, 1e-10, g_lo), oracle::bisect(f, g_lo, g_hi), oracle::bisect(f, g_hi, 1e8)};
}

}  // namespace

TEST_CASE("required buyer mass is lambda times rated mass") {
    gen::Draw draw(21);
    for (int i = 0; i < 200; ++i) {
        const auto p = draw.params();
        const double lg = draw.log_uniform(1e-3, 1e3);
        const double lb = draw.log_uniform(1e-3, 1e3);
        const double m = draw.uniform(0.1, 1.0);
        CHECK(required_buyer_mass({lg, lb}, p, m) == doctest::Approx(oracle::buyers(lg, lb, p, m)).epsilon(1e-9));
    }
}

TEST_CASE("market-clearing and indifference curves solve their equations") {
    gen::Draw draw(22);
    for (int i = 0; i < 100; ++i) {
        const auto p = draw.trade_params();
        const double lg = draw.log_uniform(1e-2, 1e2);
        const double lb = mc_curve(lg, p.buyer_mass, p);
        CHECK(rel(required_buyer_mass({lg, lb}, p), p.buyer_mass) < 1e-10);
        try {
            const double bi = bi_curve(lg, p);
            CHECK(rel(payoff_b(bi, p), payoff_g(lg, p)) < 1e-10);
        } catch (const BracketFailure&) {
            // target payoff unreachable inside the clamp range
        }
    }
    CHECK_THROWS_AS(bi_curve(1.0, validate_params({0.1, 0.1, 2.0, 1.0, 1.6, 0.5, 1.0})), InvalidRegime);
}

TEST_CASE("no trade below the average-quality price") {
    const auto p = validate_params({0.1, 0.1, 2.0, 1.0, 1.6, 0.9, 1.0});
    CHECK(no_trade(p));
    const auto eqs = solve_nondiscriminatory(p);
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].kind == EquilibriumKind::NoTrade);
    CHECK(enumerate_discriminatory(p).empty());
    CHECK_THROWS_AS(IndifferenceCurve{p}, InvalidRegime);
}

TEST_CASE("one crossing in the left panel, three in the right") {
    // Oracle: sign changes of (BI - MC) on a dense grid, both curves inverted
    // from the generator-matrix payoffs.
    for (auto [k, expected] : {std::pair{0.8682, 1}, std::pair{0.9121, 3}}) {
        const auto p = fig2(k);
        const auto eqs = solve_nondiscriminatory(p);
        REQUIRE(eqs.size() == static_cast<std::size_t>(expected));

        std::vector<double> cross;
        double prev_lg = 0, prev = NAN;
        for (double lg = 1e-2; lg < 1e3; lg *= 1.02) {
            const double bi = oracle_bi(lg, p);
            const double mc = oracle::bisect([&](double lb) { return oracle::buyers(lg, lb, p) - p.buyer_mass; }, 1e-10, 1e8);
            const double d = bi - mc;
            if (!std::isnan(prev) && (d > 0) != (prev > 0)) cross.push_back(std::sqrt(lg * prev_lg));
            prev = d;
            prev_lg = lg;
        }
        REQUIRE(cross.size() == eqs.size());
        for (std::size_t i = 0; i < cross.size(); ++i) CHECK(rel(eqs[i].queues.group1.lambda_g, cross[i]) < 0.011);
    }
}

TEST_CASE("non-discriminatory equilibria exist and satisfy both conditions") {
    gen::Draw draw(23);
    for (int i = 0; i < 100; ++i) {
        const auto p = draw.trade_params();
        const auto eqs = solve_nondiscriminatory(p);
        REQUIRE(!eqs.empty());
        for (const auto& e : eqs) {
            REQUIRE(e.kind == EquilibriumKind::NonDiscriminatory);
            const QueuePair q = e.queues.group1;
            CHECK(q.lambda_g > q.lambda_b);
            CHECK(q.lambda_b > 0);
            CHECK(std::abs(payoff_g(q.lambda_g, p) - payoff_b(q.lambda_b, p)) < EQ_TOL);
            CHECK(std::abs(required_buyer_mass(q, p) - p.buyer_mass) < EQ_TOL);
            CHECK(e.buyer_split.first == doctest::Approx(p.buyer_mass / 2));
        }
    }
}

TEST_CASE("branch band endpoints") {
    const auto p = fig3();
    const auto band = branch_band(p);
    REQUIRE(band);
    CHECK(band->lambda_b_low < band->lambda_b_high);
    CHECK(rel(payoff_b(band->lambda_b_high, p), payoff_g(band->lambda_g_low, p)) < 1e-12);
    CHECK(rel(payoff_b(band->lambda_b_low, p), payoff_g(band->lambda_g_high, p)) < 1e-12);
    CHECK(rel(band->lambda_b_high, oracle_bi(band->lambda_g_low, p)) < 1e-8);
    CHECK(rel(band->lambda_b_low, oracle_bi(band->lambda_g_high, p)) < 1e-8);

    CHECK_FALSE(branch_band(fig2(0.8)));
}

TEST_CASE("branch triples") {
    const auto p = fig3();
    const auto band = *branch_band(p);
    const double mid = 0.5 * (band.lambda_b_low + band.lambda_b_high);
    const auto t = branch_triple(mid, p);
    CHECK(t.multiplicity == 3);
    CHECK(t.h[0] < band.lambda_g_low);
    CHECK(t.h[1] > band.lambda_g_low);
    CHECK(t.h[1] < band.lambda_g_high);
    CHECK(t.h[2] > band.lambda_g_high);
    const auto o = oracle_branches(mid, band.lambda_g_low, band.lambda_g_high, p);
    for (int i = 0; i < 3; ++i) {
        CHECK(rel(t.h[i], o[i]) < 1e-8);
        CHECK(std::abs(payoff_g(t.h[i], p) - payoff_b(mid, p)) < 1e-12);
    }

    // At the top of the band the level touches the local minimum of u_G.
    const auto top = branch_triple(band.lambda_b_high, p);
    CHECK(top.multiplicity == 2);
    CHECK(top.h[0] == band.lambda_g_low);
    CHECK(top.h[1] == band.lambda_g_low);
    const auto bottom = branch_triple(band.lambda_b_low, p);
    CHECK(bottom.multiplicity == 2);
    CHECK(bottom.h[1] == band.lambda_g_high);
    CHECK(bottom.h[2] == band.lambda_g_high);

    CHECK_THROWS_AS(branch_triple(band.lambda_b_high * 1.01, p), OutOfBand);
    CHECK_THROWS_AS(branch_triple(band.lambda_b_low * 0.99, p), OutOfBand);
    CHECK_THROWS_AS(branch_triple(0.5, fig2(0.8)), OutOfBand);
}

TEST_CASE("supportable buyer-mass interval against a brute-force sweep") {
    const auto p = fig3();
    const DiscriminatorySweep sweep(p);
    const auto q = sweep.q_interval();
    REQUIRE(q);
    CHECK(sweep.union_connected());

    const auto band = *branch_band(p);
    double lo = INFINITY, hi = -INFINITY;
    const int n = 3001;
    for (int i = 0; i < n; ++i) {
        const double lb = band.lambda_b_low + (band.lambda_b_high - band.lambda_b_low) * i / (n - 1);
        const auto h = oracle_branches(lb, band.lambda_g_low, band.lambda_g_high, p);
        const double t[3] = {oracle::buyers(h[0], lb, p, 0.5), oracle::buyers(h[1], lb, p, 0.5),
                             oracle::buyers(h[2], lb, p, 0.5)};
        for (double s : {t[0] + t[1], t[1] + t[2], t[0] + t[2]}) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    CHECK(q->first == doctest::Approx(lo).epsilon(1e-5));
    CHECK(q->second == doctest::Approx(hi).epsilon(1e-5));
    CHECK(q->first <= lo * (1 + 1e-9));
    CHECK(q->second >= hi * (1 - 1e-9));
    CHECK(q->first == doctest::Approx(0.0322694).epsilon(1e-5));
    CHECK(q->second == doctest::Approx(0.1260144).epsilon(1e-5));
}

TEST_CASE("discriminatory equilibria satisfy every equilibrium condition") {
    const auto q = *discriminatory_Q_interval(fig3());
    for (int i = 1; i <= 9; ++i) {
        const double mass = q.first + (q.second - q.first) * i / 10.0;
        const auto p = fig3(mass);
        const auto eqs = enumerate_discriminatory(p);
        REQUIRE(!eqs.empty());
        for (const auto& e : eqs) {
            const auto g1 = e.queues.group1;
            const auto g2 = e.queues.group2;
            CHECK(e.kind == EquilibriumKind::Discriminatory);
            CHECK(g1.lambda_b == g2.lambda_b);
            CHECK(g1.lambda_g > g2.lambda_g * (1 + 1e-6));
            const double u = payoff_b(g1.lambda_b, p);
            CHECK(std::abs(payoff_g(g1.lambda_g, p) - u) < EQ_TOL);
            CHECK(std::abs(payoff_g(g2.lambda_g, p) - u) < EQ_TOL);
            CHECK(std::abs(e.buyer_split.first + e.buyer_split.second - mass) < EQ_TOL);
            CHECK(e.buyer_split.first == doctest::Approx(oracle::buyers(g1.lambda_g, g1.lambda_b, p, 0.5)));
            const auto [b1, b2] = group_beliefs(e, p);
            CHECK(b1.mu_g > b2.mu_g);
            CHECK(b1.mu_b == b2.mu_b);
        }
    }
    for (double mass : {q.first * 0.9, q.first * 0.5, q.second * 1.1, q.second * 2.0}) CHECK(enumerate_discriminatory(fig3(mass)).empty());
}

TEST_CASE("no discriminatory equilibrium when u_G is monotone") {
    gen::Draw draw(24);
    int n = 0;
    while (n < 100) {
        auto p = draw.trade_params();
        const double kt = k_threshold(p);
        p.k = draw.uniform(0.05, 1.0) * kt;
        if (p.k <= 0) continue;
        CHECK(enumerate_discriminatory(p).empty());
        CHECK_FALSE(discriminatory_Q_interval(p));
        ++n;
    }
}

TEST_CASE("rescaling maps a (Q, beta) system onto beta = 1") {
    gen::Draw draw(25);
    for (int i = 0; i < 20; ++i) {
        ParamRecord r{draw.log_uniform(0.05, 2), draw.uniform(0.05, 1), 3.0, 1.0, 1.5, draw.uniform(0.6, 0.95),
                      draw.log_uniform(0.01, 2)};
        const auto p = validate_params(r);
        const double beta = p.beta();
        auto np = normalized_params(p);
        np.buyer_mass = p.buyer_mass * std::pow(beta, 1 / p.k);
        const auto a = solve_nondiscriminatory(p);
        const auto b = solve_nondiscriminatory(np);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(rel(rescale_queue(a[j].queues.group1.lambda_g, beta, p.k), b[j].queues.group1.lambda_g) < 1e-8);
            CHECK(rel(rescale_queue(a[j].queues.group1.lambda_b, beta, p.k), b[j].queues.group1.lambda_b) < 1e-8);
        }
        const auto da = enumerate_discriminatory(p);
        const auto db = enumerate_discriminatory(np);
        REQUIRE(da.size() == db.size());
        for (std::size_t j = 0; j < da.size(); ++j) {
            CHECK(rel(rescale_queue(da[j].queues.group1.lambda_g, beta, p.k), db[j].queues.group1.lambda_g) < 1e-8);
            CHECK(rel(rescale_queue(da[j].queues.group2.lambda_g, beta, p.k), db[j].queues.group2.lambda_g) < 1e-8);
            CHECK(rel(rescale_queue(da[j].queues.group1.lambda_b, beta, p.k), db[j].queues.group1.lambda_b) < 1e-8);
        }
    }
}

TEST_CASE("rating-quality interval") {
    const auto p = fig3();
    const auto b = beta_interval(p);
    REQUIRE(b);
    CHECK(b->first < p.beta());
    CHECK(p.beta() < b->second);
    auto at_beta = [&](double beta) {
        auto q = p;
        q.delta = q.alpha / beta;
        return q;
    };
    CHECK(enumerate_discriminatory(at_beta(b->first * 0.97)).empty());
    CHECK(enumerate_discriminatory(at_beta(b->second * 1.03)).empty());
    CHECK_FALSE(enumerate_discriminatory(at_beta(b->first * 1.03)).empty());
    CHECK_FALSE(enumerate_discriminatory(at_beta(b->second * 0.97)).empty());
    CHECK_FALSE(beta_interval(fig3(0.0)));
}
