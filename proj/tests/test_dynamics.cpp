#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ratings/dynamics.hpp"
#include "ratings/mechanics.hpp"
#include "support.hpp"

using namespace ratings;

namespace {

MarketParams fig3() { return validate_params({0.2, 0.5, 3.0, 1.0, 1.5, 0.8204, 0.08}); }

// Long enough for the slowest rate in the chain to decay by e^-200.
double settle_horizon(const QueuePair& q, const MarketParams& p) {
    const double psi_min = std::min(seller_match_rate(q.lambda_g, p.k), seller_match_rate(q.lambda_b, p.k));
    return 200.0 / std::min(p.delta, p.alpha * psi_min);
}

}  // namespace

TEST_CASE("steady state is a fixed point of the flow") {
    const auto p = fig3();
    const QueuePair q{1.5, 0.011};
    const auto s = steady_state(q, p);
    const auto traj = integrate_flows(s, q, p, 100 / p.delta, default_step(q, p));
    CHECK(traj.terminal_residual < 1e-10);
    for (const auto& st : traj.states)
        for (int c = 0; c < 4; ++c) CHECK(std::abs(st.as_array()[c] - s.as_array()[c]) < 1e-12);
}

TEST_CASE("without trade only types move") {
    gen::Draw draw(31);
    const auto p = fig3();
    for (int i = 0; i < 10; ++i) {
        const auto x = draw.dirichlet();
        const auto traj = integrate_flows(SteadyState::from_array(x, 1.0), {0.0, 0.0}, p, 100 / p.delta, 0.01 / p.delta);
        for (const auto& st : traj.states) {
            CHECK(st.g_mass() == doctest::Approx(x[0] + x[1]).epsilon(1e-12));
            CHECK(st.b_mass() == doctest::Approx(x[2] + x[3]).epsilon(1e-12));
        }
        const auto end = traj.states.back();
        CHECK(end.p_hg == doctest::Approx(end.g_mass() / 2).epsilon(1e-10));
        CHECK(end.p_hb == doctest::Approx(end.b_mass() / 2).epsilon(1e-10));
    }
}

TEST_CASE("flows converge to the closed form from random starts") {
    gen::Draw draw(32);
    for (int i = 0; i < 100; ++i) {
        const auto p = draw.params();
        const QueuePair q{draw.log_uniform(0.1, 10), draw.log_uniform(0.1, 10)};
        const double mass = draw.uniform(0.5, 2.0);
        const auto start = SteadyState::from_array(draw.dirichlet(mass), mass);
        const auto traj = integrate_flows(start, q, p, settle_horizon(q, p), default_step(q, p));
        const auto target = oracle::steady_state(q.lambda_g, q.lambda_b, p, mass);
        const auto end = traj.states.back().as_array();
        for (int c = 0; c < 4; ++c) CHECK(std::abs(end[c] - target[c]) < 1e-6);
        for (const auto& st : traj.states) CHECK(std::abs(st.total() - mass) < 1e-10);
    }
}

TEST_CASE("snapshots and step halving") {
    const auto p = fig3();
    const QueuePair q{1.0, 0.5};
    const auto start = SteadyState::from_array({1, 0, 0, 0}, 1.0);
    IntegrationOptions opt;
    opt.max_snapshots = 11;
    const auto traj = integrate_flows(start, q, p, 50, 0.01, opt);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 50.0);
    CHECK(traj.states.size() <= 12);

    // A huge step turns a mass negative; with halving it recovers.
    opt.max_halvings = 0;
    CHECK_THROWS_AS(integrate_flows(start, q, validate_params({1, 1, 2, 1, 1, 0.5, 1}), 10, 10, opt), StepTooLarge);
    const auto ok = integrate_flows(start, q, validate_params({1, 1, 2, 1, 1, 0.5, 1}), 10, 10);
    for (const auto& st : ok.states)
        for (double v : st.as_array()) CHECK(v > -1e-12);

    CHECK_THROWS_AS(integrate_flows(start, q, p, 1, 2), std::invalid_argument);
}

TEST_CASE("trajectory CSV") {
    const auto p = fig3();
    const auto traj = integrate_flows(SteadyState{}, {1, 1}, p, 1, 0.5);
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,p_hg,p_lg,p_hb,p_lb");
    std::getline(in, line);
    CHECK(line == "0,0,0,0,0");
}

TEST_CASE("population simulation is deterministic given the seed") {
    const auto p = fig3();
    const QueuePair q{1.5, 0.5};
    const auto a = simulate_population(500, q, p, 200, 42);
    const auto b = simulate_population(500, q, p, 200, 42);
    const auto c = simulate_population(500, q, p, 200, 43);
    CHECK(a.occupancy.as_array() == b.occupancy.as_array());
    CHECK(a.std_error == b.std_error);
    CHECK(a.events == b.events);
    CHECK(a.occupancy.as_array() != c.occupancy.as_array());
    CHECK(a.occupancy.total() == doctest::Approx(1.0));
}

TEST_CASE("simulated occupancy agrees with the closed form") {
    const auto p = validate_params({0.5, 0.6, 2.0, 1.0, 1.0, 0.7, 1.0});
    const QueuePair q{2.0, 0.5};
    const auto est = simulate_population(4000, q, p, 400 / p.delta, 9);
    const auto exact = steady_state(q, p).as_array();
    for (int c = 0; c < 4; ++c) {
        CHECK(est.std_error[c] > 0);
        CHECK(std::abs(est.occupancy.as_array()[c] - exact[c]) < 3 * est.std_error[c]);
    }
}

TEST_CASE("standard errors shrink like one over root n") {
    const auto p = validate_params({0.5, 0.6, 2.0, 1.0, 1.0, 0.7, 1.0});
    const QueuePair q{2.0, 0.5};
    double prev = 0;
    for (std::size_t n : {1000u, 10000u, 100000u}) {
        const auto est = simulate_population(n, q, p, 100 / p.delta, 5);
        const double se = est.std_error[0] + est.std_error[1] + est.std_error[2] + est.std_error[3];
        if (prev > 0) {
            const double ratio = prev / se;
            CHECK(ratio > std::sqrt(10.0) / 2);
            CHECK(ratio < std::sqrt(10.0) * 2);
        }
        prev = se;
    }
}

TEST_CASE("precise ratings in the simulation") {
    const auto p = validate_params({0.1, 1.0, 2.0, 1.0, 1.0, 0.8, 1.0});
    const auto est = simulate_population(500, {50, 50}, p, 20 / p.delta, 3);
    CHECK(est.beliefs.mu_g > 0.95);
    CHECK(est.beliefs.mu_b < 0.05);
}
