#include "ratings/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ratings/mechanics.hpp"

namespace ratings {

double default_step(const QueuePair& queues, const MarketParams& params) {
    const double psi_max = std::max(seller_match_rate(queues.lambda_g, params.k),
                                    seller_match_rate(queues.lambda_b, params.k));
    double step = 0.01 / params.delta;
    if (psi_max > 0.0) step = std::min(step, 0.01 / (params.alpha * psi_max));
    return step;
}

namespace {

using Vec4 = std::array<double, 4>;

Vec4 axpy(const Vec4& x, double a, const Vec4& y) {
    return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3]};
}

Vec4 rates(const Vec4& p, double seller_mass, const QueuePair& q, const MarketParams& params) {
    return flow_residuals(SteadyState::from_array(p, seller_mass), q, params);
}

// Returns false when a mass went negative.
bool run(const SteadyState& initial, const QueuePair& q, const MarketParams& params,
         double horizon, double step, const IntegrationOptions& opt, FlowTrajectory& out) {
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    const double dt = horizon / static_cast<double>(steps);
    const std::size_t stride =
        std::max<std::size_t>(1, (steps + opt.max_snapshots - 2) / std::max<std::size_t>(1, opt.max_snapshots - 1));
    const double mass = initial.seller_mass;
    const double floor = -1e-14 * mass;

    out = FlowTrajectory{};
    Vec4 p = initial.as_array();
    out.times.push_back(0.0);
    out.states.push_back(SteadyState::from_array(p, mass));

    for (std::size_t i = 1; i <= steps; ++i) {
        const Vec4 k1 = rates(p, mass, q, params);
        const Vec4 k2 = rates(axpy(p, 0.5 * dt, k1), mass, q, params);
        const Vec4 k3 = rates(axpy(p, 0.5 * dt, k2), mass, q, params);
        const Vec4 k4 = rates(axpy(p, dt, k3), mass, q, params);
        for (std::size_t j = 0; j < 4; ++j)
            p[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (std::any_of(p.begin(), p.end(), [&](double v) { return v < floor; })) return false;
        if (i % stride == 0 || i == steps) {
            out.times.push_back(i == steps ? horizon : dt * static_cast<double>(i));
            out.states.push_back(SteadyState::from_array(p, mass));
        }
    }
    const Vec4 r = rates(p, mass, q, params);
    out.terminal_residual = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])});
    return true;
}

}  // namespace

FlowTrajectory integrate_flows(const SteadyState& initial, const QueuePair& queues,
                               const MarketParams& params, double horizon, double step,
                               const IntegrationOptions& options) {
    if (!(initial.seller_mass > 0.0)) throw std::invalid_argument("integrate_flows: seller mass must be positive");
    if (!(step > 0.0) || !(horizon >= step))
        throw std::invalid_argument("integrate_flows: need step > 0 and horizon >= step");

    FlowTrajectory out;
    for (int attempt = 0; attempt <= options.max_halvings; ++attempt) {
        if (run(initial, queues, params, horizon, step, options, out)) return out;
        step *= 0.5;
    }
    throw StepTooLarge("integrate_flows: a seller mass turned negative after step halving");
}

// ---------------------------------------------------------------------------

namespace {

enum Cell : std::size_t { HG = 0, LG = 1, HB = 2, LB = 3 };

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PopulationEstimate simulate_population(std::size_t n, const QueuePair& queues,
                                       const MarketParams& params, double horizon,
                                       std::uint64_t seed, std::size_t batches) {
    if (n == 0) throw std::invalid_argument("simulate_population: need at least one seller");
    if (!(horizon > 0.0) || batches == 0)
        throw std::invalid_argument("simulate_population: need horizon > 0 and batches >= 1");

    std::mt19937_64 rng(seed);
    const double psi_g = seller_match_rate(queues.lambda_g, params.k);
    const double psi_b = seller_match_rate(queues.lambda_b, params.k);
    const double delta = params.delta;

    std::array<std::uint64_t, 4> count{};
    for (std::size_t i = 0; i < n; ++i) ++count[i % 4];

    const double burn_in = 0.5 * horizon;
    const double width = (horizon - burn_in) / static_cast<double>(batches);
    std::vector<std::array<double, 4>> occupancy(batches, std::array<double, 4>{});

    // Credit the current counts to every batch overlapping [t0, t1).
    auto accumulate = [&](double t0, double t1) {
        t0 = std::max(t0, burn_in);
        while (t0 < t1) {
            const auto b = std::min(batches - 1, static_cast<std::size_t>((t0 - burn_in) / width));
            const double end = std::min(t1, burn_in + width * static_cast<double>(b + 1));
            const double span = end - t0;
            for (std::size_t c = 0; c < 4; ++c) occupancy[b][c] += span * static_cast<double>(count[c]);
            if (end <= t0) break;
            t0 = end;
        }
    };

    const double nd = static_cast<double>(n);
    std::uint64_t events = 0;
    double t = 0.0;
    while (true) {
        const double n_g = static_cast<double>(count[HG] + count[LG]);
        const double n_b = static_cast<double>(count[HB] + count[LB]);
        const double flip_rate = nd * delta;
        const double total = flip_rate + n_g * psi_g + n_b * psi_b;
        const double dt = -std::log1p(-uniform01(rng)) / total;
        const double t_next = std::min(t + dt, horizon);
        if (t_next > burn_in) accumulate(t, t_next);
        if (t + dt >= horizon) break;
        t += dt;
        ++events;

        double u = uniform01(rng) * total;
        if (u < flip_rate) {
            // Uniform seller switches type; rating unchanged.
            const double pick = uniform01(rng) * nd;
            double acc = 0.0;
            std::size_t cell = LB;
            for (std::size_t c = 0; c < 4; ++c) {
                acc += static_cast<double>(count[c]);
                if (pick < acc) {
                    cell = c;
                    break;
                }
            }
            if (count[cell] == 0) continue;
            --count[cell];
            ++count[cell ^ 1u];  // HG<->LG, HB<->LB
            continue;
        }
        u -= flip_rate;
        const bool g_side = u < n_g * psi_g;
        const std::size_t high = g_side ? HG : HB;
        const std::size_t low = g_side ? LG : LB;
        const double side = static_cast<double>(count[high] + count[low]);
        if (side == 0.0) continue;
        const bool is_high = uniform01(rng) * side < static_cast<double>(count[high]);
        if (uniform01(rng) >= params.alpha) continue;
        // Rating reset to true type: only HB and LG change.
        if (!g_side && is_high) {
            --count[HB];
            ++count[HG];
        } else if (g_side && !is_high) {
            --count[LG];
            ++count[LB];
        }
    }

    PopulationEstimate est;
    est.events = events;
    est.batches = batches;
    const double nb = static_cast<double>(batches);
    std::array<double, 4> mean{};
    for (const auto& b : occupancy)
        for (std::size_t c = 0; c < 4; ++c) mean[c] += b[c] / (width * nd) / nb;
    for (std::size_t c = 0; c < 4; ++c) {
        double ss = 0.0;
        for (const auto& b : occupancy) {
            const double dev = b[c] / (width * nd) - mean[c];
            ss += dev * dev;
        }
        est.std_error[c] = batches > 1 ? std::sqrt(ss / (nb - 1.0) / nb) : 0.0;
    }
    est.occupancy = SteadyState::from_array(mean, 1.0);
    const double g = mean[HG] + mean[LG];
    const double b = mean[HB] + mean[LB];
    est.beliefs.mu_g = g > 0.0 ? mean[HG] / g : 0.5;
    est.beliefs.mu_b = b > 0.0 ? mean[HB] / b : 0.5;
    return est;
}

void write_trajectory_csv(std::ostream& out, const FlowTrajectory& trajectory) {
    out << "time,p_hg,p_lg,p_hb,p_lb\n";
    char buf[160];
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        const auto& s = trajectory.states[i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", trajectory.times[i],
                      s.p_hg, s.p_lg, s.p_hb, s.p_lb);
        out << buf;
    }
}

}  // namespace ratings
