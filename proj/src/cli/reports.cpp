#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "ratings/cli.hpp"
#include "ratings/dynamics.hpp"
#include "ratings/equilibrium.hpp"
#include "ratings/mechanics.hpp"
#include "ratings/stability.hpp"

namespace ratings::cli {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* MONOTONE_REASON = "u_G monotone (k <= k_threshold)";
constexpr const char* NO_TRADE_REASON = "no trade ((u_high + u_low)/2 <= price)";

json params_json(const MarketParams& p) {
    return {{"delta", p.delta}, {"alpha", p.alpha}, {"u_high", p.u_high}, {"u_low", p.u_low},
            {"price", p.price}, {"k", p.k},         {"buyer_mass", p.buyer_mass}};
}

json group_json(const QueuePair& q, const MarketParams& p) {
    json g{{"lambda_g", q.lambda_g}, {"lambda_b", q.lambda_b}};
    if (q.lambda_g > 0.0 && q.lambda_b > 0.0) {
        const Beliefs b = beliefs(q, p);
        g["mu_g"] = b.mu_g;
        g["mu_b"] = b.mu_b;
        g["payoff_g"] = payoff_g(q.lambda_g, p);
        g["payoff_b"] = payoff_b(q.lambda_b, p);
    }
    return g;
}

json uprime_json(const UPrime& d) {
    json j{{"value", d.value}, {"step", d.step}, {"kink", d.kink}};
    if (d.kink) {
        j["forward"] = d.forward;
        j["backward"] = d.backward;
    }
    return j;
}

struct Counts {
    int no_trade = 0, nondiscriminatory = 0, discriminatory = 0;
    int stable = 0, unstable = 0, not_assessed = 0;
    bool uniqueness_violated = false;
};

struct Classified {
    Equilibrium eq;
    std::optional<StabilityReport> report;
    std::string note;
};

// Every equilibrium at params.buyer_mass with its stability verdict. A
// non-unique non-discriminatory equilibrium leaves the verdict unassessed.
std::vector<Classified> classify_all(const MarketParams& params, Counts& counts) {
    std::vector<Classified> out;
    if (no_trade(params) || !(params.buyer_mass > 0.0)) {
        Equilibrium nt;
        out.push_back({nt, std::nullopt, params.trade_regime() ? "no buyers" : NO_TRADE_REASON});
        counts.no_trade = 1;
        counts.not_assessed = 1;
        return out;
    }
    PayoffCurve curve(params);
    std::vector<Equilibrium> all = curve.curve().solve(params.buyer_mass);
    for (auto& e : enumerate_discriminatory(params)) all.push_back(e);
    for (auto& e : all) {
        if (e.kind == EquilibriumKind::NonDiscriminatory) ++counts.nondiscriminatory;
        else ++counts.discriminatory;
        Classified c{e, std::nullopt, {}};
        try {
            c.report = curve.classify(e);
            c.eq.stability = c.report->verdict;
        } catch (const MultipleEquilibria& m) {
            c.eq.stability = Stability::NotAssessed;
            c.note = m.what();
            counts.uniqueness_violated = true;
        }
        switch (c.eq.stability) {
            case Stability::Stable: ++counts.stable; break;
            case Stability::Unstable: ++counts.unstable; break;
            case Stability::NotAssessed: ++counts.not_assessed; break;
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

json solve_report(const MarketParams& params) {
    Counts counts;
    const auto all = classify_all(params, counts);
    json eqs = json::array();
    for (const auto& c : all) {
        json e{{"kind", to_string(c.eq.kind)}, {"stability", to_string(c.eq.stability)}};
        if (c.eq.kind != EquilibriumKind::NoTrade) {
            e["buyer_split"] = {c.eq.buyer_split.first, c.eq.buyer_split.second};
            e["buyer_payoff"] = c.eq.buyer_payoff;
            e["groups"] = {group_json(c.eq.queues.group1, params), group_json(c.eq.queues.group2, params)};
        }
        if (c.report) {
            e["criterion_value"] = c.report->criterion_value;
            e["u_prime"] = {uprime_json(c.report->u_prime_q1), uprime_json(c.report->u_prime_q2)};
        }
        if (!c.note.empty()) e["note"] = c.note;
        eqs.push_back(std::move(e));
    }
    return {{"params", params_json(params)},
            {"trade_regime", params.trade_regime()},
            {"equilibria", eqs},
            {"counts",
             {{"no_trade", counts.no_trade},
              {"nondiscriminatory", counts.nondiscriminatory},
              {"discriminatory", counts.discriminatory},
              {"stable", counts.stable},
              {"unstable", counts.unstable},
              {"not_assessed", counts.not_assessed}}},
            {"unique_nondiscriminatory_violated", counts.uniqueness_violated}};
}

json thresholds_report(const MarketParams& params) {
    json r{{"params", params_json(params)}, {"mu_threshold", mu_threshold(params)}};
    json reasons = json::object();
    const char* fields[] = {"k_threshold", "lambda_g_low", "lambda_g_high", "lambda_b_low",
                            "lambda_b_high", "q_low", "q_high", "beta_low", "beta_high"};
    for (const char* f : fields) r[f] = nullptr;
    auto explain = [&](std::initializer_list<const char*> keys, const char* why) {
        for (const char* key : keys) reasons[key] = why;
    };

    if (!params.trade_regime()) {
        explain({"k_threshold", "lambda_g_low", "lambda_g_high", "lambda_b_low", "lambda_b_high",
                 "q_low", "q_high", "beta_low", "beta_high"},
                NO_TRADE_REASON);
        r["reasons"] = reasons;
        return r;
    }
    r["k_threshold"] = k_threshold(params);
    const auto band = branch_band(params);
    if (!band) {
        explain({"lambda_g_low", "lambda_g_high", "lambda_b_low", "lambda_b_high", "q_low", "q_high",
                 "beta_low", "beta_high"},
                MONOTONE_REASON);
        r["reasons"] = reasons;
        return r;
    }
    r["lambda_g_low"] = band->lambda_g_low;
    r["lambda_g_high"] = band->lambda_g_high;
    r["lambda_b_low"] = band->lambda_b_low;
    r["lambda_b_high"] = band->lambda_b_high;
    if (const auto q = discriminatory_Q_interval(params)) {
        r["q_low"] = q->first;
        r["q_high"] = q->second;
    } else {
        explain({"q_low", "q_high"}, "no supportable buyer mass found on the band");
    }
    if (const auto b = beta_interval(params)) {
        r["beta_low"] = b->first;
        r["beta_high"] = b->second;
    } else {
        explain({"beta_low", "beta_high"},
                params.buyer_mass > 0.0 ? "no supportable buyer mass found on the band" : "buyer_mass is zero");
    }
    r["reasons"] = reasons;
    return r;
}

void write_scan_csv(std::ostream& out, const MarketParams& base, const std::vector<Axis>& axes) {
    out << "k,buyer_mass,beta,delta,alpha,no_trade,nondiscriminatory,discriminatory,"
           "stable,unstable,not_assessed,k_threshold,lambda_g_low,lambda_g_high,q_low,q_high\n";
    const std::vector<double> outer = axes.at(0).values();
    const std::vector<double> inner = axes.size() > 1 ? axes[1].values() : std::vector<double>{NaN};
    for (double a : outer) {
        for (double b : inner) {
            MarketParams p = apply_axis(base, axes[0].name, a);
            if (axes.size() > 1) p = apply_axis(p, axes[1].name, b);
            Counts c;
            classify_all(p, c);
            double kt = NaN, lg_lo = NaN, lg_hi = NaN, q_lo = NaN, q_hi = NaN;
            if (p.trade_regime()) {
                kt = k_threshold(p);
                if (const auto iv = ug_increasing_interval(p)) {
                    lg_lo = iv->first;
                    lg_hi = iv->second;
                }
                if (const auto q = discriminatory_Q_interval(p)) {
                    q_lo = q->first;
                    q_hi = q->second;
                }
            }
            out << fmt(p.k) << ',' << fmt(p.buyer_mass) << ',' << fmt(p.beta()) << ',' << fmt(p.delta)
                << ',' << fmt(p.alpha) << ',' << c.no_trade << ',' << c.nondiscriminatory << ','
                << c.discriminatory << ',' << c.stable << ',' << c.unstable << ',' << c.not_assessed
                << ',' << fmt(kt) << ',' << fmt(lg_lo) << ',' << fmt(lg_hi) << ',' << fmt(q_lo) << ','
                << fmt(q_hi) << '\n';
        }
    }
}

json simulate_report(const MarketParams& params, const RunConfig& config, std::uint64_t seed,
                     std::ostream* trajectory_csv) {
    QueuePair q;
    std::string source = "config";
    if (config.lambda_g && config.lambda_b) {
        q = {*config.lambda_g, *config.lambda_b};
        if (!(q.lambda_g >= 0.0) || !(q.lambda_b >= 0.0)) throw InputError("queue ratios must be non-negative");
    } else if (config.lambda_g || config.lambda_b) {
        throw InputError("simulate needs both lambda_g and lambda_b");
    } else {
        const auto eqs = solve_nondiscriminatory(params);
        if (eqs.empty() || eqs.front().kind == EquilibriumKind::NoTrade)
            throw InputError("simulate needs lambda_g and lambda_b when buyers do not trade");
        q = eqs.front().queues.group1;
        source = "nondiscriminatory equilibrium";
    }

    const double horizon = config.horizon / params.delta;
    const SteadyState closed = steady_state(q, params);
    const SteadyState start{0.25, 0.25, 0.25, 0.25, 1.0, false};
    const FlowTrajectory traj = integrate_flows(start, q, params, horizon, default_step(q, params));
    if (trajectory_csv) write_trajectory_csv(*trajectory_csv, traj);
    const PopulationEstimate mc = simulate_population(config.sellers, q, params, horizon, seed);

    const auto c = closed.as_array();
    const auto o = traj.states.back().as_array();
    const auto m = mc.occupancy.as_array();
    json cells = json::array();
    const char* names[] = {"p_hg", "p_lg", "p_hb", "p_lb"};
    for (std::size_t i = 0; i < 4; ++i) {
        cells.push_back({{"cell", names[i]},
                         {"closed_form", c[i]},
                         {"ode", o[i]},
                         {"simulated", m[i]},
                         {"std_error", mc.std_error[i]},
                         {"z", mc.std_error[i] > 0.0 ? (m[i] - c[i]) / mc.std_error[i] : 0.0}});
    }
    return {{"params", params_json(params)},
            {"queues", {{"lambda_g", q.lambda_g}, {"lambda_b", q.lambda_b}, {"source", source}}},
            {"sellers", config.sellers},
            {"horizon", horizon},
            {"seed", seed},
            {"ode_terminal_residual", traj.terminal_residual},
            {"events", mc.events},
            {"batches", mc.batches},
            {"beliefs",
             {{"closed_form", {beliefs(q, params).mu_g, beliefs(q, params).mu_b}},
              {"simulated", {mc.beliefs.mu_g, mc.beliefs.mu_b}}}},
            {"cells", cells}};
}

}  // namespace ratings::cli
