#include "ratings/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ratings/mechanics.hpp"
#include "ratings/numeric.hpp"

namespace ratings {

PayoffCurve::PayoffCurve(const MarketParams& params) : curve_(params) {}

Equilibrium PayoffCurve::equilibrium(double q) const {
    if (!(q > 0.0)) throw std::invalid_argument("U(q) needs q > 0");
    auto eqs = curve_.solve(2.0 * q);
    if (eqs.size() > 1) throw MultipleEquilibria(2.0 * q, eqs.size());
    if (eqs.empty()) throw Error("no non-discriminatory equilibrium found at buyer mass " +
                                 std::to_string(2.0 * q));
    return eqs.front();
}

double PayoffCurve::value(double q) const { return equilibrium(q).buyer_payoff; }

UPrime PayoffCurve::derivative(double q) const {
    UPrime d;
    d.step = std::min(1e-5 * std::max(q, 1.0), 0.5 * q);
    const double mid = value(q);
    const double up = value(q + d.step);
    const double down = value(q - d.step);
    d.value = (up - down) / (2.0 * d.step);
    d.forward = (up - mid) / d.step;
    d.backward = (mid - down) / d.step;
    const double scale = std::max(std::abs(d.forward), std::abs(d.backward));
    d.kink = std::abs(d.forward - d.backward) > 1e-3 * scale;
    if (d.kink) {
        // Curvature alone also separates the one-sided quotients; a real kink
        // keeps them apart at a finer step.
        const double h = d.step / 8.0;
        const double fwd = (value(q + h) - mid) / h;
        const double bwd = (mid - value(q - h)) / h;
        d.kink = std::abs(fwd - bwd) > 1e-3 * std::max(std::abs(fwd), std::abs(bwd));
    }
    return d;
}

double PayoffCurve::asymmetry(double x, double total_mass) const {
    if (x == 0.0) return 0.0;
    return value(0.5 * total_mass + x) - value(0.5 * total_mass - x);
}

std::vector<double> PayoffCurve::asymmetry_roots(double total_mass) const {
    std::vector<double> roots;
    if (!(total_mass > 0.0)) return roots;
    const double edge = 0.5 * total_mass - 1e-4 * total_mass;
    const auto xs = numeric::lin_grid(0.0, edge, G_SCAN_POINTS);
    std::vector<double> gs(xs.size());
    for (std::size_t i = 1; i < xs.size(); ++i) gs[i] = asymmetry(xs[i], total_mass);

    auto g = [&](double x) { return asymmetry(x, total_mass); };
    // x = 0 is the symmetric outcome and always a root; only x > 0 counts.
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (gs[i] == 0.0) {
            roots.push_back(xs[i]);
            continue;
        }
        if (i + 1 < xs.size() && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0))
            roots.push_back(numeric::bisect(g, xs[i], xs[i + 1], gs[i], gs[i + 1]));
    }
    return roots;
}

StabilityReport PayoffCurve::classify(const Equilibrium& eq) const {
    StabilityReport r;
    r.equilibrium = eq;
    if (eq.kind == EquilibriumKind::NoTrade) {
        r.verdict = Stability::NotAssessed;
        r.criterion_value = std::numeric_limits<double>::quiet_NaN();
        r.equilibrium.stability = r.verdict;
        return r;
    }
    r.u_prime_q1 = derivative(eq.buyer_split.first);
    r.u_prime_q2 = eq.buyer_split.second == eq.buyer_split.first ? r.u_prime_q1
                                                                  : derivative(eq.buyer_split.second);
    r.criterion_value = r.u_prime_q1.value + r.u_prime_q2.value;
    r.verdict = r.criterion_value <= 0.0 ? Stability::Stable : Stability::Unstable;
    r.equilibrium.stability = r.verdict;
    return r;
}

std::optional<Equilibrium> PayoffCurve::stable_discriminatory(double total_mass) const {
    // A monotone u_G admits no discriminatory equilibrium at all.
    if (!ug_increasing_interval(params())) return std::nullopt;
    const auto roots = asymmetry_roots(total_mass);
    if (roots.empty()) return std::nullopt;

    const double x = roots.back();
    const double q_more = 0.5 * total_mass + x;
    const double q_less = 0.5 * total_mass - x;
    const Equilibrium more = equilibrium(q_more);
    const Equilibrium less = equilibrium(q_less);

    Equilibrium eq;
    eq.kind = EquilibriumKind::Discriminatory;
    const bool more_first = more.queues.group1.lambda_g >= less.queues.group1.lambda_g;
    eq.queues.group1 = more_first ? more.queues.group1 : less.queues.group1;
    eq.queues.group2 = more_first ? less.queues.group1 : more.queues.group1;
    eq.buyer_split = more_first ? std::make_pair(q_more, q_less) : std::make_pair(q_less, q_more);
    eq.buyer_payoff = 0.5 * (more.buyer_payoff + less.buyer_payoff);
    return classify(eq).equilibrium;
}

double U_of_q(double q, const MarketParams& params) { return PayoffCurve(params).value(q); }

UPrime U_prime(double q, const MarketParams& params) { return PayoffCurve(params).derivative(q); }

StabilityReport classify_stability(const Equilibrium& eq, const MarketParams& params) {
    if (eq.kind == EquilibriumKind::NoTrade) {
        StabilityReport r;
        r.equilibrium = eq;
        r.equilibrium.stability = r.verdict = Stability::NotAssessed;
        r.criterion_value = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    return PayoffCurve(params).classify(eq);
}

double g_function(double x, double total_mass, const MarketParams& params) {
    if (x < 0.0 || x >= 0.5 * total_mass) throw std::invalid_argument("g needs 0 <= x < Q/2");
    return PayoffCurve(params).asymmetry(x, total_mass);
}

std::optional<Equilibrium> find_stable_discriminatory(double total_mass, const MarketParams& params) {
    if (!params.trade_regime()) return std::nullopt;
    return PayoffCurve(params).stable_discriminatory(total_mass);
}

}  // namespace ratings
