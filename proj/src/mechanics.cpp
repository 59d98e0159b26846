#include "ratings/mechanics.hpp"

#include <cmath>
#include <limits>

namespace ratings {

double seller_match_rate(double lambda, double k) {
    return lambda <= 0.0 ? 0.0 : std::pow(lambda, k);
}

double buyer_match_rate(double lambda, double k) {
    if (lambda <= 0.0) throw DegenerateQueue();
    return std::pow(lambda, k - 1.0);
}

SteadyState steady_state(const QueuePair& queues, const MarketParams& params,
                         double seller_mass) {
    const double psi_g = seller_match_rate(queues.lambda_g, params.k);
    const double psi_b = seller_match_rate(queues.lambda_b, params.k);
    const double d = params.delta;
    const double a = params.alpha;
    const double denom = 2.0 * (d * (psi_g + psi_b) + a * psi_g * psi_b);

    SteadyState s;
    s.seller_mass = seller_mass;
    if (denom == 0.0) {
        s.p_hg = s.p_lg = s.p_hb = s.p_lb = 0.25 * seller_mass;
        s.indeterminate = true;
        return s;
    }
    const double scale = seller_mass / denom;
    s.p_hg = psi_b * (d + psi_g * a) * scale;
    s.p_lg = psi_b * d * scale;
    s.p_hb = psi_g * d * scale;
    s.p_lb = psi_g * (d + psi_b * a) * scale;
    return s;
}

std::array<double, 4> flow_residuals(const SteadyState& st, const QueuePair& queues,
                                     const MarketParams& params) {
    const double up = seller_match_rate(queues.lambda_b, params.k) * params.alpha;    // HB -> HG
    const double down = seller_match_rate(queues.lambda_g, params.k) * params.alpha;  // LG -> LB
    const double d = params.delta;
    return {
        st.p_lg * d + st.p_hb * up - st.p_hg * d,
        st.p_hg * d - st.p_lg * (d + down),
        st.p_lb * d - st.p_hb * (d + up),
        st.p_hb * d + st.p_lg * down - st.p_lb * d,
    };
}

double belief_g(double lambda_g, const MarketParams& params) {
    const double psi = seller_match_rate(lambda_g, params.k);
    return 1.0 - params.delta / (2.0 * params.delta + psi * params.alpha);
}

double belief_b(double lambda_b, const MarketParams& params) {
    const double psi = seller_match_rate(lambda_b, params.k);
    return params.delta / (2.0 * params.delta + psi * params.alpha);
}

Beliefs beliefs(const QueuePair& queues, const MarketParams& params) {
    return {belief_g(queues.lambda_g, params), belief_b(queues.lambda_b, params)};
}

double buyer_payoff(Rating rating, double lambda, const MarketParams& params) {
    if (lambda <= 0.0) throw DegenerateQueue();
    if (lambda < LAMBDA_MIN) {
        const double at_half = 0.5 * (params.u_high + params.u_low) - params.price;
        if (at_half == 0.0) return 0.0;
        return std::copysign(std::numeric_limits<double>::infinity(), at_half);
    }
    const double psi = seller_match_rate(lambda, params.k);
    // delta / (2 delta + psi alpha) is the share of the "wrong" type in either rating.
    const double wrong = params.delta / (2.0 * params.delta + psi * params.alpha);
    const double spread = params.u_high - params.u_low;
    const double margin = rating == Rating::G ? (params.u_high - params.price) - spread * wrong
                                              : (params.u_low - params.price) + spread * wrong;
    return psi / lambda * margin;
}

double mu_threshold(const MarketParams& params) {
    return (params.price - params.u_low) / (params.u_high - params.u_low);
}

double k_threshold(const MarketParams& params) {
    if (!params.trade_regime())
        throw InvalidRegime("k_threshold needs (u_high + u_low)/2 > price");
    const double radicand =
        1.0 - (params.u_high - params.u_low) / (2.0 * (params.u_high - params.price));
    return 0.5 * (1.0 + std::sqrt(radicand));
}

namespace {

struct Quadratic {
    double a, b, c;
};

Quadratic h_coefficients(const MarketParams& p) {
    const double one_minus_k = 1.0 - p.k;
    const double surplus_h = p.u_high - p.price;
    const double spread = p.u_high - p.u_low;
    return {
        -one_minus_k * p.alpha * p.alpha * surplus_h,
        (spread - 4.0 * one_minus_k * surplus_h) * p.delta * p.alpha,
        -2.0 * one_minus_k * p.delta * p.delta * (p.u_high + p.u_low - 2.0 * p.price),
    };
}

}  // namespace

double h_quadratic(double psi, const MarketParams& params) {
    const auto [a, b, c] = h_coefficients(params);
    return (a * psi + b) * psi + c;
}

std::optional<std::pair<double, double>> ug_increasing_interval(const MarketParams& params) {
    if (params.k <= k_threshold(params)) return std::nullopt;
    const auto [a, b, c] = h_coefficients(params);
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > 0.0) || !(b > 0.0)) return std::nullopt;
    // b > 0 here, so the sum of the roots is positive; avoid cancellation.
    const double q = -0.5 * (b + std::sqrt(disc));
    double psi_lo = c / q;
    double psi_hi = q / a;
    if (psi_lo > psi_hi) std::swap(psi_lo, psi_hi);
    if (!(psi_lo > 0.0)) return std::nullopt;
    const double inv_k = 1.0 / params.k;
    return std::make_pair(std::pow(psi_lo, inv_k), std::pow(psi_hi, inv_k));
}

}  // namespace ratings
