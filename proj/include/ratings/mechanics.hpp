#pragma once

#include <array>
#include <optional>
#include <utility>

#include "ratings/model.hpp"

namespace ratings {

/// Seller match rate psi(lambda) = lambda^k.
double seller_match_rate(double lambda, double k);

/// Buyer match rate phi(lambda) = psi(lambda) / lambda. Throws DegenerateQueue at 0.
double buyer_match_rate(double lambda, double k);

/// Closed-form stationary distribution of one seller population at fixed queues.
///
/// With psi_G = psi_B = 0 nobody trades, any split is stationary, and the
/// result is flagged indeterminate with a quarter of the mass in each cell.
SteadyState steady_state(const QueuePair& queues, const MarketParams& params,
                         double seller_mass = 1.0);

/// Net inflow into (HG, LG, HB, LB); zero at a steady state, sums to zero always.
std::array<double, 4> flow_residuals(const SteadyState& state, const QueuePair& queues,
                                     const MarketParams& params);

double belief_g(double lambda_g, const MarketParams& params);
double belief_b(double lambda_b, const MarketParams& params);
Beliefs beliefs(const QueuePair& queues, const MarketParams& params);

/// Flow payoff of a buyer searching among sellers with the given rating.
/// Queue ratios below LAMBDA_MIN are treated as the divergent limit.
double buyer_payoff(Rating rating, double lambda, const MarketParams& params);

inline double payoff_g(double lambda, const MarketParams& params) {
    return buyer_payoff(Rating::G, lambda, params);
}
inline double payoff_b(double lambda, const MarketParams& params) {
    return buyer_payoff(Rating::B, lambda, params);
}

/// Belief below which a submarket yields a non-positive payoff.
double mu_threshold(const MarketParams& params);

/// Largest elasticity for which the G-submarket payoff is monotone.
/// Throws InvalidRegime outside the trade regime.
double k_threshold(const MarketParams& params);

/// Quadratic in psi whose sign is the sign of d u_G / d lambda.
double h_quadratic(double psi, const MarketParams& params);

/// Interval of lambda_G on which u_G increases, or nullopt when u_G is monotone.
/// Throws InvalidRegime outside the trade regime.
std::optional<std::pair<double, double>> ug_increasing_interval(const MarketParams& params);

}  // namespace ratings
