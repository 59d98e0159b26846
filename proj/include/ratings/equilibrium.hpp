#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ratings/model.hpp"

namespace ratings {

inline constexpr std::size_t CURVE_GRID_POINTS = 2048;
inline constexpr std::size_t BAND_GRID_POINTS = 1024;
// Equilibria closer than this (relative, max-norm over queue ratios) are merged.
inline constexpr double DUPLICATE_TOL = 1e-6;

/// Buyers stay out when the average seller is not worth the price.
bool no_trade(const MarketParams& params);

/// Buyer mass that supports the given queues over a population of seller_mass
/// at its steady state (market clearing).
double required_buyer_mass(const QueuePair& queues, const MarketParams& params,
                           double seller_mass = 1.0);

/// lambda_B that clears the market for buyer mass Q at the given lambda_G.
double mc_curve(double lambda_g, double buyer_mass, const MarketParams& params,
                double seller_mass = 1.0);

/// lambda_B that makes buyers indifferent between the G and B submarkets.
double bi_curve(double lambda_g, const MarketParams& params);

/// Where the solution of u_B(lambda_B) = target lies relative to the clamp range.
enum class CurvePosition { Below, Inside, Above };

struct CurvePoint {
    double lambda_b;  // clamped to [LAMBDA_MIN, LAMBDA_MAX]
    CurvePosition position;
};

/// Non-throwing inversion of u_B, used by the grid scans.
CurvePoint invert_payoff_b(double target, const MarketParams& params, double guess = 1.0);

/// Buyer-indifference curve sampled on a fixed log grid over the clamp range.
/// The curve does not depend on the buyer mass, so one instance serves every
/// market-clearing level.
class IndifferenceCurve {
public:
    explicit IndifferenceCurve(const MarketParams& params);

    /// Every non-discriminatory equilibrium of one seller population of mass 1
    /// facing buyer_mass buyers, sorted by lambda_G.
    std::vector<Equilibrium> solve(double buyer_mass) const;

    const std::vector<double>& lambda_g() const noexcept { return lambda_g_; }
    const std::vector<CurvePoint>& lambda_b() const noexcept { return lambda_b_; }
    const MarketParams& params() const noexcept { return params_; }

private:
    MarketParams params_;
    std::vector<double> lambda_g_;
    std::vector<CurvePoint> lambda_b_;
};

/// No-trade outcome, or every non-discriminatory equilibrium at params.buyer_mass.
std::vector<Equilibrium> solve_nondiscriminatory(const MarketParams& params);

/// The lambda_G interval on which u_G rises, and the matching lambda_B band.
struct BranchBand {
    double lambda_g_low;   // local minimum of u_G
    double lambda_g_high;  // local maximum of u_G
    double lambda_b_low;   // bi_curve(lambda_g_high)
    double lambda_b_high;  // bi_curve(lambda_g_low)
};

/// nullopt when u_G is monotone or buyers do not trade.
std::optional<BranchBand> branch_band(const MarketParams& params);

struct BranchTriple {
    double lambda_b = 0.0;
    std::array<double, 3> h{};  // ascending lambda_G solutions of u_G = u_B(lambda_b)
    int multiplicity = 0;       // number of distinct members
};

BranchTriple branch_triple(double lambda_b, const MarketParams& params);
/// Same as above with a precomputed band; throws OutOfBand outside it.
BranchTriple branch_triple(double lambda_b, const MarketParams& params, const BranchBand& band);

/// Branch pairs swept for discriminatory equilibria: (h1,h2), (h2,h3), (h1,h3).
inline constexpr std::array<std::pair<int, int>, 3> BRANCH_PAIRS{{{0, 1}, {1, 2}, {0, 2}}};

/// Sweep of the lambda_B band: for each branch pair, the total buyer mass
/// needed when one group sits on each branch (seller mass 1/2 per group).
class DiscriminatorySweep {
public:
    /// Empty sweep when u_G is monotone.
    explicit DiscriminatorySweep(const MarketParams& params);

    bool empty() const noexcept { return !band_.has_value(); }
    const std::optional<BranchBand>& band() const noexcept { return band_; }

    /// Range of supportable buyer masses over all pairs.
    std::optional<std::pair<double, double>> q_interval() const;

    /// True when the per-pair ranges overlap into a single interval.
    bool union_connected() const;

    /// Per-pair (min, max) of the supportable buyer mass.
    std::array<std::pair<double, double>, 3> pair_ranges() const;

    /// Every discriminatory equilibrium at the given total buyer mass.
    std::vector<Equilibrium> enumerate(double buyer_mass) const;

    struct Sample {
        double lambda_b;
        double total_mass;
    };
    const std::vector<Sample>& samples(std::size_t pair) const { return samples_.at(pair); }

private:
    double pair_mass(std::size_t pair, double lambda_b) const;

    MarketParams params_;
    std::optional<BranchBand> band_;
    std::array<std::vector<Sample>, 3> samples_;
};

std::vector<Equilibrium> enumerate_discriminatory(const MarketParams& params);

std::optional<std::pair<double, double>> discriminatory_Q_interval(const MarketParams& params);

/// lambda * beta^(1/k): maps a (Q, beta) system onto the beta = 1 system.
double rescale_queue(double lambda, double beta, double k);

/// Same primitives with delta = alpha = 1 (rating quality normalized to 1).
MarketParams normalized_params(const MarketParams& params);

/// Rating-quality range (alpha/delta) that supports discrimination at params.buyer_mass.
std::optional<std::pair<double, double>> beta_interval(const MarketParams& params);

/// Beliefs of each group under an equilibrium's queues.
std::pair<Beliefs, Beliefs> group_beliefs(const Equilibrium& eq, const MarketParams& params);

}  // namespace ratings
