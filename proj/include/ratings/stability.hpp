#pragma once

#include <optional>

#include "ratings/equilibrium.hpp"
#include "ratings/model.hpp"

namespace ratings {

inline constexpr std::size_t G_SCAN_POINTS = 512;

struct UPrime {
    double value = 0.0;     // central difference
    double step = 0.0;
    double forward = 0.0;   // one-sided estimates, reported for kink detection
    double backward = 0.0;
    bool kink = false;      // one-sided estimates disagree by more than 1e-3 relative
};

struct StabilityReport {
    Equilibrium equilibrium;
    UPrime u_prime_q1;
    UPrime u_prime_q2;
    Stability verdict = Stability::NotAssessed;
    double criterion_value = 0.0;  // U'(Q1) + U'(Q2)
};

/// Reduced payoff U(q): the buyer payoff in the unique non-discriminatory
/// equilibrium with 2q buyers per unit of sellers (q buyers per group of
/// mass 1/2). Holds the precomputed indifference curve so that repeated
/// evaluations are cheap.
class PayoffCurve {
public:
    explicit PayoffCurve(const MarketParams& params);

    /// Throws MultipleEquilibria when the non-discriminatory equilibrium at
    /// buyer mass 2q is not unique.
    double value(double q) const;
    Equilibrium equilibrium(double q) const;
    UPrime derivative(double q) const;

    /// U(Q/2 + x) - U(Q/2 - x).
    double asymmetry(double x, double total_mass) const;

    StabilityReport classify(const Equilibrium& eq) const;

    /// Largest positive root of the asymmetry function, turned into a
    /// discriminatory equilibrium with its stability verdict.
    std::optional<Equilibrium> stable_discriminatory(double total_mass) const;

    /// Positive roots of the asymmetry function on (0, Q/2), ascending.
    std::vector<double> asymmetry_roots(double total_mass) const;

    const MarketParams& params() const noexcept { return curve_.params(); }
    const IndifferenceCurve& curve() const noexcept { return curve_; }

private:
    IndifferenceCurve curve_;
};

double U_of_q(double q, const MarketParams& params);
UPrime U_prime(double q, const MarketParams& params);
StabilityReport classify_stability(const Equilibrium& eq, const MarketParams& params);
double g_function(double x, double total_mass, const MarketParams& params);
std::optional<Equilibrium> find_stable_discriminatory(double total_mass, const MarketParams& params);

}  // namespace ratings
