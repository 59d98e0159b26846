#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ratings {

// Shared numeric tolerances.
inline constexpr double ABS_TOL = 1e-10;   // root residuals
inline constexpr double MASS_TOL = 1e-12;  // seller-mass conservation
inline constexpr double EQ_TOL = 1e-8;     // cross-submarket payoff equality

// Queue ratios are clamped to this range whenever a root is bracketed.
inline constexpr double LAMBDA_MIN = 1e-12;
inline constexpr double LAMBDA_MAX = 1e6;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter record failed validation; bound() names the violated invariant.
class ViolatedBound : public Error {
public:
    explicit ViolatedBound(std::string bound)
        : Error("violated bound: " + bound), bound_(std::move(bound)) {}
    const std::string& bound() const noexcept { return bound_; }

private:
    std::string bound_;
};

class DegenerateQueue : public Error {
public:
    DegenerateQueue() : Error("queue ratio is zero: buyer match rate is infinite") {}
};

/// The operation needs (u_H + u_L)/2 > p (buyers trade).
class InvalidRegime : public Error {
public:
    using Error::Error;
};

class BracketFailure : public Error {
public:
    using Error::Error;
};

class OutOfBand : public Error {
public:
    using Error::Error;
};

/// More than one non-discriminatory equilibrium at a buyer mass where the
/// stability analysis needs a unique one.
class MultipleEquilibria : public Error {
public:
    MultipleEquilibria(double buyer_mass, std::size_t count);
    double buyer_mass() const noexcept { return buyer_mass_; }
    std::size_t count() const noexcept { return count_; }

private:
    double buyer_mass_;
    std::size_t count_;
};

class StepTooLarge : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types

/// Unvalidated parameter record, as read from a config file.
struct ParamRecord {
    double delta = 0.0;
    double alpha = 0.0;
    double u_high = 0.0;
    double u_low = 0.0;
    double price = 0.0;
    double k = 0.0;
    double buyer_mass = 0.0;
};

/// Exogenous primitives of the market. Obtain through validate_params.
struct MarketParams {
    double delta;       // type-switching rate
    double alpha;       // rating-correction probability per transaction
    double u_high;      // surplus from a type-H trade
    double u_low;       // surplus from a type-L trade
    double price;       // transfer paid to the seller per trade
    double k;           // matching elasticity, psi(lambda) = lambda^k
    double buyer_mass;  // total buyer measure Q

    /// Rating quality alpha / delta.
    double beta() const noexcept { return alpha / delta; }
    /// True when the average seller is not worth the price: buyers do not search.
    bool trade_regime() const noexcept { return (u_high + u_low) / 2.0 > price; }
};

/// Throws ViolatedBound naming the first failed invariant.
MarketParams validate_params(const ParamRecord& raw);

struct QueuePair {
    double lambda_g = 0.0;
    double lambda_b = 0.0;
};

struct QueueQuad {
    QueuePair group1;
    QueuePair group2;
};

enum class Rating { G, B };

/// Seller masses by (type, rating) for one seller population.
struct SteadyState {
    double p_hg = 0.0;
    double p_lg = 0.0;
    double p_hb = 0.0;
    double p_lb = 0.0;
    double seller_mass = 1.0;
    // Set when no seller ever trades (psi_G = psi_B = 0); the masses then hold
    // the convention split (a quarter of the mass in each cell).
    bool indeterminate = false;

    double total() const noexcept { return p_hg + p_lg + p_hb + p_lb; }
    double g_mass() const noexcept { return p_hg + p_lg; }
    double b_mass() const noexcept { return p_hb + p_lb; }
    std::array<double, 4> as_array() const noexcept { return {p_hg, p_lg, p_hb, p_lb}; }
    static SteadyState from_array(const std::array<double, 4>& v, double seller_mass);
};

struct Beliefs {
    double mu_g = 0.5;  // P(type H | rating G)
    double mu_b = 0.5;  // P(type H | rating B)
};

enum class EquilibriumKind { NoTrade, NonDiscriminatory, Discriminatory };
enum class Stability { Stable, Unstable, NotAssessed };

struct Equilibrium {
    EquilibriumKind kind = EquilibriumKind::NoTrade;
    QueueQuad queues;
    double buyer_payoff = 0.0;
    std::pair<double, double> buyer_split{0.0, 0.0};  // (Q1, Q2)
    Stability stability = Stability::NotAssessed;
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<SteadyState> states;
    double terminal_residual = 0.0;
};

const char* to_string(EquilibriumKind kind) noexcept;
const char* to_string(Stability s) noexcept;

}  // namespace ratings
