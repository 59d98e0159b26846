#pragma once

// Independent reference computations and random draws for the tests. Nothing
// here calls into the closed forms under test.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ratings/model.hpp"

namespace oracle {

/// Stationary distribution of the 4-state seller chain (HG, LG, HB, LB) from
/// its generator matrix, by a dense linear solve.
inline std::array<double, 4> steady_state(double lambda_g, double lambda_b, const ratings::MarketParams& p,
                                          double mass = 1.0) {
    const double sg = std::pow(lambda_g, p.k);
    const double sb = std::pow(lambda_b, p.k);
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();  // q(i, j): rate i -> j
    q(0, 1) = p.delta;           // HG -> LG
    q(1, 0) = p.delta;           // LG -> HG
    q(2, 3) = p.delta;           // HB -> LB
    q(3, 2) = p.delta;           // LB -> HB
    q(2, 0) = p.alpha * sb;      // HB -> HG
    q(1, 3) = p.alpha * sg;      // LG -> LB
    for (int i = 0; i < 4; ++i) q(i, i) = -q.row(i).sum();
    Eigen::Matrix4d a = q.transpose();
    a.row(3).setOnes();
    Eigen::Vector4d rhs(0, 0, 0, mass);
    const Eigen::Vector4d pi = a.fullPivLu().solve(rhs);
    return {pi(0), pi(1), pi(2), pi(3)};
}

/// Buyer payoff from the oracle steady state: match rate times expected
/// surplus net of the price.
inline double payoff(bool g_rating, double lambda, const ratings::MarketParams& p) {
    const auto s = steady_state(lambda, lambda, p);
    const double mu = g_rating ? s[0] / (s[0] + s[1]) : s[2] / (s[2] + s[3]);
    return std::pow(lambda, p.k - 1.0) * (mu * p.u_high + (1.0 - mu) * p.u_low - p.price);
}

/// Buyers needed to hold the queues fixed: lambda times the mass rated j.
inline double buyers(double lambda_g, double lambda_b, const ratings::MarketParams& p, double mass = 1.0) {
    const auto s = steady_state(lambda_g, lambda_b, p, mass);
    return lambda_g * (s[0] + s[1]) + lambda_b * (s[2] + s[3]);
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    const double fhi = f(hi);
    // Tangent level (no sign change): the closer endpoint is the root.
    if ((flo < 0) == (fhi < 0)) return std::abs(flo) <= std::abs(fhi) ? lo : hi;
    for (int i = 0; i < 300; ++i) {
        const double mid = lo > 0 && hi > 4 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Roots (in lambda) of the derivative-sign quadratic, straight from the
/// quadratic formula.
inline std::vector<double> h_roots_lambda(const ratings::MarketParams& p) {
    const double a = -(1 - p.k) * p.alpha * p.alpha * (p.u_high - p.price);
    const double b = (p.u_high - p.u_low - 4 * (1 - p.k) * (p.u_high - p.price)) * p.delta * p.alpha;
    const double c = -2 * (1 - p.k) * p.delta * p.delta * (p.u_high + p.u_low - 2 * p.price);
    const double disc = b * b - 4 * a * c;
    if (disc <= 0) return {};
    const double r1 = (-b + std::sqrt(disc)) / (2 * a);
    const double r2 = (-b - std::sqrt(disc)) / (2 * a);
    std::vector<double> out;
    for (double psi : {std::min(r1, r2), std::max(r1, r2)})
        if (psi > 0) out.push_back(std::pow(psi, 1.0 / p.k));
    return out;
}

}  // namespace oracle

namespace gen {

/// Hand-rolled parameter generator with a fixed seed per test.
struct Draw {
    std::mt19937_64 rng;
    explicit Draw(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    ratings::MarketParams params(double k_lo = 0.3, double k_hi = 0.95) {
        ratings::ParamRecord r;
        r.delta = log_uniform(0.05, 2.0);
        r.alpha = uniform(0.05, 1.0);
        r.u_low = uniform(0.0, 2.0);
        r.u_high = r.u_low + uniform(0.2, 3.0);
        r.price = uniform(0.0, r.u_high * 0.999);
        r.k = uniform(k_lo, k_hi);
        r.buyer_mass = log_uniform(0.05, 5.0);
        return ratings::validate_params(r);
    }

    /// (u_high + u_low)/2 > price.
    ratings::MarketParams trade_params(double k_lo = 0.3, double k_hi = 0.95) {
        auto p = params(k_lo, k_hi);
        p.price = uniform(0.0, 0.999 * (p.u_high + p.u_low) / 2.0);
        return p;
    }

    /// Dirichlet(1,1,1,1) split of the given mass.
    std::array<double, 4> dirichlet(double mass = 1.0) {
        std::exponential_distribution<double> e(1.0);
        std::array<double, 4> x{};
        double s = 0;
        for (auto& v : x) s += (v = e(rng));
        for (auto& v : x) v *= mass / s;
        return x;
    }
};

}  // namespace gen
