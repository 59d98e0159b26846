#include "ratings/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "ratings/mechanics.hpp"
#include "ratings/numeric.hpp"

namespace ratings {

namespace {

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

bool same_equilibrium(const Equilibrium& a, const Equilibrium& b) {
    return close_rel(a.queues.group1.lambda_g, b.queues.group1.lambda_g, DUPLICATE_TOL) &&
           close_rel(a.queues.group2.lambda_g, b.queues.group2.lambda_g, DUPLICATE_TOL) &&
           close_rel(a.queues.group1.lambda_b, b.queues.group1.lambda_b, DUPLICATE_TOL) &&
           close_rel(a.queues.group2.lambda_b, b.queues.group2.lambda_b, DUPLICATE_TOL);
}

void push_unique(std::vector<Equilibrium>& out, Equilibrium eq) {
    for (const auto& e : out)
        if (same_equilibrium(e, eq)) return;
    out.push_back(eq);
}

/// Roots of f across a sampled sequence: exact zeros at nodes plus one bisection
/// per sign-change cell.
template <class F>
std::vector<double> scan_roots(const std::vector<double>& x, const std::vector<double>& fx, F&& f) {
    std::vector<double> roots;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (fx[i] == 0.0) {
            roots.push_back(x[i]);
            continue;
        }
        if (i + 1 < n && fx[i + 1] != 0.0 && (fx[i] < 0.0) != (fx[i + 1] < 0.0))
            roots.push_back(numeric::bisect(f, x[i], x[i + 1], fx[i], fx[i + 1]));
    }
    return roots;
}

double clamp_lambda(double v) { return std::clamp(v, LAMBDA_MIN, LAMBDA_MAX); }

}  // namespace

bool no_trade(const MarketParams& params) { return !params.trade_regime(); }

double required_buyer_mass(const QueuePair& q, const MarketParams& params, double seller_mass) {
    const double psi_g = seller_match_rate(q.lambda_g, params.k);
    const double psi_b = seller_match_rate(q.lambda_b, params.k);
    const double d = params.delta;
    const double a = params.alpha;
    const double denom = 2.0 * (d * (psi_g + psi_b) + a * psi_g * psi_b);
    if (denom == 0.0) return 0.0;
    const double numer =
        q.lambda_g * psi_b * (2.0 * d + a * psi_g) + q.lambda_b * psi_g * (2.0 * d + a * psi_b);
    return seller_mass * numer / denom;
}

double mc_curve(double lambda_g, double buyer_mass, const MarketParams& params,
                double seller_mass) {
    if (!(lambda_g > 0.0) || !(buyer_mass > 0.0))
        throw std::invalid_argument("mc_curve needs lambda_g > 0 and buyer_mass > 0");
    auto f = [&](double lb) {
        return required_buyer_mass({lambda_g, lb}, params, seller_mass) - buyer_mass;
    };
    double lo = clamp_lambda(buyer_mass / seller_mass * 0.5);
    double hi = clamp_lambda(lo * 4.0);
    double f_lo = f(lo);
    while (f_lo > 0.0) {
        if (lo == LAMBDA_MIN) throw BracketFailure("mc_curve: root below the lambda floor");
        lo = clamp_lambda(lo / 8.0);
        f_lo = f(lo);
    }
    double f_hi = f(hi);
    while (f_hi < 0.0) {
        if (hi == LAMBDA_MAX) throw BracketFailure("mc_curve: root above the lambda cap");
        hi = clamp_lambda(hi * 8.0);
        f_hi = f(hi);
    }
    return numeric::bisect(f, lo, hi, f_lo, f_hi);
}

CurvePoint invert_payoff_b(double target, const MarketParams& params, double guess) {
    if (!(target > 0.0)) throw InvalidRegime("payoff inversion needs a positive target payoff");
    // u_B is strictly decreasing wherever it is positive, and never climbs back
    // above a positive target once below it.
    auto f = [&](double lb) { return payoff_b(lb, params) - target; };
    double lo = clamp_lambda(guess * 0.5);
    double hi = clamp_lambda(guess * 2.0);
    double f_lo = f(lo);
    while (f_lo < 0.0) {
        if (lo == LAMBDA_MIN) return {LAMBDA_MIN, CurvePosition::Below};
        hi = lo;
        lo = clamp_lambda(lo / 8.0);
        f_lo = f(lo);
    }
    double f_hi = f(hi);
    while (f_hi > 0.0) {
        if (hi == LAMBDA_MAX) return {LAMBDA_MAX, CurvePosition::Above};
        lo = hi;
        f_lo = f_hi;
        hi = clamp_lambda(hi * 8.0);
        f_hi = f(hi);
    }
    return {numeric::bisect(f, lo, hi, f_lo, f_hi), CurvePosition::Inside};
}

double bi_curve(double lambda_g, const MarketParams& params) {
    if (!params.trade_regime()) throw InvalidRegime("bi_curve needs (u_high + u_low)/2 > price");
    if (!(lambda_g > 0.0)) throw std::invalid_argument("bi_curve needs lambda_g > 0");
    const CurvePoint pt = invert_payoff_b(payoff_g(lambda_g, params), params, lambda_g);
    if (pt.position != CurvePosition::Inside)
        throw BracketFailure("bi_curve: lambda_B outside [1e-12, 1e6]");
    return pt.lambda_b;
}

// ---------------------------------------------------------------------------

IndifferenceCurve::IndifferenceCurve(const MarketParams& params)
    : params_(params), lambda_g_(numeric::log_grid(LAMBDA_MIN, LAMBDA_MAX, CURVE_GRID_POINTS)) {
    if (!params.trade_regime())
        throw InvalidRegime("indifference curve needs (u_high + u_low)/2 > price");
    lambda_b_.reserve(lambda_g_.size());
    for (double lg : lambda_g_) lambda_b_.push_back(invert_payoff_b(payoff_g(lg, params_), params_, lg));
}

std::vector<Equilibrium> IndifferenceCurve::solve(double buyer_mass) const {
    std::vector<Equilibrium> out;
    if (!(buyer_mass > 0.0)) return out;

    // Theta is increasing in lambda_B, so the sign of this gap is the sign of
    // (lambda_B^BI - lambda_B^MC): its roots are the curve intersections.
    auto gap = [&](double lg) {
        const CurvePoint pt = invert_payoff_b(payoff_g(lg, params_), params_, lg);
        return required_buyer_mass({lg, pt.lambda_b}, params_) - buyer_mass;
    };
    std::vector<double> fx(lambda_g_.size());
    for (std::size_t i = 0; i < lambda_g_.size(); ++i)
        fx[i] = required_buyer_mass({lambda_g_[i], lambda_b_[i].lambda_b}, params_) - buyer_mass;

    for (double lg : scan_roots(lambda_g_, fx, gap)) {
        const CurvePoint pt = invert_payoff_b(payoff_g(lg, params_), params_, lg);
        if (pt.position != CurvePosition::Inside) continue;
        const QueuePair q{lg, pt.lambda_b};
        if (!(q.lambda_g > q.lambda_b && q.lambda_b > 0.0)) continue;
        Equilibrium eq;
        eq.kind = EquilibriumKind::NonDiscriminatory;
        eq.queues = {q, q};
        eq.buyer_payoff = payoff_b(q.lambda_b, params_);
        eq.buyer_split = {0.5 * buyer_mass, 0.5 * buyer_mass};
        push_unique(out, eq);
    }
    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return a.queues.group1.lambda_g < b.queues.group1.lambda_g;
    });
    return out;
}

std::vector<Equilibrium> solve_nondiscriminatory(const MarketParams& params) {
    if (no_trade(params) || params.buyer_mass == 0.0) {
        Equilibrium eq;
        eq.kind = EquilibriumKind::NoTrade;
        return {eq};
    }
    return IndifferenceCurve(params).solve(params.buyer_mass);
}

// ---------------------------------------------------------------------------

std::optional<BranchBand> branch_band(const MarketParams& params) {
    if (!params.trade_regime()) return std::nullopt;
    const auto rising = ug_increasing_interval(params);
    if (!rising) return std::nullopt;
    BranchBand band;
    band.lambda_g_low = rising->first;
    band.lambda_g_high = rising->second;
    band.lambda_b_high = bi_curve(band.lambda_g_low, params);
    band.lambda_b_low = bi_curve(band.lambda_g_high, params);
    return band;
}

BranchTriple branch_triple(double lambda_b, const MarketParams& params) {
    const auto band = branch_band(params);
    if (!band) throw OutOfBand("branch_triple: u_G is monotone, the band is empty");
    return branch_triple(lambda_b, params, *band);
}

BranchTriple branch_triple(double lambda_b, const MarketParams& params, const BranchBand& band) {
    constexpr double edge_tol = 1e-12;
    if (lambda_b < band.lambda_b_low * (1.0 - edge_tol) ||
        lambda_b > band.lambda_b_high * (1.0 + edge_tol))
        throw OutOfBand("branch_triple: lambda_b outside [lambda_b_low, lambda_b_high]");
    lambda_b = std::clamp(lambda_b, band.lambda_b_low, band.lambda_b_high);

    const double target = payoff_b(lambda_b, params);
    auto f = [&](double lg) { return payoff_g(lg, params) - target; };
    auto solve_segment = [&](double a, double b) {
        const double fa = f(a);
        const double fb = f(b);
        if (fa == 0.0) return a;
        if (fb == 0.0) return b;
        if ((fa < 0.0) == (fb < 0.0)) return std::abs(fa) <= std::abs(fb) ? a : b;
        return numeric::bisect(f, a, b, fa, fb);
    };

    const double lo = band.lambda_g_low;
    const double hi = band.lambda_g_high;
    if (f(LAMBDA_MAX) > 0.0) throw BracketFailure("branch_triple: h3 above the lambda cap");

    BranchTriple t;
    t.lambda_b = lambda_b;
    // At the band edges the horizontal line is tangent to u_G at a local extremum.
    if (lambda_b == band.lambda_b_high) {
        t.h = {lo, lo, solve_segment(hi, LAMBDA_MAX)};
    } else if (lambda_b == band.lambda_b_low) {
        t.h = {solve_segment(LAMBDA_MIN, lo), hi, hi};
    } else {
        t.h = {solve_segment(LAMBDA_MIN, lo), solve_segment(lo, hi), solve_segment(hi, LAMBDA_MAX)};
    }
    std::sort(t.h.begin(), t.h.end());
    t.multiplicity = 1;
    for (std::size_t i = 1; i < 3; ++i)
        if (!close_rel(t.h[i], t.h[i - 1], 1e-9)) ++t.multiplicity;
    return t;
}

// ---------------------------------------------------------------------------

DiscriminatorySweep::DiscriminatorySweep(const MarketParams& params)
    : params_(params), band_(branch_band(params)) {
    if (!band_) return;
    if (!(band_->lambda_b_low < band_->lambda_b_high)) {
        band_.reset();
        return;
    }
    const auto grid = numeric::lin_grid(band_->lambda_b_low, band_->lambda_b_high, BAND_GRID_POINTS);
    for (auto& s : samples_) s.reserve(grid.size() + 8);
    for (double lb : grid) {
        const BranchTriple t = branch_triple(lb, params_, *band_);
        std::array<double, 3> theta{};
        for (std::size_t m = 0; m < 3; ++m) theta[m] = required_buyer_mass({t.h[m], lb}, params_, 0.5);
        for (std::size_t p = 0; p < BRANCH_PAIRS.size(); ++p) {
            const auto [a, b] = BRANCH_PAIRS[p];
            samples_[p].push_back({lb, theta[a] + theta[b]});
        }
    }

    // Sharpen interior extrema so the interval endpoints, and sign changes near
    // them, are not limited by the grid spacing.
    for (std::size_t p = 0; p < samples_.size(); ++p) {
        auto& seq = samples_[p];
        std::vector<Sample> extra;
        for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
            const double prev = seq[i - 1].total_mass;
            const double cur = seq[i].total_mass;
            const double next = seq[i + 1].total_mass;
            const bool is_max = cur >= prev && cur >= next && (cur > prev || cur > next);
            const bool is_min = cur <= prev && cur <= next && (cur < prev || cur < next);
            if (!is_max && !is_min) continue;
            const double sgn = is_max ? -1.0 : 1.0;
            auto objective = [&](double lb) { return sgn * pair_mass(p, lb); };
            const auto [x, fx] = boost::math::tools::brent_find_minima(
                objective, seq[i - 1].lambda_b, seq[i + 1].lambda_b, 52);
            if (x > seq[i - 1].lambda_b && x < seq[i + 1].lambda_b && x != seq[i].lambda_b)
                extra.push_back({x, sgn * fx});
        }
        seq.insert(seq.end(), extra.begin(), extra.end());
        std::sort(seq.begin(), seq.end(),
                  [](const Sample& a, const Sample& b) { return a.lambda_b < b.lambda_b; });
    }
}

double DiscriminatorySweep::pair_mass(std::size_t pair, double lambda_b) const {
    const BranchTriple t = branch_triple(lambda_b, params_, *band_);
    const auto [a, b] = BRANCH_PAIRS[pair];
    return required_buyer_mass({t.h[a], lambda_b}, params_, 0.5) +
           required_buyer_mass({t.h[b], lambda_b}, params_, 0.5);
}

std::array<std::pair<double, double>, 3> DiscriminatorySweep::pair_ranges() const {
    std::array<std::pair<double, double>, 3> out{};
    for (std::size_t p = 0; p < samples_.size(); ++p) {
        const auto [lo, hi] = std::minmax_element(
            samples_[p].begin(), samples_[p].end(),
            [](const Sample& a, const Sample& b) { return a.total_mass < b.total_mass; });
        if (lo != samples_[p].end()) out[p] = {lo->total_mass, hi->total_mass};
    }
    return out;
}

std::optional<std::pair<double, double>> DiscriminatorySweep::q_interval() const {
    if (empty()) return std::nullopt;
    const auto ranges = pair_ranges();
    double lo = ranges[0].first;
    double hi = ranges[0].second;
    for (const auto& r : ranges) {
        lo = std::min(lo, r.first);
        hi = std::max(hi, r.second);
    }
    if (!(hi > lo)) return std::nullopt;
    return std::make_pair(lo, hi);
}

bool DiscriminatorySweep::union_connected() const {
    if (empty()) return true;
    auto ranges = pair_ranges();
    std::sort(ranges.begin(), ranges.end());
    double reach = ranges[0].second;
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first > reach * (1.0 + 1e-12)) return false;
        reach = std::max(reach, ranges[i].second);
    }
    return true;
}

std::vector<Equilibrium> DiscriminatorySweep::enumerate(double buyer_mass) const {
    std::vector<Equilibrium> out;
    if (empty() || !(buyer_mass > 0.0)) return out;

    for (std::size_t p = 0; p < samples_.size(); ++p) {
        const auto& seq = samples_[p];
        std::vector<double> x(seq.size());
        std::vector<double> fx(seq.size());
        for (std::size_t i = 0; i < seq.size(); ++i) {
            x[i] = seq[i].lambda_b;
            fx[i] = seq[i].total_mass - buyer_mass;
        }
        auto f = [&](double lb) { return pair_mass(p, lb) - buyer_mass; };
        for (double lb : scan_roots(x, fx, f)) {
            const BranchTriple t = branch_triple(lb, params_, *band_);
            const auto [a, b] = BRANCH_PAIRS[p];
            double lg_hi = t.h[b];
            double lg_lo = t.h[a];
            if (lg_hi < lg_lo) std::swap(lg_hi, lg_lo);
            // Coinciding branches are the symmetric outcome, not discrimination.
            if (close_rel(lg_hi, lg_lo, DUPLICATE_TOL)) continue;

            Equilibrium eq;
            eq.kind = EquilibriumKind::Discriminatory;
            eq.queues.group1 = {lg_hi, lb};
            eq.queues.group2 = {lg_lo, lb};
            eq.buyer_payoff = payoff_b(lb, params_);
            eq.buyer_split = {required_buyer_mass(eq.queues.group1, params_, 0.5),
                              required_buyer_mass(eq.queues.group2, params_, 0.5)};
            push_unique(out, eq);
        }
    }
    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        if (a.queues.group1.lambda_b != b.queues.group1.lambda_b)
            return a.queues.group1.lambda_b < b.queues.group1.lambda_b;
        return a.queues.group1.lambda_g < b.queues.group1.lambda_g;
    });
    return out;
}

std::vector<Equilibrium> enumerate_discriminatory(const MarketParams& params) {
    return DiscriminatorySweep(params).enumerate(params.buyer_mass);
}

std::optional<std::pair<double, double>> discriminatory_Q_interval(const MarketParams& params) {
    return DiscriminatorySweep(params).q_interval();
}

double rescale_queue(double lambda, double beta, double k) {
    if (!(beta > 0.0)) throw std::invalid_argument("rescale_queue needs beta > 0");
    return lambda * std::pow(beta, 1.0 / k);
}

MarketParams normalized_params(const MarketParams& params) {
    MarketParams out = params;
    out.delta = 1.0;
    out.alpha = 1.0;
    return out;
}

std::optional<std::pair<double, double>> beta_interval(const MarketParams& params) {
    if (!params.trade_regime() || !(params.buyer_mass > 0.0)) return std::nullopt;
    const auto q = discriminatory_Q_interval(normalized_params(params));
    if (!q) return std::nullopt;
    return std::make_pair(std::pow(q->first / params.buyer_mass, params.k),
                          std::pow(q->second / params.buyer_mass, params.k));
}

std::pair<Beliefs, Beliefs> group_beliefs(const Equilibrium& eq, const MarketParams& params) {
    return {beliefs(eq.queues.group1, params), beliefs(eq.queues.group2, params)};
}

}  // namespace ratings
