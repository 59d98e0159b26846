#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ratings::numeric {

/// n points from lo to hi inclusive, equally spaced in log(lambda).
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// n points from lo to hi inclusive, equally spaced.
std::vector<double> lin_grid(double lo, double hi, std::size_t n);

inline int sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

/// Bracketed bisection to full double precision.
///
/// Requires f(lo) and f(hi) of opposite sign (or one of them zero); f_lo and
/// f_hi are those values, passed in so callers that already scanned a grid do
/// not pay for them twice. Positive brackets spanning more than a factor of
/// four are split at the geometric midpoint so that queue ratios spread over
/// many decades converge in a bounded number of steps. Returns whichever final
/// endpoint has the smaller residual.
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo, double f_hi) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    for (int it = 0; it < 2000; ++it) {
        const double mid = (lo > 0.0 && hi > 4.0 * lo) ? std::sqrt(lo) * std::sqrt(hi)
                                                       : lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

template <class F>
double bisect(F&& f, double lo, double hi) {
    return bisect(f, lo, hi, f(lo), f(hi));
}

}  // namespace ratings::numeric
