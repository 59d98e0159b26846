#include "ratings/numeric.hpp"

#include <stdexcept>

namespace ratings::numeric {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("log_grid needs 0 < lo <= hi");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> lin_grid(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

}  // namespace ratings::numeric
