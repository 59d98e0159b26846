#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ratings/cli.hpp"
#include "ratings/equilibrium.hpp"
#include "ratings/mechanics.hpp"
#include "ratings/numeric.hpp"

namespace ratings::cli {

using nlohmann::json;

namespace {

constexpr std::size_t SAMPLES = 512;
constexpr double GRID_LO = 1e-3;
constexpr double GRID_HI = 1e2;
constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

MarketParams fig1_params(double k) { return validate_params({0.1, 0.1, 2.0, 1.0, 1.0, k, 1.0}); }
MarketParams fig2_params(double k, double q) { return validate_params({1.0, 0.1, 2.0, 1.0, 1.0, k, q}); }
MarketParams fig3_params() { return validate_params({0.2, 0.5, 3.0, 1.0, 1.5, 0.8204, 0.08}); }

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name,
                       std::vector<std::string>& written) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    written.push_back(name);
    return out;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const json& doc,
                std::vector<std::string>& written) {
    auto out = open_out(dir, name, written);
    out << doc.dump(2) << '\n';
}

// Sample indices i where the sign of the forward difference changes between
// (i-1, i) and (i, i+1).
std::vector<std::size_t> slope_sign_changes(const std::vector<double>& y) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        const int before = numeric::sign(y[i] - y[i - 1]);
        const int after = numeric::sign(y[i + 1] - y[i]);
        if (before != 0 && after != 0 && before != after) idx.push_back(i);
    }
    return idx;
}

json params_json(const MarketParams& p) {
    return {{"delta", p.delta}, {"alpha", p.alpha}, {"u_high", p.u_high}, {"u_low", p.u_low},
            {"price", p.price}, {"k", p.k},         {"buyer_mass", p.buyer_mass}};
}

double bi_or_nan(double lg, const MarketParams& p) {
    const CurvePoint pt = invert_payoff_b(payoff_g(lg, p), p, lg);
    return pt.position == CurvePosition::Inside ? pt.lambda_b : NaN;
}

std::vector<std::string> figure1(const std::filesystem::path& dir) {
    std::vector<std::string> written;
    json meta{{"figure", 1}, {"samples", SAMPLES}};
    const std::pair<const char*, double> panels[] = {{"left", 0.7682}, {"right", 0.8828}};
    for (const auto& [panel, k] : panels) {
        const MarketParams p = fig1_params(k);
        const auto iv = ug_increasing_interval(p);
        const std::vector<double> grid = iv ? anchored_log_grid(GRID_LO, GRID_HI, iv->first, iv->second, SAMPLES)
                                            : numeric::log_grid(GRID_LO, GRID_HI, SAMPLES);
        std::vector<double> ug(grid.size());
        auto out = open_out(dir, std::string("fig1_") + panel + ".csv", written);
        out << "lambda_g,u_g\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ug[i] = payoff_g(grid[i], p);
            out << fmt(grid[i]) << ',' << fmt(ug[i]) << '\n';
        }
        json pm{{"params", params_json(p)}, {"k_threshold", k_threshold(p)}};
        json extrema = json::array();
        for (std::size_t i : slope_sign_changes(ug)) extrema.push_back({{"index", i}, {"lambda_g", grid[i]}});
        pm["extrema"] = extrema;
        if (iv) pm["increasing_interval"] = {iv->first, iv->second};
        else pm["increasing_interval"] = nullptr;
        meta[panel] = pm;
    }
    write_json(dir, "fig1.json", meta, written);
    return written;
}

std::vector<std::string> figure2(const std::filesystem::path& dir) {
    std::vector<std::string> written;
    json meta{{"figure", 2}, {"samples", SAMPLES}};
    // Buyer mass 1 gives one crossing in the left panel and three in the right one.
    const std::pair<const char*, double> panels[] = {{"left", 0.8682}, {"right", 0.9121}};
    for (const auto& [panel, k] : panels) {
        const MarketParams p = fig2_params(k, 1.0);
        const auto grid = numeric::log_grid(GRID_LO, GRID_HI, SAMPLES);
        auto out = open_out(dir, std::string("fig2_") + panel + ".csv", written);
        out << "lambda_g,lambda_b_bi,lambda_b_mc\n";
        std::vector<double> gap;
        int crossings = 0;
        double prev = NaN;
        for (double lg : grid) {
            const double bi = bi_or_nan(lg, p);
            double mc = NaN;
            try {
                mc = mc_curve(lg, p.buyer_mass, p);
            } catch (const BracketFailure&) {
            }
            out << fmt(lg) << ',' << fmt(bi) << ',' << fmt(mc) << '\n';
            const double d = bi - mc;
            if (std::isfinite(d) && std::isfinite(prev) && numeric::sign(d) != numeric::sign(prev) &&
                numeric::sign(d) != 0)
                ++crossings;
            if (std::isfinite(d) && d != 0.0) prev = d;
        }
        json eqs = json::array();
        for (const auto& e : solve_nondiscriminatory(p))
            eqs.push_back({{"lambda_g", e.queues.group1.lambda_g}, {"lambda_b", e.queues.group1.lambda_b}});
        meta[panel] = {{"params", params_json(p)}, {"grid_crossings", crossings}, {"equilibria", eqs}};
    }
    write_json(dir, "fig2.json", meta, written);
    return written;
}

std::vector<std::string> figure3(const std::filesystem::path& dir) {
    std::vector<std::string> written;
    const MarketParams p = fig3_params();
    const BranchBand band = *branch_band(p);
    const auto grid = anchored_log_grid(GRID_LO, GRID_HI, band.lambda_g_low, band.lambda_g_high, SAMPLES);
    auto out = open_out(dir, "fig3.csv", written);
    out << "lambda_g,lambda_b_bi,u_g,branch,lambda_b_low,lambda_b_high\n";
    for (double lg : grid) {
        const int branch = lg <= band.lambda_g_low ? 1 : (lg < band.lambda_g_high ? 2 : 3);
        out << fmt(lg) << ',' << fmt(bi_or_nan(lg, p)) << ',' << fmt(payoff_g(lg, p)) << ',' << branch << ','
            << fmt(band.lambda_b_low) << ',' << fmt(band.lambda_b_high) << '\n';
    }
    json meta{{"figure", 3},
              {"samples", SAMPLES},
              {"params", params_json(p)},
              {"k_threshold", k_threshold(p)},
              {"band",
               {{"lambda_g_low", band.lambda_g_low},
                {"lambda_g_high", band.lambda_g_high},
                {"lambda_b_low", band.lambda_b_low},
                {"lambda_b_high", band.lambda_b_high}}},
              {"endpoint_residuals",
               {payoff_b(band.lambda_b_high, p) - payoff_g(band.lambda_g_low, p),
                payoff_b(band.lambda_b_low, p) - payoff_g(band.lambda_g_high, p)}}};
    if (const auto q = discriminatory_Q_interval(p)) meta["q_interval"] = {q->first, q->second};
    else meta["q_interval"] = nullptr;
    write_json(dir, "fig3.json", meta, written);
    return written;
}

}  // namespace

std::vector<double> anchored_log_grid(double lo, double hi, double a, double b, std::size_t n) {
    if (!(lo > 0.0 && lo < a && a < b && b < hi) || n < 4)
        throw std::invalid_argument("anchored_log_grid needs 0 < lo < a < b < hi and n >= 4");
    const double span = std::log(hi / lo);
    const auto m = static_cast<std::size_t>(
        std::clamp(std::round(static_cast<double>(n - 1) * std::log(b / a) / span), 1.0,
                   static_cast<double>(n - 3)));
    const double step = std::log(b / a) / static_cast<double>(m);
    // Nodes below a: as many as fit the target range, leaving room above b.
    auto below = static_cast<std::size_t>(std::max(1.0, std::round(std::log(a / lo) / step)));
    below = std::min(below, n - 1 - m - 1);
    const std::size_t above = n - 1 - m - below;

    std::vector<double> g(n);
    const double step_lo = std::log(a / lo) / static_cast<double>(below);
    const double step_hi = std::log(hi / b) / static_cast<double>(above);
    for (std::size_t i = 0; i < below; ++i) g[i] = a * std::exp(-step_lo * static_cast<double>(below - i));
    for (std::size_t i = 0; i < m; ++i) g[below + i] = a * std::exp(step * static_cast<double>(i));
    for (std::size_t i = 0; i < above; ++i) g[below + m + i] = b * std::exp(step_hi * static_cast<double>(i));
    g[0] = lo;
    g[below] = a;
    g[below + m] = b;
    g[n - 1] = hi;
    return g;
}

std::vector<std::string> write_figure_data(int figure, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    switch (figure) {
        case 1: return figure1(dir);
        case 2: return figure2(dir);
        case 3: return figure3(dir);
        default: throw InputError("figure must be 1, 2 or 3, got " + std::to_string(figure));
    }
}

}  // namespace ratings::cli
