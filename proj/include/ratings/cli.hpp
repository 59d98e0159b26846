#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ratings/model.hpp"

namespace ratings::cli {

/// Bad input that is not a parameter bound (syntax, unknown key, bad grid).
class InputError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    ParamRecord params;
    // simulate only
    std::optional<double> lambda_g;
    std::optional<double> lambda_b;
    std::size_t sellers = 10000;
    double horizon = 500.0;  // in units of 1/delta
};

/// "name = value" lines with # comments.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config_json(std::string_view text);
/// Dispatches on the .json extension.
RunConfig load_config(const std::filesystem::path& path);

struct Axis {
    std::string name;  // k, Q or beta
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;
    bool log = false;

    std::vector<double> values() const;
};

/// "name=lo:hi:n[:log]" with up to two axes separated by commas.
std::vector<Axis> parse_grid(std::string_view spec);

/// Parameters at one grid point. beta moves delta with alpha held fixed.
MarketParams apply_axis(const MarketParams& base, const std::string& name, double value);

// Reports. Each throws MultipleEquilibria where the stability analysis needs it.
nlohmann::json solve_report(const MarketParams& params);
nlohmann::json thresholds_report(const MarketParams& params);
void write_scan_csv(std::ostream& out, const MarketParams& base, const std::vector<Axis>& axes);
nlohmann::json simulate_report(const MarketParams& params, const RunConfig& config,
                               std::uint64_t seed, std::ostream* trajectory_csv);

/// Writes the CSV and JSON files for one figure; returns the file names.
std::vector<std::string> write_figure_data(int figure, const std::filesystem::path& dir);

/// Log grid on [lo, hi] with n points in which both a and b (lo < a < b < hi)
/// are exact nodes. The spacing is uniform in log between a and b and close
/// to uniform outside.
std::vector<double> anchored_log_grid(double lo, double hi, double a, double b, std::size_t n);

/// printf %.17g
std::string fmt(double v);

/// Entry point shared by the tool and the tests. Returns the exit code:
/// 0 success, 2 input error, 3 model-regime error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ratings::cli
