#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ratings/cli.hpp"

namespace ratings::cli {

namespace {

constexpr int EXIT_INPUT = 2;
constexpr int EXIT_REGIME = 3;

// Writes to DIR/name when an output directory was given, else to `out`.
void emit(const std::string& dir, const std::string& name, const std::string& body, std::ostream& out) {
    if (dir.empty()) {
        out << body;
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << body;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ratings-guided market solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string grid;
    std::uint64_t seed = 1;
    int figure = 0;

    auto* solve = app.add_subcommand("solve", "List every equilibrium with its stability verdict");
    auto* thresholds = app.add_subcommand("thresholds", "Elasticity, queue, buyer-mass and rating-quality thresholds");
    auto* scan = app.add_subcommand("scan", "CSV sweep over k, Q and/or beta");
    auto* figs = app.add_subcommand("figure-data", "Curve data for figure 1, 2 or 3");
    auto* simulate = app.add_subcommand("simulate", "Flow ODE and population simulation at fixed queues");

    for (auto* sub : {solve, thresholds, scan, simulate}) {
        sub->add_option("--config", config_path, "Parameter file (name = value lines, or .json)")->required();
        sub->add_option("--out", out_dir, "Output directory (default: stdout)");
    }
    scan->add_option("--grid", grid, "name=lo:hi:n[:log][,name=lo:hi:n[:log]]")->required();
    simulate->add_option("--seed", seed, "Random seed");
    figs->add_option("--figure", figure, "Figure id")->required();
    figs->add_option("--out", out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return EXIT_INPUT;
    }

    try {
        if (figs->parsed()) {
            const std::string dir = out_dir.empty() ? "." : out_dir;
            for (const auto& name : write_figure_data(figure, dir)) out << (std::filesystem::path(dir) / name).string() << '\n';
            return 0;
        }

        const RunConfig cfg = load_config(config_path);
        const MarketParams params = validate_params(cfg.params);

        if (solve->parsed()) {
            const auto report = solve_report(params);
            emit(out_dir, "solve.json", report.dump(2) + "\n", out);
            if (report.at("unique_nondiscriminatory_violated").get<bool>()) {
                err << "error: non-discriminatory equilibrium is not unique; stability not assessed\n";
                return EXIT_REGIME;
            }
        } else if (thresholds->parsed()) {
            emit(out_dir, "thresholds.json", thresholds_report(params).dump(2) + "\n", out);
        } else if (scan->parsed()) {
            const auto axes = parse_grid(grid);
            std::ostringstream csv;
            write_scan_csv(csv, params, axes);
            emit(out_dir, "scan.csv", csv.str(), out);
        } else if (simulate->parsed()) {
            std::ostringstream traj;
            const auto report = simulate_report(params, cfg, seed, out_dir.empty() ? nullptr : &traj);
            emit(out_dir, "simulate.json", report.dump(2) + "\n", out);
            if (!out_dir.empty()) emit(out_dir, "trajectory.csv", traj.str(), out);
        }
        return 0;
    } catch (const ViolatedBound& e) {
        err << "error: invalid parameters: " << e.bound() << '\n';
        return EXIT_INPUT;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return EXIT_INPUT;
    } catch (const MultipleEquilibria& e) {
        err << "error: " << e.what() << '\n';
        return EXIT_REGIME;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return EXIT_REGIME;
    }
}

}  // namespace ratings::cli
