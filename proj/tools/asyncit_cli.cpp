// asyncit: scenario runner and analysis front end.
//
//   asyncit simulate <config.json>
//   asyncit rate --rho R --gamma G --T T --n N [--deterministic]
//   asyncit check-window <matrix.json> <masks.json>
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "asyncit/error.hpp"
#include "asyncit/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw asyncit::IoError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_input_error(const asyncit::Error& e) {
    const auto& k = e.kind();
    return k == "ParseError" || k == "ValidationError" || k == "UnknownKey" ||
           k == "DomainError" || k == "DimensionMismatch" || k == "NotSquare" ||
           k == "NonFiniteEntries" || k == "LengthMismatch";
}

int simulate(const std::string& config_path) {
    const auto config = asyncit::parse_config(read_file(config_path));
    const auto result = asyncit::run_scenario(config);
    const auto& agg = result.aggregate;
    std::cout << "trials: " << result.per_trial.size()
              << "  convergence_fraction: " << agg.convergence_fraction;
    if (agg.mean_empirical_contraction) {
        std::cout << "  mean_empirical_contraction: " << *agg.mean_empirical_contraction;
    }
    std::cout << "\nresults: " << config.output_dir << "/results.json\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synchronous and asynchronous linear iteration simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* sim = app.add_subcommand("simulate", "Run a scenario config, write CSV and JSON output");
    sim->add_option("config", config_path, "Experiment config (JSON)")->required();

    double rho = 0.0;
    double gamma = 1.0;
    std::size_t window = 1;
    std::size_t nodes = 1;
    bool deterministic = false;
    auto* rate = app.add_subcommand("rate", "Print theoretical convergence rates as JSON");
    rate->add_option("--rho", rho, "Spectral radius of F")->required();
    rate->add_option("--gamma", gamma, "Minimum per-node update probability (default 1)");
    rate->add_option("--T", window, "Window length")->required();
    rate->add_option("--n", nodes, "Number of nodes")->required();
    rate->add_flag("--deterministic", deterministic, "Every node updates in every window");

    std::string matrix_path;
    std::string masks_path;
    auto* check = app.add_subcommand("check-window", "Window product spectral report as JSON");
    check->add_option("matrix", matrix_path, "Matrix JSON {\"n\":..,\"entries\":[..]}")->required();
    check->add_option("masks", masks_path, "Masks JSON [[0,1,..],..]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*sim) {
            return simulate(config_path);
        }
        if (*rate) {
            const auto report = asyncit::theoretical_rate(
                rho, gamma, window, nodes,
                deterministic ? asyncit::RateMode::Deterministic : asyncit::RateMode::Probabilistic);
            std::cout << asyncit::to_json(report).dump(2) << '\n';
            return kExitOk;
        }
        if (*check) {
            const auto F = asyncit::parse_matrix_json(read_file(matrix_path));
            const auto masks = asyncit::parse_masks_json(read_file(masks_path));
            const auto report = asyncit::window_product_radius(F, masks);
            std::cout << asyncit::to_json(report).dump(2) << '\n';
            return kExitOk;
        }
    } catch (const asyncit::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return is_input_error(e) ? kExitInvalid : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitInvalid;
}
