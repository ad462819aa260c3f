#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "asyncit/activation.hpp"
#include "asyncit/dynamics.hpp"
#include "asyncit/linalg.hpp"
#include "asyncit/matrix_gen.hpp"
#include "asyncit/rate.hpp"
#include "asyncit/spectral_analysis.hpp"

namespace asyncit {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
    std::size_t n = 0;
    double target_rho = 0.0;
    bool zero_diagonal = false;
    SignConvention sign = SignConvention::Plus;
    ScheduleKind schedule = ScheduleKind::FullSync;
    /// Length n for Bernoulli-based schedules, empty otherwise.
    std::vector<double> p_update;
    std::size_t T = 1;
    ConvergenceCriterion criterion;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    double perturbation_epsilon = 0.0;
    std::size_t record_stride = 1;
    std::string output_dir;
    /// Initial state; all zeros when absent.
    std::optional<std::vector<double>> initial_state;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict parse of a JSON experiment config. Throws ParseError for malformed
/// JSON, UnknownKey for unrecognized keys and ValidationError ("path: reason")
/// for missing or out-of-range values.
ExperimentConfig parse_config(std::string_view text);

/// Canonical JSON form; parse_config(to_json(c).dump()) == c.
Json to_json(const ExperimentConfig& config);

/// Seed of trial `index`: derive_seed(master_seed, index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index);

struct WindowSummary {
    std::size_t windows_checked = 0;
    std::size_t windows_certified = 0;
    /// Windows in which some node never updated.
    std::size_t violations = 0;
    /// Windows with full coverage whose product could not be certified.
    std::size_t covered_uncertified = 0;
    /// Up to kMaxFindings covered-but-uncertified windows, with products.
    std::vector<WindowProductReport> findings;
};

struct TrialError {
    std::string kind;
    std::string message;
};

struct TrialResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;
    std::optional<std::uint64_t> converged_at;
    std::optional<double> final_error;
    std::optional<double> fixed_point_distance;
    /// ||P*(F + E) - P*(F)||_inf when the system was perturbed.
    std::optional<double> fixed_point_shift;
    std::optional<RateReport> rate;
    std::optional<std::string> rate_fit_error;
    WindowSummary windows;
    std::optional<std::string> csv_file;
    std::optional<TrialError> error;
};

struct ScenarioAggregate {
    double convergence_fraction = 0.0;
    std::optional<double> mean_converged_at;
    std::optional<double> mean_empirical_contraction;
};

struct ScenarioResult {
    ExperimentConfig config;
    std::vector<TrialResult> per_trial;
    ScenarioAggregate aggregate;
};

inline constexpr std::size_t kMaxFindings = 3;
inline constexpr std::string_view kTimestampKey = "generated_at";

/// Runs every trial, writes trial_<i>.csv files and results.json into
/// config.output_dir and returns the results. Domain errors of a single
/// trial are recorded in that trial; IoError aborts.
ScenarioResult run_scenario(const ExperimentConfig& config);

/// Results document without the timestamp key.
Json to_json(const ScenarioResult& result);

Json to_json(const RateReport& report);
Json to_json(const WindowProductReport& report);
Json to_json(const DenseMatrix& m);

/// {"n": int, "entries": [row-major numbers]}
DenseMatrix parse_matrix_json(std::string_view text);
/// [[0,1,...], ...]
std::vector<ActivationMask> parse_masks_json(std::string_view text);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

/// CSV body for one trajectory: header `iter,err_norm,active_mask,p_0,...`
/// and one row per iteration; state columns empty on unrecorded rows.
std::string trajectory_csv(const TrajectoryRecord& record, std::size_t n);

}  // namespace asyncit
