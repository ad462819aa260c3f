#include "asyncit/scenario.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "asyncit/error.hpp"
#include "asyncit/rng.hpp"

namespace asyncit {

namespace fs = std::filesystem;

namespace {

const std::initializer_list<std::string_view> kTopKeys = {
    "n",        "target_rho",  "zero_diagonal", "sign_convention",      "schedule",
    "T",        "criterion",   "trials",        "master_seed",          "perturbation_epsilon",
    "record_stride", "output_dir", "initial_state"};
const std::initializer_list<std::string_view> kScheduleKeys = {"kind", "p_update"};
const std::initializer_list<std::string_view> kCriterionKeys = {"tolerance", "max_iterations",
                                                               "reference"};

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
    throw ValidationError(path + ": " + reason);
}

std::string join(const std::string& prefix, std::string_view key) {
    return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void reject_unknown(const Json& obj, const std::string& prefix,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) {
            known = known || a == key;
        }
        if (!known) {
            throw UnknownKey("unknown key '" + join(prefix, key) + "'");
        }
    }
}

const Json& require(const Json& obj, const std::string& prefix, std::string_view key) {
    auto it = obj.find(std::string(key));
    if (it == obj.end()) {
        invalid(join(prefix, key), "required");
    }
    return *it;
}

const Json& require_object(const Json& obj, const std::string& prefix, std::string_view key) {
    const Json& v = require(obj, prefix, key);
    if (!v.is_object()) {
        invalid(join(prefix, key), "must be an object");
    }
    return v;
}

double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) {
        invalid(path, "must be a number");
    }
    return v.get<double>();
}

std::uint64_t as_unsigned(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
        invalid(path, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::size_t as_positive(const Json& v, const std::string& path) {
    const auto x = as_unsigned(v, path);
    if (x == 0) {
        invalid(path, "must be a positive integer");
    }
    return static_cast<std::size_t>(x);
}

std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) {
        invalid(path, "must be a string");
    }
    return v.get<std::string>();
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << body;
    out.flush();
    if (!out) {
        throw IoError("write to " + path.string() + " failed");
    }
}

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

// Min over nodes of the fraction of iterations in which the node updated.
double realized_min_frequency(const std::vector<ActivationMask>& masks, std::size_t n) {
    if (masks.empty()) {
        return 0.0;
    }
    std::vector<std::size_t> counts(n, 0);
    for (const auto& m : masks) {
        for (std::size_t i = 0; i < n; ++i) {
            counts[i] += m[i] ? 1 : 0;
        }
    }
    std::size_t lowest = counts.front();
    for (auto c : counts) {
        lowest = std::min(lowest, c);
    }
    return static_cast<double>(lowest) / static_cast<double>(masks.size());
}

RateReport trial_rate(const ExperimentConfig& config, double rho_F) {
    switch (config.schedule) {
        case ScheduleKind::FullSync:
            return theoretical_rate(rho_F, 1.0, config.T, config.n, RateMode::Deterministic);
        case ScheduleKind::RoundRobin:
            return theoretical_rate(rho_F, 1.0 / static_cast<double>(config.n), config.T,
                                    config.n, RateMode::Deterministic);
        case ScheduleKind::Bernoulli:
        case ScheduleKind::BoundedDelayRepair:
            break;
    }
    double gamma = 1.0;
    for (double p : config.p_update) {
        gamma = std::min(gamma, p);
    }
    return theoretical_rate(rho_F, gamma, config.T, config.n, RateMode::Probabilistic);
}

WindowSummary summarize_windows(const DenseMatrix& F, const std::vector<ActivationMask>& masks,
                                std::size_t T) {
    WindowSummary summary;
    const std::span<const ActivationMask> all(masks);
    for (std::size_t start = 0; start + T <= masks.size(); start += T) {
        auto report = window_product_radius(F, all.subspan(start, T), start);
        ++summary.windows_checked;
        if (report.estimate.certified_below_one) {
            ++summary.windows_certified;
        }
        if (!report.coverage_satisfied) {
            ++summary.violations;
        } else if (!report.estimate.certified_below_one) {
            ++summary.covered_uncertified;
            if (summary.findings.size() < kMaxFindings) {
                summary.findings.push_back(std::move(report));
            }
        }
    }
    return summary;
}

TrialResult run_trial(const ExperimentConfig& config, std::size_t index, const fs::path& dir) {
    TrialResult trial;
    trial.index = index;
    trial.seed = trial_seed(config.master_seed, index);

    try {
        SystemSpec spec = generate_system(config.n, config.target_rho, config.zero_diagonal,
                                          derive_seed(trial.seed, 0));
        spec.sign = config.sign;
        if (config.perturbation_epsilon > 0.0) {
            const SystemSpec nominal = spec;
            spec = perturb_matrix(spec, config.perturbation_epsilon, derive_seed(trial.seed, 2));
            trial.fixed_point_shift =
                inf_norm_distance(compute_fixed_point(spec), compute_fixed_point(nominal));
        }
        const DenseVector fixed_point = compute_fixed_point(spec);

        SchedulePolicy policy;
        policy.kind = config.schedule;
        policy.n = config.n;
        policy.p_update = config.p_update;
        policy.T = config.T;
        policy.seed = derive_seed(trial.seed, 1);

        const DenseVector p0 = config.initial_state ? DenseVector(*config.initial_state)
                                                    : DenseVector(config.n);
        const TrajectoryRecord record = run_trajectory(spec, p0, make_schedule(std::move(policy)),
                                                       config.criterion, config.record_stride);

        const std::string csv_name = "trial_" + std::to_string(index) + ".csv";
        write_file(dir / csv_name, trajectory_csv(record, config.n));
        trial.csv_file = csv_name;

        trial.iterations = record.iterations;
        trial.converged_at = record.converged_at;
        trial.final_error = record.error_norms.back();
        trial.fixed_point_distance = inf_norm_distance(record.final_state(), fixed_point);

        RateReport rate = trial_rate(config, spectral_radius(spec.F).rho);
        rate.realized_min_frequency = realized_min_frequency(record.masks, config.n);
        try {
            const auto fit = fit_empirical_rate(record.error_norms,
                                                default_burn_in(record.error_norms.size()));
            rate.empirical_contraction = fit.contraction;
            rate.empirical_window_contraction =
                std::pow(fit.contraction, static_cast<double>(config.T));
            rate.fit_r_squared = fit.r_squared;
        } catch (const Error& e) {
            trial.rate_fit_error = e.kind() + ": " + e.what();
        }
        trial.rate = rate;
        trial.windows = summarize_windows(spec.F, record.masks, config.T);
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        trial.error = TrialError{e.kind(), e.what()};
    }
    return trial;
}

Json to_json(const WindowSummary& s) {
    Json findings = Json::array();
    for (const auto& f : s.findings) {
        findings.push_back(to_json(f));
    }
    return Json{{"windows_checked", s.windows_checked},
                {"windows_certified", s.windows_certified},
                {"violations", s.violations},
                {"covered_uncertified", s.covered_uncertified},
                {"findings", std::move(findings)}};
}

Json to_json(const TrialResult& t) {
    Json j;
    j["index"] = t.index;
    j["seed"] = t.seed;
    j["iterations"] = t.iterations;
    j["converged_at"] = optional_json(t.converged_at);
    j["final_error"] = optional_json(t.final_error);
    j["fixed_point_distance"] = optional_json(t.fixed_point_distance);
    j["fixed_point_shift"] = optional_json(t.fixed_point_shift);
    j["rate"] = t.rate ? to_json(*t.rate) : Json(nullptr);
    j["rate_fit_error"] = optional_json(t.rate_fit_error);
    j["window_reports_summary"] = to_json(t.windows);
    j["csv_file"] = optional_json(t.csv_file);
    j["error"] = t.error ? Json{{"kind", t.error->kind}, {"message", t.error->message}}
                         : Json(nullptr);
    return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!root.is_object()) {
        invalid("(root)", "must be a JSON object");
    }
    reject_unknown(root, "", kTopKeys);

    ExperimentConfig c;
    c.n = as_positive(require(root, "", "n"), "n");

    c.target_rho = as_number(require(root, "", "target_rho"), "target_rho");
    if (!(c.target_rho >= 0.0)) {
        invalid("target_rho", "must be >= 0");
    }
    if (!(c.target_rho < 1.0)) {
        invalid("target_rho", "must be < 1");
    }

    const Json& zd = require(root, "", "zero_diagonal");
    if (!zd.is_boolean()) {
        invalid("zero_diagonal", "must be a boolean");
    }
    c.zero_diagonal = zd.get<bool>();

    if (auto it = root.find("sign_convention"); it != root.end()) {
        const auto s = as_string(*it, "sign_convention");
        if (s == "PLUS") {
            c.sign = SignConvention::Plus;
        } else if (s == "MINUS") {
            c.sign = SignConvention::Minus;
        } else {
            invalid("sign_convention", "must be PLUS or MINUS");
        }
    }

    c.T = as_positive(require(root, "", "T"), "T");

    const Json& sched = require_object(root, "", "schedule");
    reject_unknown(sched, "schedule", kScheduleKeys);
    try {
        c.schedule = schedule_kind_from_string(as_string(require(sched, "schedule", "kind"),
                                                         "schedule.kind"));
    } catch (const DomainError&) {
        invalid("schedule.kind",
                "must be one of FULL_SYNC, BERNOULLI, ROUND_ROBIN, BOUNDED_DELAY_REPAIR");
    }
    const bool needs_p = c.schedule == ScheduleKind::Bernoulli ||
                         c.schedule == ScheduleKind::BoundedDelayRepair;
    auto p_it = sched.find("p_update");
    if (needs_p) {
        if (p_it == sched.end()) {
            invalid("schedule.p_update", "required for " + std::string(to_string(c.schedule)));
        }
        if (p_it->is_number()) {
            c.p_update.assign(c.n, p_it->get<double>());
            if (!(c.p_update.front() > 0.0 && c.p_update.front() <= 1.0)) {
                invalid("schedule.p_update", "must be in (0,1]");
            }
        } else if (p_it->is_array()) {
            if (p_it->size() != c.n) {
                invalid("schedule.p_update", "must have n = " + std::to_string(c.n) + " entries");
            }
            for (std::size_t i = 0; i < c.n; ++i) {
                const std::string path = "schedule.p_update[" + std::to_string(i) + "]";
                const double p = as_number((*p_it)[i], path);
                if (!(p > 0.0 && p <= 1.0)) {
                    invalid(path, "must be in (0,1]");
                }
                c.p_update.push_back(p);
            }
        } else {
            invalid("schedule.p_update", "must be a number or an array of numbers");
        }
    } else if (p_it != sched.end()) {
        invalid("schedule.p_update", "not used by " + std::string(to_string(c.schedule)));
    }

    const Json& crit = require_object(root, "", "criterion");
    reject_unknown(crit, "criterion", kCriterionKeys);
    c.criterion.tolerance =
        as_number(require(crit, "criterion", "tolerance"), "criterion.tolerance");
    if (!(c.criterion.tolerance > 0.0) || !std::isfinite(c.criterion.tolerance)) {
        invalid("criterion.tolerance", "must be a finite number > 0");
    }
    c.criterion.max_iterations = as_positive(require(crit, "criterion", "max_iterations"),
                                             "criterion.max_iterations");
    const auto ref = as_string(require(crit, "criterion", "reference"), "criterion.reference");
    if (ref == "FIXED_POINT") {
        c.criterion.reference = ErrorReference::FixedPoint;
    } else if (ref == "SUCCESSIVE") {
        c.criterion.reference = ErrorReference::Successive;
    } else {
        invalid("criterion.reference", "must be FIXED_POINT or SUCCESSIVE");
    }

    c.trials = as_positive(require(root, "", "trials"), "trials");
    c.master_seed = as_unsigned(require(root, "", "master_seed"), "master_seed");

    if (auto it = root.find("perturbation_epsilon"); it != root.end()) {
        c.perturbation_epsilon = as_number(*it, "perturbation_epsilon");
        if (!(c.perturbation_epsilon >= 0.0) || !std::isfinite(c.perturbation_epsilon)) {
            invalid("perturbation_epsilon", "must be a finite number >= 0");
        }
    }
    if (auto it = root.find("record_stride"); it != root.end()) {
        c.record_stride = as_positive(*it, "record_stride");
    }

    c.output_dir = as_string(require(root, "", "output_dir"), "output_dir");
    if (c.output_dir.empty()) {
        invalid("output_dir", "must not be empty");
    }

    if (auto it = root.find("initial_state"); it != root.end()) {
        if (!it->is_array() || it->size() != c.n) {
            invalid("initial_state", "must be an array of n = " + std::to_string(c.n) + " numbers");
        }
        std::vector<double> p0;
        for (std::size_t i = 0; i < c.n; ++i) {
            const std::string path = "initial_state[" + std::to_string(i) + "]";
            const double x = as_number((*it)[i], path);
            if (!std::isfinite(x)) {
                invalid(path, "must be finite");
            }
            p0.push_back(x);
        }
        c.initial_state = std::move(p0);
    }
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json sched{{"kind", to_string(c.schedule)}};
    if (!c.p_update.empty()) {
        sched["p_update"] = c.p_update;
    }
    Json j;
    j["n"] = c.n;
    j["target_rho"] = c.target_rho;
    j["zero_diagonal"] = c.zero_diagonal;
    j["sign_convention"] = to_string(c.sign);
    j["schedule"] = std::move(sched);
    j["T"] = c.T;
    j["criterion"] = Json{{"tolerance", c.criterion.tolerance},
                          {"max_iterations", c.criterion.max_iterations},
                          {"reference", to_string(c.criterion.reference)}};
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["perturbation_epsilon"] = c.perturbation_epsilon;
    j["record_stride"] = c.record_stride;
    j["output_dir"] = c.output_dir;
    if (c.initial_state) {
        j["initial_state"] = *c.initial_state;
    }
    return j;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index) {
    return derive_seed(master_seed, index);
}

ScenarioResult run_scenario(const ExperimentConfig& config) {
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }

    ScenarioResult result;
    result.config = config;
    result.per_trial.reserve(config.trials);
    for (std::size_t i = 0; i < config.trials; ++i) {
        result.per_trial.push_back(run_trial(config, i, dir));
    }

    std::size_t converged = 0;
    double converged_sum = 0.0;
    std::size_t fitted = 0;
    double contraction_sum = 0.0;
    for (const auto& t : result.per_trial) {
        if (t.converged_at) {
            ++converged;
            converged_sum += static_cast<double>(*t.converged_at);
        }
        if (t.rate && t.rate->empirical_contraction) {
            ++fitted;
            contraction_sum += *t.rate->empirical_contraction;
        }
    }
    auto& agg = result.aggregate;
    agg.convergence_fraction = static_cast<double>(converged) / static_cast<double>(config.trials);
    if (converged > 0) {
        agg.mean_converged_at = converged_sum / static_cast<double>(converged);
    }
    if (fitted > 0) {
        agg.mean_empirical_contraction = contraction_sum / static_cast<double>(fitted);
    }

    Json doc;
    doc[std::string(kTimestampKey)] = timestamp_utc();
    const Json body = to_json(result);
    for (const auto& [key, value] : body.items()) {
        doc[key] = value;
    }
    write_file(dir / "results.json", doc.dump(2) + "\n");
    return result;
}

Json to_json(const ScenarioResult& result) {
    Json config = to_json(result.config);
    config["rng"] = Json{{"algorithm", Xoshiro256ss::kAlgorithm},
                         {"version", Xoshiro256ss::kVersion},
                         {"seeding", Xoshiro256ss::kSeeding},
                         {"seed_split", "trial_seed = splitmix64_mix(master_seed + "
                                        "(trial_index + 1) * 0x9E3779B97F4A7C15); "
                                        "system/schedule/perturbation seeds use the same rule "
                                        "on trial_seed with index 0/1/2"}};
    Json trials = Json::array();
    for (const auto& t : result.per_trial) {
        trials.push_back(to_json(t));
    }
    const auto& agg = result.aggregate;
    Json j;
    j["config"] = std::move(config);
    j["per_trial"] = std::move(trials);
    j["aggregate"] = Json{{"convergence_fraction", agg.convergence_fraction},
                          {"mean_converged_at", optional_json(agg.mean_converged_at)},
                          {"mean_empirical_contraction",
                           optional_json(agg.mean_empirical_contraction)}};
    return j;
}

Json to_json(const RateReport& r) {
    return Json{{"mode", to_string(r.mode)},
                {"gamma", r.gamma},
                {"T", r.T},
                {"n", r.n},
                {"rho_F", r.rho_F},
                {"lambda_lower_bound", r.lambda_lower_bound},
                {"theoretical_rate", r.theoretical_rate},
                {"deterministic_rate", r.deterministic_rate},
                {"empirical_contraction", optional_json(r.empirical_contraction)},
                {"empirical_window_contraction", optional_json(r.empirical_window_contraction)},
                {"fit_r_squared", optional_json(r.fit_r_squared)},
                {"realized_min_frequency", optional_json(r.realized_min_frequency)}};
}

Json to_json(const DenseMatrix& m) {
    return Json{{"n", m.rows()},
                {"entries", std::vector<double>(m.entries().begin(), m.entries().end())}};
}

Json to_json(const WindowProductReport& r) {
    return Json{{"window_start", r.window_start},
                {"window_length", r.window_length},
                {"product", to_json(r.product)},
                {"rho", r.estimate.rho},
                {"certified_below_one", r.estimate.certified_below_one},
                {"certificate_exponent", r.estimate.certificate_exponent},
                {"coverage_satisfied", r.coverage_satisfied}};
}

DenseMatrix parse_matrix_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) {
        invalid("(root)", "must be a JSON object");
    }
    reject_unknown(j, "", {"n", "entries"});
    const std::size_t n = as_positive(require(j, "", "n"), "n");
    const Json& entries = require(j, "", "entries");
    if (!entries.is_array() || entries.size() != n * n) {
        invalid("entries", "must be an array of n*n = " + std::to_string(n * n) + " numbers");
    }
    std::vector<double> values;
    values.reserve(n * n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = "entries[" + std::to_string(i) + "]";
        const double x = as_number(entries[i], path);
        if (!std::isfinite(x)) {
            invalid(path, "must be finite");
        }
        values.push_back(x);
    }
    return DenseMatrix(n, n, std::move(values));
}

std::vector<ActivationMask> parse_masks_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_array() || j.empty()) {
        invalid("(root)", "must be a non-empty array of 0/1 arrays");
    }
    std::vector<ActivationMask> masks;
    for (std::size_t t = 0; t < j.size(); ++t) {
        const std::string path = "[" + std::to_string(t) + "]";
        if (!j[t].is_array() || j[t].empty()) {
            invalid(path, "must be a non-empty array of 0/1");
        }
        if (t > 0 && j[t].size() != masks.front().size()) {
            invalid(path, "length differs from the first mask");
        }
        ActivationMask m(j[t].size());
        for (std::size_t i = 0; i < j[t].size(); ++i) {
            const Json& b = j[t][i];
            if (!b.is_number_integer() || (b.get<std::int64_t>() != 0 && b.get<std::int64_t>() != 1)) {
                invalid(path + "[" + std::to_string(i) + "]", "must be 0 or 1");
            }
            m.set(i, b.get<std::int64_t>() == 1);
        }
        masks.push_back(std::move(m));
    }
    return masks;
}

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string trajectory_csv(const TrajectoryRecord& record, std::size_t n) {
    std::string out = "iter,err_norm,active_mask";
    for (std::size_t i = 0; i < n; ++i) {
        out += ",p_" + std::to_string(i);
    }
    out += '\n';

    std::size_t next_state = 0;
    for (std::uint64_t k = 1; k <= record.iterations; ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(record.error_norms[k - 1]);
        out += ',';
        out += record.masks[k - 1].to_string();
        const bool has_state = next_state < record.state_iterations.size() &&
                               record.state_iterations[next_state] == k;
        for (std::size_t i = 0; i < n; ++i) {
            out += ',';
            if (has_state) {
                out += format_double(record.states[next_state][i]);
            }
        }
        if (has_state) {
            ++next_state;
        }
        out += '\n';
    }
    return out;
}

}  // namespace asyncit
