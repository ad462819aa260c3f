#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "asyncit/error.hpp"
#include "asyncit/scenario.hpp"

using namespace asyncit;
namespace fs = std::filesystem;

namespace {

std::string minimal_config(const std::string& extra = "") {
    return R"({"n": 4, "target_rho": 0.9, "zero_diagonal": true,
               "schedule": {"kind": "FULL_SYNC"}, "T": 2,
               "criterion": {"tolerance": 1e-9, "max_iterations": 1000, "reference": "FIXED_POINT"},
               "trials": 1, "master_seed": 7, "output_dir": "out")" +
           extra + "}";
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("asyncit_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class E>
std::string error_message(const std::string& text) {
    try {
        parse_config(text);
    } catch (const E& e) {
        return e.what();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("parse_config: minimal config gets defaults") {
    const auto c = parse_config(minimal_config());
    CHECK(c.n == 4);
    CHECK(c.target_rho == 0.9);
    CHECK(c.schedule == ScheduleKind::FullSync);
    CHECK(c.record_stride == 1);
    CHECK(c.perturbation_epsilon == 0.0);
    CHECK(c.sign == SignConvention::Plus);
    CHECK(c.p_update.empty());
    CHECK_FALSE(c.initial_state.has_value());
}

TEST_CASE("parse_config: validation paths") {
    std::string text = minimal_config();
    text.replace(text.find("0.9"), 3, "1.0");
    CHECK(error_message<ValidationError>(text) == "target_rho: must be < 1");

    CHECK(error_message<UnknownKey>(minimal_config(R"(, "rho_target": 0.5)")).find("rho_target") !=
          std::string::npos);

    std::string bern = minimal_config();
    bern.replace(bern.find(R"({"kind": "FULL_SYNC"})"), 21,
                 R"({"kind": "BERNOULLI", "p_update": [0.5, 0.5, 0.0, 0.5]})");
    CHECK(error_message<ValidationError>(bern) == "schedule.p_update[2]: must be in (0,1]");

    CHECK_THROWS_AS(parse_config("{not json"), ParseError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ValidationError);
    CHECK(error_message<ValidationError>(R"({"n": 4})").find(": required") != std::string::npos);
    CHECK(error_message<UnknownKey>(minimal_config().replace(
              minimal_config().find(R"("FULL_SYNC"})"), 12, R"("FULL_SYNC", "extra": 1})")) ==
          "unknown key 'schedule.extra'");
    CHECK(error_message<ValidationError>(minimal_config(R"(, "record_stride": 0)")) ==
          "record_stride: must be a positive integer");
    CHECK(error_message<ValidationError>(minimal_config(R"(, "perturbation_epsilon": -1)")) ==
          "perturbation_epsilon: must be a finite number >= 0");
    CHECK(error_message<ValidationError>(minimal_config(R"(, "sign_convention": "BOTH")")) ==
          "sign_convention: must be PLUS or MINUS");
    CHECK(error_message<ValidationError>(minimal_config(R"(, "initial_state": [1, 2])")) ==
          "initial_state: must be an array of n = 4 numbers");
}

TEST_CASE("parse_config: scalar p_update broadcasts") {
    std::string text = minimal_config();
    text.replace(text.find(R"({"kind": "FULL_SYNC"})"), 21,
                 R"({"kind": "BOUNDED_DELAY_REPAIR", "p_update": 0.3})");
    const auto c = parse_config(text);
    CHECK(c.p_update == std::vector<double>(4, 0.3));
}

TEST_CASE("config round trip") {
    std::string text = minimal_config(
        R"(, "sign_convention": "MINUS", "record_stride": 3, "perturbation_epsilon": 0.001,
           "initial_state": [1.5, -2, 0.1, 3e-7])");
    text.replace(text.find(R"({"kind": "FULL_SYNC"})"), 21,
                 R"({"kind": "BERNOULLI", "p_update": [0.1, 0.2, 0.3, 0.4]})");
    const auto c = parse_config(text);
    CHECK(parse_config(to_json(c).dump()) == c);
    CHECK(parse_config(to_json(parse_config(minimal_config())).dump()) ==
          parse_config(minimal_config()));
}

TEST_CASE("trial seeds do not collide") {
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < 20000; ++i) {
        seeds.insert(trial_seed(42, i));
    }
    CHECK(seeds.size() == 20000);
}

TEST_CASE("run_scenario: synchronous trials converge and write files") {
    const auto dir = scratch_dir("sync");
    auto c = parse_config(minimal_config());
    c.trials = 3;
    c.output_dir = dir.string();
    const auto r = run_scenario(c);
    CHECK(r.per_trial.size() == 3);
    CHECK(r.aggregate.convergence_fraction == 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fs::exists(dir / ("trial_" + std::to_string(i) + ".csv")));
        CHECK_FALSE(r.per_trial[i].error.has_value());
        REQUIRE(r.per_trial[i].rate.has_value());
        CHECK(r.per_trial[i].rate->mode == RateMode::Deterministic);
        CHECK(r.per_trial[i].windows.windows_checked > 0);
        CHECK(r.per_trial[i].windows.violations == 0);
    }
    CHECK(fs::exists(dir / "results.json"));

    const auto doc = Json::parse(slurp(dir / "results.json"));
    CHECK(doc.contains(std::string(kTimestampKey)));
    CHECK(doc["per_trial"].size() == 3);
    CHECK(doc["config"]["rng"]["algorithm"] == "xoshiro256**");
    CHECK(doc["aggregate"]["convergence_fraction"] == 1.0);
}

TEST_CASE("run_scenario: CSV layout and agreement with the JSON") {
    const auto dir = scratch_dir("csv");
    auto c = parse_config(minimal_config());
    c.schedule = ScheduleKind::BoundedDelayRepair;
    c.p_update.assign(4, 0.5);
    c.T = 3;
    c.record_stride = 4;
    c.trials = 2;
    c.output_dir = dir.string();
    const auto r = run_scenario(c);

    for (const auto& t : r.per_trial) {
        REQUIRE(t.converged_at.has_value());
        std::ifstream in(dir / *t.csv_file);
        std::string line;
        std::getline(in, line);
        CHECK(line == "iter,err_norm,active_mask,p_0,p_1,p_2,p_3");
        std::optional<std::uint64_t> first_below;
        std::uint64_t rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                cells.push_back(cell);
            }
            if (line.back() == ',') {
                cells.push_back("");
            }
            REQUIRE(cells.size() == 7);
            const auto iter = std::stoull(cells[0]);
            CHECK(iter == rows);
            CHECK(cells[2].size() == 4);
            const bool recorded = iter % 4 == 0 || iter == t.iterations;
            CHECK(cells[3].empty() == !recorded);
            if (!first_below && std::stod(cells[1]) <= c.criterion.tolerance) {
                first_below = iter;
            }
        }
        CHECK(rows == t.iterations);
        CHECK(first_below == t.converged_at);
    }
}

TEST_CASE("run_scenario: failing trials are isolated") {
    const auto dir = scratch_dir("isolated");
    auto c = parse_config(minimal_config());
    c.target_rho = 0.999;
    c.perturbation_epsilon = 0.5;
    c.trials = 6;
    c.output_dir = dir.string();
    const auto r = run_scenario(c);
    CHECK(r.per_trial.size() == 6);
    std::size_t failed = 0;
    for (const auto& t : r.per_trial) {
        if (t.error) {
            ++failed;
            CHECK(t.error->kind == "NotContractive");
            CHECK_FALSE(t.csv_file.has_value());
        }
    }
    CHECK(failed > 0);
    CHECK(r.aggregate.convergence_fraction <= 1.0 - static_cast<double>(failed) / 6.0);
}

TEST_CASE("run_scenario: Bernoulli windows can violate coverage") {
    const auto dir = scratch_dir("bernoulli");
    auto c = parse_config(minimal_config());
    c.n = 2;
    c.schedule = ScheduleKind::Bernoulli;
    c.p_update = {0.5, 0.5};
    c.T = 2;
    c.criterion.max_iterations = 100000;
    c.criterion.tolerance = 1e-12;
    c.output_dir = dir.string();
    const auto r = run_scenario(c);
    const auto& t = r.per_trial.front();
    REQUIRE(t.converged_at.has_value());
    CHECK(*t.fixed_point_distance <= 1e-12);
    const auto& w = t.windows;
    CHECK(w.violations > 0);
    // Each disjoint window is covered with probability 0.5625.
    const double violation_rate = double(w.violations) / double(w.windows_checked);
    CHECK(w.windows_checked >= 20);
    CHECK(std::abs(violation_rate - 0.4375) < 0.35);
}

TEST_CASE("run_scenario: identical configs give identical bytes") {
    auto c = parse_config(minimal_config());
    c.schedule = ScheduleKind::BoundedDelayRepair;
    c.p_update.assign(4, 0.4);
    c.T = 4;
    c.trials = 2;
    c.perturbation_epsilon = 1e-3;
    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    c.output_dir = a.string();
    run_scenario(c);
    c.output_dir = b.string();
    run_scenario(c);
    for (const auto* f : {"trial_0.csv", "trial_1.csv"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    auto ja = Json::parse(slurp(a / "results.json"));
    auto jb = Json::parse(slurp(b / "results.json"));
    ja.erase(std::string(kTimestampKey));
    jb.erase(std::string(kTimestampKey));
    ja["config"].erase("output_dir");
    jb["config"].erase("output_dir");
    CHECK(ja == jb);
}

TEST_CASE("run_scenario: unwritable output directory") {
    auto c = parse_config(minimal_config());
    c.output_dir = "/proc/asyncit_cannot_create";
    CHECK_THROWS_AS(run_scenario(c), IoError);
}

TEST_CASE("matrix and mask JSON formats") {
    const auto F = parse_matrix_json(R"({"n": 2, "entries": [0, 0.5, 0.25, 0]})");
    CHECK(F == DenseMatrix{{0.0, 0.5}, {0.25, 0.0}});
    const auto masks = parse_masks_json("[[1, 0], [0, 1]]");
    REQUIRE(masks.size() == 2);
    CHECK(masks[0] == ActivationMask{1, 0});

    CHECK_THROWS_AS(parse_matrix_json(R"({"n": 2, "entries": [1, 2, 3]})"), ValidationError);
    CHECK_THROWS_AS(parse_matrix_json(R"({"n": 2, "entries": [1, 2, 3, 4], "x": 1})"), UnknownKey);
    CHECK_THROWS_AS(parse_masks_json("[[1, 2]]"), ValidationError);
    CHECK_THROWS_AS(parse_masks_json("[[1, 0], [1]]"), ValidationError);
    CHECK_THROWS_AS(parse_masks_json("[[1"), ParseError);

    const auto report = window_product_radius(F, masks);
    const auto j = to_json(report);
    CHECK(j["coverage_satisfied"] == true);
    CHECK(j["certified_below_one"] == true);
    CHECK(j["product"]["entries"] == Json::array({0.0, 0.5, 0.0, 0.125}));
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}
