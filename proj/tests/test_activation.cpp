#include "doctest.h"

#include <vector>

#include "asyncit/activation.hpp"
#include "asyncit/error.hpp"

using namespace asyncit;

namespace {

std::vector<ActivationMask> draw(ScheduleState state, std::size_t count) {
    std::vector<ActivationMask> masks;
    for (std::size_t k = 0; k < count; ++k) {
        auto [mask, next] = next_activation(state);
        masks.push_back(std::move(mask));
        state = std::move(next);
    }
    return masks;
}

SchedulePolicy policy(ScheduleKind kind, std::size_t n, double p = 1.0, std::size_t T = 1,
                      std::uint64_t seed = 0) {
    SchedulePolicy out;
    out.kind = kind;
    out.n = n;
    if (kind == ScheduleKind::Bernoulli || kind == ScheduleKind::BoundedDelayRepair) {
        out.p_update.assign(n, p);
    }
    out.T = T;
    out.seed = seed;
    return out;
}

}  // namespace

TEST_CASE("next_activation: full sync and round robin") {
    for (const auto& m : draw(make_schedule(policy(ScheduleKind::FullSync, 3)), 5)) {
        CHECK(m == ActivationMask{1, 1, 1});
    }
    const auto rr = draw(make_schedule(policy(ScheduleKind::RoundRobin, 3)), 6);
    CHECK(rr[4] == ActivationMask{0, 1, 0});
    CHECK(rr[0] == ActivationMask{1, 0, 0});
    CHECK(rr[5] == ActivationMask{0, 0, 1});
}

TEST_CASE("next_activation: state bookkeeping") {
    auto state = make_schedule(policy(ScheduleKind::RoundRobin, 3));
    auto [m0, s1] = next_activation(state);
    CHECK(state.iteration == 0);
    CHECK(s1.iteration == 1);
    CHECK(s1.last_update == std::vector<std::int64_t>{0, ScheduleState::kNever,
                                                       ScheduleState::kNever});
    // Pure transition: same input, same output.
    auto [again, s1b] = next_activation(state);
    CHECK(again == m0);
    CHECK(s1b == s1);
}

TEST_CASE("bounded delay repair forces a node after T - 1 idle iterations") {
    // With a tiny update probability the Bernoulli draw essentially never
    // fires, so every activation comes from the repair rule.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto state = make_schedule(policy(ScheduleKind::BoundedDelayRepair, 2, 1e-9, 3, seed));
        const auto masks = draw(state, 30);
        for (std::size_t k = 0; k + 2 < masks.size(); ++k) {
            for (std::size_t i = 0; i < 2; ++i) {
                if (!masks[k][i] && !masks[k + 1][i]) {
                    CHECK(masks[k + 2][i]);
                }
            }
        }
        CHECK(verify_window_coverage(masks, 3).satisfied);
    }
}

TEST_CASE("bounded delay repair output always covers its windows") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SchedulePolicy p = policy(ScheduleKind::BoundedDelayRepair, 8, 0.5, 1 + seed % 9, seed);
        for (std::size_t i = 0; i < 8; ++i) {
            p.p_update[i] = 0.02 + 0.12 * static_cast<double>(i);
        }
        const auto masks = draw(make_schedule(p), 500);
        const auto cov = verify_window_coverage(masks, p.T);
        CHECK(cov.satisfied);
        CHECK(cov.violations.empty());
    }
}

TEST_CASE("bernoulli with p = 1 matches full sync") {
    const auto a = draw(make_schedule(policy(ScheduleKind::Bernoulli, 5, 1.0, 1, 77)), 200);
    const auto b = draw(make_schedule(policy(ScheduleKind::FullSync, 5)), 200);
    CHECK(a == b);
}

TEST_CASE("bernoulli activation frequency") {
    SchedulePolicy p = policy(ScheduleKind::Bernoulli, 4, 0.5, 1, 2024);
    p.p_update = {0.1, 0.35, 0.6, 0.95};
    const std::size_t iters = 100000;
    const auto masks = draw(make_schedule(p), iters);
    for (std::size_t i = 0; i < 4; ++i) {
        std::size_t hits = 0;
        for (const auto& m : masks) {
            hits += m[i] ? 1 : 0;
        }
        CHECK(std::abs(static_cast<double>(hits) / iters - p.p_update[i]) <= 0.01);
    }
}

TEST_CASE("bernoulli permits all-idle iterations") {
    const auto masks = draw(make_schedule(policy(ScheduleKind::Bernoulli, 2, 0.3, 1, 5)), 200);
    bool saw_idle = false;
    for (const auto& m : masks) {
        saw_idle = saw_idle || m.none();
    }
    CHECK(saw_idle);
}

TEST_CASE("round robin covers windows iff T >= n") {
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto masks = draw(make_schedule(policy(ScheduleKind::RoundRobin, n)), 4 * n);
        CHECK(verify_window_coverage(masks, n).satisfied);
        CHECK(verify_window_coverage(masks, n + 1).satisfied);
        if (n > 1) {
            CHECK_FALSE(verify_window_coverage(masks, n - 1).satisfied);
        }
    }
}

TEST_CASE("schedules are deterministic in the seed") {
    const auto p = policy(ScheduleKind::BoundedDelayRepair, 6, 0.3, 4, 31337);
    CHECK(draw(make_schedule(p), 300) == draw(make_schedule(p), 300));
    auto q = p;
    q.seed = 31338;
    CHECK_FALSE(draw(make_schedule(p), 300) == draw(make_schedule(q), 300));
}

TEST_CASE("verify_window_coverage: worked examples") {
    const std::vector<ActivationMask> full{{1, 1}, {1, 1}, {1, 1}};
    CHECK(verify_window_coverage(full, 1).satisfied);

    const std::vector<ActivationMask> alternating{{1, 0}, {0, 1}};
    CHECK(verify_window_coverage(alternating, 2).satisfied);

    const std::vector<ActivationMask> starved{{1, 0}, {1, 0}, {1, 0}};
    const auto cov = verify_window_coverage(starved, 3);
    CHECK_FALSE(cov.satisfied);
    REQUIRE(cov.violations.size() == 1);
    CHECK(cov.violations[0] == WindowViolation{0, 1});
}

TEST_CASE("verify_window_coverage: errors") {
    const std::vector<ActivationMask> mixed{{1, 0}, {1, 0, 1}};
    CHECK_THROWS_AS(verify_window_coverage(mixed, 1), LengthMismatch);
    const std::vector<ActivationMask> short_seq{{1, 0}};
    CHECK_THROWS_AS(verify_window_coverage(short_seq, 2), LengthMismatch);
}

TEST_CASE("policy validation") {
    auto p = policy(ScheduleKind::Bernoulli, 3, 0.5);
    p.p_update[1] = 0.0;
    CHECK_THROWS_AS(make_schedule(p), DomainError);
    p.p_update[1] = 1.5;
    CHECK_THROWS_AS(make_schedule(p), DomainError);
    p.p_update.pop_back();
    CHECK_THROWS_AS(make_schedule(p), DomainError);
    auto bd = policy(ScheduleKind::BoundedDelayRepair, 3, 0.5, 0);
    CHECK_THROWS_AS(make_schedule(bd), DomainError);
    CHECK_THROWS_AS(schedule_kind_from_string("SOMETIMES"), DomainError);
    CHECK(schedule_kind_from_string("ROUND_ROBIN") == ScheduleKind::RoundRobin);
}

TEST_CASE("mask string form") {
    const ActivationMask m{1, 0, 1, 1};
    CHECK(m.to_string() == "1011");
    CHECK(ActivationMask::from_string("1011") == m);
    CHECK(m.count() == 3);
    CHECK_THROWS_AS(ActivationMask::from_string("10x"), DomainError);
}
