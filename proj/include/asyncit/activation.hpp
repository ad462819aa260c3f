#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asyncit/rng.hpp"

namespace asyncit {

/// Diagonal of a binary activation matrix: bit i set iff node i updates.
class ActivationMask {
public:
    ActivationMask() = default;
    explicit ActivationMask(std::size_t n, bool value = false) : bits_(n, value) {}
    ActivationMask(std::initializer_list<int> bits);

    /// Parses a string of '0'/'1' characters, node 0 leftmost.
    static ActivationMask from_string(std::string_view bits);

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, bool value) { bits_[i] = value; }

    bool all() const noexcept;
    bool none() const noexcept;
    std::size_t count() const noexcept;

    /// n-character 0/1 string, node 0 leftmost.
    std::string to_string() const;

    friend bool operator==(const ActivationMask&, const ActivationMask&) = default;

private:
    std::vector<bool> bits_;
};

enum class ScheduleKind { FullSync, Bernoulli, RoundRobin, BoundedDelayRepair };

std::string_view to_string(ScheduleKind k);
/// Throws DomainError on an unknown name.
ScheduleKind schedule_kind_from_string(std::string_view name);

struct SchedulePolicy {
    ScheduleKind kind = ScheduleKind::FullSync;
    std::size_t n = 0;
    /// Per-node update probability, used by Bernoulli and BoundedDelayRepair.
    std::vector<double> p_update;
    /// Window length, used by BoundedDelayRepair.
    std::size_t T = 1;
    std::uint64_t seed = 0;

    friend bool operator==(const SchedulePolicy&, const SchedulePolicy&) = default;
};

/// Throws DomainError if the policy violates its invariants.
void validate(const SchedulePolicy& policy);

/// Value-type schedule state. A node that has never updated has
/// last_update == kNever.
struct ScheduleState {
    static constexpr std::int64_t kNever = -1;

    SchedulePolicy policy;
    std::uint64_t iteration = 0;
    std::vector<std::int64_t> last_update;
    Xoshiro256ss rng;

    friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

/// Validates the policy and returns the state at iteration 0.
ScheduleState make_schedule(SchedulePolicy policy);

/// Mask for the current iteration and the advanced state.
///
/// Bernoulli-based policies draw one uniform per node per iteration in node
/// order (also for nodes the repair rule forces on), so streams stay aligned
/// across policies with the same seed. BoundedDelayRepair forces node i active
/// when iteration - last_update[i] >= T, i.e. after T - 1 idle iterations,
/// so every T consecutive masks cover every node.
std::pair<ActivationMask, ScheduleState> next_activation(const ScheduleState& state);

struct WindowViolation {
    std::size_t window_start = 0;
    std::size_t node = 0;

    friend bool operator==(const WindowViolation&, const WindowViolation&) = default;
};

struct WindowCoverage {
    bool satisfied = true;
    std::vector<WindowViolation> violations;
};

/// Checks every window of T consecutive masks {s, ..., s+T-1}. Throws
/// LengthMismatch if masks disagree on n or the sequence is shorter than T.
WindowCoverage verify_window_coverage(std::span<const ActivationMask> masks, std::size_t T);

}  // namespace asyncit
