#include "asyncit/activation.hpp"

#include <algorithm>
#include <string>

#include "asyncit/error.hpp"

namespace asyncit {

ActivationMask::ActivationMask(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
        bits_.push_back(b != 0);
    }
}

ActivationMask ActivationMask::from_string(std::string_view bits) {
    ActivationMask mask(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw DomainError("mask string must contain only 0 and 1");
        }
        mask.set(i, bits[i] == '1');
    }
    return mask;
}

bool ActivationMask::all() const noexcept {
    return std::all_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

bool ActivationMask::none() const noexcept {
    return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

std::size_t ActivationMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::string ActivationMask::to_string() const {
    std::string out(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) {
            out[i] = '1';
        }
    }
    return out;
}

std::string_view to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::FullSync: return "FULL_SYNC";
        case ScheduleKind::Bernoulli: return "BERNOULLI";
        case ScheduleKind::RoundRobin: return "ROUND_ROBIN";
        case ScheduleKind::BoundedDelayRepair: return "BOUNDED_DELAY_REPAIR";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
    for (auto k : {ScheduleKind::FullSync, ScheduleKind::Bernoulli, ScheduleKind::RoundRobin,
                   ScheduleKind::BoundedDelayRepair}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw DomainError("unknown schedule kind '" + std::string(name) + "'");
}

void validate(const SchedulePolicy& policy) {
    if (policy.n == 0) {
        throw DomainError("schedule needs at least one node");
    }
    const bool probabilistic = policy.kind == ScheduleKind::Bernoulli ||
                               policy.kind == ScheduleKind::BoundedDelayRepair;
    if (probabilistic) {
        if (policy.p_update.size() != policy.n) {
            throw DomainError("p_update has " + std::to_string(policy.p_update.size()) +
                              " entries, expected " + std::to_string(policy.n));
        }
        for (std::size_t i = 0; i < policy.n; ++i) {
            const double p = policy.p_update[i];
            if (!(p > 0.0 && p <= 1.0)) {
                throw DomainError("p_update[" + std::to_string(i) + "] must be in (0,1]");
            }
        }
    }
    if (policy.kind == ScheduleKind::BoundedDelayRepair && policy.T < 1) {
        throw DomainError("T must be at least 1");
    }
}

ScheduleState make_schedule(SchedulePolicy policy) {
    validate(policy);
    ScheduleState state;
    state.last_update.assign(policy.n, ScheduleState::kNever);
    state.rng = Xoshiro256ss(policy.seed);
    state.policy = std::move(policy);
    return state;
}

std::pair<ActivationMask, ScheduleState> next_activation(const ScheduleState& state) {
    ScheduleState next = state;
    const auto& policy = state.policy;
    const std::size_t n = policy.n;
    const auto k = static_cast<std::int64_t>(state.iteration);
    ActivationMask mask(n);

    switch (policy.kind) {
        case ScheduleKind::FullSync:
            mask = ActivationMask(n, true);
            break;
        case ScheduleKind::RoundRobin:
            mask.set(static_cast<std::size_t>(state.iteration % n), true);
            break;
        case ScheduleKind::Bernoulli:
        case ScheduleKind::BoundedDelayRepair: {
            const bool repair = policy.kind == ScheduleKind::BoundedDelayRepair;
            const auto window = static_cast<std::int64_t>(policy.T);
            for (std::size_t i = 0; i < n; ++i) {
                bool active = next.rng.uniform01() < policy.p_update[i];
                if (repair && k - state.last_update[i] >= window) {
                    active = true;
                }
                mask.set(i, active);
            }
            break;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) {
            next.last_update[i] = k;
        }
    }
    ++next.iteration;
    return {std::move(mask), std::move(next)};
}

WindowCoverage verify_window_coverage(std::span<const ActivationMask> masks, std::size_t T) {
    if (T == 0) {
        throw DomainError("window length must be positive");
    }
    if (masks.size() < T) {
        throw LengthMismatch("need at least " + std::to_string(T) + " masks, got " +
                             std::to_string(masks.size()));
    }
    const std::size_t n = masks.front().size();
    for (const auto& m : masks) {
        if (m.size() != n) {
            throw LengthMismatch("masks disagree on node count");
        }
    }

    WindowCoverage out;
    // last_seen[i]: most recent index < end of the current window where node i was active.
    std::vector<std::int64_t> last_seen(n, -1);
    for (std::size_t t = 0; t < masks.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (masks[t][i]) {
                last_seen[i] = static_cast<std::int64_t>(t);
            }
        }
        if (t + 1 < T) {
            continue;
        }
        const std::size_t start = t + 1 - T;
        for (std::size_t i = 0; i < n; ++i) {
            if (last_seen[i] < static_cast<std::int64_t>(start)) {
                out.satisfied = false;
                out.violations.push_back({start, i});
            }
        }
    }
    return out;
}

}  // namespace asyncit
