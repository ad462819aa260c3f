#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "asyncit/activation.hpp"
#include "asyncit/linalg.hpp"
#include "asyncit/matrix_gen.hpp"

namespace asyncit {

enum class ErrorReference { FixedPoint, Successive };

std::string_view to_string(ErrorReference r);

struct ConvergenceCriterion {
    double tolerance = 1e-9;
    std::uint64_t max_iterations = 10000;
    ErrorReference reference = ErrorReference::FixedPoint;

    friend bool operator==(const ConvergenceCriterion&, const ConvergenceCriterion&) = default;
};

/// Per-iteration log of a run. Iteration k (1-based) is the state P(k)
/// produced by the k-th step; masks[k-1] is the activation used for that
/// step and error_norms[k-1] its infinity-norm error.
struct TrajectoryRecord {
    std::uint64_t iterations = 0;
    std::vector<ActivationMask> masks;
    std::vector<double> error_norms;
    /// Iteration indices of `states` (every record_stride-th plus the last).
    std::vector<std::uint64_t> state_iterations;
    std::vector<DenseVector> states;
    std::optional<std::uint64_t> converged_at;
    /// Filled when the criterion compares against the fixed point.
    std::optional<DenseVector> fixed_point;

    const DenseVector& final_state() const { return states.back(); }
};

/// Largest state magnitude tolerated before a run aborts with NonFiniteState.
inline constexpr double kDivergenceBound = 1e100;

/// Solves (I - F) P = D for PLUS or (I + F) P = D for MINUS after
/// certifying rho(F) < 1. Throws NotContractive or SingularMatrix.
DenseVector compute_fixed_point(const SystemSpec& spec);

/// One asynchronous update: active nodes take D_i +/- (F P)_i, idle nodes
/// keep P_i bit for bit.
DenseVector step(const SystemSpec& spec, const DenseVector& p, const ActivationMask& mask);

/// Iterates step() with masks drawn from `schedule` until the error is at
/// most criterion.tolerance or max_iterations steps have run. Error norms and
/// masks are kept for every iteration, states every record_stride-th.
TrajectoryRecord run_trajectory(const SystemSpec& spec, const DenseVector& p0,
                                ScheduleState schedule, const ConvergenceCriterion& criterion,
                                std::size_t record_stride = 1);

/// F + E with E i.i.d. uniform [-epsilon, epsilon], held fixed for the whole
/// run. Entries on a zero diagonal of F stay zero. The result is not
/// certified; compute_fixed_point does that.
SystemSpec perturb_matrix(const SystemSpec& spec, double epsilon, std::uint64_t seed);

}  // namespace asyncit
