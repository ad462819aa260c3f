#include "asyncit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asyncit/error.hpp"
#include "asyncit/rng.hpp"

namespace asyncit {

namespace {

void check_dimensions(const SystemSpec& spec, std::size_t state_size, std::size_t mask_size) {
    if (spec.F.rows() != spec.n || spec.F.cols() != spec.n || spec.D.size() != spec.n) {
        throw DimensionMismatch("system matrices do not match n = " + std::to_string(spec.n));
    }
    if (state_size != spec.n || mask_size != spec.n) {
        throw DimensionMismatch("state or mask length differs from n = " + std::to_string(spec.n));
    }
}

}  // namespace

std::string_view to_string(ErrorReference r) {
    return r == ErrorReference::FixedPoint ? "FIXED_POINT" : "SUCCESSIVE";
}

DenseVector compute_fixed_point(const SystemSpec& spec) {
    const auto cert = certify_contractive(spec.F, 48);
    if (!cert.certified_below_one) {
        throw NotContractive("rho(F) < 1 could not be certified (estimate " +
                             std::to_string(cert.rho) + ")");
    }
    DenseMatrix lhs = spec.F;
    lhs *= spec.sign == SignConvention::Plus ? -1.0 : 1.0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        lhs(i, i) += 1.0;
    }
    return solve_linear(lhs, spec.D);
}

DenseVector step(const SystemSpec& spec, const DenseVector& p, const ActivationMask& mask) {
    check_dimensions(spec, p.size(), mask.size());
    const double sign = spec.sign == SignConvention::Plus ? 1.0 : -1.0;
    DenseVector next = p;
    for (std::size_t i = 0; i < spec.n; ++i) {
        if (!mask[i]) {
            continue;
        }
        const auto row = spec.F.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < spec.n; ++j) {
            acc += row[j] * p[j];
        }
        next[i] = spec.D[i] + sign * acc;
    }
    return next;
}

TrajectoryRecord run_trajectory(const SystemSpec& spec, const DenseVector& p0,
                                ScheduleState schedule, const ConvergenceCriterion& criterion,
                                std::size_t record_stride) {
    check_dimensions(spec, p0.size(), schedule.policy.n);
    if (!(criterion.tolerance > 0.0) || criterion.max_iterations < 1) {
        throw DomainError("criterion needs tolerance > 0 and max_iterations >= 1");
    }
    if (record_stride < 1) {
        throw DomainError("record_stride must be positive");
    }

    TrajectoryRecord rec;
    if (criterion.reference == ErrorReference::FixedPoint) {
        rec.fixed_point = compute_fixed_point(spec);
    }
    rec.masks.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(criterion.max_iterations, 1u << 20)));
    rec.error_norms.reserve(rec.masks.capacity());

    DenseVector p = p0;
    for (std::uint64_t k = 1; k <= criterion.max_iterations; ++k) {
        auto [mask, next_state] = next_activation(schedule);
        schedule = std::move(next_state);
        DenseVector next = step(spec, p, mask);

        for (double x : next.entries()) {
            if (!(std::abs(x) <= kDivergenceBound)) {
                throw NonFiniteState("state entry exceeded 1e100 at iteration " +
                                     std::to_string(k));
            }
        }

        const double err = rec.fixed_point ? inf_norm_distance(next, *rec.fixed_point)
                                           : inf_norm_distance(next, p);
        rec.masks.push_back(std::move(mask));
        rec.error_norms.push_back(err);
        rec.iterations = k;
        p = std::move(next);

        const bool done = err <= criterion.tolerance;
        if (done) {
            rec.converged_at = k;
        }
        if (k % record_stride == 0 || done || k == criterion.max_iterations) {
            rec.state_iterations.push_back(k);
            rec.states.push_back(p);
        }
        if (done) {
            break;
        }
    }
    return rec;
}

SystemSpec perturb_matrix(const SystemSpec& spec, double epsilon, std::uint64_t seed) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw DomainError("epsilon must be a finite nonnegative number");
    }
    SystemSpec out = spec;
    if (epsilon == 0.0) {
        return out;
    }
    Xoshiro256ss rng(seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = 0; j < spec.n; ++j) {
            const double e = rng.uniform(-epsilon, epsilon);
            if (i == j && spec.F(i, i) == 0.0) {
                continue;
            }
            out.F(i, j) += e;
        }
    }
    return out;
}

}  // namespace asyncit
