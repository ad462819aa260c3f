#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace asyncit {

enum class RateMode { Probabilistic, Deterministic };

std::string_view to_string(RateMode m);

/// Theoretical rates next to the fitted empirical contraction.
///
/// lambda_lower_bound = (1 - (1 - gamma)^T)^n is the probability bound that
/// a window of T iterations covers all n independent nodes. The
/// probabilistic rate is rho_F * lambda / T and the deterministic one
/// rho_F / T. Both are always filled; `mode` says which one applies.
struct RateReport {
    RateMode mode = RateMode::Probabilistic;
    double gamma = 1.0;
    std::size_t T = 1;
    std::size_t n = 1;
    double rho_F = 0.0;
    double lambda_lower_bound = 1.0;
    double theoretical_rate = 0.0;
    double deterministic_rate = 0.0;

    std::optional<double> empirical_contraction;
    /// empirical_contraction^T, the per-window reading of the same fit.
    std::optional<double> empirical_window_contraction;
    std::optional<double> fit_r_squared;
    /// Smallest realized per-node update frequency of the run.
    std::optional<double> realized_min_frequency;
};

/// (1 - (1 - gamma)^T)^n. Throws DomainError unless 0 < gamma <= 1 and
/// T, n >= 1.
double coverage_probability_bound(double gamma, std::size_t T, std::size_t n);

RateReport theoretical_rate(double rho_F, double gamma, std::size_t T, std::size_t n,
                            RateMode mode);

struct RateFit {
    double contraction = 0.0;
    double r_squared = 0.0;
};

/// Values below this are treated as converged-to-zero and trimmed from the
/// tail of an error sequence before fitting.
inline constexpr double kFitFloor = 1e-14;

/// Least-squares fit of log(error_norms[k]) against k over [burn_in, end)
/// after trimming the trailing run of entries below kFitFloor;
/// contraction = exp(slope). Throws InsufficientData when fewer than 10
/// points remain and NonPositiveError for a nonpositive entry before the tail.
RateFit fit_empirical_rate(std::span<const double> error_norms, std::size_t burn_in);

/// 10% of the sequence length.
std::size_t default_burn_in(std::size_t length);

}  // namespace asyncit
