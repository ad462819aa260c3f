#include "asyncit/rate.hpp"

#include <cmath>
#include <string>

#include "asyncit/error.hpp"

namespace asyncit {

std::string_view to_string(RateMode m) {
    return m == RateMode::Probabilistic ? "PROBABILISTIC" : "DETERMINISTIC";
}

double coverage_probability_bound(double gamma, std::size_t T, std::size_t n) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw DomainError("gamma must be in (0, 1]");
    }
    if (T < 1 || n < 1) {
        throw DomainError("T and n must be positive");
    }
    const auto t = static_cast<double>(T);
    // 1 - (1 - gamma)^T; for small gamma go through log1p/expm1 so that
    // 1 - gamma does not round away the information.
    const double covered = gamma < 0.5 ? -std::expm1(t * std::log1p(-gamma))
                                       : 1.0 - std::pow(1.0 - gamma, t);
    return std::pow(covered, static_cast<double>(n));
}

RateReport theoretical_rate(double rho_F, double gamma, std::size_t T, std::size_t n,
                            RateMode mode) {
    if (!(rho_F >= 0.0) || !std::isfinite(rho_F)) {
        throw DomainError("rho_F must be a finite nonnegative number");
    }
    RateReport r;
    r.mode = mode;
    r.gamma = gamma;
    r.T = T;
    r.n = n;
    r.rho_F = rho_F;
    r.lambda_lower_bound = coverage_probability_bound(gamma, T, n);
    r.theoretical_rate = rho_F * r.lambda_lower_bound / static_cast<double>(T);
    r.deterministic_rate = rho_F / static_cast<double>(T);
    return r;
}

RateFit fit_empirical_rate(std::span<const double> error_norms, std::size_t burn_in) {
    std::size_t end = error_norms.size();
    while (end > 0 && error_norms[end - 1] < kFitFloor) {
        --end;
    }
    for (std::size_t k = 0; k < end; ++k) {
        if (!(error_norms[k] > 0.0)) {
            throw NonPositiveError("error norm at index " + std::to_string(k) +
                                   " is not positive");
        }
    }
    if (end < burn_in || end - burn_in < 10) {
        throw InsufficientData("need at least 10 points after burn-in, have " +
                               std::to_string(end > burn_in ? end - burn_in : 0));
    }

    const std::size_t count = end - burn_in;
    const double m = static_cast<double>(count);
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t k = burn_in; k < end; ++k) {
        mean_x += static_cast<double>(k);
        mean_y += std::log(error_norms[k]);
    }
    mean_x /= m;
    mean_y /= m;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = burn_in; k < end; ++k) {
        const double dx = static_cast<double>(k) - mean_x;
        const double dy = std::log(error_norms[k]) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    RateFit fit;
    fit.contraction = std::exp(slope);
    // A flat sequence is fitted perfectly by slope 0.
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

std::size_t default_burn_in(std::size_t length) {
    return length / 10;
}

}  // namespace asyncit
