#include "asyncit/matrix_gen.hpp"

#include <string>

#include "asyncit/error.hpp"
#include "asyncit/rng.hpp"

namespace asyncit {

namespace {

constexpr int kMaxDraws = 8;
constexpr double kDegenerateRho = 1e-12;

}  // namespace

std::string_view to_string(SignConvention s) {
    return s == SignConvention::Plus ? "PLUS" : "MINUS";
}

SystemSpec generate_system(std::size_t n, double target_rho, bool zero_diagonal,
                           std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("n must be positive");
    }
    if (!(target_rho >= 0.0 && target_rho < 1.0)) {
        throw DomainError("target_rho must be in [0, 1), got " + std::to_string(target_rho));
    }

    Xoshiro256ss rng(seed);
    SystemSpec spec;
    spec.n = n;

    // F is drawn first, then D, so D's stream position depends on how many
    // redraws F needed.
    for (int attempt = 0;; ++attempt) {
        DenseMatrix f(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double g = rng.uniform(-1.0, 1.0);
                f(i, j) = (zero_diagonal && i == j) ? 0.0 : g;
            }
        }
        if (target_rho == 0.0) {
            spec.F = DenseMatrix(n, n);
            break;
        }
        const double rho = spectral_radius(f).rho;
        if (rho >= kDegenerateRho) {
            f *= target_rho / rho;
            spec.F = std::move(f);
            break;
        }
        if (attempt + 1 == kMaxDraws) {
            throw DegenerateDraw("spectral radius of " + std::to_string(kMaxDraws) +
                                 " draws below 1e-12");
        }
    }

    spec.D = DenseVector(n);
    for (std::size_t i = 0; i < n; ++i) {
        spec.D[i] = rng.uniform01();
    }
    return spec;
}

}  // namespace asyncit
