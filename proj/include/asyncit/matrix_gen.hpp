#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "asyncit/linalg.hpp"

namespace asyncit {

/// Whether active nodes update with D + F*P (PLUS) or D - F*P (MINUS).
enum class SignConvention { Plus, Minus };

std::string_view to_string(SignConvention s);

/// One iterative system: n nodes, interaction matrix F and offsets D.
struct SystemSpec {
    std::size_t n = 0;
    DenseMatrix F;
    DenseVector D;
    SignConvention sign = SignConvention::Plus;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Draws F with i.i.d. uniform [-1, 1] entries (diagonal optionally zeroed)
/// and rescales it so that spectral_radius(F) == target_rho; D is i.i.d.
/// uniform [0, 1]. Deterministic given seed. Throws DegenerateDraw when
/// eight consecutive draws have (numerically) zero spectral radius.
SystemSpec generate_system(std::size_t n, double target_rho, bool zero_diagonal,
                           std::uint64_t seed);

}  // namespace asyncit
