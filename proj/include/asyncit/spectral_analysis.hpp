#pragma once

#include <cstddef>
#include <span>

#include "asyncit/activation.hpp"
#include "asyncit/linalg.hpp"

namespace asyncit {

/// Iteration matrix of a partial update: A F + (I - A). Row i is row i of F
/// for an active node and the i-th basis row for an idle node.
DenseMatrix effective_matrix(const DenseMatrix& F, const ActivationMask& mask);

struct IdleRowReport {
    /// Every idle row is exactly a basis row, so each e_i of an idle node is
    /// a left eigenvector with eigenvalue exactly 1.
    bool has_unit_left_eigenvector = false;
    double rho_estimate = 0.0;
};

/// Structural check on an effective matrix. Throws NoIdleNode when every
/// node is active.
IdleRowReport idle_row_eigen_check(const DenseMatrix& F_k, const ActivationMask& mask);

struct WindowProductReport {
    std::size_t window_start = 0;
    std::size_t window_length = 0;
    /// F(last) * ... * F(first): later iterations multiply on the left.
    DenseMatrix product;
    /// rho from spectral_radius; certificate fields from
    /// certify_contractive(product, 48).
    SpectralEstimate estimate;
    bool coverage_satisfied = false;
};

/// Effective-matrix product over one window of masks, with its spectral
/// radius estimate and contraction certificate.
WindowProductReport window_product_radius(const DenseMatrix& F,
                                          std::span<const ActivationMask> masks,
                                          std::size_t window_start = 0);

}  // namespace asyncit
