#include "asyncit/spectral_analysis.hpp"

#include <algorithm>
#include <string>

#include "asyncit/error.hpp"

namespace asyncit {

DenseMatrix effective_matrix(const DenseMatrix& F, const ActivationMask& mask) {
    if (!F.is_square() || F.rows() != mask.size()) {
        throw DimensionMismatch("mask length " + std::to_string(mask.size()) +
                                " does not match matrix of order " + std::to_string(F.rows()));
    }
    DenseMatrix out = F;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            continue;
        }
        auto row = out.row(i);
        std::fill(row.begin(), row.end(), 0.0);
        row[i] = 1.0;
    }
    return out;
}

IdleRowReport idle_row_eigen_check(const DenseMatrix& F_k, const ActivationMask& mask) {
    if (!F_k.is_square() || F_k.rows() != mask.size()) {
        throw DimensionMismatch("mask does not match matrix order");
    }
    if (mask.all()) {
        throw NoIdleNode("every node is active");
    }
    IdleRowReport report;
    report.has_unit_left_eigenvector = true;
    for (std::size_t i = 0; i < mask.size() && report.has_unit_left_eigenvector; ++i) {
        if (mask[i]) {
            continue;
        }
        const auto row = F_k.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != (i == j ? 1.0 : 0.0)) {
                report.has_unit_left_eigenvector = false;
                break;
            }
        }
    }
    report.rho_estimate = spectral_radius(F_k).rho;
    return report;
}

WindowProductReport window_product_radius(const DenseMatrix& F,
                                          std::span<const ActivationMask> masks,
                                          std::size_t window_start) {
    if (masks.empty()) {
        throw DomainError("window needs at least one mask");
    }
    for (const auto& m : masks) {
        if (m.size() != F.rows()) {
            throw DimensionMismatch("mask length does not match matrix order");
        }
    }

    WindowProductReport report;
    report.window_start = window_start;
    report.window_length = masks.size();
    report.product = DenseMatrix::identity(F.rows());
    for (const auto& m : masks) {
        report.product = effective_matrix(F, m) * report.product;
    }
    report.estimate = certify_contractive(report.product, 48);
    report.estimate.rho = spectral_radius(report.product).rho;
    report.coverage_satisfied = verify_window_coverage(masks, masks.size()).satisfied;
    return report;
}

}  // namespace asyncit
