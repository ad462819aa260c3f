#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace asyncit {

/// Dense real vector. Entries are finite on construction.
class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t n, double fill = 0.0);
    explicit DenseVector(std::vector<double> entries);
    DenseVector(std::initializer_list<double> entries);

    std::size_t size() const noexcept { return data_.size(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<double> entries() noexcept { return data_; }

    friend bool operator==(const DenseVector&, const DenseVector&) = default;

private:
    std::vector<double> data_;
};

/// Dense row-major real matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws DimensionMismatch if the entry count is wrong and
    /// NonFiniteEntries if any entry is NaN or infinite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }
    std::span<double> row(std::size_t i) {
        return std::span<double>(data_).subspan(i * cols_, cols_);
    }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<double> entries() noexcept { return data_; }

    DenseMatrix& operator*=(double s);

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseVector operator*(const DenseMatrix& a, const DenseVector& x);
DenseMatrix operator*(double s, DenseMatrix m);
DenseMatrix operator-(DenseMatrix m);
DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseVector operator-(DenseVector a, const DenseVector& b);

double frobenius_norm(const DenseMatrix& m);
double inf_norm(const DenseVector& v);
double inf_norm_distance(const DenseVector& a, const DenseVector& b);
bool all_finite(std::span<const double> values);

/// Result of a spectral radius estimate. `certificate_exponent` is the power
/// k at which ||Q^k||_F^(1/k) < 1 was first observed (0 if never).
struct SpectralEstimate {
    double rho = 0.0;
    bool certified_below_one = false;
    std::uint64_t certificate_exponent = 0;
};

/// Gaussian elimination with row pivoting. Throws SingularMatrix when a
/// pivot falls below 1e-12 in magnitude.
DenseVector solve_linear(const DenseMatrix& m, const DenseVector& b);

/// Estimate rho(Q) from the Gelfand sequence ||Q^(2^m)||_F^(1/2^m), computed
/// by normalized repeated squaring. The estimate is an upper bound on rho(Q)
/// up to rounding.
SpectralEstimate spectral_radius(const DenseMatrix& q);

/// Sound contraction certificate: true iff ||Q^(2^m)||_F^(1/2^m) < 1 - 1e-12
/// for some m <= max_exponent (max_exponent <= 64).
SpectralEstimate certify_contractive(const DenseMatrix& q, int max_exponent);

/// Certification margin below one.
inline constexpr double kCertifyMargin = 1e-12;
/// Singular pivot threshold for solve_linear.
inline constexpr double kPivotTolerance = 1e-12;

}  // namespace asyncit
