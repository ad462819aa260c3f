#include "asyncit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "asyncit/error.hpp"

namespace asyncit {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    if (!all_finite(values)) {
        throw NonFiniteEntries(std::string(what) + " has NaN or infinite entries");
    }
}

void require_square(const DenseMatrix& q) {
    if (!q.is_square()) {
        throw NotSquare("matrix is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
    }
}

std::uint64_t power_of_two(int m) {
    return m >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << m);
}

// Walks m = 0, 1, ... computing rho_m = ||Q^(2^m)||_F^(1/2^m) from a
// normalized copy S_m = Q^(2^m) / ||Q^(2^m)||_F and the exact log of the
// accumulated scale. With stop_on_convergence the walk ends after two
// consecutive relative steps below 1e-8 and the last two terms are combined
// by one log-domain Richardson step, which removes the leading
// log(C)/2^m bias of the Gelfand sequence.
SpectralEstimate gelfand(const DenseMatrix& q, int max_m, bool stop_on_convergence) {
    require_square(q);
    require_finite(q.entries(), "matrix");

    SpectralEstimate est;
    const double norm = frobenius_norm(q);
    if (norm == 0.0) {
        return {0.0, true, 1};
    }

    const double certify_log = std::log1p(-kCertifyMargin);
    DenseMatrix s = q;
    s *= 1.0 / norm;
    double log_norm = std::log(norm);
    double prev_rho = 0.0;
    int small_steps = 0;

    for (int m = 0;; ++m) {
        const double log_root = std::ldexp(log_norm, -m);
        double rho = std::exp(log_root);
        est.rho = rho;
        if (!est.certified_below_one && log_root < certify_log) {
            est.certified_below_one = true;
            est.certificate_exponent = power_of_two(m);
        }
        if (stop_on_convergence && m > 0) {
            if (std::abs(rho - prev_rho) <= 1e-8 * std::max(prev_rho, 1e-30)) {
                if (++small_steps == 2) {
                    est.rho = std::clamp(rho * rho / prev_rho, 0.0, rho);
                    break;
                }
            } else {
                small_steps = 0;
            }
        }
        if (m >= max_m) {
            break;
        }

        DenseMatrix squared = s * s;
        const double squared_norm = frobenius_norm(squared);
        if (squared_norm == 0.0) {
            // Q^(2^(m+1)) vanished: nilpotent to working precision.
            est.rho = 0.0;
            if (!est.certified_below_one) {
                est.certified_below_one = true;
                est.certificate_exponent = power_of_two(m + 1);
            }
            break;
        }
        prev_rho = rho;
        log_norm = 2.0 * log_norm + std::log(squared_norm);
        squared *= 1.0 / squared_norm;
        s = std::move(squared);
    }
    return est;
}

}  // namespace

DenseVector::DenseVector(std::size_t n, double fill) : data_(n, fill) {}

DenseVector::DenseVector(std::vector<double> entries) : data_(std::move(entries)) {
    require_finite(data_, "vector");
}

DenseVector::DenseVector(std::initializer_list<double> entries) : data_(entries) {
    require_finite(data_, "vector");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) {
        throw DimensionMismatch("expected " + std::to_string(rows * cols) + " entries, got " +
                                std::to_string(data_.size()));
    }
    require_finite(data_, "matrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionMismatch("ragged matrix literal");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& x : data_) {
        x *= s;
    }
    return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matrix product of " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
    }
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out[j] += aik * brow[j];
            }
        }
    }
    return c;
}

DenseVector operator*(const DenseMatrix& a, const DenseVector& x) {
    if (a.cols() != x.size()) {
        throw DimensionMismatch("matrix-vector product dimensions disagree");
    }
    DenseVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            acc += r[j] * x[j];
        }
        y[i] = acc;
    }
    return y;
}

DenseMatrix operator*(double s, DenseMatrix m) {
    m *= s;
    return m;
}

DenseMatrix operator-(DenseMatrix m) {
    m *= -1.0;
    return m;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("matrix sum dimensions disagree");
    }
    auto dst = a.entries();
    const auto src = b.entries();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
    return a;
}

DenseVector operator-(DenseVector a, const DenseVector& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("vector difference dimensions disagree");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] -= b[i];
    }
    return a;
}

double frobenius_norm(const DenseMatrix& m) {
    // Scaled accumulation so that squaring large or tiny entries cannot
    // overflow or flush to zero.
    double scale = 0.0;
    for (double x : m.entries()) {
        scale = std::max(scale, std::abs(x));
    }
    if (scale == 0.0 || !std::isfinite(scale)) {
        return scale;
    }
    double sum = 0.0;
    for (double x : m.entries()) {
        const double r = x / scale;
        sum += r * r;
    }
    return scale * std::sqrt(sum);
}

double inf_norm(const DenseVector& v) {
    double out = 0.0;
    for (double x : v.entries()) {
        out = std::max(out, std::abs(x));
    }
    return out;
}

double inf_norm_distance(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("vector distance dimensions disagree");
    }
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out = std::max(out, std::abs(a[i] - b[i]));
    }
    return out;
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

DenseVector solve_linear(const DenseMatrix& m, const DenseVector& b) {
    require_square(m);
    const std::size_t n = m.rows();
    if (b.size() != n) {
        throw DimensionMismatch("right-hand side has length " + std::to_string(b.size()) +
                                ", expected " + std::to_string(n));
    }
    require_finite(m.entries(), "matrix");
    require_finite(b.entries(), "right-hand side");

    DenseMatrix a = m;
    DenseVector x = b;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) < kPivotTolerance) {
            throw SingularMatrix("pivot " + std::to_string(col) + " below tolerance");
        }
        if (pivot != col) {
            std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(pivot).begin());
            std::swap(x[col], x[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = col; j < n; ++j) {
                a(r, j) -= factor * a(col, j);
            }
            x[r] -= factor * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc -= a(i, j) * x[j];
        }
        x[i] = acc / a(i, i);
    }
    return x;
}

SpectralEstimate spectral_radius(const DenseMatrix& q) {
    return gelfand(q, 48, true);
}

SpectralEstimate certify_contractive(const DenseMatrix& q, int max_exponent) {
    if (max_exponent < 1 || max_exponent > 64) {
        throw DomainError("max_exponent must be in [1, 64]");
    }
    return gelfand(q, max_exponent, false);
}

}  // namespace asyncit
