#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mfa/common.hpp"

namespace mfa {

/// Dense row-major matrix, just enough for small regression designs.
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(size_t i, size_t j) { return a[i * cols + j]; }
    double at(size_t i, size_t j) const { return a[i * cols + j]; }
};

/// Least squares via Householder QR. Returns beta; optionally the inverse of
/// the triangular factor R (p x p), from which (X'X)^-1 = Rinv * Rinv'.
/// Throws NumericError on rank deficiency.
inline std::vector<double> qr_least_squares(Mat X, std::vector<double> y,
                                            Mat* r_inverse = nullptr) {
    size_t n = X.rows, p = X.cols;
    if (y.size() != n) throw std::invalid_argument("qr_least_squares: size mismatch");
    if (n < p) throw NumericError("least squares: fewer rows than columns");

    for (size_t k = 0; k < p; ++k) {
        double norm = 0;
        for (size_t i = k; i < n; ++i) norm = std::hypot(norm, X.at(i, k));
        if (norm == 0.0) throw NumericError("design matrix is rank deficient");
        if (X.at(k, k) > 0) norm = -norm;
        for (size_t i = k; i < n; ++i) X.at(i, k) /= norm;
        X.at(k, k) -= 1.0;
        // apply reflector to remaining columns and to y
        for (size_t j = k + 1; j < p; ++j) {
            double s = 0;
            for (size_t i = k; i < n; ++i) s += X.at(i, k) * X.at(i, j);
            s /= X.at(k, k);
            for (size_t i = k; i < n; ++i) X.at(i, j) += s * X.at(i, k);
        }
        double s = 0;
        for (size_t i = k; i < n; ++i) s += X.at(i, k) * y[i];
        s /= X.at(k, k);
        for (size_t i = k; i < n; ++i) y[i] += s * X.at(i, k);
        X.at(k, k) = norm; // diagonal of R
    }

    double max_diag = 0;
    for (size_t k = 0; k < p; ++k) max_diag = std::max(max_diag, std::fabs(X.at(k, k)));
    for (size_t k = 0; k < p; ++k)
        if (std::fabs(X.at(k, k)) < 1e-10 * max_diag)
            throw NumericError("design matrix is rank deficient");

    std::vector<double> beta(p);
    for (size_t k = p; k-- > 0;) {
        double s = y[k];
        for (size_t j = k + 1; j < p; ++j) s -= X.at(k, j) * beta[j];
        beta[k] = s / X.at(k, k);
    }

    if (r_inverse) {
        // invert upper triangular R by back substitution, column by column
        Mat& rinv = *r_inverse;
        rinv = Mat(p, p);
        for (size_t c = 0; c < p; ++c) {
            rinv.at(c, c) = 1.0 / X.at(c, c);
            for (size_t k = c; k-- > 0;) {
                double s = 0;
                for (size_t j = k + 1; j <= c; ++j) s += X.at(k, j) * rinv.at(j, c);
                rinv.at(k, c) = -s / X.at(k, k);
            }
        }
    }
    return beta;
}

/// In-place Cholesky of a symmetric positive definite matrix; lower triangle
/// holds L on return. Returns false when the matrix is not positive definite.
inline bool cholesky(Mat& A) {
    size_t n = A.rows;
    if (A.cols != n) throw std::invalid_argument("cholesky: matrix not square");
    for (size_t j = 0; j < n; ++j) {
        double d = A.at(j, j);
        for (size_t k = 0; k < j; ++k) d -= A.at(j, k) * A.at(j, k);
        if (!(d > 0)) return false;
        d = std::sqrt(d);
        A.at(j, j) = d;
        for (size_t i = j + 1; i < n; ++i) {
            double s = A.at(i, j);
            for (size_t k = 0; k < j; ++k) s -= A.at(i, k) * A.at(j, k);
            A.at(i, j) = s / d;
        }
    }
    return true;
}

inline void cholesky_solve(const Mat& L, std::vector<double>& b) {
    size_t n = L.rows;
    for (size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (size_t k = 0; k < i; ++k) s -= L.at(i, k) * b[k];
        b[i] = s / L.at(i, i);
    }
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= L.at(k, i) * b[k];
        b[i] = s / L.at(i, i);
    }
}

inline double cholesky_log_det(const Mat& L) {
    double s = 0;
    for (size_t i = 0; i < L.rows; ++i) s += std::log(L.at(i, i));
    return 2.0 * s; // log det of the original matrix
}

/// Inverse of the SPD matrix whose Cholesky factor is L.
inline Mat cholesky_inverse(const Mat& L) {
    size_t n = L.rows;
    Mat inv(n, n);
    std::vector<double> e(n);
    for (size_t c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), 0.0);
        e[c] = 1.0;
        cholesky_solve(L, e);
        for (size_t r = 0; r < n; ++r) inv.at(r, c) = e[r];
    }
    return inv;
}

} // namespace mfa
