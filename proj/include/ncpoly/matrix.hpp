#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "ncpoly/errors.hpp"

namespace ncpoly {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Shared numeric policy, threaded through every module.
struct Tolerance {
    double abs = 1e-9;
    double rel = 1e-9;
    double pinv_cutoff_ratio = 1e-10;
};

// Entry-wise max modulus; zero for empty matrices.
inline double max_abs(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline void require_square(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(who) + ": expected square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

// (M + M*)/2; all eigendecompositions go through this so float drift in the
// anti-Hermitian part cannot flip a verdict.
inline ComplexMatrix hermitize(const ComplexMatrix& m) {
    require_square(m, "hermitize");
    return 0.5 * (m + m.adjoint());
}

inline double hermitian_residual(const ComplexMatrix& m) {
    require_square(m, "hermitian_residual");
    return max_abs(m - ComplexMatrix(m.adjoint()));
}

inline bool is_hermitian(const ComplexMatrix& m, const Tolerance& tol = {}) {
    require_square(m, "is_hermitian");
    return hermitian_residual(m) <= tol.abs * std::max(1.0, max_abs(m));
}

// Eigenvalues of the Hermitized matrix, ascending.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& m) {
    if (m.rows() == 0) return 0.0;
    return hermitian_eigenvalues(m)(0);
}

inline bool is_psd(const ComplexMatrix& m, const Tolerance& tol = {}) {
    require_square(m, "is_psd");
    if (m.rows() == 0) return true;
    if (!is_hermitian(m, tol)) return false;
    RealVector ev = hermitian_eigenvalues(m);
    double lambda_max = ev(ev.size() - 1);
    return ev(0) >= -tol.abs * std::max(1.0, lambda_max);
}

// W*W = G factorization data. W has full row rank, so w_pinv = W*(WW*)^{-1};
// both come straight from the eigendecomposition (W = L^{1/2}U*, W+ = U L^{-1/2}).
struct PsdFactorization {
    ComplexMatrix w;       // r x n
    ComplexMatrix w_pinv;  // n x r, exact Moore-Penrose inverse of w
};

// Factor a PSD matrix G as W*W with W of full row rank r, where r counts the
// eigenvalues above tol.abs * lambda_max. Rows of W are sqrt(lambda_i) * u_i*.
inline PsdFactorization psd_factor_full(const ComplexMatrix& g, const Tolerance& tol = {}) {
    require_square(g, "psd_factor");
    if (g.rows() == 0) return {ComplexMatrix(0, 0), ComplexMatrix(0, 0)};
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(g));
    const RealVector& ev = es.eigenvalues();
    double lambda_max = ev(ev.size() - 1);
    if (ev(0) < -tol.abs * std::max(1.0, lambda_max)) {
        throw NotPsdError("psd_factor: input is not PSD within tolerance (min eigenvalue " +
                              std::to_string(ev(0)) + ")",
                          ev(0));
    }
    double cutoff = tol.abs * std::max(lambda_max, 0.0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff) ++r;
    }
    ComplexMatrix w(r, g.rows());
    ComplexMatrix w_pinv(g.rows(), r);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff) {
            double root = std::sqrt(ev(i));
            w.row(row) = root * es.eigenvectors().col(i).adjoint();
            w_pinv.col(row) = es.eigenvectors().col(i) / root;
            ++row;
        }
    }
    return {std::move(w), std::move(w_pinv)};
}

inline ComplexMatrix psd_factor(const ComplexMatrix& g, const Tolerance& tol = {}) {
    return psd_factor_full(g, tol).w;
}

// PSD square root via Hermitized eigendecomposition; eigenvalues in
// [-tol.abs * max(1, lambda_max), 0] clamp to zero, anything lower is an error.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, const Tolerance& tol = {}) {
    require_square(m, "psd_sqrt");
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m));
    const RealVector& ev = es.eigenvalues();
    double lambda_max = std::max(ev(ev.size() - 1), 0.0);
    double clamp_floor = -tol.abs * std::max(1.0, lambda_max);
    if (ev(0) < clamp_floor) {
        throw NotPsdError("psd_sqrt: input is not PSD within tolerance (min eigenvalue " +
                              std::to_string(ev(0)) + ")",
                          ev(0));
    }
    RealVector roots(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        roots(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

// Moore-Penrose pseudo-inverse via SVD; singular values at or below
// pinv_cutoff_ratio * sigma_max are treated as zero.
inline ComplexMatrix pinv(const ComplexMatrix& m, const Tolerance& tol = {}) {
    if (m.size() == 0) return ComplexMatrix(m.cols(), m.rows());
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    double cutoff = tol.pinv_cutoff_ratio * sigma_max;
    RealVector inv(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

// Kronecker product with the first factor as the coarse block index:
// (A (x) B)[i*rowsB + k, j*colsB + l] = A[i,j] * B[k,l].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

enum class TraceSide { first, second };

// Trace out one tensor factor of a (d1*d2)x(d1*d2) matrix, indices (a,b) -> a*d2 + b.
// side = second keeps the first factor (d1 x d1) and vice versa.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index d1, Eigen::Index d2,
                                   TraceSide side) {
    if (d1 <= 0 || d2 <= 0) {
        throw DimensionError("partial_trace: factor dimensions must be positive");
    }
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2) {
        throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " + std::to_string(d1 * d2) +
                             "x" + std::to_string(d1 * d2));
    }
    if (side == TraceSide::second) {
        ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
        for (Eigen::Index a = 0; a < d1; ++a) {
            for (Eigen::Index c = 0; c < d1; ++c) {
                Complex sum = 0.0;
                for (Eigen::Index b = 0; b < d2; ++b) {
                    sum += m(a * d2 + b, c * d2 + b);
                }
                out(a, c) = sum;
            }
        }
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(d2, d2);
    for (Eigen::Index b = 0; b < d2; ++b) {
        for (Eigen::Index c = 0; c < d2; ++c) {
            Complex sum = 0.0;
            for (Eigen::Index a = 0; a < d1; ++a) {
                sum += m(a * d2 + b, a * d2 + c);
            }
            out(b, c) = sum;
        }
    }
    return out;
}

}  // namespace ncpoly
