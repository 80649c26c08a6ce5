#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ncpoly/matrix.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/space.hpp"

namespace ncpoly {

// Operator-valued kernel over a finite index set: an n x n grid of dim x dim
// blocks K(s_i, s_j) with Hermitian symmetry block(i,j) = block(j,i)*.
class OperatorKernel {
public:
    OperatorKernel(std::vector<std::string> index_labels, Eigen::Index dim,
                   std::vector<ComplexMatrix> blocks, const Tolerance& tol = {})
        : labels_(std::move(index_labels)), dim_(dim), blocks_(std::move(blocks)) {
        if (dim_ <= 0) throw DimensionError("OperatorKernel: dim must be positive");
        const std::size_t n = labels_.size();
        if (n == 0) throw DomainError("OperatorKernel: empty index set");
        if (blocks_.size() != n * n) {
            throw DimensionError("OperatorKernel: expected " + std::to_string(n * n) +
                                 " blocks, got " + std::to_string(blocks_.size()));
        }
        double scale = 0.0;
        for (const auto& b : blocks_) {
            if (b.rows() != dim_ || b.cols() != dim_) {
                throw DimensionError("OperatorKernel: every block must be dim x dim");
            }
            if (!all_finite(b)) throw DomainError("OperatorKernel: blocks must be finite");
            scale = std::max(scale, max_abs(b));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                double resid = max_abs(blocks_[i * n + j] -
                                       ComplexMatrix(blocks_[j * n + i].adjoint()));
                if (resid > 10.0 * tol.abs * std::max(1.0, scale)) {
                    throw DomainError("OperatorKernel: Hermitian symmetry violated at (" +
                                      labels_[i] + ", " + labels_[j] + "), residual " +
                                      std::to_string(resid));
                }
            }
        }
    }

    int size() const { return static_cast<int>(labels_.size()); }
    Eigen::Index dim() const { return dim_; }
    const std::vector<std::string>& labels() const { return labels_; }

    const ComplexMatrix& block(int i, int j) const {
        return blocks_[static_cast<std::size_t>(i) * labels_.size() +
                       static_cast<std::size_t>(j)];
    }

    // The (n*dim) x (n*dim) block-Gram matrix [K(s_i, s_j)].
    ComplexMatrix block_matrix() const {
        const Eigen::Index n = static_cast<Eigen::Index>(labels_.size());
        ComplexMatrix g(n * dim_, n * dim_);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                g.block(i * dim_, j * dim_, dim_, dim_) =
                    block(static_cast<int>(i), static_cast<int>(j));
            }
        }
        return g;
    }

    bool same_shape(const OperatorKernel& other) const {
        return labels_ == other.labels_ && dim_ == other.dim_;
    }

private:
    std::vector<std::string> labels_;
    Eigen::Index dim_;
    std::vector<ComplexMatrix> blocks_;
};

// Positive definiteness over a finite index set reduces to one block-Gram PSD test.
inline bool is_pd(const OperatorKernel& k, const Tolerance& tol = {}) {
    return is_psd(k.block_matrix(), tol);
}

// K(s,t) = V_s* V_t with V_s the s-block of columns of the global factor W.
struct KernelFactorization {
    OperatorKernel kernel;
    Eigen::Index rank;
    ComplexMatrix w;       // rank x (n*dim)
    ComplexMatrix w_pinv;  // (n*dim) x rank, exact pseudo-inverse of w

    ComplexMatrix factor(int index) const {
        return w.middleCols(static_cast<Eigen::Index>(index) * kernel.dim(), kernel.dim());
    }

    double reconstruction_residual() const {
        return max_abs(kernel.block_matrix() - ComplexMatrix(w.adjoint() * w));
    }

    // Gauge change W -> U W for unitary U on the factor space; the pseudo-inverse
    // transforms as W+ -> W+ U*.
    KernelFactorization transformed(const ComplexMatrix& unitary) const {
        if (unitary.rows() != rank || unitary.cols() != rank) {
            throw DimensionError("KernelFactorization::transformed: unitary must be rank x rank");
        }
        return {kernel, rank, unitary * w, w_pinv * unitary.adjoint()};
    }
};

inline KernelFactorization factor(const OperatorKernel& k, const Tolerance& tol = {}) {
    PsdFactorization f = psd_factor_full(k.block_matrix(), tol);
    return {k, f.w.rows(), std::move(f.w), std::move(f.w_pinv)};
}

// Loewner-type kernel ordering: L <= K iff the block matrix of K - L is PSD.
inline bool leq(const OperatorKernel& l, const OperatorKernel& k, const Tolerance& tol = {}) {
    if (!l.same_shape(k)) throw DimensionError("leq: kernels have different index sets or dims");
    return is_psd(k.block_matrix() - l.block_matrix(), tol);
}

// Gamma = dL/dK on the factor space of K; Hermitian with spectrum in [0, 1] up
// to the looser Radon-Nikodym tolerance (two pseudo-inverses compound error).
struct RadonNikodymDerivative {
    ComplexMatrix gamma;  // rank x rank
    KernelFactorization with_respect_to;
    RealVector spectrum;  // ascending
    double reconstruction_residual = 0.0;

    static constexpr double kRnTolerance = 1e-7;
};

// Solve G_L = W* Gamma W through the factorization of K. Succeeds iff
// leq(L, K); a failure after leq passes can only be a tolerance miscalibration.
inline RadonNikodymDerivative rn_derivative(const OperatorKernel& l, KernelFactorization fact,
                                            const Tolerance& tol = {}) {
    const OperatorKernel& k = fact.kernel;
    if (!l.same_shape(k)) {
        throw DimensionError("rn_derivative: kernels have different index sets or dims");
    }
    ComplexMatrix gl = l.block_matrix();
    if (!is_psd(gl, tol)) {
        throw NotPsdError("rn_derivative: L is not positive definite", min_eigenvalue(gl));
    }

    ComplexMatrix gap = k.block_matrix() - gl;
    RealVector gap_ev = hermitian_eigenvalues(gap);
    double gap_max = gap_ev.size() > 0 ? gap_ev(gap_ev.size() - 1) : 0.0;
    if (gap_ev(0) < -tol.abs * std::max(1.0, gap_max)) {
        throw OrderingViolation("rn_derivative: L <= K fails (min gap eigenvalue " +
                                    std::to_string(gap_ev(0)) + ")",
                                gap_ev(0));
    }

    ComplexMatrix gamma = hermitize(fact.w_pinv.adjoint() * gl * fact.w_pinv);

    RadonNikodymDerivative rn{std::move(gamma), std::move(fact), {}, 0.0};
    rn.spectrum = hermitian_eigenvalues(rn.gamma);
    rn.reconstruction_residual =
        max_abs(gl - ComplexMatrix(rn.with_respect_to.w.adjoint() * rn.gamma *
                                   rn.with_respect_to.w));

    double slack = std::max(RadonNikodymDerivative::kRnTolerance, tol.abs);
    if (rn.reconstruction_residual > RadonNikodymDerivative::kRnTolerance *
                                         std::max(1.0, max_abs(gl))) {
        throw InternalConsistencyError(
            "rn_derivative: L <= K holds but the reconstruction residual is " +
            std::to_string(rn.reconstruction_residual));
    }
    if (rn.spectrum.size() > 0 &&
        (rn.spectrum(0) < -slack || rn.spectrum(rn.spectrum.size() - 1) > 1.0 + slack)) {
        throw InternalConsistencyError(
            "rn_derivative: L <= K holds but spec(Gamma) leaves [0, 1]: [" +
            std::to_string(rn.spectrum(0)) + ", " +
            std::to_string(rn.spectrum(rn.spectrum.size() - 1)) + "]");
    }
    return rn;
}

inline RadonNikodymDerivative rn_derivative(const OperatorKernel& l, const OperatorKernel& k,
                                            const Tolerance& tol = {}) {
    return rn_derivative(l, factor(k, tol), tol);
}

// K(A,B) := Q(A & B) over an event family; positive definite for every valid
// POVM (each quadratic form is a sum of squared projection norms upstairs).
// Default family: all 2^n events for n <= 8 atoms, singleton atoms otherwise.
inline OperatorKernel povm_kernel(const Povm& q, const std::vector<Event>& events = {}) {
    std::vector<Event> family = events;
    if (family.empty()) {
        family = q.space.size() <= 8 ? all_events(q.space) : atom_events(q.space);
    }
    std::vector<std::string> labels;
    labels.reserve(family.size());
    for (const Event& e : family) {
        if (e.space() != q.space) throw DomainError("povm_kernel: event on wrong space");
        labels.push_back(e.to_label());
    }
    const std::size_t n = family.size();
    std::vector<ComplexMatrix> blocks(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            blocks[i * n + j] = evaluate(q, family[i] & family[j]);
        }
    }
    return OperatorKernel(std::move(labels), q.dim, std::move(blocks));
}

}  // namespace ncpoly
