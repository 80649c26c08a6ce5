#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncpoly/classical.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/opkernels.hpp"

namespace ncpoly {

// PSD unit-trace operator; optionally annotated with a d1 x d2 tensor split.
struct DensityOperator {
    Eigen::Index dim;
    std::optional<std::pair<Eigen::Index, Eigen::Index>> split;
    ComplexMatrix matrix;

    DensityOperator(ComplexMatrix m,
                    std::optional<std::pair<Eigen::Index, Eigen::Index>> s = std::nullopt,
                    const Tolerance& tol = {})
        : dim(m.rows()), split(s), matrix(std::move(m)) {
        require_square(matrix, "DensityOperator");
        if (dim <= 0) throw DimensionError("DensityOperator: dim must be positive");
        if (split && split->first * split->second != dim) {
            throw DimensionError("DensityOperator: split does not factor dim");
        }
        if (!is_psd(matrix, tol)) {
            throw NotPsdError("DensityOperator: matrix is not PSD", min_eigenvalue(matrix));
        }
        double trace_err = std::abs(matrix.trace() - Complex(1.0));
        if (trace_err > 100.0 * tol.abs) {
            throw DomainError("DensityOperator: trace differs from 1 by " +
                              std::to_string(trace_err));
        }
    }
};

// partial traces <=> marginal distributions.
inline std::pair<DensityOperator, DensityOperator> partial_traces(const DensityOperator& rho,
                                                                  const Tolerance& tol = {}) {
    if (!rho.split) {
        throw DomainError("partial_traces: density operator carries no tensor split");
    }
    auto [d1, d2] = *rho.split;
    ComplexMatrix first = partial_trace(rho.matrix, d1, d2, TraceSide::second);
    ComplexMatrix second = partial_trace(rho.matrix, d1, d2, TraceSide::first);
    return {DensityOperator(std::move(first), std::nullopt, tol),
            DensityOperator(std::move(second), std::nullopt, tol)};
}

// Membership in poly(s1, s2), read through the states/partial-trace
// correspondence: rho qualifies iff its partial traces are (s1, s2).
inline bool in_poly(const DensityOperator& rho, const DensityOperator& s1,
                    const DensityOperator& s2, const Tolerance& tol = {}) {
    if (!rho.split) throw DomainError("in_poly: density operator carries no tensor split");
    if (rho.split->first != s1.dim || rho.split->second != s2.dim) {
        throw DimensionError("in_poly: split does not match the marginal dims");
    }
    auto [m1, m2] = partial_traces(rho, tol);
    return max_abs(m1.matrix - s1.matrix) <= tol.abs && max_abs(m2.matrix - s2.matrix) <= tol.abs;
}

// Diagonal embedding of a joint measure as a density on C^{|X1|} (x) C^{|X2|};
// partial traces of the output are the diagonal embeddings of the marginals.
inline DensityOperator classical_embed(const JointMeasure& nu, bool normalize = true,
                                       const Tolerance& tol = {}) {
    double total = nu.total();
    if (normalize) {
        if (total <= 0.0) throw DomainError("classical_embed: zero total mass");
    } else if (std::abs(total - 1.0) > 100.0 * tol.abs) {
        throw DomainError("classical_embed: measure is not a probability (total " +
                          std::to_string(total) + ") and normalize=false");
    }
    Eigen::Index n = nu.weights.size();
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = normalize ? nu.weights(i) / total : nu.weights(i);
    }
    return DensityOperator(std::move(m),
                           std::make_pair<Eigen::Index, Eigen::Index>(nu.space.left().size(),
                                                                      nu.space.right().size()),
                           tol);
}

// Scalar-valued Hermitian kernel over a finite index set.
struct ScalarKernel {
    std::vector<std::string> index_labels;
    ComplexMatrix values;  // n x n, Hermitian

    ScalarKernel(std::vector<std::string> labels, ComplexMatrix v)
        : index_labels(std::move(labels)), values(std::move(v)) {
        if (index_labels.empty()) throw DomainError("ScalarKernel: empty index set");
        if (values.rows() != static_cast<Eigen::Index>(index_labels.size()) ||
            values.cols() != values.rows()) {
            throw DimensionError("ScalarKernel: values must be n x n for n index labels");
        }
        if (!all_finite(values)) throw DomainError("ScalarKernel: values must be finite");
        if (hermitian_residual(values) > 1e-7 * std::max(1.0, max_abs(values))) {
            throw DomainError("ScalarKernel: values are not Hermitian");
        }
    }

    int size() const { return static_cast<int>(index_labels.size()); }

    bool is_pd(const Tolerance& tol = {}) const { return is_psd(values, tol); }
};

struct LinkedKernels {
    OperatorKernel kernel;
    DensityOperator rho1;
    DensityOperator rho2;
};

// The linking construction: rho_1 = |a><a|, rho_2 = |b><b| with a, b the first
// two standard basis vectors, K(s,t) = c1(s,t) rho_1 + c2(s,t) rho_2. Slicing K
// with rho_i recovers c_i exactly.
inline LinkedKernels link_kernels(const ScalarKernel& c1, const ScalarKernel& c2,
                                  Eigen::Index dim, const Tolerance& tol = {}) {
    if (c1.index_labels != c2.index_labels) {
        throw DomainError("link_kernels: kernels have different index sets");
    }
    if (dim < 2) throw DimensionError("link_kernels: dim must be >= 2");
    if (!c1.is_pd(tol)) {
        throw NotPsdError("link_kernels: c1 is not positive definite",
                          min_eigenvalue(c1.values));
    }
    if (!c2.is_pd(tol)) {
        throw NotPsdError("link_kernels: c2 is not positive definite",
                          min_eigenvalue(c2.values));
    }

    ComplexMatrix p1 = ComplexMatrix::Zero(dim, dim);
    p1(0, 0) = 1.0;
    ComplexMatrix p2 = ComplexMatrix::Zero(dim, dim);
    p2(1, 1) = 1.0;

    const std::size_t n = c1.index_labels.size();
    std::vector<ComplexMatrix> blocks(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            blocks[i * n + j] = c1.values(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)) *
                                    p1 +
                                c2.values(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)) *
                                    p2;
        }
    }
    return {OperatorKernel(c1.index_labels, dim, std::move(blocks), tol),
            DensityOperator(std::move(p1), std::nullopt, tol),
            DensityOperator(std::move(p2), std::nullopt, tol)};
}

// c(s,t) = trace(rho K(s,t)); Hermitian always, p.d. whenever K is.
inline ScalarKernel slice(const OperatorKernel& k, const DensityOperator& rho) {
    if (rho.dim != k.dim()) throw DimensionError("slice: density dim does not match kernel dim");
    const int n = k.size();
    ComplexMatrix values(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            values(i, j) = (rho.matrix * k.block(i, j)).trace();
        }
    }
    return ScalarKernel(k.labels(), std::move(values));
}

}  // namespace ncpoly
