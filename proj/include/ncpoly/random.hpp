#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ncpoly/classical.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/opkernels.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/rng.hpp"
#include "ncpoly/space.hpp"
#include "ncpoly/states.hpp"

namespace ncpoly {

inline ComplexMatrix random_matrix(Prng& rng, Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    }
    return m;
}

inline ComplexVector random_vector(Prng& rng, Eigen::Index dim) {
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    return v;
}

inline ComplexMatrix random_hermitian(Prng& rng, Eigen::Index n) {
    ComplexMatrix a = random_matrix(rng, n, n);
    return 0.5 * (a + a.adjoint());
}

inline ComplexMatrix random_psd(Prng& rng, Eigen::Index n, Eigen::Index rank = -1) {
    if (rank < 0) rank = n;
    ComplexMatrix a = random_matrix(rng, rank, n);
    return a.adjoint() * a;
}

// Haar-ish unitary: QR of a Gaussian matrix with the R diagonal phases fixed.
inline ComplexMatrix random_unitary(Prng& rng, Eigen::Index n) {
    ComplexMatrix a = random_matrix(rng, n, n);
    Eigen::HouseholderQR<ComplexMatrix> qr(a);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex d = r(i, i);
        q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0);
    }
    return q;
}

inline FiniteSpace random_space(Prng& rng, int min_atoms, int max_atoms,
                                const std::string& prefix = "s") {
    int n = rng.uniform_int(min_atoms, max_atoms);
    std::vector<std::string> atoms;
    atoms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) atoms.push_back(prefix + std::to_string(i));
    return FiniteSpace(std::move(atoms));
}

inline Event random_event(Prng& rng, const FiniteSpace& s) {
    return Event::from_mask(s, rng.next_u64() & ((std::uint64_t{1} << s.size()) - 1));
}

inline Event random_nonempty_event(Prng& rng, const FiniteSpace& s) {
    while (true) {
        Event e = random_event(rng, s);
        if (!e.is_empty()) return e;
    }
}

// Effects drawn as A_j* A_j with complex-Gaussian A_j, rescaled to sum to the
// identity by symmetric inverse-square-root conjugation.
inline Povm random_povm(Prng& rng, const FiniteSpace& space, Eigen::Index dim) {
    std::vector<ComplexMatrix> raw;
    raw.reserve(static_cast<std::size_t>(space.size()));
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < space.size(); ++i) {
        raw.push_back(random_psd(rng, dim));
        total += raw.back();
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(total));
    RealVector inv_roots(dim);
    for (Eigen::Index i = 0; i < dim; ++i) inv_roots(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
    ComplexMatrix t = es.eigenvectors() * inv_roots.asDiagonal() * es.eigenvectors().adjoint();
    std::vector<ComplexMatrix> effects;
    effects.reserve(raw.size());
    for (auto& e : raw) effects.push_back(hermitize(t * e * t));
    return Povm(space, dim, std::move(effects));
}

// Unitary conjugate of a diagonal PVM; the atoms partition the basis indices
// (some effects may be zero when the space has more atoms than dimensions).
inline Pvm random_pvm(Prng& rng, const FiniteSpace& space, Eigen::Index dim) {
    std::vector<int> owner(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
        owner[static_cast<std::size_t>(i)] = rng.uniform_int(0, space.size() - 1);
    }
    ComplexMatrix u = random_unitary(rng, dim);
    std::vector<ComplexMatrix> effects;
    effects.reserve(static_cast<std::size_t>(space.size()));
    for (int atom = 0; atom < space.size(); ++atom) {
        RealVector diag = RealVector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (owner[static_cast<std::size_t>(i)] == atom) diag(i) = 1.0;
        }
        effects.push_back(u * diag.asDiagonal() * u.adjoint());
    }
    return Pvm(space, dim, std::move(effects));
}

inline FiniteMeasure random_measure(Prng& rng, const FiniteSpace& s, bool probability = false) {
    RealVector w(s.size());
    for (int i = 0; i < s.size(); ++i) w(i) = rng.uniform(0.05, 1.0);
    if (probability) w /= w.sum();
    return FiniteMeasure(s, std::move(w));
}

inline JointMeasure random_joint(Prng& rng, const ProductSpace& xs, bool probability = false,
                                 double zero_fraction = 0.0) {
    RealVector w(xs.flat().size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = rng.coin(zero_fraction) ? 0.0 : rng.uniform(0.05, 1.0);
    }
    if (probability) {
        double total = w.sum();
        if (total <= 0.0) w(0) = 1.0, total = 1.0;
        w /= total;
    }
    return JointMeasure(xs, std::move(w));
}

// Gram kernel K(s,t) = V_s* V_t from stacked Gaussian factors; p.d. by construction.
inline OperatorKernel random_gram_kernel(Prng& rng, int n, Eigen::Index dim,
                                         Eigen::Index rank = -1) {
    if (rank < 0) rank = static_cast<Eigen::Index>(n) * dim;
    ComplexMatrix w = random_matrix(rng, rank, static_cast<Eigen::Index>(n) * dim);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    std::vector<ComplexMatrix> blocks(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            blocks[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(j)] =
                w.middleCols(static_cast<Eigen::Index>(i) * dim, dim).adjoint() *
                w.middleCols(static_cast<Eigen::Index>(j) * dim, dim);
        }
    }
    return OperatorKernel(std::move(labels), dim, std::move(blocks));
}

// Hermitian with spectrum in [0, 1].
inline ComplexMatrix random_contraction(Prng& rng, Eigen::Index n) {
    ComplexMatrix u = random_unitary(rng, n);
    RealVector diag(n);
    for (Eigen::Index i = 0; i < n; ++i) diag(i) = rng.uniform();
    return hermitize(u * diag.asDiagonal() * u.adjoint());
}

// L(s,t) = V_s* Gamma0 V_t through an existing factorization; leq(L, K) holds
// by construction whenever 0 <= Gamma0 <= I.
inline OperatorKernel planted_dominated_kernel(const KernelFactorization& fact,
                                               const ComplexMatrix& gamma0) {
    const int n = fact.kernel.size();
    const Eigen::Index d = fact.kernel.dim();
    std::vector<ComplexMatrix> blocks(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ComplexMatrix vi = fact.factor(i);
        for (int j = 0; j < n; ++j) {
            ComplexMatrix b = vi.adjoint() * gamma0 * fact.factor(j);
            blocks[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(j)] = b;
        }
    }
    return OperatorKernel(fact.kernel.labels(), d, std::move(blocks));
}

inline ScalarKernel random_scalar_pd_kernel(Prng& rng, int n, Eigen::Index rank = -1) {
    if (rank < 0) rank = n;
    ComplexMatrix b = random_matrix(rng, rank, n);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    return ScalarKernel(std::move(labels), b.adjoint() * b);
}

inline DensityOperator random_density(
    Prng& rng, Eigen::Index dim,
    std::optional<std::pair<Eigen::Index, Eigen::Index>> split = std::nullopt) {
    ComplexMatrix a = random_matrix(rng, dim, dim);
    ComplexMatrix m = a * a.adjoint();
    m /= m.trace().real();
    return DensityOperator(hermitize(m), split);
}

inline VectorField random_vector_field(Prng& rng, const FiniteSpace& s, Eigen::Index dim) {
    std::vector<ComplexVector> vectors;
    vectors.reserve(static_cast<std::size_t>(s.size()));
    for (int i = 0; i < s.size(); ++i) vectors.push_back(random_vector(rng, dim));
    return VectorField(s, dim, std::move(vectors));
}

}  // namespace ncpoly
