#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ncpoly/matrix.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/space.hpp"

namespace ncpoly {

// Q(A) = V* P(A) V with V an isometry into a larger space and P the PVM that
// projects onto per-atom index blocks. The block form keeps P exactly 0/1
// diagonal, so PVM laws upstairs hold to machine precision.
struct NaimarkDilation {
    Povm source;
    Eigen::Index big_dim;
    ComplexMatrix isometry;                     // big_dim x dim
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // per atom: [start, end)

    // 0/1 diagonal of P(A) as a real vector of length big_dim.
    RealVector projection_diagonal(const Event& a) const {
        if (a.space() != source.space) {
            throw DomainError("NaimarkDilation: event on wrong space");
        }
        RealVector d = RealVector::Zero(big_dim);
        for (int atom : a.members()) {
            const auto& [start, end] = blocks[static_cast<std::size_t>(atom)];
            for (Eigen::Index k = start; k < end; ++k) d(k) = 1.0;
        }
        return d;
    }
};

// Block-stacked square-root construction: stack E_j^{1/2} (or its psd_factor
// when compress is set) vertically to form V; P({j}) projects onto block j.
inline NaimarkDilation dilate(const Povm& q, bool compress = false, const Tolerance& tol = {}) {
    ValidationReport validity = validate_povm(q, tol);
    if (!validity.pass()) {
        throw DomainError("dilate: input does not validate as a POVM (worst residual " +
                          std::to_string(validity.worst_residual()) + ")");
    }

    std::vector<ComplexMatrix> pieces;
    pieces.reserve(q.effects.size());
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
    Eigen::Index offset = 0;
    for (const auto& effect : q.effects) {
        ComplexMatrix piece = compress ? psd_factor(effect, tol) : psd_sqrt(effect, tol);
        blocks.emplace_back(offset, offset + piece.rows());
        offset += piece.rows();
        pieces.push_back(std::move(piece));
    }

    ComplexMatrix v(offset, q.dim);
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        v.block(blocks[j].first, 0, pieces[j].rows(), q.dim) = pieces[j];
    }
    return NaimarkDilation{q, offset, std::move(v), std::move(blocks)};
}

// P(A) as a dense big_dim x big_dim projection.
inline ComplexMatrix apply_pvm(const NaimarkDilation& dil, const Event& a) {
    RealVector d = dil.projection_diagonal(a);
    ComplexMatrix p = ComplexMatrix::Zero(dil.big_dim, dil.big_dim);
    for (Eigen::Index k = 0; k < dil.big_dim; ++k) p(k, k) = d(k);
    return p;
}

// V* P(A) V; equals evaluate(source, A) within tolerance for every event.
inline ComplexMatrix reconstruct(const NaimarkDilation& dil, const Event& a) {
    RealVector d = dil.projection_diagonal(a);
    return dil.isometry.adjoint() * d.asDiagonal() * dil.isometry;
}

inline double isometry_residual(const NaimarkDilation& dil) {
    return max_abs(ComplexMatrix(dil.isometry.adjoint() * dil.isometry) -
                   ComplexMatrix::Identity(dil.source.dim, dil.source.dim));
}

// Max over events of ||V* P(A) V - Q(A)||_max; exhaustive up to 10 atoms,
// sampled beyond that.
inline double reconstruction_residual(const NaimarkDilation& dil) {
    const FiniteSpace& s = dil.source.space;
    double worst = 0.0;
    if (s.size() <= 10) {
        for (const Event& a : all_events(s)) {
            worst = std::max(worst, max_abs(reconstruct(dil, a) - evaluate(dil.source, a)));
        }
    } else {
        Prng rng(0x5eedULL);
        for (int t = 0; t < 128; ++t) {
            Event a = Event::from_mask(s, rng.next_u64() & ((std::uint64_t{1} << s.size()) - 1));
            worst = std::max(worst, max_abs(reconstruct(dil, a) - evaluate(dil.source, a)));
        }
        worst = std::max(worst, max_abs(reconstruct(dil, Event::full(s)) -
                                        evaluate(dil.source, Event::full(s))));
    }
    return worst;
}

// The commuting marginal PVMs P1(A) = P(A x X2), P2(B) = P(X1 x B) of a
// product-space dilation, stored by atom projections.
struct ProductDilationSplit {
    NaimarkDilation dilation;
    ProductSpace space;
    std::vector<RealVector> p1_atoms;  // per left atom: diagonal of P1({a})
    std::vector<RealVector> p2_atoms;  // per right atom: diagonal of P2({b})
    double max_rectangle_residual = 0.0;
    double max_commutator = 0.0;
    bool rectangles_exhaustive = true;

    RealVector p1_diagonal(const Event& a) const {
        if (a.space() != space.left()) {
            throw DomainError("ProductDilationSplit: event not on the left factor");
        }
        RealVector d = RealVector::Zero(dilation.big_dim);
        for (int atom : a.members()) d += p1_atoms[static_cast<std::size_t>(atom)];
        return d;
    }

    RealVector p2_diagonal(const Event& b) const {
        if (b.space() != space.right()) {
            throw DomainError("ProductDilationSplit: event not on the right factor");
        }
        RealVector d = RealVector::Zero(dilation.big_dim);
        for (int atom : b.members()) d += p2_atoms[static_cast<std::size_t>(atom)];
        return d;
    }

    ComplexMatrix p1(const Event& a) const {
        return RealVector(p1_diagonal(a)).asDiagonal().toDenseMatrix().cast<Complex>();
    }

    ComplexMatrix p2(const Event& b) const {
        return RealVector(p2_diagonal(b)).asDiagonal().toDenseMatrix().cast<Complex>();
    }

    // V* P1(A) P2(B) V. The diagonals are exact 0/1, so the product is again a
    // diagonal projection.
    ComplexMatrix compress_rectangle(const Event& a, const Event& b) const {
        RealVector d = p1_diagonal(a).cwiseProduct(p2_diagonal(b));
        return dilation.isometry.adjoint() * d.asDiagonal() * dilation.isometry;
    }
};

// Split a product-space dilation into its coordinate PVMs and verify the
// rectangle identity Q(A x B) = V* P1(A) P2(B) V.
inline ProductDilationSplit split_product(const NaimarkDilation& dil, const ProductSpace& xs) {
    if (dil.source.space != xs.flat()) {
        throw DomainError("split_product: dilation source does not live on the product space");
    }

    ProductDilationSplit split{dil, xs, {}, {}, 0.0, 0.0, true};
    for (int a = 0; a < xs.left().size(); ++a) {
        split.p1_atoms.push_back(
            dil.projection_diagonal(preimage(xs, 1, Event(xs.left(), {a}))));
    }
    for (int b = 0; b < xs.right().size(); ++b) {
        split.p2_atoms.push_back(
            dil.projection_diagonal(preimage(xs, 2, Event(xs.right(), {b}))));
    }

    split.rectangles_exhaustive = xs.left().size() <= 4 && xs.right().size() <= 4;
    std::vector<Event> family1 =
        split.rectangles_exhaustive ? all_events(xs.left()) : atom_events(xs.left());
    std::vector<Event> family2 =
        split.rectangles_exhaustive ? all_events(xs.right()) : atom_events(xs.right());
    if (!split.rectangles_exhaustive) {
        family1.push_back(Event::full(xs.left()));
        family2.push_back(Event::full(xs.right()));
    }

    for (const Event& a : family1) {
        for (const Event& b : family2) {
            ComplexMatrix lhs = evaluate(dil.source, rectangle(xs, a, b));
            ComplexMatrix rhs = split.compress_rectangle(a, b);
            split.max_rectangle_residual =
                std::max(split.max_rectangle_residual, max_abs(lhs - rhs));
            // Commutation measured on the dense products, not assumed from
            // the diagonal form.
            ComplexMatrix p1m = split.p1(a);
            ComplexMatrix p2m = split.p2(b);
            split.max_commutator =
                std::max(split.max_commutator, max_abs(ComplexMatrix(p1m * p2m - p2m * p1m)));
        }
    }
    return split;
}

}  // namespace ncpoly
