#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ncpoly/dilation.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/opkernels.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/rng.hpp"
#include "ncpoly/space.hpp"

namespace ncpoly {

// Q1 <- Q -> Q2: a POVM on a product sigma-algebra with its coordinate
// marginals Q_i = Q o pi_i^{-1}.
struct QuantumPolymorphism {
    ProductSpace space;
    Povm joint;
    Povm left_marginal;
    Povm right_marginal;
};

inline QuantumPolymorphism make_qpoly(const Povm& q, const ProductSpace& xs,
                                      const Tolerance& tol = {}) {
    if (q.space != xs.flat()) {
        throw DomainError("make_qpoly: POVM does not live on the given product space");
    }
    ValidationReport validity = validate_povm(q, tol);
    if (!validity.pass()) {
        throw DomainError("make_qpoly: input does not validate as a POVM (worst residual " +
                          std::to_string(validity.worst_residual()) + ")");
    }
    return {xs, q, marginal_povm(q, xs, 1), marginal_povm(q, xs, 2)};
}

// Event family used to index kernels over a factor sigma-algebra: the whole
// power set when small, otherwise the atoms, the full event, and a seeded
// batch of random events to guard against span blind spots.
inline std::vector<Event> kernel_event_family(const FiniteSpace& s,
                                              std::uint64_t seed = 0x5eedULL) {
    if (s.size() <= 6) return all_events(s);
    std::vector<Event> family = atom_events(s);
    family.push_back(Event::empty(s));
    family.push_back(Event::full(s));
    Prng rng(seed);
    for (int i = 0; i < 20; ++i) {
        family.push_back(
            Event::from_mask(s, rng.next_u64() & ((std::uint64_t{1} << s.size()) - 1)));
    }
    return family;
}

// Everything disintegrate produces: the computed kernel RN derivative, the
// projection it must match after compression onto the factor space, and the
// residuals of every identity the theorem asserts.
struct DisintegrationResult {
    ComplexMatrix gamma;                  // r x r, dL/dK on the factor space of K
    RealVector gamma_spectrum;            // ascending
    RealVector projection_diagonal;       // P_i(conditioning event) upstairs (0/1)
    ComplexMatrix compression;            // J: big_dim x r, identifies factor space upstairs
    ComplexMatrix compressed_projection;  // J* P J
    double gamma_vs_projection = 0.0;     // ||Gamma - J* P J||_max
    double rn_residual = 0.0;             // ||G_L - W* Gamma W||_max
    double leq_margin = 0.0;              // min eigenvalue of the block gap K - L
    double compression_residual = 0.0;    // ||J* J - I||_max
    int family_size = 0;
    std::vector<Event> family;            // kernel index family over the base factor
    ComplexMatrix factor_w;               // the factorization W of K (rank x family*d)

    // V_A* Gamma V_A / V_A* V_A for a kernel index event A: the scalar the
    // derivative assigns to A relative to K, e.g. conditional mass in the
    // classical dim-1 case.
    double conditional_weight(const Event& a) const {
        for (std::size_t i = 0; i < family.size(); ++i) {
            if (family[i] == a) {
                Eigen::Index d = factor_w.cols() / static_cast<Eigen::Index>(family.size());
                ComplexMatrix va = factor_w.middleCols(static_cast<Eigen::Index>(i) * d, d);
                double denom = (va.adjoint() * va).trace().real();
                if (denom <= 0.0) {
                    throw DomainError("conditional_weight: event has zero kernel mass");
                }
                return (va.adjoint() * gamma * va).trace().real() / denom;
            }
        }
        throw DomainError("conditional_weight: event not in the kernel family");
    }

    bool pass(const Tolerance& tol = {}) const {
        double slack = std::max(RadonNikodymDerivative::kRnTolerance, tol.abs);
        return gamma_vs_projection <= slack && rn_residual <= slack &&
               leq_margin >= -10.0 * tol.abs && compression_residual <= 1e-8;
    }
};

namespace detail {

// Shared implementation of both disintegration directions. `given` names the
// coordinate carrying the conditioning event; kernels are indexed over events
// of the other coordinate.
inline DisintegrationResult disintegrate_impl(const QuantumPolymorphism& qp, int given,
                                              const Event& cond, const Tolerance& tol) {
    const ProductSpace& xs = qp.space;
    if (cond.space() != xs.factor(given)) {
        throw DomainError("disintegrate: conditioning event on wrong factor");
    }
    const int other = given == 2 ? 1 : 2;
    const FiniteSpace& base = xs.factor(other);
    const Povm& base_marginal = other == 1 ? qp.left_marginal : qp.right_marginal;

    NaimarkDilation dil = dilate(qp.joint, false, tol);
    ProductDilationSplit split = split_product(dil, xs);

    std::vector<Event> family = kernel_event_family(base);
    const std::size_t m = family.size();
    const Eigen::Index d = qp.joint.dim;

    // L(A1, A2) = Q((A1 & A2) x B) and K(A1, A2) = Q_i(A1 & A2).
    std::vector<std::string> labels;
    labels.reserve(m);
    for (const Event& e : family) labels.push_back(e.to_label());
    std::vector<ComplexMatrix> l_blocks(m * m);
    std::vector<ComplexMatrix> k_blocks(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Event meet = family[i] & family[j];
            Event rect = other == 1 ? rectangle(xs, meet, cond) : rectangle(xs, cond, meet);
            l_blocks[i * m + j] = evaluate(qp.joint, rect);
            k_blocks[i * m + j] = evaluate(base_marginal, meet);
        }
    }
    OperatorKernel l_kernel(labels, d, std::move(l_blocks), tol);
    OperatorKernel k_kernel(labels, d, std::move(k_blocks), tol);

    DisintegrationResult out;
    out.family_size = static_cast<int>(m);
    out.leq_margin = min_eigenvalue(k_kernel.block_matrix() - l_kernel.block_matrix());

    KernelFactorization fact = factor(k_kernel, tol);
    RadonNikodymDerivative rn = rn_derivative(l_kernel, fact, tol);

    // Identify the factor space upstairs: stack the dilation-side factor maps
    // P_i(A) V over the family and carry them through the pseudo-inverse of W.
    ComplexMatrix t(dil.big_dim, static_cast<Eigen::Index>(m) * d);
    for (std::size_t i = 0; i < m; ++i) {
        RealVector diag = other == 1 ? split.p1_diagonal(family[i]) : split.p2_diagonal(family[i]);
        t.middleCols(static_cast<Eigen::Index>(i) * d, d) = diag.asDiagonal() * dil.isometry;
    }
    ComplexMatrix j = t * rn.with_respect_to.w_pinv;

    out.projection_diagonal = given == 2 ? split.p2_diagonal(cond) : split.p1_diagonal(cond);
    out.compressed_projection =
        hermitize(j.adjoint() * out.projection_diagonal.asDiagonal() * j);
    out.gamma = rn.gamma;
    out.gamma_spectrum = rn.spectrum;
    out.compression = std::move(j);
    out.gamma_vs_projection = max_abs(out.gamma - out.compressed_projection);
    out.rn_residual = rn.reconstruction_residual;
    out.compression_residual =
        max_abs(ComplexMatrix(out.compression.adjoint() * out.compression) -
                ComplexMatrix::Identity(rn.with_respect_to.rank, rn.with_respect_to.rank));
    out.family = std::move(family);
    out.factor_w = rn.with_respect_to.w;
    return out;
}

}  // namespace detail

// dQ(. x B)/dQ_1 = P_2(B): the kernel RN derivative of Q(. x B) with respect
// to Q_1, realized on the factor space of K(A1,A2) = Q_1(A1 & A2), equals the
// compression of the split projection P_2(B).
inline DisintegrationResult disintegrate(const QuantumPolymorphism& qp, const Event& b,
                                         const Tolerance& tol = {}) {
    return detail::disintegrate_impl(qp, 2, b, tol);
}

// Mirror image: dQ(A x .)/dQ_2 = P_1(A).
inline DisintegrationResult disintegrate_left(const QuantumPolymorphism& qp, const Event& a,
                                              const Tolerance& tol = {}) {
    return detail::disintegrate_impl(qp, 1, a, tol);
}

// Q1 (x) Q2 on the product space: atom effects kron(E1_a, E2_b).
inline Povm tensor_povm(const Povm& q1, const Povm& q2) {
    ProductSpace xs = product(q1.space, q2.space);
    std::vector<ComplexMatrix> effects;
    effects.reserve(static_cast<std::size_t>(xs.flat().size()));
    for (int a = 0; a < q1.space.size(); ++a) {
        for (int b = 0; b < q2.space.size(); ++b) {
            effects.push_back(kron(q1.effects[static_cast<std::size_t>(a)],
                                   q2.effects[static_cast<std::size_t>(b)]));
        }
    }
    return Povm(xs.flat(), q1.dim * q2.dim, std::move(effects));
}

inline RealVector kron_vec(const RealVector& a, const RealVector& b) {
    RealVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

struct TensorRectangleReport {
    double max_residual = 0.0;
    int rectangles_checked = 0;
    bool exhaustive = true;
};

// Tensor rectangle identity, both sides built independently: the left side
// sums Kronecker products of marginal effects; the right side sandwiches
// kron(P1(A), P2(B)) between copies of the dilation isometry of
// Q := tensor_povm(q1, q2).
inline TensorRectangleReport tensor_rectangle_check(const Povm& q1, const Povm& q2,
                                                    const Tolerance& tol = {},
                                                    int max_rectangles = 32,
                                                    std::uint64_t seed = 0x5eedULL) {
    ProductSpace xs = product(q1.space, q2.space);
    Povm q = tensor_povm(q1, q2);
    NaimarkDilation dil = dilate(q, false, tol);
    ProductDilationSplit split = split_product(dil, xs);

    Povm m1 = marginal_povm(q, xs, 1);
    Povm m2 = marginal_povm(q, xs, 2);
    Povm mm = tensor_povm(m1, m2);

    ComplexMatrix vv = kron(dil.isometry, dil.isometry);

    TensorRectangleReport report;
    long total = (long{1} << q1.space.size()) * (long{1} << q2.space.size());
    report.exhaustive = total <= max_rectangles;

    std::vector<std::pair<Event, Event>> rects;
    if (report.exhaustive) {
        for (const Event& a : all_events(q1.space)) {
            for (const Event& b : all_events(q2.space)) rects.emplace_back(a, b);
        }
    } else {
        Prng rng(seed);
        rects.emplace_back(Event::full(q1.space), Event::full(q2.space));
        rects.emplace_back(Event::empty(q1.space), Event::full(q2.space));
        while (static_cast<int>(rects.size()) < max_rectangles) {
            rects.emplace_back(
                Event::from_mask(q1.space,
                                 rng.next_u64() & ((std::uint64_t{1} << q1.space.size()) - 1)),
                Event::from_mask(q2.space,
                                 rng.next_u64() & ((std::uint64_t{1} << q2.space.size()) - 1)));
        }
    }

    for (const auto& [a, b] : rects) {
        ComplexMatrix lhs = evaluate(mm, rectangle(xs, a, b));
        RealVector dd = kron_vec(split.p1_diagonal(a), split.p2_diagonal(b));
        ComplexMatrix rhs = vv.adjoint() * dd.asDiagonal() * vv;
        report.max_residual = std::max(report.max_residual, max_abs(lhs - rhs));
        ++report.rectangles_checked;
    }
    return report;
}

struct TensorRnReport {
    double right_residual = 0.0;  // Gamma vs compressed I (x) P2(B), conditioning on B
    double left_residual = 0.0;   // Gamma vs compressed P1(A) (x) I, conditioning on A
    RealVector right_spectrum;
    RealVector left_spectrum;
    double right_rn_residual = 0.0;
    double left_rn_residual = 0.0;

    bool pass(const Tolerance& tol = {}) const {
        double slack = std::max(RadonNikodymDerivative::kRnTolerance, tol.abs);
        return right_residual <= slack && left_residual <= slack &&
               right_rn_residual <= slack && left_rn_residual <= slack;
    }
};

namespace detail {

struct TensorRnSide {
    double residual;
    double rn_residual;
    RealVector spectrum;
};

// One direction of the tensor RN identities. Kernels over the events of
// `base_povm`'s space:
//   L(A1,A2) = wrap(base(A1 & A2), fixed_other)   K(A1,A2) = wrap(base(A1 & A2), I)
// with wrap = kron in the order fixed by `base_first`. The expected derivative
// is the compression of kron(I, P_other(cond)) (or its mirror) through the
// factor maps built from both Naimark dilations.
inline TensorRnSide tensor_rn_side(const Povm& base_povm, const NaimarkDilation& base_dil,
                                   const Povm& other_povm, const NaimarkDilation& other_dil,
                                   const Event& cond, bool base_first, const Tolerance& tol) {
    ComplexMatrix fixed_other = evaluate(other_povm, cond);
    ComplexMatrix eye_other = ComplexMatrix::Identity(other_povm.dim, other_povm.dim);

    std::vector<Event> family = kernel_event_family(base_povm.space);
    const std::size_t m = family.size();
    const Eigen::Index d = base_povm.dim * other_povm.dim;

    std::vector<std::string> labels;
    labels.reserve(m);
    for (const Event& e : family) labels.push_back(e.to_label());
    std::vector<ComplexMatrix> l_blocks(m * m);
    std::vector<ComplexMatrix> k_blocks(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            ComplexMatrix base_val = evaluate(base_povm, family[i] & family[j]);
            l_blocks[i * m + j] =
                base_first ? kron(base_val, fixed_other) : kron(fixed_other, base_val);
            k_blocks[i * m + j] =
                base_first ? kron(base_val, eye_other) : kron(eye_other, base_val);
        }
    }
    OperatorKernel l_kernel(labels, d, std::move(l_blocks), tol);
    OperatorKernel k_kernel(labels, d, std::move(k_blocks), tol);

    KernelFactorization fact = factor(k_kernel, tol);
    RadonNikodymDerivative rn = rn_derivative(l_kernel, fact, tol);

    // Factor maps of K upstairs: kron(P_base(A) V_base, V_other) (or mirrored).
    Eigen::Index big = base_dil.big_dim * other_dil.big_dim;
    ComplexMatrix t(big, static_cast<Eigen::Index>(m) * d);
    for (std::size_t i = 0; i < m; ++i) {
        ComplexMatrix pav =
            base_dil.projection_diagonal(family[i]).asDiagonal() * base_dil.isometry;
        t.middleCols(static_cast<Eigen::Index>(i) * d, d) =
            base_first ? kron(pav, other_dil.isometry) : kron(other_dil.isometry, pav);
    }
    ComplexMatrix j = t * rn.with_respect_to.w_pinv;

    RealVector ones_base = RealVector::Ones(base_dil.big_dim);
    RealVector other_diag = other_dil.projection_diagonal(cond);
    RealVector expected_diag =
        base_first ? kron_vec(ones_base, other_diag) : kron_vec(other_diag, ones_base);
    ComplexMatrix expected = hermitize(j.adjoint() * expected_diag.asDiagonal() * j);

    return {max_abs(rn.gamma - expected), rn.reconstruction_residual, rn.spectrum};
}

}  // namespace detail

// Both tensor RN identities: the kernel derivatives of the tensor POVM match
// I (x) P2(B) and P1(A) (x) I after compression onto the factor spaces.
inline TensorRnReport tensor_rn_check(const Povm& q1, const Povm& q2, const Event& a,
                                      const Event& b, const Tolerance& tol = {}) {
    if (a.space() != q1.space) throw DomainError("tensor_rn_check: A on wrong space");
    if (b.space() != q2.space) throw DomainError("tensor_rn_check: B on wrong space");
    NaimarkDilation dil1 = dilate(q1, false, tol);
    NaimarkDilation dil2 = dilate(q2, false, tol);

    detail::TensorRnSide on_b = detail::tensor_rn_side(q1, dil1, q2, dil2, b, true, tol);
    detail::TensorRnSide on_a = detail::tensor_rn_side(q2, dil2, q1, dil1, a, false, tol);

    TensorRnReport report;
    report.right_residual = on_b.residual;
    report.right_rn_residual = on_b.rn_residual;
    report.right_spectrum = on_b.spectrum;
    report.left_residual = on_a.residual;
    report.left_rn_residual = on_a.rn_residual;
    report.left_spectrum = on_a.spectrum;
    return report;
}

struct ContractionReport {
    int samples = 0;
    int violations = 0;
    double max_excess = 0.0;            // worst (restricted norm - source norm)
    double max_repr_residual = 0.0;     // ||G_i G_i+ y - y||, representability
    double max_compat_residual = 0.0;   // K_i(A,B) vs K(preimage A, preimage B)
};

// Shared state for restriction-norm computations: the event family of the
// factor, the block Gram of the pulled-back kernel, and its pseudo-inverse.
struct PullbackContext {
    const Povm& joint;
    ProductSpace space;
    int coordinate;
    std::vector<Event> family;
    ComplexMatrix gram;
    ComplexMatrix gram_pinv;
    double compat_residual;  // K_i(A,B) vs K(preimage A, preimage B)

    PullbackContext(const Povm& q, const ProductSpace& xs, int coord, const Tolerance& tol = {})
        : joint(q), space(xs), coordinate(coord), compat_residual(0.0) {
        if (q.space != xs.flat()) {
            throw DomainError("PullbackContext: POVM does not live on the product space");
        }
        family = kernel_event_family(xs.factor(coord));
        const std::size_t m = family.size();
        const Eigen::Index d = q.dim;
        Povm qi = marginal_povm(q, xs, coord);
        gram.resize(static_cast<Eigen::Index>(m) * d, static_cast<Eigen::Index>(m) * d);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                ComplexMatrix ki = evaluate(qi, family[i] & family[j]);
                ComplexMatrix pulled =
                    evaluate(q, preimage(xs, coord, family[i]) & preimage(xs, coord, family[j]));
                compat_residual = std::max(compat_residual, max_abs(ki - pulled));
                gram.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d,
                           d) = pulled;
            }
        }
        gram_pinv = pinv(gram, tol);
    }
};

struct PullbackSample {
    double source_norm = 0.0;
    double restricted_norm = 0.0;
    double repr_residual = 0.0;
};

// One element f = sum_j K(., E_j) h_j of the RKHS of the event-indexed kernel
// of Q, together with the norm of its restriction along the preimage map. Both
// norms are exact Gram computations; the restricted one is the minimal-norm
// representation through the block-Gram pseudo-inverse.
inline PullbackSample pullback_restriction(const PullbackContext& ctx,
                                           const std::vector<Event>& supports,
                                           const std::vector<ComplexVector>& coeffs) {
    if (supports.size() != coeffs.size()) {
        throw DimensionError("pullback_restriction: supports/coeffs size mismatch");
    }
    const Povm& q = ctx.joint;
    const Eigen::Index d = q.dim;
    const std::size_t m = ctx.family.size();

    double source_sq = 0.0;
    for (std::size_t u = 0; u < supports.size(); ++u) {
        for (std::size_t v = 0; v < supports.size(); ++v) {
            source_sq +=
                (coeffs[u].dot(evaluate(q, supports[u] & supports[v]) * coeffs[v])).real();
        }
    }

    ComplexVector y = ComplexVector::Zero(static_cast<Eigen::Index>(m) * d);
    for (std::size_t i = 0; i < m; ++i) {
        Event lifted = preimage(ctx.space, ctx.coordinate, ctx.family[i]);
        ComplexVector value = ComplexVector::Zero(d);
        for (std::size_t u = 0; u < supports.size(); ++u) {
            value += evaluate(q, lifted & supports[u]) * coeffs[u];
        }
        y.segment(static_cast<Eigen::Index>(i) * d, d) = value;
    }

    PullbackSample out;
    out.source_norm = std::sqrt(std::max(0.0, source_sq));
    out.restricted_norm = std::sqrt(std::max(0.0, (y.dot(ctx.gram_pinv * y)).real()));
    out.repr_residual =
        y.size() == 0 ? 0.0
                      : (ComplexVector(ctx.gram * (ctx.gram_pinv * y)) - y).cwiseAbs().maxCoeff();
    return out;
}

// Marginal-to-joint RKHS contraction, read through preimages: the pullback
// B_{X_i} -> B_X is the unique map compatible with
// K_i(A,B) = K(pi_i^{-1}A, pi_i^{-1}B), and restriction along it is a
// contraction between the event-indexed RKHSs.
inline ContractionReport rkhs_pullback_contraction(const Povm& q, const ProductSpace& xs,
                                                   int coordinate, int samples,
                                                   const Tolerance& tol = {},
                                                   std::uint64_t seed = 0x5eedULL) {
    PullbackContext ctx(q, xs, coordinate, tol);

    ContractionReport report;
    report.max_compat_residual = ctx.compat_residual;

    Prng rng(seed);
    const std::uint64_t flat_mask = (std::uint64_t{1} << q.space.size()) - 1;
    for (int sample = 0; sample < samples; ++sample) {
        int terms = rng.uniform_int(1, 3);
        std::vector<Event> supports;
        std::vector<ComplexVector> coeffs;
        for (int t = 0; t < terms; ++t) {
            supports.push_back(Event::from_mask(q.space, rng.next_u64() & flat_mask));
            ComplexVector h(q.dim);
            for (Eigen::Index k = 0; k < q.dim; ++k) {
                h(k) = Complex(rng.gaussian(), rng.gaussian());
            }
            coeffs.push_back(std::move(h));
        }

        PullbackSample s = pullback_restriction(ctx, supports, coeffs);
        double excess = s.restricted_norm - s.source_norm;
        report.max_excess = std::max(report.max_excess, excess);
        report.max_repr_residual = std::max(report.max_repr_residual, s.repr_residual);
        if (excess > std::max(1e-7, tol.abs) * std::max(1.0, s.source_norm)) {
            ++report.violations;
        }
        ++report.samples;
    }
    return report;
}

}  // namespace ncpoly
