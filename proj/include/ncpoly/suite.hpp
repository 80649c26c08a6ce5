#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ncpoly/json_io.hpp"
#include "ncpoly/qpoly.hpp"
#include "ncpoly/random.hpp"

namespace ncpoly {

struct SuiteConfig {
    std::uint64_t seed = 1;
    int trials = 50;
    int max_atoms = 4;
    int max_dim = 3;
    Tolerance tol{};
};

struct TrialOutcome {
    bool pass = true;
    double residual = 0.0;
    std::string detail;
    std::string instance_json;  // serialized failing instance, empty on pass
};

struct SuiteProperty {
    std::string module;
    std::string name;
    std::function<TrialOutcome(std::uint64_t, const SuiteConfig&)> run;
};

struct PropertyResult {
    std::string module;
    std::string name;
    int trials = 0;
    int failures = 0;
    double worst_residual = 0.0;
    std::uint64_t first_failure_seed = 0;
    std::string first_failure_detail;
    std::string first_failure_instance;
};

struct SuiteReport {
    SuiteConfig config;
    std::vector<PropertyResult> properties;
    int total_failures = 0;
    bool pass() const { return total_failures == 0; }
};

namespace props {

inline int factor_atoms(Prng& rng, const SuiteConfig& cfg, int cap = 3) {
    return rng.uniform_int(1, std::max(1, std::min(cap, cfg.max_atoms)));
}

inline Eigen::Index draw_dim(Prng& rng, const SuiteConfig& cfg, int cap = 8) {
    return rng.uniform_int(1, std::max(1, std::min(cap, cfg.max_dim)));
}

inline ProductSpace random_product(Prng& rng, const SuiteConfig& cfg, int cap = 3) {
    return product(random_space(rng, 1, std::max(1, std::min(cap, cfg.max_atoms)), "a"),
                   random_space(rng, 1, std::max(1, std::min(cap, cfg.max_atoms)), "b"));
}

inline TrialOutcome from_residual(double residual, double bound, std::string detail,
                                  std::function<std::string()> instance = nullptr) {
    TrialOutcome out;
    out.residual = residual;
    out.pass = residual <= bound;
    out.detail = std::move(detail);
    if (!out.pass && instance) out.instance_json = instance();
    return out;
}

// ---- classical -------------------------------------------------------------

inline TrialOutcome classical_mass(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, cfg.max_atoms);
    JointMeasure nu = random_joint(rng, xs, false, 0.2);
    auto [m1, m2] = marginals(nu);
    double resid =
        std::max(std::abs(m1.total() - nu.total()), std::abs(m2.total() - nu.total()));
    return from_residual(resid, 1e-12 * std::max(1.0, nu.total()), "marginal mass vs joint mass",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome classical_bayes(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, 5);
    JointMeasure nu = random_joint(rng, xs, rng.coin(), 0.3);
    auto [m1, m2] = marginals(nu);
    double resid = disintegration_check(nu, cfg.tol).max_violation;
    for (int a = 0; a < xs.left().size(); ++a) {
        if (m1.weights(a) <= 0.0) continue;
        FiniteMeasure cond = conditional(nu, 1, a);
        for (int b = 0; b < xs.right().size(); ++b) {
            resid = std::max(resid, std::abs(nu.at(a, b) - m1.weights(a) * cond.weights(b)));
        }
    }
    return from_residual(resid, 1e-12 * std::max(1.0, nu.total()),
                         "Bayes reconstruction and rectangle disintegration",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome classical_symmetry(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, cfg.max_atoms);
    JointMeasure nu = random_joint(rng, xs);
    ProductSpace sx = product(xs.right(), xs.left());
    RealVector w(sx.flat().size());
    for (int a = 0; a < xs.left().size(); ++a) {
        for (int b = 0; b < xs.right().size(); ++b) w(sx.pair_index(b, a)) = nu.at(a, b);
    }
    JointMeasure swapped(sx, std::move(w));
    auto [m1, m2] = marginals(nu);
    auto [s1, s2] = marginals(swapped);
    double resid = std::max((m1.weights - s2.weights).cwiseAbs().maxCoeff(),
                            (m2.weights - s1.weights).cwiseAbs().maxCoeff());
    for (int a = 0; a < xs.left().size(); ++a) {
        if (m1.weights(a) <= 0.0) continue;
        resid = std::max(resid, (conditional(nu, 1, a).weights -
                                 conditional(swapped, 2, a).weights)
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    return from_residual(resid, 1e-12, "factor swap symmetry",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome classical_convexity(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, cfg.max_atoms);
    if (xs.left().size() < 2 || xs.right().size() < 2) {
        return {true, 0.0, "space too small for a second coupling; trivially convex", ""};
    }
    JointMeasure nu1 = random_joint(rng, xs, true);
    auto [m1, m2] = marginals(nu1);
    RealVector w = nu1.weights;
    double eps = 0.5 * std::min(w(xs.pair_index(0, 0)), w(xs.pair_index(1, 1)));
    w(xs.pair_index(0, 0)) -= eps;
    w(xs.pair_index(1, 1)) -= eps;
    w(xs.pair_index(0, 1)) += eps;
    w(xs.pair_index(1, 0)) += eps;
    JointMeasure nu2(xs, std::move(w));
    double lambda = rng.uniform();
    JointMeasure mix(xs, RealVector(lambda * nu1.weights + (1.0 - lambda) * nu2.weights));
    auto [x1, x2] = marginals(mix);
    double resid = std::max((x1.weights - m1.weights).cwiseAbs().maxCoeff(),
                            (x2.weights - m2.weights).cwiseAbs().maxCoeff());
    return from_residual(resid, 1e-12, "convex mixture keeps the marginals",
                         [&] { return encode(mix).dump(); });
}

// ---- povm ------------------------------------------------------------------

inline TrialOutcome povm_additivity(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, std::min(5, cfg.max_atoms));
    Povm q = random_povm(rng, s, draw_dim(rng, cfg));
    double resid = 0.0;
    for (const Event& a : all_events(s)) {
        for (const Event& b : all_events(s)) {
            if (!a.disjoint_from(b)) continue;
            resid = std::max(resid, max_abs(evaluate(q, a | b) -
                                            ComplexMatrix(evaluate(q, a) + evaluate(q, b))));
        }
    }
    return from_residual(resid, 1e-10, "Q(A|B) = Q(A) + Q(B) for disjoint events",
                         [&] { return encode(q).dump(); });
}

inline TrialOutcome povm_monotone(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Povm q = random_povm(rng, s, draw_dim(rng, cfg));
    double resid = 0.0;
    for (int t = 0; t < 8; ++t) {
        Event b = random_event(rng, s);
        Event a = b & random_event(rng, s);
        resid = std::max(resid, std::max(0.0, -min_eigenvalue(evaluate(q, b) - evaluate(q, a))));
    }
    return from_residual(resid, cfg.tol.abs, "Q(B) - Q(A) is PSD for A inside B",
                         [&] { return encode(q).dump(); });
}

inline TrialOutcome povm_dim1(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, cfg.max_atoms);
    JointMeasure nu = random_joint(rng, xs, true);
    Povm q = classical_embedding_povm(nu, cfg.tol);
    auto [m1, m2] = marginals(nu);
    Povm q1 = marginal_povm(q, xs, 1);
    Povm q2 = marginal_povm(q, xs, 2);
    double resid = 0.0;
    for (int a = 0; a < xs.left().size(); ++a) {
        resid = std::max(resid,
                         std::abs(q1.effects[static_cast<std::size_t>(a)](0, 0).real() -
                                  m1.weights(a)));
    }
    for (int b = 0; b < xs.right().size(); ++b) {
        resid = std::max(resid,
                         std::abs(q2.effects[static_cast<std::size_t>(b)](0, 0).real() -
                                  m2.weights(b)));
    }
    return from_residual(resid, 1e-12, "dim-1 marginal POVMs equal classical marginals",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome povm_pvm_subset(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Pvm p = random_pvm(rng, s, draw_dim(rng, cfg));
    ValidationReport pvm_report = validate_pvm(p, cfg.tol);
    ValidationReport povm_report = validate_povm(p, cfg.tol);
    TrialOutcome out;
    out.pass = pvm_report.pass() && povm_report.pass();
    out.residual = std::max(pvm_report.worst_residual(), povm_report.worst_residual());
    out.detail = "every valid PVM validates as a POVM";
    if (!out.pass) out.instance_json = encode(p, "pvm").dump();
    return out;
}

inline TrialOutcome povm_covariance(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Eigen::Index d = draw_dim(rng, cfg);
    VectorField f = random_vector_field(rng, s, d);
    VectorField g = random_vector_field(rng, s, d);
    FiniteMeasure mu = random_measure(rng, s);
    CovarianceResult c = covariance_operator(f, g, mu);
    double resid = std::abs(c.trace_of_matrix - c.trace_by_sum) /
                   std::max(1.0, std::abs(c.trace_by_sum));
    return from_residual(resid, 1e-10, "matrix trace equals the weighted inner-product sum",
                         [&] { return encode(c.matrix).dump(); });
}

// ---- dilation ----------------------------------------------------------------

inline TrialOutcome dilation_isometry(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Povm q = random_povm(rng, s, draw_dim(rng, cfg, 4));
    NaimarkDilation dil = dilate(q, rng.coin(), cfg.tol);
    return from_residual(isometry_residual(dil), 1e-9, "V* V = I",
                         [&] { return encode(q).dump(); });
}

inline TrialOutcome dilation_reconstruction(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, std::min(5, cfg.max_atoms));
    Povm q = random_povm(rng, s, draw_dim(rng, cfg, 4));
    NaimarkDilation dil = dilate(q, rng.coin(), cfg.tol);
    return from_residual(reconstruction_residual(dil), 1e-8, "V* P(A) V = Q(A) over all events",
                         [&] { return encode(q).dump(); });
}

inline TrialOutcome dilation_pvm_laws(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Povm q = random_povm(rng, s, draw_dim(rng, cfg));
    NaimarkDilation dil = dilate(q, rng.coin(), cfg.tol);
    double resid = 0.0;
    for (int t = 0; t < 8; ++t) {
        Event a = random_event(rng, s);
        Event b = random_event(rng, s);
        ComplexMatrix pa = apply_pvm(dil, a);
        ComplexMatrix pb = apply_pvm(dil, b);
        resid = std::max(resid, max_abs(ComplexMatrix(pa * pb) - apply_pvm(dil, a & b)));
        resid = std::max(resid, max_abs(ComplexMatrix(pa * pa) - pa));
        resid = std::max(resid, max_abs(pa - ComplexMatrix(pa.adjoint())));
        if (a.disjoint_from(b)) {
            resid = std::max(resid, max_abs(ComplexMatrix(pa + pb) - apply_pvm(dil, a | b)));
        }
    }
    return from_residual(resid, 1e-12, "P is additive, idempotent, multiplicative upstairs",
                         [&] { return encode(q).dump(); });
}

inline TrialOutcome dilation_commutation(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    Povm q = random_povm(rng, xs.flat(), draw_dim(rng, cfg));
    ProductDilationSplit split = split_product(dilate(q, rng.coin(), cfg.tol), xs);
    return from_residual(split.max_commutator, 1e-10, "[P1(A), P2(B)] = 0",
                         [&] { return encode(q, "povm", xs).dump(); });
}

inline TrialOutcome dilation_rectangles(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    Povm q = random_povm(rng, xs.flat(), draw_dim(rng, cfg));
    ProductDilationSplit split = split_product(dilate(q, false, cfg.tol), xs);
    return from_residual(split.max_rectangle_residual, 1e-8, "Q(AxB) = V* P1(A) P2(B) V",
                         [&] { return encode(q, "povm", xs).dump(); });
}

inline TrialOutcome dilation_marginals(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    Povm q = random_povm(rng, xs.flat(), draw_dim(rng, cfg));
    NaimarkDilation dil = dilate(q, false, cfg.tol);
    ProductDilationSplit split = split_product(dil, xs);
    Povm q1 = marginal_povm(q, xs, 1);
    Povm q2 = marginal_povm(q, xs, 2);
    double resid = 0.0;
    for (const Event& a : all_events(xs.left())) {
        ComplexMatrix lhs =
            dil.isometry.adjoint() * split.p1_diagonal(a).asDiagonal() * dil.isometry;
        resid = std::max(resid, max_abs(lhs - evaluate(q1, a)));
    }
    for (const Event& b : all_events(xs.right())) {
        ComplexMatrix lhs =
            dil.isometry.adjoint() * split.p2_diagonal(b).asDiagonal() * dil.isometry;
        resid = std::max(resid, max_abs(lhs - evaluate(q2, b)));
    }
    return from_residual(resid, 1e-8, "V* P_i(.) V equals the marginal POVM",
                         [&] { return encode(q, "povm", xs).dump(); });
}

// ---- opkernels ---------------------------------------------------------------

inline TrialOutcome kernels_equivalence(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    int n = rng.uniform_int(1, std::min(5, cfg.max_atoms + 1));
    Eigen::Index d = draw_dim(rng, cfg, 3);
    OperatorKernel k = random_gram_kernel(rng, n, d);
    bool planted = rng.coin();
    ComplexMatrix gamma0;
    OperatorKernel l = [&]() {
        if (planted) {
            KernelFactorization f = factor(k, cfg.tol);
            gamma0 = random_contraction(rng, f.rank);
            return planted_dominated_kernel(f, gamma0);
        }
        return rng.coin() ? random_gram_kernel(rng, n, d)
                          : random_gram_kernel(rng, n, d, rng.uniform_int(1, n));
    }();

    bool dominated = leq(l, k, cfg.tol);
    bool rn_ok = true;
    double resid = 0.0;
    try {
        RadonNikodymDerivative rn = rn_derivative(l, k, cfg.tol);
        if (planted) resid = max_abs(rn.gamma - gamma0);
    } catch (const OrderingViolation&) {
        rn_ok = false;
    }
    TrialOutcome out;
    out.pass = (dominated == rn_ok) && (!planted || resid <= 1e-7);
    out.residual = resid;
    out.detail = planted ? "planted pair: agreement and gamma recovery"
                         : "independent pair: leq agrees with rn_derivative";
    if (!out.pass) out.instance_json = (json{{"L", encode(l)}, {"K", encode(k)}}).dump();
    return out;
}

inline TrialOutcome kernels_gauge(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    int n = rng.uniform_int(1, 4);
    Eigen::Index d = draw_dim(rng, cfg, 3);
    OperatorKernel k = random_gram_kernel(rng, n, d);
    KernelFactorization f = factor(k, cfg.tol);
    if (f.rank == 0) return {true, 0.0, "zero kernel; gauge trivially invariant", ""};
    OperatorKernel l = planted_dominated_kernel(f, random_contraction(rng, f.rank));
    RadonNikodymDerivative rn1 = rn_derivative(l, f, cfg.tol);
    KernelFactorization g = f.transformed(random_unitary(rng, f.rank));
    RadonNikodymDerivative rn2 = rn_derivative(l, g, cfg.tol);
    double resid = (rn1.spectrum - rn2.spectrum).cwiseAbs().maxCoeff();
    resid = std::max(resid, max_abs(ComplexMatrix(f.w.adjoint() * rn1.gamma * f.w) -
                                    ComplexMatrix(g.w.adjoint() * rn2.gamma * g.w)));
    return from_residual(resid, 1e-8, "gauge change preserves spectra and reconstruction",
                         [&] { return encode(k).dump(); });
}

inline TrialOutcome kernels_order(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    int n = rng.uniform_int(1, 4);
    Eigen::Index d = draw_dim(rng, cfg, 3);
    OperatorKernel k = random_gram_kernel(rng, n, d);
    KernelFactorization f = factor(k, cfg.tol);
    ComplexMatrix g1 = random_contraction(rng, f.rank);
    // Chain gamma2 <= gamma1 <= I gives kernels l2 <= l1 <= k.
    ComplexMatrix g2 = hermitize(rng.uniform() * g1);
    OperatorKernel l1 = planted_dominated_kernel(f, g1);
    OperatorKernel l2 = planted_dominated_kernel(f, g2);
    bool ok = leq(k, k, cfg.tol) && leq(l1, k, cfg.tol) && leq(l2, l1, cfg.tol) &&
              leq(l2, k, cfg.tol);
    if (leq(k, l1, cfg.tol)) {
        ok = ok && max_abs(k.block_matrix() - l1.block_matrix()) <= 1e-8;
    }
    TrialOutcome out;
    out.pass = ok;
    out.residual = ok ? 0.0 : 1.0;
    out.detail = "reflexivity, transitivity, antisymmetry of the kernel order";
    if (!ok) out.instance_json = encode(k).dump();
    return out;
}

inline TrialOutcome kernels_povm_pd(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace s = random_space(rng, 1, cfg.max_atoms);
    Povm q = random_povm(rng, s, draw_dim(rng, cfg));
    OperatorKernel k = povm_kernel(q);
    double resid = std::max(0.0, -min_eigenvalue(k.block_matrix()));
    TrialOutcome out;
    out.pass = is_pd(k, cfg.tol);
    out.residual = resid;
    out.detail = "K(A,B) = Q(A&B) is positive definite";
    if (!out.pass) out.instance_json = encode(q).dump();
    return out;
}

// ---- qpoly ---------------------------------------------------------------

inline TrialOutcome qpoly_rectangles(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    Povm q = random_povm(rng, xs.flat(), draw_dim(rng, cfg));
    ProductDilationSplit split = split_product(dilate(q, false, cfg.tol), xs);
    return from_residual(split.max_rectangle_residual, 1e-8,
                         "rectangle identity Q(AxB) = V* P1(A) P2(B) V",
                         [&] { return encode(q, "povm", xs).dump(); });
}

inline TrialOutcome qpoly_domination(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    QuantumPolymorphism qp =
        make_qpoly(random_povm(rng, xs.flat(), draw_dim(rng, cfg)), xs, cfg.tol);
    double resid = 0.0;
    for (const Event& b : all_events(xs.right())) {
        resid = std::max(resid, std::max(0.0, -disintegrate(qp, b, cfg.tol).leq_margin));
    }
    for (const Event& a : all_events(xs.left())) {
        resid = std::max(resid, std::max(0.0, -disintegrate_left(qp, a, cfg.tol).leq_margin));
    }
    return from_residual(resid, 1e-9, "Q(.xB) <= Q1 and Q(Ax.) <= Q2 as kernels",
                         [&] { return encode(qp.joint, "povm", xs).dump(); });
}

inline TrialOutcome qpoly_derivative_projection(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    QuantumPolymorphism qp =
        make_qpoly(random_povm(rng, xs.flat(), draw_dim(rng, cfg)), xs, cfg.tol);
    double resid = 0.0;
    for (const Event& b : all_events(xs.right())) {
        resid = std::max(resid, disintegrate(qp, b, cfg.tol).gamma_vs_projection);
    }
    for (const Event& a : all_events(xs.left())) {
        resid = std::max(resid, disintegrate_left(qp, a, cfg.tol).gamma_vs_projection);
    }
    return from_residual(resid, 1e-7, "gamma equals the compressed projection, both sides",
                         [&] { return encode(qp.joint, "povm", xs).dump(); });
}

inline TrialOutcome qpoly_classical(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg);
    JointMeasure nu = random_joint(rng, xs, true);
    QuantumPolymorphism qp = make_qpoly(classical_embedding_povm(nu, cfg.tol), xs, cfg.tol);
    auto [m1, m2] = marginals(nu);
    double resid = 0.0;
    for (int b0 = 0; b0 < xs.right().size(); ++b0) {
        DisintegrationResult r = disintegrate(qp, Event(xs.right(), {b0}), cfg.tol);
        for (int a = 0; a < xs.left().size(); ++a) {
            if (m1.weights(a) <= 0.0) continue;
            double expected = conditional(nu, 1, a).weights(b0);
            resid = std::max(resid, std::abs(r.conditional_weight(Event(xs.left(), {a})) -
                                             expected));
        }
    }
    return from_residual(resid, 1e-10, "dim-1 disintegration equals classical conditionals",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome qpoly_unitary(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, 2);
    Eigen::Index d = draw_dim(rng, cfg);
    Povm q = random_povm(rng, xs.flat(), d);
    ComplexMatrix u = random_unitary(rng, d);
    std::vector<ComplexMatrix> conj;
    conj.reserve(q.effects.size());
    for (const auto& e : q.effects) conj.push_back(hermitize(u * e * u.adjoint()));
    Povm qu(xs.flat(), d, std::move(conj));
    QuantumPolymorphism qp = make_qpoly(q, xs, cfg.tol);
    QuantumPolymorphism qpu = make_qpoly(qu, xs, cfg.tol);
    Event b = random_event(rng, xs.right());
    DisintegrationResult r1 = disintegrate(qp, b, cfg.tol);
    DisintegrationResult r2 = disintegrate(qpu, b, cfg.tol);
    double resid = (r1.gamma_spectrum - r2.gamma_spectrum).cwiseAbs().maxCoeff();
    resid = std::max(resid, std::abs(r1.gamma_vs_projection - r2.gamma_vs_projection));
    return from_residual(resid, 1e-8, "unitary conjugation preserves spectra and residuals",
                         [&] { return encode(q, "povm", xs).dump(); });
}

inline TrialOutcome qpoly_tensor_rectangles(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace sa = random_space(rng, 1, std::min(3, cfg.max_atoms), "a");
    FiniteSpace sb = random_space(rng, 1, std::min(3, cfg.max_atoms), "b");
    Povm q1 = random_povm(rng, sa, draw_dim(rng, cfg, 2));
    Povm q2 = random_povm(rng, sb, draw_dim(rng, cfg, 2));
    TensorRectangleReport report = tensor_rectangle_check(q1, q2, cfg.tol);
    return from_residual(report.max_residual, 1e-8, "tensor rectangle identity", [&] {
        return (json{{"Q1", encode(q1)}, {"Q2", encode(q2)}}).dump();
    });
}

inline TrialOutcome qpoly_tensor_derivatives(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    FiniteSpace sa = random_space(rng, 1, std::min(3, cfg.max_atoms), "a");
    FiniteSpace sb = random_space(rng, 1, std::min(3, cfg.max_atoms), "b");
    Povm q1 = random_povm(rng, sa, draw_dim(rng, cfg, 2));
    Povm q2 = random_povm(rng, sb, draw_dim(rng, cfg, 2));
    TensorRnReport report =
        tensor_rn_check(q1, q2, random_event(rng, sa), random_event(rng, sb), cfg.tol);
    double resid = std::max(report.right_residual, report.left_residual);
    return from_residual(resid, 1e-7, "tensor RN identities on both sides", [&] {
        return (json{{"Q1", encode(q1)}, {"Q2", encode(q2)}}).dump();
    });
}

inline TrialOutcome qpoly_contraction(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, 2);
    Povm q = random_povm(rng, xs.flat(), draw_dim(rng, cfg));
    int coordinate = rng.coin() ? 1 : 2;
    ContractionReport report =
        rkhs_pullback_contraction(q, xs, coordinate, 10, cfg.tol, rng.next_u64());
    TrialOutcome out;
    out.pass = report.violations == 0 && report.max_compat_residual <= 1e-10;
    out.residual = std::max(report.max_excess, 0.0);
    out.detail = "preimage pullback is norm-nonincreasing";
    if (!out.pass) out.instance_json = encode(q, "povm", xs).dump();
    return out;
}

// ---- states ----------------------------------------------------------------

inline TrialOutcome states_correspondence(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    ProductSpace xs = random_product(rng, cfg, cfg.max_atoms);
    JointMeasure nu = random_joint(rng, xs, true, 0.2);
    DensityOperator rho = classical_embed(nu, true, cfg.tol);
    auto [t1, t2] = partial_traces(rho, cfg.tol);
    auto [m1, m2] = marginals(nu);
    double resid = 0.0;
    for (int a = 0; a < xs.left().size(); ++a) {
        resid = std::max(resid, std::abs(t1.matrix(a, a).real() - m1.weights(a)));
    }
    for (int b = 0; b < xs.right().size(); ++b) {
        resid = std::max(resid, std::abs(t2.matrix(b, b).real() - m2.weights(b)));
    }
    return from_residual(resid, 1e-12, "embed then trace equals marginalize then embed",
                         [&] { return encode(nu).dump(); });
}

inline TrialOutcome states_convexity(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    Eigen::Index d1 = draw_dim(rng, cfg, 3);
    Eigen::Index d2 = draw_dim(rng, cfg, 3);
    DensityOperator a = random_density(rng, d1 * d2, std::make_pair(d1, d2));
    DensityOperator b = random_density(rng, d1 * d2, std::make_pair(d1, d2));
    auto [a1, a2] = partial_traces(a, cfg.tol);
    auto [b1, b2] = partial_traces(b, cfg.tol);
    double lambda = rng.uniform();
    DensityOperator mix(ComplexMatrix(lambda * a.matrix + (1.0 - lambda) * b.matrix),
                        std::make_pair(d1, d2), cfg.tol);
    auto [x1, x2] = partial_traces(mix, cfg.tol);
    double resid = std::max(
        max_abs(x1.matrix - ComplexMatrix(lambda * a1.matrix + (1.0 - lambda) * b1.matrix)),
        max_abs(x2.matrix - ComplexMatrix(lambda * a2.matrix + (1.0 - lambda) * b2.matrix)));
    return from_residual(resid, 1e-12, "poly(s1, s2) is a convex set",
                         [&] { return encode(mix).dump(); });
}

inline TrialOutcome states_product_witness(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    Eigen::Index d1 = draw_dim(rng, cfg, 3);
    Eigen::Index d2 = draw_dim(rng, cfg, 3);
    DensityOperator s1 = random_density(rng, d1);
    DensityOperator s2 = random_density(rng, d2);
    DensityOperator prod(kron(s1.matrix, s2.matrix), std::make_pair(d1, d2), cfg.tol);
    auto [m1, m2] = partial_traces(prod, cfg.tol);
    double resid = std::max(max_abs(m1.matrix - s1.matrix), max_abs(m2.matrix - s2.matrix));
    return from_residual(resid, 1e-12, "s1 (x) s2 belongs to poly(s1, s2)",
                         [&] { return encode(prod).dump(); });
}

inline TrialOutcome states_linking(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    int n = rng.uniform_int(2, std::max(2, cfg.max_atoms));
    ScalarKernel c1 = random_scalar_pd_kernel(rng, n);
    ScalarKernel c2 = random_scalar_pd_kernel(rng, n, rng.uniform_int(1, n));
    LinkedKernels linked = link_kernels(c1, c2, 1 + draw_dim(rng, cfg, 3), cfg.tol);
    double resid =
        std::max(max_abs(slice(linked.kernel, linked.rho1).values - c1.values),
                 max_abs(slice(linked.kernel, linked.rho2).values - c2.values));
    TrialOutcome out;
    out.pass = resid <= 1e-12 && is_pd(linked.kernel, cfg.tol);
    out.residual = resid;
    out.detail = "link_kernels output is p.d. and slices round-trip";
    if (!out.pass) {
        out.instance_json = (json{{"c1", encode(c1.values)}, {"c2", encode(c2.values)}}).dump();
    }
    return out;
}

inline TrialOutcome states_slice_linear(std::uint64_t seed, const SuiteConfig& cfg) {
    Prng rng(seed);
    int n = rng.uniform_int(1, 4);
    Eigen::Index d = draw_dim(rng, cfg, 3);
    OperatorKernel k1 = random_gram_kernel(rng, n, d);
    OperatorKernel k2 = random_gram_kernel(rng, n, d);
    DensityOperator r1 = random_density(rng, d);
    DensityOperator r2 = random_density(rng, d);
    double alpha = rng.uniform();
    std::vector<ComplexMatrix> mixed_blocks;
    mixed_blocks.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            mixed_blocks.push_back(alpha * k1.block(i, j) + (1.0 - alpha) * k2.block(i, j));
        }
    }
    OperatorKernel mixed(k1.labels(), d, std::move(mixed_blocks));
    double resid = max_abs(slice(mixed, r1).values -
                           ComplexMatrix(alpha * slice(k1, r1).values +
                                         (1.0 - alpha) * slice(k2, r1).values));
    DensityOperator mix_rho(ComplexMatrix(alpha * r1.matrix + (1.0 - alpha) * r2.matrix));
    resid = std::max(resid, max_abs(slice(k1, mix_rho).values -
                                    ComplexMatrix(alpha * slice(k1, r1).values +
                                                  (1.0 - alpha) * slice(k1, r2).values)));
    return from_residual(resid, 1e-12, "slice is linear in K and in rho",
                         [&] { return encode(k1).dump(); });
}

}  // namespace props

inline const std::vector<SuiteProperty>& property_registry() {
    static const std::vector<SuiteProperty> registry = {
        {"classical", "mass-conservation", props::classical_mass},
        {"classical", "bayes-reconstruction", props::classical_bayes},
        {"classical", "coupling-symmetry", props::classical_symmetry},
        {"classical", "polymorphism-convexity", props::classical_convexity},
        {"povm", "event-additivity", props::povm_additivity},
        {"povm", "monotonicity", props::povm_monotone},
        {"povm", "dim1-reduction", props::povm_dim1},
        {"povm", "pvm-is-povm", props::povm_pvm_subset},
        {"povm", "covariance-trace", props::povm_covariance},
        {"dilation", "isometry", props::dilation_isometry},
        {"dilation", "reconstruction", props::dilation_reconstruction},
        {"dilation", "pvm-laws-upstairs", props::dilation_pvm_laws},
        {"dilation", "split-commutation", props::dilation_commutation},
        {"dilation", "split-rectangles", props::dilation_rectangles},
        {"dilation", "marginal-consistency", props::dilation_marginals},
        {"opkernels", "domination-equivalence", props::kernels_equivalence},
        {"opkernels", "factorization-gauge", props::kernels_gauge},
        {"opkernels", "order-properties", props::kernels_order},
        {"opkernels", "povm-kernel-pd", props::kernels_povm_pd},
        {"qpoly", "rectangle-factorization", props::qpoly_rectangles},
        {"qpoly", "corollary-domination", props::qpoly_domination},
        {"qpoly", "derivative-is-projection", props::qpoly_derivative_projection},
        {"qpoly", "classical-consistency", props::qpoly_classical},
        {"qpoly", "unitary-robustness", props::qpoly_unitary},
        {"qpoly", "tensor-rectangles", props::qpoly_tensor_rectangles},
        {"qpoly", "tensor-derivatives", props::qpoly_tensor_derivatives},
        {"qpoly", "pullback-contraction", props::qpoly_contraction},
        {"states", "correspondence-commutes", props::states_correspondence},
        {"states", "poly-convexity", props::states_convexity},
        {"states", "product-witness", props::states_product_witness},
        {"states", "linking-lemma", props::states_linking},
        {"states", "slice-linearity", props::states_slice_linear},
    };
    return registry;
}

inline std::uint64_t trial_seed(const SuiteConfig& config, std::size_t property_index,
                                int trial) {
    std::uint64_t property_seed = Prng::split(config.seed, property_index);
    return Prng::split(property_seed, static_cast<std::uint64_t>(trial));
}

// Runs every registered property `config.trials` times. Trials are pure
// functions of their seed, so the worker pool cannot perturb the report.
inline SuiteReport run_suite(const SuiteConfig& config, unsigned workers = 0) {
    const auto& registry = property_registry();
    const std::size_t n_props = registry.size();
    const int trials = std::max(1, config.trials);

    std::vector<std::vector<TrialOutcome>> outcomes(n_props);
    for (auto& v : outcomes) v.resize(static_cast<std::size_t>(trials));

    struct Task {
        std::size_t property;
        int trial;
    };
    std::vector<Task> tasks;
    tasks.reserve(n_props * static_cast<std::size_t>(trials));
    for (std::size_t p = 0; p < n_props; ++p) {
        for (int t = 0; t < trials; ++t) tasks.push_back({p, t});
    }

    if (workers == 0) {
        workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    }
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            std::uint64_t seed = trial_seed(config, task.property, task.trial);
            TrialOutcome outcome;
            try {
                outcome = registry[task.property].run(seed, config);
            } catch (const std::exception& e) {
                outcome.pass = false;
                outcome.residual = std::numeric_limits<double>::infinity();
                outcome.detail = std::string("exception: ") + e.what();
            }
            outcomes[task.property][static_cast<std::size_t>(task.trial)] = std::move(outcome);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    SuiteReport report;
    report.config = config;
    for (std::size_t p = 0; p < n_props; ++p) {
        PropertyResult result;
        result.module = registry[p].module;
        result.name = registry[p].name;
        result.trials = trials;
        for (int t = 0; t < trials; ++t) {
            const TrialOutcome& o = outcomes[p][static_cast<std::size_t>(t)];
            result.worst_residual = std::max(result.worst_residual, o.residual);
            if (!o.pass) {
                if (result.failures == 0) {
                    result.first_failure_seed = trial_seed(config, p, t);
                    result.first_failure_detail = o.detail;
                    result.first_failure_instance = o.instance_json;
                }
                ++result.failures;
            }
        }
        report.total_failures += result.failures;
        report.properties.push_back(std::move(result));
    }
    return report;
}

inline json suite_report_json(const SuiteReport& report) {
    json props = json::array();
    for (const auto& p : report.properties) {
        json entry{{"module", p.module},
                   {"name", p.name},
                   {"trials", p.trials},
                   {"failures", p.failures},
                   {"worst_residual", p.worst_residual}};
        if (p.failures > 0) {
            entry["first_failure"] = json{{"seed", p.first_failure_seed},
                                          {"detail", p.first_failure_detail}};
            if (!p.first_failure_instance.empty()) {
                entry["first_failure"]["instance"] = json::parse(p.first_failure_instance);
            }
        } else {
            entry["first_failure"] = nullptr;
        }
        props.push_back(std::move(entry));
    }
    return json{{"seed", report.config.seed},
                {"trials", report.config.trials},
                {"max_atoms", report.config.max_atoms},
                {"max_dim", report.config.max_dim},
                {"tolerance",
                 json{{"abs", report.config.tol.abs},
                      {"rel", report.config.tol.rel},
                      {"pinv_cutoff_ratio", report.config.tol.pinv_cutoff_ratio}}},
                {"properties", std::move(props)},
                {"failures", report.total_failures},
                {"pass", report.pass()}};
}

}  // namespace ncpoly
