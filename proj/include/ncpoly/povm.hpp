#pragma once

#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ncpoly/classical.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/rng.hpp"
#include "ncpoly/space.hpp"

namespace ncpoly {

// A POVM stored by its atom effects; event values are always derived by
// summation, so sigma-additivity holds by construction and validation focuses
// on positivity and completeness. A PVM shares this representation and is
// distinguished by validation level.
struct Povm {
    FiniteSpace space;
    Eigen::Index dim;
    std::vector<ComplexMatrix> effects;

    Povm(FiniteSpace s, Eigen::Index d, std::vector<ComplexMatrix> e)
        : space(std::move(s)), dim(d), effects(std::move(e)) {
        if (dim <= 0) throw DimensionError("Povm: dim must be positive");
        if (static_cast<int>(effects.size()) != space.size()) {
            throw DimensionError("Povm: effect count does not match atom count");
        }
        for (const auto& eff : effects) {
            if (eff.rows() != dim || eff.cols() != dim) {
                throw DimensionError("Povm: every effect must be dim x dim");
            }
            if (!all_finite(eff)) throw DomainError("Povm: effects must be finite");
        }
    }
};

using Pvm = Povm;

// Q(A) = sum of atom effects over A.
inline ComplexMatrix evaluate(const Povm& q, const Event& a) {
    if (a.space() != q.space) throw DomainError("evaluate: event on wrong space");
    ComplexMatrix out = ComplexMatrix::Zero(q.dim, q.dim);
    for (int i : a.members()) out += q.effects[static_cast<std::size_t>(i)];
    return out;
}

struct AxiomCheck {
    std::string axiom;
    bool pass = true;
    double residual = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<AxiomCheck> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const AxiomCheck& c) { return c.pass; });
    }

    double worst_residual() const {
        double w = 0.0;
        for (const auto& c : checks) w = std::max(w, c.residual);
        return w;
    }

    const AxiomCheck* find(const std::string& axiom) const {
        for (const auto& c : checks) {
            if (c.axiom == axiom) return &c;
        }
        return nullptr;
    }
};

namespace detail {

// Random partition of the atoms into k disjoint nonempty events (k >= 1).
inline std::vector<Event> random_disjoint_family(Prng& rng, const FiniteSpace& s, int k) {
    std::vector<std::vector<int>> parts(static_cast<std::size_t>(k));
    for (int atom = 0; atom < s.size(); ++atom) {
        parts[static_cast<std::size_t>(rng.uniform_int(0, k - 1))].push_back(atom);
    }
    std::vector<Event> out;
    for (auto& p : parts) {
        if (!p.empty()) out.push_back(Event(s, std::move(p)));
    }
    return out;
}

}  // namespace detail

// POVM axioms: Q(empty)=0 and Q(S)=I by summation, each effect PSD, and finite
// additivity over random disjoint event families.
inline ValidationReport validate_povm(const Povm& q, const Tolerance& tol = {}) {
    ValidationReport report;

    ComplexMatrix total = evaluate(q, Event::full(q.space));
    double completeness = max_abs(total - ComplexMatrix::Identity(q.dim, q.dim));
    report.checks.push_back({"completeness", completeness <= tol.abs, completeness,
                             "||sum of effects - I||_max"});

    double empty_resid = max_abs(evaluate(q, Event::empty(q.space)));
    report.checks.push_back({"null-event", empty_resid == 0.0, empty_resid, "||Q(empty)||_max"});

    double worst_herm = 0.0;
    double worst_neg = 0.0;
    bool positive = true;
    for (int i = 0; i < q.space.size(); ++i) {
        const ComplexMatrix& e = q.effects[static_cast<std::size_t>(i)];
        worst_herm = std::max(worst_herm, hermitian_residual(e));
        if (!is_psd(e, tol)) positive = false;
        double min_ev = min_eigenvalue(e);
        worst_neg = std::max(worst_neg, std::max(0.0, -min_ev));
    }
    report.checks.push_back({"self-adjointness", worst_herm <= tol.abs * 10.0, worst_herm,
                             "worst ||E - E*||_max over atoms"});
    report.checks.push_back(
        {"positivity", positive, worst_neg, "worst negative eigenvalue magnitude over atoms"});

    Prng rng(0x5eedULL);
    double worst_add = 0.0;
    for (int trial = 0; trial < 16; ++trial) {
        auto family = detail::random_disjoint_family(rng, q.space, rng.uniform_int(1, 4));
        Event un = Event::empty(q.space);
        ComplexMatrix sum = ComplexMatrix::Zero(q.dim, q.dim);
        for (const Event& a : family) {
            un = un | a;
            sum += evaluate(q, a);
        }
        worst_add = std::max(worst_add, max_abs(evaluate(q, un) - sum));
    }
    report.checks.push_back({"additivity", worst_add <= tol.abs, worst_add,
                             "worst ||Q(union) - sum Q(A_i)||_max over disjoint families"});

    return report;
}

// PVM axioms: everything a POVM needs plus idempotence, mutual orthogonality
// of atom effects, and multiplicativity Q(A and B) = Q(A) Q(B) on event pairs.
inline ValidationReport validate_pvm(const Pvm& p, const Tolerance& tol = {}) {
    ValidationReport report = validate_povm(p, tol);

    double worst_idem = 0.0;
    for (const auto& e : p.effects) {
        worst_idem = std::max(worst_idem, max_abs(ComplexMatrix(e * e) - e));
    }
    report.checks.push_back(
        {"idempotence", worst_idem <= tol.abs * 10.0, worst_idem, "worst ||E^2 - E||_max"});

    double worst_orth = 0.0;
    for (std::size_t i = 0; i < p.effects.size(); ++i) {
        for (std::size_t j = 0; j < p.effects.size(); ++j) {
            if (i == j) continue;
            worst_orth = std::max(worst_orth, max_abs(p.effects[i] * p.effects[j]));
        }
    }
    report.checks.push_back({"orthogonality", worst_orth <= tol.abs * 10.0, worst_orth,
                             "worst ||E_i E_j||_max, i != j"});

    double worst_mult = 0.0;
    if (p.space.size() <= 5) {
        auto events = all_events(p.space);
        for (const Event& a : events) {
            for (const Event& b : events) {
                worst_mult = std::max(
                    worst_mult, max_abs(evaluate(p, a & b) -
                                        ComplexMatrix(evaluate(p, a) * evaluate(p, b))));
            }
        }
    } else {
        Prng rng(0x5eedULL);
        for (int trial = 0; trial < 64; ++trial) {
            std::uint64_t ma = rng.next_u64() & ((std::uint64_t{1} << p.space.size()) - 1);
            std::uint64_t mb = rng.next_u64() & ((std::uint64_t{1} << p.space.size()) - 1);
            Event a = Event::from_mask(p.space, ma);
            Event b = Event::from_mask(p.space, mb);
            worst_mult = std::max(
                worst_mult,
                max_abs(evaluate(p, a & b) - ComplexMatrix(evaluate(p, a) * evaluate(p, b))));
        }
    }
    report.checks.push_back({"multiplicativity", worst_mult <= tol.abs * 10.0, worst_mult,
                             "worst ||Q(A&B) - Q(A)Q(B)||_max over event pairs"});

    return report;
}

// Q_i = Q o pi_i^{-1}: effect of atom a is the sum of effects over its fiber.
inline Povm marginal_povm(const Povm& q, const ProductSpace& xs, int coordinate) {
    if (q.space != xs.flat()) {
        throw DomainError("marginal_povm: POVM does not live on the given product space");
    }
    const FiniteSpace& factor = xs.factor(coordinate);
    std::vector<ComplexMatrix> effects;
    effects.reserve(static_cast<std::size_t>(factor.size()));
    for (int i = 0; i < factor.size(); ++i) {
        effects.push_back(evaluate(q, preimage(xs, coordinate, Event(factor, {i}))));
    }
    return Povm(factor, q.dim, std::move(effects));
}

// Classical probability table as a dim-1 POVM: effect of pair (a,b) is the
// 1x1 matrix [nu(a,b)]. The table must be a probability measure so the
// effects sum to 1.
inline Povm classical_embedding_povm(const JointMeasure& nu, const Tolerance& tol = {}) {
    if (std::abs(nu.total() - 1.0) > 100.0 * tol.abs) {
        throw DomainError("classical_embedding_povm: table total is " +
                          std::to_string(nu.total()) + ", expected a probability measure");
    }
    std::vector<ComplexMatrix> effects;
    effects.reserve(static_cast<std::size_t>(nu.weights.size()));
    for (Eigen::Index i = 0; i < nu.weights.size(); ++i) {
        effects.push_back(ComplexMatrix::Constant(1, 1, nu.weights(i)));
    }
    return Povm(nu.space.flat(), 1, std::move(effects));
}

// H-valued function on the atoms of a finite space.
struct VectorField {
    FiniteSpace space;
    Eigen::Index dim;
    std::vector<ComplexVector> vectors;

    VectorField(FiniteSpace s, Eigen::Index d, std::vector<ComplexVector> v)
        : space(std::move(s)), dim(d), vectors(std::move(v)) {
        if (dim <= 0) throw DimensionError("VectorField: dim must be positive");
        if (static_cast<int>(vectors.size()) != space.size()) {
            throw DimensionError("VectorField: vector count does not match atom count");
        }
        for (const auto& vec : vectors) {
            if (vec.size() != dim) throw DimensionError("VectorField: wrong vector dimension");
            if (!vec.allFinite()) throw DomainError("VectorField: vectors must be finite");
        }
    }
};

struct CovarianceResult {
    ComplexMatrix matrix;      // C = sum_s mu(s) |G(s)><F(s)|
    Complex trace_by_sum;      // sum_s mu(s) <F(s), G(s)>
    Complex trace_of_matrix;   // matrix trace of C; equals trace_by_sum within tolerance
};

// Finite instance of the covariance operator: the weak integral collapses to a
// weighted sum of rank-one ket-bras.
inline CovarianceResult covariance_operator(const VectorField& f, const VectorField& g,
                                            const FiniteMeasure& mu) {
    if (f.space != g.space || f.space != mu.space) {
        throw DomainError("covariance_operator: F, G, mu must share one space");
    }
    if (f.dim != g.dim) throw DimensionError("covariance_operator: F and G dims differ");
    ComplexMatrix c = ComplexMatrix::Zero(f.dim, f.dim);
    Complex trace_sum = 0.0;
    for (int s = 0; s < f.space.size(); ++s) {
        const auto& fs = f.vectors[static_cast<std::size_t>(s)];
        const auto& gs = g.vectors[static_cast<std::size_t>(s)];
        double w = mu.weights(s);
        c += w * (gs * fs.adjoint());
        trace_sum += w * fs.dot(gs);
    }
    Complex matrix_trace = c.trace();
    return {std::move(c), trace_sum, matrix_trace};
}

}  // namespace ncpoly
