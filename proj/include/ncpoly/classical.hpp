#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ncpoly/matrix.hpp"
#include "ncpoly/space.hpp"

namespace ncpoly {

// Positive measure on a finite space; unnormalized unless stated otherwise.
struct FiniteMeasure {
    FiniteSpace space;
    RealVector weights;

    FiniteMeasure(FiniteSpace s, RealVector w) : space(std::move(s)), weights(std::move(w)) {
        if (weights.size() != space.size()) {
            throw DimensionError("FiniteMeasure: weight count does not match atom count");
        }
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            if (!std::isfinite(weights(i)) || weights(i) < 0.0) {
                throw DomainError("FiniteMeasure: weights must be finite and nonnegative");
            }
        }
    }

    double total() const { return weights.sum(); }

    bool is_probability(const Tolerance& tol = {}) const {
        return std::abs(total() - 1.0) <= tol.abs + tol.rel;
    }

    double operator()(const Event& a) const {
        if (a.space() != space) throw DomainError("FiniteMeasure: event on wrong space");
        double s = 0.0;
        for (int i : a.members()) s += weights(i);
        return s;
    }
};

// Positive measure on a product space; weight of pair (a,b) at flat index a*|X2|+b.
struct JointMeasure {
    ProductSpace space;
    RealVector weights;

    JointMeasure(ProductSpace s, RealVector w) : space(std::move(s)), weights(std::move(w)) {
        if (weights.size() != space.flat().size()) {
            throw DimensionError("JointMeasure: weight count does not match product atom count");
        }
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            if (!std::isfinite(weights(i)) || weights(i) < 0.0) {
                throw DomainError("JointMeasure: weights must be finite and nonnegative");
            }
        }
    }

    double total() const { return weights.sum(); }

    double at(int a, int b) const { return weights(space.pair_index(a, b)); }

    double operator()(const Event& e) const {
        if (e.space() != space.flat()) throw DomainError("JointMeasure: event on wrong space");
        double s = 0.0;
        for (int i : e.members()) s += weights(i);
        return s;
    }
};

// mu_i = nu o pi_i^{-1}; both marginals carry the total mass of nu.
inline std::pair<FiniteMeasure, FiniteMeasure> marginals(const JointMeasure& nu) {
    RealVector m1 = RealVector::Zero(nu.space.left().size());
    RealVector m2 = RealVector::Zero(nu.space.right().size());
    for (int a = 0; a < nu.space.left().size(); ++a) {
        for (int b = 0; b < nu.space.right().size(); ++b) {
            double w = nu.at(a, b);
            m1(a) += w;
            m2(b) += w;
        }
    }
    return {FiniteMeasure(nu.space.left(), std::move(m1)),
            FiniteMeasure(nu.space.right(), std::move(m2))};
}

// nu(. | x_i): the conditional probability measure on the opposite factor.
// Undefined (DomainError) on zero-marginal atoms.
inline FiniteMeasure conditional(const JointMeasure& nu, int given, int atom) {
    auto [m1, m2] = marginals(nu);
    if (given == 1) {
        if (atom < 0 || atom >= nu.space.left().size()) {
            throw DomainError("conditional: atom index out of range");
        }
        double mass = m1.weights(atom);
        if (mass <= 0.0) {
            throw DomainError("conditional: conditioning atom '" + nu.space.left().label(atom) +
                              "' has zero marginal mass");
        }
        RealVector w(nu.space.right().size());
        for (int b = 0; b < nu.space.right().size(); ++b) w(b) = nu.at(atom, b) / mass;
        return FiniteMeasure(nu.space.right(), std::move(w));
    }
    if (given == 2) {
        if (atom < 0 || atom >= nu.space.right().size()) {
            throw DomainError("conditional: atom index out of range");
        }
        double mass = m2.weights(atom);
        if (mass <= 0.0) {
            throw DomainError("conditional: conditioning atom '" + nu.space.right().label(atom) +
                              "' has zero marginal mass");
        }
        RealVector w(nu.space.left().size());
        for (int a = 0; a < nu.space.left().size(); ++a) w(a) = nu.at(a, atom) / mass;
        return FiniteMeasure(nu.space.left(), std::move(w));
    }
    throw DomainError("conditional: 'given' must be 1 or 2");
}

struct DisintegrationCheckReport {
    int rectangles_checked = 0;
    double max_violation = 0.0;
    bool exhaustive = true;

    bool pass(const Tolerance& tol = {}) const { return max_violation <= tol.abs; }
};

// Verifies nu(A x B) = sum_{x1 in A} mu1(x1) nu(B | x1) and the symmetric
// identity over x2, for every product event A x B. Zero-mass conditioning atoms
// are skipped: they contribute zero to both sides.
inline DisintegrationCheckReport disintegration_check(const JointMeasure& nu,
                                                      const Tolerance& tol = {}) {
    (void)tol;
    auto [m1, m2] = marginals(nu);
    const FiniteSpace& x1 = nu.space.left();
    const FiniteSpace& x2 = nu.space.right();

    DisintegrationCheckReport report;
    report.exhaustive = x1.size() <= 6 && x2.size() <= 6;

    std::vector<Event> family1 =
        report.exhaustive ? all_events(x1) : atom_events(x1);
    std::vector<Event> family2 =
        report.exhaustive ? all_events(x2) : atom_events(x2);
    if (!report.exhaustive) {
        family1.push_back(Event::full(x1));
        family2.push_back(Event::full(x2));
    }

    for (const Event& a : family1) {
        for (const Event& b : family2) {
            double lhs = nu(rectangle(nu.space, a, b));
            double rhs1 = 0.0;
            for (int atom : a.members()) {
                double mass = m1.weights(atom);
                if (mass <= 0.0) continue;
                rhs1 += mass * conditional(nu, 1, atom)(b);
            }
            double rhs2 = 0.0;
            for (int atom : b.members()) {
                double mass = m2.weights(atom);
                if (mass <= 0.0) continue;
                rhs2 += mass * conditional(nu, 2, atom)(a);
            }
            report.max_violation =
                std::max({report.max_violation, std::abs(lhs - rhs1), std::abs(lhs - rhs2)});
            ++report.rectangles_checked;
        }
    }
    return report;
}

// True iff the coordinate pushforwards of nu equal (mu1, mu2) atom-wise.
inline bool is_polymorphism(const JointMeasure& nu, const FiniteMeasure& mu1,
                            const FiniteMeasure& mu2, const Tolerance& tol = {}) {
    if (nu.space.left() != mu1.space || nu.space.right() != mu2.space) {
        throw DomainError("is_polymorphism: marginal spaces do not match the product factors");
    }
    auto [m1, m2] = marginals(nu);
    return (m1.weights - mu1.weights).cwiseAbs().maxCoeff() <= tol.abs &&
           (m2.weights - mu2.weights).cwiseAbs().maxCoeff() <= tol.abs;
}

}  // namespace ncpoly
