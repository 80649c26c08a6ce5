#include <catch2/catch_amalgamated.hpp>

#include "ncpoly/classical.hpp"
#include "ncpoly/random.hpp"

using namespace ncpoly;

namespace {

JointMeasure table(const ProductSpace& xs, std::vector<double> w) {
    return JointMeasure(xs, Eigen::Map<RealVector>(w.data(), static_cast<Eigen::Index>(w.size())));
}

}  // namespace

TEST_CASE("marginals: uniform and product measures") {
    ProductSpace xs = product(FiniteSpace({"a", "b"}), FiniteSpace({"u", "v"}));
    auto [m1, m2] = marginals(table(xs, {0.25, 0.25, 0.25, 0.25}));
    CHECK(m1.weights.isApprox(RealVector::Constant(2, 0.5)));
    CHECK(m2.weights.isApprox(RealVector::Constant(2, 0.5)));

    Prng rng(41);
    FiniteMeasure mu1 = random_measure(rng, xs.left());
    FiniteMeasure mu2 = random_measure(rng, xs.right());
    RealVector w(4);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) w(xs.pair_index(a, b)) = mu1.weights(a) * mu2.weights(b);
    }
    auto [p1, p2] = marginals(JointMeasure(xs, w));
    CHECK((p1.weights - mu1.weights * mu2.total()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p2.weights - mu2.weights * mu1.total()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("marginals: mass conservation on random joints") {
    Prng rng(42);
    ProductSpace xs = product(random_space(rng, 3, 3, "a"), random_space(rng, 4, 4, "b"));
    JointMeasure nu = random_joint(rng, xs);
    auto [m1, m2] = marginals(nu);
    CHECK(m1.total() == Catch::Approx(nu.total()).epsilon(1e-12));
    CHECK(m2.total() == Catch::Approx(nu.total()).epsilon(1e-12));
}

TEST_CASE("conditional: independence and deterministic coupling") {
    ProductSpace xs = product(FiniteSpace({"a", "b"}), FiniteSpace({"u", "v", "w"}));
    Prng rng(43);
    FiniteMeasure mu1 = random_measure(rng, xs.left());
    FiniteMeasure mu2 = random_measure(rng, xs.right(), true);
    RealVector w(6);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 3; ++b) w(xs.pair_index(a, b)) = mu1.weights(a) * mu2.weights(b);
    }
    JointMeasure nu(xs, w);
    for (int a = 0; a < 2; ++a) {
        CHECK((conditional(nu, 1, a).weights - mu2.weights).cwiseAbs().maxCoeff() < 1e-12);
    }

    ProductSpace sq = product(FiniteSpace({"a", "b"}), FiniteSpace({"a", "b"}));
    JointMeasure diag = table(sq, {0.5, 0.0, 0.0, 0.5});
    FiniteMeasure c = conditional(diag, 1, 0);
    CHECK(c.weights(0) == Catch::Approx(1.0));
    CHECK(c.weights(1) == 0.0);
}

TEST_CASE("conditional: normalization and zero-marginal error") {
    Prng rng(44);
    ProductSpace xs = product(random_space(rng, 2, 4, "a"), random_space(rng, 2, 4, "b"));
    JointMeasure nu = random_joint(rng, xs, false, 0.3);
    auto [m1, m2] = marginals(nu);
    for (int a = 0; a < xs.left().size(); ++a) {
        if (m1.weights(a) > 0.0) {
            CHECK(conditional(nu, 1, a).total() == Catch::Approx(1.0).epsilon(1e-12));
        } else {
            CHECK_THROWS_AS(conditional(nu, 1, a), DomainError);
        }
    }
}

TEST_CASE("disintegration_check: product, diagonal, sparse random") {
    ProductSpace xs = product(FiniteSpace({"a", "b"}), FiniteSpace({"u", "v"}));
    CHECK(disintegration_check(table(xs, {0.08, 0.12, 0.32, 0.48})).max_violation < 1e-14);

    ProductSpace sq = product(FiniteSpace({"a", "b"}), FiniteSpace({"a", "b"}));
    CHECK(disintegration_check(table(sq, {0.5, 0.0, 0.0, 0.5})).max_violation == 0.0);

    Prng rng(45);
    for (int t = 0; t < 10; ++t) {
        ProductSpace p = product(random_space(rng, 2, 5, "a"), random_space(rng, 2, 5, "b"));
        JointMeasure nu = random_joint(rng, p, false, 0.4);
        DisintegrationCheckReport report = disintegration_check(nu);
        CHECK(report.max_violation <= 1e-12);
        CHECK(report.exhaustive);
    }
}

TEST_CASE("b4/b5 reconstruction: nu(a,b) = mu1(a) nu(b|a)") {
    Prng rng(46);
    ProductSpace xs = product(random_space(rng, 2, 4, "a"), random_space(rng, 2, 4, "b"));
    JointMeasure nu = random_joint(rng, xs, false, 0.2);
    auto [m1, m2] = marginals(nu);
    for (int a = 0; a < xs.left().size(); ++a) {
        if (m1.weights(a) <= 0.0) continue;
        FiniteMeasure cond = conditional(nu, 1, a);
        for (int b = 0; b < xs.right().size(); ++b) {
            CHECK(nu.at(a, b) ==
                  Catch::Approx(m1.weights(a) * cond.weights(b)).margin(1e-13));
        }
    }
}

TEST_CASE("is_polymorphism: positive and negative cases") {
    ProductSpace xs = product(FiniteSpace({"a", "b"}), FiniteSpace({"u", "v"}));
    Prng rng(47);
    FiniteMeasure mu1 = random_measure(rng, xs.left());
    FiniteMeasure mu2 = random_measure(rng, xs.right(), true);
    RealVector w(4);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) w(xs.pair_index(a, b)) = mu1.weights(a) * mu2.weights(b);
    }
    // Product coupling of mu1 x mu2 has marginals (mu1 * |mu2|, mu2 * |mu1|);
    // with mu2 a probability measure the left marginal is mu1 itself.
    JointMeasure nu(xs, w);
    FiniteMeasure right(xs.right(), RealVector(mu2.weights * mu1.total()));
    CHECK(is_polymorphism(nu, mu1, right));

    JointMeasure uniform = table(xs, {0.25, 0.25, 0.25, 0.25});
    FiniteMeasure skew(xs.left(), (RealVector(2) << 0.9, 0.1).finished());
    FiniteMeasure half(xs.right(), RealVector::Constant(2, 0.5));
    CHECK_FALSE(is_polymorphism(uniform, skew, half));

    JointMeasure random = random_joint(rng, xs);
    auto [m1, m2] = marginals(random);
    CHECK(is_polymorphism(random, m1, m2));
}

TEST_CASE("coupling symmetry: swapping factors swaps marginals and transposes conditionals") {
    Prng rng(48);
    ProductSpace xs = product(random_space(rng, 2, 4, "a"), random_space(rng, 2, 4, "b"));
    JointMeasure nu = random_joint(rng, xs);
    ProductSpace sx = product(xs.right(), xs.left());
    RealVector w(sx.flat().size());
    for (int a = 0; a < xs.left().size(); ++a) {
        for (int b = 0; b < xs.right().size(); ++b) w(sx.pair_index(b, a)) = nu.at(a, b);
    }
    JointMeasure swapped(sx, w);
    auto [m1, m2] = marginals(nu);
    auto [s1, s2] = marginals(swapped);
    CHECK((m1.weights - s2.weights).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((m2.weights - s1.weights).cwiseAbs().maxCoeff() < 1e-14);
    for (int a = 0; a < xs.left().size(); ++a) {
        CHECK((conditional(nu, 1, a).weights - conditional(swapped, 2, a).weights)
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
}

TEST_CASE("polymorphism set is convex") {
    Prng rng(49);
    ProductSpace xs = product(random_space(rng, 2, 3, "a"), random_space(rng, 2, 3, "b"));
    JointMeasure nu1 = random_joint(rng, xs, true);
    auto [m1, m2] = marginals(nu1);
    // Second coupling with the same marginals: reweight along a cycle keeps
    // both marginals when the space is at least 2x2.
    RealVector w = nu1.weights;
    double eps = 0.5 * std::min({w(xs.pair_index(0, 0)), w(xs.pair_index(1, 1))});
    w(xs.pair_index(0, 0)) -= eps;
    w(xs.pair_index(1, 1)) -= eps;
    w(xs.pair_index(0, 1)) += eps;
    w(xs.pair_index(1, 0)) += eps;
    JointMeasure nu2(xs, w);
    REQUIRE(is_polymorphism(nu2, m1, m2, Tolerance{1e-12, 1e-12, 1e-10}));

    for (double lambda : {0.0, 0.3, 0.7, 1.0}) {
        JointMeasure mix(xs, RealVector(lambda * nu1.weights + (1.0 - lambda) * nu2.weights));
        CHECK(is_polymorphism(mix, m1, m2, Tolerance{1e-12, 1e-12, 1e-10}));
    }
}
