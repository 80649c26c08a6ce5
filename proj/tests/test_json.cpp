#include <catch2/catch_amalgamated.hpp>

#include "ncpoly/json_io.hpp"
#include "ncpoly/random.hpp"

using namespace ncpoly;

TEST_CASE("matrix JSON: round-trip and schema") {
    Prng rng(151);
    ComplexMatrix m = random_matrix(rng, 3, 2);
    ComplexMatrix back = decode_matrix(encode(m));
    CHECK(max_abs(m - back) == 0.0);

    json j = encode(m);
    CHECK(j["rows"] == 3);
    CHECK(j["cols"] == 2);
    CHECK(j["data"].size() == 6);
    CHECK(j["data"][1].size() == 2);  // [re, im] pairs

    j["data"][0] = 1.5;  // not a pair
    CHECK_THROWS_AS(decode_matrix(j), DomainError);
    json truncated = encode(m);
    truncated["data"].erase(0);
    CHECK_THROWS_AS(decode_matrix(truncated), DimensionError);
    json nan = encode(m);
    nan["data"][0] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(decode_matrix(nan), DomainError);
}

TEST_CASE("matrix JSON: data is row-major") {
    ComplexMatrix m(2, 2);
    m << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);
    json j = encode(m);
    CHECK(j["data"][1][0] == 2.0);  // entry (0,1)
    CHECK(j["data"][2][0] == 3.0);  // entry (1,0)
}

TEST_CASE("space and event JSON round-trips") {
    FiniteSpace s({"a", "b", "c"});
    CHECK(decode_space(encode(s)) == s);

    ProductSpace p = product(s, FiniteSpace({"u", "v"}));
    ProductSpace back = decode_product_space(encode(p));
    CHECK(back.flat() == p.flat());

    Event e(s, {0, 2});
    Event eb = decode_event(encode(e));
    CHECK(eb == e);
    json ej = encode(e);
    CHECK(ej["members"] == json::array({"a", "c"}));
}

TEST_CASE("measure JSON round-trips preserve atom order") {
    Prng rng(152);
    FiniteSpace s = random_space(rng, 2, 5);
    FiniteMeasure mu = random_measure(rng, s);
    FiniteMeasure back = decode_measure(encode(mu));
    CHECK(back.space == mu.space);
    CHECK((back.weights - mu.weights).cwiseAbs().maxCoeff() == 0.0);

    ProductSpace xs = product(random_space(rng, 2, 3, "l"), random_space(rng, 2, 3, "r"));
    JointMeasure nu = random_joint(rng, xs);
    JointMeasure nb = decode_joint(encode(nu));
    CHECK((nb.weights - nu.weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK(encode(nu)["weights"].contains(xs.flat().label(0)));
}

TEST_CASE("povm JSON: round-trip, kind, product structure") {
    Prng rng(153);
    FiniteSpace s = random_space(rng, 2, 4);
    Povm q = random_povm(rng, s, 3);
    LoadedPovm lp = decode_povm(encode(q));
    CHECK(lp.kind == "povm");
    CHECK_FALSE(lp.structure.has_value());
    CHECK(lp.povm.space == q.space);
    for (int i = 0; i < s.size(); ++i) {
        CHECK(max_abs(lp.povm.effects[i] - q.effects[i]) == 0.0);
    }

    ProductSpace xs = product(random_space(rng, 2, 2, "l"), random_space(rng, 2, 2, "r"));
    Povm qp = random_povm(rng, xs.flat(), 2);
    LoadedPovm lpp = decode_povm(encode(qp, "pvm", xs));
    CHECK(lpp.kind == "pvm");
    REQUIRE(lpp.structure.has_value());
    CHECK(lpp.structure->flat() == xs.flat());

    json bad = encode(q);
    bad["effects"].erase(s.label(0));
    CHECK_THROWS_AS(decode_povm(bad), DomainError);
    json bad_kind = encode(q);
    bad_kind["kind"] = "banana";
    CHECK_THROWS_AS(decode_povm(bad_kind), DomainError);
}

TEST_CASE("kernel JSON: full grid and upper-triangle input") {
    Prng rng(154);
    OperatorKernel k = random_gram_kernel(rng, 3, 2);
    OperatorKernel back = decode_kernel(encode(k));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(max_abs(back.block(i, j) - k.block(i, j)) == 0.0);
    }

    // Blank out the strict lower triangle; Hermitian symmetry must fill it.
    json j = encode(k);
    for (int i = 0; i < 3; ++i) {
        for (int jj = 0; jj < i; ++jj) j["blocks"][i][jj] = nullptr;
    }
    OperatorKernel filled = decode_kernel(j);
    for (int i = 0; i < 3; ++i) {
        for (int jj = 0; jj < 3; ++jj) {
            CHECK(max_abs(filled.block(i, jj) - k.block(i, jj)) <= 1e-15);
        }
    }

    j["blocks"][0][1] = nullptr;
    j["blocks"][1][0] = nullptr;
    CHECK_THROWS_AS(decode_kernel(j), DomainError);
}

TEST_CASE("density JSON: split annotation and validation") {
    Prng rng(155);
    DensityOperator rho = random_density(rng, 6, std::make_pair(2, 3));
    DensityOperator back = decode_density(encode(rho));
    REQUIRE(back.split.has_value());
    CHECK(back.split->first == 2);
    CHECK(back.split->second == 3);
    CHECK(max_abs(back.matrix - rho.matrix) == 0.0);

    DensityOperator flat = random_density(rng, 3);
    CHECK(encode(flat)["split"].is_null());
    CHECK_FALSE(decode_density(encode(flat)).split.has_value());

    json j = encode(rho);
    j["dim"] = 5;
    CHECK_THROWS_AS(decode_density(j), DimensionError);
}

TEST_CASE("dilation JSON export carries blocks and isometry") {
    Prng rng(156);
    FiniteSpace s = random_space(rng, 2, 3);
    Povm q = random_povm(rng, s, 2);
    NaimarkDilation dil = dilate(q);
    json j = encode(dil);
    CHECK(j["big_dim"] == dil.big_dim);
    CHECK(decode_matrix(j["V"]).rows() == dil.big_dim);
    CHECK(j["blocks"].size() == static_cast<std::size_t>(s.size()));
    CHECK(j["blocks"][s.label(0)][0] == 0);
}
