// Acceptance suite: every criterion prints one PASS/FAIL line with its
// measured residuals and runtime; the process exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ncpoly/ncpoly.hpp"

using namespace ncpoly;

namespace {

struct Criterion {
    bool pass = true;
    std::string metrics;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// 1. Naimark dilation: 200 seeded POVMs (<= 5 atoms, dim <= 4), every event.
Criterion criterion_dilation() {
    auto start = std::chrono::steady_clock::now();
    double worst_recon = 0.0;
    double worst_isometry = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        Prng rng(Prng::split(0xd11a7e, static_cast<std::uint64_t>(trial)));
        FiniteSpace s = random_space(rng, 1, 5);
        Povm q = random_povm(rng, s, rng.uniform_int(1, 4));
        NaimarkDilation dil = dilate(q, rng.coin());
        worst_isometry = std::max(worst_isometry, isometry_residual(dil));
        for (const Event& a : all_events(s)) {
            worst_recon = std::max(worst_recon, max_abs(reconstruct(dil, a) - evaluate(q, a)));
        }
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = worst_recon <= 1e-8 && worst_isometry <= 1e-9 && elapsed <= 10.0;
    c.metrics = "max_event_residual=" + fmt(worst_recon) +
                " max_isometry_residual=" + fmt(worst_isometry) + " time=" + fmt(elapsed) + "s";
    return c;
}

// 2. Domination/derivative equivalence over planted and independent pairs.
Criterion criterion_equivalence() {
    auto start = std::chrono::steady_clock::now();
    int trials = 240;
    int disagreements = 0;
    int planted_count = 0, independent_count = 0;
    double worst_recovery = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Prng rng(Prng::split(0x7e57a11, static_cast<std::uint64_t>(trial)));
        int n = rng.uniform_int(1, 5);
        Eigen::Index d = rng.uniform_int(1, 3);
        OperatorKernel k = random_gram_kernel(rng, n, d);
        bool planted = trial % 2 == 0;
        ComplexMatrix gamma0;
        OperatorKernel l = [&]() {
            if (planted) {
                KernelFactorization f = factor(k);
                gamma0 = random_contraction(rng, f.rank);
                return planted_dominated_kernel(f, gamma0);
            }
            return rng.coin() ? random_gram_kernel(rng, n, d)
                              : random_gram_kernel(rng, n, d, rng.uniform_int(1, n));
        }();
        (planted ? planted_count : independent_count) += 1;

        bool dominated = leq(l, k);
        bool rn_ok = true;
        try {
            RadonNikodymDerivative rn = rn_derivative(l, k);
            if (planted) worst_recovery = std::max(worst_recovery, max_abs(rn.gamma - gamma0));
        } catch (const OrderingViolation&) {
            rn_ok = false;
        }
        if (dominated != rn_ok) ++disagreements;
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = disagreements == 0 && worst_recovery <= 1e-7 && elapsed <= 20.0;
    c.metrics = "trials=" + std::to_string(trials) + " (" + std::to_string(planted_count) +
                " planted, " + std::to_string(independent_count) +
                " independent) disagreements=" + std::to_string(disagreements) +
                " worst_gamma_recovery=" + fmt(worst_recovery) + " time=" + fmt(elapsed) + "s";
    return c;
}

// 3. Disintegration with both kernel dominations.
Criterion criterion_disintegration() {
    auto start = std::chrono::steady_clock::now();
    double worst_match = 0.0;
    double worst_margin = 0.0;  // most negative block-PSD margin seen
    for (int trial = 0; trial < 100; ++trial) {
        Prng rng(Prng::split(0x7e57c33, static_cast<std::uint64_t>(trial)));
        ProductSpace xs =
            product(random_space(rng, 1, 3, "a"), random_space(rng, 1, 3, "b"));
        Povm q = random_povm(rng, xs.flat(), rng.uniform_int(1, 3));
        QuantumPolymorphism qp = make_qpoly(q, xs);
        for (const Event& b : all_events(xs.right())) {
            DisintegrationResult r = disintegrate(qp, b);
            worst_match = std::max(worst_match, r.gamma_vs_projection);
            worst_margin = std::max(worst_margin, -r.leq_margin);
        }
        for (const Event& a : all_events(xs.left())) {
            DisintegrationResult r = disintegrate_left(qp, a);
            worst_match = std::max(worst_match, r.gamma_vs_projection);
            worst_margin = std::max(worst_margin, -r.leq_margin);
        }
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = worst_match <= 1e-7 && worst_margin <= 1e-9 && elapsed <= 60.0;
    c.metrics = "worst_gamma_vs_projection=" + fmt(worst_match) +
                " worst_domination_margin=" + fmt(worst_margin) + " time=" + fmt(elapsed) + "s";
    return c;
}

// 4. Tensor POVM rectangle identity and both tensor derivatives.
Criterion criterion_tensor() {
    auto start = std::chrono::steady_clock::now();
    double worst_rect = 0.0;
    double worst_rn = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Prng rng(Prng::split(0x7e57b22, static_cast<std::uint64_t>(trial)));
        Povm q1 = random_povm(rng, random_space(rng, 2, 3, "a"), 2);
        Povm q2 = random_povm(rng, random_space(rng, 2, 3, "b"), 2);
        worst_rect = std::max(worst_rect, tensor_rectangle_check(q1, q2).max_residual);
        TensorRnReport rn =
            tensor_rn_check(q1, q2, random_event(rng, q1.space), random_event(rng, q2.space));
        worst_rn = std::max({worst_rn, rn.right_residual, rn.left_residual});
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = worst_rect <= 1e-8 && worst_rn <= 1e-7 && elapsed <= 30.0;
    c.metrics = "worst_rectangle_residual=" + fmt(worst_rect) + " worst_derivative_residual=" + fmt(worst_rn) +
                " time=" + fmt(elapsed) + "s";
    return c;
}

// 5. Classical/quantum consistency on 100 probability tables.
Criterion criterion_classical() {
    auto start = std::chrono::steady_clock::now();
    double worst_conditional = 0.0;
    double worst_embed = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Prng rng(Prng::split(0xc1a55, static_cast<std::uint64_t>(trial)));
        ProductSpace xs =
            product(random_space(rng, 1, 4, "a"), random_space(rng, 1, 4, "b"));
        JointMeasure nu = random_joint(rng, xs, true, 0.15);
        auto [m1, m2] = marginals(nu);

        QuantumPolymorphism qp = make_qpoly(classical_embedding_povm(nu), xs);
        for (int b0 = 0; b0 < xs.right().size(); ++b0) {
            DisintegrationResult r = disintegrate(qp, Event(xs.right(), {b0}));
            for (int a = 0; a < xs.left().size(); ++a) {
                if (m1.weights(a) <= 0.0) continue;
                double expected = conditional(nu, 1, a).weights(b0);
                worst_conditional =
                    std::max(worst_conditional,
                             std::abs(r.conditional_weight(Event(xs.left(), {a})) - expected));
            }
        }

        DensityOperator rho = classical_embed(nu);
        auto [t1, t2] = partial_traces(rho);
        for (int a = 0; a < xs.left().size(); ++a) {
            worst_embed = std::max(worst_embed, std::abs(t1.matrix(a, a).real() - m1.weights(a)));
        }
        for (int b = 0; b < xs.right().size(); ++b) {
            worst_embed = std::max(worst_embed, std::abs(t2.matrix(b, b).real() - m2.weights(b)));
        }
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = worst_conditional <= 1e-10 && worst_embed <= 1e-12;
    c.metrics = "worst_conditional_residual=" + fmt(worst_conditional) +
                " worst_embed_commute_residual=" + fmt(worst_embed) + " time=" + fmt(elapsed) +
                "s";
    return c;
}

// 6. Covariance trace identity over 100 random triples.
Criterion criterion_covariance() {
    auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Prng rng(Prng::split(0xc0c0, static_cast<std::uint64_t>(trial)));
        FiniteSpace s = random_space(rng, 1, 6);
        Eigen::Index d = rng.uniform_int(1, 4);
        VectorField f = random_vector_field(rng, s, d);
        VectorField g = random_vector_field(rng, s, d);
        FiniteMeasure mu = random_measure(rng, s);
        CovarianceResult c = covariance_operator(f, g, mu);
        worst = std::max(worst, std::abs(c.trace_of_matrix - c.trace_by_sum) /
                                    std::max(1.0, std::abs(c.trace_by_sum)));
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = worst <= 1e-10;
    c.metrics = "worst_relative_residual=" + fmt(worst) + " time=" + fmt(elapsed) + "s";
    return c;
}

// 7. Scalar-kernel linking lemma over 100 random p.d. pairs.
Criterion criterion_linking() {
    auto start = std::chrono::steady_clock::now();
    double worst_slice = 0.0;
    int pd_failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Prng rng(Prng::split(0x52a, static_cast<std::uint64_t>(trial)));
        int n = rng.uniform_int(2, 5);
        ScalarKernel c1 = random_scalar_pd_kernel(rng, n);
        ScalarKernel c2 = random_scalar_pd_kernel(rng, n, rng.uniform_int(1, n));
        LinkedKernels linked = link_kernels(c1, c2, rng.uniform_int(2, 4));
        if (!is_pd(linked.kernel)) ++pd_failures;
        worst_slice = std::max(
            {worst_slice, max_abs(slice(linked.kernel, linked.rho1).values - c1.values),
             max_abs(slice(linked.kernel, linked.rho2).values - c2.values)});
    }
    double elapsed = seconds_since(start);
    Criterion c;
    c.pass = pd_failures == 0 && worst_slice <= 1e-12;
    c.metrics = "pd_failures=" + std::to_string(pd_failures) +
                " worst_slice_residual=" + fmt(worst_slice) + " time=" + fmt(elapsed) + "s";
    return c;
}

std::string run_cli_capture(const std::string& cli, const std::string& args,
                            const std::string& out_file, int& exit_code) {
    std::string cmd = cli + " " + args + " > " + out_file + " 2>/dev/null";
    exit_code = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 8. Determinism of cmd_suite and the default-suite runtime budget.
Criterion criterion_determinism() {
    auto start = std::chrono::steady_clock::now();
    Criterion c;

    bool cli_identical = true;
    const char* cli = std::getenv("NCPOLY_CLI");
    if (cli != nullptr) {
        int code1 = 0, code2 = 0;
        std::string out1 =
            run_cli_capture(cli, "suite --seed 7 --trials 3", "/tmp/ncpoly_suite_1.json", code1);
        std::string out2 =
            run_cli_capture(cli, "suite --seed 7 --trials 3", "/tmp/ncpoly_suite_2.json", code2);
        cli_identical = !out1.empty() && out1 == out2 && code1 == code2 && code1 == 0;
    } else {
        SuiteConfig small;
        small.seed = 7;
        small.trials = 3;
        std::string a = suite_report_json(run_suite(small)).dump();
        std::string b = suite_report_json(run_suite(small, 1)).dump();
        cli_identical = a == b;
    }

    SuiteConfig config;  // defaults: trials=50, atoms<=4, dim<=3
    auto suite_start = std::chrono::steady_clock::now();
    SuiteReport report = run_suite(config);
    double suite_elapsed = seconds_since(suite_start);

    SuiteReport repeat = run_suite(config);
    bool verdicts_identical =
        suite_report_json(report).dump() == suite_report_json(repeat).dump();

    c.pass = cli_identical && verdicts_identical && report.pass() && suite_elapsed < 180.0;
    c.metrics = std::string("cli_reports_identical=") + (cli_identical ? "yes" : "no") +
                " inprocess_reports_identical=" + (verdicts_identical ? "yes" : "no") +
                " default_suite_pass=" + (report.pass() ? "yes" : "no") +
                " default_suite_time=" + fmt(suite_elapsed) + "s total_time=" +
                fmt(seconds_since(start)) + "s";
    return c;
}

}  // namespace

int main() {
    struct Entry {
        std::string name;
        Criterion (*run)();
    };
    const std::vector<Entry> criteria = {
        {"Naimark dilation reconstruction", criterion_dilation},
        {"kernel domination/derivative equivalence", criterion_equivalence},
        {"disintegration derivative and kernel dominations", criterion_disintegration},
        {"tensor POVM rectangle and derivative identities", criterion_tensor},
        {"classical/quantum consistency", criterion_classical},
        {"covariance trace identity", criterion_covariance},
        {"scalar-kernel linking lemma", criterion_linking},
        {"suite determinism and runtime", criterion_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Criterion result;
        try {
            result = criteria[i].run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.metrics = std::string("exception: ") + e.what();
        }
        if (!result.pass) ++failures;
        std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
                  << criteria[i].name << "  (" << result.metrics << ")\n"
                  << std::flush;
    }
    if (failures > 0) {
        std::cout << failures << " of " << criteria.size() << " acceptance criteria FAILED\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " acceptance criteria passed\n";
    return 0;
}
