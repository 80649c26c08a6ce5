// ncpoly command-line front end: validate artifacts, build Naimark dilations,
// run kernel Radon-Nikodym disintegrations, execute the seeded property suite,
// and walk through the shipped demo fixtures.
//
// Contract: JSON reports on stdout, human-readable summaries on stderr.
// Exit codes: 0 = pass, 1 = violation, 2 = usage or parse failure.

#include <CLI11.hpp>

#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ncpoly/ncpoly.hpp"

namespace {

using namespace ncpoly;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

Tolerance base_tolerance(double tol_flag) {
    Tolerance tol;
    if (const char* env = std::getenv("NCPOLY_TOL")) {
        try {
            double v = std::stod(env);
            tol.abs = tol.rel = v;
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring unparsable NCPOLY_TOL='" << env << "'\n";
        }
    }
    if (tol_flag > 0.0) tol.abs = tol.rel = tol_flag;
    return tol;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return json::parse(in);
}

std::vector<std::string> split_labels(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

json report_checks(const ValidationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(json{{"axiom", c.axiom},
                              {"pass", c.pass},
                              {"residual", c.residual},
                              {"detail", c.detail}});
    }
    return checks;
}

void print_checks(const ValidationReport& report) {
    for (const auto& c : report.checks) {
        std::cerr << "  [" << (c.pass ? "ok" : "FAIL") << "] " << c.axiom
                  << "  residual=" << c.residual << "\n";
    }
}

int cmd_validate(const std::string& path, const Tolerance& tol) {
    json j = load_json(path);
    json report;
    bool pass = false;

    if (j.contains("effects")) {
        LoadedPovm loaded = decode_povm(j);
        ValidationReport vr = loaded.kind == "pvm" ? validate_pvm(loaded.povm, tol)
                                                   : validate_povm(loaded.povm, tol);
        pass = vr.pass();
        std::cerr << loaded.kind << " on " << loaded.povm.space.size() << " atoms, dim "
                  << loaded.povm.dim << ":\n";
        print_checks(vr);
        report = json{{"type", loaded.kind}, {"checks", report_checks(vr)}, {"pass", pass}};
    } else if (j.contains("blocks") && j.contains("indices")) {
        OperatorKernel k = decode_kernel(j);
        double min_ev = min_eigenvalue(k.block_matrix());
        pass = is_pd(k, tol);
        std::cerr << "operator kernel on " << k.size() << " indices, dim " << k.dim() << ":\n"
                  << "  [" << (pass ? "ok" : "FAIL")
                  << "] positive-definiteness  min_eigenvalue=" << min_ev << "\n";
        report = json{{"type", "kernel"},
                      {"checks",
                       json::array({json{{"axiom", "positive-definiteness"},
                                         {"pass", pass},
                                         {"residual", std::max(0.0, -min_ev)},
                                         {"detail", "block-Gram minimum eigenvalue"}}})},
                      {"pass", pass}};
    } else if (j.contains("matrix") && j.contains("dim")) {
        DensityOperator rho = decode_density(j);  // constructor validates
        pass = true;
        std::cerr << "density operator, dim " << rho.dim
                  << (rho.split ? " (split " + std::to_string(rho.split->first) + "x" +
                                      std::to_string(rho.split->second) + ")"
                                : "")
                  << ": PSD, unit trace\n";
        report = json{{"type", "density"},
                      {"checks",
                       json::array({json{{"axiom", "psd-and-unit-trace"},
                                         {"pass", true},
                                         {"residual", 0.0},
                                         {"detail", "validated on construction"}}})},
                      {"pass", true}};
    } else {
        throw DomainError("unrecognized artifact: expected a POVM, kernel, or density JSON");
    }

    std::cout << report.dump(2) << "\n";
    return pass ? kExitPass : kExitViolation;
}

int cmd_dilate(const std::string& path, bool compress, const std::string& out_path,
               const Tolerance& tol) {
    LoadedPovm loaded = decode_povm(load_json(path));
    NaimarkDilation dil = dilate(loaded.povm, compress, tol);
    double recon = reconstruction_residual(dil);
    double isom = isometry_residual(dil);
    std::cerr << "dilated " << loaded.povm.space.size() << "-atom dim-" << loaded.povm.dim
              << " POVM: big_dim=" << dil.big_dim << (compress ? " (compressed)" : "")
              << "\n  max event reconstruction residual = " << recon
              << "\n  isometry residual                 = " << isom << "\n";

    json report = encode(dil);
    report["reconstruction_residual"] = recon;
    report["isometry_residual"] = isom;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        out << report.dump(2) << "\n";
        std::cerr << "  wrote dilation to " << out_path << "\n";
    }
    std::cout << report.dump(2) << "\n";
    bool pass = recon <= 1e-8 && isom <= 1e-9;
    return pass ? kExitPass : kExitViolation;
}

int cmd_rn(const std::string& path, const std::string& event_csv, const std::string& side,
           const Tolerance& tol) {
    LoadedPovm loaded = decode_povm(load_json(path));
    if (!loaded.structure) {
        throw DomainError("rn: the POVM is not on a product space (space JSON needs left/right)");
    }
    const ProductSpace& xs = *loaded.structure;
    QuantumPolymorphism qp = make_qpoly(loaded.povm, xs, tol);

    const FiniteSpace& factor = side == "left" ? xs.left() : xs.right();
    Event cond = Event::from_labels(factor, split_labels(event_csv));
    DisintegrationResult result = side == "left" ? disintegrate_left(qp, cond, tol)
                                                 : disintegrate(qp, cond, tol);

    std::cerr << "dQ(" << (side == "left" ? ". x B" : "A x .") << ")/dQ_"
              << (side == "left" ? "2" : "1") << " at " << cond.to_label() << ":\n"
              << "  gamma spectrum     = [";
    for (Eigen::Index i = 0; i < result.gamma_spectrum.size(); ++i) {
        std::cerr << (i ? ", " : "") << result.gamma_spectrum(i);
    }
    std::cerr << "]\n  match residual     = " << result.gamma_vs_projection
              << "\n  rn reconstruction  = " << result.rn_residual
              << "\n  domination margin  = " << result.leq_margin << "\n";

    json spectrum = json::array();
    for (Eigen::Index i = 0; i < result.gamma_spectrum.size(); ++i) {
        spectrum.push_back(result.gamma_spectrum(i));
    }
    bool pass = result.pass(tol);
    json report{{"theorem", "4-2"},
                {"side", side},
                {"event", cond.labels()},
                {"gamma_spectrum", std::move(spectrum)},
                {"residuals",
                 json{{"gamma_vs_projection", result.gamma_vs_projection},
                      {"rn_reconstruction", result.rn_residual},
                      {"leq_margin", result.leq_margin},
                      {"compression_isometry", result.compression_residual}}},
                {"pass", pass}};
    std::cout << report.dump(2) << "\n";
    return pass ? kExitPass : kExitViolation;
}

int cmd_suite(const SuiteConfig& config) {
    SuiteReport report = run_suite(config);
    for (const auto& p : report.properties) {
        std::cerr << "  [" << (p.failures == 0 ? "ok" : "FAIL") << "] " << p.module << "/"
                  << p.name << "  trials=" << p.trials << " failures=" << p.failures
                  << " worst_residual=" << p.worst_residual << "\n";
    }
    std::cerr << (report.pass() ? "suite PASS" : "suite FAIL") << " ("
              << report.properties.size() << " properties x " << report.config.trials
              << " trials)\n";
    std::cout << suite_report_json(report).dump(2) << "\n";
    return report.pass() ? kExitPass : kExitViolation;
}

// ---- demos -----------------------------------------------------------------

struct DemoIdentity {
    std::string name;
    double residual;
    double bound;
};

int finish_demo(const std::string& name, const std::vector<DemoIdentity>& identities) {
    bool pass = true;
    json list = json::array();
    for (const auto& id : identities) {
        bool ok = id.residual <= id.bound;
        pass = pass && ok;
        std::cerr << "  [" << (ok ? "ok" : "FAIL") << "] " << id.name
                  << "  residual=" << id.residual << " (bound " << id.bound << ")\n";
        list.push_back(
            json{{"name", id.name}, {"residual", id.residual}, {"bound", id.bound}});
    }
    std::cout << json{{"demo", name}, {"identities", std::move(list)}, {"pass", pass}}.dump(2)
              << "\n";
    return pass ? kExitPass : kExitViolation;
}

int demo_classical_bayes() {
    std::cerr << "Bayes/Rokhlin disintegration of a fixed 3x4 joint table\n";
    ProductSpace xs = product(FiniteSpace({"rain", "cloud", "sun"}),
                              FiniteSpace({"mon", "tue", "wed", "thu"}));
    RealVector w(12);
    w << 0.10, 0.05, 0.02, 0.03, 0.08, 0.12, 0.10, 0.05, 0.05, 0.10, 0.15, 0.15;
    JointMeasure nu(xs, w);
    auto [m1, m2] = marginals(nu);
    std::cerr << "  weather marginal: ";
    for (int a = 0; a < 3; ++a) std::cerr << xs.left().label(a) << "=" << m1.weights(a) << " ";
    std::cerr << "\n  day marginal:     ";
    for (int b = 0; b < 4; ++b) std::cerr << xs.right().label(b) << "=" << m2.weights(b) << " ";
    std::cerr << "\n  conditional nu(.|rain): ";
    FiniteMeasure cond = conditional(nu, 1, 0);
    for (int b = 0; b < 4; ++b) std::cerr << cond.weights(b) << " ";
    std::cerr << "\n";
    DisintegrationCheckReport report = disintegration_check(nu);
    std::cerr << "  checked " << report.rectangles_checked << " product rectangles\n";
    return finish_demo("classical-bayes",
                       {{"rectangle disintegration identities", report.max_violation, 1e-12}});
}

int demo_naimark() {
    std::cerr << "Naimark dilation of the qubit tetrahedron POVM\n";
    FiniteSpace s({"n0", "n1", "n2", "n3"});
    double r = 1.0 / std::sqrt(3.0);
    std::vector<std::array<double, 3>> axes = {
        {r, r, r}, {r, -r, -r}, {-r, r, -r}, {-r, -r, r}};
    std::vector<ComplexMatrix> effects;
    for (const auto& n : axes) {
        ComplexMatrix e(2, 2);
        e << Complex(1.0 + n[2], 0.0), Complex(n[0], -n[1]), Complex(n[0], n[1]),
            Complex(1.0 - n[2], 0.0);
        effects.push_back(0.25 * e);
    }
    Povm q(s, 2, std::move(effects));
    NaimarkDilation dil = dilate(q);
    std::cerr << "  big_dim = " << dil.big_dim << " (4 rank-1 effects, compressed would give 4)\n";
    double worst = 0.0;
    for (const Event& a : all_events(s)) {
        double resid = max_abs(reconstruct(dil, a) - evaluate(q, a));
        std::cerr << "  event " << a.to_label() << ": ||V*P(A)V - Q(A)|| = " << resid << "\n";
        worst = std::max(worst, resid);
    }
    NaimarkDilation compressed = dilate(q, true);
    return finish_demo("naimark", {{"V*V = I", isometry_residual(dil), 1e-9},
                                   {"V*P(A)V = Q(A) over all 16 events", worst, 1e-8},
                                   {"compressed dilation reconstruction",
                                    reconstruction_residual(compressed), 1e-8}});
}

int demo_disintegration() {
    std::cerr << "Kernel Radon-Nikodym derivative of a correlated product-space POVM\n";
    Prng rng(2024);
    ProductSpace xs = product(FiniteSpace({"a0", "a1"}), FiniteSpace({"b0", "b1"}));
    // A genuinely correlated joint POVM: a mixture of two product POVMs.
    Povm f1 = random_povm(rng, xs.left(), 2);
    Povm g1 = random_povm(rng, xs.right(), 2);
    Povm f2 = random_povm(rng, xs.left(), 2);
    Povm g2 = random_povm(rng, xs.right(), 2);
    Povm t1 = tensor_povm(f1, g1);
    Povm t2 = tensor_povm(f2, g2);
    std::vector<ComplexMatrix> mixed;
    for (std::size_t i = 0; i < t1.effects.size(); ++i) {
        mixed.push_back(0.5 * t1.effects[i] + 0.5 * t2.effects[i]);
    }
    QuantumPolymorphism qp = make_qpoly(Povm(xs.flat(), 4, std::move(mixed)), xs);
    Event b(xs.right(), {0});
    DisintegrationResult result = disintegrate(qp, b);
    std::cerr << "  conditioning event B = " << b.to_label() << "\n  gamma spectrum = [";
    for (Eigen::Index i = 0; i < result.gamma_spectrum.size(); ++i) {
        std::cerr << (i ? ", " : "") << result.gamma_spectrum(i);
    }
    std::cerr << "]\n";
    return finish_demo(
        "disintegration",
        {{"dQ(. x B)/dQ1 equals compressed P2(B)", result.gamma_vs_projection, 1e-7},
         {"L = W* Gamma W reconstruction", result.rn_residual, 1e-7},
         {"domination margin Q(. x B) <= Q1", std::max(0.0, -result.leq_margin), 1e-9},
         {"compression isometry", result.compression_residual, 1e-8}});
}

int demo_tensor() {
    std::cerr << "Tensor POVM rectangle and derivative identities\n";
    Prng rng(1729);
    Povm q1 = random_povm(rng, FiniteSpace({"a0", "a1", "a2"}), 2);
    Povm q2 = random_povm(rng, FiniteSpace({"b0", "b1"}), 2);
    TensorRectangleReport rect = tensor_rectangle_check(q1, q2);
    std::cerr << "  rectangles checked: " << rect.rectangles_checked << "\n";
    Event a(q1.space, {0, 2});
    Event b(q2.space, {1});
    TensorRnReport rn = tensor_rn_check(q1, q2, a, b);
    return finish_demo("tensor",
                       {{"tensor rectangle identity", rect.max_residual, 1e-8},
                        {"d(Q1xQ2)(. x B)/d(Q1xQ2)(. x X2) = I (x) P2(B)",
                         rn.right_residual, 1e-7},
                        {"d(Q1xQ2)(A x .)/d(Q1xQ2)(X1 x .) = P1(A) (x) I",
                         rn.left_residual, 1e-7}});
}

int demo_link_kernels() {
    std::cerr << "Linking two scalar kernels through one operator-valued kernel\n";
    const int n = 4;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("t" + std::to_string(i));
    // Gaussian kernel and Brownian min-kernel on four grid points.
    ComplexMatrix c1(n, n), c2(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            c1(i, j) = std::exp(-0.5 * (i - j) * (i - j));
            c2(i, j) = static_cast<double>(std::min(i, j) + 1);
        }
    }
    ScalarKernel k1(labels, c1), k2(labels, c2);
    LinkedKernels linked = link_kernels(k1, k2, 2);
    double r1 = max_abs(slice(linked.kernel, linked.rho1).values - c1);
    double r2 = max_abs(slice(linked.kernel, linked.rho2).values - c2);
    double pd_margin = std::max(0.0, -min_eigenvalue(linked.kernel.block_matrix()));
    std::cerr << "  K = c1 (x) |a><a| + c2 (x) |b><b| on dim 2, slices recover c1, c2\n";
    return finish_demo("link-kernels", {{"K is positive definite", pd_margin, 1e-12},
                                        {"tr(rho1 K) recovers c1", r1, 1e-12},
                                        {"tr(rho2 K) recovers c2", r2, 1e-12}});
}

int demo_entangled_marginals() {
    std::cerr << "Bell state and the product state share their partial traces\n";
    ComplexVector psi = ComplexVector::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    DensityOperator bell(psi * psi.adjoint(), std::make_pair(2, 2));
    auto [b1, b2] = partial_traces(bell);
    ComplexMatrix half = 0.5 * ComplexMatrix::Identity(2, 2);
    std::cerr << "  tr_2 |bell><bell| = I/2 (residual " << max_abs(b1.matrix - half) << ")\n";
    DensityOperator product_state(kron(half, half), std::make_pair(2, 2));
    auto [p1, p2] = partial_traces(product_state);
    bool bell_in = in_poly(bell, DensityOperator(half), DensityOperator(half));
    bool prod_in = in_poly(product_state, DensityOperator(half), DensityOperator(half));
    std::cerr << "  both the entangled and the product state sit in poly(I/2, I/2): "
              << (bell_in && prod_in ? "yes" : "NO") << "\n";
    return finish_demo(
        "entangled-marginals",
        {{"bell partial traces are I/2",
          std::max(max_abs(b1.matrix - half), max_abs(b2.matrix - half)), 1e-12},
         {"product partial traces are I/2",
          std::max(max_abs(p1.matrix - half), max_abs(p2.matrix - half)), 1e-12},
         {"membership agreement", (bell_in && prod_in) ? 0.0 : 1.0, 0.5}});
}

const std::vector<std::pair<std::string, int (*)()>>& demo_table() {
    static const std::vector<std::pair<std::string, int (*)()>> demos = {
        {"classical-bayes", demo_classical_bayes},
        {"naimark", demo_naimark},
        {"disintegration", demo_disintegration},
        {"tensor", demo_tensor},
        {"link-kernels", demo_link_kernels},
        {"entangled-marginals", demo_entangled_marginals},
    };
    return demos;
}

int cmd_demo(const std::string& name) {
    for (const auto& [demo_name, fn] : demo_table()) {
        if (demo_name == name) return fn();
    }
    std::cerr << "unknown demo '" << name << "'; available:\n";
    for (const auto& [demo_name, fn] : demo_table()) std::cerr << "  " << demo_name << "\n";
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ncpoly: POVMs, Naimark dilations, operator-valued kernels, and quantum "
                 "polymorphisms at desk scale"};
    app.require_subcommand(1);
    double tol_flag = 0.0;
    app.add_option("--tol", tol_flag, "override the absolute/relative tolerance")
        ->check(CLI::NonNegativeNumber);

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "validate a POVM/PVM, kernel, or density");
    validate->add_option("path", validate_path, "JSON artifact")->required();

    std::string dilate_path, dilate_out;
    bool compress = false;
    CLI::App* dilate_cmd = app.add_subcommand("dilate", "build a Naimark dilation");
    dilate_cmd->add_option("path", dilate_path, "POVM JSON")->required();
    dilate_cmd->add_flag("--compress", compress, "compress blocks to rank(E_j)");
    dilate_cmd->add_option("--out", dilate_out, "write the dilation JSON here");

    std::string rn_path, rn_event, rn_side = "right";
    CLI::App* rn = app.add_subcommand("rn", "kernel Radon-Nikodym disintegration");
    rn->add_option("path", rn_path, "product-space POVM JSON")->required();
    rn->add_option("--B", rn_event, "conditioning event as comma-separated atom labels")
        ->required();
    rn->add_option("--side", rn_side, "left|right factor carrying the event")
        ->check(CLI::IsMember({"left", "right"}));

    SuiteConfig config;
    CLI::App* suite = app.add_subcommand("suite", "run the seeded property-verification suite");
    suite->add_option("--seed", config.seed, "master seed");
    suite->add_option("--trials", config.trials, "trials per property")
        ->check(CLI::PositiveNumber);
    suite->add_option("--max-atoms", config.max_atoms, "atom-count bound for drawn spaces")
        ->check(CLI::PositiveNumber);
    suite->add_option("--max-dim", config.max_dim, "Hilbert dimension bound")
        ->check(CLI::PositiveNumber);

    std::string demo_name;
    CLI::App* demo = app.add_subcommand("demo", "run a named end-to-end fixture");
    demo->add_option("name", demo_name, "fixture name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    Tolerance tol = base_tolerance(tol_flag);
    config.tol = tol;

    try {
        if (validate->parsed()) return cmd_validate(validate_path, tol);
        if (dilate_cmd->parsed()) return cmd_dilate(dilate_path, compress, dilate_out, tol);
        if (rn->parsed()) return cmd_rn(rn_path, rn_event, rn_side, tol);
        if (suite->parsed()) return cmd_suite(config);
        if (demo->parsed()) return cmd_demo(demo_name);
    } catch (const json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kExitViolation;
    } catch (const DomainError& e) {
        std::cerr << "violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const InternalConsistencyError& e) {
        std::cerr << "internal consistency error: " << e.what() << "\n";
        return kExitViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
