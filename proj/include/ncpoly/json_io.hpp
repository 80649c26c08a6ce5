#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ncpoly/classical.hpp"
#include "ncpoly/dilation.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/opkernels.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/space.hpp"
#include "ncpoly/states.hpp"

namespace ncpoly {

using nlohmann::json;

// Matrices: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major, complex
// scalars always as two-element arrays of finite doubles.
inline json encode(const ComplexMatrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            data.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline ComplexMatrix decode_matrix(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        throw DomainError("matrix JSON must carry rows, cols, data");
    }
    Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw DimensionError("matrix JSON: negative dimensions");
    const json& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw DimensionError("matrix JSON: data length does not equal rows*cols");
    }
    ComplexMatrix m(rows, cols);
    Eigen::Index k = 0;
    for (const auto& entry : data) {
        if (!entry.is_array() || entry.size() != 2) {
            throw DomainError("matrix JSON: every entry must be a [re, im] pair");
        }
        double re = entry.at(0).get<double>();
        double im = entry.at(1).get<double>();
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw DomainError("matrix JSON: entries must be finite");
        }
        m(k / cols, k % cols) = Complex(re, im);
        ++k;
    }
    return m;
}

// Spaces: {"atoms": [...]}; product spaces as {"left": <space>, "right": <space>}.
inline json encode(const FiniteSpace& s) { return json{{"atoms", s.atoms()}}; }

inline FiniteSpace decode_space(const json& j) {
    if (!j.is_object() || !j.contains("atoms")) {
        throw DomainError("space JSON must carry an atoms array");
    }
    return FiniteSpace(j.at("atoms").get<std::vector<std::string>>());
}

inline bool is_product_space_json(const json& j) {
    return j.is_object() && j.contains("left") && j.contains("right");
}

inline json encode(const ProductSpace& p) {
    return json{{"left", encode(p.left())}, {"right", encode(p.right())}};
}

inline ProductSpace decode_product_space(const json& j) {
    if (!is_product_space_json(j)) {
        throw DomainError("product space JSON must carry left and right spaces");
    }
    return ProductSpace(decode_space(j.at("left")), decode_space(j.at("right")));
}

// Events: {"space": <space>, "members": ["a", "c"]} with members as labels.
inline json encode(const Event& e) {
    return json{{"space", encode(e.space())}, {"members", e.labels()}};
}

inline Event decode_event(const json& j) {
    if (!j.is_object() || !j.contains("space") || !j.contains("members")) {
        throw DomainError("event JSON must carry space and members");
    }
    const json& sj = j.at("space");
    FiniteSpace s = is_product_space_json(sj) ? decode_product_space(sj).flat() : decode_space(sj);
    return Event::from_labels(s, j.at("members").get<std::vector<std::string>>());
}

// Measures: {"space": ..., "weights": {"a": 0.25, ...}}.
inline json encode(const FiniteMeasure& mu) {
    json weights = json::object();
    for (int i = 0; i < mu.space.size(); ++i) weights[mu.space.label(i)] = mu.weights(i);
    return json{{"space", encode(mu.space)}, {"weights", std::move(weights)}};
}

inline FiniteMeasure decode_measure(const json& j) {
    if (!j.is_object() || !j.contains("space") || !j.contains("weights")) {
        throw DomainError("measure JSON must carry space and weights");
    }
    FiniteSpace s = decode_space(j.at("space"));
    RealVector w = RealVector::Zero(s.size());
    for (const auto& [label, value] : j.at("weights").items()) {
        w(s.index_of(label)) = value.get<double>();
    }
    return FiniteMeasure(s, std::move(w));
}

// Joint measures index weights by "a|b" compound labels of the flat space.
inline json encode(const JointMeasure& nu) {
    json weights = json::object();
    for (int i = 0; i < nu.space.flat().size(); ++i) {
        weights[nu.space.flat().label(i)] = nu.weights(i);
    }
    return json{{"space", encode(nu.space)}, {"weights", std::move(weights)}};
}

inline JointMeasure decode_joint(const json& j) {
    if (!j.is_object() || !j.contains("space") || !j.contains("weights")) {
        throw DomainError("joint measure JSON must carry space and weights");
    }
    ProductSpace p = decode_product_space(j.at("space"));
    RealVector w = RealVector::Zero(p.flat().size());
    for (const auto& [label, value] : j.at("weights").items()) {
        w(p.flat().index_of(label)) = value.get<double>();
    }
    return JointMeasure(p, std::move(w));
}

// POVMs: {"kind": "povm"|"pvm", "space": ..., "dim": d, "effects": {atom: matrix}}.
inline json encode(const Povm& q, const std::string& kind = "povm",
                   const std::optional<ProductSpace>& structure = std::nullopt) {
    json effects = json::object();
    for (int i = 0; i < q.space.size(); ++i) {
        effects[q.space.label(i)] = encode(q.effects[static_cast<std::size_t>(i)]);
    }
    json space_json = structure ? encode(*structure) : encode(q.space);
    return json{{"kind", kind},
                {"space", std::move(space_json)},
                {"dim", q.dim},
                {"effects", std::move(effects)}};
}

struct LoadedPovm {
    Povm povm;
    std::string kind;                       // "povm" or "pvm"
    std::optional<ProductSpace> structure;  // present when the space JSON is a product
};

inline LoadedPovm decode_povm(const json& j) {
    if (!j.is_object() || !j.contains("space") || !j.contains("dim") || !j.contains("effects")) {
        throw DomainError("POVM JSON must carry space, dim, effects");
    }
    std::string kind = j.value("kind", std::string("povm"));
    if (kind != "povm" && kind != "pvm") {
        throw DomainError("POVM JSON: kind must be 'povm' or 'pvm'");
    }
    std::optional<ProductSpace> structure;
    FiniteSpace s = [&]() {
        const json& sj = j.at("space");
        if (is_product_space_json(sj)) {
            structure = decode_product_space(sj);
            return structure->flat();
        }
        return decode_space(sj);
    }();
    Eigen::Index dim = j.at("dim").get<Eigen::Index>();
    const json& effects_json = j.at("effects");
    std::vector<ComplexMatrix> effects(static_cast<std::size_t>(s.size()));
    std::vector<bool> seen(static_cast<std::size_t>(s.size()), false);
    for (const auto& [label, value] : effects_json.items()) {
        int idx = s.index_of(label);
        effects[static_cast<std::size_t>(idx)] = decode_matrix(value);
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (int i = 0; i < s.size(); ++i) {
        if (!seen[static_cast<std::size_t>(i)]) {
            throw DomainError("POVM JSON: missing effect for atom '" + s.label(i) + "'");
        }
    }
    return {Povm(std::move(s), dim, std::move(effects)), std::move(kind), std::move(structure)};
}

// Kernels: {"indices": [...], "dim": d, "blocks": [[matrix|null, ...], ...]};
// only the upper triangle is required on input, the lower is filled by
// Hermitian symmetry.
inline json encode(const OperatorKernel& k) {
    json rows = json::array();
    for (int i = 0; i < k.size(); ++i) {
        json row = json::array();
        for (int j = 0; j < k.size(); ++j) row.push_back(encode(k.block(i, j)));
        rows.push_back(std::move(row));
    }
    return json{{"indices", k.labels()}, {"dim", k.dim()}, {"blocks", std::move(rows)}};
}

inline OperatorKernel decode_kernel(const json& j) {
    if (!j.is_object() || !j.contains("indices") || !j.contains("dim") || !j.contains("blocks")) {
        throw DomainError("kernel JSON must carry indices, dim, blocks");
    }
    auto labels = j.at("indices").get<std::vector<std::string>>();
    Eigen::Index dim = j.at("dim").get<Eigen::Index>();
    const json& rows = j.at("blocks");
    const std::size_t n = labels.size();
    if (!rows.is_array() || rows.size() != n) {
        throw DimensionError("kernel JSON: blocks must be an n x n grid");
    }
    std::vector<std::optional<ComplexMatrix>> grid(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = rows.at(i);
        if (!row.is_array() || row.size() != n) {
            throw DimensionError("kernel JSON: blocks must be an n x n grid");
        }
        for (std::size_t jj = 0; jj < n; ++jj) {
            if (!row.at(jj).is_null()) grid[i * n + jj] = decode_matrix(row.at(jj));
        }
    }
    std::vector<ComplexMatrix> blocks(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t jj = 0; jj < n; ++jj) {
            if (grid[i * n + jj]) {
                blocks[i * n + jj] = *grid[i * n + jj];
            } else if (grid[jj * n + i]) {
                blocks[i * n + jj] = grid[jj * n + i]->adjoint();
            } else {
                throw DomainError("kernel JSON: block (" + labels[i] + ", " + labels[jj] +
                                  ") missing from both triangles");
            }
        }
    }
    return OperatorKernel(std::move(labels), dim, std::move(blocks));
}

// Density operators: {"dim": d, "split": [d1, d2] | null, "matrix": <matrix>}.
inline json encode(const DensityOperator& rho) {
    json split = rho.split ? json{rho.split->first, rho.split->second} : json(nullptr);
    return json{{"dim", rho.dim}, {"split", std::move(split)}, {"matrix", encode(rho.matrix)}};
}

inline DensityOperator decode_density(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("matrix")) {
        throw DomainError("density JSON must carry dim and matrix");
    }
    ComplexMatrix m = decode_matrix(j.at("matrix"));
    if (m.rows() != j.at("dim").get<Eigen::Index>()) {
        throw DimensionError("density JSON: dim does not match the matrix");
    }
    std::optional<std::pair<Eigen::Index, Eigen::Index>> split;
    if (j.contains("split") && !j.at("split").is_null()) {
        const json& sj = j.at("split");
        if (!sj.is_array() || sj.size() != 2) {
            throw DomainError("density JSON: split must be [d1, d2] or null");
        }
        split = std::make_pair(sj.at(0).get<Eigen::Index>(), sj.at(1).get<Eigen::Index>());
    }
    return DensityOperator(std::move(m), split);
}

// Dilations: {"big_dim": D, "V": <matrix>, "blocks": {atom: [start, end], ...}}.
inline json encode(const NaimarkDilation& dil) {
    json blocks = json::object();
    for (int i = 0; i < dil.source.space.size(); ++i) {
        const auto& [start, end] = dil.blocks[static_cast<std::size_t>(i)];
        blocks[dil.source.space.label(i)] = json{start, end};
    }
    return json{{"big_dim", dil.big_dim},
                {"V", encode(dil.isometry)},
                {"blocks", std::move(blocks)},
                {"source", encode(dil.source)}};
}

}  // namespace ncpoly
