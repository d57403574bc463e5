#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beltrami/constraints.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"

namespace beltrami {

inline nlohmann::json grid_to_json(const GridSpec& spec) {
    return {{"center_re", spec.center.real()},
            {"center_im", spec.center.imag()},
            {"half_width", spec.half_width},
            {"n", spec.n}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec spec;
    spec.center = cdouble(j.at("center_re").get<double>(), j.at("center_im").get<double>());
    spec.half_width = j.at("half_width").get<double>();
    spec.n = j.at("n").get<int>();
    spec.validate();
    return spec;
}

/// Compact encoding for a constant-in-z polygon family: one vertex list
/// plus an optional mask of flat cell indices; cells outside the mask are
/// degenerate-flagged single points at the origin.
inline void save_polygon_family(const PolygonFamily& fam, const std::string& path,
                                const std::vector<std::size_t>* mask = nullptr) {
    nlohmann::json j;
    j["kind"] = "polygon_family";
    j["grid"] = grid_to_json(fam.spec());
    std::size_t reference = 0;
    if (mask && !mask->empty()) reference = mask->front();
    nlohmann::json verts = nlohmann::json::array();
    for (const cdouble& v : fam.points(reference)) verts.push_back({v.real(), v.imag()});
    j["vertices"] = verts;
    if (mask) j["mask"] = *mask;
    std::ofstream os(path);
    if (!os) throw io_error("polygon family: cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

inline PolygonFamily load_polygon_family(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("polygon family: cannot open for reading: " + path);
    nlohmann::json j;
    is >> j;
    if (j.value("kind", "") != "polygon_family")
        throw io_error("polygon family: wrong kind field in " + path);
    const GridSpec spec = grid_from_json(j.at("grid"));
    PolygonFamily::Polygon poly;
    for (const auto& v : j.at("vertices")) poly.push_back(cdouble(v.at(0), v.at(1)));
    if (!j.contains("mask")) return PolygonFamily(spec, poly);
    std::vector<PolygonFamily::Polygon> cells(spec.cell_count(),
                                              PolygonFamily::Polygon{cdouble{0.0, 0.0}});
    for (const auto& idx : j.at("mask")) cells.at(idx.get<std::size_t>()) = poly;
    return PolygonFamily(spec, std::move(cells), /*allow_degenerate=*/true);
}

/// Scalar sidecar accompanying the three CFLD fields of a solution.
inline void save_solution_sidecar(const Solution& sol, const std::string& path) {
    nlohmann::json j;
    j["k_sup"] = sol.coeff.k_sup;
    j["neumann_terms"] = sol.neumann_terms;
    j["residual"] = sol.residual;
    std::ofstream os(path);
    if (!os) throw io_error("sidecar: cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

struct SolutionScalars {
    double k_sup = 0.0;
    int neumann_terms = 0;
    double residual = 0.0;
};

inline SolutionScalars load_solution_sidecar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("sidecar: cannot open for reading: " + path);
    nlohmann::json j;
    is >> j;
    return SolutionScalars{j.at("k_sup").get<double>(), j.at("neumann_terms").get<int>(),
                           j.at("residual").get<double>()};
}

} // namespace beltrami
