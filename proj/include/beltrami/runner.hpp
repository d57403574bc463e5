#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "beltrami/constraints.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/functional.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/serialize.hpp"
#include "beltrami/solver.hpp"
#include "beltrami/transforms.hpp"
#include "beltrami/variation.hpp"

namespace beltrami {

enum class RunMode { solve, variation_check, gateaux_check, extremal };

struct CoefficientSpec {
    std::string preset = "zero"; // zero | radial_stretch | disk_indicator | file
    double stretch_k = 1.5;
    cdouble value{0.3, 0.0};
    double radius = 1.0;
    std::string path;
};

struct DirectionSpec {
    std::string preset = "add_constant"; // add_constant | file
    cdouble delta{0.0, 0.0};
    double radius = 1.0;
    std::string path;
};

struct ConstraintSpec {
    cdouble c{0.0, 0.0};
    double k = 0.0;
    double radius = 1.0;    // k applies inside this disk, zero outside
    std::string c_path;     // optional CFLD overrides
    std::string k_path;
};

struct ExtremalSpec {
    double theta = 0.5;
    double tol = 1e-10;
    int max_iter = 50;
    double active_tol = 1e-3;
    double boundary_tol = 1e-8;
    double direction_tol = 1e-6;
    int cone_samples = 64;
};

struct RunConfig {
    RunMode mode = RunMode::solve;
    std::string out_dir = "out";
    GridSpec grid{cdouble{0.5, 0.0}, 4.0, 256};
    double solver_tol = 1e-10;
    int solver_max_terms = 200;
    CoefficientSpec coefficient;
    DirectionSpec direction;
    std::vector<double> epsilons;
    std::vector<cdouble> targets;
    std::vector<Atom> atoms;
    ConstraintSpec constraints;
    ExtremalSpec extremal;
    unsigned threads = 1;
};

// --- config text format -------------------------------------------------
//
// Flat key = value lines grouped by [section] headers; '#' starts a
// comment. Unknown sections or keys are hard errors.

namespace cfgdetail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: cannot parse number '" + s + "' for key " + key);
    }
}

inline int parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: cannot parse integer '" + s + "' for key " + key);
    }
}

/// Accepts "a", "bi", "a+bi", "a-bi"; a bare "i" means unit imaginary part.
inline cdouble parse_complex(std::string s, const std::string& key) {
    s = trim(s);
    std::string packed;
    for (const char ch : s)
        if (ch != ' ' && ch != '\t') packed += ch;
    if (packed.empty()) throw config_error("config: empty complex value for key " + key);
    if (packed.back() == 'i' || packed.back() == 'I') {
        packed.pop_back();
        // split off the real part, if any, before the trailing sign
        std::size_t split = std::string::npos;
        for (std::size_t p = packed.size(); p-- > 1;) {
            if ((packed[p] == '+' || packed[p] == '-') &&
                packed[p - 1] != 'e' && packed[p - 1] != 'E') {
                split = p;
                break;
            }
        }
        std::string re_part = "0", im_part = packed;
        if (split != std::string::npos) {
            re_part = packed.substr(0, split);
            im_part = packed.substr(split);
        }
        if (im_part.empty() || im_part == "+") im_part = "1";
        if (im_part == "-") im_part = "-1";
        return cdouble(parse_double(re_part, key), parse_double(im_part, key));
    }
    return cdouble(parse_double(packed, key), 0.0);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

struct RawConfig {
    // section -> (key -> value); the sectionless prefix uses ""
    std::map<std::string, std::map<std::string, std::string>> entries;

    const std::string* find(const std::string& section, const std::string& key) const {
        const auto s = entries.find(section);
        if (s == entries.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
};

inline RawConfig parse_raw(std::istream& is) {
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: malformed section header at line " +
                                   std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            raw.entries[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config: empty key at line " + std::to_string(lineno));
        if (!raw.entries[section].emplace(key, value).second)
            throw config_error("config: duplicate key '" + key + "' in section [" + section + "]");
    }
    return raw;
}

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"mode", "out_dir", "threads"}},
        {"grid", {"n", "half_width", "center"}},
        {"solver", {"tol", "max_terms"}},
        {"coefficient", {"preset", "K", "value", "radius", "path"}},
        {"direction", {"preset", "delta", "radius", "path"}},
        {"variation", {"epsilons", "targets"}},
        {"functional", {"atoms"}},
        {"constraints", {"c", "k", "radius", "c_path", "k_path"}},
        {"extremal", {"theta", "tol", "max_iter", "active_tol", "boundary_tol",
                      "direction_tol", "cone_samples"}},
    };
    return keys;
}

} // namespace cfgdetail

inline RunConfig parse_config(std::istream& is) {
    using namespace cfgdetail;
    const RawConfig raw = parse_raw(is);

    for (const auto& [section, kv] : raw.entries) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end())
            throw config_error("config: unknown section [" + section + "]");
        for (const auto& [key, value] : kv)
            if (!known->second.count(key))
                throw config_error("config: unknown key '" + key + "' in section [" + section + "]");
    }

    RunConfig cfg;
    if (const auto* v = raw.find("", "mode")) {
        if (*v == "solve") cfg.mode = RunMode::solve;
        else if (*v == "variation_check") cfg.mode = RunMode::variation_check;
        else if (*v == "gateaux_check") cfg.mode = RunMode::gateaux_check;
        else if (*v == "extremal") cfg.mode = RunMode::extremal;
        else throw config_error("config: unknown mode '" + *v + "'");
    } else {
        throw config_error("config: missing required key 'mode'");
    }
    if (const auto* v = raw.find("", "out_dir")) cfg.out_dir = *v;
    if (const auto* v = raw.find("", "threads")) cfg.threads = static_cast<unsigned>(
        std::max(1, parse_int(*v, "threads")));

    if (const auto* v = raw.find("grid", "n")) cfg.grid.n = parse_int(*v, "n");
    if (const auto* v = raw.find("grid", "half_width")) cfg.grid.half_width = parse_double(*v, "half_width");
    if (const auto* v = raw.find("grid", "center")) cfg.grid.center = parse_complex(*v, "center");

    if (const auto* v = raw.find("solver", "tol")) cfg.solver_tol = parse_double(*v, "tol");
    if (const auto* v = raw.find("solver", "max_terms")) cfg.solver_max_terms = parse_int(*v, "max_terms");

    if (const auto* v = raw.find("coefficient", "preset")) cfg.coefficient.preset = *v;
    if (const auto* v = raw.find("coefficient", "K")) cfg.coefficient.stretch_k = parse_double(*v, "K");
    if (const auto* v = raw.find("coefficient", "value")) cfg.coefficient.value = parse_complex(*v, "value");
    if (const auto* v = raw.find("coefficient", "radius")) cfg.coefficient.radius = parse_double(*v, "radius");
    if (const auto* v = raw.find("coefficient", "path")) cfg.coefficient.path = *v;

    if (const auto* v = raw.find("direction", "preset")) cfg.direction.preset = *v;
    if (const auto* v = raw.find("direction", "delta")) cfg.direction.delta = parse_complex(*v, "delta");
    if (const auto* v = raw.find("direction", "radius")) cfg.direction.radius = parse_double(*v, "radius");
    if (const auto* v = raw.find("direction", "path")) cfg.direction.path = *v;

    if (const auto* v = raw.find("variation", "epsilons"))
        for (const std::string& tok : split(*v, ','))
            cfg.epsilons.push_back(parse_double(tok, "epsilons"));
    if (const auto* v = raw.find("variation", "targets"))
        for (const std::string& tok : split(*v, ';'))
            cfg.targets.push_back(parse_complex(tok, "targets"));

    if (const auto* v = raw.find("functional", "atoms")) {
        for (const std::string& tok : split(*v, ';')) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw config_error("config: atom entries use 'zeta : weight', got '" + tok + "'");
            cfg.atoms.push_back(Atom{parse_complex(tok.substr(0, colon), "atoms"),
                                     parse_complex(tok.substr(colon + 1), "atoms")});
        }
    }

    if (const auto* v = raw.find("constraints", "c")) cfg.constraints.c = parse_complex(*v, "c");
    if (const auto* v = raw.find("constraints", "k")) cfg.constraints.k = parse_double(*v, "k");
    if (const auto* v = raw.find("constraints", "radius")) cfg.constraints.radius = parse_double(*v, "radius");
    if (const auto* v = raw.find("constraints", "c_path")) cfg.constraints.c_path = *v;
    if (const auto* v = raw.find("constraints", "k_path")) cfg.constraints.k_path = *v;

    if (const auto* v = raw.find("extremal", "theta")) cfg.extremal.theta = parse_double(*v, "theta");
    if (const auto* v = raw.find("extremal", "tol")) cfg.extremal.tol = parse_double(*v, "tol");
    if (const auto* v = raw.find("extremal", "max_iter")) cfg.extremal.max_iter = parse_int(*v, "max_iter");
    if (const auto* v = raw.find("extremal", "active_tol")) cfg.extremal.active_tol = parse_double(*v, "active_tol");
    if (const auto* v = raw.find("extremal", "boundary_tol")) cfg.extremal.boundary_tol = parse_double(*v, "boundary_tol");
    if (const auto* v = raw.find("extremal", "direction_tol")) cfg.extremal.direction_tol = parse_double(*v, "direction_tol");
    if (const auto* v = raw.find("extremal", "cone_samples")) cfg.extremal.cone_samples = parse_int(*v, "cone_samples");

    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("config: cannot open " + path);
    return parse_config(is);
}

// --- field construction from specs ---------------------------------------

inline ComplexField build_coefficient_field(const RunConfig& cfg) {
    const CoefficientSpec& c = cfg.coefficient;
    if (c.preset == "zero") return ComplexField(cfg.grid);
    if (c.preset == "radial_stretch") return make_radial_stretch_mu(cfg.grid, c.stretch_k);
    if (c.preset == "disk_indicator") return make_disk_indicator_mu(cfg.grid, c.value, c.radius);
    if (c.preset == "file") {
        ComplexField f = load_cfld(c.path);
        require_same_grid(f.spec, cfg.grid, "coefficient file");
        return f;
    }
    throw config_error("config: unknown coefficient preset '" + c.preset + "'");
}

inline ComplexField build_direction_nu(const RunConfig& cfg, const ComplexField& mu) {
    const DirectionSpec& d = cfg.direction;
    if (d.preset == "add_constant") {
        ComplexField nu = mu;
        const GridSpec& s = mu.spec;
        for (int j = 0; j < s.n; ++j)
            for (int k = 0; k < s.n; ++k)
                if (std::abs(s.cell_center(j, k)) < d.radius) nu.at(j, k) += d.delta;
        return nu;
    }
    if (d.preset == "file") {
        ComplexField f = load_cfld(d.path);
        require_same_grid(f.spec, cfg.grid, "direction file");
        return f;
    }
    throw config_error("config: unknown direction preset '" + d.preset + "'");
}

inline DiskFamily build_disk_family(const RunConfig& cfg) {
    const ConstraintSpec& cs = cfg.constraints;
    ComplexField c = cs.c_path.empty()
                         ? make_field(cfg.grid, [&](cdouble) { return cs.c; })
                         : load_cfld(cs.c_path);
    RealField k = cs.k_path.empty()
                      ? make_real_field(cfg.grid, [&](cdouble z) {
                            return std::abs(z) < cs.radius ? cs.k : 0.0;
                        })
                      : to_real(load_cfld(cs.k_path));
    require_same_grid(c.spec, cfg.grid, "constraint centers");
    require_same_grid(k.spec, cfg.grid, "constraint radii");
    return DiskFamily(std::move(c), std::move(k));
}

// --- validation ------------------------------------------------------------

inline std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> diags;
    try {
        cfg.grid.validate();
    } catch (const error& e) {
        diags.emplace_back(e.what());
    }
    if (!(cfg.solver_tol > 0.0)) diags.push_back("solver tol must be positive");
    if (cfg.solver_max_terms < 1) diags.push_back("solver max_terms must be >= 1");

    const bool needs_direction =
        cfg.mode == RunMode::variation_check || cfg.mode == RunMode::gateaux_check;
    const bool needs_functional =
        cfg.mode == RunMode::gateaux_check || cfg.mode == RunMode::extremal;

    if (needs_direction || cfg.mode == RunMode::gateaux_check) {
        if (cfg.epsilons.empty()) diags.push_back("epsilon list is required for this mode");
        for (const double eps : cfg.epsilons) {
            if (!(eps > 0.0))
                diags.push_back("epsilon " + std::to_string(eps) + " must be positive");
            else if (eps > 0.5)
                diags.push_back("epsilon " + std::to_string(eps) +
                                " exceeds 1/2, the admissible variation range");
        }
    }
    if (cfg.mode == RunMode::variation_check && cfg.targets.empty())
        diags.push_back("variation_check requires at least one target");

    if (needs_functional) {
        if (cfg.atoms.empty()) diags.push_back("functional atoms are required for this mode");
        for (const Atom& a : cfg.atoms) {
            if (!cfg.grid.strictly_inside(a.zeta))
                diags.push_back("atom lies outside the covered grid square");
            if (std::abs(a.zeta) <= 1e-12 || std::abs(a.zeta - cdouble{1.0, 0.0}) <= 1e-12)
                diags.push_back("atom at a normalization point contributes zero derivative");
        }
    }

    if (cfg.mode == RunMode::extremal) {
        if (cfg.constraints.c_path.empty() && cfg.constraints.k_path.empty()) {
            if (std::abs(cfg.constraints.c) + cfg.constraints.k > 1.0 - kUnitDiskMargin)
                diags.push_back("constraint family leaves the unit disk (|c| + k >= 1)");
            if (cfg.constraints.k < 0.0) diags.push_back("constraint radius k must be >= 0");
        }
        if (!(cfg.extremal.theta > 0.0 && cfg.extremal.theta <= 1.0))
            diags.push_back("extremal damping theta must lie in (0, 1]");
        if (!(cfg.extremal.tol > 0.0)) diags.push_back("extremal tol must be positive");
        if (cfg.extremal.max_iter < 1) diags.push_back("extremal max_iter must be >= 1");
        if (cfg.extremal.cone_samples < 4) diags.push_back("cone_samples must be >= 4");
    }

    if (cfg.coefficient.preset == "file" && !std::filesystem::exists(cfg.coefficient.path))
        diags.push_back("coefficient file does not exist: " + cfg.coefficient.path);
    if (needs_direction && cfg.direction.preset == "file" &&
        !std::filesystem::exists(cfg.direction.path))
        diags.push_back("direction file does not exist: " + cfg.direction.path);

    return diags;
}

// --- output helpers ----------------------------------------------------------

namespace csvdetail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace csvdetail

struct RunOutcome {
    int exit_code = 0;
    std::vector<std::string> summary;
};

/// Exit codes: 0 ok, 2 config, 3 solver, 4 degeneracy, 5 extremal
/// non-convergence.
inline int classify_error_exit(const std::exception& e) {
    if (dynamic_cast<const config_error*>(&e)) return 2;
    if (dynamic_cast<const degeneracy_error*>(&e)) return 4;
    if (dynamic_cast<const extremal_error*>(&e)) return 5;
    if (dynamic_cast<const convergence_error*>(&e) ||
        dynamic_cast<const coefficient_error*>(&e) ||
        dynamic_cast<const regularity_error*>(&e))
        return 3;
    if (dynamic_cast<const error*>(&e)) return 2;
    return 1;
}

inline RunOutcome run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    RunOutcome out;

    {
        const std::vector<std::string> diags = validate(cfg);
        std::vector<std::string> hard;
        for (const std::string& d : diags)
            if (d.find("zero derivative") == std::string::npos) hard.push_back(d);
        if (!hard.empty()) {
            std::string msg = "config validation failed:";
            for (const std::string& d : hard) msg += "\n  - " + d;
            throw config_error(msg);
        }
    }

    fs::create_directories(cfg.out_dir);
    const auto outpath = [&](const std::string& name) {
        return (fs::path(cfg.out_dir) / name).string();
    };

    const TransformPlan plan(cfg.grid, cfg.threads);
    const Coefficient coeff{build_coefficient_field(cfg)};

    switch (cfg.mode) {
    case RunMode::solve: {
        const Solution sol = solve(plan, coeff, cfg.solver_tol, cfg.solver_max_terms);
        save_cfld(sol.f, outpath("f.cfld"));
        save_cfld(sol.f_z, outpath("f_z.cfld"));
        save_cfld(sol.f_zbar, outpath("f_zbar.cfld"));
        save_solution_sidecar(sol, outpath("solution.json"));
        out.summary.push_back("solve: neumann_terms=" + std::to_string(sol.neumann_terms) +
                              " residual=" + csvdetail::fmt(sol.residual));
        break;
    }
    case RunMode::variation_check: {
        const VariationDirection dir =
            make_direction(coeff.mu, build_direction_nu(cfg, coeff.mu));
        const auto rows = finite_difference_variation(plan, coeff, dir, cfg.epsilons,
                                                      cfg.targets, cfg.solver_tol,
                                                      cfg.solver_max_terms);
        std::ofstream csv(outpath("variation_check.csv"));
        csv << "epsilon,zeta_re,zeta_im,fd_re,fd_im,v_re,v_im,abs_err\n";
        for (const VariationRow& r : rows)
            csv << csvdetail::fmt(r.eps) << ',' << csvdetail::fmt(r.zeta.real()) << ','
                << csvdetail::fmt(r.zeta.imag()) << ',' << csvdetail::fmt(r.fd.real()) << ','
                << csvdetail::fmt(r.fd.imag()) << ',' << csvdetail::fmt(r.v.real()) << ','
                << csvdetail::fmt(r.v.imag()) << ',' << csvdetail::fmt(r.abs_err) << '\n';
        out.summary.push_back("variation_check: " + std::to_string(rows.size()) + " rows");
        break;
    }
    case RunMode::gateaux_check: {
        const VariationDirection dir =
            make_direction(coeff.mu, build_direction_nu(cfg, coeff.mu));
        const Functional fn(cfg.atoms);
        const auto rows = gateaux_check(plan, fn, coeff, dir, cfg.epsilons, cfg.solver_tol,
                                        cfg.solver_max_terms);
        std::ofstream csv(outpath("gateaux_check.csv"));
        csv << "epsilon,domega_fd,domega_gateaux,abs_err\n";
        for (const GateauxRow& r : rows)
            csv << csvdetail::fmt(r.eps) << ',' << csvdetail::fmt(r.fd) << ','
                << csvdetail::fmt(r.gateaux) << ',' << csvdetail::fmt(r.abs_err) << '\n';
        out.summary.push_back("gateaux_check: " + std::to_string(rows.size()) + " rows");
        break;
    }
    case RunMode::extremal: {
        const DiskFamily fam = build_disk_family(cfg);
        const Functional fn(cfg.atoms);
        FixedPointOptions opt;
        opt.theta = cfg.extremal.theta;
        opt.tol = cfg.extremal.tol;
        opt.max_iter = cfg.extremal.max_iter;
        opt.solver_tol = cfg.solver_tol;
        opt.solver_max_terms = cfg.solver_max_terms;
        opt.active_tol = cfg.extremal.active_tol;
        const FixedPointResult res = run_fixed_point(plan, fam, fn, opt);

        std::ofstream csv(outpath("runlog.csv"));
        csv << "iter,omega,boundary_residual,euler_residual,step_change\n";
        for (const ExtremalReport& r : res.reports)
            csv << r.iteration << ',' << csvdetail::fmt(r.omega_value) << ','
                << csvdetail::fmt(r.boundary_residual) << ','
                << csvdetail::fmt(r.euler_residual) << ','
                << csvdetail::fmt(r.step_change) << '\n';
        save_cfld(res.mu, outpath("mu.cfld"));
        save_cfld(res.sol.f, outpath("f.cfld"));

        const MaskedField B = field_B(fn, res.sol);
        const ConstraintFamily famv{fam};
        const BoundaryReport br = check_max_principle(res.mu, famv, B, cfg.extremal.active_tol,
                                                      cfg.extremal.boundary_tol);
        const DirectionsReport dr = check_directions(res.mu, famv, B, cfg.extremal.cone_samples,
                                                     cfg.extremal.active_tol,
                                                     cfg.extremal.direction_tol);
        const double euler = l2_norm(
            euler_defect(res.mu, fam, res.sol, B, cfg.extremal.active_tol));
        const double euler_bound = 1e-4 * res.sol.max_interior_fz();
        const bool euler_pass = euler <= euler_bound;

        nlohmann::json summary;
        summary["iterations"] = res.reports.size();
        summary["omega"] = res.reports.back().omega_value;
        summary["step_change"] = res.reports.back().step_change;
        summary["boundary_residual"] = br.max_dist;
        summary["boundary_pass"] = br.pass;
        summary["directions_min"] = dr.min_value;
        summary["directions_pass"] = dr.pass;
        summary["euler_residual"] = euler;
        summary["euler_pass"] = euler_pass;
        std::ofstream js(outpath("summary.json"));
        js << summary.dump(2) << "\n";

        out.summary.push_back("extremal: iterations=" + std::to_string(res.reports.size()));
        out.summary.push_back(std::string("  max_principle: ") + (br.pass ? "pass" : "FAIL") +
                              " (boundary_residual=" + csvdetail::fmt(br.max_dist) + ")");
        out.summary.push_back(std::string("  directions: ") + (dr.pass ? "pass" : "FAIL") +
                              " (min=" + csvdetail::fmt(dr.min_value) + ")");
        out.summary.push_back(std::string("  euler: ") + (euler_pass ? "pass" : "FAIL") +
                              " (l2=" + csvdetail::fmt(euler) + ")");
        break;
    }
    }
    return out;
}

} // namespace beltrami
