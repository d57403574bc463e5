#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/constraints.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"
#include "beltrami/variation.hpp"

namespace beltrami {

/// One point mass of the derivative measure: weight c at position zeta.
struct Atom {
    cdouble zeta;
    cdouble weight;
};

/// Gateaux-differentiable functional Omega(f) = Re sum c_j f(zeta_j),
/// represented by its finite atomic derivative measure.
class Functional {
public:
    explicit Functional(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw error("functional: needs at least one atom");
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!is_finite(atoms_[i].zeta) || !is_finite(atoms_[i].weight))
                throw error("functional: non-finite atom");
            for (std::size_t j = i + 1; j < atoms_.size(); ++j)
                if (std::abs(atoms_[i].zeta - atoms_[j].zeta) <= 1e-12)
                    throw error("functional: duplicate atom positions");
        }
    }

    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Atoms sitting at the pinned points 0 or 1 contribute no derivative;
    /// they are legal but worth surfacing to the caller.
    std::vector<std::size_t> pinned_atoms() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (std::abs(atoms_[i].zeta) <= 1e-12 ||
                std::abs(atoms_[i].zeta - cdouble{1.0, 0.0}) <= 1e-12)
                out.push_back(i);
        return out;
    }

private:
    std::vector<Atom> atoms_;
};

inline double evaluate(const Functional& fn, const Solution& sol) {
    double acc = 0.0;
    for (const Atom& a : fn.atoms()) {
        if (!sol.f.spec.strictly_inside(a.zeta))
            throw grid_error("evaluate: atom lies outside the grid");
        acc += (a.weight * interpolate(sol.f, a.zeta)).real();
    }
    return acc;
}

/// A field together with a per-cell validity mask (1 = usable). Masked
/// cells hold zero.
struct MaskedField {
    ComplexField field;
    std::vector<std::uint8_t> mask;

    double max_abs_unmasked() const {
        double m = 0.0;
        for (std::size_t i = 0; i < field.values.size(); ++i)
            if (mask[i]) m = std::max(m, std::abs(field.values[i]));
        return m;
    }
};

/// A(w) = (1/pi) sum_j c_j phi(w, f(zeta_j)) evaluated at the given field
/// of points; cells colliding with a kernel pole are masked.
inline MaskedField field_A(const Functional& fn, const Solution& sol,
                           const ComplexField& w_samples) {
    const double pi = 3.14159265358979323846;
    const double mask_radius = 3.0 * sol.f.spec.spacing() * sol.max_interior_fz();

    std::vector<cdouble> images;
    images.reserve(fn.atoms().size());
    for (const Atom& a : fn.atoms()) {
        if (!sol.f.spec.strictly_inside(a.zeta))
            throw grid_error("field_A: atom lies outside the grid");
        images.push_back(interpolate(sol.f, a.zeta));
    }

    MaskedField out{ComplexField(w_samples.spec),
                    std::vector<std::uint8_t>(w_samples.spec.cell_count(), 1)};
    for (std::size_t i = 0; i < w_samples.values.size(); ++i) {
        const cdouble w = w_samples.values[i];
        bool ok = std::abs(w) >= mask_radius && std::abs(w - cdouble{1.0, 0.0}) >= mask_radius;
        for (const cdouble& img : images)
            if (std::abs(w - img) < mask_radius) ok = false;
        if (!ok) {
            out.mask[i] = 0;
            continue;
        }
        cdouble acc{0.0, 0.0};
        for (std::size_t j = 0; j < images.size(); ++j)
            acc += fn.atoms()[j].weight * kernel_phi(w, images[j]);
        out.field.values[i] = acc / pi;
    }
    return out;
}

/// B(z) = A(f(z)) f_z(z)^2, additionally masked where f_z degenerates.
inline MaskedField field_B(const Functional& fn, const Solution& sol) {
    MaskedField a = field_A(fn, sol, sol.f);
    for (std::size_t i = 0; i < a.field.values.size(); ++i) {
        if (!a.mask[i]) continue;
        const cdouble fz = sol.f_z.values[i];
        if (std::abs(fz) < 1e-12) {
            a.mask[i] = 0;
            a.field.values[i] = cdouble{0.0, 0.0};
            continue;
        }
        a.field.values[i] *= fz * fz;
    }
    return a;
}

/// Degeneracy guard mirroring "differentiable without degeneration": the
/// gradient density must not vanish on more than 1% of unmasked cells.
inline bool is_degenerate(const MaskedField& a) {
    const double top = a.max_abs_unmasked();
    std::size_t unmasked = 0, tiny = 0;
    for (std::size_t i = 0; i < a.field.values.size(); ++i) {
        if (!a.mask[i]) continue;
        ++unmasked;
        if (std::abs(a.field.values[i]) <= 1e-12 * top) ++tiny;
    }
    if (unmasked == 0) return true;
    return static_cast<double>(tiny) > 0.01 * static_cast<double>(unmasked);
}

namespace detail {

/// Active cells: unmasked and carrying at least active_tol of the peak
/// gradient magnitude; only there do the necessary conditions bind
/// reliably.
inline std::vector<std::size_t> active_cells(const MaskedField& B, double active_tol) {
    const double top = B.max_abs_unmasked();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < B.field.values.size(); ++i)
        if (B.mask[i] && std::abs(B.field.values[i]) > active_tol * top) idx.push_back(i);
    return idx;
}

} // namespace detail

/// Boundary (maximum-principle) report: distance from mu(z) to the set
/// boundary over active cells.
struct BoundaryReport {
    double max_dist = 0.0;
    double mean_dist = 0.0;
    std::size_t active = 0;
    bool pass = false;
};

inline BoundaryReport check_max_principle(const ComplexField& mu, const ConstraintFamily& fam,
                                          const MaskedField& B, double active_tol,
                                          double boundary_tol) {
    require_same_grid(mu.spec, family_spec(fam), "check_max_principle");
    require_same_grid(mu.spec, B.field.spec, "check_max_principle");
    BoundaryReport rep;
    const auto cells = detail::active_cells(B, active_tol);
    rep.active = cells.size();
    double sum = 0.0;
    for (const std::size_t i : cells) {
        const double d = boundary_distance(fam, i, mu.values[i]);
        rep.max_dist = std::max(rep.max_dist, d);
        sum += d;
    }
    rep.mean_dist = cells.empty() ? 0.0 : sum / static_cast<double>(cells.size());
    rep.pass = rep.max_dist <= boundary_tol;
    return rep;
}

/// Directional-inequality report: worst Re(omega B) over active cells and
/// sampled admissible directions.
struct DirectionsReport {
    double min_value = 0.0;
    double scale = 0.0;        // max |B| over unmasked cells
    std::size_t active = 0;
    std::size_t directions_tested = 0;
    bool pass = false;
};

inline DirectionsReport check_directions(const ComplexField& mu, const ConstraintFamily& fam,
                                         const MaskedField& B, int samples, double active_tol,
                                         double direction_tol) {
    require_same_grid(mu.spec, family_spec(fam), "check_directions");
    require_same_grid(mu.spec, B.field.spec, "check_directions");
    DirectionsReport rep;
    rep.scale = B.max_abs_unmasked();
    const auto cells = detail::active_cells(B, active_tol);
    rep.active = cells.size();
    bool first = true;
    for (const std::size_t i : cells) {
        for (const cdouble omega : cone_directions(fam, i, mu.values[i], samples)) {
            const double v = (omega * B.field.values[i]).real();
            if (first || v < rep.min_value) {
                rep.min_value = v;
                first = false;
            }
            ++rep.directions_tested;
        }
    }
    if (first) rep.min_value = 0.0; // vacuous (all cones empty)
    rep.pass = rep.min_value >= -direction_tol * rep.scale;
    return rep;
}

/// Pointwise Euler-equation defect for a disk family; two algebraic routes
/// are evaluated and must agree:
///   route 1: |mu f_z - c f_z + k (conj(A.f)/|A.f|) conj(f_z)|
///   route 2: |mu - c + k conj(B)/|B|| |f_z|.
/// Inactive or masked cells report zero defect.
inline RealField euler_defect(const ComplexField& mu, const DiskFamily& fam, const Solution& sol,
                              const MaskedField& B, double active_tol = 1e-3) {
    require_same_grid(mu.spec, fam.spec(), "euler_defect");
    require_same_grid(mu.spec, B.field.spec, "euler_defect");
    if (B.max_abs_unmasked() == 0.0)
        throw degeneracy_error("euler_defect: gradient density vanishes identically");

    RealField out(mu.spec);
    const ConstraintFamily famv{fam};
    const auto cells = detail::active_cells(B, active_tol);
    for (const std::size_t i : cells) {
        const cdouble b = B.field.values[i];
        const cdouble fz = sol.f_z.values[i];
        if (std::abs(fz) < 1e-12) continue; // masked by field_B anyway
        const double absfz = std::abs(fz);
        const cdouble a_phase = std::conj(b) / std::abs(b) * (fz * fz) / (absfz * absfz);
        // conj(A.f)/|A.f| reconstructed from B = A(f) f_z^2
        const cdouble route1 = mu.values[i] * fz - fam.center(i) * fz +
                               fam.radius(i) * a_phase * std::conj(fz);
        const cdouble route2 = (mu.values[i] - fam.center(i) +
                                fam.radius(i) * std::conj(b) / std::abs(b)) * absfz;
        const double d1 = std::abs(route1);
        const double d2 = std::abs(route2);
        const double scale = std::max({d1, d2, 1e-30});
        if (std::abs(d1 - d2) > 1e-9 * scale)
            throw error("euler_defect: algebraic routes disagree at " + cell_name(mu.spec, i));
        out.values[i] = d2;
    }
    return out;
}

inline double l2_norm(const RealField& f) {
    double acc = 0.0;
    for (const double v : f.values) acc += v * v;
    return std::sqrt(acc) * f.h();
}

/// Per-iteration record of the extremal fixed-point search.
struct ExtremalReport {
    int iteration = 0;
    double omega_value = 0.0;
    double boundary_residual = 0.0;
    double euler_residual = 0.0;
    double step_change = 0.0;
};

struct FixedPointOptions {
    double theta = 0.5;          // damping in (0, 1]
    double tol = 1e-10;          // stop when the L2 step change drops below
    int max_iter = 50;
    double solver_tol = 1e-10;
    int solver_max_terms = 200;
    double active_tol = 1e-3;    // |B| threshold defining active cells
    double keep_tol = 1e-12;     // cells with |B| below keep mu unchanged
};

struct FixedPointResult {
    Solution sol;
    ComplexField mu;
    std::vector<ExtremalReport> reports;
};

/// Damped fixed-point iteration on the disk-family stationarity form
///   mu = c - k conj(B)/|B|,
/// starting from mu = c. Returns the converged coefficient together with
/// its solve and the per-iteration log.
inline FixedPointResult run_fixed_point(const TransformPlan& plan, const DiskFamily& fam,
                                        const Functional& fn, const FixedPointOptions& opt = {}) {
    if (!(opt.theta > 0.0 && opt.theta <= 1.0))
        throw error("run_fixed_point: damping theta must lie in (0, 1]");
    if (!(opt.tol > 0.0)) throw error("run_fixed_point: tol must be positive");
    require_same_grid(plan.spec(), fam.spec(), "run_fixed_point");

    const ConstraintFamily famv{fam};
    ComplexField mu = fam.centers();
    std::vector<ExtremalReport> reports;
    int rising = 0;
    double prev_step = 0.0;

    for (int it = 0; it < opt.max_iter; ++it) {
        Coefficient coeff{mu};
        Solution sol = solve(plan, coeff, opt.solver_tol, opt.solver_max_terms);
        MaskedField B = field_B(fn, sol);
        if (is_degenerate(B))
            throw degeneracy_error("run_fixed_point: functional degenerates along the iteration");

        const double maxB = B.max_abs_unmasked();
        ComplexField mu_next(mu.spec);
        for (std::size_t i = 0; i < mu.values.size(); ++i) {
            const cdouble b = B.field.values[i];
            if (!B.mask[i] || std::abs(b) <= opt.keep_tol * maxB) {
                mu_next.values[i] = mu.values[i];
                continue;
            }
            const cdouble target = fam.center(i) - fam.radius(i) * std::conj(b) / std::abs(b);
            mu_next.values[i] = (1.0 - opt.theta) * mu.values[i] + opt.theta * target;
        }

        double step = 0.0;
        for (std::size_t i = 0; i < mu.values.size(); ++i)
            step += std::norm(mu_next.values[i] - mu.values[i]);
        step = std::sqrt(step) * mu.h();

        ExtremalReport rep;
        rep.iteration = it;
        rep.omega_value = evaluate(fn, sol);
        rep.boundary_residual = check_max_principle(mu, famv, B, opt.active_tol, 0.0).max_dist;
        rep.euler_residual = l2_norm(euler_defect(mu, fam, sol, B, opt.active_tol));
        rep.step_change = step;
        reports.push_back(rep);

        if (step <= opt.tol)
            return FixedPointResult{std::move(sol), std::move(mu), std::move(reports)};

        if (it > 0 && step > prev_step) {
            if (++rising >= 5)
                throw extremal_error("run_fixed_point: step change grew for 5 consecutive "
                                     "iterations; try a smaller damping theta");
        } else {
            rising = 0;
        }
        prev_step = step;
        mu = std::move(mu_next);
    }
    throw extremal_error("run_fixed_point: no convergence within " +
                         std::to_string(opt.max_iter) + " iterations (last step change " +
                         std::to_string(reports.empty() ? 0.0 : reports.back().step_change) + ")");
}

/// One row of the Gateaux-derivative validation table.
struct GateauxRow {
    double eps;
    double fd;       // (Omega(f_eps) - Omega(f)) / eps from a re-solve
    double gateaux;  // Re sum c_j V(zeta_j)
    double abs_err;
};

inline std::vector<GateauxRow> gateaux_check(const TransformPlan& plan, const Functional& fn,
                                             const Coefficient& coeff, const VariationDirection& dir,
                                             std::span<const double> eps_list,
                                             double solver_tol = 1e-10, int solver_max_terms = 200) {
    const Solution base = solve(plan, coeff, solver_tol, solver_max_terms);
    const double omega0 = evaluate(fn, base);

    std::vector<cdouble> targets;
    targets.reserve(fn.atoms().size());
    for (const Atom& a : fn.atoms()) targets.push_back(a.zeta);
    const std::vector<cdouble> v = variation_field(base, dir, targets);
    double gateaux = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) gateaux += (fn.atoms()[j].weight * v[j]).real();

    std::vector<GateauxRow> rows;
    for (const double eps : eps_list) {
        check_epsilon_range(eps);
        if (eps <= 0.0) throw error("gateaux_check: eps must be positive");
        const Coefficient c_eps(mu_epsilon(dir, eps));
        const Solution sol_eps = solve(plan, c_eps, solver_tol, solver_max_terms);
        const double fd = (evaluate(fn, sol_eps) - omega0) / eps;
        rows.push_back({eps, fd, gateaux, std::abs(fd - gateaux)});
    }
    return rows;
}

} // namespace beltrami
