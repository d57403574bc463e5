#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beltrami/constraints.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"

namespace beltrami {

/// An admissible variation direction from coefficient mu toward nu:
/// kappa = (nu - mu) / (1 - |mu|^2) must lie in the open unit ball of
/// L-infinity.
struct VariationDirection {
    ComplexField mu;
    ComplexField nu;
    ComplexField kappa;
    double k_inf = 0.0;
};

inline VariationDirection make_direction(const ComplexField& mu, const ComplexField& nu,
                                         const ConstraintFamily* fam = nullptr) {
    require_same_grid(mu.spec, nu.spec, "make_direction");
    VariationDirection dir{mu, nu, ComplexField(mu.spec), 0.0};
    for (std::size_t i = 0; i < mu.values.size(); ++i) {
        const double m2 = std::norm(mu.values[i]);
        if (!(m2 < 1.0))
            throw constraint_error("make_direction: |mu| >= 1 at " + cell_name(mu.spec, i));
        dir.kappa.values[i] = (nu.values[i] - mu.values[i]) / (1.0 - m2);
        dir.k_inf = std::max(dir.k_inf, std::abs(dir.kappa.values[i]));
    }
    if (!(dir.k_inf < 1.0))
        throw constraint_error("make_direction: direction is inadmissible, sup |kappa| = " +
                               std::to_string(dir.k_inf) + " >= 1");
    if (fam) {
        require_same_grid(mu.spec, family_spec(*fam), "make_direction");
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < mu.values.size(); ++i)
            if (!contains(*fam, i, mu.values[i]) || !contains(*fam, i, nu.values[i]))
                bad.push_back(i);
        if (!bad.empty())
            throw constraint_error("make_direction: mu/nu leave the constraint set at " +
                                       std::to_string(bad.size()) + " cells; first: " +
                                       cell_name(mu.spec, bad.front()),
                                   std::move(bad));
    }
    return dir;
}

inline void check_epsilon_range(double eps) {
    if (!(eps >= 0.0 && eps <= 0.5))
        throw error("epsilon " + std::to_string(eps) + " outside the admissible range [0, 1/2]");
}

/// Convex combination (1 - eps) mu + eps nu, eps in [0, 1/2].
inline ComplexField mu_epsilon(const VariationDirection& dir, double eps) {
    check_epsilon_range(eps);
    ComplexField out(dir.mu.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = (1.0 - eps) * dir.mu.values[i] + eps * dir.nu.values[i];
        if (!(std::abs(out.values[i]) < 1.0))
            throw constraint_error("mu_epsilon: |mu_eps| >= 1 at " + cell_name(out.spec, i));
    }
    return out;
}

/// Closed form eps kappa / (1 - eps kappa conj(mu)); the denominator is
/// bounded away from zero for eps <= 1/2 and sup |kappa| < 1.
inline ComplexField kappa_epsilon(const VariationDirection& dir, double eps) {
    check_epsilon_range(eps);
    ComplexField out(dir.mu.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const cdouble ek = eps * dir.kappa.values[i];
        out.values[i] = ek / (1.0 - ek * std::conj(dir.mu.values[i]));
    }
    return out;
}

/// Truncated series eps kappa sum_{m<=terms} (eps kappa conj(mu))^m for
/// cross-validation against the closed form.
inline ComplexField kappa_epsilon_series(const VariationDirection& dir, double eps, int terms) {
    check_epsilon_range(eps);
    ComplexField out(dir.mu.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const cdouble ek = eps * dir.kappa.values[i];
        const cdouble ratio = ek * std::conj(dir.mu.values[i]);
        cdouble power{1.0, 0.0};
        cdouble sum{0.0, 0.0};
        for (int m = 0; m <= terms; ++m) {
            sum += power;
            power *= ratio;
        }
        out.values[i] = ek * sum;
    }
    return out;
}

/// Variation kernel phi(w, w') = 1/(w - w') * w'/w * (w' - 1)/(w - 1).
/// Its zeros at w' = 0 and w' = 1 keep the normalization pinned under
/// perturbation.
inline cdouble kernel_phi(cdouble w, cdouble w_prime) {
    constexpr double pole_tol = 1e-14;
    if (std::abs(w - w_prime) <= pole_tol || std::abs(w) <= pole_tol ||
        std::abs(w - cdouble{1.0, 0.0}) <= pole_tol)
        throw singularity_error("kernel_phi: evaluation point within 1e-14 of a pole");
    return (1.0 / (w - w_prime)) * (w_prime / w) * ((w_prime - 1.0) / (w - 1.0));
}

/// First-order variation V(zeta) of Theorem-style form
///   f_eps(zeta) ~ f(zeta) + eps V(zeta),
///   V(zeta) = -(1/pi) sum (nu - mu)(z) phi(f(z), f(zeta)) f_z(z)^2 h^2,
/// with cells masked where f(z) falls within 3 h max|f_z| of f(zeta), 0 or 1.
inline std::vector<cdouble> variation_field(const Solution& sol, const VariationDirection& dir,
                                            std::span<const cdouble> targets) {
    require_same_grid(sol.f.spec, dir.mu.spec, "variation_field");
    const GridSpec& spec = sol.f.spec;
    const double mask_radius = 3.0 * spec.spacing() * sol.max_interior_fz();
    const double pi = 3.14159265358979323846;

    std::vector<cdouble> images(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!spec.strictly_inside(targets[t]))
            throw grid_error("variation_field: target outside the grid");
        images[t] = interpolate(sol.f, targets[t]);
    }

    std::vector<cdouble> out(targets.size(), cdouble{0.0, 0.0});
    const double h2 = spec.spacing() * spec.spacing();
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const cdouble w_prime = images[t];
        cdouble acc{0.0, 0.0};
        for (std::size_t i = 0; i < spec.cell_count(); ++i) {
            const cdouble delta_mu = dir.nu.values[i] - dir.mu.values[i];
            if (delta_mu == cdouble{0.0, 0.0}) continue;
            const cdouble w = sol.f.values[i];
            if (std::abs(w - w_prime) < mask_radius || std::abs(w) < mask_radius ||
                std::abs(w - cdouble{1.0, 0.0}) < mask_radius)
                continue;
            const cdouble fz = sol.f_z.values[i];
            acc += delta_mu * kernel_phi(w, w_prime) * fz * fz;
        }
        out[t] = -acc * h2 / pi;
    }
    return out;
}

/// One row of the finite-difference validation table for the variation
/// formula.
struct VariationRow {
    double eps;
    cdouble zeta;
    cdouble fd;       // (f_eps(zeta) - f(zeta)) / eps from a re-solve
    cdouble v;        // first-order variation V(zeta)
    double abs_err;   // |fd - v|
};

/// Re-solves with mu_eps for each epsilon and tabulates the defect of the
/// first-order formula against the finite-difference quotient.
inline std::vector<VariationRow> finite_difference_variation(
    const TransformPlan& plan, const Coefficient& coeff, const VariationDirection& dir,
    std::span<const double> eps_list, std::span<const cdouble> targets,
    double solver_tol = 1e-10, int solver_max_terms = 200) {
    require_same_grid(plan.spec(), coeff.mu.spec, "finite_difference_variation");
    const Solution base = solve(plan, coeff, solver_tol, solver_max_terms);
    const std::vector<cdouble> v = variation_field(base, dir, targets);

    std::vector<cdouble> base_vals(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t)
        base_vals[t] = interpolate(base.f, targets[t]);

    std::vector<VariationRow> rows;
    rows.reserve(eps_list.size() * targets.size());
    for (const double eps : eps_list) {
        check_epsilon_range(eps);
        if (eps <= 0.0) throw error("finite_difference_variation: eps must be positive");
        const Coefficient c_eps(mu_epsilon(dir, eps));
        const Solution sol_eps = solve(plan, c_eps, solver_tol, solver_max_terms);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const cdouble fd = (interpolate(sol_eps.f, targets[t]) - base_vals[t]) / eps;
            rows.push_back({eps, targets[t], fd, v[t], std::abs(fd - v[t])});
        }
    }
    return rows;
}

/// gamma_eps along f: kappa_eps * f_z / conj(f_z), the characteristic of
/// the outer map transported to the source plane.
inline ComplexField gamma_along_f(const Solution& sol, const VariationDirection& dir, double eps) {
    const ComplexField keps = kappa_epsilon(dir, eps);
    ComplexField out(sol.f.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const cdouble fz = sol.f_z.values[i];
        if (std::abs(fz) < 1e-12)
            throw regularity_error("gamma_along_f: |f_z| below 1e-12 at " +
                                   cell_name(sol.f.spec, i));
        out.values[i] = keps.values[i] * fz / std::conj(fz);
    }
    return out;
}

/// Composition-characteristic algebra: recover the characteristic of the
/// composed map g.f from gamma (the characteristic of g sampled along f):
///   mu_{g.f} = (mu + (conj(f_z)/f_z) gamma) / (1 + conj(mu) (conj(f_z)/f_z) gamma).
inline ComplexField composed_characteristic(const ComplexField& gamma_of_f, const Solution& sol) {
    require_same_grid(gamma_of_f.spec, sol.f.spec, "composed_characteristic");
    ComplexField out(sol.f.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const cdouble fz = sol.f_z.values[i];
        if (std::abs(fz) < 1e-12)
            throw regularity_error("composed_characteristic: |f_z| below 1e-12 at " +
                                   cell_name(sol.f.spec, i));
        const cdouble ratio = std::conj(fz) / fz;
        const cdouble mu = sol.coeff.mu.values[i];
        out.values[i] = (mu + ratio * gamma_of_f.values[i]) /
                        (1.0 + std::conj(mu) * ratio * gamma_of_f.values[i]);
    }
    return out;
}

/// Convenience overload: builds gamma_eps from the direction, applies the
/// composition algebra, and cross-checks the identity
/// mu_{f_eps} = mu + eps kappa (1 - |mu|^2) pointwise to 1e-10.
inline ComplexField composed_characteristic(const Solution& sol, const VariationDirection& dir,
                                            double eps) {
    const ComplexField gamma = gamma_along_f(sol, dir, eps);
    ComplexField out = composed_characteristic(gamma, sol);
    const ComplexField expected = mu_epsilon(dir, eps);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (std::abs(out.values[i] - expected.values[i]) > 1e-10)
            throw error("composed_characteristic: algebra deviates from the convex-combination "
                        "characteristic at " + cell_name(out.spec, i));
    }
    return out;
}

} // namespace beltrami
