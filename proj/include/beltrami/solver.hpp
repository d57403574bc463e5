#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "beltrami/errors.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/transforms.hpp"

namespace beltrami {

/// Compactly supported Beltrami coefficient with |mu| < 1 everywhere.
struct Coefficient {
    ComplexField mu;
    double k_sup = 0.0;

    static constexpr double max_k_sup = 1.0 - 1e-6;

    explicit Coefficient(ComplexField field) : mu(std::move(field)) {
        for (const cdouble& v : mu.values) k_sup = std::max(k_sup, std::abs(v));
        if (!(k_sup <= max_k_sup))
            throw coefficient_error("coefficient: ess-sup |mu| = " + std::to_string(k_sup) +
                                    " exceeds " + std::to_string(max_k_sup));
        // compact support: zero outside the inner half-width square
        const GridSpec& s = mu.spec;
        const double m = 0.5 * s.half_width;
        for (int j = 0; j < s.n; ++j)
            for (int k = 0; k < s.n; ++k) {
                const cdouble z = s.cell_center(j, k) - s.center;
                if ((std::abs(z.real()) > m || std::abs(z.imag()) > m) &&
                    mu.at(j, k) != cdouble{0.0, 0.0})
                    throw coefficient_error("coefficient: support leaks into the outer margin at " +
                                            cell_name(s, s.index(j, k)));
            }
    }
};

/// A solved normalized regular homeomorphism: map samples, Wirtinger
/// derivative samples, and the coefficient it solves for.
struct Solution {
    Coefficient coeff;
    ComplexField f;
    ComplexField f_z;
    ComplexField f_zbar;
    int neumann_terms = 0;
    double residual = 0.0;

    double max_interior_fz() const {
        double m = 0.0;
        for (int j = 1; j + 1 < f.n(); ++j)
            for (int k = 1; k + 1 < f.n(); ++k) m = std::max(m, std::abs(f_z.at(j, k)));
        return m;
    }
};

namespace detail {

inline ComplexField identity_field(const GridSpec& spec) {
    return make_field(spec, [](cdouble z) { return z; });
}

inline std::vector<std::size_t> nonpositive_jacobian_cells(const Solution& sol) {
    std::vector<std::size_t> bad;
    const int n = sol.f.n();
    for (int j = 1; j + 1 < n; ++j)
        for (int k = 1; k + 1 < n; ++k) {
            const double jac = std::norm(sol.f_z.at(j, k)) - std::norm(sol.f_zbar.at(j, k));
            if (!(jac > 0.0)) bad.push_back(sol.f.spec.index(j, k));
        }
    return bad;
}

} // namespace detail

/// Normalize a principal-solution field affinely so that f(0) = 0 and
/// f(1) = 1 (affine postcomposition leaves the complex characteristic
/// unchanged).
inline ComplexField renormalize(const ComplexField& f_raw) {
    const cdouble a = interpolate(f_raw, cdouble{0.0, 0.0});
    const cdouble b = interpolate(f_raw, cdouble{1.0, 0.0});
    const cdouble d = b - a;
    if (std::abs(d) < 1e-12)
        throw regularity_error("renormalize: degenerate normalization, |f(1) - f(0)| = " +
                               std::to_string(std::abs(d)));
    ComplexField f(f_raw.spec);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = (f_raw.values[i] - a) / d;
    return f;
}

/// Solve f_zbar = mu f_z by the Neumann fixed point h = mu (1 + S h),
/// f = z + T h, followed by affine renormalization. The stopping rule is
/// relative: ||h_{m+1} - h_m||_2 <= tol ||mu||_2.
inline Solution solve(const TransformPlan& plan, const Coefficient& coeff,
                      double tol = 1e-10, int max_terms = 200) {
    require_same_grid(plan.spec(), coeff.mu.spec, "solve");
    if (!(tol > 0.0)) throw error("solve: tol must be positive");

    const ComplexField& mu = coeff.mu;
    const double mu_norm = l2_norm(mu);
    ComplexField h = mu;
    int terms = 0;
    std::vector<double> history;
    if (mu_norm > 0.0) {
        for (;;) {
            const ComplexField sh = plan.beurling(h);
            ComplexField h_next(mu.spec);
            for (std::size_t i = 0; i < h_next.values.size(); ++i)
                h_next.values[i] = mu.values[i] * (1.0 + sh.values[i]);
            double delta = 0.0;
            for (std::size_t i = 0; i < h.values.size(); ++i)
                delta += std::norm(h_next.values[i] - h.values[i]);
            delta = std::sqrt(delta) * mu.h();
            history.push_back(delta);
            h = std::move(h_next);
            ++terms;
            if (delta <= tol * mu_norm) break;
            if (terms >= max_terms)
                throw convergence_error("solve: Neumann iteration did not reach tol after " +
                                            std::to_string(max_terms) + " terms (last delta " +
                                            std::to_string(delta) + ")",
                                        std::move(history));
        }
    }

    ComplexField f_raw = detail::identity_field(mu.spec);
    if (mu_norm > 0.0) {
        const ComplexField th = plan.cauchy(h);
        for (std::size_t i = 0; i < f_raw.values.size(); ++i) f_raw.values[i] += th.values[i];
    }

    ComplexField f = renormalize(f_raw);
    DerivativePair d = fd_derivatives(f);

    ComplexField defect(mu.spec);
    for (std::size_t i = 0; i < defect.values.size(); ++i)
        defect.values[i] = d.f_zbar.values[i] - mu.values[i] * d.f_z.values[i];

    Solution sol{coeff, std::move(f), std::move(d.f_z), std::move(d.f_zbar),
                 terms, l2_norm_interior(defect)};

    auto bad = detail::nonpositive_jacobian_cells(sol);
    if (!bad.empty())
        throw regularity_error("solve: nonpositive Jacobian at " + std::to_string(bad.size()) +
                                   " interior cells; first: " + cell_name(mu.spec, bad.front()),
                               std::move(bad));
    return sol;
}

/// Residual of the composition rule (g.f)_z = (g_w.f) f_z + (g_wbar.f)
/// conj(f_zbar), measured in the interior L2 norm.
/// `g_of_f`, `gw_of_f`, `gwbar_of_f` are g and its derivatives sampled
/// along f.
inline double chain_rule_check(const ComplexField& g_of_f, const ComplexField& gw_of_f,
                               const ComplexField& gwbar_of_f, const Solution& inner) {
    require_same_grid(g_of_f.spec, inner.f.spec, "chain_rule_check");
    require_same_grid(gw_of_f.spec, inner.f.spec, "chain_rule_check");
    require_same_grid(gwbar_of_f.spec, inner.f.spec, "chain_rule_check");
    const DerivativePair d = fd_derivatives(g_of_f);
    ComplexField defect(g_of_f.spec);
    for (std::size_t i = 0; i < defect.values.size(); ++i)
        defect.values[i] = d.f_z.values[i] - gw_of_f.values[i] * inner.f_z.values[i] -
                           gwbar_of_f.values[i] * std::conj(inner.f_zbar.values[i]);
    return l2_norm_interior(defect);
}

/// Pointwise dilatation (1 + |mu|) / (1 - |mu|).
inline RealField dilatation_field(const Coefficient& coeff) {
    RealField out(coeff.mu.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double m = std::abs(coeff.mu.values[i]);
        out.values[i] = (1.0 + m) / (1.0 - m);
    }
    return out;
}

// --- coefficient presets ------------------------------------------------

/// Radial stretch coefficient ((K-1)/(K+1)) z / conj(z) inside the unit
/// disk, zero outside and at the origin.
inline ComplexField make_radial_stretch_mu(const GridSpec& spec, double stretch_k) {
    const double c = (stretch_k - 1.0) / (stretch_k + 1.0);
    return make_field(spec, [c](cdouble z) {
        const double r2 = std::norm(z);
        if (r2 >= 1.0 || r2 == 0.0) return cdouble{0.0, 0.0};
        return c * z * z / r2; // z / conj(z)
    });
}

/// Constant coefficient on a centered disk, zero outside.
inline ComplexField make_disk_indicator_mu(const GridSpec& spec, cdouble value, double radius = 1.0) {
    return make_field(spec, [value, radius](cdouble z) {
        return std::abs(z) < radius ? value : cdouble{0.0, 0.0};
    });
}

} // namespace beltrami
