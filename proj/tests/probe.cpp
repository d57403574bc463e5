// Scratch measurement harness used while pinning test tolerances.
#include <chrono>
#include <cstdio>
#include <random>

#include "beltrami/functional.hpp"
#include "beltrami/runner.hpp"

using namespace beltrami;

static double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

static cdouble radial_stretch_map(cdouble z, double K) {
    const double r = std::abs(z);
    if (r >= 1.0 || r == 0.0) return r == 0.0 ? cdouble{0, 0} : z;
    return z * std::pow(r, K - 1.0);
}

int main() {
    const GridSpec g64{cdouble{0.5, 0.0}, 4.0, 64};
    const GridSpec g128{cdouble{0.5, 0.0}, 4.0, 128};
    const GridSpec g256{cdouble{0.5, 0.0}, 4.0, 256};

    // --- Cauchy transform of the unit-disk indicator vs closed form
    for (const GridSpec& g : {g64, g128}) {
        TransformPlan plan(g);
        ComplexField ind = make_field(g, [](cdouble z) {
            return std::abs(z) < 1.0 ? cdouble{1.0, 0.0} : cdouble{0.0, 0.0};
        });
        ComplexField t = plan.cauchy(ind);
        double worst_in = 0, worst_out = 0;
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const cdouble z = g.cell_center(j, k);
                const double r = std::abs(z);
                if (r < 0.85) worst_in = std::max(worst_in, std::abs(t.at(j, k) - std::conj(z)));
                else if (r > 1.15 && r < 3.0)
                    worst_out = std::max(worst_out, std::abs(t.at(j, k) - 1.0 / z));
            }
        std::printf("cauchy disk n=%d h=%g: err_in=%.3e err_out=%.3e (h=%g)\n", g.n,
                    g.spacing(), worst_in, worst_out, g.spacing());

        // beurling disk: 0 inside, -1/z^2 outside
        ComplexField s = plan.beurling(ind);
        double sin_ = 0, sout = 0;
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                const cdouble z = g.cell_center(j, k);
                const double r = std::abs(z);
                if (r < 0.85) sin_ = std::max(sin_, std::abs(s.at(j, k)));
                else if (r > 1.15 && r < 3.0)
                    sout = std::max(sout, std::abs(s.at(j, k) + 1.0 / (z * z)));
            }
        std::printf("beurling disk n=%d: err_in=%.3e err_out=%.3e\n", g.n, sin_, sout);

        // isometry on padded grid, mean-zero random support field
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        ComplexField r(g);
        std::vector<std::size_t> support;
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k)
                if (plan.in_support_region(j, k)) support.push_back(g.index(j, k));
        cdouble mean{0, 0};
        for (std::size_t i : support) {
            r.values[i] = cdouble{u(rng), u(rng)};
            mean += r.values[i];
        }
        mean /= static_cast<double>(support.size());
        for (std::size_t i : support) r.values[i] -= mean;
        auto sp = plan.beurling_padded(r);
        double nh = 0, ns = 0;
        for (const cdouble& v : r.values) nh += std::norm(v);
        for (const cdouble& v : sp) ns += std::norm(v);
        std::printf("isometry n=%d: |S h|/|h| - 1 = %.3e\n", g.n,
                    std::sqrt(ns) / std::sqrt(nh) - 1.0);

        // fd compatibility: fd(T h).f_z vs S h on interior
        DerivativePair d = fd_derivatives(t);
        ComplexField diff(g), diff2(g);
        for (std::size_t i = 0; i < diff.values.size(); ++i) {
            diff.values[i] = d.f_z.values[i] - s.values[i];
            diff2.values[i] = d.f_zbar.values[i] - ind.values[i];
        }
        std::printf("compat n=%d: |fd(Th)_z - Sh|_2 = %.3e  |fd(Th)_zbar - h|_2 = %.3e\n", g.n,
                    l2_norm_interior(diff), l2_norm_interior(diff2));
    }

    // --- radial stretch solve accuracy
    const double K = 1.5;
    for (const GridSpec& g : {g64, g128, g256}) {
        const double t0 = now_s();
        TransformPlan plan(g);
        Coefficient coeff(make_radial_stretch_mu(g, K));
        Solution sol = solve(plan, coeff, 1e-10, 200);
        double sup = 0;
        for (int j = 1; j + 1 < g.n; ++j)
            for (int k = 1; k + 1 < g.n; ++k) {
                const cdouble z = g.cell_center(j, k);
                sup = std::max(sup, std::abs(sol.f.at(j, k) - radial_stretch_map(z, K)));
            }
        double minJ = 1e300;
        for (int j = 1; j + 1 < g.n; ++j)
            for (int k = 1; k + 1 < g.n; ++k)
                minJ = std::min(minJ, std::norm(sol.f_z.at(j, k)) - std::norm(sol.f_zbar.at(j, k)));
        std::printf("radial n=%d: sup_err=%.4e (0.75h=%.4e) terms=%d residual=%.3e minJ=%.3e  [%.2fs]\n",
                    g.n, sup, 0.75 * g.spacing(), sol.neumann_terms, sol.residual, minJ,
                    now_s() - t0);
    }

    // --- variation check, identity base: V(2) should be near -0.45
    {
        TransformPlan plan(g128);
        Coefficient zero{ComplexField(g128)};
        Solution sol = solve(plan, zero);
        ComplexField nu = make_disk_indicator_mu(g128, cdouble{0.3, 0.0});
        VariationDirection dir = make_direction(zero.mu, nu);
        const cdouble targets[] = {cdouble{2.0, 0.0}};
        auto v = variation_field(sol, dir, targets);
        std::printf("V(2) identity base n=128: %.6f%+.6fi (exact -0.45)\n", v[0].real(),
                    v[0].imag());
    }

    // --- finite-difference variation ratios at n=256 (criterion 5 shape)
    {
        const double t0 = now_s();
        TransformPlan plan(g256);
        Coefficient coeff(make_radial_stretch_mu(g256, K));
        ComplexField nu = coeff.mu;
        for (int j = 0; j < g256.n; ++j)
            for (int k = 0; k < g256.n; ++k)
                if (std::abs(g256.cell_center(j, k)) < 1.0)
                    nu.at(j, k) += cdouble{0.15, 0.1};
        VariationDirection dir = make_direction(coeff.mu, nu);
        std::printf("direction k_inf = %.4f\n", dir.k_inf);
        const cdouble targets[] = {cdouble{2.0, 0.0}, cdouble{-1.0, 1.0}, cdouble{0.5, 2.0}};
        const double eps[] = {0.2, 0.1, 0.05};
        auto rows = finite_difference_variation(plan, coeff, dir, eps, targets);
        for (const auto& r : rows)
            std::printf("  eps=%.2f zeta=(%.1f,%.1f) |D-V|=%.5e  V=(%.5f,%.5f)\n", r.eps,
                        r.zeta.real(), r.zeta.imag(), r.abs_err, r.v.real(), r.v.imag());
        std::printf("  [%.2fs]\n", now_s() - t0);
    }

    return 0;
}
