#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "beltrami/errors.hpp"
#include "beltrami/grid.hpp"

namespace beltrami {

constexpr double kUnitDiskMargin = 1e-9;
constexpr double kMembershipTol = 1e-12;
constexpr double kConeRayTol = 1e-9;

/// Per-cell family of closed disks { |v - c(z)| <= k(z) } inside the unit disk.
class DiskFamily {
public:
    DiskFamily(ComplexField centers, RealField radii)
        : c_(std::move(centers)), k_(std::move(radii)) {
        require_same_grid(c_.spec, k_.spec, "DiskFamily");
        for (std::size_t i = 0; i < c_.values.size(); ++i) {
            if (k_.values[i] < 0.0)
                throw constraint_error("disk family: negative radius at " + cell_name(c_.spec, i));
            if (std::abs(c_.values[i]) + k_.values[i] > 1.0 - kUnitDiskMargin)
                throw constraint_error("disk family: set leaves the unit disk at " + cell_name(c_.spec, i));
        }
    }

    const GridSpec& spec() const { return c_.spec; }
    cdouble center(std::size_t cell) const { return c_.values[cell]; }
    double radius(std::size_t cell) const { return k_.values[cell]; }
    const ComplexField& centers() const { return c_; }
    const RealField& radii() const { return k_; }

private:
    ComplexField c_;
    RealField k_;
};

/// Per-cell family of compact convex polygons (vertices counterclockwise,
/// strictly convex after deduplication). Cells whose vertex list fails the
/// convexity requirement are degenerate-flagged when allowed; geometric
/// queries on flagged cells raise errors.
class PolygonFamily {
public:
    using Polygon = std::vector<cdouble>;

    PolygonFamily(GridSpec spec, std::vector<Polygon> polygons, bool allow_degenerate = false)
        : spec_(spec), polys_(std::move(polygons)), degenerate_(polys_.size(), 0) {
        spec_.validate();
        if (polys_.size() != spec_.cell_count())
            throw constraint_error("polygon family: need one polygon per cell");
        for (std::size_t i = 0; i < polys_.size(); ++i)
            polys_[i] = normalize(polys_[i], i, allow_degenerate);
    }

    /// Same polygon at every cell.
    PolygonFamily(GridSpec spec, const Polygon& poly)
        : PolygonFamily(spec, std::vector<Polygon>(spec.cell_count(), poly)) {}

    const GridSpec& spec() const { return spec_; }
    bool degenerate(std::size_t cell) const { return degenerate_[cell] != 0; }
    const Polygon& polygon(std::size_t cell) const {
        if (degenerate_[cell])
            throw constraint_error("polygon family: degenerate set queried at " +
                                   cell_name(spec_, cell));
        return polys_[cell];
    }
    /// Raw vertex list, degenerate cells included.
    const Polygon& points(std::size_t cell) const { return polys_[cell]; }

private:
    Polygon normalize(Polygon p, std::size_t cell, bool allow_degenerate) {
        // drop consecutive duplicates (closing duplicate included)
        Polygon q;
        for (const cdouble& v : p) {
            if (q.empty() || std::abs(v - q.back()) > 1e-12) q.push_back(v);
        }
        if (q.size() >= 2 && std::abs(q.front() - q.back()) <= 1e-12) q.pop_back();
        for (const cdouble& v : q)
            if (std::abs(v) > 1.0 - kUnitDiskMargin)
                throw constraint_error("polygon family: vertex leaves the unit disk at " +
                                       cell_name(spec_, cell));
        bool convex = q.size() >= 3;
        if (convex) {
            double area2 = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                const cdouble a = q[i], b = q[(i + 1) % q.size()];
                area2 += a.real() * b.imag() - a.imag() * b.real();
            }
            if (area2 < 0.0) std::reverse(q.begin(), q.end()); // canonicalize to CCW
            for (std::size_t i = 0; i < q.size() && convex; ++i) {
                const cdouble a = q[i];
                const cdouble b = q[(i + 1) % q.size()];
                const cdouble c = q[(i + 2) % q.size()];
                const cdouble u = b - a, v = c - b;
                convex = (u.real() * v.imag() - u.imag() * v.real()) > 0.0;
            }
        }
        if (!convex) {
            if (!allow_degenerate)
                throw constraint_error("polygon family: polygon not strictly convex at " +
                                       cell_name(spec_, cell));
            degenerate_[cell] = 1;
        }
        return q;
    }

    GridSpec spec_;
    std::vector<Polygon> polys_;
    std::vector<std::uint8_t> degenerate_;
};

using ConstraintFamily = std::variant<DiskFamily, PolygonFamily>;

inline const GridSpec& family_spec(const ConstraintFamily& fam) {
    return std::visit([](const auto& f) -> const GridSpec& { return f.spec(); }, fam);
}

/// q_M(z) = max over the set of |v| and Q_M = (1 + q_M) / (1 - q_M).
struct ConstraintStats {
    RealField q_M;
    RealField Q_M;
};

inline ConstraintStats stats(const ConstraintFamily& fam) {
    const GridSpec& spec = family_spec(fam);
    ConstraintStats out{RealField(spec), RealField(spec)};
    for (std::size_t i = 0; i < spec.cell_count(); ++i) {
        double q = 0.0;
        if (const auto* d = std::get_if<DiskFamily>(&fam)) {
            q = std::abs(d->center(i)) + d->radius(i);
        } else {
            for (const cdouble& v : std::get<PolygonFamily>(fam).points(i))
                q = std::max(q, std::abs(v));
        }
        out.q_M.values[i] = q;
        out.Q_M.values[i] = (1.0 + q) / (1.0 - q);
    }
    return out;
}

namespace geom {

inline double cross(cdouble a, cdouble b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot(cdouble a, cdouble b) { return a.real() * b.real() + a.imag() * b.imag(); }

/// Nearest point of the segment [a, b] to p.
inline cdouble project_segment(cdouble p, cdouble a, cdouble b) {
    const cdouble ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

} // namespace geom

inline bool contains(const ConstraintFamily& fam, std::size_t cell, cdouble nu) {
    if (const auto* d = std::get_if<DiskFamily>(&fam))
        return std::abs(nu - d->center(cell)) <= d->radius(cell) + kMembershipTol;
    const auto& poly = std::get<PolygonFamily>(fam).polygon(cell);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cdouble a = poly[i], b = poly[(i + 1) % poly.size()];
        if (geom::cross(b - a, nu - a) < -kMembershipTol) return false;
    }
    return true;
}

/// Nearest point of the set boundary. Projection from a disk center uses
/// the +1 tie-break direction.
inline cdouble project_boundary(const ConstraintFamily& fam, std::size_t cell, cdouble nu) {
    if (const auto* d = std::get_if<DiskFamily>(&fam)) {
        const cdouble c = d->center(cell);
        const double k = d->radius(cell);
        if (k == 0.0) return c;
        const cdouble dir = nu - c;
        const double len = std::abs(dir);
        if (len == 0.0) return c + cdouble{k, 0.0};
        return c + k * dir / len;
    }
    const auto& poly = std::get<PolygonFamily>(fam).polygon(cell);
    cdouble best{};
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cdouble q = geom::project_segment(nu, poly[i], poly[(i + 1) % poly.size()]);
        const double dist = std::abs(nu - q);
        if (dist < best_d) {
            best_d = dist;
            best = q;
        }
    }
    return best;
}

inline double boundary_distance(const ConstraintFamily& fam, std::size_t cell, cdouble nu) {
    if (const auto* d = std::get_if<DiskFamily>(&fam))
        return std::abs(std::abs(nu - d->center(cell)) - d->radius(cell));
    return std::abs(nu - project_boundary(fam, cell, nu));
}

/// Largest t >= 0 with mu + t e^{i alpha} still in the set. `mu` must be a
/// member.
inline double ray_distance(const ConstraintFamily& fam, std::size_t cell, cdouble mu, double alpha) {
    if (!contains(fam, cell, mu))
        throw constraint_error("ray_distance: base point is outside the set at " +
                               cell_name(family_spec(fam), cell));
    const cdouble u = std::polar(1.0, alpha);
    if (const auto* dsk = std::get_if<DiskFamily>(&fam)) {
        const cdouble d = mu - dsk->center(cell);
        const double k = dsk->radius(cell);
        const double b = geom::dot(u, d);
        const double disc = b * b + k * k - std::norm(d);
        return -b + std::sqrt(std::max(disc, 0.0));
    }
    const auto& poly = std::get<PolygonFamily>(fam).polygon(cell);
    double t_exit = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cdouble a = poly[i], b = poly[(i + 1) % poly.size()];
        const cdouble edge = b - a;
        // outward normal of a CCW edge
        const cdouble nrm = cdouble(edge.imag(), -edge.real()) / std::abs(edge);
        const double vel = geom::dot(u, nrm);
        if (vel > 0.0) {
            const double gap = -geom::dot(mu - a, nrm); // >= 0 for members
            t_exit = std::min(t_exit, std::max(gap, 0.0) / vel);
        }
    }
    return std::isfinite(t_exit) ? t_exit : 0.0;
}

/// Unit inner normal at a smooth boundary point. Polygon vertices are not
/// smooth; callers should fall back to cone_directions there.
inline cdouble inner_normal(const ConstraintFamily& fam, std::size_t cell, cdouble mu_boundary) {
    if (boundary_distance(fam, cell, mu_boundary) > 1e-6)
        throw constraint_error("inner_normal: point is not on the set boundary at " +
                               cell_name(family_spec(fam), cell));
    if (const auto* d = std::get_if<DiskFamily>(&fam)) {
        const double k = d->radius(cell);
        if (k == 0.0)
            throw constraint_error("inner_normal: degenerate single-point set at " +
                                   cell_name(family_spec(fam), cell));
        const cdouble nrm = (d->center(cell) - mu_boundary) / k;
        return nrm / std::abs(nrm);
    }
    const auto& poly = std::get<PolygonFamily>(fam).polygon(cell);
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_edge = 0;
    cdouble best_q{};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cdouble q = geom::project_segment(mu_boundary, poly[i], poly[(i + 1) % poly.size()]);
        const double dist = std::abs(mu_boundary - q);
        if (dist < best_d) {
            best_d = dist;
            best_edge = i;
            best_q = q;
        }
    }
    for (const cdouble& v : poly)
        if (std::abs(best_q - v) <= 1e-9)
            throw constraint_error("inner_normal: boundary point is a polygon vertex (nonsmooth); "
                                   "use cone_directions");
    const cdouble edge = poly[(best_edge + 1) % poly.size()] - poly[best_edge];
    // interior lies to the left of a CCW edge
    const cdouble nrm = cdouble(-edge.imag(), edge.real());
    return nrm / std::abs(nrm);
}

/// DiskFamily round-trips through two CFLD files; radii ride in a complex
/// field with zero imaginary part.
inline void save_disk_family(const DiskFamily& fam, const std::string& centers_path,
                             const std::string& radii_path) {
    save_cfld(fam.centers(), centers_path);
    save_cfld(to_complex(fam.radii()), radii_path);
}

inline DiskFamily load_disk_family(const std::string& centers_path, const std::string& radii_path) {
    ComplexField c = load_cfld(centers_path);
    ComplexField k = load_cfld(radii_path);
    return DiskFamily(std::move(c), to_real(k));
}

/// Sampled cone of admissible directions: of `samples` equispaced unit
/// directions, those along which the set extends beyond the ray tolerance.
inline std::vector<cdouble> cone_directions(const ConstraintFamily& fam, std::size_t cell,
                                            cdouble mu, int samples) {
    if (!contains(fam, cell, mu))
        throw constraint_error("cone_directions: base point is outside the set at " +
                               cell_name(family_spec(fam), cell));
    std::vector<cdouble> cone;
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int s = 0; s < samples; ++s) {
        const double alpha = two_pi * static_cast<double>(s) / static_cast<double>(samples);
        if (ray_distance(fam, cell, mu, alpha) > kConeRayTol)
            cone.push_back(std::polar(1.0, alpha));
    }
    return cone;
}

} // namespace beltrami
