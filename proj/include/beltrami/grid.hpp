#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "beltrami/errors.hpp"

namespace beltrami {

using cdouble = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(cdouble z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Geometry of a square sampling grid: the square of side 2*half_width
/// centered at `center`, sampled at n x n cell centers (row-major, y up
/// with the row index).
struct GridSpec {
    cdouble center{0.0, 0.0};
    double half_width = 1.0;
    int n = 0;

    double spacing() const { return 2.0 * half_width / static_cast<double>(n); }
    std::size_t cell_count() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }

    cdouble cell_center(int j, int k) const {
        const double h = spacing();
        return center + cdouble(-half_width + (k + 0.5) * h,
                                -half_width + (j + 0.5) * h);
    }
    std::size_t index(int j, int k) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k);
    }

    /// True when the plane point lies strictly inside the covered square.
    bool strictly_inside(cdouble z) const {
        return std::abs(z.real() - center.real()) < half_width &&
               std::abs(z.imag() - center.imag()) < half_width;
    }

    void validate() const {
        if (!is_finite(center) || !is_finite(half_width) || half_width <= 0.0)
            throw grid_error("grid: center/half_width must be finite, half_width > 0");
        if (n < 8 || n % 2 != 0)
            throw grid_error("grid: n must be even and >= 8, got n=" + std::to_string(n));
        if (!strictly_inside(cdouble(0.0, 0.0)) || !strictly_inside(cdouble(1.0, 0.0)))
            throw grid_error("grid: the normalization points 0 and 1 must lie strictly inside the covered square");
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.center == b.center && a.half_width == b.half_width && a.n == b.n;
    }
};

/// A sampled function on a grid; value(j,k) is the sample at the cell center.
template <class T>
struct Field {
    GridSpec spec;
    std::vector<T> values;

    Field() = default;
    explicit Field(const GridSpec& s, T fill = T{})
        : spec(s), values(s.cell_count(), fill) {
        spec.validate();
    }

    T& at(int j, int k) { return values[spec.index(j, k)]; }
    const T& at(int j, int k) const { return values[spec.index(j, k)]; }
    int n() const { return spec.n; }
    double h() const { return spec.spacing(); }
};

using ComplexField = Field<cdouble>;
using RealField = Field<double>;

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b))
        throw grid_error(std::string("incompatible grids in ") + what);
}

inline std::string cell_name(const GridSpec& spec, std::size_t idx) {
    const int j = static_cast<int>(idx) / spec.n;
    const int k = static_cast<int>(idx) % spec.n;
    std::ostringstream os;
    const cdouble z = spec.cell_center(j, k);
    os << "cell (j=" << j << ", k=" << k << ", z=" << z.real() << "+" << z.imag() << "i)";
    return os.str();
}

/// Sample a pointwise generator at every cell center.
template <class Gen>
ComplexField make_field(const GridSpec& spec, Gen&& generator) {
    spec.validate();
    ComplexField f(spec);
    for (int j = 0; j < spec.n; ++j) {
        for (int k = 0; k < spec.n; ++k) {
            const cdouble v = generator(spec.cell_center(j, k));
            if (!is_finite(v))
                throw field_error("make_field: generator returned non-finite value at " +
                                  cell_name(spec, spec.index(j, k)));
            f.at(j, k) = v;
        }
    }
    return f;
}

inline RealField make_real_field(const GridSpec& spec, const std::function<double(cdouble)>& generator) {
    spec.validate();
    RealField f(spec);
    for (int j = 0; j < spec.n; ++j)
        for (int k = 0; k < spec.n; ++k) {
            const double v = generator(spec.cell_center(j, k));
            if (!is_finite(v))
                throw field_error("make_real_field: non-finite value at " + cell_name(spec, spec.index(j, k)));
            f.at(j, k) = v;
        }
    return f;
}

/// Midpoint quadrature of the field over the covered square: h^2 * sum.
/// Summation order is fixed (row-major) so results are reproducible.
inline cdouble integrate(const ComplexField& f) {
    cdouble acc{0.0, 0.0};
    for (const cdouble& v : f.values) acc += v;
    const double h = f.h();
    return acc * (h * h);
}

/// Discrete L2 norm sqrt(h^2 * sum |v|^2) over all cells.
inline double l2_norm(const ComplexField& f) {
    double acc = 0.0;
    for (const cdouble& v : f.values) acc += std::norm(v);
    return std::sqrt(acc) * f.h();
}

/// Discrete L2 norm restricted to interior cells (1 <= j,k <= n-2).
inline double l2_norm_interior(const ComplexField& f) {
    double acc = 0.0;
    for (int j = 1; j + 1 < f.n(); ++j)
        for (int k = 1; k + 1 < f.n(); ++k) acc += std::norm(f.at(j, k));
    return std::sqrt(acc) * f.h();
}

struct DerivativePair {
    ComplexField f_z;
    ComplexField f_zbar;
};

/// Wirtinger derivatives by finite differences: central in the interior,
/// one-sided first order on the edges. f_z = (f_x - i f_y)/2,
/// f_zbar = (f_x + i f_y)/2.
inline DerivativePair fd_derivatives(const ComplexField& f) {
    const int n = f.n();
    if (n < 3) throw grid_error("fd_derivatives: need n >= 3");
    const double h = f.h();
    DerivativePair out{ComplexField(f.spec), ComplexField(f.spec)};
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            cdouble fx, fy;
            if (k == 0)           fx = (f.at(j, 1) - f.at(j, 0)) / h;
            else if (k == n - 1)  fx = (f.at(j, n - 1) - f.at(j, n - 2)) / h;
            else                  fx = (f.at(j, k + 1) - f.at(j, k - 1)) / (2.0 * h);
            if (j == 0)           fy = (f.at(1, k) - f.at(0, k)) / h;
            else if (j == n - 1)  fy = (f.at(n - 1, k) - f.at(n - 2, k)) / h;
            else                  fy = (f.at(j + 1, k) - f.at(j - 1, k)) / (2.0 * h);
            out.f_z.at(j, k) = 0.5 * (fx - cdouble(0.0, 1.0) * fy);
            out.f_zbar.at(j, k) = 0.5 * (fx + cdouble(0.0, 1.0) * fy);
        }
    }
    return out;
}

/// Bilinear interpolation of the field at an arbitrary plane point inside
/// the covered square. Points between the outermost cell centers and the
/// square edge are clamped onto the boundary cell row/column.
inline cdouble interpolate(const ComplexField& f, cdouble z) {
    const GridSpec& s = f.spec;
    if (!s.strictly_inside(z))
        throw grid_error("interpolate: point " + std::to_string(z.real()) + "+" +
                         std::to_string(z.imag()) + "i lies outside the covered square");
    const double h = s.spacing();
    double gx = (z.real() - s.center.real() + s.half_width) / h - 0.5;
    double gy = (z.imag() - s.center.imag() + s.half_width) / h - 0.5;
    gx = std::min(std::max(gx, 0.0), static_cast<double>(s.n - 1));
    gy = std::min(std::max(gy, 0.0), static_cast<double>(s.n - 1));
    const int k0 = std::min(static_cast<int>(gx), s.n - 2);
    const int j0 = std::min(static_cast<int>(gy), s.n - 2);
    const double tx = gx - k0;
    const double ty = gy - j0;
    return (1.0 - ty) * ((1.0 - tx) * f.at(j0, k0) + tx * f.at(j0, k0 + 1)) +
           ty * ((1.0 - tx) * f.at(j0 + 1, k0) + tx * f.at(j0 + 1, k0 + 1));
}

// --- CFLD binary format -----------------------------------------------------
//
// magic "CFLD", little-endian: u32 version=1, f64 center_re, f64 center_im,
// f64 half_width, u32 n, then n^2 (re, im) f64 pairs row-major.

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "CFLD I/O assumes a little-endian host");

template <class T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw io_error("CFLD: truncated stream");
    return v;
}

} // namespace detail

inline void save_cfld(const ComplexField& f, std::ostream& os) {
    os.write("CFLD", 4);
    detail::write_raw<std::uint32_t>(os, 1u);
    detail::write_raw<double>(os, f.spec.center.real());
    detail::write_raw<double>(os, f.spec.center.imag());
    detail::write_raw<double>(os, f.spec.half_width);
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(f.spec.n));
    for (const cdouble& v : f.values) {
        detail::write_raw<double>(os, v.real());
        detail::write_raw<double>(os, v.imag());
    }
    if (!os) throw io_error("CFLD: write failed");
}

inline void save_cfld(const ComplexField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("CFLD: cannot open for writing: " + path);
    save_cfld(f, os);
}

inline ComplexField load_cfld(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CFLD", 4) != 0)
        throw io_error("CFLD: bad magic");
    const auto version = detail::read_raw<std::uint32_t>(is);
    if (version != 1u)
        throw io_error("CFLD: unsupported version " + std::to_string(version));
    GridSpec spec;
    const double cre = detail::read_raw<double>(is);
    const double cim = detail::read_raw<double>(is);
    spec.center = cdouble(cre, cim);
    spec.half_width = detail::read_raw<double>(is);
    spec.n = static_cast<int>(detail::read_raw<std::uint32_t>(is));
    spec.validate();
    ComplexField f(spec);
    for (cdouble& v : f.values) {
        const double re = detail::read_raw<double>(is);
        const double im = detail::read_raw<double>(is);
        v = cdouble(re, im);
    }
    return f;
}

inline ComplexField load_cfld(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("CFLD: cannot open for reading: " + path);
    return load_cfld(is);
}

inline ComplexField to_complex(const RealField& r) {
    ComplexField f(r.spec);
    for (std::size_t i = 0; i < r.values.size(); ++i) f.values[i] = cdouble(r.values[i], 0.0);
    return f;
}

inline RealField to_real(const ComplexField& f, double imag_tol = 0.0) {
    RealField r(f.spec);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (std::abs(f.values[i].imag()) > imag_tol)
            throw field_error("to_real: field has a nonzero imaginary part");
        r.values[i] = f.values[i].real();
    }
    return r;
}

} // namespace beltrami
