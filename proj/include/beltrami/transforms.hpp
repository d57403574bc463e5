#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "beltrami/errors.hpp"
#include "beltrami/fft.hpp"
#include "beltrami/grid.hpp"

namespace beltrami {

/// Precomputed machinery for the discrete Cauchy transform T and Beurling
/// transform S on one grid. Convolutions run on a zero-padded square of
/// size >= 2n so the slowly decaying kernels never wrap around.
///
/// The plan is immutable after construction; each transform call owns its
/// scratch buffers, so concurrent calls sharing one plan do not interfere.
class TransformPlan {
public:
    explicit TransformPlan(const GridSpec& spec, unsigned threads = 1)
        : spec_(spec),
          padded_(fft::next_pow2(static_cast<std::size_t>(2) * static_cast<std::size_t>(spec.n))),
          fft2d_(padded_, threads) {
        spec_.validate();
        build_cauchy_kernel();
        build_beurling_multiplier();
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t padded_size() const { return padded_; }

    /// Margin rule: transform inputs must vanish at cells whose center is
    /// farther than half_width/2 from the grid center in either coordinate.
    bool in_support_region(int j, int k) const {
        const cdouble z = spec_.cell_center(j, k) - spec_.center;
        const double m = 0.5 * spec_.half_width;
        return std::abs(z.real()) <= m && std::abs(z.imag()) <= m;
    }

    void check_support(const ComplexField& h) const {
        require_same_grid(spec_, h.spec, "transform");
        std::vector<std::size_t> bad;
        for (int j = 0; j < spec_.n; ++j)
            for (int k = 0; k < spec_.n; ++k)
                if (!in_support_region(j, k) && h.at(j, k) != cdouble{0.0, 0.0})
                    bad.push_back(spec_.index(j, k));
        if (!bad.empty()) {
            std::string msg = "transform input not supported inside the half-width margin; first offender: " +
                              cell_name(spec_, bad.front()) + " (" + std::to_string(bad.size()) + " cells)";
            throw support_error(std::move(msg), std::move(bad));
        }
    }

    /// Cauchy transform (T h)(zeta) = (1/pi) integral of h(z)/(zeta - z),
    /// discretized as convolution of the samples with the 1/(pi z) kernel.
    /// The singular cell uses the exact cell average of 1/(pi z) over the
    /// centered square, which vanishes by antisymmetry.
    ComplexField cauchy(const ComplexField& h) const {
        check_support(h);
        std::vector<cdouble> buf = pad(h);
        fft2d_.transform(buf, false);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= cauchy_kernel_hat_[i];
        fft2d_.transform(buf, true);
        return crop(buf);
    }

    /// Beurling transform S h = d/dz (T h), realized as the Fourier
    /// multiplier conj(xi)/xi on the zero-padded field (xi = 0 bin -> 0).
    ComplexField beurling(const ComplexField& h) const {
        return crop(beurling_padded(h));
    }

    /// Full padded-grid result of S h (row-major padded_size^2 values);
    /// the isometry of S holds in the L2 norm of this buffer.
    std::vector<cdouble> beurling_padded(const ComplexField& h) const {
        check_support(h);
        std::vector<cdouble> buf = pad(h);
        fft2d_.transform(buf, false);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= beurling_mult_[i];
        fft2d_.transform(buf, true);
        return buf;
    }

private:
    static double signed_freq(std::size_t idx, std::size_t size) {
        return idx < size / 2 ? static_cast<double>(idx)
                              : static_cast<double>(idx) - static_cast<double>(size);
    }

    void build_cauchy_kernel() {
        const double h = spec_.spacing();
        const double pi = 3.14159265358979323846;
        std::vector<cdouble> kernel(padded_ * padded_, cdouble{0.0, 0.0});
        for (std::size_t j = 0; j < padded_; ++j) {
            const double dy = signed_freq(j, padded_) * h;
            for (std::size_t k = 0; k < padded_; ++k) {
                const double dx = signed_freq(k, padded_) * h;
                if (dx == 0.0 && dy == 0.0) continue; // exact cell average of 1/(pi z) is 0
                kernel[j * padded_ + k] = (h * h) / (pi * cdouble(dx, dy));
            }
        }
        fft2d_.transform(kernel, false);
        const double scale = 1.0 / (static_cast<double>(padded_) * static_cast<double>(padded_));
        for (cdouble& v : kernel) v *= scale; // fold inverse-FFT scaling into the table
        cauchy_kernel_hat_ = std::move(kernel);
    }

    void build_beurling_multiplier() {
        beurling_mult_.assign(padded_ * padded_, cdouble{0.0, 0.0});
        const double scale = 1.0 / (static_cast<double>(padded_) * static_cast<double>(padded_));
        for (std::size_t j = 0; j < padded_; ++j) {
            const double fy = signed_freq(j, padded_);
            for (std::size_t k = 0; k < padded_; ++k) {
                const double fx = signed_freq(k, padded_);
                if (fx == 0.0 && fy == 0.0) continue; // mean-zero convention
                const cdouble xi(fx, fy);
                beurling_mult_[j * padded_ + k] = std::conj(xi) / xi * scale;
            }
        }
    }

    std::vector<cdouble> pad(const ComplexField& h) const {
        std::vector<cdouble> buf(padded_ * padded_, cdouble{0.0, 0.0});
        const int n = spec_.n;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                buf[static_cast<std::size_t>(j) * padded_ + static_cast<std::size_t>(k)] = h.at(j, k);
        return buf;
    }

    ComplexField crop(const std::vector<cdouble>& buf) const {
        ComplexField out(spec_);
        const int n = spec_.n;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.at(j, k) = buf[static_cast<std::size_t>(j) * padded_ + static_cast<std::size_t>(k)];
        return out;
    }

    GridSpec spec_;
    std::size_t padded_;
    fft::Plan2D fft2d_;
    std::vector<cdouble> cauchy_kernel_hat_;
    std::vector<cdouble> beurling_mult_;
};

inline ComplexField cauchy_T(const TransformPlan& plan, const ComplexField& h) {
    return plan.cauchy(h);
}

inline ComplexField beurling_S(const TransformPlan& plan, const ComplexField& h) {
    return plan.beurling(h);
}

} // namespace beltrami
