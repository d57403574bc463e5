#pragma once

#include <complex>
#include <cstddef>
#include <thread>
#include <vector>

namespace beltrami::fft {

using cdouble = std::complex<double>;

/// Radix-2 decimation-in-time FFT over power-of-two lengths with
/// precomputed twiddles. Deterministic: identical input bits give
/// identical output bits regardless of threading.
class Radix2 {
public:
    explicit Radix2(std::size_t n) : n_(n) {
        // n must be a power of two
        while ((std::size_t{1} << log2n_) < n_) ++log2n_;
        twiddle_.resize(n_ / 2);
        const double base = -2.0 * 3.14159265358979323846 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_ / 2; ++k)
            twiddle_[k] = std::polar(1.0, base * static_cast<double>(k));
        bitrev_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n_; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n_ - 1 - b);
            bitrev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    /// In-place transform; inverse applies conjugate twiddles without the
    /// 1/n scaling (callers fold scaling into their own constants).
    void transform(cdouble* a, bool inverse) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t r = bitrev_[i];
            if (i < r) std::swap(a[i], a[r]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cdouble w = twiddle_[k * step];
                    if (inverse) w = std::conj(w);
                    const cdouble u = a[start + k];
                    const cdouble t = w * a[start + k + half];
                    a[start + k] = u + t;
                    a[start + k + half] = u - t;
                }
            }
        }
    }

private:
    std::size_t n_;
    std::size_t log2n_ = 0;
    std::vector<cdouble> twiddle_;
    std::vector<std::size_t> bitrev_;
};

/// Run fn(first, last) over [0, count) split across `threads` workers.
/// Each index is processed exactly once, so per-index work is
/// deterministic independent of the split.
template <class Fn>
void parallel_rows(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        fn(std::size_t{0}, count);
        return;
    }
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

/// Square 2D FFT on a row-major size x size buffer: FFT rows, transpose,
/// FFT rows again, transpose back.
class Plan2D {
public:
    explicit Plan2D(std::size_t size, unsigned threads = 1)
        : size_(size), line_(size), threads_(threads) {}

    std::size_t size() const { return size_; }

    void transform(std::vector<cdouble>& a, bool inverse) const {
        pass_rows(a, inverse);
        transpose(a);
        pass_rows(a, inverse);
        transpose(a);
    }

private:
    void pass_rows(std::vector<cdouble>& a, bool inverse) const {
        parallel_rows(size_, threads_, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r)
                line_.transform(a.data() + r * size_, inverse);
        });
    }

    void transpose(std::vector<cdouble>& a) const {
        for (std::size_t j = 0; j < size_; ++j)
            for (std::size_t k = j + 1; k < size_; ++k)
                std::swap(a[j * size_ + k], a[k * size_ + j]);
    }

    std::size_t size_;
    Radix2 line_;
    unsigned threads_;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace beltrami::fft
