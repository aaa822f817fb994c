#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// fftw_malloc-backed complex buffer. Every transform runs on one of these so
/// that SIMD alignment (and with it the codelet choice) never varies.
class FftBuffer {
public:
    explicit FftBuffer(std::size_t n) : n_(n), data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data_ == nullptr) throw NumericalError("fftw_malloc failed");
        std::memset(data_, 0, sizeof(fftw_complex) * n);
    }
    ~FftBuffer() { fftw_free(data_); }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    FftBuffer(FftBuffer&& o) noexcept : n_(o.n_), data_(o.data_) {
        o.data_ = nullptr;
        o.n_ = 0;
    }

    std::size_t size() const { return n_; }
    cplx* data() { return reinterpret_cast<cplx*>(data_); }
    const cplx* data() const { return reinterpret_cast<const cplx*>(data_); }
    cplx& operator[](std::size_t k) { return data()[k]; }
    const cplx& operator[](std::size_t k) const { return data()[k]; }
    fftw_complex* raw() { return data_; }

private:
    std::size_t n_;
    fftw_complex* data_;
};

/// In-place unnormalized DFT of an n (dim=1) or n x n (dim=2) array.
/// sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void fft_inplace(FftBuffer& buf, int dim, std::size_t n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = dim == 1 ? fftw_plan_dft_1d(static_cast<int>(n), buf.raw(), buf.raw(), sign, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf.raw(), buf.raw(), sign,
                                           FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw NumericalError("fftw plan creation failed");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

/// Signed integer frequency of DFT index k on an n-point axis, in [-n/2, n/2).
inline long signed_frequency(std::size_t k, std::size_t n) {
    return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

/**
 * Linear convolution with a kernel given by its samples at offsets.
 *
 * The padded grid has side P = 2m. `khat` holds the kernel value at
 * offset o (in cells, o in [-m, m)) at index o mod P along each axis, already
 * transformed. Result_i = h^dim Σ_j f_j k(i - j) for i, j on the m-grid, exact
 * for any kernel supported on offsets in [-m, m).
 */
class PaddedConvolver {
public:
    explicit PaddedConvolver(const GridFunction& f)
        : spec_(f.spec()), padded_side_(2 * f.spec().points_per_axis()), fhat_(padded_count()) {
        for (std::size_t k = 0; k < f.size(); ++k) {
            auto [i0, i1] = spec_.unflat(k);
            fhat_[padded_flat(i0, i1)] = f[k];
        }
        fft_inplace(fhat_, spec_.dim(), padded_side_, FFTW_FORWARD);
    }

    const GridSpec& spec() const { return spec_; }

    /// Convolution with a grid kernel whose origin is the grid's center sample.
    GridFunction convolve(const GridFunction& kernel) const {
        if (!(kernel.spec() == spec_)) throw ConfigError("grid mismatch");
        return with_kernel(kernel_spectrum(kernel, false));
    }

    /// Convolution with the transformed padded kernel (see class comment).
    GridFunction with_kernel(const FftBuffer& khat) const {
        FftBuffer work(padded_count());
        for (std::size_t k = 0; k < padded_count(); ++k) work[k] = fhat_[k] * khat[k];
        fft_inplace(work, spec_.dim(), padded_side_, FFTW_BACKWARD);
        const double scale = spec_.cell_volume() / static_cast<double>(padded_count());
        std::vector<cplx> out(spec_.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
            auto [i0, i1] = spec_.unflat(k);
            out[k] = work[padded_flat(i0, i1)] * scale;
        }
        return GridFunction(spec_, std::move(out));
    }

    /**
     * Padded transform of a grid kernel. With reflect_conjugate the kernel
     * k*(u) = conj(k(-u)) is used instead; offsets of the reflected kernel
     * span (-m/2, m/2], which the padded grid holds without loss.
     */
    FftBuffer kernel_spectrum(const GridFunction& kernel, bool reflect_conjugate) const {
        FftBuffer khat(padded_count());
        const long half = static_cast<long>(spec_.center_index());
        const long P = static_cast<long>(padded_side_);
        auto wrap = [P](long o) { return static_cast<std::size_t>(((o % P) + P) % P); };
        for (std::size_t k = 0; k < kernel.size(); ++k) {
            auto [i0, i1] = spec_.unflat(k);
            long o0 = static_cast<long>(i0) - half;
            long o1 = spec_.dim() == 1 ? 0 : static_cast<long>(i1) - half;
            cplx v = kernel[k];
            if (reflect_conjugate) {
                o0 = -o0;
                o1 = -o1;
                v = std::conj(v);
            }
            khat[spec_.dim() == 1 ? wrap(o0) : wrap(o0) * padded_side_ + wrap(o1)] = v;
        }
        fft_inplace(khat, spec_.dim(), padded_side_, FFTW_FORWARD);
        return khat;
    }

private:
    std::size_t padded_count() const { return spec_.dim() == 1 ? padded_side_ : padded_side_ * padded_side_; }
    std::size_t padded_flat(std::size_t i0, std::size_t i1) const {
        return spec_.dim() == 1 ? i0 : i0 * padded_side_ + i1;
    }

    GridSpec spec_;
    std::size_t padded_side_;
    FftBuffer fhat_;
};

}  // namespace detail

/// f ∗ g scaled by h^dim, computed on a zero-padded grid of twice the side.
/// g is read as a kernel whose origin is the center sample.
inline GridFunction convolve(const GridFunction& f, const GridFunction& g) {
    f.check_same(g);
    detail::PaddedConvolver conv(f);
    return conv.with_kernel(conv.kernel_spectrum(g, false));
}

/// Unnormalized DFT of the samples (used for Plancherel checks).
inline std::vector<cplx> spectrum(const GridFunction& f) {
    detail::FftBuffer buf(f.size());
    std::copy(f.values().begin(), f.values().end(), buf.data());
    detail::fft_inplace(buf, f.spec().dim(), f.spec().points_per_axis(), FFTW_FORWARD);
    return {buf.data(), buf.data() + buf.size()};
}

/// Angular frequency of DFT index k: ξ = 2π k' / (2L), k' the signed index.
inline double angular_frequency(const GridSpec& g, std::size_t k) {
    return M_PI * static_cast<double>(detail::signed_frequency(k, g.points_per_axis())) / g.half_width();
}

namespace detail {

/// Multiplier array on the periodic DFT lattice. Nyquist entries average the
/// symbol over the aliased sign flips so Hermitian symbols stay Hermitian on
/// the lattice.
inline std::vector<cplx> multiplier_lattice(const GridSpec& g, const Field& symbol) {
    const std::size_t m = g.points_per_axis();
    const std::size_t nyq = m / 2;
    std::vector<cplx> out(g.size());
    auto eval = [&](const Point& xi, std::size_t k) {
        cplx v = symbol(xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("singular symbol at frequency " + std::to_string(k));
        }
        return v;
    };
    for (std::size_t k = 0; k < out.size(); ++k) {
        auto [k0, k1] = g.unflat(k);
        Point xi{angular_frequency(g, k0), g.dim() == 2 ? angular_frequency(g, k1) : 0.0};
        const bool n0 = k0 == nyq;
        const bool n1 = g.dim() == 2 && k1 == nyq;
        if (!n0 && !n1) {
            out[k] = eval(xi, k);
            continue;
        }
        cplx acc{0.0, 0.0};
        int count = 0;
        for (int s0 : {1, -1}) {
            if (!n0 && s0 == -1) continue;
            for (int s1 : {1, -1}) {
                if (!n1 && s1 == -1) continue;
                acc += eval(Point{s0 * xi[0], s1 * xi[1]}, k);
                ++count;
            }
        }
        out[k] = acc / static_cast<double>(count);
    }
    return out;
}

inline bool lattice_hermitian(const GridSpec& g, const std::vector<cplx>& mult) {
    const std::size_t m = g.points_per_axis();
    double scale = 0.0;
    for (const auto& v : mult) scale = std::max(scale, std::abs(v));
    const double tol = 1e-14 * std::max(scale, 1.0);
    for (std::size_t k = 0; k < mult.size(); ++k) {
        auto [k0, k1] = g.unflat(k);
        const std::size_t j0 = (m - k0) % m;
        const std::size_t j1 = g.dim() == 1 ? 0 : (m - k1) % m;
        if (std::abs(mult[k] - std::conj(mult[g.flat(j0, j1)])) > tol) return false;
    }
    return true;
}

}  // namespace detail

/// Periodic Fourier multiplier: inverse DFT of symbol(ξ) times the DFT of f.
/// Real input with a Hermitian symbol yields exactly real output.
inline GridFunction fourier_multiplier(const GridFunction& f, const Field& symbol, bool conjugate_symbol = false) {
    const auto& g = f.spec();
    auto mult = detail::multiplier_lattice(g, symbol);
    if (conjugate_symbol) {
        for (auto& v : mult) v = std::conj(v);
    }
    detail::FftBuffer buf(f.size());
    std::copy(f.values().begin(), f.values().end(), buf.data());
    detail::fft_inplace(buf, g.dim(), g.points_per_axis(), FFTW_FORWARD);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= mult[k];
    detail::fft_inplace(buf, g.dim(), g.points_per_axis(), FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(f.size());
    const bool real_out = f.is_real() && detail::lattice_hermitian(g, mult);
    std::vector<cplx> out(f.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = buf[k] * scale;
        if (real_out) out[k].imag(0.0);
    }
    return GridFunction(g, std::move(out));
}

}  // namespace hardy
