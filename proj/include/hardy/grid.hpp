#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardy/error.hpp"

namespace hardy {

using cplx = std::complex<double>;

/// A point of R^dim. In one dimension the second coordinate is ignored and kept at zero.
using Point = std::array<double, 2>;

inline double norm(const Point& x, int dim) {
    return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * Uniform periodic grid on the centered cube [-L, L)^dim with m points per axis.
 *
 * Sample i along an axis sits at -L + i*h, h = 2L/m, so the origin is the
 * sample with index m/2. Flat indices are lexicographic with the first axis
 * slowest.
 */
class GridSpec {
public:
    static constexpr std::size_t kMaxSamples = std::size_t{1} << 24;

    GridSpec(int dim, double half_width, std::size_t points_per_axis)
        : dim_(dim), half_width_(half_width), m_(points_per_axis) {
        if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
        if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("grid half-width must be positive");
        if (m_ < 8 || (m_ & (m_ - 1)) != 0) throw ConfigError("points per axis must be a power of two >= 8");
        std::size_t total = m_;
        if (dim == 2) {
            if (m_ > kMaxSamples / m_) throw ConfigError("grid exceeds 2^24 samples");
            total *= m_;
        }
        if (total > kMaxSamples) throw ConfigError("grid exceeds 2^24 samples");
        size_ = total;
    }

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    std::size_t points_per_axis() const { return m_; }
    double spacing() const { return 2.0 * half_width_ / static_cast<double>(m_); }
    double cell_volume() const { return dim_ == 1 ? spacing() : spacing() * spacing(); }
    std::size_t size() const { return size_; }

    double coord(std::size_t i) const { return -half_width_ + static_cast<double>(i) * spacing(); }

    std::size_t flat(std::size_t i0, std::size_t i1 = 0) const { return dim_ == 1 ? i0 : i0 * m_ + i1; }

    std::array<std::size_t, 2> unflat(std::size_t k) const {
        if (dim_ == 1) return {k, 0};
        return {k / m_, k % m_};
    }

    Point point(std::size_t k) const {
        auto [i0, i1] = unflat(k);
        return {coord(i0), dim_ == 1 ? 0.0 : coord(i1)};
    }

    /// Index of the origin along each axis.
    std::size_t center_index() const { return m_ / 2; }

    /// Nearest axis index to coordinate x, or nullopt when x lies outside the grid.
    std::optional<std::size_t> nearest_index(double x) const {
        const double u = std::round((x + half_width_) / spacing());
        if (u < 0.0 || u >= static_cast<double>(m_)) return std::nullopt;
        return static_cast<std::size_t>(u);
    }

    bool operator==(const GridSpec& o) const {
        return dim_ == o.dim_ && half_width_ == o.half_width_ && m_ == o.m_;
    }

private:
    int dim_;
    double half_width_;
    std::size_t m_;
    std::size_t size_ = 0;
};

/// Open ball B(center, radius).
struct Ball {
    Point center{0.0, 0.0};
    double radius = 1.0;

    bool contains(const Point& x, int dim) const { return norm(x - center, dim) < radius; }

    /// True when the closed ball lies inside the grid's cube [-L, L]^dim.
    bool inside(const GridSpec& g) const {
        const double L = g.half_width();
        for (int a = 0; a < g.dim(); ++a) {
            if (center[a] - radius < -L || center[a] + radius > L) return false;
        }
        return true;
    }

    double volume(int dim) const { return dim == 1 ? 2.0 * radius : M_PI * radius * radius; }
};

inline Ball make_ball(const Point& center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
    return Ball{center, radius};
}

/// Flat indices of the samples strictly inside B, in increasing order.
inline std::vector<std::size_t> ball_indices(const GridSpec& g, const Ball& b) {
    std::vector<std::size_t> out;
    const double h = g.spacing();
    const double L = g.half_width();
    const auto m = static_cast<long>(g.points_per_axis());
    auto range = [&](double c) {
        long lo = static_cast<long>(std::floor((c - b.radius + L) / h)) - 1;
        long hi = static_cast<long>(std::ceil((c + b.radius + L) / h)) + 1;
        return std::pair<long, long>{std::max(0L, lo), std::min(m - 1, hi)};
    };
    auto [a0, b0] = range(b.center[0]);
    if (g.dim() == 1) {
        for (long i = a0; i <= b0; ++i) {
            auto k = static_cast<std::size_t>(i);
            if (b.contains(g.point(k), 1)) out.push_back(k);
        }
        return out;
    }
    auto [a1, b1] = range(b.center[1]);
    for (long i = a0; i <= b0; ++i) {
        for (long j = a1; j <= b1; ++j) {
            auto k = g.flat(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (b.contains(g.point(k), 2)) out.push_back(k);
        }
    }
    return out;
}

/// Samples of a function on a GridSpec. Values are complex; real functions
/// carry zero imaginary parts.
class GridFunction {
public:
    explicit GridFunction(GridSpec spec) : spec_(spec), values_(spec.size(), cplx{0.0, 0.0}) {}

    GridFunction(GridSpec spec, std::vector<cplx> values) : spec_(spec), values_(std::move(values)) {
        if (values_.size() != spec_.size()) throw ConfigError("sample count does not match grid");
        for (const auto& v : values_) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("non-finite sample");
        }
    }

    template <class F>
    static GridFunction sample(const GridSpec& spec, F&& field) {
        std::vector<cplx> v(spec.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = cplx(field(spec.point(k)));
        return GridFunction(spec, std::move(v));
    }

    static GridFunction constant(const GridSpec& spec, cplx c) {
        return GridFunction(spec, std::vector<cplx>(spec.size(), c));
    }

    /// Unit-mass spike on the sample nearest to x (value 1/h^dim there).
    static GridFunction spike(const GridSpec& spec, const Point& x = {0.0, 0.0}) {
        GridFunction f(spec);
        auto i0 = spec.nearest_index(x[0]);
        auto i1 = spec.dim() == 2 ? spec.nearest_index(x[1]) : std::optional<std::size_t>{0};
        if (!i0 || !i1) throw ConfigError("spike location outside the grid");
        f[spec.flat(*i0, *i1)] = 1.0 / spec.cell_volume();
        return f;
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return values_.size(); }
    cplx& operator[](std::size_t k) { return values_[k]; }
    const cplx& operator[](std::size_t k) const { return values_[k]; }
    std::span<const cplx> values() const { return values_; }
    std::span<cplx> values() { return values_; }
    Point point(std::size_t k) const { return spec_.point(k); }

    bool is_real(double tol = 0.0) const {
        for (const auto& v : values_) {
            if (std::abs(v.imag()) > tol) return false;
        }
        return true;
    }

    double max_abs() const {
        double out = 0.0;
        for (const auto& v : values_) out = std::max(out, std::abs(v));
        return out;
    }

    GridFunction& operator+=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(cplx s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    /// Pointwise product.
    GridFunction& operator*=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(cplx s, GridFunction a) { return a *= s; }
    friend GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }

    void check_same(const GridFunction& o) const {
        if (!(spec_ == o.spec_)) throw ConfigError("grid mismatch");
    }

private:
    GridSpec spec_;
    std::vector<cplx> values_;
};

/// Integration region: the whole grid, the inside of a ball, or its complement.
struct Region {
    enum class Kind { whole, inside, outside };
    Kind kind = Kind::whole;
    Ball ball{};

    static Region whole() { return {}; }
    static Region inside(const Ball& b) { return {Kind::inside, b}; }
    static Region outside(const Ball& b) { return {Kind::outside, b}; }

    bool contains(const Point& x, int dim) const {
        switch (kind) {
            case Kind::whole: return true;
            case Kind::inside: return ball.contains(x, dim);
            case Kind::outside: return !ball.contains(x, dim);
        }
        return true;
    }
};

/// Midpoint (rectangle) rule: h^dim times the sample sum.
inline cplx integrate(const GridFunction& f) {
    cplx s{0.0, 0.0};
    for (const auto& v : f.values()) s += v;
    return s * f.spec().cell_volume();
}

/// ∫ f conj(g).
inline cplx inner(const GridFunction& f, const GridFunction& g) {
    f.check_same(g);
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * std::conj(g[k]);
    return s * f.spec().cell_volume();
}

/// Bilinear pairing ∫ f g.
inline cplx pairing(const GridFunction& f, const GridFunction& g) {
    f.check_same(g);
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
    return s * f.spec().cell_volume();
}

namespace detail {

/// (∫_region |f|^s)^{1/s} for any s > 0 (a quasi-norm when s < 1), or the
/// maximum modulus for s = ∞.
inline double lebesgue_norm(const GridFunction& f, double s, const Region& region) {
    const auto& g = f.spec();
    std::size_t count = 0;
    if (std::isinf(s)) {
        double m = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (!region.contains(g.point(k), g.dim())) continue;
            ++count;
            m = std::max(m, std::abs(f[k]));
        }
        if (count == 0) throw NumericalError("degenerate region");
        return m;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!region.contains(g.point(k), g.dim())) continue;
        ++count;
        const double a = std::abs(f[k]);
        if (a > 0.0) acc += s == 2.0 ? a * a : (s == 1.0 ? a : std::pow(a, s));
    }
    if (count == 0) throw NumericalError("degenerate region");
    acc *= g.cell_volume();
    return s == 1.0 ? acc : (s == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / s));
}

}  // namespace detail

/// L^s norm over a region, s >= 1 or s = ∞.
inline double lp_norm(const GridFunction& f, double s, const Region& region = Region::whole()) {
    if (!(s >= 1.0)) throw ConfigError("lp_norm requires s >= 1 or s = infinity");
    return detail::lebesgue_norm(f, s, region);
}

/// Copy of f zeroed outside (inside = true) or inside (inside = false) B.
inline GridFunction restrict(const GridFunction& f, const Ball& b, bool inside) {
    GridFunction out = f;
    const int dim = f.spec().dim();
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (b.contains(out.point(k), dim) != inside) out[k] = 0.0;
    }
    return out;
}

/// A closed-form function of a point, used for mollifiers, bumps and symbols.
using Field = std::function<cplx(const Point&)>;
using RealField = std::function<double(const Point&)>;

/// Samples of t^{-dim} φ(x/t). Closed forms are re-evaluated, never resampled.
inline GridFunction dilate(const GridSpec& spec, const RealField& phi, double t) {
    if (!(t > 0.0)) throw ConfigError("dilation scale must be positive");
    if (t < 2.0 * spec.spacing()) throw NumericalError("scale below grid resolution");
    const double amp = std::pow(t, -spec.dim());
    const double inv = 1.0 / t;
    return GridFunction::sample(spec, [&](const Point& x) { return amp * phi(inv * x); });
}

/// Samples of t^{-dim} f(x/t) for a sampled f, by multilinear interpolation
/// (zero outside the grid).
inline GridFunction dilate(const GridFunction& f, double t) {
    const auto& g = f.spec();
    if (!(t > 0.0)) throw ConfigError("dilation scale must be positive");
    if (t < 2.0 * g.spacing()) throw NumericalError("scale below grid resolution");
    const double h = g.spacing();
    const double L = g.half_width();
    const auto m = static_cast<long>(g.points_per_axis());
    auto axis = [&](double x, long& i, double& w) {
        const double u = (x + L) / h;
        i = static_cast<long>(std::floor(u));
        w = u - static_cast<double>(i);
    };
    auto at = [&](long i, long j) -> cplx {
        if (i < 0 || i >= m || j < 0 || j >= m) return 0.0;
        return f[g.flat(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
    };
    const double amp = std::pow(t, -g.dim());
    return GridFunction::sample(g, [&](const Point& x) {
        long i0 = 0, i1 = 0;
        double w0 = 0.0, w1 = 0.0;
        axis(x[0] / t, i0, w0);
        if (g.dim() == 1) return amp * ((1 - w0) * at(i0, 0) + w0 * at(i0 + 1, 0));
        axis(x[1] / t, i1, w1);
        return amp * ((1 - w0) * (1 - w1) * at(i0, i1) + w0 * (1 - w1) * at(i0 + 1, i1) +
                      (1 - w0) * w1 * at(i0, i1 + 1) + w0 * w1 * at(i0 + 1, i1 + 1));
    });
}

/// Copy of f shifted by whole cells (periodic).
inline GridFunction shift_cells(const GridFunction& f, long s0, long s1 = 0) {
    const auto& g = f.spec();
    const auto m = static_cast<long>(g.points_per_axis());
    GridFunction out(g);
    auto wrap = [m](long i) { return static_cast<std::size_t>(((i % m) + m) % m); };
    for (std::size_t k = 0; k < f.size(); ++k) {
        auto [i0, i1] = g.unflat(k);
        const std::size_t j0 = wrap(static_cast<long>(i0) + s0);
        const std::size_t j1 = g.dim() == 1 ? 0 : wrap(static_cast<long>(i1) + s1);
        out[g.flat(j0, j1)] = f[k];
    }
    return out;
}

}  // namespace hardy
