#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "hardy/fft.hpp"
#include "hardy/grid.hpp"
#include "hardy/moments.hpp"

namespace hardy {

// ---------------------------------------------------------------------------
// Mollifiers and scale grids

enum class MollifierShape { gaussian, smooth_bump };

/// Closed-form φ with ∫φ = 1: the Gaussian π^{-d/2} e^{-|x|²} or the
/// normalized bump exp(-1/(1-|x|²)) on the unit ball.
struct Mollifier {
    MollifierShape shape = MollifierShape::gaussian;

    static Mollifier gaussian() { return {MollifierShape::gaussian}; }
    static Mollifier smooth_bump() { return {MollifierShape::smooth_bump}; }

    static Mollifier parse(const std::string& name) {
        if (name == "gaussian") return gaussian();
        if (name == "smooth-bump" || name == "smooth_bump" || name == "bump") return smooth_bump();
        throw ConfigError("unknown mollifier '" + name + "'");
    }

    std::string name() const { return shape == MollifierShape::gaussian ? "gaussian" : "smooth-bump"; }

    double support_radius() const { return shape == MollifierShape::gaussian ? kInfinity : 1.0; }

    double operator()(const Point& x, int dim) const {
        const double r2 = dim == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1];
        if (shape == MollifierShape::gaussian) return std::pow(M_PI, -0.5 * dim) * std::exp(-r2);
        if (r2 >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - r2)) / bump_mass(dim);
    }

    RealField field(int dim) const {
        return [m = *this, dim](const Point& x) { return m(x, dim); };
    }

    /// ∫ exp(-1/(1-|x|²)) over the unit ball of R^dim.
    static double bump_mass(int dim) {
        static const double mass[2] = {radial_mass(1), radial_mass(2)};
        return mass[dim - 1];
    }

private:
    static double radial_mass(int dim) {
        // Composite Simpson in the radius; the integrand is flat at s = 1.
        const int n = 200000;
        const double h = 1.0 / n;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double s = i * h;
            const double v = s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) * (dim == 1 ? 2.0 : 2.0 * M_PI * s) : 0.0;
            acc += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
        }
        return acc * h / 3.0;
    }
};

/// Geometric sequence of scales t_min … t_max.
struct ScaleGrid {
    std::vector<double> scales;

    static constexpr double kMaxRatio = 1.189207115002721;  // 2^{1/4}
    static constexpr std::size_t kMinCount = 16;

    static ScaleGrid geometric(double t_min, double t_max, double max_ratio = kMaxRatio) {
        if (!(t_min > 0.0) || !(t_max > t_min)) throw ConfigError("scale grid needs 0 < t_min < t_max");
        const auto steps = static_cast<std::size_t>(std::ceil(std::log(t_max / t_min) / std::log(max_ratio) - 1e-9));
        const std::size_t count = std::max(kMinCount, steps + 1);
        ScaleGrid g;
        g.scales.resize(count);
        const double q = std::log(t_max / t_min) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) g.scales[i] = t_min * std::exp(q * static_cast<double>(i));
        g.scales.back() = t_max;
        return g;
    }

    /// Scales from the resolvability floor 2h up to T.
    static ScaleGrid for_grid(const GridSpec& spec, double T, double max_ratio = kMaxRatio) {
        const double floor = 2.0 * spec.spacing();
        if (T <= floor) throw NumericalError("scale below grid resolution");
        return geometric(floor, T, max_ratio);
    }

    /// Same range with the count doubled (every old scale is kept).
    ScaleGrid refined() const {
        ScaleGrid g;
        for (std::size_t i = 0; i < scales.size(); ++i) {
            g.scales.push_back(scales[i]);
            if (i + 1 < scales.size()) g.scales.push_back(std::sqrt(scales[i] * scales[i + 1]));
        }
        return g;
    }

    std::size_t size() const { return scales.size(); }
    double t_min() const { return scales.front(); }
    double t_max() const { return scales.back(); }
};

// ---------------------------------------------------------------------------
// Small maximal function and the h^p / H^p estimators

/// max over the scale grid of |f ∗ φ_t|, a lower bound for sup over the continuum.
inline GridFunction small_maximal(const GridFunction& f, const Mollifier& phi, const ScaleGrid& scales) {
    const auto& g = f.spec();
    detail::PaddedConvolver conv(f);
    std::vector<double> best(f.size(), 0.0);
    const RealField field = phi.field(g.dim());
    for (double t : scales.scales) {
        const GridFunction ft = conv.convolve(dilate(g, field, t));
        for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], std::abs(ft[k]));
    }
    std::vector<cplx> out(best.begin(), best.end());
    return GridFunction(g, std::move(out));
}

struct MaximalNorm {
    double value = 0.0;
    std::size_t scale_count = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool non_cancelling = false;  ///< only set by Hp_norm
};

namespace detail {

inline double quasi_norm(const GridFunction& f, double p) {
    double acc = 0.0;
    for (const auto& v : f.values()) acc += std::pow(std::abs(v), p);
    acc *= f.spec().cell_volume();
    return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

/// Largest relative moment |∫f y^α| / ∫|f||y|^{|α|} over |α| ≤ N.
inline double relative_moment_defect(const GridFunction& f, int N) {
    const auto& g = f.spec();
    const PolySpace space(g.dim(), N);
    double worst = 0.0;
    for (const auto& a : space.basis()) {
        cplx num{0.0, 0.0};
        double den = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (f[k] == cplx{}) continue;
            const Point y = g.point(k);
            num += f[k] * a.monomial(y);
            den += std::abs(f[k]) * std::pow(norm(y, g.dim()), a.order());
        }
        if (den > 0.0) worst = std::max(worst, std::abs(num) / den);
    }
    return worst;
}

}  // namespace detail

/// ‖m_φ f‖_{L^p} with scales from 2h to 1 (or the given grid); a quasi-norm for p < 1.
inline MaximalNorm hp_norm(const GridFunction& f, const HardyIndex& idx, const Mollifier& phi,
                           const ScaleGrid* scales = nullptr) {
    const ScaleGrid grid = scales ? *scales : ScaleGrid::for_grid(f.spec(), 1.0);
    MaximalNorm out;
    out.value = detail::quasi_norm(small_maximal(f, phi, grid), idx.p);
    out.scale_count = grid.size();
    out.t_min = grid.t_min();
    out.t_max = grid.t_max();
    return out;
}

/**
 * Global maximal quasi-norm with scales up to T_max (default L/2, beyond which
 * periodic wrap-around corrupts the convolutions). Inputs whose moments up to
 * N_p do not vanish to 1e-8 are flagged, since the truncated value then
 * depends on T_max.
 */
inline MaximalNorm Hp_norm(const GridFunction& f, const HardyIndex& idx, const Mollifier& phi, double T_max = 0.0) {
    if (T_max <= 0.0) T_max = f.spec().half_width() / 2.0;
    const ScaleGrid grid = ScaleGrid::for_grid(f.spec(), T_max);
    MaximalNorm out = hp_norm(f, idx, phi, &grid);
    out.non_cancelling = detail::relative_moment_defect(f, idx.N) > 1e-8;
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form bumps and admissibility certification

/// A closed-form test function supported in the closed ball B(center, radius).
struct Bump {
    std::string kind;
    int dim = 1;
    Point center{0.0, 0.0};
    double radius = 1.0;
    RealField eval;

    double operator()(const Point& y) const { return eval(y); }
};

struct DerivativeBound {
    MultiIndex beta;
    double sup = 0.0;
    double bound = 0.0;
    double margin = 0.0;  ///< 1 − sup/bound
};

struct AdmissibilityReport {
    bool pass = true;
    bool support_ok = true;
    double support_leak = 0.0;
    std::vector<DerivativeBound> bounds;

    double worst_margin() const {
        double m = 1.0;
        for (const auto& b : bounds) m = std::min(m, b.margin);
        return m;
    }
};

namespace detail {

struct SamplingDensity {
    std::size_t per_axis_1d = 4001;
    std::size_t per_axis_2d = 161;
};

/// Centered finite-difference estimate of ∂^β f at y with step s.
inline double fd_derivative(const RealField& f, const Point& y, const MultiIndex& beta, double s) {
    const int b0 = beta.e[0];
    const int b1 = beta.dim == 2 ? beta.e[1] : 0;
    double acc = 0.0;
    for (int j0 = 0; j0 <= b0; ++j0) {
        const double w0 = static_cast<double>(binomial(static_cast<std::size_t>(b0), static_cast<std::size_t>(j0))) *
                          (((b0 - j0) % 2) ? -1.0 : 1.0);
        for (int j1 = 0; j1 <= b1; ++j1) {
            const double w1 =
                static_cast<double>(binomial(static_cast<std::size_t>(b1), static_cast<std::size_t>(j1))) *
                (((b1 - j1) % 2) ? -1.0 : 1.0);
            const Point z{y[0] + (j0 - 0.5 * b0) * s, y[1] + (j1 - 0.5 * b1) * s};
            acc += w0 * w1 * f(z);
        }
    }
    return acc / std::pow(s, beta.order());
}

/// Sampled sup of |∂^β f| over the box center ± half, for every |β| ≤ k.
inline std::vector<std::pair<MultiIndex, double>> derivative_sups(const RealField& f, int dim, const Point& center,
                                                                  double half, int k, const SamplingDensity& dens = {}) {
    const PolySpace orders(dim, k);
    std::vector<std::pair<MultiIndex, double>> out;
    for (const auto& b : orders.basis()) out.emplace_back(b, 0.0);
    const std::size_t n = dim == 1 ? dens.per_axis_1d : dens.per_axis_2d;
    const double step = 2.0 * half / static_cast<double>(n - 1);
    const double fd = 2e-3 * half;
    auto visit = [&](const Point& y) {
        for (auto& [b, sup] : out) {
            const double v = b.order() == 0 ? f(y) : fd_derivative(f, y, b, fd);
            sup = std::max(sup, std::abs(v));
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double y0 = center[0] - half + static_cast<double>(i) * step;
        if (dim == 1) {
            visit({y0, 0.0});
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) visit({y0, center[1] - half + static_cast<double>(j) * step});
    }
    return out;
}

/// Midpoint-rule integral over the box center ± half.
inline double box_integral(const RealField& f, int dim, const Point& center, double half, std::size_t n) {
    const double step = 2.0 * half / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y0 = center[0] - half + (static_cast<double>(i) + 0.5) * step;
        if (dim == 1) {
            acc += f({y0, 0.0});
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) acc += f({y0, center[1] - half + (static_cast<double>(j) + 0.5) * step});
    }
    return acc * (dim == 1 ? step : step * step);
}

}  // namespace detail

/**
 * Checks membership in the admissible family at scale t around x: support in
 * the closed ball B(x, t) and ‖∂^β φ‖_∞ ≤ t^{-dim-|β|} for |β| ≤ k, the sup
 * estimated by dense sampling with finite differences and 1% slack.
 */
inline AdmissibilityReport verify_admissible(const Bump& phi, int k, double t, const Point& x,
                                             const detail::SamplingDensity& dens = {}) {
    AdmissibilityReport rep;
    const int dim = phi.dim;
    const std::size_t n = dim == 1 ? dens.per_axis_1d : dens.per_axis_2d;
    const double half = 1.5 * t;
    const double step = 2.0 * half / static_cast<double>(n - 1);
    double peak = 0.0, leak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < (dim == 1 ? 1 : n); ++j) {
            const Point y{x[0] - half + static_cast<double>(i) * step,
                          dim == 1 ? 0.0 : x[1] - half + static_cast<double>(j) * step};
            const double v = std::abs(phi(y));
            peak = std::max(peak, v);
            if (norm(y - x, dim) > t * (1.0 + 1e-12)) leak = std::max(leak, v);
        }
    }
    rep.support_leak = leak;
    rep.support_ok = leak <= 1e-12 * std::max(peak, 1e-300);
    rep.pass = rep.support_ok;
    for (const auto& [beta, sup] : detail::derivative_sups(phi.eval, dim, x, t, k, dens)) {
        DerivativeBound b{beta, sup, std::pow(t, -dim - beta.order()), 0.0};
        b.margin = 1.0 - b.sup / b.bound;
        if (b.sup > 1.01 * b.bound) rep.pass = false;
        rep.bounds.push_back(b);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The moment-detecting bumps φ_0^{v,α} and φ^{x,α}

namespace detail {

/// Quintic smoothstep cutoff: 1 on [0, 3/2], 0 beyond 2, C² in between.
inline double cutoff(double s) {
    if (s <= 1.5) return 1.0;
    if (s >= 2.0) return 0.0;
    const double u = (2.0 - s) / 0.5;
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

/// Smooth perturbation for the fallback profile, supported where |y| > 1 and
/// |y − v/2| < 2 so neither the polynomial core nor the support moves.
inline double fallback_bump(const Point& y, const Point& v, int dim) {
    const double s = 1.4 / std::sqrt(2.0);
    const Point perp = dim == 2 ? Point{-v[1], v[0]} : Point{0.0, 0.0};
    const Point c{0.5 * v[0] + s * (v[0] + perp[0]), 0.5 * v[1] + s * (v[1] + perp[1])};
    const double q = norm(y - c, dim) / 0.45;
    if (q >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

/// Unscaled profile y^α η(|y − v/2|), optionally times (1 + fallback bump).
inline RealField phi0_profile(const Point& v, const MultiIndex& alpha, int dim, bool fallback) {
    return [v, alpha, dim, fallback](const Point& y) {
        const double eta = cutoff(norm(y - 0.5 * v, dim));
        if (eta == 0.0) return 0.0;
        double val = alpha.monomial(y) * eta;
        if (fallback) val *= 1.0 + fallback_bump(y, v, dim);
        return val;
    };
}

inline std::vector<Point> direction_set(int dim) {
    if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
    std::vector<Point> out;
    for (int i = 0; i < 32; ++i) {
        const double th = 2.0 * M_PI * i / 32.0;
        out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
}

/// Derivative budget for φ_0: 2^{-|β|-2dim}. Rescaling by y ↦ y/(2|x|) then
/// lands exactly on the family bound t^{-dim-|β|} with t = 4|x|.
inline double phi0_budget(int dim, int order) { return std::pow(2.0, -order - 2 * dim); }

/// 0.9 × the largest C with ‖∂^β(C·profile)‖ within budget, minimized over
/// the direction set so one constant serves every direction.
inline double phi0_constant(const MultiIndex& alpha, int dim, int k, bool fallback) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int, int, bool>, double> cache;
    const auto key = std::make_tuple(dim, alpha.e[0], alpha.e[1], k, fallback);
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    double best = kInfinity;
    for (const auto& v : direction_set(dim)) {
        const auto sups = derivative_sups(phi0_profile(v, alpha, dim, fallback), dim, 0.5 * v, 2.0, k);
        for (const auto& [beta, sup] : sups) {
            if (sup > 0.0) best = std::min(best, phi0_budget(dim, beta.order()) / sup);
        }
    }
    const double C = 0.9 * best;
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = C;
    return C;
}

}  // namespace detail

struct Phi0 {
    Bump bump;
    double constant = 0.0;  ///< C_α
    bool fallback = false;
    double integral = 0.0;
    std::vector<DerivativeBound> certificate;  ///< against 2^{-|β|-2dim}
};

/**
 * φ_0^{v,α}(y) = C_α y^α η(|y − v/2|): supported in B(v/2, 2), equal to
 * C_α y^α on |y| < 1, with derivative bounds up to order N_p + 1 and a
 * nonvanishing integral (|∫φ_0| ≥ 1e-4·C_α, otherwise the fallback profile is
 * used).
 */
inline Phi0 build_phi0(const Point& v_in, const MultiIndex& alpha, const HardyIndex& idx) {
    const int dim = idx.dim;
    if (alpha.dim != dim) throw ConfigError("multi-index dimension does not match");
    if (alpha.order() > idx.N) throw ConfigError("phi0 requires |alpha| <= N_p");
    const double len = norm(v_in, dim);
    if (!(len > 0.0)) throw ConfigError("phi0 direction must be nonzero");
    const Point v = dim == 1 ? Point{v_in[0] / len, 0.0} : (1.0 / len) * v_in;
    const int k = idx.N + 1;

    for (bool fallback : {false, true}) {
        const double C = detail::phi0_constant(alpha, dim, k, fallback);
        RealField profile = detail::phi0_profile(v, alpha, dim, fallback);
        RealField f = [profile, C](const Point& y) { return C * profile(y); };
        // The threshold applies to ∫φ_0 / C_α so it does not depend on how
        // small the derivative budget forces C_α to be.
        const double shape = detail::box_integral(profile, dim, 0.5 * v, 2.0, dim == 1 ? 8000 : 400);
        if (std::abs(shape) < 1e-4) continue;
        const double integral = C * shape;
        Phi0 out;
        out.bump = Bump{"phi0", dim, 0.5 * v, 2.0, f};
        out.constant = C;
        out.fallback = fallback;
        out.integral = integral;
        for (const auto& [beta, sup] : detail::derivative_sups(f, dim, 0.5 * v, 2.0, k)) {
            const double bound = detail::phi0_budget(dim, beta.order());
            out.certificate.push_back({beta, sup, bound, 1.0 - sup / bound});
        }
        return out;
    }
    throw NumericalError("degenerate φ0 construction");
}

struct PhiXAlpha {
    Bump bump;
    double t = 0.0;         ///< 4|x − x0|
    double constant = 0.0;  ///< C_α of the underlying φ_0
};

/// φ^{x,α}(y) = |x|^{-dim} φ_0^{x/|x|,α}(y/(2|x|)), translated so the
/// moment center sits at x0.
inline PhiXAlpha phi_x_alpha(const Point& x, const MultiIndex& alpha, const HardyIndex& idx,
                             const Point& x0 = {0.0, 0.0}) {
    const int dim = idx.dim;
    const Point rel = x - x0;
    const double d = norm(rel, dim);
    if (!(d > 0.0)) throw ConfigError("phi_x_alpha requires x != x0");
    const Phi0 base = build_phi0(rel, alpha, idx);
    const double amp = std::pow(d, -dim);
    const double inv = 1.0 / (2.0 * d);
    RealField phi0 = base.bump.eval;
    RealField f = [phi0, amp, inv, x0](const Point& y) { return amp * phi0(inv * (y - x0)); };
    return {Bump{"phi_x_alpha", dim, x, 4.0 * d, f}, 4.0 * d, base.constant};
}

// ---------------------------------------------------------------------------
// Finite test dictionaries and the grand maximal function

/// A normalized smooth bump c·t^{-dim}ψ((y − x)/t) at every translate x.
struct TranslateEntry {
    double t = 0.0;
    double amplitude = 1.0;  ///< c
};

/// φ^{x,α} attached to a single site x.
struct SiteEntry {
    std::size_t index = 0;  ///< flat grid index of x
    Point x{0.0, 0.0};
    MultiIndex alpha;
    PhiXAlpha phi;
};

struct TestDictionary {
    int dim = 1;
    int k = 1;
    double T = 1.0;
    double c_phi = 0.0;  ///< normalization of the smooth-bump mollifier
    std::vector<TranslateEntry> translates;
    std::vector<SiteEntry> sites;

    std::size_t size() const { return translates.size() + sites.size(); }
};

namespace detail {

/// Largest c with c·ψ_t admissible for every t (the bound is scale invariant).
inline double bump_normalization(int dim, int k) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find({dim, k}); it != cache.end()) return it->second;
    const RealField psi = Mollifier::smooth_bump().field(dim);
    double c = kInfinity;
    for (const auto& [beta, sup] : derivative_sups(psi, dim, {0.0, 0.0}, 1.0, k)) c = std::min(c, 1.0 / sup);
    c *= 0.995;
    cache[{dim, k}] = c;
    return c;
}

}  // namespace detail

/// Dictionary holding the normalized smooth-bump mollifier at every scale of `scales`.
inline TestDictionary make_dictionary(int dim, int k, const ScaleGrid& scales) {
    TestDictionary d;
    d.dim = dim;
    d.k = k;
    d.T = scales.t_max();
    d.c_phi = detail::bump_normalization(dim, k);
    for (double t : scales.scales) d.translates.push_back({t, d.c_phi});
    return d;
}

/// The translate entry as a Bump centered at x.
inline Bump translate_bump(const TestDictionary& d, const TranslateEntry& e, const Point& x) {
    const auto psi = Mollifier::smooth_bump();
    const int dim = d.dim;
    const double amp = e.amplitude * std::pow(e.t, -dim);
    const double inv = 1.0 / e.t;
    return Bump{"translate", dim, x, e.t, [psi, dim, amp, inv, x](const Point& y) { return amp * psi(inv * (y - x), dim); }};
}

/**
 * Adds φ^{x,α} entries for the grid sites x with r/2 < |x − x0| and
 * 4|x − x0| < T, every `stride` cells along each axis.
 */
inline void add_moment_sites(TestDictionary& d, const GridSpec& g, const Point& x0, double r,
                             const std::vector<MultiIndex>& alphas, const HardyIndex& idx, std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto [i0, i1] = g.unflat(k);
        if (i0 % stride != 0 || (g.dim() == 2 && i1 % stride != 0)) continue;
        const Point x = g.point(k);
        const double dist = norm(x - x0, g.dim());
        if (!(dist > 0.5 * r) || !(4.0 * dist < d.T)) continue;
        for (const auto& a : alphas) d.sites.push_back({k, x, a, phi_x_alpha(x, a, idx, x0)});
    }
}

struct DictionaryCertificate {
    std::size_t checked = 0;
    std::size_t failed = 0;
    double worst_margin = 1.0;
};

/// Runs verify_admissible on every translate scale and on every `site_stride`-th site.
inline DictionaryCertificate certify(const TestDictionary& d, std::size_t site_stride = 1) {
    DictionaryCertificate c;
    auto take = [&](const AdmissibilityReport& r) {
        ++c.checked;
        if (!r.pass) ++c.failed;
        c.worst_margin = std::min(c.worst_margin, r.worst_margin());
    };
    for (const auto& e : d.translates) take(verify_admissible(translate_bump(d, e, {0.0, 0.0}), d.k, e.t, {0.0, 0.0}));
    if (site_stride == 0) site_stride = 1;
    for (std::size_t i = 0; i < d.sites.size(); i += site_stride) {
        const auto& s = d.sites[i];
        take(verify_admissible(s.phi.bump, d.k, s.phi.t, s.x));
    }
    return c;
}

/// Direct pairing ⟨f, φ⟩ = h^dim Σ f(y) φ(y) over the samples of supp φ.
inline cplx pair_with_bump(const GridFunction& f, const Bump& phi) {
    const auto& g = f.spec();
    cplx acc{0.0, 0.0};
    const Ball support{phi.center, phi.radius * (1.0 + 1e-12)};
    // Clip to the domain; samples beyond it are zero.
    std::vector<std::size_t> idx;
    if (support.inside(g)) {
        idx = ball_indices(g, support);
    } else {
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (support.contains(g.point(k), g.dim())) idx.push_back(k);
        }
    }
    for (auto k : idx) {
        if (f[k] == cplx{}) continue;
        acc += f[k] * phi(g.point(k));
    }
    return acc * g.cell_volume();
}

/**
 * max over the dictionary of |⟨f, φ⟩|: translate entries at every sample,
 * site entries at their own sample. A lower bound for the grand maximal
 * function over the full admissible family.
 */
inline GridFunction grand_maximal(const GridFunction& f, const TestDictionary& d) {
    const auto& g = f.spec();
    if (d.size() == 0) throw ConfigError("empty test dictionary");
    if (d.dim != g.dim()) throw ConfigError("dictionary dimension does not match grid");
    std::vector<double> best(f.size(), 0.0);
    if (!d.translates.empty()) {
        detail::PaddedConvolver conv(f);
        const RealField psi = Mollifier::smooth_bump().field(g.dim());
        for (const auto& e : d.translates) {
            GridFunction kernel = dilate(g, psi, e.t);
            kernel *= cplx{e.amplitude, 0.0};
            const GridFunction v = conv.convolve(kernel);
            for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], std::abs(v[k]));
        }
    }
    for (const auto& s : d.sites) best[s.index] = std::max(best[s.index], std::abs(pair_with_bump(f, s.phi.bump)));
    std::vector<cplx> out(best.begin(), best.end());
    return GridFunction(g, std::move(out));
}

/// Line-oriented manifest: one entry per line with kind, scale and parameters.
inline void write_manifest(std::ostream& os, const TestDictionary& d) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "dictionary dim=%d k=%d T=%.17g c_phi=%.17g entries=%zu\n", d.dim, d.k, d.T, d.c_phi,
                  d.size());
    os << buf;
    for (const auto& e : d.translates) {
        std::snprintf(buf, sizeof buf, "translate t=%.17g amplitude=%.17g\n", e.t, e.amplitude);
        os << buf;
    }
    for (const auto& s : d.sites) {
        std::snprintf(buf, sizeof buf, "site x=%.17g,%.17g alpha=%s t=%.17g C=%.17g\n", s.x[0], s.x[1],
                      s.alpha.str().c_str(), s.phi.t, s.phi.constant);
        os << buf;
    }
}

}  // namespace hardy
