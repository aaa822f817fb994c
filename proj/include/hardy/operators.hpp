#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/fft.hpp"
#include "hardy/grid.hpp"
#include "hardy/moments.hpp"

namespace hardy {

using ParamMap = std::map<std::string, double>;

/**
 * A linear operator on grid functions. Multipliers act periodically through
 * the DFT; kernels act by zero-padded convolution; matrices act as h^dim M f;
 * pointwise operators multiply by a function of x; compositions apply their
 * parts left to right.
 */
struct OperatorSpec {
    enum class Kind { multiplier, kernel, matrix, pointwise, composition };

    Kind kind = Kind::multiplier;
    std::string name;
    ParamMap params;  ///< claimed (μ, δ, σ, ...) and construction parameters

    Field symbol;                         // multiplier
    Field kernel_field;                   // kernel, as a function of x − y
    std::optional<GridFunction> kernel;   // kernel, sampled (origin at the center sample)
    bool reflected = false;               // kernel: use conj(k(−u)) instead of k(u)
    Eigen::MatrixXcd matrix;              // matrix
    std::optional<GridSpec> matrix_grid;  // matrix
    Field factor;                         // pointwise
    std::vector<OperatorSpec> parts;      // composition

    static OperatorSpec make_multiplier(std::string name, Field symbol, ParamMap params = {}) {
        OperatorSpec t;
        t.kind = Kind::multiplier;
        t.name = std::move(name);
        t.symbol = std::move(symbol);
        t.params = std::move(params);
        return t;
    }
    static OperatorSpec make_kernel(std::string name, Field k, ParamMap params = {}) {
        OperatorSpec t;
        t.kind = Kind::kernel;
        t.name = std::move(name);
        t.kernel_field = std::move(k);
        t.params = std::move(params);
        return t;
    }
    static OperatorSpec make_kernel(std::string name, GridFunction k, ParamMap params = {}) {
        OperatorSpec t;
        t.kind = Kind::kernel;
        t.name = std::move(name);
        t.kernel = std::move(k);
        t.params = std::move(params);
        return t;
    }
    static OperatorSpec make_matrix(std::string name, const GridSpec& g, Eigen::MatrixXcd M) {
        const auto n = static_cast<Eigen::Index>(g.size());
        if (M.rows() != n || M.cols() != n) throw ConfigError("operator matrix must be square with side m^dim");
        OperatorSpec t;
        t.kind = Kind::matrix;
        t.name = std::move(name);
        t.matrix = std::move(M);
        t.matrix_grid = g;
        return t;
    }
    static OperatorSpec make_pointwise(std::string name, Field factor, ParamMap params = {}) {
        OperatorSpec t;
        t.kind = Kind::pointwise;
        t.name = std::move(name);
        t.factor = std::move(factor);
        t.params = std::move(params);
        return t;
    }
    static OperatorSpec make_composition(std::string name, std::vector<OperatorSpec> parts) {
        if (parts.empty()) throw ConfigError("composition needs at least one operator");
        OperatorSpec t;
        t.kind = Kind::composition;
        t.name = std::move(name);
        t.parts = std::move(parts);
        return t;
    }

    bool translation_invariant() const {
        switch (kind) {
            case Kind::multiplier:
            case Kind::kernel: return true;
            case Kind::matrix:
            case Kind::pointwise: return false;
            case Kind::composition:
                for (const auto& p : parts) {
                    if (!p.translation_invariant()) return false;
                }
                return true;
        }
        return false;
    }

    double param(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

namespace detail {

inline GridFunction sampled_kernel(const OperatorSpec& t, const GridSpec& g) {
    if (t.kernel) {
        if (!(t.kernel->spec() == g)) throw ConfigError("grid mismatch");
        return *t.kernel;
    }
    return GridFunction::sample(g, t.kernel_field);
}

inline GridFunction apply_impl(const OperatorSpec& t, const GridFunction& f, bool adjoint) {
    const auto& g = f.spec();
    using K = OperatorSpec::Kind;
    switch (t.kind) {
        case K::multiplier: return fourier_multiplier(f, t.symbol, adjoint);
        case K::kernel: {
            PaddedConvolver conv(f);
            return conv.with_kernel(conv.kernel_spectrum(sampled_kernel(t, g), adjoint != t.reflected));
        }
        case K::matrix: {
            if (!(*t.matrix_grid == g)) throw ConfigError("grid mismatch");
            Eigen::Map<const Eigen::VectorXcd> x(f.values().data(), static_cast<Eigen::Index>(f.size()));
            Eigen::VectorXcd y = adjoint ? Eigen::VectorXcd(t.matrix.adjoint() * x) : Eigen::VectorXcd(t.matrix * x);
            y *= g.cell_volume();
            return GridFunction(g, std::vector<cplx>(y.data(), y.data() + y.size()));
        }
        case K::pointwise: {
            GridFunction out(g);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const cplx c = t.factor(g.point(k));
                out[k] = f[k] * (adjoint ? std::conj(c) : c);
            }
            return out;
        }
        case K::composition: {
            GridFunction out = f;
            if (adjoint) {
                for (auto it = t.parts.rbegin(); it != t.parts.rend(); ++it) out = apply_impl(*it, out, true);
            } else {
                for (const auto& p : t.parts) out = apply_impl(p, out, false);
            }
            return out;
        }
    }
    throw ConfigError("unknown operator kind");
}

}  // namespace detail

inline GridFunction apply(const OperatorSpec& t, const GridFunction& f) { return detail::apply_impl(t, f, false); }

/// T* with respect to ∫ f conj(g): ⟨Tf, g⟩ = ⟨f, T*g⟩ exactly at the discrete level.
inline GridFunction adjoint_apply(const OperatorSpec& t, const GridFunction& g) {
    return detail::apply_impl(t, g, true);
}

/// Formal adjoint as an operator of the same kind (a matrix stays a matrix).
inline OperatorSpec adjoint(const OperatorSpec& t) {
    using K = OperatorSpec::Kind;
    OperatorSpec a = t;
    a.name = t.name + "*";
    switch (t.kind) {
        case K::multiplier: {
            const Field s = t.symbol;
            a.symbol = [s](const Point& xi) { return std::conj(s(xi)); };
            break;
        }
        case K::kernel: a.reflected = !t.reflected; break;
        case K::matrix: a.matrix = t.matrix.adjoint(); break;
        case K::pointwise: {
            const Field c = t.factor;
            a.factor = [c](const Point& x) { return std::conj(c(x)); };
            break;
        }
        case K::composition:
            a.parts.clear();
            for (auto it = t.parts.rbegin(); it != t.parts.rend(); ++it) a.parts.push_back(adjoint(*it));
            break;
    }
    return a;
}

/// Dense matrix of T from its action on unit spikes. Memory is O(m^{2·dim}),
/// so the grid is capped at 4096 samples.
inline OperatorSpec materialize(const OperatorSpec& t, const GridSpec& g) {
    if (g.size() > 4096) throw ConfigError("materialization is limited to grids of at most 4096 samples");
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXcd M(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        GridFunction e(g);
        e[static_cast<std::size_t>(j)] = 1.0 / g.cell_volume();
        const GridFunction col = apply(t, e);
        for (Eigen::Index i = 0; i < n; ++i) M(i, j) = col[static_cast<std::size_t>(i)];
    }
    auto out = OperatorSpec::make_matrix(t.name + "[matrix]", g, std::move(M));
    out.params = t.params;
    return out;
}

// ---------------------------------------------------------------------------
// T* applied to monomials

namespace detail {

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// 1 on B(x0, W), 0 outside B(x0, 2W).
inline double window(const Point& x, const Point& x0, double W, int dim) {
    return 1.0 - smooth_step(norm(x - x0, dim) / W - 1.0);
}

inline GridFunction windowed_monomial(const GridSpec& g, const Point& x0, const MultiIndex& alpha, double W) {
    GridFunction out(g);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Point x = g.point(k);
        const double w = window(x, x0, W, g.dim());
        if (w != 0.0) out[k] = w * alpha.monomial(x - x0);
    }
    return out;
}

}  // namespace detail

struct TStarMonomial {
    GridFunction f;
    double window = 0.0;
    double sensitivity = 0.0;  ///< RMS of f_W − f_{W/2} over B(x0, W/4), relative to W^{|α|}
};

/**
 * T*[(·−x0)^α] realized as T* applied to the windowed monomial w·(·−x0)^α.
 * The computation is repeated with window W/2 and the two are compared on
 * B(x0, W/4) in the same mean-square sense as local_oscillation; the
 * difference, in units of W^{|α|}, is the reported window sensitivity.
 */
inline TStarMonomial tstar_monomial(const OperatorSpec& t, const GridSpec& g, const Point& x0, const MultiIndex& alpha,
                                    double W, double max_sensitivity = 0.1) {
    if (!(W > 0.0) || W > 0.5 * g.half_width()) throw ConfigError("window radius must satisfy 0 < W <= L/2");
    for (int a = 0; a < g.dim(); ++a) {
        if (std::abs(x0[a]) + 2.0 * W > g.half_width() + 1e-12) throw ConfigError("window escapes the grid domain");
    }
    TStarMonomial out{adjoint_apply(t, detail::windowed_monomial(g, x0, alpha, W)), W, 0.0};
    const GridFunction half = adjoint_apply(t, detail::windowed_monomial(g, x0, alpha, 0.5 * W));
    const auto core = ball_indices(g, Ball{x0, 0.25 * W});
    double acc = 0.0;
    for (auto k : core) acc += std::norm(out.f[k] - half[k]);
    out.sensitivity = std::sqrt(acc / static_cast<double>(core.size())) / std::pow(W, alpha.order());
    if (out.sensitivity > max_sensitivity) throw NumericalError("T* monomial not stable: kernel tail too heavy");
    return out;
}

// ---------------------------------------------------------------------------
// Cancellation test

struct CancellationRow {
    Ball ball;
    MultiIndex alpha;
    double p = 1.0;
    double oscillation = 0.0;
    double psi_value = 0.0;
    double ratio = 0.0;
    double window = 0.0;
    double sensitivity = 0.0;
    double dual_gap = 0.0;  ///< |lhs − rhs| of dual_norm_check on T*[(·−x0)^α]
};

struct CancellationReport {
    std::string op;
    HardyIndex idx;
    std::vector<CancellationRow> rows;
};

/// Window radius used by the cancellation test on a ball of radius r.
inline double cancellation_window(double r) { return std::max(8.0 * r, 1.0); }

/**
 * For every (B, α): the local oscillation of T*[(·−x0)^α] over B against
 * Ψ_{p,α}(r). Bounded ratios as r → 0 are necessary for T to be bounded on
 * h^p.
 */
inline CancellationReport cancellation_test(const OperatorSpec& t, const GridSpec& g, const HardyIndex& idx,
                                            const std::vector<Ball>& balls, const std::vector<MultiIndex>& alphas,
                                            int dual_trials = 0) {
    CancellationReport rep{t.name, idx, {}};
    for (const auto& B : balls) {
        if (!(B.radius < 1.0)) throw ConfigError("cancellation test needs balls of radius < 1");
        for (const auto& a : alphas) {
            if (a.order() > idx.N) throw ConfigError("multi-index order exceeds N_p");
            CancellationRow row;
            row.ball = B;
            row.alpha = a;
            row.p = idx.p;
            row.window = cancellation_window(B.radius);
            const auto ts = tstar_monomial(t, g, B.center, a, row.window);
            row.sensitivity = ts.sensitivity;
            row.oscillation = local_oscillation(ts.f, B, idx.N);
            row.psi_value = psi(idx, a, B.radius);
            row.ratio = row.psi_value > 0.0 ? row.oscillation / row.psi_value : 0.0;
            const auto dual = dual_norm_check(ts.f, B, idx.N, dual_trials, 0);
            row.dual_gap = std::abs(dual.lhs - dual.rhs);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Kernel condition checks

/// Kernel of a translation-invariant operator: T applied to the unit spike at
/// the center sample, so k(u) sits at the sample u.
inline GridFunction materialize_kernel(const OperatorSpec& t, const GridSpec& g) {
    if (!t.translation_invariant()) throw ConfigError("operator '" + t.name + "' is not translation invariant");
    return apply(t, GridFunction::spike(g));
}

struct KernelSizeReport {
    double mu = 0.0;
    double C = 0.0;              ///< max |k(u)| / min{|u|^{−dim}, |u|^{−dim−μ}}
    double worst_distance = 0.0;
    std::size_t pairs = 0;
    bool no_off_diagonal = false;
};

/// Displacements u = x − y on the grid with |u| ≥ 4h (y the center sample).
inline std::vector<Point> kernel_displacements(const GridSpec& g, double min_cells = 4.0) {
    std::vector<Point> out;
    const double cut = min_cells * g.spacing();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point u = g.point(k);
        if (norm(u, g.dim()) >= cut - 1e-12 * cut) out.push_back(u);
    }
    return out;
}

namespace detail {

/// Value of a centered kernel at displacement u (nearest sample), or nullopt
/// when u is outside the grid.
inline std::optional<cplx> kernel_at(const GridFunction& k, const Point& u) {
    const auto& g = k.spec();
    auto i0 = g.nearest_index(u[0]);
    auto i1 = g.dim() == 2 ? g.nearest_index(u[1]) : std::optional<std::size_t>{0};
    if (!i0 || !i1) return std::nullopt;
    return k[g.flat(*i0, *i1)];
}

}  // namespace detail

inline KernelSizeReport kernel_size_check(const OperatorSpec& t, const GridSpec& g, double mu,
                                          const std::vector<Point>& displacements) {
    const GridFunction k = materialize_kernel(t, g);
    const int n = g.dim();
    KernelSizeReport rep;
    rep.mu = mu;
    double off = 0.0;
    for (const auto& u : displacements) {
        const auto v = detail::kernel_at(k, u);
        if (!v) continue;
        const double d = norm(u, n);
        if (d < 4.0 * g.spacing() * (1.0 - 1e-12)) continue;
        ++rep.pairs;
        off = std::max(off, std::abs(*v));
        const double bound = std::min(std::pow(d, -n), std::pow(d, -n - mu));
        const double ratio = std::abs(*v) / bound;
        if (ratio > rep.C) {
            rep.C = ratio;
            rep.worst_distance = d;
        }
    }
    const double diag = std::abs(k[g.flat(g.center_index(), g.dim() == 2 ? g.center_index() : 0)]);
    rep.no_off_diagonal = off <= 1e-12 * std::max(diag, 1.0);
    return rep;
}

inline KernelSizeReport kernel_size_check(const OperatorSpec& t, const GridSpec& g, double mu) {
    return kernel_size_check(t, g, mu, kernel_displacements(g));
}

struct HolderTriple {
    Point x, y, z;
};

struct KernelHolderReport {
    double delta = 1.0;
    double sigma = 1.0;
    double C = 0.0;
    std::size_t admissible = 0;
    HolderTriple worst{};
};

/**
 * Triples with z the center sample, y = z + j·h·e₁ for j = 1..`steps`, and x
 * every sample with |x − z| ≥ max(2|y − z|^σ, 4h) whose differences stay on
 * the grid.
 */
inline std::vector<HolderTriple> holder_triples(const GridSpec& g, double sigma, int steps = 4) {
    std::vector<HolderTriple> out;
    const double h = g.spacing();
    const double L = g.half_width();
    const Point z{0.0, 0.0};
    for (int j = 1; j <= steps; ++j) {
        const Point y{j * h, 0.0};
        const double need = std::max(2.0 * std::pow(j * h, sigma), 4.0 * h);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Point x = g.point(k);
            if (norm(x - z, g.dim()) < need) continue;
            bool fits = true;
            for (int a = 0; a < g.dim(); ++a) {
                if (std::abs(x[a] - y[a]) >= L || std::abs(x[a] - z[a]) >= L) fits = false;
            }
            if (fits) out.push_back({x, y, z});
        }
    }
    return out;
}

/// Fitted C in |K(x,y) − K(x,z)| + |K(y,x) − K(z,x)| ≤ C |y−z|^δ / |x−z|^{dim+δ/σ}.
inline KernelHolderReport kernel_holder_check(const OperatorSpec& t, const GridSpec& g, double delta, double sigma,
                                              const std::vector<HolderTriple>& triples) {
    if (!(delta > 0.0 && delta <= 1.0) || !(sigma > 0.0 && sigma <= 1.0)) {
        throw ConfigError("Holder check needs delta and sigma in (0, 1]");
    }
    const GridFunction k = materialize_kernel(t, g);
    const int n = g.dim();
    KernelHolderReport rep;
    rep.delta = delta;
    rep.sigma = sigma;
    for (const auto& tr : triples) {
        const double dxz = norm(tr.x - tr.z, n);
        const double dyz = norm(tr.y - tr.z, n);
        if (!(dyz > 0.0) || dxz < 2.0 * std::pow(dyz, sigma) * (1.0 - 1e-12)) continue;
        const auto kxy = detail::kernel_at(k, tr.x - tr.y), kxz = detail::kernel_at(k, tr.x - tr.z);
        const auto kyx = detail::kernel_at(k, tr.y - tr.x), kzx = detail::kernel_at(k, tr.z - tr.x);
        if (!kxy || !kxz || !kyx || !kzx) continue;
        ++rep.admissible;
        const double lhs = std::abs(*kxy - *kxz) + std::abs(*kyx - *kzx);
        const double c = lhs * std::pow(dxz, n + delta / sigma) / std::pow(dyz, delta);
        if (c > rep.C) {
            rep.C = c;
            rep.worst = tr;
        }
    }
    if (rep.admissible == 0) throw NumericalError("no admissible triples at current resolution");
    return rep;
}

inline KernelHolderReport kernel_holder_check(const OperatorSpec& t, const GridSpec& g, double delta, double sigma) {
    return kernel_holder_check(t, g, delta, sigma, holder_triples(g, sigma));
}

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
    std::string name;
    std::string summary;
    ParamMap defaults;
    bool pathological = false;
    bool translation_invariant = true;
    std::function<OperatorSpec(int dim, const ParamMap&)> build;
};

namespace detail {

inline double japanese(const Point& xi) { return std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1]); }

inline double param_or(const ParamMap& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw ConfigError("missing operator parameter '" + key + "'");
    return it->second;
}

inline int axis_param(const ParamMap& p, int dim) {
    const double j = param_or(p, "j");
    if (j != 1.0 && !(dim == 2 && j == 2.0)) throw ConfigError("axis parameter j must be 1 or 2 (2 needs dim = 2)");
    return static_cast<int>(j) - 1;
}

}  // namespace detail

/**
 * Named operators. The translation-invariant entries carry claimed kernel
 * parameters (mu, delta, sigma); the strongly singular entry also records
 * beta = a and q from 1/q = 1/2 + beta/dim, and whether
 * dim(1 − sigma)/2 ≤ beta < dim/2 holds.
 */
inline const std::vector<CatalogEntry>& builtin_operators() {
    static const std::vector<CatalogEntry> catalog = [] {
        std::vector<CatalogEntry> c;
        c.push_back({"identity", "f -> f", {}, false, true, [](int, const ParamMap& p) {
                         auto params = p;
                         params["mu"] = 1.0;
                         return OperatorSpec::make_multiplier("identity", [](const Point&) { return cplx{1.0, 0.0}; },
                                                              params);
                     }});
        c.push_back({"gaussian", "multiplier exp(-eps |xi|^2): heat smoothing at time eps", {{"eps", 0.0025}}, false,
                     true, [](int, const ParamMap& p) {
                         const double eps = detail::param_or(p, "eps");
                         if (!(eps > 0.0)) throw ConfigError("gaussian eps must be positive");
                         auto params = p;
                         params["mu"] = 4.0;
                         params["delta"] = 1.0;
                         params["sigma"] = 1.0;
                         return OperatorSpec::make_multiplier(
                             "gaussian",
                             [eps](const Point& xi) { return cplx{std::exp(-eps * (xi[0] * xi[0] + xi[1] * xi[1])), 0.0}; },
                             params);
                     }});
        c.push_back({"riesz", "inhomogeneous Riesz transform xi_j / <xi>", {{"j", 1.0}}, false, true,
                     [](int dim, const ParamMap& p) {
                         const int j = detail::axis_param(p, dim);
                         auto params = p;
                         params["mu"] = 1.0;
                         params["delta"] = 1.0;
                         params["sigma"] = 1.0;
                         return OperatorSpec::make_multiplier(
                             "riesz", [j](const Point& xi) { return cplx{xi[j] / detail::japanese(xi), 0.0}; }, params);
                     }});
        c.push_back({"bessel", "imaginary Bessel potential <xi>^{i beta}", {{"beta", 1.0}}, false, true,
                     [](int, const ParamMap& p) {
                         const double beta = detail::param_or(p, "beta");
                         auto params = p;
                         params["mu"] = 1.0;
                         params["delta"] = 1.0;
                         params["sigma"] = 1.0;
                         return OperatorSpec::make_multiplier(
                             "bessel",
                             [beta](const Point& xi) { return std::polar(1.0, beta * std::log(detail::japanese(xi))); },
                             params);
                     }});
        c.push_back({"order-zero", "order-zero symbol (1 + i xi_j) / <xi>", {{"j", 1.0}}, false, true,
                     [](int dim, const ParamMap& p) {
                         const int j = detail::axis_param(p, dim);
                         auto params = p;
                         params["mu"] = 1.0;
                         params["delta"] = 1.0;
                         params["sigma"] = 1.0;
                         return OperatorSpec::make_multiplier(
                             "order-zero",
                             [j](const Point& xi) { return cplx{1.0, xi[j]} / detail::japanese(xi); }, params);
                     }});
        c.push_back({"strongly-singular", "exp(i |xi|^b) <xi>^{-a}, 0 < b < 1", {{"b", 0.5}, {"a", -1.0}}, false, true,
                     [](int dim, const ParamMap& p) {
                         const double b = detail::param_or(p, "b");
                         double a = detail::param_or(p, "a");
                         if (a < 0.0) a = dim / 4.0;  // default preset a = dim/4
                         if (!(b > 0.0 && b < 1.0)) throw ConfigError("strongly-singular needs 0 < b < 1");
                         auto params = p;
                         params["a"] = a;
                         params["mu"] = b;
                         params["delta"] = 1.0;
                         params["sigma"] = 1.0 - b;
                         params["beta"] = a;
                         params["q"] = 1.0 / (0.5 + a / dim);
                         params["admissible"] = (0.5 * dim * b <= a && a < 0.5 * dim) ? 1.0 : 0.0;
                         return OperatorSpec::make_multiplier(
                             "strongly-singular",
                             [a, b](const Point& xi) {
                                 const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
                                 return std::polar(std::pow(detail::japanese(xi), -a), std::pow(r, b));
                             },
                             params);
                     }});
        c.push_back({"sign", "multiplication by sign(x_1)", {}, true, false, [](int, const ParamMap& p) {
                         return OperatorSpec::make_pointwise(
                             "sign", [](const Point& x) { return cplx{x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0), 0.0}; },
                             p);
                     }});
        c.push_back({"sqrt-abs", "multiplication by |x_1|^{1/2}, cut off smoothly beyond |x| = R", {{"R", 2.0}}, true,
                     false, [](int dim, const ParamMap& p) {
                         const double R = detail::param_or(p, "R");
                         if (!(R > 0.0)) throw ConfigError("sqrt-abs cutoff radius must be positive");
                         return OperatorSpec::make_pointwise(
                             "sqrt-abs",
                             [R, dim](const Point& x) {
                                 return cplx{std::sqrt(std::abs(x[0])) * (1.0 - detail::smooth_step(norm(x, dim) / R - 1.0)),
                                             0.0};
                             },
                             p);
                     }});
        c.push_back({"modulation", "multiplication by exp(i x . xi0)", {{"xi0", 5.0}}, true, false,
                     [](int, const ParamMap& p) {
                         const double w = detail::param_or(p, "xi0");
                         return OperatorSpec::make_pointwise(
                             "modulation", [w](const Point& x) { return std::polar(1.0, w * (x[0] + x[1])); }, p);
                     }});
        return c;
    }();
    return catalog;
}

inline const CatalogEntry& find_operator(const std::string& name) {
    for (const auto& e : builtin_operators()) {
        if (e.name == name) return e;
    }
    throw ConfigError("unknown operator '" + name + "'");
}

/// Builds a catalog operator; `overrides` replace the entry's defaults.
inline OperatorSpec make_operator(const std::string& name, int dim, const ParamMap& overrides = {}) {
    const auto& e = find_operator(name);
    ParamMap p = e.defaults;
    for (const auto& [k, v] : overrides) {
        if (!p.count(k)) throw ConfigError("operator '" + name + "' has no parameter '" + k + "'");
        p[k] = v;
    }
    return e.build(dim, p);
}

/// "name" or "name:key=value,key=value".
inline OperatorSpec parse_operator(const std::string& text, int dim) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    ParamMap overrides;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("operator parameter '" + item + "' is not key=value");
            const std::string key = item.substr(0, eq);
            try {
                std::size_t used = 0;
                const std::string val = item.substr(eq + 1);
                overrides[key] = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
            } catch (const std::exception&) {
                throw ConfigError("operator parameter '" + key + "' is not a number");
            }
        }
    }
    return make_operator(name, dim, overrides);
}

}  // namespace hardy
