#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

/// Multi-index α ∈ Z_+^dim.
struct MultiIndex {
    std::array<int, 2> e{0, 0};
    int dim = 1;

    static MultiIndex make(int dim, int a0, int a1 = 0) {
        if (dim != 1 && dim != 2) throw ConfigError("multi-index dimension must be 1 or 2");
        if (a0 < 0 || a1 < 0) throw ConfigError("multi-index entries must be nonnegative");
        if (dim == 1 && a1 != 0) throw ConfigError("one-dimensional multi-index has a single entry");
        return MultiIndex{{a0, a1}, dim};
    }

    int order() const { return dim == 1 ? e[0] : e[0] + e[1]; }

    /// u^α.
    double monomial(const Point& u) const {
        double v = ipow(u[0], e[0]);
        if (dim == 2) v *= ipow(u[1], e[1]);
        return v;
    }

    std::string str() const { return dim == 1 ? std::to_string(e[0]) : std::to_string(e[0]) + "," + std::to_string(e[1]); }

    bool operator==(const MultiIndex& o) const { return dim == o.dim && e == o.e; }

    static double ipow(double x, int n) {
        double r = 1.0;
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }
};

/// Parses "2" (dim 1) or "1,0" (dim 2).
inline MultiIndex parse_multi_index(const std::string& text, int dim) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("");
            parts.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("malformed multi-index '" + text + "'");
        }
    }
    if (static_cast<int>(parts.size()) != dim) throw ConfigError("multi-index '" + text + "' does not match dimension");
    return MultiIndex::make(dim, parts[0], dim == 2 ? parts[1] : 0);
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Polynomials of degree ≤ N in dim variables, basis ordered by total degree
/// and then by decreasing first entry.
class PolySpace {
public:
    PolySpace(int dim, int degree) : dim_(dim), degree_(degree) {
        if (dim != 1 && dim != 2) throw ConfigError("polynomial space dimension must be 1 or 2");
        if (degree < 0) throw ConfigError("polynomial degree must be nonnegative");
        for (int n = 0; n <= degree; ++n) {
            if (dim == 1) {
                basis_.push_back(MultiIndex::make(1, n));
            } else {
                for (int a = n; a >= 0; --a) basis_.push_back(MultiIndex::make(2, a, n - a));
            }
        }
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return basis_.size(); }
    const std::vector<MultiIndex>& basis() const { return basis_; }
    const MultiIndex& operator[](std::size_t i) const { return basis_[i]; }

    std::size_t index_of(const MultiIndex& a) const {
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            if (basis_[i] == a) return i;
        }
        throw ConfigError("multi-index " + a.str() + " not in polynomial space");
    }

private:
    int dim_;
    int degree_;
    std::vector<MultiIndex> basis_;
};

/// p ∈ (0,1] with γ_p = dim(1/p − 1) and N_p = ⌊γ_p⌋.
struct HardyIndex {
    double p = 1.0;
    int dim = 1;
    double gamma = 0.0;
    int N = 0;
    bool critical = true;

    static HardyIndex make(double p, int dim) {
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("Hardy exponent p must lie in (0, 1]");
        if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
        HardyIndex idx;
        idx.p = p;
        idx.dim = dim;
        double g = dim * (1.0 / p - 1.0);
        const double nearest = std::round(g);
        // Exponents like 2/3 are not exact in binary; snap γ_p onto the integers.
        idx.critical = std::abs(g - nearest) < 1e-9;
        if (idx.critical) g = nearest;
        idx.gamma = g;
        idx.N = static_cast<int>(std::floor(g));
        return idx;
    }

    /// |α| = γ_p = N_p: the logarithmic branch.
    bool is_critical_order(int order) const { return critical && order == N; }
};

namespace detail {

/// Samples of a ball together with scaled monomials u^α, u = (y − x0)/r.
struct BallBasis {
    Ball ball;
    PolySpace space;
    std::vector<std::size_t> indices;
    Eigen::MatrixXd V;  // rows: ball samples, columns: basis monomials

    BallBasis(const GridSpec& g, const Ball& b, int degree) : ball(b), space(g.dim(), degree) {
        if (!b.inside(g)) throw ConfigError("ball does not fit inside the grid domain");
        indices = ball_indices(g, b);
        V.resize(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(space.size()));
        const double inv = 1.0 / b.radius;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const Point u = inv * (g.point(indices[i]) - b.center);
            for (std::size_t a = 0; a < space.size(); ++a) {
                V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = space[a].monomial(u);
            }
        }
    }
};

}  // namespace detail

/// ∫ f(y) (y − x0)^α dy for f supported inside the grid.
inline cplx moment(const GridFunction& f, const Point& x0, const MultiIndex& alpha) {
    const auto& g = f.spec();
    const std::size_t m = g.points_per_axis();
    const double scale = f.max_abs();
    double edge = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        auto [i0, i1] = g.unflat(k);
        const bool boundary = i0 == 0 || i0 == m - 1 || (g.dim() == 2 && (i1 == 0 || i1 == m - 1));
        if (boundary) edge = std::max(edge, std::abs(f[k]));
    }
    if (edge > 1e-12 * scale) throw NumericalError("moment undefined: support escapes domain");
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] == cplx{0.0, 0.0}) continue;
        s += f[k] * alpha.monomial(g.point(k) - x0);
    }
    return s * g.cell_volume();
}

/// P(y) = Σ c_α ((y − x0)/r)^α.
struct Polynomial {
    PolySpace space{1, 0};
    Point center{0.0, 0.0};
    double scale = 1.0;
    std::vector<cplx> coeffs;

    cplx operator()(const Point& y) const {
        const Point u = (1.0 / scale) * (y - center);
        cplx v{0.0, 0.0};
        for (std::size_t a = 0; a < space.size(); ++a) v += coeffs[a] * space[a].monomial(u);
        return v;
    }

    /// Coefficient of (y − x0)^α in unscaled form: c_α r^{−|α|}.
    cplx raw_coefficient(const MultiIndex& a) const {
        return coeffs[space.index_of(a)] * std::pow(scale, -a.order());
    }

    GridFunction sample(const GridSpec& g) const {
        return GridFunction::sample(g, [&](const Point& y) { return (*this)(y); });
    }
};

namespace detail {

inline void check_conditioning(const Eigen::MatrixXd& G) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw NumericalError("ill-conditioned projection (N too large for ball resolution)");
    }
}

/// Solves the (weighted) Gram system over the ball samples.
inline Polynomial project_on_basis(const GridFunction& f, const BallBasis& bb, const std::vector<double>* weight) {
    const auto& g = f.spec();
    const auto n = static_cast<Eigen::Index>(bb.space.size());
    if (bb.indices.size() < bb.space.size()) {
        throw NumericalError("ball holds fewer samples than the polynomial space dimension");
    }
    const double h = g.cell_volume();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd bre = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd bim = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < bb.indices.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double w = (weight ? (*weight)[i] : 1.0) * h;
        const auto row = bb.V.row(r);
        G.noalias() += w * row.transpose() * row;
        const cplx fv = f[bb.indices[i]];
        bre += (w * fv.real()) * row.transpose();
        bim += (w * fv.imag()) * row.transpose();
    }
    check_conditioning(G);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    Eigen::VectorXd cre = ldlt.solve(bre);
    Eigen::VectorXd cim = ldlt.solve(bim);
    Polynomial P;
    P.space = bb.space;
    P.center = bb.ball.center;
    P.scale = bb.ball.radius;
    P.coeffs.resize(bb.space.size());
    for (Eigen::Index a = 0; a < n; ++a) P.coeffs[static_cast<std::size_t>(a)] = {cre(a), cim(a)};
    return P;
}

}  // namespace detail

/**
 * L²(B)-orthogonal projection of f onto polynomials of degree ≤ N, i.e. the
 * polynomial with the same discrete moments as f over B up to order N.
 * Monomials are taken in the scaled variable (y − x0)/r.
 */
inline Polynomial poly_project(const GridFunction& f, const Ball& B, int N) {
    detail::BallBasis bb(f.spec(), B, N);
    return detail::project_on_basis(f, bb, nullptr);
}

/// Projection in L²(B, w dy): matches the moments of w·f with those of w·P.
inline Polynomial weighted_poly_project(const GridFunction& f, const Ball& B, int N, const RealField& weight) {
    detail::BallBasis bb(f.spec(), B, N);
    std::vector<double> w(bb.indices.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight(f.spec().point(bb.indices[i]));
    return detail::project_on_basis(f, bb, &w);
}

/// Discrete measure of B: the cell volume times the number of samples inside.
inline double discrete_volume(const GridSpec& g, const Ball& B) {
    return static_cast<double>(ball_indices(g, B).size()) * g.cell_volume();
}

/// (⨍_B |f − P_B^N f|²)^{1/2}.
inline double local_oscillation(const GridFunction& f, const Ball& B, int N) {
    detail::BallBasis bb(f.spec(), B, N);
    const Polynomial P = detail::project_on_basis(f, bb, nullptr);
    double acc = 0.0;
    for (auto k : bb.indices) acc += std::norm(f[k] - P(f.spec().point(k)));
    return std::sqrt(acc / static_cast<double>(bb.indices.size()));
}

/// Ψ_{p,α}(t): t^{γ_p} when |α| < γ_p, t^{γ_p} [log(1 + 1/t)]^{−1/p} when |α| = γ_p = N_p.
inline double psi(const HardyIndex& idx, const MultiIndex& alpha, double t) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("psi requires t in (0, 1)");
    const int a = alpha.order();
    if (static_cast<double>(a) < idx.gamma && !idx.is_critical_order(a)) return std::pow(t, idx.gamma);
    if (idx.is_critical_order(a)) return std::pow(t, idx.gamma) * std::pow(std::log1p(1.0 / t), -1.0 / idx.p);
    throw ConfigError("alpha outside the admissible range |alpha| <= gamma_p");
}

struct DualNormCheck {
    double lhs = 0.0;  ///< sup of |⟨f, ψ⟩| over the candidates
    double rhs = 0.0;  ///< ‖f − P_B^N f‖_{L²(B)}
    std::size_t candidates = 0;
};

namespace detail {

inline double legendre(int n, double x) {
    if (n == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

}  // namespace detail

/**
 * Both sides of the duality identity
 *   sup{|⟨f, ψ⟩| : ψ ∈ L²_N(B), ‖ψ‖ ≤ 1} = ‖f − P_B^N f‖_{L²(B)}.
 *
 * Random candidates are Legendre series of degree ≤ N + 6 in the scaled
 * variable with Gaussian coefficients, projected off P_N and normalized. With
 * `include_residual` the extremal candidate (f − P)/‖f − P‖ is also tried.
 */
inline DualNormCheck dual_norm_check(const GridFunction& f, const Ball& B, int N, int trials, std::uint64_t seed,
                                     bool include_residual = true) {
    const auto& g = f.spec();
    detail::BallBasis bb(g, B, N);
    const double h = g.cell_volume();
    const Polynomial P = detail::project_on_basis(f, bb, nullptr);
    const std::size_t n = bb.indices.size();
    std::vector<cplx> resid(n);
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        resid[i] = f[bb.indices[i]] - P(g.point(bb.indices[i]));
        rr += std::norm(resid[i]);
    }
    DualNormCheck out;
    out.rhs = std::sqrt(rr * h);

    // ⟨f, ψ⟩ = ∫_B f conj(ψ). Since ψ ⟂ P_N this equals ⟨f − P, ψ⟩, which is
    // the form evaluated: it stays exact when f − P is at rounding level.
    auto pair_with = [&](const std::vector<cplx>& psi_vals) {
        cplx s{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) s += resid[i] * std::conj(psi_vals[i]);
        return std::abs(s * h);
    };

    if (include_residual && out.rhs > 0.0) {
        std::vector<cplx> cand(n);
        for (std::size_t i = 0; i < n; ++i) cand[i] = resid[i] / out.rhs;
        out.lhs = std::max(out.lhs, pair_with(cand));
        ++out.candidates;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const PolySpace rich(g.dim(), N + 6);
    GridFunction work(g);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> c(rich.size());
        for (auto& v : c) v = normal(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const Point u = (1.0 / B.radius) * (g.point(bb.indices[i]) - B.center);
            double v = 0.0;
            for (std::size_t a = 0; a < rich.size(); ++a) {
                double term = detail::legendre(rich[a].e[0], u[0]);
                if (g.dim() == 2) term *= detail::legendre(rich[a].e[1], u[1]);
                v += c[a] * term;
            }
            work[bb.indices[i]] = v;
        }
        const Polynomial Q = detail::project_on_basis(work, bb, nullptr);
        std::vector<cplx> cand(n);
        double nn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cand[i] = work[bb.indices[i]] - Q(g.point(bb.indices[i]));
            nn += std::norm(cand[i]);
        }
        nn = std::sqrt(nn * h);
        if (nn < 1e-14) continue;
        for (auto& v : cand) v /= nn;
        out.lhs = std::max(out.lhs, pair_with(cand));
        ++out.candidates;
    }
    return out;
}

/// Text form: a header line "poly dim=<d> degree=<N> center=<x0> scale=<r>",
/// then one "<α> <re> <im>" line per coefficient.
inline void write_polynomial(std::ostream& os, const Polynomial& P) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "poly dim=%d degree=%d center=%.17g,%.17g scale=%.17g\n", P.space.dim(),
                  P.space.degree(), P.center[0], P.center[1], P.scale);
    os << buf;
    for (std::size_t a = 0; a < P.space.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%s %.17g %.17g\n", P.space[a].str().c_str(), P.coeffs[a].real(),
                      P.coeffs[a].imag());
        os << buf;
    }
}

inline Polynomial read_polynomial(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty polynomial stream");
    int dim = 0, degree = 0;
    double c0 = 0, c1 = 0, scale = 0;
    if (std::sscanf(line.c_str(), "poly dim=%d degree=%d center=%lg,%lg scale=%lg", &dim, &degree, &c0, &c1, &scale) !=
        5) {
        throw ConfigError("malformed polynomial header");
    }
    Polynomial P;
    P.space = PolySpace(dim, degree);
    P.center = {c0, c1};
    P.scale = scale;
    P.coeffs.assign(P.space.size(), cplx{});
    for (std::size_t n = 0; n < P.space.size(); ++n) {
        if (!std::getline(is, line)) throw ConfigError("truncated polynomial stream");
        std::istringstream ls(line);
        std::string alpha;
        double re = 0, im = 0;
        if (!(ls >> alpha >> re >> im)) throw ConfigError("malformed polynomial coefficient line");
        P.coeffs[P.space.index_of(parse_multi_index(alpha, dim))] = {re, im};
    }
    return P;
}

}  // namespace hardy
