#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hardy/grid.hpp"
#include "hardy/maximal.hpp"
#include "hardy/moments.hpp"

namespace hardy {

enum class AtomSpace { local, global };

inline AtomSpace parse_atom_space(const std::string& s) {
    if (s == "local" || s == "h") return AtomSpace::local;
    if (s == "global" || s == "H") return AtomSpace::global;
    throw ConfigError("unknown atom space '" + s + "' (expected local or global)");
}

/// (p,s) atom on a ball, for h^p (local) or H^p (global).
struct AtomSpec {
    HardyIndex idx;
    double s = 2.0;  ///< kInfinity allowed
    Ball ball;
    AtomSpace space = AtomSpace::local;

    static AtomSpec make(const HardyIndex& idx, double s, const Ball& ball, AtomSpace space) {
        if (!(s >= 1.0) || s == idx.p) throw ConfigError("atom exponent s must satisfy s >= 1 and s != p");
        if (!(ball.radius > 0.0)) throw ConfigError("ball radius must be positive");
        return {idx, s, ball, space};
    }

    /// Local atoms on balls of radius ≥ 1 carry no moment condition.
    bool needs_moments() const { return space == AtomSpace::global || ball.radius < 1.0; }

    /// r^{dim(1/s − 1/p)}.
    double size_bound() const {
        const double inv_s = std::isinf(s) ? 0.0 : 1.0 / s;
        return std::pow(ball.radius, idx.dim * (inv_s - 1.0 / idx.p));
    }
};

namespace detail {

/// exp(1 − 1/(1 − |u|²)) for |u| < 1: equals 1 at the center and vanishes
/// to all orders at the edge.
inline double edge_cutoff(const Point& u, int dim) {
    const double q = dim == 1 ? u[0] * u[0] : u[0] * u[0] + u[1] * u[1];
    if (q >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - q));
}

/// Four random cosines in u = (y − x0)/r: gaussian amplitudes, frequencies in
/// [−3, 3], uniform phases.
inline RealField random_waves(const Ball& B, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    struct Wave {
        double amp, w0, w1, phase;
    };
    std::vector<Wave> waves(4);
    for (auto& w : waves) w = {normal(rng), 3.0 * uni(rng), 3.0 * uni(rng), M_PI * uni(rng)};
    return [waves, B, dim](const Point& y) {
        const Point u = (1.0 / B.radius) * (y - B.center);
        double v = 0.0;
        for (const auto& w : waves) v += w.amp * std::cos(w.w0 * u[0] + (dim == 2 ? w.w1 * u[1] : 0.0) + w.phase);
        return v;
    };
}

/// Seeded random waves times the edge cutoff of B, without any cancellation.
inline GridFunction random_bump(const GridSpec& g, const Ball& B, std::uint64_t seed) {
    const RealField raw = random_waves(B, g.dim(), seed);
    GridFunction f(g);
    for (auto k : ball_indices(g, B)) {
        const Point y = g.point(k);
        f[k] = raw(y) * edge_cutoff((1.0 / B.radius) * (y - B.center), g.dim());
    }
    return f;
}

inline double norm_s(const GridFunction& f, double s, const Region& region = Region::whole()) {
    return detail::lebesgue_norm(f, s, region);
}

}  // namespace detail

/**
 * Seeded random smooth atom: a few random cosines in the scaled variable,
 * times a cutoff vanishing at ∂B. When cancellation is required the
 * cosines are projected off polynomials of degree ≤ N_p in L²(B, χ dy), χ
 * the cutoff, so that χ·(f − Q) has vanishing discrete moments. The result is
 * scaled to ‖a‖_{L^s} = r^{dim(1/s − 1/p)}.
 */
inline GridFunction make_atom(const GridSpec& g, const AtomSpec& spec, std::uint64_t seed) {
    const int dim = g.dim();
    if (spec.idx.dim != dim) throw ConfigError("atom dimension does not match grid");
    const Ball& B = spec.ball;
    if (!B.inside(g)) throw ConfigError("atom ball does not fit inside the grid domain");
    const std::size_t need = 4 * PolySpace(dim, spec.idx.N).size();
    if (ball_indices(g, B).size() < need) throw NumericalError("atom ball not resolvable at this grid spacing");

    const RealField chi = [B, dim](const Point& y) { return detail::edge_cutoff((1.0 / B.radius) * (y - B.center), dim); };

    for (int attempt = 0; attempt < 8; ++attempt) {
        const RealField raw = detail::random_waves(B, dim, seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(attempt));
        GridFunction f(g);
        for (auto k : ball_indices(g, B)) f[k] = raw(g.point(k));
        GridFunction a(g);
        if (spec.needs_moments()) {
            const Polynomial Q = weighted_poly_project(f, B, spec.idx.N, chi);
            for (auto k : ball_indices(g, B)) {
                const Point y = g.point(k);
                a[k] = chi(y) * (f[k] - Q(y));
            }
        } else {
            for (auto k : ball_indices(g, B)) a[k] = chi(g.point(k)) * f[k];
        }
        GridFunction before(g);
        for (auto k : ball_indices(g, B)) before[k] = chi(g.point(k)) * f[k];
        const double size = detail::norm_s(a, spec.s);
        if (!(size > 1e-12 * detail::norm_s(before, spec.s))) continue;
        a *= cplx{spec.size_bound() / size, 0.0};
        return a;
    }
    throw NumericalError("atom generation failed: projection annihilated 8 consecutive samples");
}

struct AtomReport {
    bool pass = true;
    double outside_mass = 0.0;  ///< ∫_{B^c}|a| / ∫|a|
    double size = 0.0;          ///< ‖a‖_{L^s}
    double size_bound = 0.0;    ///< r^{dim(1/s − 1/p)}
    bool moments_required = false;
    double worst_moment = 0.0;  ///< max |∫a(x − x0)^α| / (‖a‖_{L¹} r^{|α|})
    std::vector<std::string> failures;
};

/// Checks support, size and (when required) moment conditions of an atom.
inline AtomReport validate_atom(const GridFunction& a, const AtomSpec& spec, double tol) {
    AtomReport rep;
    const auto& g = a.spec();
    const Ball& B = spec.ball;
    const double total = lp_norm(a, 1.0);
    double outside = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!B.contains(g.point(k), g.dim())) outside += std::abs(a[k]);
    }
    outside *= g.cell_volume();
    rep.outside_mass = total > 0.0 ? outside / total : 0.0;
    if (rep.outside_mass > tol) rep.failures.push_back("support");

    rep.size = detail::norm_s(a, spec.s);
    rep.size_bound = spec.size_bound();
    if (rep.size > rep.size_bound * (1.0 + tol)) rep.failures.push_back("size");

    rep.moments_required = spec.needs_moments();
    if (total > 0.0) {
        const PolySpace space(g.dim(), spec.idx.N);
        for (const auto& al : space.basis()) {
            cplx m{0.0, 0.0};
            for (std::size_t k = 0; k < a.size(); ++k) {
                if (a[k] != cplx{}) m += a[k] * al.monomial(g.point(k) - B.center);
            }
            m *= g.cell_volume();
            rep.worst_moment = std::max(rep.worst_moment, std::abs(m) / (total * std::pow(B.radius, al.order())));
        }
    }
    if (rep.moments_required && rep.worst_moment > tol) rep.failures.push_back("moments");
    rep.pass = rep.failures.empty();
    return rep;
}

/// key = value lines, one per check.
inline void write_report(std::ostream& os, const AtomReport& r) {
    os << "pass = " << (r.pass ? "true" : "false") << '\n';
    os << "outside_mass = " << r.outside_mass << '\n';
    os << "size = " << r.size << '\n';
    os << "size_bound = " << r.size_bound << '\n';
    os << "moments_required = " << (r.moments_required ? "true" : "false") << '\n';
    os << "worst_moment = " << r.worst_moment << '\n';
    if (!r.failures.empty()) {
        os << "failures =";
        for (const auto& f : r.failures) os << ' ' << f;
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Pre-molecules

/// Size data (p, s, λ, C) of a pre-molecule on B; requires λ > dim(s/p − 1).
struct PreMoleculeSpec {
    HardyIndex idx;
    double s = 2.0;
    double lambda = 1.0;
    double C = 1.0;
    Ball ball;

    static PreMoleculeSpec make(const HardyIndex& idx, double s, double lambda, double C, const Ball& ball) {
        if (!(s >= 1.0) || std::isinf(s) || s == idx.p) throw ConfigError("pre-molecule exponent s must be finite, >= 1 and != p");
        if (!(lambda > idx.dim * (s / idx.p - 1.0))) throw ConfigError("pre-molecule needs lambda > dim (s/p - 1)");
        if (!(C > 0.0)) throw ConfigError("pre-molecule constant must be positive");
        return {idx, s, lambda, C, ball};
    }
};

struct PreMoleculeReport {
    bool pass = true;
    double m1_lhs = 0.0, m1_rhs = 0.0, m1_ratio = 0.0;
    double m2_lhs = 0.0, m2_rhs = 0.0, m2_ratio = 0.0;
};

/// M1: ‖M‖_{L^s(B)} ≤ C r^{dim(1/s−1/p)};  M2: ‖M |·−x0|^{λ/s}‖_{L^s(B^c)} ≤ C r^{λ/s + dim(1/s−1/p)}.
inline PreMoleculeReport validate_premolecule(const GridFunction& M, const PreMoleculeSpec& spec) {
    const auto& g = M.spec();
    const int n = g.dim();
    const Ball& B = spec.ball;
    const double r = B.radius;
    const double s = spec.s;
    const double size_exp = n * (1.0 / s - 1.0 / spec.idx.p);
    double in = 0.0, out = 0.0;
    for (std::size_t k = 0; k < M.size(); ++k) {
        const double v = std::abs(M[k]);
        if (v == 0.0) continue;
        const Point x = g.point(k);
        const double d = norm(x - B.center, n);
        if (d < r) {
            in += std::pow(v, s);
        } else {
            out += std::pow(v, s) * std::pow(d, spec.lambda);
        }
    }
    const double h = g.cell_volume();
    PreMoleculeReport rep;
    rep.m1_lhs = std::pow(in * h, 1.0 / s);
    rep.m1_rhs = spec.C * std::pow(r, size_exp);
    rep.m2_lhs = std::pow(out * h, 1.0 / s);
    rep.m2_rhs = spec.C * std::pow(r, spec.lambda / s + size_exp);
    rep.m1_ratio = rep.m1_lhs / rep.m1_rhs;
    rep.m2_ratio = rep.m2_lhs / rep.m2_rhs;
    rep.pass = rep.m1_ratio <= 1.0 + 1e-12 && rep.m2_ratio <= 1.0 + 1e-12;
    return rep;
}

/// Smallest C for which M passes: the larger of the two ratios at C = 1.
inline double min_premolecule_constant(const GridFunction& M, const HardyIndex& idx, double s, double lambda,
                                       const Ball& B) {
    const auto rep = validate_premolecule(M, PreMoleculeSpec::make(idx, s, lambda, 1.0, B));
    return std::max(rep.m1_ratio, rep.m2_ratio);
}

// ---------------------------------------------------------------------------
// Moment bounds

struct MomentBoundRow {
    MultiIndex alpha;
    double moment = 0.0;  ///< |⟨g, (·−x0)^α⟩|
    double bound = 0.0;   ///< 1, or [log(1 + 1/r)]^{−1/p} at the critical order
    double ratio = 0.0;   ///< moment / (hp_norm · bound)
    bool critical = false;
};

struct MomentBoundTable {
    double hp_norm = 0.0;
    std::vector<MomentBoundRow> rows;
};

/// Empirical constants |moment_α| / (‖g‖_{h^p} · bound_α) for |α| ≤ N_p.
inline MomentBoundTable moment_bound_check(const GridFunction& g, const Ball& B, const HardyIndex& idx,
                                           const Mollifier& phi = Mollifier::gaussian()) {
    if (!(B.radius < 1.0)) throw ConfigError("moment bounds need a ball of radius < 1");
    MomentBoundTable tab;
    tab.hp_norm = hp_norm(g, idx, phi).value;
    if (!(tab.hp_norm > 0.0)) throw NumericalError("zero input");
    const PolySpace space(g.spec().dim(), idx.N);
    for (const auto& a : space.basis()) {
        MomentBoundRow row;
        row.alpha = a;
        row.critical = idx.is_critical_order(a.order());
        row.moment = std::abs(moment(g, B.center, a));
        row.bound = row.critical ? std::pow(std::log1p(1.0 / B.radius), -1.0 / idx.p) : 1.0;
        row.ratio = row.moment / (tab.hp_norm * row.bound);
        tab.rows.push_back(row);
    }
    return tab;
}

// ---------------------------------------------------------------------------
// Pseudo-molecule decomposition

struct HpAtomPiece {
    double coefficient = 0.0;
    Ball ball;
    GridFunction atom;
};

struct PseudoDecomposition {
    explicit PseudoDecomposition(const GridSpec& spec) : g(spec) {}
    GridFunction g;  ///< supported in B
    std::vector<HpAtomPiece> atoms;
    double residual = 0.0;    ///< ‖M − g − Σ c_j a_j‖_{L²}
    double sum_cp = 0.0;      ///< Σ |c_j|^p
    int annuli = 0;
};

namespace detail {

/// Discrete moments ∫ f (x − x0)^α over |α| ≤ N (basis order of PolySpace).
inline std::vector<cplx> moment_vector(const GridFunction& f, const Point& x0, const PolySpace& space) {
    const auto& g = f.spec();
    std::vector<cplx> out(space.size(), cplx{});
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] == cplx{}) continue;
        const Point y = g.point(k) - x0;
        for (std::size_t a = 0; a < space.size(); ++a) out[a] += f[k] * space[a].monomial(y);
    }
    for (auto& v : out) v *= g.cell_volume();
    return out;
}

/// q·b with b a smooth bump on B(x0, ρ) and q a polynomial chosen so the
/// discrete moments about x0 equal `target`.
inline GridFunction moment_carrier(const GridSpec& g, const Point& x0, double rho, const PolySpace& space,
                                   const std::vector<cplx>& target) {
    const Ball ball{x0, rho};
    std::vector<std::size_t> idx;
    if (ball.inside(g)) {
        idx = ball_indices(g, ball);
    } else {
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (ball.contains(g.point(k), g.dim())) idx.push_back(k);
        }
    }
    const auto n = static_cast<Eigen::Index>(space.size());
    const double h = g.cell_volume();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> bump(idx.size());
    Eigen::MatrixXd V(static_cast<Eigen::Index>(idx.size()), n);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Point u = (1.0 / rho) * (g.point(idx[i]) - x0);
        bump[i] = edge_cutoff(u, g.dim());
        for (Eigen::Index a = 0; a < n; ++a) V(static_cast<Eigen::Index>(i), a) = space[static_cast<std::size_t>(a)].monomial(u);
        G.noalias() += (bump[i] * h) * V.row(static_cast<Eigen::Index>(i)).transpose() * V.row(static_cast<Eigen::Index>(i));
    }
    check_conditioning(G);
    Eigen::VectorXd tre(n), tim(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        // moment in u: ∫ q b u^α = target_α ρ^{−|α|}
        const double sc = std::pow(rho, -space[static_cast<std::size_t>(a)].order());
        tre(a) = target[static_cast<std::size_t>(a)].real() * sc;
        tim(a) = target[static_cast<std::size_t>(a)].imag() * sc;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    const Eigen::VectorXd cre = ldlt.solve(tre), cim = ldlt.solve(tim);
    GridFunction out(g);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto row = V.row(static_cast<Eigen::Index>(i));
        out[idx[i]] = bump[i] * cplx{row.dot(cre), row.dot(cim)};
    }
    return out;
}

/// Distance from x0 to the farthest corner of the domain.
inline double covering_radius(const GridSpec& g, const Point& x0) {
    const double L = g.half_width();
    double d2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double far = std::max(std::abs(x0[a] - L), std::abs(x0[a] + L));
        d2 += far * far;
    }
    return std::sqrt(d2);
}

}  // namespace detail

/**
 * Splits M into g (supported in B) plus Σ c_j a_j with a_j (p,2) atoms for
 * H^p on B(x0, 2^j r). Each annular piece M·χ_{A_j} gets the moments of the
 * tail beyond it added back by a polynomial-times-bump carrier on B_j and the
 * moments of the tail starting at A_j removed by the carrier on B_{j−1}, so
 * every piece cancels and the corrections telescope into g.
 *
 * J = 0 selects the smallest J whose ball covers the whole domain.
 */
inline PseudoDecomposition pseudo_decompose(const GridFunction& M, const Ball& B, const HardyIndex& idx, int J = 0) {
    const auto& g = M.spec();
    const int n = g.dim();
    const Point x0 = B.center;
    const double r = B.radius;
    if (!B.inside(g)) throw ConfigError("decomposition ball does not fit inside the grid domain");
    const double cover = detail::covering_radius(g, x0);
    if (J <= 0) J = std::max(1, static_cast<int>(std::ceil(std::log2(cover / r) + 1e-12)));
    const double outer = std::ldexp(r, J);
    if (outer <= cover) {
        double tail = 0.0;
        for (std::size_t k = 0; k < M.size(); ++k) {
            if (norm(g.point(k) - x0, n) >= outer) tail += std::norm(M[k]);
        }
        if (std::sqrt(tail * g.cell_volume()) >= 1e-6 * lp_norm(M, 2.0)) {
            throw NumericalError("tail too heavy for desk-scale decomposition");
        }
    }

    const PolySpace space(n, idx.N);
    // Pieces: index 0 is M χ_B, index j the annulus B_j \ B_{j−1}.
    std::vector<GridFunction> pieces(static_cast<std::size_t>(J) + 1, GridFunction(g));
    for (std::size_t k = 0; k < M.size(); ++k) {
        const double d = norm(g.point(k) - x0, n);
        if (d >= outer) continue;
        const int j = d < r ? 0 : std::min(J, static_cast<int>(std::floor(std::log2(d / r))) + 1);
        // Guard the floor against rounding at the annulus radii.
        int jj = j;
        while (jj > 0 && d < std::ldexp(r, jj - 1)) --jj;
        while (jj < J && d >= std::ldexp(r, jj)) ++jj;
        pieces[static_cast<std::size_t>(jj)][k] = M[k];
    }
    // Tail moments N_j = Σ_{i ≥ j} moments(piece_i), j = 1..J+1.
    std::vector<std::vector<cplx>> tails(static_cast<std::size_t>(J) + 2, std::vector<cplx>(space.size(), cplx{}));
    for (int j = J; j >= 1; --j) {
        const auto mj = detail::moment_vector(pieces[static_cast<std::size_t>(j)], x0, space);
        for (std::size_t a = 0; a < space.size(); ++a) {
            tails[static_cast<std::size_t>(j)][a] = tails[static_cast<std::size_t>(j) + 1][a] + mj[a];
        }
    }
    // Carrier on B_j has radius min(2^j r, distance to the domain edge).
    const double L = g.half_width();
    double edge = kInfinity;
    for (int a = 0; a < n; ++a) edge = std::min(edge, L - std::abs(x0[a]));
    auto carrier = [&](int j, const std::vector<cplx>& target) {
        const double rho = std::min(std::ldexp(r, j), edge);
        return detail::moment_carrier(g, x0, rho, space, target);
    };

    PseudoDecomposition out(g);
    out.annuli = J;
    out.g = pieces[0];
    out.g += carrier(0, tails[1]);
    GridFunction recon = out.g;
    for (int j = 1; j <= J; ++j) {
        GridFunction A = pieces[static_cast<std::size_t>(j)];
        if (j < J) A += carrier(j, tails[static_cast<std::size_t>(j) + 1]);
        A -= carrier(j - 1, tails[static_cast<std::size_t>(j)]);
        const double rho = std::ldexp(r, j);
        const double l2 = lp_norm(A, 2.0);
        if (l2 == 0.0) continue;
        const double c = l2 / std::pow(rho, n * (0.5 - 1.0 / idx.p));
        GridFunction a = A;
        a *= cplx{1.0 / c, 0.0};
        recon += A;
        out.sum_cp += std::pow(c, idx.p);
        out.atoms.push_back({c, Ball{x0, rho}, std::move(a)});
    }
    GridFunction diff = M;
    diff -= recon;
    out.residual = lp_norm(diff, 2.0);
    return out;
}

}  // namespace hardy
