#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hardy/atoms.hpp"
#include "hardy/operators.hpp"
#include "oracles.hpp"

using namespace hardy;

namespace {

double max_diff(const GridFunction& a, const GridFunction& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

GridFunction random_complex(const GridSpec& g, std::uint64_t seed) {
    auto re = oracle::random_smooth(g, seed);
    auto im = oracle::random_smooth(g, seed + 1000);
    im *= cplx{0.0, 1.0};
    return re + im;
}

std::vector<OperatorSpec> every_variant(const GridSpec& g) {
    std::vector<OperatorSpec> ops;
    ops.push_back(make_operator("riesz", g.dim()));
    ops.push_back(make_operator("strongly-singular", g.dim()));
    ops.push_back(OperatorSpec::make_kernel(
        "skew-kernel", Field([](const Point& u) { return cplx{std::exp(-u[0] * u[0]), u[0] * std::exp(-std::abs(u[0]))}; })));
    ops.push_back(OperatorSpec::make_kernel("sampled-kernel", GridFunction::sample(g, [](const Point& u) {
                                                return cplx{1.0 / (1.0 + u[0] * u[0]), std::sin(u[0]) * std::exp(-u[0] * u[0])};
                                            })));
    ops.push_back(make_operator("modulation", g.dim()));
    ops.push_back(OperatorSpec::make_composition("riesz-then-sign", {make_operator("riesz", g.dim()),
                                                                     make_operator("sign", g.dim())}));
    if (g.size() <= 256) ops.push_back(materialize(make_operator("order-zero", g.dim()), g));
    return ops;
}

std::vector<Ball> ladder(int from, int to, const Point& x0 = {0.0, 0.0}) {
    std::vector<Ball> out;
    for (int k = from; k <= to; ++k) out.push_back(Ball{x0, std::ldexp(1.0, -k)});
    return out;
}

}  // namespace

TEST(Apply, IdentityMultiplier) {
    const GridSpec g(1, 4.0, 256);
    const auto f = random_complex(g, 1);
    EXPECT_LE(max_diff(apply(make_operator("identity", 1), f), f), 1e-14);
}

TEST(Apply, GaussianMultiplierMatchesKernelRoute) {
    // exp(−|ξ|²/4) is the multiplier of convolution with π^{−1/2} e^{−x²}.
    const GridSpec g(1, 8.0, 1024);
    const auto mult = OperatorSpec::make_multiplier(
        "heat", [](const Point& xi) { return cplx{std::exp(-xi[0] * xi[0] / 4.0), 0.0}; });
    const auto kern = OperatorSpec::make_kernel(
        "heat-kernel", Field([](const Point& u) { return cplx{std::exp(-u[0] * u[0]) / std::sqrt(M_PI), 0.0}; }));
    const auto f = GridFunction::sample(g, [](const Point& x) { return std::exp(-4.0 * (x[0] - 0.3) * (x[0] - 0.3)); });
    EXPECT_LE(max_diff(apply(mult, f), apply(kern, f)), 1e-6);
}

TEST(Apply, MaterializedMatrixReproducesApply) {
    const GridSpec g(1, 4.0, 128);
    for (const auto& name : {"riesz", "bessel", "strongly-singular", "sign"}) {
        const auto T = make_operator(name, 1);
        const auto M = materialize(T, g);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto f = random_complex(g, seed);
            EXPECT_LE(max_diff(apply(M, f), apply(T, f)), 1e-9) << name;
        }
    }
    EXPECT_THROW(materialize(make_operator("riesz", 1), GridSpec(1, 4.0, 8192)), ConfigError);
}

TEST(Apply, GridMismatch) {
    const GridSpec g(1, 4.0, 64), h(1, 4.0, 128);
    const auto M = materialize(make_operator("riesz", 1), g);
    EXPECT_THROW(apply(M, GridFunction(h)), ConfigError);
    const auto K = OperatorSpec::make_kernel("k", GridFunction::spike(g));
    EXPECT_THROW(apply(K, GridFunction(h)), ConfigError);
    EXPECT_THROW(OperatorSpec::make_composition("empty", {}), ConfigError);
    EXPECT_THROW(OperatorSpec::make_matrix("bad", g, Eigen::MatrixXcd::Zero(3, 3)), ConfigError);
}

TEST(Adjoint, DefiningIdentityAllVariants) {
    for (const auto& g : {GridSpec(1, 4.0, 128), GridSpec(2, 4.0, 32)}) {
        for (const auto& T : every_variant(g)) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const auto f = random_complex(g, 10 + seed), h = random_complex(g, 20 + seed);
                const cplx lhs = inner(apply(T, f), h);
                const cplx rhs = inner(f, adjoint_apply(T, h));
                EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs))) << T.name << " dim " << g.dim();
            }
        }
    }
}

TEST(Adjoint, GaussianIsSelfAdjoint) {
    const GridSpec g(1, 4.0, 256);
    const auto T = make_operator("gaussian", 1);
    const auto f = random_complex(g, 4);
    EXPECT_LE(max_diff(apply(T, f), adjoint_apply(T, f)), 1e-14);
}

TEST(Adjoint, RieszMatchesConjugateTranspose) {
    const GridSpec g(1, 4.0, 128);
    const auto T = make_operator("riesz", 1);
    const auto M = materialize(T, g);
    const auto f = random_complex(g, 9);
    GridFunction oracle(g);
    const double h = g.cell_volume();
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx s{};
        for (std::size_t j = 0; j < g.size(); ++j) {
            s += std::conj(M.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) * f[j];
        }
        oracle[i] = s * h;
    }
    EXPECT_LE(max_diff(adjoint_apply(T, f), oracle), 1e-9);
}

TEST(Adjoint, Involution) {
    const GridSpec g(1, 4.0, 128);
    const auto f = random_complex(g, 5);
    for (const auto& T : every_variant(g)) {
        EXPECT_LE(max_diff(apply(adjoint(adjoint(T)), f), apply(T, f)), 1e-12) << T.name;
        EXPECT_LE(max_diff(apply(adjoint(T), f), adjoint_apply(T, f)), 1e-12) << T.name;
    }
}

TEST(TStar, IdentityGivesWindow) {
    const GridSpec g(1, 8.0, 1024);
    const auto ts = tstar_monomial(make_operator("identity", 1), g, {0.5, 0.0}, MultiIndex::make(1, 0), 2.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        EXPECT_NEAR(ts.f[k].real(), detail::window(x, {0.5, 0.0}, 2.0, 1), 1e-14);
        if (std::abs(x[0] - 0.5) < 2.0) {
            EXPECT_NEAR(ts.f[k].real(), 1.0, 1e-14);
        }
    }
    EXPECT_LE(ts.sensitivity, 1e-14);
}

TEST(TStar, GaussianReproducesPolynomials) {
    const GridSpec g(1, 8.0, 2048);
    const auto T = make_operator("gaussian", 1);
    for (int a = 0; a <= 2; ++a) {
        const auto ts = tstar_monomial(T, g, {0.25, 0.0}, MultiIndex::make(1, a), 1.0);
        for (double r : {0.25, 0.1, 0.05}) {
            EXPECT_LE(local_oscillation(ts.f, Ball{{0.25, 0.0}, r}, a), 1e-6) << "alpha " << a << " r " << r;
        }
    }
}

TEST(TStar, RieszMatchesMaterializedAdjoint) {
    const GridSpec g(1, 4.0, 128);
    const auto T = make_operator("riesz", 1);
    const double W = 1.0;
    const auto ts = tstar_monomial(T, g, {0.0, 0.0}, MultiIndex::make(1, 0), W);
    const auto M = materialize(T, g);
    const auto via_matrix = apply(adjoint(M), detail::windowed_monomial(g, {0.0, 0.0}, MultiIndex::make(1, 0), W));
    for (auto k : ball_indices(g, Ball{{0.0, 0.0}, W / 4})) EXPECT_NEAR(std::abs(ts.f[k] - via_matrix[k]), 0.0, 1e-8);
}

TEST(TStar, Preconditions) {
    const GridSpec g(1, 4.0, 256);
    const auto T = make_operator("identity", 1);
    EXPECT_THROW(tstar_monomial(T, g, {0.0, 0.0}, MultiIndex::make(1, 0), 3.0), ConfigError);
    EXPECT_THROW(tstar_monomial(T, g, {2.5, 0.0}, MultiIndex::make(1, 0), 1.0), ConfigError);
    // A kernel with a flat unit tail over the whole window is not windowable.
    const auto heavy = OperatorSpec::make_kernel("flat", Field([](const Point&) { return cplx{1.0, 0.0}; }));
    EXPECT_THROW(tstar_monomial(heavy, g, {0.0, 0.0}, MultiIndex::make(1, 0), 1.0), NumericalError);
}

TEST(TStar, PairingConsistency) {
    // ⟨T*[w m], a⟩ = ⟨w m, T a⟩ exactly; for the gaussian the window is
    // invisible to T a, so the unwindowed monomial gives the same value.
    const GridSpec g(1, 8.0, 2048);
    const auto idx = HardyIndex::make(0.5, 1);
    const Point x0{0.3, 0.0};
    for (const auto& name : {"gaussian", "riesz"}) {
        const auto T = make_operator(name, 1);
        const auto spec = AtomSpec::make(idx, 2.0, Ball{x0, 0.125}, AtomSpace::local);
        const auto a = make_atom(g, spec, 11);
        const auto Ta = apply(T, a);
        for (int al = 0; al <= idx.N; ++al) {
            const auto alpha = MultiIndex::make(1, al);
            const auto ts = tstar_monomial(T, g, x0, alpha, 1.0, kInfinity);
            const auto wm = detail::windowed_monomial(g, x0, alpha, 1.0);
            const cplx lhs = inner(a, ts.f);  // ⟨a, T*[w m]⟩ = ⟨T a, w m⟩
            const cplx rhs = inner(Ta, wm);
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * lp_norm(a, 1.0));
            if (std::string(name) == "gaussian") {
                const auto m = GridFunction::sample(g, [&](const Point& x) { return alpha.monomial(x - x0); });
                EXPECT_LE(std::abs(inner(Ta, m) - rhs), 1e-10);
            }
        }
    }
}

TEST(Cancellation, GaussianRatiosVanish) {
    const GridSpec g(1, 8.0, 2048);
    const auto T = make_operator("gaussian", 1);
    for (double p : {1.0, 0.5}) {
        const auto idx = HardyIndex::make(p, 1);
        std::vector<MultiIndex> alphas;
        const PolySpace space(1, idx.N);
        for (const auto& a : space.basis()) alphas.push_back(a);
        const auto rep = cancellation_test(T, g, idx, ladder(2, 6), alphas, 0);
        ASSERT_EQ(rep.rows.size(), 5 * alphas.size());
        for (const auto& r : rep.rows) {
            EXPECT_LE(r.ratio, 1e-4);
            EXPECT_NEAR(r.ratio, r.oscillation / r.psi_value, 1e-15);
        }
    }
}

TEST(Cancellation, SignMultiplicationDiverges) {
    const GridSpec g(1, 8.0, 4096);
    const auto rep = cancellation_test(make_operator("sign", 1), g, HardyIndex::make(1.0, 1), ladder(2, 7),
                                       {MultiIndex::make(1, 0)});
    ASSERT_EQ(rep.rows.size(), 6u);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_GT(rep.rows[i].ratio, rep.rows[i - 1].ratio);
    EXPECT_GE(rep.rows.back().ratio / rep.rows.front().ratio, 2.0);
}

TEST(Cancellation, RieszRatiosBounded) {
    const GridSpec g(1, 8.0, 4096);
    const auto rep = cancellation_test(make_operator("riesz", 1), g, HardyIndex::make(1.0, 1), ladder(2, 6),
                                       {MultiIndex::make(1, 0)}, 50);
    for (const auto& r : rep.rows) {
        EXPECT_LT(r.ratio, 0.1);
        EXPECT_GT(r.ratio, 0.0);
        EXPECT_LE(r.sensitivity, 0.1);
        EXPECT_LE(r.dual_gap, 1e-9 * std::max(r.oscillation, 1e-12) + 1e-15);
    }
}

TEST(Cancellation, SubadditiveInOperator) {
    const GridSpec g(1, 8.0, 2048);
    const auto idx = HardyIndex::make(1.0, 1);
    const auto T1 = make_operator("riesz", 1), T2 = make_operator("order-zero", 1);
    const auto sum = OperatorSpec::make_multiplier("sum", [&](const Point& xi) { return T1.symbol(xi) + T2.symbol(xi); });
    const std::vector<MultiIndex> alphas{MultiIndex::make(1, 0)};
    const auto balls = ladder(2, 5, {0.2, 0.0});
    std::vector<double> o1, o2, o12;
    // order-zero trips the 10% window guard at W = 1, so compare the raw windowed oscillations.
    for (const auto& B : balls) {
        const double W = cancellation_window(B.radius);
        auto osc = [&](const OperatorSpec& T) {
            return local_oscillation(tstar_monomial(T, g, B.center, alphas[0], W, kInfinity).f, B, idx.N);
        };
        EXPECT_LE(osc(sum), osc(T1) + osc(T2) + 1e-15);
    }
}

TEST(Cancellation, Preconditions) {
    const GridSpec g(1, 8.0, 1024);
    const auto T = make_operator("identity", 1);
    const auto idx = HardyIndex::make(1.0, 1);
    EXPECT_THROW(cancellation_test(T, g, idx, {Ball{{0.0, 0.0}, 1.0}}, {MultiIndex::make(1, 0)}), ConfigError);
    EXPECT_THROW(cancellation_test(T, g, idx, {Ball{{0.0, 0.0}, 0.5}}, {MultiIndex::make(1, 1)}), ConfigError);
}

TEST(AtomImage, MomentRatiosBounded) {
    // |⟨(·−x0)^α, T a⟩| against the two-branch bound for bounded operators.
    const GridSpec g(1, 4.0, 4096);
    for (double p : {1.0, 0.5}) {
        const auto idx = HardyIndex::make(p, 1);
        for (const auto& name : {"gaussian", "riesz", "bessel"}) {
            const auto T = make_operator(name, 1);
            double worst = 0.0;
            for (const auto& B : ladder(2, 6)) {
                const auto a = make_atom(g, AtomSpec::make(idx, 2.0, B, AtomSpace::local), 3);
                const auto Ta = apply(T, a);
                const PolySpace space(1, idx.N);
                for (const auto& al : space.basis()) {
                    const auto wm = detail::windowed_monomial(g, B.center, al, cancellation_window(B.radius));
                    const double bound = idx.is_critical_order(al.order()) ? std::pow(std::log1p(1.0 / B.radius), -1.0 / p) : 1.0;
                    worst = std::max(worst, std::abs(inner(Ta, wm)) / bound);
                }
            }
            EXPECT_LT(worst, 1.0) << name << " p " << p;
        }
    }
}

TEST(KernelSize, GaussianFiniteForAllMu) {
    const GridSpec g(1, 8.0, 4096);
    const auto T = make_operator("gaussian", 1);
    for (double mu : {0.5, 1.0, 2.0, 4.0}) {
        const auto rep = kernel_size_check(T, g, mu);
        EXPECT_TRUE(std::isfinite(rep.C));
        EXPECT_GT(rep.C, 0.0);
        EXPECT_LT(rep.worst_distance, 0.5);  // dominated by the near region
        EXPECT_FALSE(rep.no_off_diagonal);
    }
}

TEST(KernelSize, TruncatedPowerKernelFitsUnitConstant) {
    const GridSpec g(1, 8.0, 4096);
    const auto T = OperatorSpec::make_kernel("power", Field([](const Point& u) {
                                                 const double d = std::abs(u[0]);
                                                 if (d < 0.5) return cplx{};
                                                 return cplx{std::pow(d, -2.0) * detail::smooth_step(2.0 * d - 1.0), 0.0};
                                             }));
    const auto rep = kernel_size_check(T, g, 1.0);
    EXPECT_NEAR(rep.C, 1.0, 0.2);
}

TEST(KernelSize, IdentityHasNoOffDiagonalKernel) {
    const GridSpec g(1, 8.0, 1024);
    const auto rep = kernel_size_check(make_operator("identity", 1), g, 1.0);
    EXPECT_TRUE(rep.no_off_diagonal);
    EXPECT_EQ(rep.C, 0.0);
    EXPECT_THROW(kernel_size_check(make_operator("sign", 1), g, 1.0), ConfigError);
}

TEST(KernelHolder, SmoothAndStronglySingular) {
    const GridSpec g(1, 8.0, 4096);
    const auto gauss = kernel_holder_check(make_operator("gaussian", 1), g, 1.0, 1.0);
    EXPECT_TRUE(std::isfinite(gauss.C));
    EXPECT_GT(gauss.admissible, 0u);
    const auto ss = make_operator("strongly-singular", 1);
    const auto rep = kernel_holder_check(ss, g, 1.0, ss.param("sigma", 0.0));
    EXPECT_DOUBLE_EQ(rep.sigma, 0.5);
    EXPECT_TRUE(std::isfinite(rep.C));
    EXPECT_GT(rep.C, 0.0);
}

TEST(KernelHolder, JumpGrowsUnderRefinement) {
    // Ramp up to a jump at |u| = 1: a difference across the jump stays of
    // size one while |y − z| = h shrinks.
    const auto T = OperatorSpec::make_kernel("jump", Field([](const Point& u) {
                                                 const double d = std::abs(u[0]);
                                                 return cplx{d < 1.0 ? d : 0.0, 0.0};
                                             }));
    double prev = 0.0;
    for (std::size_t m : {1024, 2048, 4096}) {
        const auto rep = kernel_holder_check(T, GridSpec(1, 8.0, m), 1.0, 1.0);
        if (prev > 0.0) {
            EXPECT_GE(rep.C / prev, 2.0);
        }
        prev = rep.C;
    }
}

TEST(KernelHolder, NoAdmissibleTriples) {
    const GridSpec g(1, 1.0, 8);
    EXPECT_THROW(kernel_holder_check(make_operator("gaussian", 1), g, 1.0, 1.0), NumericalError);
    EXPECT_THROW(kernel_holder_check(make_operator("gaussian", 1), g, 0.0, 1.0), ConfigError);
}

TEST(Catalog, EntriesAndMetadata) {
    const auto& cat = builtin_operators();
    EXPECT_GE(cat.size(), 9u);
    std::set<std::string> names;
    for (const auto& e : cat) {
        names.insert(e.name);
        EXPECT_FALSE(e.summary.empty());
        const auto T = e.build(1, e.defaults);
        EXPECT_EQ(T.translation_invariant(), e.translation_invariant) << e.name;
        if (e.pathological) {
            EXPECT_FALSE(e.translation_invariant) << e.name;
        }
    }
    EXPECT_EQ(names.size(), cat.size());
    const auto ss = make_operator("strongly-singular", 1);
    EXPECT_DOUBLE_EQ(ss.param("a", 0.0), 0.25);
    EXPECT_DOUBLE_EQ(ss.param("sigma", 0.0), 0.5);
    EXPECT_DOUBLE_EQ(ss.param("q", 0.0), 4.0 / 3.0);
    EXPECT_EQ(ss.param("admissible", 0.0), 1.0);
    EXPECT_THROW(make_operator("nope", 1), ConfigError);
    EXPECT_THROW(make_operator("riesz", 1, {{"k", 1.0}}), ConfigError);
    EXPECT_THROW(make_operator("riesz", 1, {{"j", 2.0}}), ConfigError);
}

TEST(Catalog, NonPathologicalKernelsCertified) {
    const GridSpec g(1, 8.0, 4096);
    for (const auto& e : builtin_operators()) {
        if (e.pathological) continue;
        const auto T = e.build(1, e.defaults);
        const auto rep = kernel_size_check(T, g, T.param("mu", 1.0));
        EXPECT_TRUE(std::isfinite(rep.C)) << e.name;
        EXPECT_LT(rep.C, 10.0) << e.name;
    }
}

TEST(Catalog, ParseOperatorString) {
    const auto T = parse_operator("gaussian:eps=0.01", 1);
    EXPECT_DOUBLE_EQ(T.param("eps", 0.0), 0.01);
    const auto R = parse_operator("riesz:j=2", 2);
    EXPECT_NEAR(std::abs(R.symbol(Point{0.0, 3.0})), 3.0 / std::sqrt(10.0), 1e-15);
    EXPECT_THROW(parse_operator("gaussian:eps", 1), ConfigError);
    EXPECT_THROW(parse_operator("gaussian:eps=abc", 1), ConfigError);
}
