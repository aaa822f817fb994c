#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hardy/maximal.hpp"
#include "oracles.hpp"

using namespace hardy;

namespace {

double max_diff(const GridFunction& a, const GridFunction& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// Mean-zero smooth function: derivative of a Gaussian, unit L¹ scale.
GridFunction cancelling_bump(const GridSpec& g, double width) {
    return GridFunction::sample(g, [width](const Point& x) {
        const double u = x[0] / width;
        return -2.0 * u * std::exp(-u * u) / width;
    });
}

}  // namespace

TEST(ScaleGrid, GeometricInvariants) {
    auto g = ScaleGrid::geometric(0.01, 1.0);
    EXPECT_GE(g.size(), 16u);
    EXPECT_DOUBLE_EQ(g.t_min(), 0.01);
    EXPECT_DOUBLE_EQ(g.t_max(), 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        EXPECT_GT(g.scales[i], g.scales[i - 1]);
        EXPECT_LE(g.scales[i] / g.scales[i - 1], std::pow(2.0, 0.25) + 1e-12);
    }
    EXPECT_GE(ScaleGrid::geometric(0.5, 1.0).size(), 16u);
    EXPECT_EQ(g.refined().size(), 2 * g.size() - 1);
    GridSpec spec(1, 4.0, 256);
    EXPECT_DOUBLE_EQ(ScaleGrid::for_grid(spec, 1.0).t_min(), 2 * spec.spacing());
    EXPECT_THROW(ScaleGrid::for_grid(spec, spec.spacing()), NumericalError);
    EXPECT_THROW(ScaleGrid::geometric(1.0, 0.5), ConfigError);
}

TEST(Mollifier, UnitMass) {
    for (int dim : {1, 2}) {
        GridSpec g(dim, 4.0, dim == 1 ? 4096 : 512);
        for (auto m : {Mollifier::gaussian(), Mollifier::smooth_bump()}) {
            EXPECT_NEAR(integrate(GridFunction::sample(g, m.field(dim))).real(), 1.0, 1e-6) << m.name();
        }
    }
}

TEST(SmallMaximal, DominatesInputAtFineScales) {
    GridSpec g(1, 8.0, 2048);
    auto f = GridFunction::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1.2 + std::cos(3 * x[0])); });
    auto scales = ScaleGrid::for_grid(g, 1.0);
    ASSERT_LE(scales.t_min(), 4 * g.spacing());
    auto m = small_maximal(f, Mollifier::gaussian(), scales);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_GE(m[k].real(), 0.9 * f[k].real());
}

TEST(SmallMaximal, HomogeneityAndTranslation) {
    GridSpec g(1, 4.0, 512);
    auto f = oracle::random_samples(g, 3, 1.0);
    auto scales = ScaleGrid::for_grid(g, 1.0);
    auto m = small_maximal(f, Mollifier::gaussian(), scales);
    auto m3 = small_maximal(cplx{0.0, -3.0} * f, Mollifier::gaussian(), scales);
    EXPECT_LT(max_diff(m3, 3.0 * m), 1e-13 * lp_norm(m3, kInfinity));

    // Shift by whole cells; compare where no sample wraps around.
    const long s = 17;
    auto ms = small_maximal(shift_cells(f, s), Mollifier::gaussian(), scales);
    const long n = static_cast<long>(g.points_per_axis());
    for (long i = 64; i < n - 64; ++i) {
        EXPECT_NEAR(ms[static_cast<std::size_t>(i)].real(), m[static_cast<std::size_t>(i - s)].real(), 1e-12);
    }
}

TEST(SmallMaximal, ScaleRefinementIsStable) {
    GridSpec g(1, 8.0, 2048);
    for (int seed = 0; seed < 4; ++seed) {
        auto f = oracle::random_smooth(g, 40 + seed, 0.8, 4.0);
        auto scales = ScaleGrid::for_grid(g, 1.0);
        auto a = small_maximal(f, Mollifier::gaussian(), scales);
        auto b = small_maximal(f, Mollifier::gaussian(), scales.refined());
        const double na = lp_norm(a, 1.0), nb = lp_norm(b, 1.0);
        EXPECT_LE(std::abs(nb - na), 0.02 * na);
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_GE(b[k].real(), a[k].real());
    }
}

TEST(HpNorm, ZeroAndHomogeneity) {
    GridSpec g(1, 4.0, 1024);
    const auto idx = HardyIndex::make(1.0, 1);
    EXPECT_EQ(hp_norm(GridFunction(g), idx, Mollifier::gaussian()).value, 0.0);
    auto f = oracle::random_smooth(g, 8);
    for (double p : {1.0, 2.0 / 3.0, 0.5}) {
        const auto ix = HardyIndex::make(p, 1);
        const double a = hp_norm(f, ix, Mollifier::gaussian()).value;
        const double b = hp_norm(2.5 * f, ix, Mollifier::gaussian()).value;
        EXPECT_NEAR(b, 2.5 * a, 1e-12 * b);
    }
    auto rep = hp_norm(f, idx, Mollifier::gaussian());
    EXPECT_GE(rep.scale_count, 16u);
    EXPECT_DOUBLE_EQ(rep.t_max, 1.0);
}

TEST(HpNorm, GlobalNormTruncationAndFlag) {
    GridSpec g(1, 32.0, 8192);
    const auto idx = HardyIndex::make(1.0, 1);
    auto a = cancelling_bump(g, 0.25);
    const auto moll = Mollifier::gaussian();
    const double local = hp_norm(a, idx, moll).value;
    const auto h8 = Hp_norm(a, idx, moll, 8.0);
    const auto h16 = Hp_norm(a, idx, moll, 16.0);
    EXPECT_FALSE(h8.non_cancelling);
    EXPECT_GE(h8.value, local);
    EXPECT_LE(std::abs(h16.value - h8.value), 0.1 * h8.value);

    auto ind = restrict(GridFunction::constant(g, 1.0), Ball{{0, 0}, 0.5}, true);
    const auto i4 = Hp_norm(ind, idx, moll, 4.0);
    const auto i16 = Hp_norm(ind, idx, moll, 16.0);
    EXPECT_TRUE(i4.non_cancelling);
    EXPECT_GT(i16.value, 1.2 * i4.value);
    EXPECT_GE(i4.value, hp_norm(ind, idx, moll).value);
}

TEST(Phi0, BasicProperties) {
    const auto idx = HardyIndex::make(0.5, 1);  // N_p = 1, k = 2
    for (double v : {1.0, -1.0}) {
        auto p0 = build_phi0({v, 0.0}, MultiIndex::make(1, 0), idx);
        EXPECT_GT(p0.integral, 0.0);
        EXPECT_FALSE(p0.fallback);
        for (int a : {0, 1}) {
            auto pa = build_phi0({v, 0.0}, MultiIndex::make(1, a), idx);
            double worst = 0.0;
            for (double y = -0.999; y < 1.0; y += 0.001) {
                worst = std::max(worst, std::abs(pa.bump({y, 0.0}) - pa.constant * std::pow(y, a)));
            }
            EXPECT_EQ(worst, 0.0);
            EXPECT_EQ(pa.bump({0.5 * v + 2.0 * v, 0.0}), 0.0);
            // Derivative certification for |β| ≤ 2 with at least 5% margin.
            ASSERT_EQ(pa.certificate.size(), 3u);
            for (const auto& c : pa.certificate) EXPECT_GE(c.margin, 0.05) << "beta " << c.beta.str();
        }
    }
    EXPECT_THROW(build_phi0({1.0, 0.0}, MultiIndex::make(1, 2), idx), ConfigError);
}

TEST(Phi0, FallbackProfileInTwoDimensions) {
    // α = (1,0) with v ⟂ e_1: the plain profile integrates to zero by symmetry.
    const auto idx = HardyIndex::make(2.0 / 3.0, 2);
    auto p = build_phi0({0.0, 1.0}, MultiIndex::make(2, 1, 0), idx);
    EXPECT_TRUE(p.fallback);
    EXPECT_GE(std::abs(p.integral), 1e-4 * p.constant);
    for (const auto& c : p.certificate) EXPECT_GE(c.margin, 0.0);
    double worst = 0.0;
    for (double a = 0.0; a < 2 * M_PI; a += 0.1) {
        for (double s = 0.0; s < 1.0; s += 0.05) {
            const Point y{s * std::cos(a), s * std::sin(a)};
            worst = std::max(worst, std::abs(p.bump(y) - p.constant * y[0]));
        }
    }
    EXPECT_EQ(worst, 0.0);
}

TEST(PhiXAlpha, SupportFormulaAndAdmissibility) {
    const auto idx = HardyIndex::make(0.5, 1);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.05, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = (trial % 2 ? -1.0 : 1.0) * U(rng);
        const auto alpha = MultiIndex::make(1, trial % 3 == 0 ? 0 : 1);
        const auto ph = phi_x_alpha({x, 0.0}, alpha, idx);
        EXPECT_DOUBLE_EQ(ph.t, 4 * std::abs(x));
        auto rep = verify_admissible(ph.bump, idx.N + 1, ph.t, {x, 0.0});
        EXPECT_TRUE(rep.pass) << "x=" << x << " margin " << rep.worst_margin();
        EXPECT_TRUE(rep.support_ok);
        const double ax = std::abs(x);
        for (double y = -0.99 * ax; y < ax; y += 0.01 * ax) {
            const double expect = ph.constant * std::pow(y, alpha.order()) / (std::pow(2 * ax, alpha.order()) * ax);
            EXPECT_NEAR(ph.bump({y, 0.0}), expect, 1e-12 * std::abs(expect) + 1e-300);
        }
    }
    const auto idx2 = HardyIndex::make(2.0 / 3.0, 2);
    for (const Point x : {Point{0.3, 0.1}, Point{-0.2, 0.45}, Point{0.0, -0.3}}) {
        for (const auto& a : {MultiIndex::make(2, 0, 0), MultiIndex::make(2, 1, 0), MultiIndex::make(2, 0, 1)}) {
            const auto ph = phi_x_alpha(x, a, idx2);
            EXPECT_TRUE(verify_admissible(ph.bump, idx2.N + 1, ph.t, x).pass);
        }
    }
}

TEST(VerifyAdmissible, SaturatedMollifierPassesDoubledFails) {
    for (int dim : {1, 2}) {
        const Point x{0.2, dim == 2 ? -0.1 : 0.0};
        // k = 0: the normalization saturates the size bound itself.
        const auto d0 = make_dictionary(dim, 0, ScaleGrid::geometric(0.1, 1.0));
        const auto& e = d0.translates[5];
        auto bump = translate_bump(d0, e, x);
        EXPECT_TRUE(verify_admissible(bump, 0, e.t, x).pass);
        auto doubled = bump;
        doubled.eval = [b = bump](const Point& y) { return 2.0 * b(y); };
        auto bad = verify_admissible(doubled, 0, e.t, x);
        EXPECT_FALSE(bad.pass);
        EXPECT_LT(bad.bounds[0].margin, -0.9);

        // k = 2: a derivative bound binds, and doubling still fails.
        const auto d2 = make_dictionary(dim, 2, ScaleGrid::geometric(0.1, 1.0));
        auto b2 = translate_bump(d2, d2.translates[5], x);
        EXPECT_TRUE(verify_admissible(b2, 2, d2.translates[5].t, x).pass);
        auto b2x = b2;
        b2x.eval = [b = b2](const Point& y) { return 2.0 * b(y); };
        EXPECT_FALSE(verify_admissible(b2x, 2, d2.translates[5].t, x).pass);
    }
}

TEST(GrandMaximal, DominatesNormalizedSmallMaximal) {
    GridSpec g(1, 4.0, 1024);
    auto f = oracle::random_samples(g, 5, 1.5);
    auto scales = ScaleGrid::for_grid(g, 1.0);
    auto dict = make_dictionary(1, 1, scales);
    auto G = grand_maximal(f, dict);
    auto m = small_maximal(f, Mollifier::smooth_bump(), scales);
    const double tol = 1e-12 * lp_norm(G, kInfinity);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_GE(G[k].real(), dict.c_phi * m[k].real() - tol);
    EXPECT_EQ(lp_norm(grand_maximal(GridFunction(g), dict), kInfinity), 0.0);
    EXPECT_EQ(certify(dict).failed, 0u);
}

TEST(GrandMaximal, SublinearAndMonotoneInDictionary) {
    GridSpec g(1, 4.0, 512);
    auto f = oracle::random_smooth(g, 1, 0.5, 6.0);
    auto h = oracle::random_samples(g, 2, 1.0);
    auto small = make_dictionary(1, 1, ScaleGrid::geometric(0.1, 1.0));
    auto Gf = grand_maximal(f, small), Gh = grand_maximal(h, small);
    auto Gfh = grand_maximal(f + h, small);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_LE(Gfh[k].real(), Gf[k].real() + Gh[k].real() + 1e-12);

    auto big = small;
    const auto idx = HardyIndex::make(1.0, 1);
    add_moment_sites(big, g, {0.0, 0.0}, 0.25, {MultiIndex::make(1, 0)}, idx, 4);
    ASSERT_GT(big.sites.size(), 0u);
    auto Gbig = grand_maximal(f, big);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_GE(Gbig[k].real(), Gf[k].real());
}

TEST(GrandMaximal, MomentDetectionAtSites) {
    // g supported in B(0, r): at every site the φ^{x,α} entry sees
    // C_α (2|x|)^{-|α|} |x|^{-dim} |moment(g, 0, α)|.
    GridSpec g(1, 4.0, 2048);
    const double r = 0.25;
    const auto idx = HardyIndex::make(0.5, 1);
    auto gfun = restrict(oracle::random_smooth(g, 9, 0.3, 5.0), Ball{{0, 0}, r}, true);
    auto dict = make_dictionary(1, idx.N + 1, ScaleGrid::geometric(0.1, 2.0));
    const std::vector<MultiIndex> alphas{MultiIndex::make(1, 0), MultiIndex::make(1, 1)};
    add_moment_sites(dict, g, {0.0, 0.0}, r, alphas, idx, 8);
    auto G = grand_maximal(gfun, dict);
    std::size_t checked = 0;
    for (const auto& s : dict.sites) {
        const double ax = std::abs(s.x[0]);
        const double mom = std::abs(moment(gfun, {0, 0}, s.alpha));
        const double bound = s.phi.constant * std::pow(2 * ax, -s.alpha.order()) * mom / ax;
        EXPECT_GE(G[s.index].real(), bound * (1 - 1e-9));
        ++checked;
    }
    EXPECT_GT(checked, 10u);
    EXPECT_EQ(certify(dict, 7).failed, 0u);
}

TEST(GrandMaximal, ManifestLines) {
    GridSpec g(1, 4.0, 256);
    auto dict = make_dictionary(1, 1, ScaleGrid::geometric(0.1, 1.0));
    add_moment_sites(dict, g, {0.0, 0.0}, 0.5, {MultiIndex::make(1, 0)}, HardyIndex::make(1.0, 1), 16);
    std::stringstream ss;
    write_manifest(ss, dict);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line.rfind("dictionary dim=1 k=1", 0), 0u);
    std::size_t translate = 0, site = 0;
    while (std::getline(ss, line)) {
        if (line.rfind("translate ", 0) == 0) ++translate;
        if (line.rfind("site ", 0) == 0) ++site;
    }
    EXPECT_EQ(translate, dict.translates.size());
    EXPECT_EQ(site, dict.sites.size());
}
