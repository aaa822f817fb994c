#include <gtest/gtest.h>

#include <cmath>

#include "hardy/atoms.hpp"
#include "oracles.hpp"

using namespace hardy;

TEST(Atom, LocalSmallBallHundredSeeds) {
    const GridSpec g(1, 4.0, 4096);
    const auto idx = HardyIndex::make(0.5, 1);
    const auto spec = AtomSpec::make(idx, 2.0, Ball{{0.3, 0.0}, 0.25}, AtomSpace::local);
    ASSERT_TRUE(spec.needs_moments());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto a = make_atom(g, spec, seed);
        const auto rep = validate_atom(a, spec, 1e-8);
        EXPECT_TRUE(rep.pass) << "seed " << seed << " moment " << rep.worst_moment;
        EXPECT_NEAR(rep.size / rep.size_bound, 1.0, 1e-12);
        EXPECT_EQ(rep.outside_mass, 0.0);
    }
}

TEST(Atom, GlobalLargeBallAndSupNorm) {
    const GridSpec g(1, 8.0, 4096);
    const auto idx = HardyIndex::make(0.4, 1);
    for (double s : {2.0, kInfinity}) {
        const auto spec = AtomSpec::make(idx, s, Ball{{-1.0, 0.0}, 3.0}, AtomSpace::global);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto rep = validate_atom(make_atom(g, spec, seed), spec, 1e-8);
            EXPECT_TRUE(rep.pass) << "s " << s << " seed " << seed;
        }
    }
}

TEST(Atom, LocalUnitBallSkipsMoments) {
    const GridSpec g(1, 8.0, 1024);
    const auto idx = HardyIndex::make(0.5, 1);
    const auto spec = AtomSpec::make(idx, 2.0, Ball{{0.0, 0.0}, 2.0}, AtomSpace::local);
    EXPECT_FALSE(spec.needs_moments());
    const auto a = make_atom(g, spec, 7);
    const auto rep = validate_atom(a, spec, 1e-8);
    EXPECT_TRUE(rep.pass);
    EXPECT_FALSE(rep.moments_required);
    // A generic random profile does carry a mean.
    EXPECT_GT(rep.worst_moment, 1e-6);
}

TEST(Atom, TwoDimensional) {
    const GridSpec g(2, 2.0, 128);
    const auto idx = HardyIndex::make(0.6, 2);  // γ = 4/3, N = 1
    ASSERT_EQ(idx.N, 1);
    const auto spec = AtomSpec::make(idx, 2.0, Ball{{0.2, -0.1}, 0.5}, AtomSpace::global);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rep = validate_atom(make_atom(g, spec, seed), spec, 1e-8);
        EXPECT_TRUE(rep.pass) << "seed " << seed;
    }
}

TEST(Atom, DeterministicPerSeed) {
    const GridSpec g(1, 4.0, 1024);
    const auto spec = AtomSpec::make(HardyIndex::make(0.5, 1), 2.0, Ball{{0.0, 0.0}, 0.5}, AtomSpace::local);
    const auto a = make_atom(g, spec, 3), b = make_atom(g, spec, 3), c = make_atom(g, spec, 4);
    double same = 0.0, differ = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        same = std::max(same, std::abs(a[k] - b[k]));
        differ = std::max(differ, std::abs(a[k] - c[k]));
    }
    EXPECT_EQ(same, 0.0);
    EXPECT_GT(differ, 0.0);
}

TEST(Atom, ValidatorRejectsBrokenAtoms) {
    const GridSpec g(1, 4.0, 2048);
    const auto spec = AtomSpec::make(HardyIndex::make(0.5, 1), 2.0, Ball{{0.0, 0.0}, 0.5}, AtomSpace::local);
    auto a = make_atom(g, spec, 1);
    auto big = a;
    big *= cplx{1.5, 0.0};
    const auto rb = validate_atom(big, spec, 1e-8);
    EXPECT_FALSE(rb.pass);
    EXPECT_EQ(rb.failures.front(), "size");

    auto shifted = shift_cells(a, 300);
    EXPECT_FALSE(validate_atom(shifted, spec, 1e-8).pass);

    auto biased = a;
    biased += GridFunction::sample(g, [](const Point& x) { return std::abs(x[0]) < 0.4 ? 0.01 : 0.0; });
    const auto rm = validate_atom(biased, spec, 1e-8);
    EXPECT_GT(rm.worst_moment, 1e-4);
}

TEST(Atom, Preconditions) {
    const GridSpec g(1, 4.0, 64);
    const auto idx = HardyIndex::make(0.5, 1);
    EXPECT_THROW(AtomSpec::make(idx, 0.5, Ball{{0.0, 0.0}, 0.5}, AtomSpace::local), ConfigError);
    EXPECT_THROW(AtomSpec::make(idx, 0.9, Ball{{0.0, 0.0}, 0.5}, AtomSpace::global), ConfigError);
    const auto tiny = AtomSpec::make(idx, 2.0, Ball{{0.0, 0.0}, 0.2}, AtomSpace::local);
    EXPECT_THROW(make_atom(g, tiny, 0), NumericalError);
    EXPECT_EQ(parse_atom_space("H"), AtomSpace::global);
    EXPECT_THROW(parse_atom_space("x"), ConfigError);
}

TEST(PreMolecule, PowerDecayHasStableConstant) {
    // (1 + |x|)^{−dim−2} with s = 2, λ = 2 has a finite constant that settles
    // as the domain grows.
    const auto idx = HardyIndex::make(1.0, 1);
    const Ball B{{0.0, 0.0}, 1.0};
    std::vector<double> C, tail;
    for (double L : {16.0, 32.0, 64.0}) {
        const GridSpec g(1, L, static_cast<std::size_t>(256 * L));
        const auto M = GridFunction::sample(g, [](const Point& x) { return std::pow(1.0 + std::abs(x[0]), -3.0); });
        C.push_back(min_premolecule_constant(M, idx, 2.0, 2.0, B));
        tail.push_back(validate_premolecule(M, PreMoleculeSpec::make(idx, 2.0, 2.0, 1.0, B)).m2_ratio);
        const auto pass = validate_premolecule(M, PreMoleculeSpec::make(idx, 2.0, 2.0, C.back() * (1 + 1e-10), B));
        EXPECT_TRUE(pass.pass);
        const auto fail = validate_premolecule(M, PreMoleculeSpec::make(idx, 2.0, 2.0, C.back() * 0.99, B));
        EXPECT_FALSE(fail.pass);
    }
    EXPECT_LE(std::abs(C[2] - C[1]), std::abs(C[1] - C[0]));
    EXPECT_LT(std::abs(C[2] - C[1]) / C[2], 1e-3);
    EXPECT_LT(std::abs(tail[2] - tail[1]), std::abs(tail[1] - tail[0]));
    EXPECT_LT(std::abs(tail[2] - tail[1]) / tail[2], 1e-3);
}

TEST(PreMolecule, HeavyTailGrowsWithDomain) {
    const auto idx = HardyIndex::make(1.0, 1);
    const Ball B{{0.0, 0.0}, 1.0};
    double prev = 0.0;
    for (double L : {8.0, 16.0, 32.0, 64.0}) {
        const GridSpec g(1, L, static_cast<std::size_t>(128 * L));
        const auto M = GridFunction::sample(g, [](const Point& x) { return 1.0 / (1.0 + std::abs(x[0])); });
        const auto rep = validate_premolecule(M, PreMoleculeSpec::make(idx, 2.0, 2.0, 1.0, B));
        EXPECT_GT(rep.m2_ratio, prev * 1.3);
        prev = rep.m2_ratio;
    }
}

TEST(PreMolecule, OracleNorms) {
    // Indicator of [−2, 2] against B(0,1): M1 = √2, M2² = 2∫_1^2 x² dx = 14/3.
    const auto idx = HardyIndex::make(1.0, 1);
    const GridSpec g(1, 4.0, 1 << 16);
    const auto M = GridFunction::sample(g, [](const Point& x) { return std::abs(x[0]) < 2.0 ? 1.0 : 0.0; });
    const auto rep = validate_premolecule(M, PreMoleculeSpec::make(idx, 2.0, 2.0, 1.0, Ball{{0.0, 0.0}, 1.0}));
    EXPECT_NEAR(rep.m1_lhs, std::sqrt(2.0), 1e-3);
    EXPECT_NEAR(rep.m2_lhs, std::sqrt(14.0 / 3.0), 1e-3);
}

TEST(PreMolecule, LambdaConstraint) {
    const auto idx = HardyIndex::make(0.5, 1);  // dim(s/p − 1) = 3 at s = 2
    const Ball B{{0.0, 0.0}, 1.0};
    EXPECT_THROW(PreMoleculeSpec::make(idx, 2.0, 3.0, 1.0, B), ConfigError);
    EXPECT_NO_THROW(PreMoleculeSpec::make(idx, 2.0, 3.01, 1.0, B));
    EXPECT_THROW(PreMoleculeSpec::make(idx, kInfinity, 10.0, 1.0, B), ConfigError);
}

TEST(MomentBound, TableShapeAndCriticalRow) {
    const GridSpec g(1, 8.0, 2048);
    const auto idx = HardyIndex::make(0.5, 1);
    const Ball B{{0.0, 0.0}, 0.25};
    const auto f = GridFunction::sample(g, [](const Point& x) { return (1.0 + x[0]) * std::exp(-4.0 * x[0] * x[0]); });
    const auto tab = moment_bound_check(f, B, idx);
    ASSERT_EQ(tab.rows.size(), 2u);
    EXPECT_GT(tab.hp_norm, 0.0);
    EXPECT_FALSE(tab.rows[0].critical);
    EXPECT_TRUE(tab.rows[1].critical);
    EXPECT_DOUBLE_EQ(tab.rows[0].bound, 1.0);
    EXPECT_NEAR(tab.rows[1].bound, std::pow(std::log(5.0), -2.0), 1e-14);
    EXPECT_NEAR(tab.rows[0].moment, std::abs(oracle::direct_moment(f, B.center, std::vector<int>{0})), 1e-12);
    for (const auto& r : tab.rows) EXPECT_TRUE(std::isfinite(r.ratio));
}

TEST(MomentBound, Preconditions) {
    const GridSpec g(1, 4.0, 256);
    const auto idx = HardyIndex::make(0.5, 1);
    EXPECT_THROW(moment_bound_check(GridFunction(g), Ball{{0.0, 0.0}, 0.5}, idx), NumericalError);
    EXPECT_THROW(moment_bound_check(GridFunction::constant(g, 1.0), Ball{{0.0, 0.0}, 1.0}, idx), ConfigError);
}

namespace {

void check_decomposition(const GridFunction& M, const Ball& B, const HardyIndex& idx) {
    const auto dec = pseudo_decompose(M, B, idx);
    const double scale = lp_norm(M, 2.0);
    EXPECT_LE(dec.residual, 1e-8 * scale);
    for (std::size_t k = 0; k < dec.g.size(); ++k) {
        if (dec.g[k] != cplx{}) {
            EXPECT_TRUE(B.contains(dec.g.spec().point(k), dec.g.spec().dim()));
        }
    }
    EXPECT_FALSE(dec.atoms.empty());
    double sum = 0.0;
    for (const auto& piece : dec.atoms) {
        const auto spec = AtomSpec::make(idx, 2.0, piece.ball, AtomSpace::global);
        const auto rep = validate_atom(piece.atom, spec, 1e-8);
        EXPECT_TRUE(rep.pass) << "radius " << piece.ball.radius << " moment " << rep.worst_moment;
        sum += std::pow(piece.coefficient, idx.p);
    }
    EXPECT_NEAR(sum, dec.sum_cp, 1e-12 * sum);
}

}  // namespace

TEST(PseudoDecompose, OneDimensionalReconstruction) {
    const GridSpec g(1, 16.0, 8192);
    const auto idx = HardyIndex::make(0.5, 1);
    const auto M = GridFunction::sample(g, [](const Point& x) { return std::pow(1.0 + x[0] * x[0], -2.0); });
    check_decomposition(M, Ball{{0.0, 0.0}, 0.5}, idx);
    check_decomposition(M, Ball{{1.0, 0.0}, 0.25}, idx);
}

TEST(PseudoDecompose, TwoDimensionalReconstruction) {
    const GridSpec g(2, 8.0, 256);
    const auto idx = HardyIndex::make(0.6, 2);
    const auto M = GridFunction::sample(g, [](const Point& x) {
        return (1.0 + x[0]) * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    });
    check_decomposition(M, Ball{{0.0, 0.0}, 0.5}, idx);
}

TEST(PseudoDecompose, MomentsTransferToG) {
    // Every atom cancels, so g carries all moments of M up to order N.
    const GridSpec g(1, 16.0, 4096);
    const auto idx = HardyIndex::make(0.5, 1);
    const auto M = GridFunction::sample(g, [](const Point& x) { return std::exp(-std::abs(x[0] - 1.0)); });
    const Ball B{{0.0, 0.0}, 0.5};
    const auto dec = pseudo_decompose(M, B, idx);
    const PolySpace space(1, idx.N);
    for (const auto& a : space.basis()) {
        const cplx mm = oracle::direct_moment(M, B.center, {a.e[0]});
        const cplx mg = oracle::direct_moment(dec.g, B.center, {a.e[0]});
        EXPECT_NEAR(std::abs(mm - mg), 0.0, 1e-9 * std::abs(mm) + 1e-12);
    }
}

TEST(PseudoDecompose, HeavyTailRejectedWhenTruncated) {
    const GridSpec g(1, 16.0, 1024);
    const auto idx = HardyIndex::make(0.5, 1);
    const auto M = GridFunction::constant(g, 1.0);
    EXPECT_THROW(pseudo_decompose(M, Ball{{0.0, 0.0}, 0.5}, idx, 3), NumericalError);
}
