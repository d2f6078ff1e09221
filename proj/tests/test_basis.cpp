#include "oracles.hpp"

#include <prodbar/basis.hpp>
#include <prodbar/graded.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace prodbar;

TEST(FactorSpec, RejectsInvalidConfigs) {
    EXPECT_THROW(FactorSpec::disc(-1).validate(), ConfigError);
    EXPECT_THROW(FactorSpec::disc(2, -0.5).validate(), ConfigError);
    EXPECT_THROW(FactorSpec::disc(2, 0.0, 0.0).validate(), ConfigError);
    EXPECT_THROW(FactorSpec::annulus(2, 2.0, 1.0).validate(), ConfigError);
    EXPECT_THROW(FactorSpec::annulus(2, 0.0, 1.0).validate(), ConfigError);
    FactorSpec t = FactorSpec::torus(2);
    t.weight_t = 1.0;
    EXPECT_THROW(t.validate(), ConfigError);
    EXPECT_NO_THROW(FactorSpec::annulus(2, 1.0, 2.0, 0.5).validate());
}

TEST(Labels, DiscLadderCounts) {
    const ScalarBasis b(FactorSpec::disc(2));
    EXPECT_EQ(b.level(0).size(), 9);
    EXPECT_EQ(b.level(1).size(), 6);
    for (const auto& l : b.level(0).labels) {
        EXPECT_TRUE(l.a >= 0 && l.a <= 2 && l.b >= 0 && l.b <= 2);
    }
}

TEST(Labels, AnnulusAndTorusCounts) {
    EXPECT_EQ(ScalarBasis(FactorSpec::annulus(2, 1.0, 2.0)).level(0).size(), 15);
    EXPECT_EQ(ScalarBasis(FactorSpec::annulus(2, 1.0, 2.0)).level(1).size(), 10);
    EXPECT_EQ(ScalarBasis(FactorSpec::torus(1)).level(0).size(), 9);
    EXPECT_EQ(ScalarBasis(FactorSpec::torus(1)).level(1).size(), 9);
}

TEST(Labels, SortedByChargeThenK) {
    const ScalarBasis b(FactorSpec::disc(3));
    const auto& lv = b.level(0);
    for (std::size_t i = 1; i < lv.labels.size(); ++i) {
        const auto c0 = lv.charges[i - 1], c1 = lv.charges[i];
        EXPECT_TRUE(c0 < c1 || (c0 == c1 && lv.labels[i - 1].b < lv.labels[i].b));
    }
}

TEST(Gram, TorusIsIdentity) {
    const ScalarBasis b(FactorSpec::torus(1));
    const LRealMatrix g = b.level(0).gram;
    EXPECT_EQ(g.rows(), 9);
    EXPECT_LT(static_cast<double>((g - LRealMatrix::Identity(9, 9)).cwiseAbs().maxCoeff()), 1e-15);
}

TEST(Gram, NamedDiscValues) {
    const FactorSpec d = FactorSpec::disc(1);
    EXPECT_NEAR(gram_entry(d, {0, 0}, {0, 0}).real(), oracle::pi, 1e-12);
    EXPECT_NEAR(gram_entry(d, {1, 0}, {1, 0}).real(), oracle::pi / 2, 1e-12);
    EXPECT_EQ(std::abs(gram_entry(d, {1, 0}, {0, 1})), 0.0);
    EXPECT_NEAR(std::abs(oracle::monomial_inner(0, 0, 0, 0, 0, 0, 1) - oracle::pi), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(oracle::monomial_inner(1, 0, 1, 0, 0, 0, 1) - oracle::pi / 2), 0.0, 1e-9);
}

TEST(Gram, WeightedOneOne) {
    const double expected = oracle::pi * (1 - std::exp(-1.0));
    EXPECT_NEAR(gram_entry(FactorSpec::disc(1, 1.0), {0, 0}, {0, 0}).real(), expected, 1e-10);
    EXPECT_NEAR(oracle::monomial_inner(0, 0, 0, 0, 1.0, 0, 1).real(), expected, 1e-10);
}

TEST(Gram, AgreesWithPolarQuadrature) {
    std::mt19937 rng(3);
    const std::vector<FactorSpec> specs{FactorSpec::disc(3), FactorSpec::disc(3, 1.0), FactorSpec::disc(2, 0.5, 1.5),
                                        FactorSpec::annulus(2, 1.0, 2.0), FactorSpec::annulus(2, 0.5, 1.0, 1.0)};
    int checked = 0;
    for (const auto& s : specs) {
        const auto labels = ladder_labels(s, 0);
        std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
        const double r0 = s.kind == FactorKind::annulus ? s.inner_radius : 0.0;
        const double r1 = s.kind == FactorKind::annulus ? s.outer_radius : s.radius;
        for (int i = 0; i < 10; ++i, ++checked) {
            const BasisLabel x = labels[pick(rng)], y = labels[pick(rng)];
            const cplx ref = oracle::monomial_inner(x.a, x.b, y.a, y.b, s.weight_t, r0, r1);
            EXPECT_NEAR(std::abs(gram_entry(s, x, y) - ref), 0.0, 1e-9 * std::max(1.0, std::abs(ref)))
                << s.describe() << " " << x.a << "," << x.b << " vs " << y.a << "," << y.b;
        }
    }
    EXPECT_EQ(checked, 50);
}

TEST(Gram, HermitianPositiveAndChargeSeparated) {
    for (const auto& s : {FactorSpec::disc(5), FactorSpec::disc(5, 1.0), FactorSpec::annulus(4, 1.0, 2.0)}) {
        const ScalarBasis b(s);
        for (int l = 0; l < 2; ++l) {
            const auto& lv = b.level(l);
            EXPECT_EQ(static_cast<double>((lv.gram - lv.gram.transpose()).cwiseAbs().maxCoeff()), 0.0);
            for (Eigen::Index i = 0; i < lv.size(); ++i)
                for (Eigen::Index j = 0; j < lv.size(); ++j)
                    if (lv.charges[i] != lv.charges[j]) EXPECT_EQ(static_cast<double>(lv.gram(i, j)), 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lv.gram.cast<double>());
            EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
            const LRealMatrix id = lv.orthonormal_map.transpose() * lv.gram * lv.orthonormal_map;
            EXPECT_LT(static_cast<double>((id - LRealMatrix::Identity(lv.size(), lv.size())).cwiseAbs().maxCoeff()), 1e-12)
                << s.describe();
        }
    }
}

TEST(Gram, OutOfRangeLabel) {
    EXPECT_THROW(gram_entry(FactorSpec::disc(2), {3, 0}, {0, 0}), IndexError);
    EXPECT_THROW(gram_entry(FactorSpec::disc(2), {-1, 0}, {0, 0}), IndexError);
    EXPECT_NO_THROW(gram_entry(FactorSpec::annulus(2, 1, 2), {-2, 0}, {0, 0}));
}

TEST(Gram, IllConditionedTruncation) {
    EXPECT_THROW(ScalarBasis(FactorSpec::disc(16)), IllConditionedError);
    EXPECT_NO_THROW(ScalarBasis(FactorSpec::disc(8)));
}

TEST(Derivatives, DiscDzbarExample) {
    const ScalarBasis b(FactorSpec::disc(3));
    // d/dzbar (z^2 zbar^3) = 3 z^2 zbar^2
    const Eigen::Index col = b.level(0).index_of({2, 3});
    const Eigen::Index row = b.level(1).index_of({2, 2});
    ASSERT_GE(col, 0);
    ASSERT_GE(row, 0);
    EXPECT_EQ(static_cast<double>(std::abs(b.d_zbar()(row, col))), 3.0);
    EXPECT_EQ(static_cast<double>(b.d_zbar().col(col).cwiseAbs().sum()), 3.0);
}

TEST(Derivatives, TorusExamples) {
    const ScalarBasis b(FactorSpec::torus(1));
    const Eigen::Index c00 = b.level(0).index_of({0, 0}), c10 = b.level(0).index_of({1, 0});
    EXPECT_EQ(static_cast<double>(std::abs(b.d_zbar().col(c00).sum())), 0.0);
    const std::complex<double> v(static_cast<double>(b.d_zbar()(c10, c10).real()), static_cast<double>(b.d_zbar()(c10, c10).imag()));
    EXPECT_NEAR(std::abs(v - std::complex<double>(0, oracle::pi)), 0.0, 1e-15);
    // d/dz e_{0,1} = pi i (0 - i) e_{0,1} = pi e_{0,1}
    const Eigen::Index c01 = b.level(0).index_of({0, 1});
    const auto dz = b.d_z(0).matrix(c01, c01);
    EXPECT_NEAR(static_cast<double>(dz.real()), oracle::pi, 1e-15);
    EXPECT_NEAR(static_cast<double>(dz.imag()), 0.0, 1e-15);
}

TEST(Derivatives, FiniteDifferenceOracle) {
    for (const auto& s : {FactorSpec::disc(3), FactorSpec::annulus(2, 1.0, 2.0)}) {
        const ScalarBasis b(s);
        const auto& lv0 = b.level(0);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> nd;
        Eigen::VectorXcd c(lv0.size());
        for (auto& x : c) x = {nd(rng), nd(rng)};
        auto eval = [](const std::vector<BasisLabel>& labels, const Eigen::VectorXcd& coef) {
            return [&labels, coef](cplx z) {
                cplx v = 0.0;
                for (std::size_t i = 0; i < labels.size(); ++i)
                    v += coef[static_cast<Eigen::Index>(i)] * std::pow(z, labels[i].a) * std::pow(std::conj(z), labels[i].b);
                return v;
            };
        };
        const Eigen::VectorXcd dc = to_double(b.d_zbar()) * c;
        const DerivativeMap dz = b.d_z(0);
        const Eigen::VectorXcd dzc = to_double(dz.matrix) * c;
        const auto f = eval(lv0.labels, c);
        const auto g = eval(b.level(1).labels, dc);
        const auto h = eval(dz.image_labels, dzc);
        for (const cplx z : {cplx(1.3, 0.4), cplx(-1.1, 0.9), cplx(0.2, -1.5)}) {
            EXPECT_NEAR(std::abs(oracle::dzbar_fd(f, z) - g(z)), 0.0, 1e-6 * std::abs(g(z)) + 1e-6);
            EXPECT_NEAR(std::abs(oracle::dz_fd(f, z) - h(z)), 0.0, 1e-6 * std::abs(h(z)) + 1e-6);
        }
    }
}

TEST(Derivatives, IntegrationByParts) {
    // <d/dzbar u, v> = -<u, d/dz v> when u vanishes on |z| = 1; u = z - z^2 zbar, v = z^2 zbar.
    auto u = [](cplx z) { return z - z * z * std::conj(z); };
    auto v = [](cplx z) { return z * z * std::conj(z); };
    const cplx lhs = oracle::polar_integral([&](cplx z) { return oracle::dzbar_fd(u, z) * std::conj(v(z)); }, 0, 1, 400);
    const cplx rhs = -oracle::polar_integral([&](cplx z) { return u(z) * std::conj(oracle::dz_fd(v, z)); }, 0, 1, 400);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-6);

    const FactorSpec s = FactorSpec::disc(4);
    const ScalarBasis b(s);
    const auto& lv0 = b.level(0);
    Eigen::VectorXcd cu = Eigen::VectorXcd::Zero(lv0.size()), cv = cu;
    cu[lv0.index_of({1, 0})] = 1.0;
    cu[lv0.index_of({2, 1})] = -1.0;
    cv[lv0.index_of({2, 1})] = 1.0;
    const Eigen::VectorXcd du = to_double(b.d_zbar()) * cu;
    const DerivativeMap dz = b.d_z(0);
    const Eigen::VectorXcd dv = to_double(dz.matrix) * cv;
    cplx lib_lhs = 0.0, lib_rhs = 0.0;
    for (Eigen::Index i = 0; i < du.size(); ++i)
        for (Eigen::Index j = 0; j < lv0.size(); ++j)
            lib_lhs += du[i] * std::conj(cv[j]) * gram_entry(s, b.level(1).labels[i], lv0.labels[j]);
    for (Eigen::Index i = 0; i < lv0.size(); ++i)
        for (std::size_t j = 0; j < dz.image_labels.size(); ++j)
            lib_rhs -= cu[i] * std::conj(dv[static_cast<Eigen::Index>(j)]) * gram_entry(s, lv0.labels[i], dz.image_labels[j]);
    EXPECT_NEAR(std::abs(lib_lhs - lib_rhs), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(lib_lhs - lhs), 0.0, 1e-6);
}

TEST(GradedSpace, MetricFactorsAndDims) {
    const ScalarBasis b(FactorSpec::disc(4));
    const GradedSpace g = GradedSpace::from_basis(b);
    EXPECT_EQ(g.dim({0, 0}), 25);
    EXPECT_EQ(g.dim({0, 1}), 20);
    EXPECT_EQ(g.dim({1, 0}), 25);
    EXPECT_EQ(g.dim({1, 1}), 20);
    EXPECT_EQ(GradedSpace::metric_factor({1, 0}), 2.0);
    EXPECT_EQ(GradedSpace::metric_factor({0, 1}), 2.0);
    EXPECT_EQ(GradedSpace::metric_factor({1, 1}), 4.0);
    const Eigen::Index one = b.level(1).index_of({0, 0});
    EXPECT_NEAR(static_cast<double>(g.gram[factor_slot({0, 1})](one, one)), 2 * oracle::pi, 1e-12);
    EXPECT_NEAR(static_cast<double>(g.gram[factor_slot({1, 1})](one, one)), 4 * oracle::pi, 1e-12);
}
