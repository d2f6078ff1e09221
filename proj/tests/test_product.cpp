#include "oracles.hpp"

#include <prodbar/verify.hpp>

#include <gtest/gtest.h>

using namespace prodbar;

namespace {

using FactorPtr = std::shared_ptr<const FactorComplex>;

FactorPtr factor(const FactorSpec& s) {
    static std::vector<std::pair<FactorSpec, FactorPtr>> cache;
    for (const auto& [k, v] : cache)
        if (k == s) return v;
    cache.emplace_back(s, std::make_shared<const FactorComplex>(assemble_factor_complex(s)));
    return cache.back().second;
}

ProductComplex product(std::initializer_list<FactorSpec> specs, Eigen::Index cap = ProductComplex::kDefaultDenseCap) {
    std::vector<FactorPtr> fs;
    for (const auto& s : specs) fs.push_back(factor(s));
    return build_product(fs, cap);
}

const ProductComplex& disc_disc() {
    static const ProductComplex pc = product({FactorSpec::disc(4), FactorSpec::disc(4)});
    return pc;
}

const ProductComplex& disc_torus() {
    static const ProductComplex pc = product({FactorSpec::disc(4), FactorSpec::torus(2)});
    return pc;
}

FormVector mono(const ProductComplex& pc, std::size_t j, Bidegree bd, BasisLabel l) { return pc.factors[j]->monomial(bd, l); }

void expect_all_pass(const verify::Report& r) {
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " measured " << c.measured << " > " << c.tolerance;
}

}  // namespace

TEST(ProductDbar, LeibnizOnFunctions) {
    const auto& pc = disc_disc();
    const ProductFormVector f = pc.tensor({mono(pc, 0, {0, 0}, {0, 1}), mono(pc, 1, {0, 0}, {0, 1})});
    const ProductFormVector expected = pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 1})}) +
                                       pc.tensor({mono(pc, 0, {0, 0}, {0, 1}), mono(pc, 1, {0, 1}, {0, 0})});
    EXPECT_LT((pc.dbar.apply(f) - expected).norm(), 1e-12);
}

TEST(ProductDbar, SignOnOneForm) {
    const auto& pc = disc_disc();
    const ProductFormVector f = pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 1})});
    const ProductFormVector expected = cplx(-1.0) * pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 1}, {0, 0})});
    EXPECT_LT((pc.dbar.apply(f) - expected).norm(), 1e-12);
}

TEST(ProductDbar, Adjointness) {
    const auto& pc = disc_torus();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5; ++i) {
        const ProductFormVector u = random_form(pc.space, rng), v = random_form(pc.space, rng);
        const cplx a = pc.dbar.apply(u).inner(v), b = u.inner(pc.dbar_star.apply(v));
        EXPECT_LT(std::abs(a - b), 1e-10 * pc.dbar_scale() * u.norm() * v.norm());
    }
}

TEST(ProductProjection, HarmonicTensorHarmonic) {
    const auto& pc = disc_torus();
    const ProductFormVector f = pc.tensor({mono(pc, 0, {0, 0}, {0, 0}), mono(pc, 1, {0, 1}, {0, 0})});
    EXPECT_LT((pc.harmonic_proj.apply(f) - f).norm(), 1e-12);
    EXPECT_LT(pc.solution.apply(f).norm(), 1e-12);
}

TEST(ProductProjection, MatchesDirectProjection) {
    for (const auto* pc : {&disc_disc(), &disc_torus()})
        for (int p = 0; p <= 2; ++p)
            for (int q = 0; q <= 2; ++q) EXPECT_LE(product_projection_deviation(*pc, {p, q}), 1e-10);
}

TEST(Solve, DzbarOne) {
    const auto& pc = disc_disc();
    const ProductFormVector f = pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 0})});
    const SolveResult s = solve_dbar(pc, f);
    const ProductFormVector expected = pc.tensor({mono(pc, 0, {0, 0}, {0, 1}), mono(pc, 1, {0, 0}, {0, 0})});
    EXPECT_LT((s.u - expected).norm(), 1e-10);
    EXPECT_LE(s.report.residual, 1e-10);
    EXPECT_LE(s.report.harmonic_norm, 1e-12);
}

TEST(Solve, HomotopyOnRandomForms) {
    for (const auto* pc : {&disc_disc(), &disc_torus()}) {
        std::mt19937_64 rng(8);
        for (int i = 0; i < 5; ++i) {
            const ProductFormVector g = random_form(pc->space, rng);
            EXPECT_LE(verify::product_homotopy_residual(*pc, g), 1e-10);
        }
    }
}

TEST(Canonical, NamedForms) {
    const auto& pc = disc_disc();
    const ProductFormVector f1 = pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 0})});
    EXPECT_LE(canonical_compare(pc, f1), 1e-8);
    const ProductFormVector f2 = pc.tensor({mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {1, 0})});
    EXPECT_LE(canonical_compare(pc, f2), 1e-8);
    const ProductFormVector u2 = pc.tensor({mono(pc, 0, {0, 0}, {0, 1}), mono(pc, 1, {0, 0}, {1, 0})});
    EXPECT_LT((pc.solution.apply(f2) - u2).norm(), 1e-10);
    EXPECT_LT((canonical_solution_dense(pc, f2, {0, 1}) - u2).norm(), 1e-10);
}

TEST(Canonical, RandomClosedForms) {
    const auto& pc = disc_disc();
    std::mt19937_64 rng(21);
    for (int p = 0; p <= 2; ++p)
        for (int i = 0; i < 5; ++i) {
            const ProductFormVector f = pc.dbar.apply(random_form(pc.space, rng, Bidegree{p, 0}));
            EXPECT_LE(canonical_compare(pc, f), 1e-8);
        }
}

TEST(Canonical, Preconditions) {
    const auto& pc = disc_disc();
    std::mt19937_64 rng(2);
    EXPECT_THROW(canonical_compare(pc, random_form(pc.space, rng)), PreconditionError);
    EXPECT_THROW(canonical_compare(pc, random_form(pc.space, rng, Bidegree{0, 0})), PreconditionError);
    EXPECT_THROW(canonical_compare(pc, random_form(pc.space, rng, Bidegree{0, 1})), PreconditionError);
}

TEST(Witness, NamedValue) {
    const auto& pc = disc_disc();
    const WitnessValues w = noncanonical_witness(pc, mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 1}));
    EXPECT_NEAR(w.rhs, -oracle::pi * oracle::pi, 1e-6);
    EXPECT_NEAR(w.lhs.real(), -oracle::pi * oracle::pi, 1e-6);
    EXPECT_NEAR(w.lhs.imag(), 0.0, 1e-6);
}

TEST(Witness, VanishingCases) {
    const auto& pc = disc_disc();
    const WitnessValues holo = noncanonical_witness(pc, mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {2, 0}));
    EXPECT_NEAR(std::abs(holo.lhs), 0.0, 1e-10);
    EXPECT_EQ(holo.rhs, 0.0);
    const WitnessValues harm = noncanonical_witness(pc, mono(pc, 0, {0, 0}, {1, 0}), mono(pc, 1, {0, 0}, {0, 1}));
    EXPECT_NEAR(std::abs(harm.lhs), 0.0, 1e-10);
    EXPECT_NEAR(harm.rhs, 0.0, 1e-10);
}

TEST(Witness, RequiresTwoFactors) {
    const ProductComplex pc = product({FactorSpec::disc(1), FactorSpec::disc(1), FactorSpec::torus(0)});
    EXPECT_THROW(noncanonical_witness(pc, mono(pc, 0, {0, 1}, {0, 0}), mono(pc, 1, {0, 0}, {0, 1})), PreconditionError);
}

TEST(Kunneth, Tables) {
    const std::vector<ProductComplex> pcs{
        disc_disc(), disc_torus(), product({FactorSpec::disc(4), FactorSpec::annulus(4, 1.0, 2.0)})};
    for (const auto& pc : pcs)
        for (int p = 0; p <= 2; ++p)
            for (int q = 0; q <= 2; ++q) {
                const KunnethDims k = kunneth_dimensions(pc, p, q);
                EXPECT_EQ(k.tensor_dim, k.direct_dim) << p << "," << q;
            }
    EXPECT_EQ(kunneth_dimensions(disc_torus(), 0, 1).direct_dim, 5);
    EXPECT_EQ(kunneth_dimensions(disc_torus(), 0, 0).direct_dim, 5);
    EXPECT_EQ(kunneth_dimensions(disc_disc(), 0, 1).direct_dim, 0);
    EXPECT_THROW(kunneth_dimensions(disc_disc(), 3, 0), IndexError);
}

TEST(Kronecker, LazyAgreesWithDense) {
    const auto& pc = disc_torus();
    std::mt19937_64 rng(14);
    for (const KroneckerOperator* op : {&pc.dbar, &pc.dbar_star, &pc.solution, &pc.harmonic_proj})
        for (int p = 0; p <= 2; ++p)
            for (int q = 0; q <= 2; ++q) {
                const Bidegree from{p, q}, to = from + op->shift();
                if (to.q < 0 || to.q > 2 || pc.space->dim(from) > 512 || pc.space->dim(to) > 512) continue;
                const ProductFormVector f = random_form(pc.space, rng, from);
                const Matrix d = op->dense(from);
                const Vector x = verify::detail::gather_bidegree(f, from);
                const Vector y = verify::detail::gather_bidegree(op->apply(f), to);
                EXPECT_LT((d * x - y).norm(), 1e-12 * std::max(1.0, y.norm()));
                const Matrix e = op->dense(pc.space->elements(to), pc.space->elements(from));
                EXPECT_LT((d - e).norm(), 1e-12 * std::max(1.0, d.norm()));
            }
}

TEST(Kronecker, DecomposableNorm) {
    const auto& pc = disc_torus();
    std::mt19937_64 rng(3);
    const FormVector f = random_form(pc.factors[0]->space, rng), g = random_form(pc.factors[1]->space, rng);
    EXPECT_NEAR(pc.tensor({f, g}).norm(), f.norm() * g.norm(), 1e-12 * f.norm() * g.norm());
}

TEST(ProductSuite, TwoFactorConfigurations) {
    expect_all_pass(verify::product_suite(disc_disc(), {}, 31, 5, 5, 5));
    expect_all_pass(verify::product_suite(disc_torus(), {}, 32, 5, 5, 5));
    expect_all_pass(
        verify::product_suite(product({FactorSpec::disc(3, 1.0), FactorSpec::annulus(3, 1.0, 2.0, 1.0)}), {}, 33, 5, 5, 5));
}

TEST(ProductSuite, ThreeFactors) {
    const ProductComplex pc = product({FactorSpec::disc(2), FactorSpec::disc(2, 1.0), FactorSpec::torus(1)});
    EXPECT_EQ(pc.space->dim({0, 0}), 9 * 9 * 9);
    expect_all_pass(verify::product_suite(pc, {}, 34, 5, 5, 5));
}

TEST(ProductBuild, Errors) {
    EXPECT_THROW(build_product(std::vector<FactorPtr>{factor(FactorSpec::disc(2))}), PreconditionError);
    EXPECT_THROW(product({FactorSpec::disc(4), FactorSpec::disc(4)}, 100), CapacityError);
}
