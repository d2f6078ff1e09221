// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include <prodbar/cli.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

using namespace prodbar;

namespace {

using FactorPtr = std::shared_ptr<const FactorComplex>;

struct Outcome {
    bool passed = true;
    std::string detail;
};

/// Tracks the worst measured/bound ratio of a criterion.
struct Tracker {
    bool passed = true;
    double worst_ratio = 0.0;
    std::string worst;

    void le(const std::string& what, double measured, double bound) {
        const bool ok = measured <= bound;
        passed = passed && ok;
        const double ratio = bound > 0 ? measured / bound : (measured > 0 ? INFINITY : 0.0);
        if (ratio >= worst_ratio) {
            worst_ratio = ratio;
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s: %.3e <= %.1e", what.c_str(), measured, bound);
            worst = buf;
        }
    }
    void expect(const std::string& what, bool ok) {
        if (ok) return;
        passed = false;
        worst = what;
        worst_ratio = INFINITY;
    }
    Outcome outcome() const { return {passed, worst.empty() ? "ok" : "worst " + worst}; }
};

FactorPtr factor(const FactorSpec& s) {
    static std::vector<std::pair<FactorSpec, FactorPtr>> cache;
    for (const auto& [k, v] : cache)
        if (k == s) return v;
    cache.emplace_back(s, std::make_shared<const FactorComplex>(assemble_factor_complex(s)));
    return cache.back().second;
}

ProductComplex product(const FactorSpec& a, const FactorSpec& b) { return build_product(std::vector{factor(a), factor(b)}); }

std::vector<Bidegree> all_bidegrees(int n) {
    std::vector<Bidegree> out;
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) out.push_back({p, q});
    return out;
}

// ------------------------------------------------------------------ criteria

void factor_homotopy(Tracker& t, const FactorSpec& s) {
    const FactorComplex& fc = *factor(s);
    const BlockOperator I = BlockOperator::identity(fc.space);
    const BlockOperator r = compose(fc.dbar, fc.canonical) + compose(fc.canonical, fc.dbar) - (I - fc.harmonic_proj);
    t.le(s.describe(), r.dense().norm(), 1e-10 * I.dense().norm());
}

void product_homotopy(Tracker& t, const ProductComplex& pc, const std::string& name, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const Bidegree bd : all_bidegrees(2)) {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) worst = std::max(worst, verify::product_homotopy_residual(pc, random_form(pc.space, rng, bd)));
        t.le(name + " " + bd.str(), worst, 1e-10);
    }
}

void canonical_coincidence(Tracker& t, const ProductComplex& pc, const std::string& name, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int p = 0; p <= 2; ++p) {
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const ProductFormVector f = pc.dbar.apply(random_form(pc.space, rng, Bidegree{p, 0}));
            worst = std::max(worst, canonical_compare(pc, f));
        }
        t.le(name + " (" + std::to_string(p) + ",1)", worst, 1e-8);
    }
}

Outcome criterion1() {
    Tracker t;
    for (const auto& s : {FactorSpec::disc(8), FactorSpec::disc(8, 1.0), FactorSpec::annulus(6, 1.0, 2.0),
                          FactorSpec::annulus(6, 1.0, 2.0, 1.0), FactorSpec::torus(6)})
        factor_homotopy(t, s);
    return t.outcome();
}

Outcome criterion2() {
    Tracker t;
    product_homotopy(t, product(FactorSpec::disc(4), FactorSpec::disc(4)), "disc x disc", 201);
    product_homotopy(t, product(FactorSpec::disc(4), FactorSpec::torus(4)), "disc x torus", 202);
    return t.outcome();
}

Outcome criterion3() {
    Tracker t;
    canonical_coincidence(t, product(FactorSpec::disc(4), FactorSpec::disc(4)), "disc x disc", 301);
    return t.outcome();
}

Outcome criterion4() {
    Tracker t;
    const FactorComplex& fc = *factor(FactorSpec::disc(4));
    const auto& l0 = fc.space->labels[factor_slot({0, 0})];
    const auto& l1 = fc.space->labels[factor_slot({0, 1})];
    auto raw = [](const std::vector<BasisLabel>& ls, std::vector<std::pair<BasisLabel, double>> entries) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(ls.size()));
        for (const auto& [l, c] : entries) v[std::find(ls.begin(), ls.end(), l) - ls.begin()] = c;
        return v;
    };
    const std::vector<std::tuple<std::string, Vector, Vector>> cases{
        {"K(dzbar) = zbar", raw(l1, {{{0, 0}, 1.0}}), raw(l0, {{{0, 1}, 1.0}})},
        {"K(z dzbar) = z zbar - 1/2", raw(l1, {{{1, 0}, 1.0}}), raw(l0, {{{1, 1}, 1.0}, {{0, 0}, -0.5}})},
    };
    for (const auto& [name, f, expected] : cases) {
        const Vector u = fc.to_raw(fc.canonical.apply(fc.from_raw({0, 1}, f)), {0, 0});
        const Vector ref = oracle::disc_min_norm_solution(l0, l1, f);
        t.le(name + " vs oracle", (u - ref).norm(), 1e-10);
        t.le(name + " vs closed form", (u - expected).norm(), 1e-10);
    }
    return t.outcome();
}

Outcome criterion5() {
    Tracker t;
    const std::vector<std::pair<std::string, ProductComplex>> pcs{
        {"disc x disc", product(FactorSpec::disc(4), FactorSpec::disc(4))},
        {"disc x annulus", product(FactorSpec::disc(4), FactorSpec::annulus(4, 1.0, 2.0))},
        {"disc x torus", product(FactorSpec::disc(4), FactorSpec::torus(4))}};
    for (const auto& [name, pc] : pcs)
        for (const Bidegree bd : all_bidegrees(2)) {
            const KunnethDims k = kunneth_dimensions(pc, bd.p, bd.q);
            t.expect(name + " " + bd.str() + " kunneth=" + std::to_string(k.tensor_dim) + " direct=" + std::to_string(k.direct_dim),
                     k.tensor_dim == k.direct_dim);
        }
    const KunnethDims named = kunneth_dimensions(product(FactorSpec::disc(4), FactorSpec::torus(2)), 0, 1);
    t.expect("dim H^{0,1}(disc(4) x torus(2)) = " + std::to_string(named.direct_dim),
             named.direct_dim == 5 && named.tensor_dim == 5);
    if (t.passed) t.worst = "all tables match, H^{0,1}(disc(4) x torus(2)) = 5";
    return t.outcome();
}

Outcome criterion6() {
    Tracker t;
    const ProductComplex pc = product(FactorSpec::disc(4), FactorSpec::disc(4));
    const WitnessValues w = noncanonical_witness(pc, pc.factors[0]->monomial({0, 1}, {0, 0}), pc.factors[1]->monomial({0, 0}, {0, 1}));
    const double pi2 = oracle::pi * oracle::pi;
    t.le("lhs + pi^2", std::abs(w.lhs + pi2), 1e-6);
    t.le("rhs + pi^2", std::abs(w.rhs + pi2), 1e-6);
    std::mt19937_64 rng(601);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Bidegree bf{static_cast<int>(rng() % 2), 1}, bg{static_cast<int>(rng() % 2), 0};
        const WitnessValues v = noncanonical_witness(pc, random_form(pc.factors[0]->space, rng, bf),
                                                     random_form(pc.factors[1]->space, rng, bg));
        worst = std::max(worst, std::abs(v.lhs - v.rhs) / (1.0 + std::abs(v.rhs)));
    }
    t.le("random pairs |lhs-rhs|/(1+|rhs|)", worst, 1e-8);
    return t.outcome();
}

Outcome criterion7() {
    Tracker t;
    const ProductComplex pc = product(FactorSpec::disc(4), FactorSpec::disc(4));
    for (int k : {1, 2}) {
        const InclusionReport r = inclusion_report(pc, k, 1000, 700 + k);
        t.le("violations k=" + std::to_string(k), r.violations, 0);
    }
    const ProductFormVector f = pc.tensor({pc.factors[0]->monomial({0, 0}, {0, 1}), pc.factors[1]->monomial({0, 0}, {0, 1})});
    const double n = sobolev_norm(pc, f, {1, SobolevMode::partial});
    t.le("|W~1 norm^2 - 9 pi^2/4|", std::abs(n * n - 9 * oracle::pi * oracle::pi / 4), 1e-8);
    return t.outcome();
}

Outcome criterion8() {
    Tracker t;
    for (int k : {0, 1}) {
        const SweepReport r = boundedness_sweep({FactorSpec::disc(4), FactorSpec::disc(4)}, k, {4, 6, 8}, 20, 800 + k);
        for (std::size_t i = 0; i < r.growth.size(); ++i)
            t.le("k=" + std::to_string(k) + " R(" + std::to_string(r.truncations[i + 1]) + ")/R(" +
                     std::to_string(r.truncations[i]) + ")",
                 r.growth[i], 1.25);
    }
    return t.outcome();
}

Outcome criterion9() {
    Tracker t;
    const double expected = oracle::pi * (1 - std::exp(-1.0));
    t.le("<1,1> weighted", std::abs(gram_entry(FactorSpec::disc(1, 1.0), {0, 0}, {0, 0}) - expected), 1e-10);
    t.le("<1,1> polar oracle", std::abs(oracle::monomial_inner(0, 0, 0, 0, 1.0, 0, 1) - expected), 1e-10);
    factor_homotopy(t, FactorSpec::disc(8, 1.0));
    const ProductComplex pc = product(FactorSpec::disc(4, 1.0), FactorSpec::disc(4, 1.0));
    product_homotopy(t, pc, "weighted disc x disc", 901);
    canonical_coincidence(t, pc, "weighted disc x disc", 902);
    return t.outcome();
}

Outcome criterion10() {
    Tracker t;
    const std::vector<std::pair<std::string, ProductComplex>> pcs{
        {"disc x disc", product(FactorSpec::disc(4), FactorSpec::disc(4))},
        {"disc x torus", product(FactorSpec::disc(4), FactorSpec::torus(4))},
        {"weighted disc x annulus", product(FactorSpec::disc(4, 1.0), FactorSpec::annulus(4, 1.0, 2.0))}};
    for (const auto& [name, pc] : pcs)
        for (const Bidegree bd : all_bidegrees(2)) t.le(name + " " + bd.str(), product_projection_deviation(pc, bd), 1e-10);
    return t.outcome();
}

Outcome criterion11() {
    Tracker t;
    const std::vector<std::string> args{"verify", "--config", std::string(PRODBAR_SAMPLES_DIR) + "/disc4_torus2.json",
                                        "--suite", "all", "--seed", "42"};
    std::ostringstream a, b, ea, eb;
    const int ca = cli::run(args, a, ea), cb = cli::run(args, b, eb);
    t.expect("exit codes " + std::to_string(ca) + "," + std::to_string(cb), ca == 0 && cb == 0);
    t.expect("reports differ", a.str() == b.str());
    if (t.passed) t.worst = "two reports byte-identical (" + std::to_string(a.str().size()) + " bytes), exit 0";
    return t.outcome();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"factor homotopy identity", criterion1},
        {"product homotopy identity", criterion2},
        {"canonical coincidence at (p,1)", criterion3},
        {"disc oracle solutions", criterion4},
        {"Kunneth dimension equality", criterion5},
        {"non-canonicity witness", criterion6},
        {"Sobolev inclusions", criterion7},
        {"partial Sobolev boundedness sweep", criterion8},
        {"weighted Gram and weighted identities", criterion9},
        {"product projection consistency", criterion10},
        {"verify determinism", criterion11},
    };
    int failures = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.passed ? 0 : 1;
        std::printf("criterion %2zu %s  %-40s %s (%.1fs)\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed in %.1fs\n", static_cast<int>(criteria.size()) - failures, criteria.size(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return failures == 0 ? 0 : 1;
}
