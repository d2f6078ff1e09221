#pragma once

#include "io.hpp"
#include "sobolev.hpp"

#include <chrono>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace prodbar::verify {

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    bool skipped = false;
    std::string note;
    /// Reported only; never fails.
    bool informational = false;

    std::string status() const {
        if (informational) return "info";
        return skipped ? "skip" : (passed ? "pass" : "fail");
    }
};

struct Report {
    std::string command;
    std::string config_hash;
    std::vector<Check> checks;
    std::optional<double> timing_seconds;
    /// Command specific fields, merged into the top level of the JSON report.
    io::json extra = io::json::object();

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.skipped && !c.informational && !c.passed) return false;
        return true;
    }

    /// measured <= tolerance
    Check& expect_le(std::string name, double measured, double tolerance) {
        checks.push_back({std::move(name), measured <= tolerance, measured, tolerance, false, {}});
        return checks.back();
    }
    Check& skip(std::string name, std::string why) {
        checks.push_back({std::move(name), true, 0.0, 0.0, true, std::move(why)});
        return checks.back();
    }

    Check& info(std::string name, double measured, std::string note) {
        checks.push_back({std::move(name), true, measured, 0.0, false, std::move(note), true});
        return checks.back();
    }

    void append(const Report& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }
};

inline io::json to_json(const Report& r) {
    io::json checks = io::json::array();
    for (const auto& c : r.checks) {
        io::json j{{"name", c.name}, {"status", c.status()}, {"measured", c.measured}, {"tolerance", c.tolerance}};
        if (!c.note.empty()) j["note"] = c.note;
        checks.push_back(std::move(j));
    }
    io::json j{{"format_version", io::kFormatVersion},
               {"command", r.command},
               {"config_hash", r.config_hash},
               {"checks", checks},
               {"passed", r.all_passed()}};
    for (const auto& [key, value] : r.extra.items()) j[key] = value;
    if (r.timing_seconds) j["timing_seconds"] = *r.timing_seconds;
    return j;
}

struct Tolerances {
    double identity = 1e-10;
    double canonical = 1e-8;
    double sign_coherence = 1e-12;
    double lazy_dense = 1e-12;
    double tensor_norm = 1e-12;
    double sobolev_tensor = 1e-10;
};

inline Tolerances tolerances_from(const io::RunConfig& cfg) {
    Tolerances t;
    t.identity = cfg.tolerances.identity;
    t.canonical = cfg.tolerances.canonical;
    return t;
}

namespace detail {

inline double frob(const BlockOperator& op) { return op.dense().norm(); }

/// Sample count for random checks; large spaces get proportionally fewer draws.
inline int samples_for(Eigen::Index dim, int wanted, Eigen::Index budget = 5000) {
    if (dim <= budget) return wanted;
    return std::max(5, static_cast<int>(wanted * budget / dim));
}

}  // namespace detail

// -------------------------------------------------------------- factor suite

inline Report factor_suite(const FactorComplex& fc, const std::string& prefix, const Tolerances& tol,
                           std::uint64_t seed) {
    Report r;
    const auto I = BlockOperator::identity(fc.space);
    const double id_norm = detail::frob(I);
    const double d2 = std::max(fc.dbar_norm * fc.dbar_norm, 1.0);
    std::mt19937_64 rng(seed);

    r.expect_le(prefix + "dbar_squared", detail::frob(compose(fc.dbar, fc.dbar)) / d2, tol.sign_coherence);

    double adj = 0.0;
    for (int i = 0; i < 20; ++i) {
        const FormVector u = random_form(fc.space, rng), v = random_form(fc.space, rng);
        const cplx a = fc.dbar.apply(u).inner(v), b = u.inner(fc.dbar_star.apply(v));
        adj = std::max(adj, std::abs(a - b) / (std::max(fc.dbar_norm, 1.0) * u.norm() * v.norm()));
    }
    r.expect_le(prefix + "adjoint", adj, tol.identity);

    const BlockOperator homotopy = compose(fc.dbar, fc.canonical) + compose(fc.canonical, fc.dbar) - (I - fc.harmonic_proj);
    r.expect_le(prefix + "homotopy", detail::frob(homotopy) / id_norm, tol.identity);

    const auto& P = fc.harmonic_proj;
    r.expect_le(prefix + "projection_idempotent", detail::frob(compose(P, P) - P) / id_norm, tol.identity);
    r.expect_le(prefix + "projection_selfadjoint", detail::frob(P - P.adjoint()) / id_norm, tol.identity);
    r.expect_le(prefix + "dbar_after_projection", detail::frob(compose(fc.dbar, P)) / (std::max(fc.dbar_norm, 1.0) * id_norm),
                tol.identity);
    r.expect_le(prefix + "projection_after_dbar", detail::frob(compose(P, fc.dbar)) / (std::max(fc.dbar_norm, 1.0) * id_norm),
                tol.identity);
    const double nscale = std::max(detail::frob(fc.neumann), 1.0);
    r.expect_le(prefix + "neumann_kills_harmonic",
                std::max(detail::frob(compose(fc.neumann, P)), detail::frob(compose(P, fc.neumann))) / nscale, tol.identity);
    r.expect_le(prefix + "canonical_equals_dbar_star_neumann",
                detail::frob(fc.canonical - fc.canonical_via_neumann) / std::max(detail::frob(fc.canonical), 1.0),
                tol.canonical);

    double ortho = 0.0, hodge = 0.0;
    for (int i = 0; i < 100; ++i) {
        const FormVector f = random_form(fc.space, rng), g = random_form(fc.space, rng);
        const FormVector a = fc.dbar.apply(fc.canonical.apply(f));
        const FormVector b = fc.canonical.apply(fc.dbar.apply(g));
        const FormVector c = P.apply(f), d = P.apply(g);
        const double scale = f.norm() * g.norm();
        ortho = std::max({ortho, std::abs(a.inner(b)) / scale, std::abs(a.inner(d)) / scale, std::abs(b.inner(c)) / scale});
        const HodgeParts parts = hodge_decompose(fc, f);
        FormVector rest = f;
        rest -= parts.u + parts.v + parts.h;
        const double fn2 = f.squared_norm();
        hodge = std::max({hodge, rest.norm() / f.norm(), std::abs(parts.u.inner(parts.v)) / fn2,
                          std::abs(parts.u.inner(parts.h)) / fn2, std::abs(parts.v.inner(parts.h)) / fn2});
    }
    r.expect_le(prefix + "range_orthogonality", ortho, tol.identity);
    r.expect_le(prefix + "hodge_decomposition", hodge, tol.identity);
    return r;
}

// ------------------------------------------------------------- product suite

namespace detail {

inline std::vector<Bidegree> product_bidegrees(const ProductComplex& pc) {
    std::vector<Bidegree> out;
    const int n = static_cast<int>(pc.factor_count());
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) out.push_back({p, q});
    return out;
}

inline Vector gather_bidegree(const ProductFormVector& f, Bidegree bd) {
    Eigen::Index n = 0;
    const auto secs = f.space->sectors_of(bd);
    for (auto s : secs) n += f.blocks[s].size();
    Vector out(n);
    Eigen::Index off = 0;
    for (auto s : secs) {
        out.segment(off, f.blocks[s].size()) = f.blocks[s];
        off += f.blocks[s].size();
    }
    return out;
}

}  // namespace detail

inline double product_homotopy_residual(const ProductComplex& pc, const ProductFormVector& f) {
    ProductFormVector lhs = pc.dbar.apply(pc.solution.apply(f)) + pc.solution.apply(pc.dbar.apply(f));
    lhs -= f - pc.harmonic_proj.apply(f);
    return lhs.norm() / f.norm();
}

inline Report product_suite(const ProductComplex& pc, const Tolerances& tol, std::uint64_t seed, int homotopy_samples = 50,
                            int canonical_samples = 25, int witness_pairs = 20) {
    Report r;
    std::mt19937_64 rng(seed);
    const double scale = std::max(pc.dbar_scale(), 1.0);

    for (const Bidegree bd : detail::product_bidegrees(pc)) {
        const std::string tag = "product:" + bd.str() + ":";
        double dd = 0.0, homotopy = 0.0;
        const int samples = detail::samples_for(pc.space->dim(bd), homotopy_samples);
        for (int i = 0; i < samples; ++i) {
            const ProductFormVector f = random_form(pc.space, rng, bd);
            if (f.norm() == 0.0) continue;
            dd = std::max(dd, pc.dbar.apply(pc.dbar.apply(f)).norm() / (scale * scale * f.norm()));
            homotopy = std::max(homotopy, product_homotopy_residual(pc, f));
        }
        r.expect_le(tag + "dbar_squared", dd, tol.sign_coherence).note = "samples=" + std::to_string(samples);
        r.expect_le(tag + "homotopy", homotopy, tol.identity).note = "samples=" + std::to_string(samples);
        r.expect_le(tag + "projection_is_tensor_product", product_projection_deviation(pc, bd), tol.identity);
        const KunnethDims k = kunneth_dimensions(pc, bd.p, bd.q);
        auto& c = r.expect_le(tag + "kunneth", static_cast<double>(std::abs(k.tensor_dim - k.direct_dim)), 0.0);
        c.note = "kunneth=" + std::to_string(k.tensor_dim) + " direct=" + std::to_string(k.direct_dim);
    }

    for (int p = 0; p <= static_cast<int>(pc.factor_count()); ++p) {
        double worst = 0.0;
        const int samples = detail::samples_for(pc.space->dim(Bidegree{p, 1}), canonical_samples, 1000);
        for (int i = 0; i < samples; ++i) {
            const ProductFormVector g = random_form(pc.space, rng, Bidegree{p, 0});
            const ProductFormVector f = pc.dbar.apply(g);
            if (f.norm() == 0.0) continue;
            worst = std::max(worst, canonical_compare(pc, f, tol.identity));
        }
        r.expect_le("product:(" + std::to_string(p) + ",1):canonical_coincidence", worst, tol.canonical).note =
            "samples=" + std::to_string(samples);
    }

    // Above q = 1 the product solution need not be the canonical one; only the gap is reported.
    for (int p = 0; p <= static_cast<int>(pc.factor_count()); ++p)
        for (int q = 2; q <= static_cast<int>(pc.factor_count()); ++q) {
            const Bidegree bd{p, q};
            if (pc.space->dim(bd) == 0) continue;
            double worst = 0.0;
            const int samples = detail::samples_for(pc.space->dim(bd), 5, 1000);
            for (int i = 0; i < samples; ++i) {
                const ProductFormVector f = pc.dbar.apply(random_form(pc.space, rng, Bidegree{p, q - 1}));
                if (f.norm() == 0.0) continue;
                worst = std::max(worst, (pc.solution.apply(f) - canonical_solution_dense(pc, f, bd)).norm() / f.norm());
            }
            r.info("product:" + bd.str() + ":solution_vs_canonical", worst, "samples=" + std::to_string(samples));
        }

    if (pc.factor_count() == 2) {
        double worst = 0.0;
        for (int i = 0; i < witness_pairs; ++i) {
            const Bidegree bf{static_cast<int>(rng() % 2), 1}, bg{static_cast<int>(rng() % 2), 0};
            const FormVector f = random_form(pc.factors[0]->space, rng, bf);
            const FormVector g = random_form(pc.factors[1]->space, rng, bg);
            const WitnessValues w = noncanonical_witness(pc, f, g);
            worst = std::max(worst, std::abs(w.lhs - w.rhs) / (1.0 + std::abs(w.rhs)));
        }
        r.expect_le("product:witness_identity", worst, tol.canonical);
    } else {
        r.skip("product:witness_identity", "stated for two factors");
    }

    double lazy = 0.0;
    const std::vector<std::pair<std::string, const KroneckerOperator*>> ops{
        {"dbar", &pc.dbar}, {"solution", &pc.solution}, {"projection", &pc.harmonic_proj}};
    for (const auto& [name, op] : ops)
        for (const Bidegree bd : detail::product_bidegrees(pc)) {
            const Bidegree to = bd + op->shift();
            if (pc.space->dim(bd) > 512 || pc.space->dim(to) > 512 || pc.space->dim(bd) == 0 || pc.space->dim(to) == 0)
                continue;
            const ProductFormVector f = random_form(pc.space, rng, bd);
            const Vector lazy_out = detail::gather_bidegree(op->apply(f), to);
            const Vector dense_out = op->dense(bd) * detail::gather_bidegree(f, bd);
            lazy = std::max(lazy, (lazy_out - dense_out).norm() / std::max(dense_out.norm(), f.norm()));
        }
    r.expect_le("product:lazy_vs_dense", lazy, tol.lazy_dense);

    double mult = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::vector<FormVector> fs;
        double prod = 1.0;
        for (const auto& fc : pc.factors) {
            fs.push_back(random_form(fc->space, rng));
            prod *= fs.back().norm();
        }
        mult = std::max(mult, std::abs(pc.tensor(fs).norm() - prod) / prod);
    }
    r.expect_le("product:decomposable_norm", mult, tol.tensor_norm);
    return r;
}

// ------------------------------------------------------------- sobolev suite

inline int max_sobolev_order(const std::vector<std::shared_ptr<const FactorComplex>>& fs) {
    int m = 1 << 20;
    for (const auto& f : fs)
        if (f->spec().kind != FactorKind::torus) m = std::min(m, f->spec().truncation);
    return m;
}

inline Report sobolev_suite(const std::vector<std::shared_ptr<const FactorComplex>>& fs,
                            const std::optional<ProductComplex>& pc, const Tolerances& tol, std::uint64_t seed,
                            int inclusion_samples = 200) {
    Report r;
    std::mt19937_64 rng(seed);
    const int top = max_sobolev_order(fs);

    for (std::size_t j = 0; j < fs.size(); ++j) {
        const std::string tag = "sobolev:factor[" + std::to_string(j + 1) + "]:mode_agreement";
        if (top < 1) {
            r.skip(tag, "truncation too small for k=1");
            continue;
        }
        const auto single = std::make_shared<const ProductSpace>(std::vector{fs[j]->space});
        const SobolevNormer normer({fs[j]}, 1);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const ProductFormVector f = random_form(single, rng);
            const double a = normer.squared_norm(f, {1, SobolevMode::partial});
            const double b = normer.squared_norm(f, {1, SobolevMode::full});
            worst = std::max(worst, std::abs(a - b) / b);
        }
        r.expect_le(tag, worst, 0.0);
    }
    if (!pc) return r;

    const int n = static_cast<int>(pc->factor_count());
    if (top >= n) {
        const Eigen::Index total = pc->space->dim(Bidegree{0, 0}) * (1 << (2 * n));
        const InclusionReport inc = inclusion_report(*pc, 1, detail::samples_for(total, inclusion_samples, 40000), seed);
        auto& c = r.expect_le("sobolev:inclusions_k1", inc.violations, 0.0);
        c.note = "samples=" + std::to_string(inc.samples);
    } else {
        r.skip("sobolev:inclusions_k1", "truncation too small for order N*k");
    }

    if (top >= 2) {
        const SobolevNormer normer(pc->factors, 2);
        int violations = 0;
        for (int i = 0; i < 20; ++i) {
            const ProductFormVector f = random_form(pc->space, rng);
            double prev = 0.0;
            for (int k = 0; k <= 2; ++k) {
                const double v = normer.norm(f, {k, SobolevMode::partial});
                if (v < prev * (1 - 1e-12)) ++violations;
                prev = v;
            }
        }
        r.expect_le("sobolev:monotone_in_k", violations, 0.0);
    } else {
        r.skip("sobolev:monotone_in_k", "truncation too small for k=2");
    }

    if (top >= 1) {
        const SobolevNormer normer(pc->factors, 1);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            std::vector<FormVector> parts;
            double prod = 1.0;
            for (const auto& fc : pc->factors) {
                parts.push_back(random_form(fc->space, rng));
                prod *= factor_sobolev_norm(fc, parts.back(), 1);
            }
            worst = std::max(worst, std::abs(normer.norm(pc->tensor(parts), {1, SobolevMode::partial}) - prod) / prod);
        }
        r.expect_le("sobolev:tensor_characterization", worst, tol.sobolev_tensor);
    } else {
        r.skip("sobolev:tensor_characterization", "truncation too small for k=1");
    }
    return r;
}

}  // namespace prodbar::verify
