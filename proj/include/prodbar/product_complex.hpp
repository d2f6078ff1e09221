#pragma once

#include "factor_complex.hpp"
#include "kronecker.hpp"

#include <map>
#include <memory>
#include <sstream>
#include <vector>

namespace prodbar {

/// Dolbeault complex of a product domain, built lazily from factor complexes.
///
/// With sigma_j = (-1)^{p+q} on factor j and tau_j = sigma_1 (x) ... (x) sigma_j:
///   dbar   = sum_j  tau_{j-1} (x) dbar_j (x) I
///   S      = sum_j  tau_j Q_j (x) K_{j+1} (x) I,   Q_j = P_1 (x) ... (x) P_j
///   P_prod = P_1 (x) ... (x) P_N
struct ProductComplex {
    static constexpr Eigen::Index kDefaultDenseCap = 100000;

    std::vector<std::shared_ptr<const FactorComplex>> factors;
    std::shared_ptr<const ProductSpace> space;
    KroneckerOperator dbar;
    KroneckerOperator dbar_star;
    KroneckerOperator solution;  // S
    KroneckerOperator harmonic_proj;  // P_prod
    KroneckerOperator to_raw;
    KroneckerOperator from_raw;
    /// Kunneth dimensions of harmonic forms, keyed by total bidegree.
    std::map<Bidegree, long> harmonic_dims;
    Eigen::Index dense_cap = kDefaultDenseCap;
    linalg::NullCutoff policy;

    std::size_t factor_count() const { return factors.size(); }
    ProductFormVector zero() const { return ProductFormVector(space); }

    /// Upper bound for the operator norm of dbar on the product.
    double dbar_scale() const {
        double s = 0.0;
        for (const auto& f : factors) s += f->dbar_norm;
        return s;
    }

    KroneckerOperator box() const { return compose(dbar, dbar_star) + compose(dbar_star, dbar); }

    ProductFormVector tensor(const std::vector<FormVector>& fs) const { return tensor_product(space, fs); }
};

namespace detail {

inline std::shared_ptr<const BlockOperator> share(const BlockOperator& op) {
    return std::make_shared<const BlockOperator>(op);
}

/// dbar on U_{j+1} = dbar on U_j (x) I + tau_j (x) dbar_{j+1}, unrolled over
/// the factors and padded with identities to the full product.
inline std::vector<KroneckerTerm> leibniz_terms(const std::vector<std::shared_ptr<const FactorComplex>>& fs) {
    const std::size_t n = fs.size();
    std::vector<KroneckerTerm> terms{{1.0, {FactorAction::of(share(fs[0]->dbar))}}};
    for (std::size_t j = 1; j < n; ++j) {
        for (auto& t : terms) t.factors.push_back(FactorAction::identity());
        KroneckerTerm next{1.0, {}};
        for (std::size_t i = 0; i < j; ++i) next.factors.push_back(FactorAction::sigma());
        next.factors.push_back(FactorAction::of(share(fs[j]->dbar)));
        terms.push_back(std::move(next));
    }
    return terms;
}

inline std::vector<KroneckerTerm> solution_terms(const std::vector<std::shared_ptr<const FactorComplex>>& fs) {
    const std::size_t n = fs.size();
    std::vector<KroneckerTerm> terms;
    for (std::size_t j = 0; j < n; ++j) {
        KroneckerTerm t{1.0, {}};
        for (std::size_t i = 0; i < j; ++i) t.factors.push_back(FactorAction::of(share(fs[i]->harmonic_proj), true));
        t.factors.push_back(FactorAction::of(share(fs[j]->canonical)));
        for (std::size_t i = j + 1; i < n; ++i) t.factors.push_back(FactorAction::identity());
        terms.push_back(std::move(t));
    }
    return terms;
}

inline BlockOperator diagonal_blocks(std::shared_ptr<const GradedSpace> space, const std::array<Matrix, 4>& m) {
    BlockOperator op(space, {0, 0});
    for (const Bidegree b : kFactorBidegrees) op.set_block(b, m[factor_slot(b)]);
    return op;
}

}  // namespace detail

inline ProductComplex build_product(std::vector<std::shared_ptr<const FactorComplex>> factors,
                                    Eigen::Index dense_cap = ProductComplex::kDefaultDenseCap) {
    if (factors.size() < 2) throw PreconditionError("a product needs at least two factors");
    for (const auto& f : factors)
        if (!f) throw PreconditionError("factor complex is missing");
    ProductComplex pc;
    pc.factors = std::move(factors);
    pc.dense_cap = dense_cap;
    pc.policy = pc.factors.front()->policy;
    std::vector<std::shared_ptr<const GradedSpace>> spaces;
    for (const auto& f : pc.factors) spaces.push_back(f->space);
    pc.space = std::make_shared<const ProductSpace>(spaces);

    const int n = static_cast<int>(pc.factors.size());
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) {
            const Eigen::Index d = pc.space->dim({p, q});
            if (d > dense_cap) {
                std::ostringstream os;
                os << "product block " << Bidegree{p, q}.str() << " has dimension " << d << " > cap " << dense_cap;
                throw CapacityError(os.str());
            }
        }

    pc.dbar = KroneckerOperator(pc.space, detail::leibniz_terms(pc.factors));
    pc.dbar_star = pc.dbar.adjoint();
    pc.solution = KroneckerOperator(pc.space, detail::solution_terms(pc.factors));

    KroneckerTerm proj{1.0, {}}, raw{1.0, {}}, on{1.0, {}};
    for (const auto& f : pc.factors) {
        proj.factors.push_back(FactorAction::of(detail::share(f->harmonic_proj)));
        raw.factors.push_back(FactorAction::of(detail::share(detail::diagonal_blocks(f->space, f->orthonormal_to_raw))));
        on.factors.push_back(FactorAction::of(detail::share(detail::diagonal_blocks(f->space, f->raw_to_orthonormal))));
    }
    pc.harmonic_proj = KroneckerOperator(pc.space, {proj});
    pc.to_raw = KroneckerOperator(pc.space, {raw});
    pc.from_raw = KroneckerOperator(pc.space, {on});

    // Kunneth: convolution of the factor tables.
    std::map<Bidegree, long> dims{{{0, 0}, 1}};
    for (const auto& f : pc.factors) {
        std::map<Bidegree, long> next;
        for (const auto& [b, d] : dims)
            for (const Bidegree fb : kFactorBidegrees) next[b + fb] += d * f->harmonic_dim(fb);
        dims = std::move(next);
    }
    pc.harmonic_dims = std::move(dims);
    return pc;
}

inline ProductComplex build_product(const std::vector<FactorComplex>& factors,
                                    Eigen::Index dense_cap = ProductComplex::kDefaultDenseCap) {
    std::vector<std::shared_ptr<const FactorComplex>> fs;
    for (const auto& f : factors) fs.push_back(std::make_shared<const FactorComplex>(f));
    return build_product(std::move(fs), dense_cap);
}

struct SolveReport {
    /// ||dbar u - (I - P_prod) f||
    double residual = 0.0;
    /// ||P_prod f||
    double harmonic_norm = 0.0;
    /// ||dbar f||
    double closedness_defect = 0.0;
    double rhs_norm = 0.0;
};

struct SolveResult {
    ProductFormVector u;
    SolveReport report;
};

inline SolveResult solve_dbar(const ProductComplex& pc, const ProductFormVector& f) {
    SolveResult r;
    r.u = pc.solution.apply(f);
    const ProductFormVector pf = pc.harmonic_proj.apply(f);
    ProductFormVector defect = pc.dbar.apply(r.u);
    defect -= f - pf;
    r.report.residual = defect.norm();
    r.report.harmonic_norm = pf.norm();
    r.report.closedness_defect = pc.dbar.apply(f).norm();
    r.report.rhs_norm = f.norm();
    return r;
}

/// Product basis elements grouped by conserved charge. dbar, its adjoint and
/// all harmonic projections are block diagonal with respect to this grouping.
using ChargeKey = std::vector<int>;
using ChargeGroups = std::map<ChargeKey, std::map<Bidegree, std::vector<ElementRef>>>;

inline ChargeGroups charge_groups(const ProductSpace& space, const std::vector<Bidegree>& bidegrees) {
    ChargeGroups groups;
    for (const auto& bd : bidegrees)
        for (const auto& e : space.elements(bd)) groups[space.charge(e)][bd].push_back(e);
    return groups;
}

namespace detail {

inline bool valid_product_bidegree(const ProductComplex& pc, Bidegree bd) {
    const int n = static_cast<int>(pc.factor_count());
    return bd.p >= 0 && bd.q >= 0 && bd.p <= n && bd.q <= n;
}

inline Vector gather(const ProductFormVector& f, const std::vector<ElementRef>& refs) {
    Vector out(static_cast<Eigen::Index>(refs.size()));
    for (std::size_t i = 0; i < refs.size(); ++i) out[static_cast<Eigen::Index>(i)] = f.blocks[refs[i].sector][refs[i].local];
    return out;
}

inline void scatter(ProductFormVector& f, const std::vector<ElementRef>& refs, const Vector& v) {
    for (std::size_t i = 0; i < refs.size(); ++i) f.blocks[refs[i].sector][refs[i].local] = v[static_cast<Eigen::Index>(i)];
}

inline const std::vector<ElementRef>& group_at(const std::map<Bidegree, std::vector<ElementRef>>& g, Bidegree bd) {
    static const std::vector<ElementRef> empty;
    const auto it = g.find(bd);
    return it == g.end() ? empty : it->second;
}

inline void check_dense_cap(const ProductComplex& pc, Bidegree bd) {
    const Eigen::Index d = pc.space->dim(bd);
    if (d > pc.dense_cap) {
        std::ostringstream os;
        os << "block " << bd.str() << " has dimension " << d << " > dense cap " << pc.dense_cap;
        throw CapacityError(os.str());
    }
}

/// dbar dbar* + dbar* dbar on one charge block of bidegree bd.
inline Matrix materialized_box(const ProductComplex& pc, const std::map<Bidegree, std::vector<ElementRef>>& g,
                               Bidegree bd) {
    const auto& mid = group_at(g, bd);
    const auto n = static_cast<Eigen::Index>(mid.size());
    Matrix box = Matrix::Zero(n, n);
    if (const auto& lower = group_at(g, {bd.p, bd.q - 1}); !lower.empty()) {
        const Matrix a = pc.dbar.dense(mid, lower);
        box += a * a.adjoint();
    }
    if (const auto& upper = group_at(g, {bd.p, bd.q + 1}); !upper.empty()) {
        const Matrix b = pc.dbar.dense(upper, mid);
        box += b.adjoint() * b;
    }
    return box;
}

}  // namespace detail

/// True canonical solution on the product: minimal-norm solution of dbar u = f
/// by pseudoinversion of the materialized product dbar, one charge block at a
/// time. f must be homogeneous of bidegree bd.
inline ProductFormVector canonical_solution_dense(const ProductComplex& pc, const ProductFormVector& f, Bidegree bd) {
    ProductFormVector u = pc.zero();
    if (bd.q == 0) return u;
    const Bidegree lo{bd.p, bd.q - 1};
    detail::check_dense_cap(pc, bd);
    const auto groups = charge_groups(*pc.space, {lo, bd});
    for (const auto& [key, g] : groups) {
        const auto& rows = detail::group_at(g, bd);
        const auto& cols = detail::group_at(g, lo);
        if (rows.empty() || cols.empty()) continue;
        const Matrix a = pc.dbar.dense(rows, cols);
        const linalg::RankRevealingSvd svd(a, pc.dbar_scale(), pc.policy, "product dbar on " + lo.str());
        detail::scatter(u, cols, svd.pseudoinverse() * detail::gather(f, rows));
    }
    return u;
}

/// ||S f - K_prod f|| / ||f|| for a dbar-closed (p,1)-form orthogonal to the
/// harmonic forms.
inline double canonical_compare(const ProductComplex& pc, const ProductFormVector& f, double tol = 1e-10) {
    const double fn = f.norm();
    if (fn == 0.0) return 0.0;
    std::optional<Bidegree> bd;
    for (std::size_t s = 0; s < f.blocks.size(); ++s) {
        if (f.blocks[s].norm() == 0.0) continue;
        const Bidegree b = pc.space->block_bidegree(s);
        if (bd && *bd != b) throw PreconditionError("form is not homogeneous");
        bd = b;
    }
    if (bd->q != 1) throw PreconditionError("form must have bidegree (p,1), got " + bd->str());
    const double closed = pc.dbar.apply(f).norm();
    if (closed > tol * pc.dbar_scale() * fn) {
        std::ostringstream os;
        os << "form is not dbar-closed: ||dbar f|| = " << closed;
        throw PreconditionError(os.str());
    }
    const double harm = pc.harmonic_proj.apply(f).norm();
    if (harm > tol * fn) {
        std::ostringstream os;
        os << "form is not orthogonal to the harmonic forms: ||P f|| = " << harm;
        throw PreconditionError(os.str());
    }
    ProductFormVector diff = pc.solution.apply(f);
    diff -= canonical_solution_dense(pc, f, *bd);
    return diff.norm() / fn;
}

struct WitnessValues {
    cplx lhs;
    double rhs = 0.0;
};

/// (dbar S (f x g), S dbar (f x g)) against -||K_1 f||^2 ||dbar_2 g||^2.
inline WitnessValues noncanonical_witness(const ProductComplex& pc, const FormVector& f, const FormVector& g) {
    if (pc.factor_count() != 2) throw PreconditionError("the witness identity is stated for two factors");
    const ProductFormVector fg = pc.tensor({f, g});
    const ProductFormVector a = pc.dbar.apply(pc.solution.apply(fg));
    const ProductFormVector b = pc.solution.apply(pc.dbar.apply(fg));
    WitnessValues w;
    w.lhs = a.inner(b);
    w.rhs = -pc.factors[0]->canonical.apply(f).squared_norm() * pc.factors[1]->dbar.apply(g).squared_norm();
    return w;
}

struct KunnethDims {
    long tensor_dim = 0;
    long direct_dim = 0;
};

/// Harmonic dimension of the product at (p,q) two ways: convolution of the
/// factor tables, and the null space of the product Laplacian
/// dbar dbar* + dbar* dbar materialized per charge block.
inline KunnethDims kunneth_dimensions(const ProductComplex& pc, int p, int q) {
    const Bidegree bd{p, q};
    if (!detail::valid_product_bidegree(pc, bd)) throw IndexError("invalid product bidegree " + bd.str());
    detail::check_dense_cap(pc, bd);
    KunnethDims out;
    const auto it = pc.harmonic_dims.find(bd);
    out.tensor_dim = it == pc.harmonic_dims.end() ? 0 : it->second;
    const Bidegree lo{p, q - 1}, hi{p, q + 1};
    const auto groups = charge_groups(*pc.space, {lo, bd, hi});
    const double scale = pc.dbar_scale() * pc.dbar_scale();
    for (const auto& [key, g] : groups) {
        const auto& mid = detail::group_at(g, bd);
        if (mid.empty()) continue;
        const Matrix box = detail::materialized_box(pc, g, bd);
        const linalg::PsdSplit split(box, scale, pc.policy, "product Laplacian on " + bd.str());
        out.direct_dim += split.null_dim;
    }
    return out;
}

/// Largest entrywise deviation between P_1 (x) ... (x) P_N and the projection
/// onto the null space of the materialized product Laplacian on (p,q).
inline double product_projection_deviation(const ProductComplex& pc, Bidegree bd) {
    detail::check_dense_cap(pc, bd);
    const Bidegree lo{bd.p, bd.q - 1}, hi{bd.p, bd.q + 1};
    const auto groups = charge_groups(*pc.space, {lo, bd, hi});
    const double scale = pc.dbar_scale() * pc.dbar_scale();
    double worst = 0.0;
    for (const auto& [key, g] : groups) {
        const auto& mid = detail::group_at(g, bd);
        if (mid.empty()) continue;
        const Matrix box = detail::materialized_box(pc, g, bd);
        const linalg::PsdSplit split(box, scale, pc.policy, "product Laplacian on " + bd.str());
        const Matrix tensor = pc.harmonic_proj.dense(mid, mid);
        worst = std::max(worst, (split.null_projector() - tensor).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace prodbar
