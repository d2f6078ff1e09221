#pragma once

#include "basis.hpp"
#include "graded.hpp"
#include "linalg.hpp"

#include <memory>

namespace prodbar {

/// Finite-dimensional L^2 Dolbeault complex of one factor domain. All
/// operators act on orthonormal coordinates, so adjoints are conjugate
/// transposes. Immutable after assembly.
struct FactorComplex {
    std::shared_ptr<const ScalarBasis> basis;
    std::shared_ptr<const GradedSpace> space;
    linalg::NullCutoff policy;

    /// Per bidegree slot: raw monomial coefficients -> orthonormal (L^T) and back (L^{-T}).
    std::array<Matrix, 4> raw_to_orthonormal;
    std::array<Matrix, 4> orthonormal_to_raw;

    BlockOperator dbar;           // (0, 1)
    BlockOperator dbar_star;      // (0,-1)
    BlockOperator box;            // (0, 0)
    BlockOperator neumann;        // (0, 0), pseudoinverse of box
    BlockOperator harmonic_proj;  // (0, 0)
    BlockOperator canonical;      // (0,-1), minimal-norm right inverse of dbar
    BlockOperator canonical_via_neumann;  // (0,-1), dbar_star o neumann
    std::array<int, 4> harmonic_dims{};
    /// Largest singular value of dbar; reference scale for tolerances.
    double dbar_norm = 0.0;

    const FactorSpec& spec() const { return basis->spec(); }
    Eigen::Index dim(Bidegree bd) const { return space->dim(bd); }
    int harmonic_dim(Bidegree bd) const { return harmonic_dims[factor_slot(bd)]; }

    FormVector zero() const { return FormVector::zeros(space); }

    /// Form with the given raw monomial coefficients in one bidegree.
    FormVector from_raw(Bidegree bd, const Vector& raw) const {
        if (!is_factor_bidegree(bd)) throw IndexError("invalid factor bidegree " + bd.str());
        if (raw.size() != dim(bd)) throw IndexError("raw coefficient vector has wrong length at " + bd.str());
        FormVector f = zero();
        f.blocks[factor_slot(bd)] = raw_to_orthonormal[factor_slot(bd)] * raw;
        return f;
    }

    Vector to_raw(const FormVector& f, Bidegree bd) const {
        return orthonormal_to_raw[factor_slot(bd)] * f.blocks[factor_slot(bd)];
    }

    /// coeff * b_label dz^p dzbar^q
    FormVector monomial(Bidegree bd, BasisLabel label, cplx coeff = 1.0) const {
        const auto& labels = space->labels[factor_slot(bd)];
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw IndexError("label not present at bidegree " + bd.str());
        Vector raw = Vector::Zero(dim(bd));
        raw[it - labels.begin()] = coeff;
        return from_raw(bd, raw);
    }
};

inline FactorComplex assemble_factor_complex(const FactorSpec& spec, linalg::NullCutoff policy = {}) {
    FactorComplex fc;
    fc.policy = policy;
    auto basis = std::make_shared<const ScalarBasis>(spec);
    auto space = std::make_shared<const GradedSpace>(GradedSpace::from_basis(*basis));
    fc.basis = basis;
    fc.space = space;

    for (const Bidegree bd : kFactorBidegrees) {
        const auto& lv = basis->level_for(bd);
        const lreal c = std::sqrt(static_cast<lreal>(GradedSpace::metric_factor(bd)));
        const LRealMatrix to_on = c * lv.cholesky.transpose();
        const LRealMatrix to_raw = lv.orthonormal_map / c;
        fc.raw_to_orthonormal[factor_slot(bd)] = to_double(to_on.cast<lcplx>());
        fc.orthonormal_to_raw[factor_slot(bd)] = to_double(to_raw.cast<lcplx>());
    }

    // dbar(f) = f_zbar dzbar on functions, dbar(f dz) = -f_zbar dz ^ dzbar.
    std::array<Matrix, 2> d;
    for (int p = 0; p < 2; ++p) {
        const Bidegree from{p, 0}, to{p, 1};
        const auto& lv0 = basis->level(0);
        const auto& lv1 = basis->level(1);
        const lreal c = std::sqrt(static_cast<lreal>(GradedSpace::metric_factor(to) / GradedSpace::metric_factor(from)));
        const lreal sign = p == 0 ? 1 : -1;
        const LMatrix on = (sign * c) * (lv1.cholesky.transpose().cast<lcplx>() * basis->d_zbar() *
                                         lv0.orthonormal_map.cast<lcplx>());
        d[p] = to_double(on);
    }

    double scale = 0.0;
    for (const auto& m : d)
        if (m.size() > 0) scale = std::max(scale, Eigen::JacobiSVD<Matrix>(m).singularValues()[0]);
    fc.dbar_norm = scale;

    fc.dbar = BlockOperator(space, {0, 1});
    fc.canonical = BlockOperator(space, {0, -1});
    fc.canonical_via_neumann = BlockOperator(space, {0, -1});
    fc.harmonic_proj = BlockOperator(space, {0, 0});
    fc.box = BlockOperator(space, {0, 0});
    fc.neumann = BlockOperator(space, {0, 0});

    for (int p = 0; p < 2; ++p) {
        const Bidegree lo{p, 0}, hi{p, 1};
        const Matrix& D = d[p];
        fc.dbar.set_block(lo, D);

        const linalg::RankRevealingSvd svd(D, scale, policy, "dbar on " + lo.str() + " of " + spec.describe());
        fc.canonical.set_block(hi, svd.pseudoinverse());
        const Matrix z = svd.kernel_basis();
        const Matrix w = svd.cokernel_basis();
        fc.harmonic_proj.set_block(lo, z * z.adjoint());
        fc.harmonic_proj.set_block(hi, w * w.adjoint());

        const Matrix box_lo = D.adjoint() * D;
        const Matrix box_hi = D * D.adjoint();
        fc.box.set_block(lo, box_lo);
        fc.box.set_block(hi, box_hi);
        const linalg::PsdSplit split_lo(box_lo, scale * scale, policy, "box on " + lo.str() + " of " + spec.describe());
        const linalg::PsdSplit split_hi(box_hi, scale * scale, policy, "box on " + hi.str() + " of " + spec.describe());
        fc.neumann.set_block(lo, split_lo.pseudoinverse());
        fc.neumann.set_block(hi, split_hi.pseudoinverse());
        fc.canonical_via_neumann.set_block(hi, D.adjoint() * split_hi.pseudoinverse());

        fc.harmonic_dims[factor_slot(lo)] = static_cast<int>(split_lo.null_dim);
        fc.harmonic_dims[factor_slot(hi)] = static_cast<int>(split_hi.null_dim);
        if (split_lo.null_dim != D.cols() - svd.rank || split_hi.null_dim != D.rows() - svd.rank)
            throw SpectralGapError("singular-value and Laplacian null spaces disagree at " + lo.str() + " of " +
                                   spec.describe());
    }
    fc.dbar_star = fc.dbar.adjoint();
    return fc;
}

/// Canonical (minimal-norm) solution operator applied to f.
inline FormVector apply_canonical(const FactorComplex& fc, const FormVector& f) { return fc.canonical.apply(f); }

struct HodgeParts {
    FormVector u;  // in range(dbar*)
    FormVector v;  // in range(dbar)
    FormVector h;  // harmonic
};

/// f = K dbar f + dbar K f + P f.
inline HodgeParts hodge_decompose(const FactorComplex& fc, const FormVector& f) {
    HodgeParts parts;
    parts.u = fc.canonical.apply(fc.dbar.apply(f));
    parts.v = fc.dbar.apply(fc.canonical.apply(f));
    parts.h = fc.harmonic_proj.apply(f);
    return parts;
}

}  // namespace prodbar
