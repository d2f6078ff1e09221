#pragma once

#include "basis.hpp"
#include "errors.hpp"
#include "types.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace prodbar {

/// Bidegree-indexed coefficient spaces of forms on one factor, expressed in
/// the orthonormalized basis. Block i holds bidegree kFactorBidegrees[i].
struct GradedSpace {
    FactorKind kind = FactorKind::disc;
    std::array<std::vector<BasisLabel>, 4> labels;
    std::array<std::vector<Charge>, 4> charges;
    /// Raw Gram matrices including the pointwise form metric 2^{p+q}.
    std::array<LRealMatrix, 4> gram;

    /// Pointwise squared norm of dz^p dzbar^q: <dz,dz> = <dzbar,dzbar> = 2.
    static constexpr double metric_factor(Bidegree bd) { return static_cast<double>(1 << (bd.p + bd.q)); }

    std::size_t block_count() const { return 4; }
    Eigen::Index block_size(std::size_t i) const { return static_cast<Eigen::Index>(labels[i].size()); }
    Eigen::Index dim(Bidegree bd) const { return block_size(factor_slot(bd)); }
    Bidegree block_bidegree(std::size_t i) const { return kFactorBidegrees[i]; }

    static GradedSpace from_basis(const ScalarBasis& basis) {
        GradedSpace s;
        s.kind = basis.spec().kind;
        for (std::size_t i = 0; i < 4; ++i) {
            const Bidegree bd = kFactorBidegrees[i];
            const auto& lv = basis.level_for(bd);
            s.labels[i] = lv.labels;
            for (const auto& l : lv.labels) s.charges[i].push_back(form_charge(s.kind, l, bd));
            s.gram[i] = lv.gram * static_cast<lreal>(metric_factor(bd));
        }
        return s;
    }
};

/// Element of a graded coefficient space: one complex block per space block.
/// Coefficients are in the orthonormal basis, so the inner product is the
/// Euclidean one.
template <class Space>
struct BasicFormVector {
    std::shared_ptr<const Space> space;
    std::vector<Vector> blocks;

    BasicFormVector() = default;
    explicit BasicFormVector(std::shared_ptr<const Space> s) : space(std::move(s)) {
        blocks.resize(space->block_count());
        for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] = Vector::Zero(space->block_size(i));
    }

    static BasicFormVector zeros(std::shared_ptr<const Space> s) { return BasicFormVector(std::move(s)); }

    std::size_t block_count() const { return blocks.size(); }

    /// Complex inner product, linear in the first argument.
    cplx inner(const BasicFormVector& other) const {
        check_same(other);
        cplx acc = 0;
        for (std::size_t i = 0; i < blocks.size(); ++i) acc += other.blocks[i].dot(blocks[i]);
        return acc;
    }

    double squared_norm() const {
        double acc = 0;
        for (const auto& b : blocks) acc += b.squaredNorm();
        return acc;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    BasicFormVector& operator+=(const BasicFormVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += o.blocks[i];
        return *this;
    }
    BasicFormVector& operator-=(const BasicFormVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= o.blocks[i];
        return *this;
    }
    BasicFormVector& operator*=(cplx s) {
        for (auto& b : blocks) b *= s;
        return *this;
    }
    friend BasicFormVector operator+(BasicFormVector a, const BasicFormVector& b) { return a += b; }
    friend BasicFormVector operator-(BasicFormVector a, const BasicFormVector& b) { return a -= b; }
    friend BasicFormVector operator*(cplx s, BasicFormVector a) { return a *= s; }

    /// Copy keeping only the blocks whose total bidegree equals bd.
    BasicFormVector restricted(Bidegree bd) const {
        BasicFormVector out = *this;
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (space->block_bidegree(i) != bd) out.blocks[i].setZero();
        return out;
    }

    void check_same(const BasicFormVector& o) const {
        if (space != o.space && (space == nullptr || o.space == nullptr || blocks.size() != o.blocks.size()))
            throw PreconditionError("form vectors live in different spaces");
    }
};

using FormVector = BasicFormVector<GradedSpace>;

/// Bidegree-shifting linear map on a factor's forms, one dense block per
/// domain bidegree whose shifted bidegree is valid.
struct BlockOperator {
    std::shared_ptr<const GradedSpace> space;
    Bidegree shift{0, 0};
    std::array<std::optional<Matrix>, 4> blocks;

    BlockOperator() = default;
    BlockOperator(std::shared_ptr<const GradedSpace> s, Bidegree sh) : space(std::move(s)), shift(sh) {}

    static BlockOperator identity(std::shared_ptr<const GradedSpace> s) {
        BlockOperator op(s, {0, 0});
        for (std::size_t i = 0; i < 4; ++i) op.blocks[i] = Matrix::Identity(s->block_size(i), s->block_size(i));
        return op;
    }

    /// Multiplication by (-1)^{p+q}.
    static BlockOperator sign(std::shared_ptr<const GradedSpace> s) {
        BlockOperator op = identity(s);
        for (std::size_t i = 0; i < 4; ++i) *op.blocks[i] *= static_cast<double>(kFactorBidegrees[i].sign());
        return op;
    }

    std::optional<Bidegree> target(Bidegree from) const {
        const Bidegree to = from + shift;
        if (!is_factor_bidegree(to)) return std::nullopt;
        return to;
    }

    /// Block acting on bidegree `from`, or nullptr when the map vanishes there.
    const Matrix* block(Bidegree from) const {
        const auto& b = blocks[factor_slot(from)];
        return b ? &*b : nullptr;
    }

    void set_block(Bidegree from, Matrix m) {
        const auto to = target(from);
        if (!to) throw IndexError("operator block lands outside the valid bidegrees");
        if (m.rows() != space->dim(*to) || m.cols() != space->dim(from))
            throw IndexError("operator block has inconsistent dimensions at " + from.str());
        blocks[factor_slot(from)] = std::move(m);
    }

    FormVector apply(const FormVector& f) const {
        FormVector out = FormVector::zeros(space);
        for (const Bidegree from : kFactorBidegrees) {
            const Matrix* m = block(from);
            if (!m) continue;
            out.blocks[factor_slot(*target(from))] += *m * f.blocks[factor_slot(from)];
        }
        return out;
    }

    BlockOperator adjoint() const {
        BlockOperator out(space, {-shift.p, -shift.q});
        for (const Bidegree from : kFactorBidegrees)
            if (const Matrix* m = block(from)) out.blocks[factor_slot(*target(from))] = m->adjoint();
        return out;
    }

    /// Dense matrix on all coefficients, bidegree blocks in storage order.
    Matrix dense() const {
        std::array<Eigen::Index, 5> off{};
        for (std::size_t i = 0; i < 4; ++i) off[i + 1] = off[i] + space->block_size(i);
        Matrix out = Matrix::Zero(off[4], off[4]);
        for (const Bidegree from : kFactorBidegrees)
            if (const Matrix* m = block(from)) {
                const auto to = factor_slot(*target(from));
                out.block(off[to], off[factor_slot(from)], m->rows(), m->cols()) = *m;
            }
        return out;
    }
};

/// a o b
inline BlockOperator compose(const BlockOperator& a, const BlockOperator& b) {
    BlockOperator out(a.space, b.shift + a.shift);
    for (const Bidegree from : kFactorBidegrees) {
        const Matrix* mb = b.block(from);
        if (!mb) continue;
        const Bidegree mid = *b.target(from);
        const Matrix* ma = a.block(mid);
        if (!ma) continue;
        out.blocks[factor_slot(from)] = (*ma) * (*mb);
    }
    return out;
}

inline BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
    if (a.shift != b.shift) throw PreconditionError("cannot add operators with different bidegree shifts");
    BlockOperator out = a;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!b.blocks[i]) continue;
        if (out.blocks[i])
            *out.blocks[i] += *b.blocks[i];
        else
            out.blocks[i] = b.blocks[i];
    }
    return out;
}

inline BlockOperator operator*(cplx s, BlockOperator a) {
    for (auto& b : a.blocks)
        if (b) *b *= s;
    return a;
}

inline BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) { return a + cplx(-1.0) * b; }

}  // namespace prodbar
