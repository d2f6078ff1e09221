#pragma once

#include "graded.hpp"

#include <map>
#include <memory>
#include <numeric>
#include <vector>

namespace prodbar {

/// One block of the product graded space: a choice of factor bidegree per
/// factor. Coefficients are stored row-major with factor 1 outermost.
struct Sector {
    std::vector<Bidegree> parts;
    Bidegree total;
    std::vector<Eigen::Index> dims;
    Eigen::Index size = 0;
};

/// Global reference to a product basis element.
struct ElementRef {
    std::size_t sector = 0;
    Eigen::Index local = 0;
};

/// Graded space of forms on a product of factors, spanned by ordered tensor
/// products (wedges in factor order) of factor orthonormal basis forms.
class ProductSpace {
public:
    explicit ProductSpace(std::vector<std::shared_ptr<const GradedSpace>> factors) : factors_(std::move(factors)) {
        const std::size_t n = factors_.size();
        if (n == 0) throw PreconditionError("product space needs at least one factor");
        std::size_t combos = 1;
        for (std::size_t j = 0; j < n; ++j) combos *= 4;
        for (std::size_t code = 0; code < combos; ++code) {
            Sector s;
            std::size_t c = code;
            std::vector<std::size_t> slots(n);
            for (std::size_t j = n; j-- > 0;) {
                slots[j] = c % 4;
                c /= 4;
            }
            s.size = 1;
            for (std::size_t j = 0; j < n; ++j) {
                const Bidegree b = kFactorBidegrees[slots[j]];
                s.parts.push_back(b);
                s.total = s.total + b;
                s.dims.push_back(factors_[j]->block_size(slots[j]));
                s.size *= s.dims.back();
            }
            sectors_.push_back(std::move(s));
        }
        // Stable order: total bidegree first, then factor parts lexicographically.
        std::stable_sort(sectors_.begin(), sectors_.end(),
                         [](const Sector& a, const Sector& b) { return a.total < b.total; });
        for (std::size_t i = 0; i < sectors_.size(); ++i) index_[encode(sectors_[i].parts)] = i;
    }

    std::size_t factor_count() const { return factors_.size(); }
    const GradedSpace& factor(std::size_t j) const { return *factors_[j]; }
    const std::vector<std::shared_ptr<const GradedSpace>>& factors() const { return factors_; }

    std::size_t block_count() const { return sectors_.size(); }
    Eigen::Index block_size(std::size_t i) const { return sectors_[i].size; }
    Bidegree block_bidegree(std::size_t i) const { return sectors_[i].total; }
    const Sector& sector(std::size_t i) const { return sectors_[i]; }
    const std::vector<Sector>& sectors() const { return sectors_; }

    /// Sector index for the given parts, if any.
    std::optional<std::size_t> find(const std::vector<Bidegree>& parts) const {
        const auto it = index_.find(encode(parts));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    int max_degree() const { return static_cast<int>(factors_.size()); }

    /// Sectors of a total bidegree, in storage order.
    std::vector<std::size_t> sectors_of(Bidegree total) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < sectors_.size(); ++i)
            if (sectors_[i].total == total) out.push_back(i);
        return out;
    }

    Eigen::Index dim(Bidegree total) const {
        Eigen::Index d = 0;
        for (const auto& s : sectors_)
            if (s.total == total) d += s.size;
        return d;
    }

    /// Per-factor basis indices of an element inside its sector.
    std::vector<Eigen::Index> multi_index(const ElementRef& e) const {
        const auto& s = sectors_[e.sector];
        std::vector<Eigen::Index> idx(s.dims.size());
        Eigen::Index r = e.local;
        for (std::size_t j = s.dims.size(); j-- > 0;) {
            idx[j] = r % s.dims[j];
            r /= s.dims[j];
        }
        return idx;
    }

    /// Concatenated factor charges of an element.
    std::vector<int> charge(const ElementRef& e) const {
        const auto idx = multi_index(e);
        const auto& s = sectors_[e.sector];
        std::vector<int> key;
        key.reserve(2 * idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const Charge c = factors_[j]->charges[factor_slot(s.parts[j])][idx[j]];
            key.push_back(c[0]);
            key.push_back(c[1]);
        }
        return key;
    }

    std::vector<ElementRef> elements(Bidegree total) const {
        std::vector<ElementRef> out;
        for (const auto i : sectors_of(total))
            for (Eigen::Index k = 0; k < sectors_[i].size; ++k) out.push_back({i, k});
        return out;
    }

private:
    static std::size_t encode(const std::vector<Bidegree>& parts) {
        std::size_t code = 0;
        for (const auto& b : parts) code = code * 4 + factor_slot(b);
        return code;
    }

    std::vector<std::shared_ptr<const GradedSpace>> factors_;
    std::vector<Sector> sectors_;
    std::map<std::size_t, std::size_t> index_;
};

using ProductFormVector = BasicFormVector<ProductSpace>;

namespace detail {

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Applies `a` along mode `mode` of a row-major tensor with the given dims.
inline Vector mode_product(const Matrix& a, const Vector& in, std::vector<Eigen::Index>& dims, std::size_t mode) {
    Eigen::Index pre = 1, post = 1;
    for (std::size_t j = 0; j < mode; ++j) pre *= dims[j];
    for (std::size_t j = mode + 1; j < dims.size(); ++j) post *= dims[j];
    const Eigen::Index n_in = dims[mode], n_out = a.rows();
    Vector out(pre * n_out * post);
    using Slab = Eigen::Map<RowMajorMatrix>;
    using ConstSlab = Eigen::Map<const RowMajorMatrix>;
    for (Eigen::Index i = 0; i < pre; ++i) {
        ConstSlab src(in.data() + i * n_in * post, n_in, post);
        Slab dst(out.data() + i * n_out * post, n_out, post);
        dst.noalias() = a * src;
    }
    dims[mode] = n_out;
    return out;
}

}  // namespace detail

/// Tensor product f_1 (x) ... (x) f_N of factor forms.
inline ProductFormVector tensor_product(std::shared_ptr<const ProductSpace> space, const std::vector<FormVector>& fs) {
    if (fs.size() != space->factor_count()) throw PreconditionError("tensor product needs one form per factor");
    ProductFormVector out(space);
    for (std::size_t s = 0; s < space->block_count(); ++s) {
        const auto& sec = space->sector(s);
        Vector acc = fs[0].blocks[factor_slot(sec.parts[0])];
        for (std::size_t j = 1; j < fs.size(); ++j) acc = detail::kron(acc, fs[j].blocks[factor_slot(sec.parts[j])]);
        out.blocks[s] = acc;
    }
    return out;
}

/// Action of one term on one factor: op (identity when null), preceded by
/// sigma on the input bidegree and/or followed by sigma on the output.
struct FactorAction {
    std::shared_ptr<const BlockOperator> op;
    bool sign_in = false;
    bool sign_out = false;

    static FactorAction identity() { return {}; }
    static FactorAction sigma() { return {nullptr, false, true}; }
    static FactorAction of(std::shared_ptr<const BlockOperator> o, bool sign_after = false) {
        return {std::move(o), false, sign_after};
    }

    Bidegree shift() const { return op ? op->shift : Bidegree{0, 0}; }

    FactorAction adjoint() const {
        return {op ? std::make_shared<const BlockOperator>(op->adjoint()) : nullptr, sign_out, sign_in};
    }
};

/// coefficient * (A_1 (x) ... (x) A_N), the unsigned operator tensor product.
struct KroneckerTerm {
    cplx coefficient = 1.0;
    std::vector<FactorAction> factors;
};

/// Sum of operator tensor products applied matrix-free to product forms.
class KroneckerOperator {
public:
    KroneckerOperator() = default;
    KroneckerOperator(std::shared_ptr<const ProductSpace> space, std::vector<KroneckerTerm> terms)
        : space_(std::move(space)), terms_(std::move(terms)) {
        for (const auto& t : terms_)
            if (t.factors.size() != space_->factor_count())
                throw PreconditionError("Kronecker term has the wrong number of factors");
        if (!terms_.empty()) {
            shift_ = total_shift(terms_.front());
            for (const auto& t : terms_)
                if (total_shift(t) != shift_)
                    throw PreconditionError("Kronecker terms have inconsistent total bidegree shifts");
        }
    }

    const std::shared_ptr<const ProductSpace>& space() const { return space_; }
    const std::vector<KroneckerTerm>& terms() const { return terms_; }
    Bidegree shift() const { return shift_; }

    ProductFormVector apply(const ProductFormVector& f) const {
        ProductFormVector out(space_);
        std::vector<Bidegree> target;
        for (const auto& term : terms_) {
            for (std::size_t s = 0; s < space_->block_count(); ++s) {
                const Vector& in = f.blocks[s];
                if (in.size() == 0) continue;
                double sign = 1.0;
                const auto dst = route(term, s, target, sign);
                if (!dst) continue;
                std::vector<Eigen::Index> dims = space_->sector(s).dims;
                Vector cur = in;
                for (std::size_t j = 0; j < term.factors.size(); ++j) {
                    const auto& fa = term.factors[j];
                    if (!fa.op) continue;
                    cur = detail::mode_product(*fa.op->block(space_->sector(s).parts[j]), cur, dims, j);
                }
                out.blocks[*dst] += (term.coefficient * sign) * cur;
            }
        }
        return out;
    }

    KroneckerOperator adjoint() const {
        std::vector<KroneckerTerm> terms;
        for (const auto& t : terms_) {
            KroneckerTerm a{std::conj(t.coefficient), {}};
            for (const auto& fa : t.factors) a.factors.push_back(fa.adjoint());
            terms.push_back(std::move(a));
        }
        return KroneckerOperator(space_, std::move(terms));
    }

    /// Dense matrix from total bidegree `from` to `from + shift()`, assembled
    /// from explicit Kronecker products of the factor blocks.
    Matrix dense(Bidegree from) const {
        const auto dom = space_->sectors_of(from);
        const auto cod = space_->sectors_of(from + shift_);
        std::map<std::size_t, Eigen::Index> row_off, col_off;
        Eigen::Index rows = 0, cols = 0;
        for (auto s : cod) row_off[s] = rows, rows += space_->block_size(s);
        for (auto s : dom) col_off[s] = cols, cols += space_->block_size(s);
        Matrix out = Matrix::Zero(rows, cols);
        std::vector<Bidegree> target;
        for (const auto& term : terms_) {
            for (auto s : dom) {
                double sign = 1.0;
                const auto dst = route(term, s, target, sign);
                if (!dst) continue;
                const auto& sec = space_->sector(s);
                Matrix k = Matrix::Identity(1, 1);
                for (std::size_t j = 0; j < term.factors.size(); ++j) {
                    const auto& fa = term.factors[j];
                    const Matrix a = fa.op ? *fa.op->block(sec.parts[j]) : Matrix::Identity(sec.dims[j], sec.dims[j]);
                    k = detail::kron(k, a);
                }
                out.block(row_off[*dst], col_off[s], k.rows(), k.cols()) += (term.coefficient * sign) * k;
            }
        }
        return out;
    }

    /// Dense sub-matrix on selected codomain rows and domain columns, computed
    /// entrywise as products of factor entries.
    Matrix dense(const std::vector<ElementRef>& rows, const std::vector<ElementRef>& cols) const {
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::vector<Eigen::Index>> row_idx, col_idx;
        for (const auto& r : rows) row_idx.push_back(space_->multi_index(r));
        for (const auto& c : cols) col_idx.push_back(space_->multi_index(c));
        std::vector<Bidegree> target;
        for (const auto& term : terms_) {
            std::map<std::size_t, std::pair<std::optional<std::size_t>, double>> routes;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const std::size_t s = cols[c].sector;
                auto it = routes.find(s);
                if (it == routes.end()) {
                    double sign = 1.0;
                    const auto dst = route(term, s, target, sign);
                    it = routes.emplace(s, std::make_pair(dst, sign)).first;
                }
                const auto& [dst, sign] = it->second;
                if (!dst) continue;
                const auto& sec = space_->sector(s);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    if (rows[r].sector != *dst) continue;
                    cplx v = term.coefficient * sign;
                    for (std::size_t j = 0; j < term.factors.size() && v != cplx(0); ++j) {
                        const auto& fa = term.factors[j];
                        if (fa.op)
                            v *= (*fa.op->block(sec.parts[j]))(row_idx[r][j], col_idx[c][j]);
                        else if (row_idx[r][j] != col_idx[c][j])
                            v = 0;
                    }
                    out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v;
                }
            }
        }
        return out;
    }

    friend KroneckerOperator operator+(const KroneckerOperator& a, const KroneckerOperator& b) {
        auto terms = a.terms_;
        terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
        return KroneckerOperator(a.space_ ? a.space_ : b.space_, std::move(terms));
    }
    friend KroneckerOperator operator*(cplx s, KroneckerOperator a) {
        for (auto& t : a.terms_) t.coefficient *= s;
        return a;
    }

private:
    static Bidegree total_shift(const KroneckerTerm& t) {
        Bidegree b;
        for (const auto& fa : t.factors) b = b + fa.shift();
        return b;
    }

    /// Destination sector of `term` applied to sector s, and its sign factor.
    std::optional<std::size_t> route(const KroneckerTerm& term, std::size_t s, std::vector<Bidegree>& target,
                                     double& sign) const {
        const auto& sec = space_->sector(s);
        target = sec.parts;
        sign = 1.0;
        for (std::size_t j = 0; j < term.factors.size(); ++j) {
            const auto& fa = term.factors[j];
            const Bidegree in = sec.parts[j];
            Bidegree out = in;
            if (fa.op) {
                const auto to = fa.op->target(in);
                if (!to || !fa.op->block(in)) return std::nullopt;
                out = *to;
            }
            if (fa.sign_in) sign *= in.sign();
            if (fa.sign_out) sign *= out.sign();
            target[j] = out;
        }
        return space_->find(target);
    }

    std::shared_ptr<const ProductSpace> space_;
    std::vector<KroneckerTerm> terms_;
    Bidegree shift_{0, 0};
};

namespace detail {

inline FactorAction compose_actions(const FactorAction& a, const FactorAction& b) {
    if (!a.op && !b.op) return {nullptr, (a.sign_in != a.sign_out) != (b.sign_in != b.sign_out), false};
    const auto& space = a.op ? a.op->space : b.op->space;
    auto with_signs = [&](const FactorAction& fa) {
        BlockOperator m = fa.op ? *fa.op : BlockOperator::identity(space);
        if (fa.sign_in) m = compose(m, BlockOperator::sign(space));
        if (fa.sign_out) m = compose(BlockOperator::sign(space), m);
        return m;
    };
    return {std::make_shared<const BlockOperator>(compose(with_signs(a), with_signs(b))), false, false};
}

}  // namespace detail

/// a o b, expanded term by term.
inline KroneckerOperator compose(const KroneckerOperator& a, const KroneckerOperator& b) {
    std::vector<KroneckerTerm> terms;
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms()) {
            KroneckerTerm t{ta.coefficient * tb.coefficient, {}};
            for (std::size_t j = 0; j < ta.factors.size(); ++j)
                t.factors.push_back(detail::compose_actions(ta.factors[j], tb.factors[j]));
            terms.push_back(std::move(t));
        }
    return KroneckerOperator(a.space(), std::move(terms));
}

}  // namespace prodbar
