#pragma once

#include "errors.hpp"
#include "quadrature.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace prodbar {

enum class FactorKind { disc, annulus, torus };

inline std::string to_string(FactorKind k) {
    switch (k) {
        case FactorKind::disc: return "disc";
        case FactorKind::annulus: return "annulus";
        case FactorKind::torus: return "torus";
    }
    return "?";
}

/// Declarative description of one factor domain.
///
/// The weight is phi_t(z) = t|z|^2 and enters inner products as e^{-phi_t}.
/// The torus is C/(Z + iZ) with the flat unit-volume metric.
struct FactorSpec {
    FactorKind kind = FactorKind::disc;
    double radius = 1.0;
    double inner_radius = 1.0;
    double outer_radius = 2.0;
    int truncation = 0;
    double weight_t = 0.0;

    static FactorSpec disc(int truncation, double weight_t = 0.0, double radius = 1.0) {
        FactorSpec s;
        s.kind = FactorKind::disc;
        s.radius = radius;
        s.truncation = truncation;
        s.weight_t = weight_t;
        return s;
    }
    static FactorSpec annulus(int truncation, double inner, double outer, double weight_t = 0.0) {
        FactorSpec s;
        s.kind = FactorKind::annulus;
        s.inner_radius = inner;
        s.outer_radius = outer;
        s.truncation = truncation;
        s.weight_t = weight_t;
        return s;
    }
    static FactorSpec torus(int truncation) {
        FactorSpec s;
        s.kind = FactorKind::torus;
        s.truncation = truncation;
        return s;
    }

    void validate() const {
        if (truncation < 0) throw ConfigError("truncation must be nonnegative");
        if (!(weight_t >= 0.0)) throw ConfigError("weight_t must be nonnegative");
        switch (kind) {
            case FactorKind::disc:
                if (!(radius > 0.0)) throw ConfigError("disc radius must be positive");
                break;
            case FactorKind::annulus:
                if (!(inner_radius > 0.0) || !(outer_radius > 0.0))
                    throw ConfigError("annulus radii must be positive");
                if (!(inner_radius < outer_radius))
                    throw ConfigError("annulus inner_radius must be less than outer_radius");
                break;
            case FactorKind::torus:
                if (weight_t != 0.0) throw ConfigError("torus requires weight_t = 0");
                break;
        }
    }

    std::string describe() const {
        std::ostringstream os;
        os << to_string(kind) << "(M=" << truncation;
        if (kind == FactorKind::disc && radius != 1.0) os << ",r=" << radius;
        if (kind == FactorKind::annulus) os << ",r=" << inner_radius << ".." << outer_radius;
        if (weight_t != 0.0) os << ",t=" << weight_t;
        os << ")";
        return os.str();
    }

    bool operator==(const FactorSpec&) const = default;
};

/// Exponent pair of a scalar basis function: z^a zbar^b on disc and annulus,
/// exp(2 pi i (a x + b y)) on the torus.
struct BasisLabel {
    int a = 0;
    int b = 0;
    auto operator<=>(const BasisLabel&) const = default;
};

/// Conserved quantum number of a basis element. dbar and its adjoint never mix
/// elements with different charges.
using Charge = std::array<int, 2>;

inline Charge function_charge(FactorKind kind, BasisLabel l) {
    if (kind == FactorKind::torus) return {l.a, l.b};
    return {l.a - l.b, 0};
}

/// Charge of the form element (basis function) * dz^p dzbar^q.
inline Charge form_charge(FactorKind kind, BasisLabel l, Bidegree bd) {
    Charge c = function_charge(kind, l);
    if (kind != FactorKind::torus) c[0] += bd.p - bd.q;
    return c;
}

namespace detail {

inline lreal falling_factorial(int x, int n) {
    lreal r = 1;
    for (int i = 0; i < n; ++i) r *= static_cast<lreal>(x - i);
    return r;
}

/// 2 pi * int r^{s+1} e^{-t r^2} dr over the radial range of the domain.
inline lreal radial_integral(const FactorSpec& spec, int s) {
    const lreal r0 = spec.kind == FactorKind::annulus ? spec.inner_radius : 0.0L;
    const lreal r1 = spec.kind == FactorKind::annulus ? spec.outer_radius : spec.radius;
    const lreal t = spec.weight_t;
    if (t == 0) {
        if (s + 2 == 0) return 2 * kPi * std::log(r1 / r0);
        return 2 * kPi * (std::pow(r1, s + 2) - std::pow(r0, s + 2)) / (s + 2);
    }
    auto integrand = [s, t](lreal r) { return std::pow(r, s + 1) * std::exp(-t * r * r); };
    return 2 * kPi * quadrature::integrate(integrand, r0, r1, 1e-12L / (2 * kPi));
}

inline bool sort_before(FactorKind kind, BasisLabel x, BasisLabel y) {
    const Charge cx = function_charge(kind, x), cy = function_charge(kind, y);
    if (cx != cy) return cx < cy;
    return x.b < y.b;
}

}  // namespace detail

/// Weighted L^2 inner product of two scalar basis functions, with no range
/// check on the labels. Exactly zero when the charges differ.
inline lreal monomial_inner(const FactorSpec& spec, BasisLabel x, BasisLabel y) {
    if (function_charge(spec.kind, x) != function_charge(spec.kind, y)) return 0;
    if (spec.kind == FactorKind::torus) return 1;
    return detail::radial_integral(spec, x.a + x.b + y.a + y.b);
}

/// Labels of the scalar coefficient functions at a ladder level. Level 0 holds
/// coefficients of (., 0)-forms, level 1 those of (., 1)-forms.
inline std::vector<BasisLabel> ladder_labels(const FactorSpec& spec, int level) {
    const int M = spec.truncation;
    std::vector<BasisLabel> out;
    switch (spec.kind) {
        case FactorKind::disc:
            for (int m = 0; m <= M; ++m)
                for (int k = 0; k <= M - level; ++k) out.push_back({m, k});
            break;
        case FactorKind::annulus:
            for (int m = -M; m <= M; ++m)
                for (int k = 0; k <= M - level; ++k) out.push_back({m, k});
            break;
        case FactorKind::torus:
            for (int m = -M; m <= M; ++m)
                for (int n = -M; n <= M; ++n) out.push_back({m, n});
            break;
    }
    std::stable_sort(out.begin(), out.end(),
                     [&](BasisLabel x, BasisLabel y) { return detail::sort_before(spec.kind, x, y); });
    return out;
}

inline bool label_in_range(const FactorSpec& spec, BasisLabel l) {
    const int M = spec.truncation;
    switch (spec.kind) {
        case FactorKind::disc: return l.a >= 0 && l.a <= M && l.b >= 0 && l.b <= M;
        case FactorKind::annulus: return l.a >= -M && l.a <= M && l.b >= 0 && l.b <= M;
        case FactorKind::torus: return l.a >= -M && l.a <= M && l.b >= -M && l.b <= M;
    }
    return false;
}

/// Weighted L^2 inner product <b_x, b_y> = int b_x conj(b_y) e^{-phi} dV.
inline cplx gram_entry(const FactorSpec& spec, BasisLabel x, BasisLabel y) {
    spec.validate();
    if (!label_in_range(spec, x) || !label_in_range(spec, y))
        throw IndexError("basis label outside the truncation of " + spec.describe());
    return cplx(static_cast<double>(monomial_inner(spec, x, y)), 0.0);
}

/// Gram matrix over an arbitrary label list: G(i, j) = <b_j, b_i>.
inline LRealMatrix gram_matrix(const FactorSpec& spec, const std::vector<BasisLabel>& labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    LRealMatrix g = LRealMatrix::Zero(n, n);
    std::map<int, lreal> radial;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const auto& x = labels[i];
            const auto& y = labels[j];
            if (function_charge(spec.kind, x) != function_charge(spec.kind, y)) continue;
            lreal v = 1;
            if (spec.kind != FactorKind::torus) {
                const int s = x.a + x.b + y.a + y.b;
                auto it = radial.find(s);
                if (it == radial.end()) it = radial.emplace(s, detail::radial_integral(spec, s)).first;
                v = it->second;
            }
            g(i, j) = g(j, i) = v;
        }
    }
    return g;
}

/// Image of a derivative operator: the labels it lands on and the coefficient
/// matrix from the source level into those labels.
struct DerivativeMap {
    std::vector<BasisLabel> image_labels;
    LMatrix matrix;
};

/// One ladder level of a scalar basis.
struct LadderLevel {
    std::vector<BasisLabel> labels;
    std::vector<Charge> charges;
    /// Contiguous [begin, end) ranges of equal charge.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> charge_blocks;
    LRealMatrix gram;
    /// Lower-triangular Cholesky factor, gram = L L^T, block diagonal by charge.
    LRealMatrix cholesky;
    /// L^{-T}: columns are the orthonormal basis expressed in raw coefficients.
    LRealMatrix orthonormal_map;
    double max_block_condition = 1.0;

    Eigen::Index size() const { return static_cast<Eigen::Index>(labels.size()); }

    Eigen::Index index_of(BasisLabel l) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l) return static_cast<Eigen::Index>(i);
        return -1;
    }
};

/// Scalar function basis of one factor with Gram data and Wirtinger
/// derivatives. Immutable after construction.
class ScalarBasis {
public:
    static constexpr double kMaxCondition = 1e15;

    explicit ScalarBasis(FactorSpec spec) : spec_(spec) {
        spec_.validate();
        for (int level = 0; level < 2; ++level) levels_[level] = make_level(level);
        d_zbar_ = LMatrix::Zero(levels_[1].size(), levels_[0].size());
        const DerivativeMap dzb = derivative(0, 0, 1);
        for (std::size_t r = 0; r < dzb.image_labels.size(); ++r) {
            const Eigen::Index row = levels_[1].index_of(dzb.image_labels[r]);
            if (row < 0) throw Error("internal", "dbar image leaves the level-1 ladder");
            d_zbar_.row(row) = dzb.matrix.row(static_cast<Eigen::Index>(r));
        }
        for (int level = 0; level < 2; ++level) d_z_[level] = derivative(level, 1, 0);
    }

    const FactorSpec& spec() const { return spec_; }
    const LadderLevel& level(int l) const { return levels_.at(l); }
    /// Level for the coefficients of a form of bidegree bd.
    const LadderLevel& level_for(Bidegree bd) const { return levels_.at(bd.q); }

    /// d/dzbar from level 0 into level 1 (raw coefficients).
    const LMatrix& d_zbar() const { return d_zbar_; }
    /// d/dz on the given level, into its image labels.
    const DerivativeMap& d_z(int level) const { return d_z_.at(level); }

    /// d^a/dz^a d^b/dzbar^b on raw coefficients of the given level.
    DerivativeMap derivative(int level, int a, int b) const {
        const auto& src = levels_.at(level).labels;
        DerivativeMap out;
        const auto n = static_cast<Eigen::Index>(src.size());
        if (spec_.kind == FactorKind::torus) {
            out.image_labels = src;
            out.matrix = LMatrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const lreal m = src[i].a, nn = src[i].b;
                const lcplx mu_zbar = lcplx(0, kPi) * lcplx(m, nn);   // pi i (m + i n)
                const lcplx mu_z = lcplx(0, kPi) * lcplx(m, -nn);     // pi i (m - i n)
                out.matrix(i, i) = std::pow(mu_z, a) * std::pow(mu_zbar, b);
            }
            return out;
        }
        std::vector<std::pair<BasisLabel, lreal>> images(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) {
            const BasisLabel l = src[i];
            images[i] = {{l.a - a, l.b - b},
                         detail::falling_factorial(l.a, a) * detail::falling_factorial(l.b, b)};
            if (images[i].second != 0) out.image_labels.push_back(images[i].first);
        }
        std::sort(out.image_labels.begin(), out.image_labels.end(),
                  [&](BasisLabel x, BasisLabel y) { return detail::sort_before(spec_.kind, x, y); });
        out.image_labels.erase(std::unique(out.image_labels.begin(), out.image_labels.end()),
                               out.image_labels.end());
        out.matrix = LMatrix::Zero(static_cast<Eigen::Index>(out.image_labels.size()), n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (images[i].second == 0) continue;
            const auto it = std::find(out.image_labels.begin(), out.image_labels.end(), images[i].first);
            out.matrix(it - out.image_labels.begin(), i) = images[i].second;
        }
        return out;
    }

private:
    LadderLevel make_level(int level) const {
        LadderLevel lv;
        lv.labels = ladder_labels(spec_, level);
        const Eigen::Index n = lv.size();
        for (const auto& l : lv.labels) lv.charges.push_back(function_charge(spec_.kind, l));
        for (Eigen::Index i = 0; i < n;) {
            Eigen::Index j = i;
            while (j < n && lv.charges[j] == lv.charges[i]) ++j;
            lv.charge_blocks.emplace_back(i, j);
            i = j;
        }
        lv.gram = gram_matrix(spec_, lv.labels);
        lv.cholesky = LRealMatrix::Zero(n, n);
        lv.orthonormal_map = LRealMatrix::Zero(n, n);
        for (const auto& [b, e] : lv.charge_blocks) {
            const Eigen::Index len = e - b;
            const LRealMatrix block = lv.gram.block(b, b, len, len);
            const Eigen::Matrix<lreal, Eigen::Dynamic, 1> d = block.diagonal().cwiseSqrt().cwiseInverse();
            const LRealMatrix scaled = d.asDiagonal() * block * d.asDiagonal();
            Eigen::SelfAdjointEigenSolver<LRealMatrix> eig(scaled, Eigen::EigenvaluesOnly);
            const lreal lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
            const double cond = lo > 0 ? static_cast<double>(hi / lo) : std::numeric_limits<double>::infinity();
            lv.max_block_condition = std::max(lv.max_block_condition, cond);
            if (!(cond < kMaxCondition)) {
                std::ostringstream os;
                os << "Gram matrix of " << spec_.describe() << " is numerically singular at level " << level
                   << " (scaled condition number " << cond << ")";
                throw IllConditionedError(os.str(), cond);
            }
            Eigen::LLT<LRealMatrix> llt(block);
            if (llt.info() != Eigen::Success)
                throw IllConditionedError("Cholesky factorization of the Gram matrix failed", cond);
            const LRealMatrix L = llt.matrixL();
            lv.cholesky.block(b, b, len, len) = L;
            lv.orthonormal_map.block(b, b, len, len) =
                L.transpose().template triangularView<Eigen::Upper>().solve(LRealMatrix::Identity(len, len));
        }
        return lv;
    }

    FactorSpec spec_;
    std::array<LadderLevel, 2> levels_;
    LMatrix d_zbar_;
    std::array<DerivativeMap, 2> d_z_;
};

inline ScalarBasis build_scalar_basis(const FactorSpec& spec) { return ScalarBasis(spec); }

struct WirtingerMatrices {
    DerivativeMap d_z;   // on level 0
    LMatrix d_zbar;      // level 0 -> level 1
};

inline WirtingerMatrices wirtinger_matrices(const FactorSpec& spec) {
    const ScalarBasis basis(spec);
    return {basis.d_z(0), basis.d_zbar()};
}

}  // namespace prodbar
