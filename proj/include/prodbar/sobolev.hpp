#pragma once

#include "product_complex.hpp"

#include <random>
#include <vector>

namespace prodbar {

enum class SobolevMode { full, partial };

struct SobolevConfig {
    int k = 0;
    SobolevMode mode = SobolevMode::partial;
};

/// Sobolev norms of product forms from spectral coefficients. Real partial
/// derivatives are replaced by Wirtinger derivatives: for each factor the
/// order-<=k spans agree, so the norms are equivalent with the same index
/// structure.
///
/// For factor j, order o and bidegree block b, H_j[b][o] is the Hermitian
/// matrix with  a^H H a = sum_{a_z + a_zbar = o} ||d_z^{a_z} d_zbar^{a_zbar} f||^2
/// on orthonormal coordinates a.
class SobolevNormer {
public:
    SobolevNormer(std::vector<std::shared_ptr<const FactorComplex>> factors, int max_order)
        : factors_(std::move(factors)), max_order_(max_order) {
        if (max_order < 0) throw OrderError("Sobolev order must be nonnegative");
        for (std::size_t j = 0; j < factors_.size(); ++j) {
            const auto& spec = factors_[j]->spec();
            if (spec.kind != FactorKind::torus && max_order > spec.truncation)
                throw OrderError("truncation M=" + std::to_string(spec.truncation) + " of factor " +
                                 std::to_string(j + 1) + " (" + spec.describe() + ") is too small for order " +
                                 std::to_string(max_order));
            std::array<std::vector<Matrix>, 4> per_block;
            for (const Bidegree bd : kFactorBidegrees) {
                const int level = bd.q;
                const auto& basis = *factors_[j]->basis;
                const LMatrix m = basis.level(level).orthonormal_map.cast<lcplx>();
                auto& orders = per_block[factor_slot(bd)];
                for (int o = 0; o <= max_order; ++o) {
                    const Eigen::Index n = m.rows();
                    LMatrix acc = LMatrix::Zero(n, n);
                    for (int a = 0; a <= o; ++a) {
                        const DerivativeMap dm = basis.derivative(level, a, o - a);
                        if (dm.image_labels.empty()) continue;
                        const LMatrix g = gram_matrix(spec, dm.image_labels).cast<lcplx>();
                        const LMatrix e = dm.matrix * m;
                        acc += e.adjoint() * g * e;
                    }
                    orders.push_back(to_double(acc));
                }
            }
            blocks_.push_back(std::move(per_block));
        }
    }

    int max_order() const { return max_order_; }

    /// Squared norm of f (a form on the product of this normer's factors).
    template <class Space>
    double squared_norm(const BasicFormVector<Space>& f, const SobolevConfig& cfg) const {
        if (cfg.k < 0 || cfg.k > max_order_) throw OrderError("requested order exceeds the prepared order");
        const std::size_t n = factors_.size();
        std::vector<int> orders(n, 0);
        double total = 0.0;
        // Enumerate per-factor order tuples in lexicographic order.
        while (true) {
            int sum = 0;
            for (int o : orders) sum += o;
            if (cfg.mode == SobolevMode::partial || sum <= cfg.k) total += tuple_term(f, orders);
            std::size_t j = n;
            while (j > 0) {
                --j;
                if (orders[j] < cfg.k) {
                    ++orders[j];
                    break;
                }
                orders[j] = 0;
                if (j == 0) return total;
            }
            if (n == 0) return total;
        }
    }

    template <class Space>
    double norm(const BasicFormVector<Space>& f, const SobolevConfig& cfg) const {
        return std::sqrt(std::max(0.0, squared_norm(f, cfg)));
    }

    /// sum over sectors of  v^H (H_{o_1} (x) ... (x) H_{o_N}) v
    double tuple_term(const ProductFormVector& f, const std::vector<int>& orders) const {
        const auto& space = *f.space;
        double acc = 0.0;
        for (std::size_t s = 0; s < space.block_count(); ++s) {
            const auto& sec = space.sector(s);
            if (sec.size == 0) continue;
            std::vector<Eigen::Index> dims = sec.dims;
            Vector w = f.blocks[s];
            for (std::size_t j = 0; j < orders.size(); ++j)
                if (orders[j] > 0) w = detail::mode_product(blocks_[j][factor_slot(sec.parts[j])][orders[j]], w, dims, j);
            acc += f.blocks[s].dot(w).real();
        }
        return acc;
    }

    double tuple_term(const FormVector& f, const std::vector<int>& orders) const {
        double acc = 0.0;
        for (const Bidegree bd : kFactorBidegrees) {
            const Vector& v = f.blocks[factor_slot(bd)];
            acc += orders[0] == 0 ? v.squaredNorm() : v.dot(blocks_[0][factor_slot(bd)][orders[0]] * v).real();
        }
        return acc;
    }

private:
    std::vector<std::shared_ptr<const FactorComplex>> factors_;
    int max_order_;
    std::vector<std::array<std::vector<Matrix>, 4>> blocks_;
};

inline double sobolev_norm(const ProductComplex& pc, const ProductFormVector& f, const SobolevConfig& cfg) {
    return SobolevNormer(pc.factors, cfg.k).norm(f, cfg);
}

/// W^k norm of a form on a single factor (the partial and full norms coincide there).
inline double factor_sobolev_norm(const std::shared_ptr<const FactorComplex>& fc, const FormVector& f, int k) {
    return SobolevNormer({fc}, k).norm(f, {k, SobolevMode::full});
}

/// Complex standard normal coefficients on every block whose bidegree is
/// accepted by `keep`.
template <class Space, class Rng, class Keep>
BasicFormVector<Space> random_form(std::shared_ptr<const Space> space, Rng& rng, Keep keep) {
    std::normal_distribution<double> normal;
    BasicFormVector<Space> f(space);
    for (std::size_t s = 0; s < f.blocks.size(); ++s) {
        if (!keep(space->block_bidegree(s))) continue;
        for (Eigen::Index i = 0; i < f.blocks[s].size(); ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            f.blocks[s][i] = cplx(re, im);
        }
    }
    return f;
}

template <class Space, class Rng>
BasicFormVector<Space> random_form(std::shared_ptr<const Space> space, Rng& rng) {
    return random_form(std::move(space), rng, [](Bidegree) { return true; });
}

template <class Space, class Rng>
BasicFormVector<Space> random_form(std::shared_ptr<const Space> space, Rng& rng, Bidegree bd) {
    return random_form(std::move(space), rng, [bd](Bidegree b) { return b == bd; });
}

struct InclusionReport {
    int k = 0;
    int samples = 0;
    int violations = 0;
    /// ||f||_{W~k} / ||f||_{W^k}
    double min_partial_over_full = 0.0, max_partial_over_full = 0.0;
    /// ||f||_{W^{Nk}} / ||f||_{W~k}
    double min_high_over_partial = 0.0, max_high_over_partial = 0.0;
};

/// Checks W^{Nk} c W~^k c W^k termwise on random forms.
inline InclusionReport inclusion_report(const ProductComplex& pc, int k, int samples, std::uint64_t seed) {
    if (k < 1) throw OrderError("inclusion report needs k >= 1");
    const int nk = static_cast<int>(pc.factor_count()) * k;
    const SobolevNormer normer(pc.factors, nk);
    std::mt19937_64 rng(seed);
    InclusionReport r;
    r.k = k;
    r.samples = samples;
    r.min_partial_over_full = r.min_high_over_partial = std::numeric_limits<double>::infinity();
    constexpr double slack = 1e-12;
    for (int i = 0; i < samples; ++i) {
        const ProductFormVector f = random_form(pc.space, rng);
        const double full = normer.norm(f, {k, SobolevMode::full});
        const double partial = normer.norm(f, {k, SobolevMode::partial});
        const double high = normer.norm(f, {nk, SobolevMode::full});
        if (full > partial * (1 + slack) || partial > high * (1 + slack)) ++r.violations;
        r.min_partial_over_full = std::min(r.min_partial_over_full, partial / full);
        r.max_partial_over_full = std::max(r.max_partial_over_full, partial / full);
        r.min_high_over_partial = std::min(r.min_high_over_partial, high / partial);
        r.max_high_over_partial = std::max(r.max_high_over_partial, high / partial);
    }
    return r;
}

struct SweepRow {
    int truncation = 0;
    int sample = 0;
    double ratio = 0.0;
};

struct SweepReport {
    int k = 0;
    std::vector<int> truncations;
    /// R(M) = max ||S f||_{W~k} / ||f||_{W~k} over the samples.
    std::vector<double> ratios;
    /// R(M_{i+1}) / R(M_i)
    std::vector<double> growth;
    double threshold = 1.25;
    bool alert = false;
    std::vector<SweepRow> rows;
};

/// Boundedness diagnostic for S in the partial Sobolev norm on dbar-closed
/// (0,1)-forms orthogonal to the harmonic forms, across truncations.
inline SweepReport boundedness_sweep(const std::vector<FactorSpec>& templ, int k, const std::vector<int>& truncations,
                                     int samples, std::uint64_t seed, double threshold = 1.25,
                                     linalg::NullCutoff policy = {},
                                     Eigen::Index dense_cap = ProductComplex::kDefaultDenseCap) {
    if (k < 0) throw OrderError("Sobolev order must be nonnegative");
    if (!std::is_sorted(truncations.begin(), truncations.end()))
        throw ConfigError("truncations must be ascending");
    SweepReport r;
    r.k = k;
    r.truncations = truncations;
    r.threshold = threshold;
    for (const int m : truncations) {
        std::vector<std::shared_ptr<const FactorComplex>> fs;
        for (FactorSpec spec : templ) {
            spec.truncation = m;
            fs.push_back(std::make_shared<const FactorComplex>(assemble_factor_complex(spec, policy)));
        }
        const ProductComplex pc = build_product(fs, dense_cap);
        const SobolevNormer normer(pc.factors, k);
        const SobolevConfig cfg{k, SobolevMode::partial};
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(m));
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            // dbar S h lies in range(dbar): closed and orthogonal to the harmonic forms.
            const ProductFormVector h = random_form(pc.space, rng, Bidegree{0, 1});
            const ProductFormVector f = pc.dbar.apply(pc.solution.apply(h));
            const double ratio = normer.norm(pc.solution.apply(f), cfg) / normer.norm(f, cfg);
            r.rows.push_back({m, i, ratio});
            worst = std::max(worst, ratio);
        }
        r.ratios.push_back(worst);
    }
    for (std::size_t i = 1; i < r.ratios.size(); ++i) {
        r.growth.push_back(r.ratios[i] / r.ratios[i - 1]);
        if (r.growth.back() > threshold) r.alert = true;
    }
    return r;
}

}  // namespace prodbar
