#pragma once

#include "product_complex.hpp"

#include <json.hpp>

#include <cstdint>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>

namespace prodbar::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline void require_object(const json& j, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + what);
}

inline void check_version(const json& j, const std::string& what) {
    if (!j.contains("format_version")) return;
    if (!j.at("format_version").is_number_integer() || j.at("format_version").get<int>() != kFormatVersion)
        throw ConfigError(what + " has unsupported format_version");
}

inline double number(const json& j, const char* key, const std::string& what) {
    if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " in " + what + " must be a number");
    return j.at(key).get<double>();
}

inline int integer(const json& j, const char* key, const std::string& what) {
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " in " + what + " must be an integer");
    return j.at(key).get<int>();
}

inline Bidegree bidegree(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError(what + " must be a pair of integers");
    return {j[0].get<int>(), j[1].get<int>()};
}

inline BasisLabel label(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError(what + " must be a pair of integers");
    return {j[0].get<int>(), j[1].get<int>()};
}

inline cplx coefficient(const json& e, const std::string& what) {
    return {number(e, "re", what), number(e, "im", what)};
}

/// Raw coefficients below this fraction of the largest one are not written; the
/// monomial basis amplifies round-off, so smaller entries are noise at the identity tolerance.
inline constexpr double kDropFraction = 1e-10;

inline double drop_threshold(const Vector& raw) { return raw.size() ? kDropFraction * raw.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

// ---------------------------------------------------------------- FactorSpec

inline FactorSpec factor_spec_from_json(const json& j) {
    const std::string what = "factor spec";
    detail::require_object(j, what);
    detail::reject_unknown(j, {"kind", "radius", "inner_radius", "outer_radius", "truncation", "weight_t"}, what);
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("factor spec needs a string 'kind'");
    if (!j.contains("truncation")) throw ConfigError("factor spec needs 'truncation'");
    if (!j.contains("weight_t")) throw ConfigError("factor spec needs 'weight_t'");
    FactorSpec s;
    const auto kind = j.at("kind").get<std::string>();
    s.truncation = detail::integer(j, "truncation", what);
    s.weight_t = detail::number(j, "weight_t", what);
    if (kind == "disc") {
        s.kind = FactorKind::disc;
        if (j.contains("inner_radius") || j.contains("outer_radius"))
            throw ConfigError("disc factor does not take inner_radius/outer_radius");
        if (j.contains("radius")) s.radius = detail::number(j, "radius", what);
    } else if (kind == "annulus") {
        s.kind = FactorKind::annulus;
        if (j.contains("radius")) throw ConfigError("annulus factor does not take radius");
        if (!j.contains("inner_radius") || !j.contains("outer_radius"))
            throw ConfigError("annulus factor needs inner_radius and outer_radius");
        s.inner_radius = detail::number(j, "inner_radius", what);
        s.outer_radius = detail::number(j, "outer_radius", what);
    } else if (kind == "torus") {
        s.kind = FactorKind::torus;
        if (j.contains("radius") || j.contains("inner_radius") || j.contains("outer_radius"))
            throw ConfigError("torus factor does not take radii");
    } else {
        throw ConfigError("unknown factor kind '" + kind + "'");
    }
    s.validate();
    return s;
}

inline json to_json(const FactorSpec& s) {
    json j{{"kind", to_string(s.kind)}, {"truncation", s.truncation}, {"weight_t", s.weight_t}};
    if (s.kind == FactorKind::disc) j["radius"] = s.radius;
    if (s.kind == FactorKind::annulus) {
        j["inner_radius"] = s.inner_radius;
        j["outer_radius"] = s.outer_radius;
    }
    return j;
}

// ----------------------------------------------------------------- RunConfig

struct Tolerances {
    double identity = 1e-10;
    double canonical = 1e-8;
    double null_cutoff = 1e-10;
};

struct RunConfig {
    std::vector<FactorSpec> factors;
    Eigen::Index dense_block_cap = ProductComplex::kDefaultDenseCap;
    Tolerances tolerances;
    std::uint64_t seed = 0;

    linalg::NullCutoff policy() const { return {tolerances.null_cutoff, 1e3}; }
};

inline RunConfig run_config_from_json(const json& j) {
    const std::string what = "config";
    detail::require_object(j, what);
    detail::reject_unknown(j, {"format_version", "factors", "caps", "tolerances", "seed"}, what);
    detail::check_version(j, what);
    RunConfig c;
    if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").empty())
        throw ConfigError("config needs a nonempty 'factors' array");
    for (const auto& f : j.at("factors")) c.factors.push_back(factor_spec_from_json(f));
    if (j.contains("caps")) {
        const auto& caps = j.at("caps");
        detail::require_object(caps, "caps");
        detail::reject_unknown(caps, {"dense_block_cap"}, "caps");
        if (caps.contains("dense_block_cap")) {
            if (!caps.at("dense_block_cap").is_number_integer() || caps.at("dense_block_cap").get<long long>() <= 0)
                throw ConfigError("dense_block_cap must be a positive integer");
            c.dense_block_cap = caps.at("dense_block_cap").get<Eigen::Index>();
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        detail::require_object(t, "tolerances");
        detail::reject_unknown(t, {"identity", "canonical", "null_cutoff"}, "tolerances");
        auto read = [&](const char* key, double& out) {
            if (!t.contains(key)) return;
            out = detail::number(t, key, "tolerances");
            if (!(out > 0.0)) throw ConfigError(std::string("tolerance '") + key + "' must be positive");
        };
        read("identity", c.tolerances.identity);
        read("canonical", c.tolerances.canonical);
        read("null_cutoff", c.tolerances.null_cutoff);
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw ConfigError("seed must be an integer");
        if (j.at("seed").is_number_integer() && j.at("seed").get<long long>() < 0)
            throw ConfigError("seed must be nonnegative");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
}

inline json to_json(const RunConfig& c) {
    json factors = json::array();
    for (const auto& f : c.factors) factors.push_back(to_json(f));
    return {{"format_version", kFormatVersion},
            {"factors", factors},
            {"caps", {{"dense_block_cap", c.dense_block_cap}}},
            {"tolerances",
             {{"identity", c.tolerances.identity},
              {"canonical", c.tolerances.canonical},
              {"null_cutoff", c.tolerances.null_cutoff}}},
            {"seed", c.seed}};
}

/// FNV-1a of the canonical config serialization, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ------------------------------------------------------------ factor forms

/// Homogeneous factor form; entries hold raw monomial coefficients.
inline json form_to_json(const FactorComplex& fc, const FormVector& f, Bidegree bd) {
    const Vector raw = fc.to_raw(f, bd);
    const double drop = detail::drop_threshold(raw);
    const auto& labels = fc.space->labels[factor_slot(bd)];
    json entries = json::array();
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (std::abs(raw[i]) <= drop) continue;
        entries.push_back({{"label", {labels[i].a, labels[i].b}}, {"re", raw[i].real()}, {"im", raw[i].imag()}});
    }
    return {{"format_version", kFormatVersion}, {"bidegree", {bd.p, bd.q}}, {"entries", entries}};
}

struct ParsedForm {
    FormVector form;
    Bidegree bidegree;
};

inline ParsedForm form_from_json(const FactorComplex& fc, const json& j) {
    const std::string what = "form";
    detail::require_object(j, what);
    detail::reject_unknown(j, {"format_version", "bidegree", "entries"}, what);
    detail::check_version(j, what);
    if (!j.contains("bidegree") || !j.contains("entries") || !j.at("entries").is_array())
        throw ConfigError("form needs 'bidegree' and an 'entries' array");
    const Bidegree bd = detail::bidegree(j.at("bidegree"), "bidegree");
    if (!is_factor_bidegree(bd)) throw ConfigError("invalid factor bidegree " + bd.str());
    const auto& labels = fc.space->labels[factor_slot(bd)];
    Vector raw = Vector::Zero(fc.dim(bd));
    for (const auto& e : j.at("entries")) {
        detail::require_object(e, "form entry");
        detail::reject_unknown(e, {"label", "re", "im"}, "form entry");
        const BasisLabel l = detail::label(e.at("label"), "label");
        const auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end())
            throw ConfigError("label [" + std::to_string(l.a) + "," + std::to_string(l.b) + "] is outside the basis at " +
                              bd.str());
        raw[it - labels.begin()] += detail::coefficient(e, "form entry");
    }
    return {fc.from_raw(bd, raw), bd};
}

// ----------------------------------------------------------- product forms

inline json product_form_to_json(const ProductComplex& pc, const ProductFormVector& f, Bidegree bd) {
    const ProductFormVector raw = pc.to_raw.apply(f);
    const auto& space = *pc.space;
    double peak = 0.0;
    for (const auto s : space.sectors_of(bd))
        if (raw.blocks[s].size()) peak = std::max(peak, raw.blocks[s].cwiseAbs().maxCoeff());
    const double drop = detail::kDropFraction * peak;
    json entries = json::array();
    for (const auto s : space.sectors_of(bd)) {
        const auto& sec = space.sector(s);
        json parts = json::array();
        for (const auto& b : sec.parts) parts.push_back({b.p, b.q});
        for (Eigen::Index i = 0; i < sec.size; ++i) {
            const cplx v = raw.blocks[s][i];
            if (std::abs(v) <= drop) continue;
            const auto idx = space.multi_index({s, i});
            json labels = json::array();
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const BasisLabel l = space.factor(j).labels[factor_slot(sec.parts[j])][idx[j]];
                labels.push_back({l.a, l.b});
            }
            entries.push_back({{"labels", labels}, {"form_parts", parts}, {"re", v.real()}, {"im", v.imag()}});
        }
    }
    return {{"format_version", kFormatVersion}, {"bidegree", {bd.p, bd.q}}, {"entries", entries}};
}

struct ParsedProductForm {
    ProductFormVector form;
    Bidegree bidegree;
};

inline ParsedProductForm product_form_from_json(const ProductComplex& pc, const json& j) {
    const std::string what = "product form";
    detail::require_object(j, what);
    detail::reject_unknown(j, {"format_version", "bidegree", "entries"}, what);
    detail::check_version(j, what);
    if (!j.contains("bidegree") || !j.contains("entries") || !j.at("entries").is_array())
        throw ConfigError("product form needs 'bidegree' and an 'entries' array");
    const Bidegree bd = detail::bidegree(j.at("bidegree"), "bidegree");
    const auto& space = *pc.space;
    const std::size_t n = space.factor_count();
    ProductFormVector raw = pc.zero();
    for (const auto& e : j.at("entries")) {
        detail::require_object(e, "product form entry");
        detail::reject_unknown(e, {"labels", "form_parts", "re", "im"}, "product form entry");
        if (!e.contains("labels") || !e.contains("form_parts") || !e.at("labels").is_array() ||
            !e.at("form_parts").is_array() || e.at("labels").size() != n || e.at("form_parts").size() != n)
            throw ConfigError("product form entry needs one label and one form part per factor");
        std::vector<Bidegree> parts;
        Bidegree total;
        for (const auto& p : e.at("form_parts")) {
            parts.push_back(detail::bidegree(p, "form part"));
            if (!is_factor_bidegree(parts.back())) throw ConfigError("invalid form part " + parts.back().str());
            total = total + parts.back();
        }
        if (total != bd) throw ConfigError("form parts do not add up to the declared bidegree");
        const std::size_t s = *space.find(parts);
        const auto& sec = space.sector(s);
        Eigen::Index local = 0;
        for (std::size_t f = 0; f < n; ++f) {
            const BasisLabel l = detail::label(e.at("labels")[f], "label");
            const auto& labels = space.factor(f).labels[factor_slot(parts[f])];
            const auto it = std::find(labels.begin(), labels.end(), l);
            if (it == labels.end())
                throw ConfigError("label [" + std::to_string(l.a) + "," + std::to_string(l.b) + "] of factor " +
                                  std::to_string(f + 1) + " is outside the basis");
            local = local * sec.dims[f] + (it - labels.begin());
        }
        raw.blocks[s][local] += detail::coefficient(e, "product form entry");
    }
    return {pc.from_raw.apply(raw), bd};
}

}  // namespace prodbar::io
