#pragma once

#include "verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace prodbar::cli {

namespace detail {

using io::json;

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

inline std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

struct Loaded {
    io::RunConfig config;
    std::vector<std::shared_ptr<const FactorComplex>> factors;
    std::optional<ProductComplex> product;
};

inline Loaded load(const std::string& path, bool need_product) {
    Loaded l;
    l.config = io::run_config_from_json(read_json(path));
    for (const auto& spec : l.config.factors)
        l.factors.push_back(std::make_shared<const FactorComplex>(assemble_factor_complex(spec, l.config.policy())));
    if (l.factors.size() >= 2) l.product = build_product(l.factors, l.config.dense_block_cap);
    else if (need_product) throw ConfigError("this command needs at least two factors");
    return l;
}

inline std::string join(const std::vector<std::string>& args) {
    std::string s;
    for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
    return s;
}

/// First nontrivial mode: z-bar / dz-bar on disc and annulus, e_{1,0} on the torus.
inline FormVector witness_function(const FactorComplex& fc, Bidegree bd) {
    const BasisLabel l = fc.spec().kind == FactorKind::torus ? BasisLabel{1, 0} : BasisLabel{0, bd.q == 1 ? 0 : 1};
    return fc.monomial(bd, l);
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

// ------------------------------------------------------------------ commands

inline verify::Report cmd_solve(const std::string& config, const std::string& rhs, const std::string& out_path) {
    const Loaded l = load(config, false);
    const json rhs_json = read_json(rhs);
    const double tol = l.config.tolerances.identity;
    verify::Report r;
    r.config_hash = io::config_hash(l.config);

    if (!l.product) {
        const FactorComplex& fc = *l.factors.front();
        const io::ParsedForm f = io::form_from_json(fc, rhs_json);
        if (f.bidegree.q != 1) throw ConfigError("right-hand side must have bidegree (p,1)");
        const FormVector u = fc.canonical.apply(f.form);
        const FormVector pf = fc.harmonic_proj.apply(f.form);
        FormVector defect = fc.dbar.apply(u);
        defect -= f.form - pf;
        const double fn = std::max(f.form.norm(), std::numeric_limits<double>::min());
        r.expect_le("solve:residual", defect.norm() / fn, tol);
        r.expect_le("solve:harmonic_component", pf.norm() / fn, tol);
        write_text(out_path, io::form_to_json(fc, u, {f.bidegree.p, 0}).dump(2) + "\n");
    } else {
        const ProductComplex& pc = *l.product;
        const io::ParsedProductForm f = io::product_form_from_json(pc, rhs_json);
        if (f.bidegree.q < 1) throw ConfigError("right-hand side must have q >= 1");
        const SolveResult s = solve_dbar(pc, f.form);
        const double fn = std::max(s.report.rhs_norm, std::numeric_limits<double>::min());
        r.expect_le("solve:closedness", s.report.closedness_defect / (std::max(pc.dbar_scale(), 1.0) * fn), tol);
        r.expect_le("solve:harmonic_component", s.report.harmonic_norm / fn, tol);
        r.expect_le("solve:residual", s.report.residual / fn, tol);
        const Bidegree ubd{f.bidegree.p, f.bidegree.q - 1};
        write_text(out_path, io::product_form_to_json(pc, s.u, ubd).dump(2) + "\n");
    }
    r.extra["solution_file"] = out_path;
    return r;
}

inline int cmd_cohomology(const std::string& config, std::optional<int> p, std::optional<int> q, std::ostream& out) {
    const Loaded l = load(config, false);
    const int n = static_cast<int>(l.factors.size());
    std::vector<Bidegree> rows;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
            if ((!p || *p == a) && (!q || *q == b)) rows.push_back({a, b});
    if (rows.empty()) throw IndexError("no bidegree matches the requested (p,q)");

    std::vector<std::pair<long, long>> dims;
    for (const Bidegree bd : rows) {
        if (l.product) {
            const KunnethDims k = kunneth_dimensions(*l.product, bd.p, bd.q);
            dims.emplace_back(k.tensor_dim, k.direct_dim);
        } else {
            const FactorComplex& fc = *l.factors.front();
            // A single factor has no Kunneth side; rank of P (from the SVD) is compared with null(box).
            const Matrix* proj = fc.harmonic_proj.block(bd);
            const long svd_null = proj ? std::lround(proj->trace().real()) : 0;
            const long box_null = fc.harmonic_dim(bd);
            dims.emplace_back(box_null, svd_null);
        }
    }
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool match = dims[i].first == dims[i].second;
        ok = ok && match;
        out << rows[i].str() << ": kunneth=" << dims[i].first << " direct=" << dims[i].second
            << " match=" << (match ? "true" : "false") << "\n";
    }
    return ok ? 0 : 1;
}

inline verify::Report cmd_verify(const std::string& config, const std::string& suite, std::optional<std::uint64_t> seed_opt) {
    const Loaded l = load(config, false);
    const std::uint64_t seed = seed_opt.value_or(l.config.seed);
    const verify::Tolerances tol = verify::tolerances_from(l.config);
    verify::Report r;
    r.config_hash = io::config_hash(l.config);
    r.extra["suite"] = suite;
    r.extra["seed"] = seed;
    const bool all = suite == "all";
    if (all || suite == "factor")
        for (std::size_t j = 0; j < l.factors.size(); ++j)
            r.append(verify::factor_suite(*l.factors[j], "factor[" + std::to_string(j + 1) + "]:", tol, seed + 101 * j));
    if (all || suite == "product") {
        if (l.product) r.append(verify::product_suite(*l.product, tol, seed + 7));
        else r.skip("product", "single factor configuration");
    }
    if (all || suite == "sobolev") r.append(verify::sobolev_suite(l.factors, l.product, tol, seed + 13));
    return r;
}

inline verify::Report cmd_witness(const std::string& config, int pairs, std::optional<std::uint64_t> seed_opt) {
    const Loaded l = load(config, true);
    const ProductComplex& pc = *l.product;
    if (pc.factor_count() != 2) throw ConfigError("the witness identity is stated for two factors");
    verify::Report r;
    r.config_hash = io::config_hash(l.config);
    const double tol = l.config.tolerances.canonical;

    const FormVector f = witness_function(*pc.factors[0], {0, 1});
    const FormVector g = witness_function(*pc.factors[1], {0, 0});
    const WitnessValues w = noncanonical_witness(pc, f, g);
    r.expect_le("witness:fixed_pair", std::abs(w.lhs - w.rhs) / (1.0 + std::abs(w.rhs)), tol);
    r.extra["lhs"] = complex_json(w.lhs);
    r.extra["rhs"] = w.rhs;

    std::mt19937_64 rng(seed_opt.value_or(l.config.seed));
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const Bidegree bf{static_cast<int>(rng() % 2), 1}, bg{static_cast<int>(rng() % 2), 0};
        const FormVector a = random_form(pc.factors[0]->space, rng, bf);
        const FormVector b = random_form(pc.factors[1]->space, rng, bg);
        const WitnessValues v = noncanonical_witness(pc, a, b);
        worst = std::max(worst, std::abs(v.lhs - v.rhs) / (1.0 + std::abs(v.rhs)));
    }
    r.expect_le("witness:random_pairs", worst, tol).note = "pairs=" + std::to_string(pairs);
    return r;
}

inline verify::Report cmd_sweep(const std::string& config, int k, const std::vector<int>& truncations, int samples,
                                double threshold, std::optional<std::uint64_t> seed_opt, const std::string& csv) {
    const io::RunConfig cfg = io::run_config_from_json(read_json(config));
    if (truncations.empty()) throw ConfigError("at least one truncation is required");
    if (samples < 1) throw ConfigError("samples must be positive");
    const SweepReport s = boundedness_sweep(cfg.factors, k, truncations, samples, seed_opt.value_or(cfg.seed), threshold,
                                            cfg.policy(), cfg.dense_block_cap);
    verify::Report r;
    r.config_hash = io::config_hash(cfg);
    double worst = 0.0;
    for (const double g : s.growth) worst = std::max(worst, g);
    r.expect_le("sweep:growth", worst, threshold);
    r.extra["k"] = s.k;
    r.extra["truncations"] = s.truncations;
    r.extra["ratios"] = s.ratios;
    r.extra["growth"] = s.growth;
    r.extra["alert"] = s.alert;
    r.extra["samples"] = samples;
    if (!csv.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "truncation,sample,ratio\n";
        for (const auto& row : s.rows) os << row.truncation << "," << row.sample << "," << row.ratio << "\n";
        write_text(csv, os.str());
    }
    return r;
}

}  // namespace detail

/// Runs one subcommand. args excludes the program name.
/// Exit codes: 0 success, 1 a check failed, 2 bad input (one "error: <kind>: <message>" line on err).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Galerkin dbar solver on product domains"};
    app.require_subcommand(1);
    bool timing = false;
    app.add_flag("--timing", timing, "Add wall time to the report");

    std::string config, rhs, out_path, suite = "all", csv;
    std::optional<std::uint64_t> seed;
    std::optional<int> p, q;
    int k = 0, samples = 20, pairs = 20;
    double threshold = 1.25;
    std::vector<int> truncations{4, 6, 8};

    auto* solve = app.add_subcommand("solve", "Apply the solution operator to a right-hand side");
    solve->add_option("--config", config)->required();
    solve->add_option("--rhs", rhs)->required();
    solve->add_option("--out", out_path)->required();

    auto* coh = app.add_subcommand("cohomology", "Kunneth versus direct harmonic dimensions");
    coh->add_option("--config", config)->required();
    coh->add_option("--p", p);
    coh->add_option("--q", q);

    auto* ver = app.add_subcommand("verify", "Run the invariant suites");
    ver->add_option("--config", config)->required();
    ver->add_option("--suite", suite)->check(CLI::IsMember({"all", "factor", "product", "sobolev"}));
    ver->add_option("--seed", seed);

    auto* wit = app.add_subcommand("witness", "Non-canonicity witness of the product solution");
    wit->add_option("--config", config)->required();
    wit->add_option("--pairs", pairs)->check(CLI::NonNegativeNumber);
    wit->add_option("--seed", seed);

    auto* swp = app.add_subcommand("sweep", "Partial Sobolev boundedness sweep over truncations");
    swp->add_option("--config", config)->required();
    swp->add_option("--k", k)->required();
    swp->add_option("--truncations", truncations)->delimiter(',');
    swp->add_option("--samples", samples);
    swp->add_option("--threshold", threshold);
    swp->add_option("--seed", seed);
    swp->add_option("--csv", csv);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << detail::one_line(e.what()) << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (coh->parsed()) return detail::cmd_cohomology(config, p, q, out);
        verify::Report r;
        if (solve->parsed()) r = detail::cmd_solve(config, rhs, out_path);
        else if (ver->parsed()) r = detail::cmd_verify(config, suite, seed);
        else if (wit->parsed()) r = detail::cmd_witness(config, pairs, seed);
        else r = detail::cmd_sweep(config, k, truncations, samples, threshold, seed, csv);
        r.command = detail::join(args);
        if (timing) r.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << verify::to_json(r).dump(2) << "\n";
        return r.all_passed() ? 0 : 1;
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << detail::one_line(e.what()) << "\n";
        return 2;
    } catch (const io::json::exception& e) {
        err << "error: config: " << detail::one_line(e.what()) << "\n";
        return 2;
    }
}

inline int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

}  // namespace prodbar::cli
