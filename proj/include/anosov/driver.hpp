// Subcommand drivers behind the command-line front end.  Each run writes
// into <output>/<hash>/ where the hash covers the config bytes, the seed,
// and the subcommand, so identical invocations land in the same directory
// and produce byte-identical result files.  The manifest is written first
// (marked incomplete) and rewritten on success, and validation happens
// before anything touches the filesystem.
//
// Exit codes: 0 all checks pass, 1 a computed check failed, 2 usage or
// config error, 3 resource refusal.
#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/fredholm.hpp"
#include "anosov/growth.hpp"
#include "anosov/io.hpp"
#include "anosov/run_config.hpp"
#include "anosov/spectral.hpp"
#include "anosov/transfer.hpp"

namespace anosov {

struct DriverResult {
    int exit_code = 0;
    std::string run_dir;
};

// command-line overrides applied on top of the [run] section
struct CliOverrides {
    std::string out_base;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

// dense zgeev keeps eigenvectors only below this truncation; above it the
// solve stays affordable without them and residual columns read as nan
inline constexpr int kSpectrumVectorHalfWidth = 16;
inline constexpr double kOutlierMargin = 1e-3;
inline constexpr double kSlopeMargin = 0.05;
inline constexpr int kBoundBaseGrid = 64;
inline constexpr int kBoundIterates = 8;
inline constexpr double kRadiiGap = 1e-10;

namespace detail {

inline std::string num_tag(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

inline std::string pair_tag(double p, double s) {
    return "_p" + num_tag(p) + "_s" + num_tag(s);
}

inline std::string json_kv(const std::string& k, const std::string& v) {
    return "\"" + k + "\": " + v;
}

inline std::string json_str(const std::string& s) { return "\"" + s + "\""; }

inline std::string json_num(double x) { return fmt_double(x); }

}  // namespace detail

// ------------------------------------------------------------------ bounds

// One CSV per formula and exponent pair (plus one per t for the
// t-dependent forms), a summary table, and the radii ordering check
// rho_1 <= rho_infty + gap for every iterate count on both grids.
inline bool bounds_body(const RunConfig& cfg, const std::string& dir,
                        RunManifest& man) {
    auto map = cfg.build_map();
    const int base_grid = cfg.grid > 0 ? cfg.grid : kBoundBaseGrid;
    ExponentField base(map, cfg.n_max, base_grid, cfg.threads);
    ExponentField refined(map, cfg.n_max, 2 * base_grid, cfg.threads);

    std::vector<BoundFormula> formulas = cfg.formulas;
    if (formulas.empty())
        formulas = {BoundFormula::rho_infty,   BoundFormula::rho_one,
                    BoundFormula::thm1,        BoundFormula::thm2,
                    BoundFormula::propL1_u,    BoundFormula::propL1_s,
                    BoundFormula::propL12,     BoundFormula::appendix_Lt,
                    BoundFormula::appendix_Mt};

    std::vector<std::pair<double, double>> pairs;
    for (const auto& c : cfg.cells()) {
        std::pair<double, double> ps{c.p, c.s};
        bool seen = false;
        for (const auto& q : pairs) seen = seen || q == ps;
        if (!seen) pairs.push_back(ps);
    }

    std::ostringstream summary;
    summary << "formula_id,p,s,t,extrapolated_base,extrapolated\n";

    for (BoundFormula f : formulas)
        for (const auto& [p, s] : pairs) {
            ExponentPair exps(p, s);
            std::vector<double> ts;
            if (detail::needs_t(f))
                ts = cfg.t_list;
            else
                ts = {std::numeric_limits<double>::quiet_NaN()};
            for (double t : ts) {
                BoundReport rep = compute_bound(base, refined, f, exps, t);
                std::string name = std::string(formula_name(f)) +
                                   detail::pair_tag(p, s) +
                                   (detail::needs_t(f) ? "_t" + detail::num_tag(t) : "") +
                                   ".csv";
                write_file_with(dir + "/" + name,
                                [&](std::ostream& os) { write_bound_csv(os, rep); });
                summary << formula_name(f) << ',' << fmt_double(p) << ','
                        << fmt_double(s) << ',' << fmt_double(t) << ','
                        << fmt_double(rep.extrapolated_base) << ','
                        << fmt_double(rep.extrapolated) << '\n';
            }
        }
    write_text_file(dir + "/summary.csv", summary.str());

    bool pass = true;
    for (const auto& [p, s] : pairs) {
        ExponentPair exps(p, s);
        BoundReport ri = compute_bound(base, refined, BoundFormula::rho_infty, exps);
        BoundReport r1 = compute_bound(base, refined, BoundFormula::rho_one, exps);
        bool ok = true;
        for (int g : {base_grid, 2 * base_grid}) {
            auto si = ri.raw_sequence(g);
            auto s1 = r1.raw_sequence(g);
            for (std::size_t i = 0; i < si.size() && i < s1.size(); ++i)
                ok = ok && s1[i] <= si[i] + kRadiiGap;
        }
        pass = pass && ok;
        man.verdicts.push_back(
            "{" + detail::json_kv("check", detail::json_str("rho_one_le_rho_infty")) +
            ", " + detail::json_kv("p", detail::json_num(p)) + ", " +
            detail::json_kv("s", detail::json_num(s)) + ", " +
            detail::json_kv("pass", ok ? "true" : "false") + "}");
    }
    return pass;
}

// ---------------------------------------------------------------- spectrum

// Assemble and solve each requested cell, refine at N + 8, and test every
// modulus above the essential-radius bound for stability under refinement.
inline bool spectrum_body(const RunConfig& cfg, const std::string& dir,
                          RunManifest& man) {
    auto map = cfg.build_map();
    AssemblyOptions aop;
    aop.grid_size = cfg.grid;
    aop.threads = cfg.threads;

    std::vector<EigenRow> rows;
    std::ostringstream check;
    check << "kind,p,q,t,N,bound,margin,outliers,all_stable,pass\n";
    bool pass = true;

    std::map<std::pair<double, double>, double> bound_cache;

    for (const auto& cell : cfg.cells())
        for (const auto& kind_name : cfg.kinds) {
            OperatorKind kind = cfg.kind_for(kind_name, cell.t);
            auto params = AnisoParams::for_map(map, cell.p, cell.s, cell.t);

            GalerkinMatrix g = assemble_galerkin(kind, map, params, cfg.half_width, aop);
            SpectrumOptions sop;
            sop.compute_vectors = cfg.half_width <= kSpectrumVectorHalfWidth;
            sop.residual_count = cfg.residual_count;
            SpectrumResult res = spectrum(g, sop);
            append_eigen_rows(rows, res, g);

            if (cfg.dump_matrix) {
                std::string name = "matrix_" + kind.name() +
                                   detail::pair_tag(cell.p, cell.s) + "_t" +
                                   detail::num_tag(cell.t) + "_N" +
                                   std::to_string(cfg.half_width) + ".bin";
                write_file_with(dir + "/" + name,
                                [&](std::ostream& os) { write_matrix_dump(os, g); });
            }

            auto key = std::make_pair(cell.p, cell.s);
            auto it = bound_cache.find(key);
            if (it == bound_cache.end()) {
                BoundReport rb = rho_infty(map, ExponentPair(cell.p, cell.s),
                                           kBoundIterates, kBoundBaseGrid);
                it = bound_cache.emplace(key, rb.extrapolated).first;
            }
            double bound = it->second;

            GalerkinMatrix g_ref = assemble_galerkin(
                kind, map, params, cfg.half_width + kSpectrumRefineStep, aop);
            EssentialRadiusReport chk =
                essential_radius_check(res, g_ref, bound, kOutlierMargin);

            bool all_stable = chk.pass;
            check << kind.name() << ',' << fmt_double(cell.p) << ','
                  << fmt_double(cell.s - cell.p) << ',' << fmt_double(cell.t) << ','
                  << cfg.half_width << ',' << fmt_double(bound) << ','
                  << fmt_double(kOutlierMargin) << ',' << chk.outliers.size() << ','
                  << (all_stable ? 1 : 0) << ',' << (all_stable ? 1 : 0) << '\n';
            pass = pass && all_stable;
            man.verdicts.push_back(
                "{" + detail::json_kv("check", detail::json_str("essential_radius")) +
                ", " + detail::json_kv("kind", detail::json_str(kind.name())) + ", " +
                detail::json_kv("p", detail::json_num(cell.p)) + ", " +
                detail::json_kv("s", detail::json_num(cell.s)) + ", " +
                detail::json_kv("bound", detail::json_num(bound)) + ", " +
                detail::json_kv("outliers", std::to_string(chk.outliers.size())) +
                ", " + detail::json_kv("pass", all_stable ? "true" : "false") + "}");
        }

    write_file_with(dir + "/eigs.csv",
                    [&](std::ostream& os) { write_eigen_csv(os, rows); });
    write_text_file(dir + "/check.csv", check.str());
    return pass;
}

// ------------------------------------------------------------- determinant

// Traces and coefficients to order n_tr, zeros inside the configured disc,
// and the zeros matched against the eigenvalues of the first requested
// cell under the reciprocal convention.
inline bool determinant_body(const RunConfig& cfg, const std::string& dir,
                             RunManifest& man) {
    auto map = cfg.build_map();
    std::vector<double> traces;
    for (int n = 1; n <= cfg.n_tr; ++n) traces.push_back(trace_sum(map, n));
    DeterminantSeries ser = determinant_coeffs(traces, cfg.n_tr);
    std::vector<DeterminantZero> zeros = zeros_in_disc(ser, cfg.zero_radius);

    ParamCell cell = cfg.cells().front();
    auto params = AnisoParams::for_map(map, cell.p, cell.s, 2.0);
    AssemblyOptions aop;
    aop.grid_size = cfg.grid;
    aop.threads = cfg.threads;
    GalerkinMatrix g =
        assemble_galerkin(OperatorKind::L(), map, params, cfg.half_width, aop);
    SpectrumOptions sop;
    sop.compute_vectors = cfg.half_width <= kSpectrumVectorHalfWidth;
    sop.residual_count = cfg.residual_count;
    SpectrumResult res = spectrum(g, sop);

    ResonanceReport match = resonance_match(zeros, res.eigs, cfg.zero_radius);

    write_file_with(dir + "/determinant.csv", [&](std::ostream& os) {
        write_determinant_csv(os, ser, zeros);
    });
    write_file_with(dir + "/matching.csv",
                    [&](std::ostream& os) { write_resonance_csv(os, match); });

    bool flagged = false;
    for (const auto& p : match.pairs) flagged = flagged || p.flagged;
    bool pass = !flagged && match.unmatched_eigenvalues.empty();
    man.verdicts.push_back(
        "{" + detail::json_kv("check", detail::json_str("resonance_match")) + ", " +
        detail::json_kv("zeros", std::to_string(zeros.size())) + ", " +
        detail::json_kv("flagged", flagged ? "true" : "false") + ", " +
        detail::json_kv("unmatched",
                        std::to_string(match.unmatched_eigenvalues.size())) +
        ", " + detail::json_kv("pass", pass ? "true" : "false") + "}");
    return pass;
}

// ------------------------------------------------------------------ lynorm

// Iterated-norm records for one seeded function on every requested cell,
// raw and with the leading direction projected out, with the projected
// slope tested against the extrapolated essential-radius bound.
inline bool lynorm_body(const RunConfig& cfg, const std::string& dir,
                        RunManifest& man) {
    auto map = cfg.build_map();
    TrigPoly f = random_trig_poly(cfg.half_width, cfg.seed);

    bool pass = true;
    std::map<std::pair<double, double>, double> bound_cache;

    for (const auto& cell : cfg.cells())
        for (const auto& kind_name : cfg.kinds) {
            OperatorKind kind = cfg.kind_for(kind_name, cell.t);
            auto params = AnisoParams::for_map(map, cell.p, cell.s, cell.t);

            GrowthOptions gop;
            gop.grid = cfg.grid;
            GrowthRecord raw =
                norm_growth(kind, map, params, f, cfg.n_max, gop, "seeded");
            gop.project_leading = true;
            GrowthRecord proj =
                norm_growth(kind, map, params, f, cfg.n_max, gop, "seeded");

            auto key = std::make_pair(cell.p, cell.s);
            auto it = bound_cache.find(key);
            if (it == bound_cache.end()) {
                BoundReport rb = rho_infty(map, ExponentPair(cell.p, cell.s),
                                           kBoundIterates, kBoundBaseGrid);
                it = bound_cache.emplace(key, rb.extrapolated).first;
            }
            GrowthVerdict v = bound_comparison(raw, proj, it->second, kSlopeMargin);

            std::string stem = "growth_" + kind.name() +
                               detail::pair_tag(cell.p, cell.s) + "_t" +
                               detail::num_tag(cell.t);
            write_file_with(dir + "/" + stem + "_raw.csv",
                            [&](std::ostream& os) { write_growth_csv(os, raw); });
            write_file_with(dir + "/" + stem + "_projected.csv",
                            [&](std::ostream& os) { write_growth_csv(os, proj); });

            pass = pass && v.pass;
            man.verdicts.push_back(
                "{" + detail::json_kv("check", detail::json_str("slope_bound")) +
                ", " + detail::json_kv("kind", detail::json_str(kind.name())) +
                ", " + detail::json_kv("p", detail::json_num(cell.p)) + ", " +
                detail::json_kv("s", detail::json_num(cell.s)) + ", " +
                detail::json_kv("t", detail::json_num(cell.t)) + ", " +
                detail::json_kv("raw_slope", detail::json_num(v.raw_slope)) + ", " +
                detail::json_kv("projected_slope",
                                detail::json_num(v.projected_slope)) +
                ", " + detail::json_kv("bound", detail::json_num(v.bound_value)) +
                ", " + detail::json_kv("margin", detail::json_num(v.margin)) + ", " +
                detail::json_kv("pass", v.pass ? "true" : "false") + "}");
        }
    return pass;
}

// ----------------------------------------------------------------- runner

inline DriverResult run_subcommand(const std::string& subcommand, RunConfig cfg,
                                   const CliOverrides& ov) {
    DriverResult out;
    try {
        if (ov.seed_set) {
            cfg.seed = ov.seed;
            cfg.seed_given = true;
        }
        if (ov.threads > 0) cfg.threads = ov.threads;
        if (!ov.out_base.empty()) cfg.output_dir = ov.out_base;
        validate_for(cfg, subcommand);

        std::filesystem::path dir =
            std::filesystem::path(cfg.output_dir) /
            run_directory_name(cfg.text, cfg.seed, subcommand);
        std::filesystem::create_directories(dir);
        out.run_dir = dir.string();

        RunManifest man;
        man.subcommand = subcommand;
        man.seed = cfg.seed;
        man.seed_given = cfg.seed_given;
        man.threads = cfg.threads;
        man.config_text = cfg.text;
        write_manifest((dir / "manifest.txt").string(), man, false, 0);

        auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        if (subcommand == "bounds")
            pass = bounds_body(cfg, out.run_dir, man);
        else if (subcommand == "spectrum")
            pass = spectrum_body(cfg, out.run_dir, man);
        else if (subcommand == "determinant")
            pass = determinant_body(cfg, out.run_dir, man);
        else if (subcommand == "lynorm")
            pass = lynorm_body(cfg, out.run_dir, man);
        else
            throw ConfigError("unknown subcommand '" + subcommand + "'");
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        write_manifest((dir / "manifest.txt").string(), man, true, wall);
        out.exit_code = pass ? 0 : 1;
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "resource refusal: %s\n", e.what());
        out.exit_code = 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        out.exit_code = 2;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "resource refusal: out of memory\n");
        out.exit_code = 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        out.exit_code = 1;
    }
    return out;
}

}  // namespace anosov
