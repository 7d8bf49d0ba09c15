// Acceptance gate: eight end-to-end criteria covering the bound formulas,
// the truncated spectra, the dynamical determinant, the iterated-norm
// experiments, and the Fourier layer.  Each criterion prints exactly one
// PASS/FAIL line with its wall time; every tolerance is pinned here.  The
// exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "anosov/aniso.hpp"
#include "anosov/bounds.hpp"
#include "anosov/fredholm.hpp"
#include "anosov/growth.hpp"
#include "anosov/spectral.hpp"
#include "anosov/transfer.hpp"
#include "anosov/trig_poly.hpp"

using namespace anosov;

namespace {

constexpr double kNu = 0.38196601125010515;   // (3 - sqrt 5) / 2
constexpr double kNuSq = 0.14589803375031546; // contraction rate at (-2, 2)

SmoothToralMap cat_map() {
    return SmoothToralMap::linear(ToralAutomorphism(2, 1, 1, 1));
}

SmoothToralMap sheared(double amp) {
    return SmoothToralMap::conjugated(ToralAutomorphism(2, 1, 1, 1),
                                      ConjugacyDiffeo({{0, 1, {0.0, -amp / 2}}}, {}));
}

SmoothToralMap skewed(double amp) {
    return SmoothToralMap::conjugated(ToralAutomorphism(2, 1, 1, 1),
                                      ConjugacyDiffeo({{1, 1, {0.0, -amp / 2}}}, {}));
}

struct Detail {
    std::string text;
    bool ok = true;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!text.empty()) text += "; ";
            text += what;
        }
    }
};

int failures = 0;

void run_criterion(int id, const char* label, double budget_s,
                   const std::function<void(Detail&)>& body) {
    Detail d;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(d);
    } catch (const std::exception& e) {
        d.ok = false;
        d.text = std::string("exception: ") + e.what();
    }
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (wall > budget_s) {
        d.ok = false;
        if (!d.text.empty()) d.text += "; ";
        d.text += "over time budget";
    }
    std::printf("%s criterion %d [%6.1fs / %gs budget]: %s\n",
                d.ok ? "PASS" : "FAIL", id, wall, budget_s, label);
    if (!d.ok) {
        std::printf("     detail: %s\n", d.text.c_str());
        ++failures;
    }
    std::fflush(stdout);
}

std::string num(double x) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.6g", x);
    return b;
}

}  // namespace

// 1. On the anti-symmetric line both radii collapse onto the golden rate.
static void criterion1(Detail& d) {
    auto cat = cat_map();
    ExponentPair e{-1, 1};
    for (auto rep : {rho_infty(cat, e, 8, 32), rho_one(cat, e, 8, 32)}) {
        for (const auto& row : rep.entries) {
            d.check(std::fabs(row.raw_value - kNu) <= 1e-10,
                    "raw n=" + std::to_string(row.n) + " off: " + num(row.raw_value));
            d.check(std::fabs(row.accelerated_value - kNu) <= 1e-10,
                    "accelerated n=" + std::to_string(row.n) + " off");
        }
        d.check(std::fabs(rep.extrapolated - kNu) <= 1e-10, "extrapolated off");
    }
}

// 2. The cat determinant is exactly 1 - z: coefficients, the zero, and the
//    periodic-point counts from both the enumeration and the closed form.
static void criterion2(Detail& d) {
    auto cat = cat_map();
    std::vector<double> traces;
    for (int n = 1; n <= 10; ++n) traces.push_back(trace_sum(cat, n));
    DeterminantSeries ser = determinant_coeffs(traces, 10);
    d.check(std::fabs(ser.coeffs[0] - 1.0) <= 1e-13, "c_0 != 1");
    d.check(std::fabs(ser.coeffs[1] + 1.0) <= 1e-13, "c_1 != -1");
    for (int n = 2; n <= 10; ++n)
        d.check(std::fabs(ser.coeffs[static_cast<std::size_t>(n)]) <= 1e-13,
                "c_" + std::to_string(n) + " = " + num(ser.coeffs[static_cast<std::size_t>(n)]));

    auto zeros = zeros_in_disc(ser, 1.2);
    bool found = false;
    for (const auto& z : zeros) found = found || std::abs(z.z - 1.0) <= 1e-10;
    d.check(found, "no zero at 1 within 1e-10");

    const long long expected[] = {1, 5, 16, 45};
    IntMat2 m{2, 1, 1, 1}, power{1, 0, 0, 1};
    for (int n = 1; n <= 4; ++n) {
        power = power * m;
        IntMat2 shifted{power.a - 1, power.b, power.c, power.d - 1};
        long long closed = std::llabs(shifted.det());
        auto orbits = enumerate_periodic(cat, n);
        d.check(closed == expected[n - 1], "closed-form count n=" + std::to_string(n));
        d.check(static_cast<long long>(orbits.points.size()) == expected[n - 1],
                "enumerated count n=" + std::to_string(n) + ": " +
                    std::to_string(orbits.points.size()));
    }
}

// 3. Truncated cat spectra are rank one at every truncation: a simple unit
//    eigenvalue from the fixed constant mode and nothing else above the
//    nilpotent floor, exactly as the mode-orbit structure predicts.
static void criterion3(Detail& d) {
    auto cat = cat_map();
    auto params = AnisoParams::for_map(cat, -2, 2, 2);
    for (int N : {8, 16, 32}) {
        auto g = assemble_galerkin(OperatorKind::L(), cat, params, N, {});
        SpectrumOptions opt;
        opt.compute_vectors = false;
        auto res = spectrum(g, opt);
        int above = 0;
        for (const auto& e : res.eigs)
            if (std::abs(e.value) > 1e-6) ++above;
        d.check(above == 1, "N=" + std::to_string(N) + ": " + std::to_string(above) +
                                " eigenvalues above 1e-6");
        d.check(std::abs(res.eigs[0].value - 1.0) <= 1e-10,
                "N=" + std::to_string(N) + ": top eigenvalue " +
                    num(std::abs(res.eigs[0].value)));
        d.check(std::abs(res.eigs[1].value) < 1e-8,
                "N=" + std::to_string(N) + ": second eigenvalue " +
                    num(std::abs(res.eigs[1].value)));
    }
}

// 4. A volume-preserving conjugated map keeps the unit eigenvalue as its
//    only outlier, unit traces, and the determinant zero at 1.
static void criterion4(Detail& d) {
    auto vp = sheared(0.03);
    auto params = AnisoParams::for_map(vp, -2, 2, 2);

    std::vector<double> traces;
    for (int n = 1; n <= 6; ++n) {
        traces.push_back(trace_sum(vp, n));
        d.check(std::fabs(traces.back() - 1.0) <= 1e-8,
                "t_" + std::to_string(n) + " = " + num(traces.back()));
    }
    DeterminantSeries ser = determinant_coeffs(traces, 6);
    auto zeros = zeros_in_disc(ser, 1.2);
    bool covered = false;
    for (const auto& z : zeros) covered = covered || std::abs(z.z - 1.0) <= z.error_bar;
    d.check(covered, "no zero covering 1 within its error bar");

    double bound = rho_infty(vp, ExponentPair{-2, 2}, 8, 64).extrapolated;
    auto g = assemble_galerkin(OperatorKind::L(), vp, params, 32, {});
    SpectrumOptions opt;
    opt.compute_vectors = false;
    auto res = spectrum(g, opt);
    int outliers = 0;
    for (const auto& e : res.eigs)
        if (std::abs(e.value) > bound + 1e-3) {
            ++outliers;
            d.check(std::abs(e.value - 1.0) <= 2e-3,
                    "outlier at modulus " + num(std::abs(e.value)));
        }
    d.check(outliers == 1, std::to_string(outliers) + " outliers");
}

// 5. Across three map types and four exponent pairs the bound family is
//    coherent: the L1 radius never exceeds the sup radius, the averaged
//    forms agree, and the theorem prefactor decreases toward one in t.
static void criterion5(Detail& d) {
    auto cat = cat_map();
    auto vp = sheared(0.02);
    auto skew = skewed(0.03);
    const SmoothToralMap* maps[] = {&cat, &vp, &skew};
    const char* names[] = {"linear", "shear", "skew"};
    const double pairs[][2] = {{-1, 1}, {-2, 2}, {-1.5, 2}, {-0.5, 0.5}};

    for (int mi = 0; mi < 3; ++mi) {
        ExponentField base(*maps[mi], 6, 32), fine(*maps[mi], 6, 64);
        for (const auto& pr : pairs) {
            ExponentPair e{pr[0], pr[1]};
            std::string tag = std::string(names[mi]) + " (" + num(pr[0]) + "," +
                              num(pr[1]) + ")";
            auto ri = compute_bound(base, fine, BoundFormula::rho_infty, e);
            auto r1 = compute_bound(base, fine, BoundFormula::rho_one, e);
            for (std::size_t k = 0; k < ri.entries.size(); ++k)
                d.check(r1.entries[k].raw_value <= ri.entries[k].raw_value + 1e-10,
                        tag + ": rho_1 above rho_infty at row " + std::to_string(k));

            double prev = std::numeric_limits<double>::infinity();
            for (double t : {1.5, 2.0, 4.0}) {
                auto u = compute_bound(base, fine, BoundFormula::propL1_u, e, t);
                auto s = compute_bound(base, fine, BoundFormula::propL1_s, e, t);
                d.check(std::fabs(u.extrapolated - s.extrapolated) <= 1e-3,
                        tag + " t=" + num(t) + ": averaged forms differ by " +
                            num(std::fabs(u.extrapolated - s.extrapolated)));
                auto th = compute_bound(base, fine, BoundFormula::thm1, e, t);
                d.check(th.extrapolated <= prev + 1e-12,
                        tag + " t=" + num(t) + ": prefactor not monotone");
                d.check(th.extrapolated >= ri.extrapolated - 1e-12,
                        tag + " t=" + num(t) + ": theorem bound below rho_infty");
                prev = th.extrapolated;
            }
        }
    }
}

// 6. Iterated norms on the cat map: the projected slope reaches the
//    contraction rate, a one-step two-parameter fit explains the ensemble,
//    and the records do not depend on the integrability exponent.
static void criterion6(Detail& d) {
    auto cat = cat_map();
    auto params = AnisoParams::for_map(cat, -2, 2, 2);

    GrowthOptions opt;
    opt.project_leading = true;
    TrigPoly f = random_trig_poly(32, 1);
    GrowthRecord rec = norm_growth(OperatorKind::L(), cat, params, f, 8, opt, "seed 1");
    d.check(!rec.aliasing_failure, "aliasing monitor fired");
    d.check(rec.slope <= std::log(0.14590) + 0.02,
            "projected slope " + num(rec.slope) + " above log rate + 0.02");

    auto ens = ensemble_growth(OperatorKind::L(), cat, params,
                               random_ensemble(16, 20, 0), 6, {});
    TwoNormFit fit = fit_two_norm(ens, 1, kNuSq);
    d.check(fit.residual < 0.05,
            "one-step fit residual " + num(fit.residual) + " >= 5%");

    TrigPoly mode = TrigPoly::single_mode(8, 2, -3);
    std::vector<GrowthRecord> recs;
    for (double t : {1.5, 2.0, 4.0})
        recs.push_back(norm_growth(OperatorKind::L(), cat,
                                   AnisoParams::for_map(cat, -2, 2, t), mode, 6, {},
                                   "mode"));
    for (std::size_t n = 0; n < recs[0].strong.size(); ++n)
        for (std::size_t i = 1; i < recs.size(); ++i) {
            if (recs[0].strong[n] < 1e-10) {
                d.check(recs[i].strong[n] < 1e-10, "depleted entry regrew");
                continue;
            }
            d.check(std::fabs(recs[i].strong[n] - recs[0].strong[n]) <= 1e-10,
                    "norms differ across t at n=" + std::to_string(n));
        }
}

// 7. The weighted kinds on a non-volume-preserving chart with integer
//    transverse exponent obey their dual essential-radius bounds once the
//    leading direction is projected out.
static void criterion7(Detail& d) {
    auto skew = skewed(0.03);
    double rho = rho_infty(skew, ExponentPair{-2, 2}, 8, 64).extrapolated;
    TrigPoly f = random_trig_poly(12, 3);
    GrowthOptions opt;
    opt.project_leading = true;

    // q = s - p = 4 stays integral, as the chart transport requires
    auto params_L = AnisoParams::for_map(skew, -2, 2, 1.25);
    GrowthRecord lt =
        norm_growth(OperatorKind::Lt(1.25), skew, params_L, f, 8, opt, "seed 3");
    d.check(!lt.aliasing_failure, "Lt aliasing monitor fired");
    d.check(lt.slope <= std::log(rho) + 0.05,
            "Lt slope " + num(lt.slope) + " above log bound + 0.05");

    // for the adjoint-side kind the dual pair (-s, -p) is again (-2, 2)
    auto params_M = AnisoParams::for_map(skew, -2, 2, 8.0);
    GrowthRecord mt =
        norm_growth(OperatorKind::Mt(8.0), skew, params_M, f, 8, opt, "seed 3");
    d.check(!mt.aliasing_failure, "Mt aliasing monitor fired");
    d.check(mt.slope <= std::log(rho) + 0.05,
            "Mt slope " + num(mt.slope) + " above log bound + 0.05");
}

// 8. Fourier-layer identities: Parseval at t = 2, the multiplier round
//    trip, differentials against finite differences, and bitwise
//    reproducibility of reruns.
static void criterion8(Detail& d) {
    auto cat = cat_map();
    auto params = AnisoParams::for_map(cat, -1.5, 2, 2);
    for (int i = 0; i < 100; ++i) {
        TrigPoly f = random_trig_poly(8, static_cast<std::uint64_t>(i));
        double quad = aniso_norm(f, params);
        double pars = parseval_norm(f, params);
        d.check(std::fabs(quad - pars) <= 1e-10 * std::max(1.0, pars),
                "Parseval mismatch at seed " + std::to_string(i));
    }

    TrigPoly f = random_trig_poly(10, 77);
    TrigPoly rt = apply_multiplier(apply_multiplier(f, params),
                                   params, MultiplierDirection::inverse);
    for (long long k1 = -10; k1 <= 10; ++k1)
        for (long long k2 = -10; k2 <= 10; ++k2)
            d.check(std::abs(rt.coeff(k1, k2) - f.coeff(k1, k2)) <= 1e-13,
                    "multiplier round trip at (" + std::to_string(k1) + "," +
                        std::to_string(k2) + ")");

    auto vp = sheared(0.03);
    const double h = 1e-5;
    auto wrap = [](double x) { return x - std::round(x); };
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            Vec2 w{0.13 + 0.17 * i, 0.29 + 0.19 * j};
            Mat2 dm = vp.differential(w, 1);
            Vec2 fx1 = vp.evaluate({w.x + h, w.y}), fx0 = vp.evaluate({w.x - h, w.y});
            Vec2 fy1 = vp.evaluate({w.x, w.y + h}), fy0 = vp.evaluate({w.x, w.y - h});
            double fd[4] = {wrap(fx1.x - fx0.x) / (2 * h), wrap(fy1.x - fy0.x) / (2 * h),
                            wrap(fx1.y - fx0.y) / (2 * h), wrap(fy1.y - fy0.y) / (2 * h)};
            double an[4] = {dm.a, dm.b, dm.c, dm.d};
            for (int c = 0; c < 4; ++c)
                d.check(std::fabs(fd[c] - an[c]) <= 1e-6,
                        "differential entry " + std::to_string(c) + " off by " +
                            num(std::fabs(fd[c] - an[c])));
        }

    TrigPoly r1 = random_trig_poly(16, 123), r2 = random_trig_poly(16, 123);
    bool same = true;
    for (long long k1 = -16; k1 <= 16 && same; ++k1)
        for (long long k2 = -16; k2 <= 16 && same; ++k2)
            same = r1.coeff(k1, k2) == r2.coeff(k1, k2);
    d.check(same, "seeded generator not reproducible");

    auto g1 = apply_operator(OperatorKind::L(), vp, f);
    auto g2 = apply_operator(OperatorKind::L(), vp, f);
    bool op_same = g1.half_width() == g2.half_width();
    for (long long k1 = -g1.half_width(); k1 <= g1.half_width() && op_same; ++k1)
        for (long long k2 = -g1.half_width(); k2 <= g1.half_width() && op_same; ++k2)
            op_same = g1.coeff(k1, k2) == g2.coeff(k1, k2);
    d.check(op_same, "operator application not bitwise reproducible");

    double n1 = aniso_norm(f, params), n2 = aniso_norm(f, params);
    d.check(n1 == n2, "norm quadrature not bitwise reproducible");
}

int main() {
    run_criterion(1, "spectral radii collapse onto the golden rate", 5, criterion1);
    run_criterion(2, "cat determinant is 1 - z with matching point counts", 10,
                  criterion2);
    run_criterion(3, "truncated cat spectra are rank one", 60, criterion3);
    run_criterion(4, "volume-preserving chart keeps the unit outlier", 300,
                  criterion4);
    run_criterion(5, "bound family is coherent across maps and exponents", 120,
                  criterion5);
    run_criterion(6, "norm decay, two-norm fit, and t independence", 180, criterion6);
    run_criterion(7, "weighted kinds obey their dual bounds on a skew chart", 300,
                  criterion7);
    run_criterion(8, "Fourier layer identities and reproducibility", 60, criterion8);
    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures;
}
