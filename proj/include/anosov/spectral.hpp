#pragma once

// Dense spectra of Galerkin sections and the essential-radius acceptance
// check.
//
// Everything funnels through LAPACK's zgeev.  Its balancing stage isolates
// eigenvalues of exactly-sparse weighted-permutation matrices before any QR
// iteration runs, which is why the closed-form assembly path matters: for a
// linear map the truncated operator's nonconstant block is nilpotent, and
// with exact zeros off the permutation pattern the solver returns the exact
// {1, 0, ...} spectrum instead of roundoff-sized pseudo-eigenvalues.
//
// BLAS threading is pinned to one thread so repeated runs reduce in the
// same order and reports stay byte-identical.

#include <complex>

// the system lapack.h only honors direct overrides of its complex typedefs
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/transfer.hpp"
#include "anosov/trig_poly.hpp"

extern "C" void openblas_set_num_threads(int);

namespace anosov {

inline void pin_blas_threads() { openblas_set_num_threads(1); }

struct EigenRecord {
    std::complex<double> value;
    double residual = std::numeric_limits<double>::quiet_NaN();
};

struct SpectrumOptions {
    bool compute_vectors = true;  // needed for residuals; skip for big sections
    int residual_count = 32;      // residuals for this many leading eigenvalues
};

struct SpectrumResult {
    std::vector<EigenRecord> eigs;  // descending modulus
    bool vectors_computed = false;
    int dim = 0;
};

namespace detail {

inline bool eig_order(const std::complex<double>& x, const std::complex<double>& y) {
    double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
}

}  // namespace detail

inline SpectrumResult spectrum(const GalerkinMatrix& m, SpectrumOptions opt = {}) {
    if (std::fabs(m.params.t - 2.0) > 1e-12)
        throw std::invalid_argument("spectra are only meaningful on the t = 2 space");
    pin_blas_threads();

    const lapack_int n = m.dim();
    std::vector<std::complex<double>> work = m.a;  // zgeev destroys its input
    std::vector<std::complex<double>> w(n);
    std::vector<std::complex<double>> vr;
    char jobvr = opt.compute_vectors ? 'V' : 'N';
    if (opt.compute_vectors) vr.resize(static_cast<std::size_t>(n) * n);

    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', jobvr, n, work.data(), n,
                                    w.data(), nullptr, 1,
                                    opt.compute_vectors ? vr.data() : nullptr,
                                    opt.compute_vectors ? n : 1);
    if (info != 0) {
        double amax = 0;
        for (const auto& z : m.a) amax = std::max(amax, std::abs(z));
        throw std::runtime_error("eigensolver failed (info = " + std::to_string(info) +
                                 ", dim = " + std::to_string(n) +
                                 ", max |entry| = " + std::to_string(amax) + ")");
    }

    std::vector<lapack_int> perm(n);
    for (lapack_int i = 0; i < n; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](lapack_int i, lapack_int j) {
        return detail::eig_order(w[i], w[j]);
    });

    SpectrumResult res;
    res.dim = n;
    res.vectors_computed = opt.compute_vectors;
    res.eigs.resize(n);
    for (lapack_int i = 0; i < n; ++i) res.eigs[i].value = w[perm[i]];

    if (opt.compute_vectors) {
        const int count = std::min<int>(opt.residual_count, n);
        for (int i = 0; i < count; ++i) {
            const std::complex<double>* v = vr.data() + static_cast<std::size_t>(perm[i]) * n;
            long double num = 0, den = 0;
            for (lapack_int r = 0; r < n; ++r) {
                std::complex<double> acc{0, 0};
                const std::complex<double>* arow = m.a.data() + r;
                for (lapack_int c = 0; c < n; ++c)
                    acc += arow[static_cast<std::size_t>(c) * n] * v[c];
                acc -= res.eigs[i].value * v[r];
                num += std::norm(acc);
                den += std::norm(v[r]);
            }
            res.eigs[i].residual = static_cast<double>(std::sqrt(num / den));
        }
    }
    return res;
}

struct InverseIterationResult {
    std::complex<double> value;
    double residual = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
};

// Shifted inverse iteration against a fixed section.  One LU factorization
// per shift; the near-singularity of (A - shift I) at a genuine eigenvalue
// is exactly what makes the iteration converge in a couple of steps.
inline InverseIterationResult refine_eigenvalue(const GalerkinMatrix& m,
                                                std::complex<double> shift,
                                                int max_iter = 25, double tol = 1e-12) {
    pin_blas_threads();
    const lapack_int n = m.dim();

    std::vector<std::complex<double>> lu;
    std::vector<lapack_int> ipiv(n);
    std::complex<double> used_shift = shift;
    for (int attempt = 0; attempt < 2; ++attempt) {
        lu = m.a;
        for (lapack_int i = 0; i < n; ++i)
            lu[static_cast<std::size_t>(i) * n + i] -= used_shift;
        lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lu.data(), n, ipiv.data());
        if (info == 0) break;
        if (info < 0 || attempt == 1)
            throw std::runtime_error("LU factorization failed (info = " + std::to_string(info) + ")");
        used_shift += std::complex<double>(1e-10 * (1 + std::abs(shift)), 0);
    }

    std::vector<std::complex<double>> v(n);
    std::uint64_t state = 0x517cc1b727220a95ULL;
    for (auto& z : v)
        z = {2 * unit_interval(splitmix64(state)) - 1, 2 * unit_interval(splitmix64(state)) - 1};

    auto normalize = [&](std::vector<std::complex<double>>& x) {
        long double acc = 0;
        for (const auto& z : x) acc += std::norm(z);
        double s = static_cast<double>(std::sqrt(acc));
        for (auto& z : x) z /= s;
        return s;
    };
    normalize(v);

    auto matvec = [&](const std::vector<std::complex<double>>& x,
                      std::vector<std::complex<double>>& y) {
        for (lapack_int r = 0; r < n; ++r) {
            std::complex<double> acc{0, 0};
            const std::complex<double>* arow = m.a.data() + r;
            for (lapack_int c = 0; c < n; ++c)
                acc += arow[static_cast<std::size_t>(c) * n] * x[c];
            y[r] = acc;
        }
    };

    InverseIterationResult out;
    std::vector<std::complex<double>> av(n);
    std::complex<double> mu_prev{std::numeric_limits<double>::infinity(), 0};
    for (int it = 1; it <= max_iter; ++it) {
        lapack_int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, lu.data(), n,
                                         ipiv.data(), v.data(), n);
        if (info != 0)
            throw std::runtime_error("triangular solve failed (info = " + std::to_string(info) + ")");
        normalize(v);
        matvec(v, av);
        std::complex<double> mu{0, 0};
        for (lapack_int i = 0; i < n; ++i) mu += std::conj(v[i]) * av[i];
        out.value = mu;
        out.iterations = it;
        if (std::abs(mu - mu_prev) < tol * std::max(1.0, std::abs(mu))) {
            out.converged = true;
            break;
        }
        mu_prev = mu;
    }
    long double num = 0;
    for (lapack_int i = 0; i < n; ++i) num += std::norm(av[i] - out.value * v[i]);
    out.residual = static_cast<double>(std::sqrt(num));
    return out;
}

struct OutlierRecord {
    std::complex<double> base_value;
    double base_residual = std::numeric_limits<double>::quiet_NaN();
    std::complex<double> refined_value;
    double modulus_change = 0;
    bool stable = false;
};

struct EssentialRadiusReport {
    double bound = 0;
    double margin = 0;
    std::vector<OutlierRecord> outliers;
    bool pass = true;  // vacuously true with no outliers
};

// Outliers above bound + margin must persist under refinement of the
// truncation; discretization artifacts drift, genuine point spectrum stays.
inline EssentialRadiusReport essential_radius_check(const SpectrumResult& base,
                                                    const SpectrumResult& refined,
                                                    double bound, double margin) {
    EssentialRadiusReport rep;
    rep.bound = bound;
    rep.margin = margin;
    for (const auto& e : base.eigs) {
        if (std::abs(e.value) <= bound + margin) break;  // sorted by modulus
        OutlierRecord rec;
        rec.base_value = e.value;
        rec.base_residual = e.residual;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : refined.eigs) {
            double d = std::abs(r.value - e.value);
            if (d < best) {
                best = d;
                rec.refined_value = r.value;
            }
        }
        rec.modulus_change = std::fabs(std::abs(rec.refined_value) - std::abs(rec.base_value));
        rec.stable = rec.modulus_change < margin / 4;
        rep.pass = rep.pass && rec.stable;
        rep.outliers.push_back(rec);
    }
    return rep;
}

inline EssentialRadiusReport essential_radius_check(const SpectrumResult& base,
                                                    const SpectrumResult& refined,
                                                    const BoundReport& bound, double margin) {
    return essential_radius_check(base, refined, bound.extrapolated, margin);
}

// Same check, but the refined spectrum is probed one outlier at a time by
// inverse iteration, so the larger section never needs a full eigensolve.
inline EssentialRadiusReport essential_radius_check(const SpectrumResult& base,
                                                    const GalerkinMatrix& refined_section,
                                                    double bound, double margin,
                                                    int max_refined = 16) {
    EssentialRadiusReport rep;
    rep.bound = bound;
    rep.margin = margin;
    int used = 0;
    for (const auto& e : base.eigs) {
        if (std::abs(e.value) <= bound + margin) break;
        OutlierRecord rec;
        rec.base_value = e.value;
        rec.base_residual = e.residual;
        if (used++ >= max_refined)
            throw std::runtime_error("too many outliers for targeted refinement");
        InverseIterationResult ref = refine_eigenvalue(refined_section, e.value);
        rec.refined_value = ref.value;
        rec.modulus_change = std::fabs(std::abs(ref.value) - std::abs(e.value));
        rec.stable = ref.converged && rec.modulus_change < margin / 4;
        rep.pass = rep.pass && rec.stable;
        rep.outliers.push_back(rec);
    }
    return rep;
}

inline EssentialRadiusReport essential_radius_check(const SpectrumResult& base,
                                                    const GalerkinMatrix& refined_section,
                                                    const BoundReport& bound, double margin,
                                                    int max_refined = 16) {
    return essential_radius_check(base, refined_section, bound.extrapolated, margin, max_refined);
}

}  // namespace anosov
