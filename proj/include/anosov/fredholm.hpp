#pragma once

// Periodic points, trace sums, and the dynamical determinant
// d(z) = exp(-sum_n z^n/n t_n) with t_n the weighted periodic-point sums.
//
// Fixed points of T^n are enumerated exactly: for a linear map they are the
// rational lattice B^{-1}Z^2 / Z^2 with B = M^n - I, parametrized through an
// integer Smith-type diagonalization of B, so no orbit can be missed and the
// count |det B| is provable.  Conjugated maps inherit the points through the
// chart inverse, and at a fixed point the differential is similar to M^n, so
// the weights 1/|det(D_x T^n - I)| are conjugation-invariant up to roundoff.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/geometry.hpp"
#include "anosov/spectral.hpp"
#include "anosov/torus_map.hpp"

namespace anosov {

inline constexpr int kMaxPeriod = 12;

struct SmithDecomposition {
    IntMat2 u, v;              // unimodular, u * b * v = diag(d1, d2)
    long long d1 = 1, d2 = 1;  // positive, d1 divides d2
};

inline SmithDecomposition smith_normal_form(const IntMat2& input) {
    SmithDecomposition s;
    IntMat2 b = input;

    auto swap_rows = [&] {
        std::swap(b.a, b.c);
        std::swap(b.b, b.d);
        std::swap(s.u.a, s.u.c);
        std::swap(s.u.b, s.u.d);
    };
    auto swap_cols = [&] {
        std::swap(b.a, b.b);
        std::swap(b.c, b.d);
        std::swap(s.v.a, s.v.b);
        std::swap(s.v.c, s.v.d);
    };
    auto row1_minus = [&](long long q) {  // R1 -= q R0
        b.c -= q * b.a;
        b.d -= q * b.b;
        s.u.c -= q * s.u.a;
        s.u.d -= q * s.u.b;
    };
    auto col1_minus = [&](long long q) {  // C1 -= q C0
        b.b -= q * b.a;
        b.d -= q * b.c;
        s.v.b -= q * s.v.a;
        s.v.d -= q * s.v.c;
    };

    for (int guard = 0; guard < 256; ++guard) {
        if (b.a == 0) {
            if (b.c != 0) swap_rows();
            else if (b.b != 0) swap_cols();
            else if (b.d != 0) {
                swap_rows();
                swap_cols();
            } else
                break;
        }
        while (b.c != 0) {
            row1_minus(b.c / b.a);
            if (b.c != 0) swap_rows();
        }
        while (b.b != 0) {
            col1_minus(b.b / b.a);
            if (b.b != 0) swap_cols();
        }
        if (b.c != 0) continue;  // the column pass can refill the lower entry
        if (b.a != 0 && b.d % b.a != 0) {
            // C0 += C1 couples the diagonal entries so the next pass leaves
            // their gcd in the corner
            b.a += b.b;
            b.c += b.d;
            s.v.a += s.v.b;
            s.v.c += s.v.d;
            continue;
        }
        break;
    }

    if (b.a < 0) {
        b.a = -b.a;
        s.u.a = -s.u.a;
        s.u.b = -s.u.b;
    }
    if (b.d < 0) {
        b.d = -b.d;
        s.u.c = -s.u.c;
        s.u.d = -s.u.d;
    }
    s.d1 = b.a;
    s.d2 = b.d;
    return s;
}

struct PeriodicOrbitData {
    int period = 0;
    long long count = 0;  // |det(M^n - I)|
    std::vector<Vec2> points;
    std::vector<Mat2> differentials;  // D_x T^n
    std::vector<double> weights;      // 1 / |det(D_x T^n - I)|
    double max_residual = 0;          // max torus distance |T^n x - x|
};

inline PeriodicOrbitData enumerate_periodic(const SmoothToralMap& map, int n,
                                            int max_period = kMaxPeriod) {
    if (n < 1 || n > max_period)
        throw std::invalid_argument("period must lie in [1, " +
                                    std::to_string(max_period) + "]");
    IntMat2 mn = map.automorphism().matrix().power(n);
    IntMat2 b = mn;
    b.a -= 1;
    b.d -= 1;
    long long q = b.det();
    if (q == 0) throw std::domain_error("M^n - I is singular");
    q = std::llabs(q);
    if (q > 20'000'000)
        throw std::overflow_error("periodic point count " + std::to_string(q) +
                                  " exceeds the enumeration budget");

    SmithDecomposition s = smith_normal_form(b);

    PeriodicOrbitData out;
    out.period = n;
    out.count = q;
    out.points.reserve(q);
    out.differentials.reserve(q);
    out.weights.reserve(q);

    for (long long i = 0; i < s.d1; ++i)
        for (long long j = 0; j < s.d2; ++j) {
            // x = V (i/d1, j/d2), assembled over the common denominator q so
            // the lattice point is exact
            long long n1 = ((s.v.a * i * s.d2 + s.v.b * j * s.d1) % q + q) % q;
            long long n2 = ((s.v.c * i * s.d2 + s.v.d * j * s.d1) % q + q) % q;
            Vec2L lin{static_cast<long double>(n1) / q, static_cast<long double>(n2) / q};

            Vec2L x = lin;
            if (!map.is_linear()) x = map.chart().inverse(lin, 1e-13L);
            Vec2 xd = {static_cast<double>(x.x), static_cast<double>(x.y)};

            Mat2L d = map.is_linear() ? mn.as<long double>()
                                      : map.differential_ld(x, n);
            Mat2L dmi = d;
            dmi.a -= 1;
            dmi.d -= 1;
            long double det = dmi.det();

            out.points.push_back(xd);
            out.differentials.push_back(d.cast<double>());
            out.weights.push_back(static_cast<double>(1.0L / std::fabs(det)));
            out.max_residual =
                std::max(out.max_residual, torus_dist(map.evaluate(xd, n), xd));
        }
    return out;
}

// Kahan-compensated sum of the periodic-point weights
inline double trace_sum(const SmoothToralMap& map, int n, int max_period = kMaxPeriod) {
    PeriodicOrbitData orbits = enumerate_periodic(map, n, max_period);
    double sum = 0, comp = 0;
    for (std::size_t i = 0; i < orbits.weights.size(); ++i) {
        Mat2 dmi = orbits.differentials[i];
        dmi.a -= 1;
        dmi.d -= 1;
        if (std::fabs(dmi.det()) < 1e-12)
            throw std::runtime_error("near-singular D T^n - I at a periodic point");
        double y = orbits.weights[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

struct DeterminantSeries {
    std::vector<double> traces;  // t_1 .. t_N
    std::vector<double> coeffs;  // c_0 .. c_N
    double tail_ratio = 0;       // geometric trend of |t_n/t_{n-1}|, last three

    int order() const { return static_cast<int>(traces.size()); }

    std::complex<double> evaluate(std::complex<double> z) const {
        std::complex<double> acc{0, 0};
        for (std::size_t m = coeffs.size(); m-- > 0;) acc = acc * z + coeffs[m];
        return acc;
    }

    std::complex<double> derivative(std::complex<double> z) const {
        std::complex<double> acc{0, 0};
        for (std::size_t m = coeffs.size(); m-- > 1;)
            acc = acc * z + static_cast<double>(m) * coeffs[m];
        return acc;
    }

    std::complex<double> evaluate_exponential(std::complex<double> z) const {
        std::complex<double> expo{0, 0};
        std::complex<double> zn{1, 0};
        for (std::size_t n = 1; n <= traces.size(); ++n) {
            zn *= z;
            expo += zn * (traces[n - 1] / static_cast<double>(n));
        }
        return std::exp(-expo);
    }

    // truncation-error envelope at |z| = zeta, extrapolating the trace trend
    // over a finite horizon of twice the truncation order
    double tail_bound(double zeta) const {
        if (traces.empty()) return 0;
        const int n_tr = order();
        double tn = std::fabs(traces.back());
        long double acc = 0;
        long double zn = std::pow(static_cast<long double>(zeta), n_tr);
        long double ratio = tail_ratio;
        long double level = tn;
        for (int n = n_tr + 1; n <= 3 * n_tr; ++n) {
            zn *= zeta;
            level *= ratio;
            acc += level * zn / n;
        }
        return static_cast<double>(acc);
    }
};

inline DeterminantSeries determinant_coeffs(const std::vector<double>& traces, int n_tr) {
    if (n_tr < 1 || static_cast<int>(traces.size()) < n_tr)
        throw std::invalid_argument("need trace sums for every order up to the truncation");

    DeterminantSeries s;
    s.traces.assign(traces.begin(), traces.begin() + n_tr);
    s.coeffs.assign(n_tr + 1, 0.0);
    s.coeffs[0] = 1.0;
    for (int m = 1; m <= n_tr; ++m) {
        long double acc = 0;
        for (int n = 1; n <= m; ++n) acc += s.traces[n - 1] * s.coeffs[m - n];
        s.coeffs[m] = static_cast<double>(-acc / m);
    }

    long double geo = 1;
    int used = 0;
    for (int n = n_tr; n >= 2 && used < 3; --n) {
        double prev = std::fabs(s.traces[n - 2]);
        if (prev < 1e-300) break;
        geo *= std::fabs(s.traces[n - 1]) / prev;
        ++used;
    }
    s.tail_ratio = used ? static_cast<double>(std::pow(geo, 1.0L / used)) : 0.0;
    return s;
}

struct DeterminantZero {
    std::complex<double> z;
    double error_bar = 0;
    bool clustered = false;
};

inline std::vector<DeterminantZero> zeros_in_disc(const DeterminantSeries& s,
                                                  double radius, double safety = 0.1) {
    if (!(radius > 0)) throw std::invalid_argument("disc radius must be positive");

    double cmax = 0;
    for (double c : s.coeffs) cmax = std::max(cmax, std::fabs(c));
    int deg = static_cast<int>(s.coeffs.size()) - 1;
    while (deg > 0 && std::fabs(s.coeffs[deg]) <= 1e-14 * cmax) --deg;
    if (deg == 0) return {};

    // companion matrix of the monic normalization, column-major
    pin_blas_threads();
    std::vector<std::complex<double>> comp(static_cast<std::size_t>(deg) * deg, {0, 0});
    for (int i = 1; i < deg; ++i) comp[static_cast<std::size_t>(i - 1) * deg + i] = {1, 0};
    for (int i = 0; i < deg; ++i)
        comp[static_cast<std::size_t>(deg - 1) * deg + i] = -s.coeffs[i] / s.coeffs[deg];
    std::vector<std::complex<double>> w(deg);
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', deg, comp.data(), deg,
                                    w.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw std::runtime_error("companion eigensolve failed (info = " +
                                 std::to_string(info) + ")");

    std::vector<DeterminantZero> out;
    const double cutoff = radius * (1.0 - safety);
    for (const auto& root : w) {
        if (std::abs(root) >= cutoff) continue;
        DeterminantZero zr;
        zr.z = root;
        double tail = s.tail_bound(std::abs(root));
        double slope = std::abs(s.derivative(root));
        zr.error_bar = tail / std::max(slope, 1e-300) +
                       std::numeric_limits<double>::epsilon();
        out.push_back(zr);
    }
    std::sort(out.begin(), out.end(), [](const DeterminantZero& a, const DeterminantZero& b) {
        double ma = std::abs(a.z), mb = std::abs(b.z);
        if (ma != mb) return ma < mb;
        return a.z.real() < b.z.real();
    });
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (std::abs(out[i].z - out[j].z) < out[i].error_bar + out[j].error_bar) {
                out[i].clustered = true;
                out[j].clustered = true;
            }
    return out;
}

// Determinant zeros against transfer-operator eigenvalues under the
// reciprocal convention gamma = 1/z, pinned by the cat map where both sides
// are computed independently and meet at 1.
struct ResonancePair {
    std::complex<double> zero;
    double zero_error_bar = 0;
    std::complex<double> eigenvalue;
    double mismatch = 0;
    bool flagged = false;  // mismatch above tolerance
};

struct ResonanceReport {
    std::vector<ResonancePair> pairs;
    std::vector<std::complex<double>> unmatched_eigenvalues;
    double tolerance = 0;
};

inline ResonanceReport resonance_match(const std::vector<DeterminantZero>& zeros,
                                       const std::vector<EigenRecord>& eigs,
                                       double radius, double tolerance = 1e-3,
                                       double noise_floor = 1e-6) {
    ResonanceReport rep;
    rep.tolerance = tolerance;
    std::vector<bool> matched(eigs.size(), false);

    for (const auto& zr : zeros) {
        std::complex<double> target = 1.0 / zr.z;
        ResonancePair pr;
        pr.zero = zr.z;
        pr.zero_error_bar = zr.error_bar;
        pr.mismatch = std::numeric_limits<double>::infinity();
        std::size_t best = eigs.size();
        for (std::size_t i = 0; i < eigs.size(); ++i) {
            double d = std::abs(eigs[i].value - target);
            if (d < pr.mismatch) {
                pr.mismatch = d;
                pr.eigenvalue = eigs[i].value;
                best = i;
            }
        }
        pr.flagged = !(pr.mismatch <= tolerance);
        if (best < eigs.size() && !pr.flagged) matched[best] = true;
        rep.pairs.push_back(pr);
    }

    for (std::size_t i = 0; i < eigs.size(); ++i) {
        double mod = std::abs(eigs[i].value);
        if (!matched[i] && mod > 1.0 / radius && mod > noise_floor)
            rep.unmatched_eigenvalues.push_back(eigs[i].value);
    }
    return rep;
}

}  // namespace anosov
