#pragma once

// The anisotropic symbol a_{p,q}, the diagonal multiplier it generates, and
// the W^{p,q,t} norms, all in a fixed frame adapted to the stable direction.
//
// Frequencies follow the continuous convention: a lattice wavevector k
// enters the symbol as xi = 2 pi (e_s . k), eta = 2 pi (e_s^perp . k).  The
// L^t norm is evaluated by synthesizing the weighted polynomial on an
// oversampled grid; at t = 2 this reproduces the Parseval value exactly
// because |g|^2 is band-limited by twice the box width.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "anosov/geometry.hpp"
#include "anosov/torus_map.hpp"
#include "anosov/trig_poly.hpp"

namespace anosov {

struct AnisoParams {
    double p = 0;
    double q = 0;
    double t = 2;
    Vec2 stable_dir{1, 0};

    AnisoParams(double p_, double q_, double t_, Vec2 e_s)
        : p(p_), q(q_), t(t_), stable_dir(e_s) {
        if (!(t > 1.0) || !std::isfinite(t))
            throw std::invalid_argument("norm exponent t must lie in (1, inf)");
        double n = e_s.norm();
        if (std::fabs(n - 1.0) > 1e-9)
            throw std::invalid_argument("stable direction must be a unit vector");
        stable_dir = e_s * (1.0 / n);
    }

    double s() const { return p + q; }

    // the (p, s) convention used by the radii: q = s - p
    static AnisoParams from_exponents(double p, double s, double t, Vec2 e_s) {
        return AnisoParams(p, s - p, t, e_s);
    }

    static AnisoParams for_map(const SmoothToralMap& map, double p, double s, double t) {
        return from_exponents(p, s, t,
                              map.automorphism().dir_stable().cast<double>());
    }

    // companion parameters of the weak norm in the two-norm inequalities
    AnisoParams weaker() const { return AnisoParams(p - 1, q, t, stable_dir); }
};

inline double symbol_value(const AnisoParams& a, long long k1, long long k2) {
    Vec2 k{static_cast<double>(k1), static_cast<double>(k2)};
    double xi = 2 * M_PI * a.stable_dir.dot(k);
    double eta = 2 * M_PI * a.stable_dir.perp().dot(k);
    return std::pow(1.0 + xi * xi + eta * eta, a.p / 2) * std::pow(1.0 + xi * xi, a.q / 2);
}

enum class MultiplierDirection { forward, inverse };

inline TrigPoly apply_multiplier(const TrigPoly& f, const AnisoParams& a,
                                 MultiplierDirection dir = MultiplierDirection::forward) {
    TrigPoly out(f.half_width());
    for (long long k1 = -f.half_width(); k1 <= f.half_width(); ++k1)
        for (long long k2 = -f.half_width(); k2 <= f.half_width(); ++k2) {
            double w = symbol_value(a, k1, k2);
            if (dir == MultiplierDirection::inverse) w = 1.0 / w;
            out.coeff(k1, k2) = f.coeff(k1, k2) * w;
        }
    return out;
}

// default L^t quadrature grid: 4x oversampling, kept odd
inline int norm_grid_for(int half_width) { return 4 * half_width + 1; }

inline double aniso_norm(const TrigPoly& f, const AnisoParams& a, int grid = 0) {
    if (grid == 0) grid = norm_grid_for(f.half_width());
    if (grid < f.width())
        throw std::invalid_argument("quadrature grid must be at least 2N+1");
    TrigPoly g = apply_multiplier(f, a, MultiplierDirection::forward);
    std::vector<std::complex<double>> vals = g.synthesize(grid);
    long double acc = 0;
    for (const auto& v : vals) acc += std::pow(static_cast<long double>(std::abs(v)), a.t);
    acc /= static_cast<long double>(vals.size());  // cell area on the unit-measure torus
    return static_cast<double>(std::pow(acc, 1.0L / a.t));
}

// the t = 2 value straight from the coefficients
inline double parseval_norm(const TrigPoly& f, const AnisoParams& a) {
    long double acc = 0;
    for (long long k1 = -f.half_width(); k1 <= f.half_width(); ++k1)
        for (long long k2 = -f.half_width(); k2 <= f.half_width(); ++k2) {
            long double w = symbol_value(a, k1, k2) * std::abs(f.coeff(k1, k2));
            acc += w * w;
        }
    return static_cast<double>(std::sqrt(acc));
}

struct CompositionInfo {
    double tail_fraction = 0;  // outer-shell l2 fraction, a proxy for spectral tail
    bool aliasing_flag = false;
};

namespace detail {

enum class ChartLeg { with_inverse, with_forward };

inline TrigPoly compose_with_chart(const TrigPoly& f, const ConjugacyDiffeo& phi,
                                   int half_out, ChartLeg leg, CompositionInfo* info) {
    const int grid = 2 * half_out + 1;
    std::vector<std::complex<double>> vals(static_cast<std::size_t>(grid) * grid);
    for (int g1 = 0; g1 < grid; ++g1)
        for (int g2 = 0; g2 < grid; ++g2) {
            Vec2L x{static_cast<long double>(g1) / grid, static_cast<long double>(g2) / grid};
            Vec2L y = (leg == ChartLeg::with_inverse) ? phi.inverse(x) : phi.forward(x);
            vals[static_cast<std::size_t>(g1) * grid + g2] = f.evaluate(y.cast<double>());
        }
    TrigPoly out = TrigPoly::analyze(std::move(vals), grid, half_out);
    double tail = out.edge_fraction();
    if (info) {
        info->tail_fraction = tail;
        info->aliasing_flag = tail > 1e-8;
    }
    return out;
}

}  // namespace detail

// f . Phi^-1 re-expanded to the box |k| <= half_out
inline TrigPoly pullback(const TrigPoly& f, const ConjugacyDiffeo& phi, int half_out,
                         CompositionInfo* info = nullptr) {
    if (phi.is_identity()) {
        if (info) *info = {};
        return f.truncate(half_out);
    }
    return detail::compose_with_chart(f, phi, half_out, detail::ChartLeg::with_inverse, info);
}

// f . Phi re-expanded to the box |k| <= half_out
inline TrigPoly pushforward(const TrigPoly& f, const ConjugacyDiffeo& phi, int half_out,
                            CompositionInfo* info = nullptr) {
    if (phi.is_identity()) {
        if (info) *info = {};
        return f.truncate(half_out);
    }
    return detail::compose_with_chart(f, phi, half_out, detail::ChartLeg::with_forward, info);
}

// Norm of a function living on the conjugated torus: straighten the chart
// first, then take the flat-frame norm.  Linear maps skip the composition.
inline double map_space_norm(const TrigPoly& f, const SmoothToralMap& map,
                             const AnisoParams& a, CompositionInfo* info = nullptr) {
    if (map.is_linear()) {
        if (info) *info = {};
        return aniso_norm(f, a);
    }
    TrigPoly straight = pullback(f, map.chart(), 2 * f.half_width(), info);
    return aniso_norm(straight, a);
}

}  // namespace anosov
