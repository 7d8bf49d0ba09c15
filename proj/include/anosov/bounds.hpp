#pragma once

// Hyperbolicity radii and essential-spectral-radius bound formulas.
//
// Every formula here is a reduction (grid sup or grid mean, then n-th root)
// over the same per-point data: the local expansion lambda_w(T^n), the local
// contraction nu_w(T^n), the unstable-bundle stretch |D_w T^n v_u(w)|, and
// the full Jacobian determinant.  ExponentField computes that data once per
// (map, n_max, grid) so parameter sweeps over (p, s, t) cost almost nothing.
//
// Reductions run in a fixed serial order over the cached arrays, so reports
// are bit-reproducible no matter how the field itself was filled.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "anosov/torus_map.hpp"

namespace anosov {

struct ExponentPair {
    double p = -1;
    double s = 1;

    ExponentPair(double p_, double s_) : p(p_), s(s_) {
        if (!(p < 0) || !(s > 0))
            throw std::invalid_argument("exponent pair requires p < 0 and s > 0");
    }
};

enum class BoundFormula {
    rho_infty,
    rho_one,
    thm1,
    thm2,
    propL1_u,
    propL1_s,
    propL12,
    appendix_Lt,
    appendix_Mt,
};

inline const char* formula_name(BoundFormula f) {
    switch (f) {
        case BoundFormula::rho_infty: return "rho_infty";
        case BoundFormula::rho_one: return "rho_one";
        case BoundFormula::thm1: return "thm1";
        case BoundFormula::thm2: return "thm2";
        case BoundFormula::propL1_u: return "propL1_u";
        case BoundFormula::propL1_s: return "propL1_s";
        case BoundFormula::propL12: return "propL12";
        case BoundFormula::appendix_Lt: return "appendix_Lt";
        case BoundFormula::appendix_Mt: return "appendix_Mt";
    }
    return "unknown";
}

// Per-point hyperbolicity data for n = 1..n_max on a uniform midpoint grid.
// For each grid point the forward orbit is walked once; differentials of all
// iterates then come from the telescoped form at no extra orbit cost.
class ExponentField {
  public:
    ExponentField(const SmoothToralMap& map, int n_max, int grid, int threads = 1)
        : n_max_(n_max), grid_(grid) {
        if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
        if (grid < 16) throw std::invalid_argument("grid must be >= 16");
        const std::size_t npts = static_cast<std::size_t>(grid) * grid;
        lambda_.assign(static_cast<std::size_t>(n_max) * npts, 0.0);
        nu_ = lambda_;
        det_u_ = lambda_;
        det_jac_ = lambda_;

        auto fill_rows = [&](int row_begin, int row_end) {
            std::vector<IntMat2> apow(n_max + 1);
            for (int n = 0; n <= n_max; ++n) apow[n] = map.automorphism().power(n);
            for (int i = row_begin; i < row_end; ++i)
                for (int j = 0; j < grid; ++j)
                    fill_point(map, apow, i, j);
        };

        int workers = std::max(1, threads);
        if (workers == 1) {
            fill_rows(0, grid);
        } else {
            std::vector<std::thread> pool;
            int chunk = (grid + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                int lo = w * chunk, hi = std::min(grid, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(fill_rows, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
    }

    int n_max() const { return n_max_; }
    int grid() const { return grid_; }
    std::size_t points() const { return static_cast<std::size_t>(grid_) * grid_; }

    // flat arrays of length grid*grid for iterate count n in 1..n_max
    const double* lambda(int n) const { return slice(lambda_, n); }
    const double* nu(int n) const { return slice(nu_, n); }
    const double* det_unstable(int n) const { return slice(det_u_, n); }
    // |D_w T^n v_s(w)| coincides with nu by definition
    const double* det_stable(int n) const { return slice(nu_, n); }
    const double* det_jacobian(int n) const { return slice(det_jac_, n); }

  private:
    const double* slice(const std::vector<double>& a, int n) const {
        if (n < 1 || n > n_max_) throw std::out_of_range("iterate count out of range");
        return a.data() + static_cast<std::size_t>(n - 1) * points();
    }
    double* slice_mut(std::vector<double>& a, int n) {
        return a.data() + static_cast<std::size_t>(n - 1) * points();
    }

    void fill_point(const SmoothToralMap& map, const std::vector<IntMat2>& apow,
                    int i, int j) {
        const std::size_t idx = static_cast<std::size_t>(i) * grid_ + j;
        Vec2L w{(i + 0.5L) / grid_, (j + 0.5L) / grid_};

        if (map.is_linear()) {
            long double lu = std::fabs(map.automorphism().eig_unstable());
            long double ls = std::fabs(map.automorphism().eig_stable());
            long double pl = 1, ps = 1;
            for (int n = 1; n <= n_max_; ++n) {
                pl *= lu;
                ps *= ls;
                slice_mut(lambda_, n)[idx] = static_cast<double>(pl);
                slice_mut(nu_, n)[idx] = static_cast<double>(ps);
                slice_mut(det_u_, n)[idx] = static_cast<double>(pl);
                slice_mut(det_jac_, n)[idx] = 1.0;
            }
            return;
        }

        const ConjugacyDiffeo& phi = map.chart();
        const ToralAutomorphism& aut = map.automorphism();

        // forward orbit in the linear chart: z_n = A^n z_0 stays exact in the
        // lattice action, points reduced mod 1 as we go
        Vec2L z = phi.forward(w);
        std::vector<Mat2L> jac(n_max_ + 1), jac_inv(n_max_ + 1);
        jac[0] = phi.jacobian(w);
        jac_inv[0] = jac[0].inverse();
        Vec2L zi = z;
        for (int n = 1; n <= n_max_; ++n) {
            zi = mod1(aut.matrix().apply(zi));
            Vec2L wn = phi.inverse(zi);
            jac[n] = phi.jacobian(wn);
            jac_inv[n] = jac[n].inverse();
        }

        Vec2L vs_w = (jac_inv[0] * aut.dir_stable()).normalized();
        Vec2L vu_w = (jac_inv[0] * aut.dir_unstable()).normalized();

        for (int n = 1; n <= n_max_; ++n) {
            Mat2L an = apow[n].as<long double>();
            Mat2L fwd = jac_inv[n] * an * jac[0];
            Mat2L bwd = jac_inv[0] * apow[n].inverse().as<long double>() * jac[n];
            Vec2L vu_tw = (jac_inv[n] * aut.dir_unstable()).normalized();
            slice_mut(nu_, n)[idx] = static_cast<double>((fwd * vs_w).norm());
            slice_mut(lambda_, n)[idx] = static_cast<double>(1.0L / (bwd * vu_tw).norm());
            slice_mut(det_u_, n)[idx] = static_cast<double>((fwd * vu_w).norm());
            slice_mut(det_jac_, n)[idx] = static_cast<double>(std::fabs(fwd.det()));
        }
    }

    int n_max_, grid_;
    std::vector<double> lambda_, nu_, det_u_, det_jac_;
};

struct BoundEntry {
    int n = 0;
    double raw_value = 0;
    double accelerated_value = 0;
    int grid = 0;
};

struct BoundReport {
    BoundFormula formula = BoundFormula::rho_infty;
    ExponentPair exps{-1, 1};
    double t = std::numeric_limits<double>::quiet_NaN();  // NaN when the formula has no t
    int grid = 0;                                         // base resolution (refined rows use 2*grid)
    std::vector<BoundEntry> entries;                      // base-grid rows first, then refined
    double extrapolated_base = 0;
    double extrapolated = 0;  // refined-grid extrapolation, the headline value

    std::vector<double> raw_sequence(int which_grid) const {
        std::vector<double> out;
        for (const auto& e : entries)
            if (e.grid == which_grid) out.push_back(e.raw_value);
        return out;
    }
};

// Aitken delta-squared step on three consecutive terms, with a guard against
// dividing by a vanishing second difference
inline double aitken_step(double x0, double x1, double x2) {
    double d1 = x1 - x0, d2 = x2 - x1;
    double dd = d2 - d1;
    if (std::fabs(dd) < 1e-14 * std::max(1.0, std::fabs(x2))) return x2;
    double acc = x2 - d2 * d2 / dd;
    return std::isfinite(acc) ? acc : x2;
}

inline bool is_monotone(const std::vector<double>& x, std::size_t upto) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < upto; ++i) {
        if (x[i] < x[i - 1] - 1e-14) up = false;
        if (x[i] > x[i - 1] + 1e-14) down = false;
    }
    return up || down;
}

namespace detail {

// one bound formula evaluated on a single cached field; every reduction is a
// serial pass in index order
inline std::vector<double> formula_sequence(const ExponentField& f, BoundFormula which,
                                            const ExponentPair& e, double t) {
    const std::size_t m = f.points();
    std::vector<double> seq;
    seq.reserve(f.n_max());

    auto sup_of = [&](int n, auto&& point_fn) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) best = std::max(best, point_fn(n, i));
        return best;
    };
    auto mean_of = [&](int n, auto&& point_fn) {
        long double acc = 0;
        for (std::size_t i = 0; i < m; ++i) acc += point_fn(n, i);
        return static_cast<double>(acc / static_cast<long double>(m));
    };

    auto rate_L = [&](int n, std::size_t i) {
        return std::max(std::pow(f.lambda(n)[i], e.p), std::pow(f.nu(n)[i], e.s));
    };
    auto rate_M = [&](int n, std::size_t i) {
        return std::max(std::pow(f.lambda(n)[i], -e.s), std::pow(f.nu(n)[i], -e.p));
    };

    for (int n = 1; n <= f.n_max(); ++n) {
        double v = 0;
        double inv_n = 1.0 / n;
        switch (which) {
            case BoundFormula::rho_infty:
            case BoundFormula::appendix_Lt:
                v = std::pow(sup_of(n, rate_L), inv_n);
                break;
            case BoundFormula::rho_one:
                v = std::pow(mean_of(n, rate_L), inv_n);
                break;
            case BoundFormula::appendix_Mt:
                v = std::pow(sup_of(n, rate_M), inv_n);
                break;
            case BoundFormula::thm1:
                v = std::pow(sup_of(n, [&](int nn, std::size_t i) {
                        return std::pow(f.det_jacobian(nn)[i], -1.0 / t);
                    }), inv_n) *
                    std::pow(sup_of(n, rate_L), inv_n);
                break;
            case BoundFormula::thm2:
                v = std::pow(sup_of(n, [&](int nn, std::size_t i) {
                        return std::pow(f.det_jacobian(nn)[i], -(t - 1.0) / t);
                    }), inv_n) *
                    std::pow(sup_of(n, rate_M), inv_n);
                break;
            case BoundFormula::propL1_u:
                v = std::pow(mean_of(n, [&](int nn, std::size_t i) {
                        return rate_L(nn, i) * f.det_unstable(nn)[i] *
                               std::pow(f.det_jacobian(nn)[i], -1.0 / t);
                    }), inv_n);
                break;
            case BoundFormula::propL1_s:
                v = std::pow(mean_of(n, [&](int nn, std::size_t i) {
                        return rate_L(nn, i) / f.det_stable(nn)[i] *
                               std::pow(f.det_jacobian(nn)[i], 1.0 - 1.0 / t);
                    }), inv_n);
                break;
            case BoundFormula::propL12:
                v = std::pow(mean_of(n, [&](int nn, std::size_t i) {
                        return rate_M(nn, i) * f.det_unstable(nn)[i] *
                               std::pow(f.det_jacobian(nn)[i], -(t - 1.0) / t);
                    }), inv_n);
                break;
        }
        seq.push_back(v);
    }
    return seq;
}

inline bool needs_t(BoundFormula f) {
    switch (f) {
        case BoundFormula::thm1:
        case BoundFormula::thm2:
        case BoundFormula::propL1_u:
        case BoundFormula::propL1_s:
        case BoundFormula::propL12:
            return true;
        default:
            return false;
    }
}

inline double extrapolate(const std::vector<double>& seq) {
    const std::size_t n = seq.size();
    if (n < 3 || !is_monotone(seq, n)) return seq.back();
    return aitken_step(seq[n - 3], seq[n - 2], seq[n - 1]);
}

inline void append_rows(BoundReport& rep, const std::vector<double>& seq, int grid) {
    for (std::size_t k = 0; k < seq.size(); ++k) {
        BoundEntry row;
        row.n = static_cast<int>(k + 1);
        row.raw_value = seq[k];
        row.grid = grid;
        row.accelerated_value = (k >= 2 && is_monotone(seq, k + 1))
                                    ? aitken_step(seq[k - 2], seq[k - 1], seq[k])
                                    : seq[k];
        rep.entries.push_back(row);
    }
}

}  // namespace detail

// Evaluate one formula from prebuilt caches.  `refined` must use twice the
// base resolution; both sequences land in the report.
inline BoundReport compute_bound(const ExponentField& base, const ExponentField& refined,
                                 BoundFormula which, const ExponentPair& exps,
                                 double t = std::numeric_limits<double>::quiet_NaN()) {
    if (detail::needs_t(which)) {
        if (!(t > 1.0)) throw std::invalid_argument("this bound requires t > 1");
    }
    if (refined.grid() != 2 * base.grid())
        throw std::invalid_argument("refined field must double the base resolution");
    if (refined.n_max() != base.n_max())
        throw std::invalid_argument("field iterate counts must match");

    BoundReport rep;
    rep.formula = which;
    rep.exps = exps;
    rep.t = t;
    rep.grid = base.grid();

    std::vector<double> s0 = detail::formula_sequence(base, which, exps, t);
    std::vector<double> s1 = detail::formula_sequence(refined, which, exps, t);
    detail::append_rows(rep, s0, base.grid());
    detail::append_rows(rep, s1, refined.grid());
    rep.extrapolated_base = detail::extrapolate(s0);
    rep.extrapolated = detail::extrapolate(s1);
    return rep;
}

namespace detail {
inline BoundReport with_fresh_fields(const SmoothToralMap& map, BoundFormula which,
                                     const ExponentPair& exps, double t, int n_max,
                                     int grid) {
    ExponentField base(map, n_max, grid);
    ExponentField refined(map, n_max, 2 * grid);
    return compute_bound(base, refined, which, exps, t);
}
}  // namespace detail

inline BoundReport rho_infty(const SmoothToralMap& map, const ExponentPair& exps,
                             int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::rho_infty, exps,
                                     std::numeric_limits<double>::quiet_NaN(), n_max, grid);
}

inline BoundReport rho_one(const SmoothToralMap& map, const ExponentPair& exps,
                           int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::rho_one, exps,
                                     std::numeric_limits<double>::quiet_NaN(), n_max, grid);
}

inline BoundReport thm_bound_L(const SmoothToralMap& map, const ExponentPair& exps,
                               double t, int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::thm1, exps, t, n_max, grid);
}

inline BoundReport thm_bound_M(const SmoothToralMap& map, const ExponentPair& exps,
                               double t, int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::thm2, exps, t, n_max, grid);
}

enum class PropL1Form { unstable_det, stable_det };

inline BoundReport prop_bound_L1(const SmoothToralMap& map, const ExponentPair& exps,
                                 double t, int n_max, int grid, PropL1Form form) {
    BoundFormula which = (form == PropL1Form::unstable_det) ? BoundFormula::propL1_u
                                                            : BoundFormula::propL1_s;
    return detail::with_fresh_fields(map, which, exps, t, n_max, grid);
}

inline BoundReport prop_bound_L12(const SmoothToralMap& map, const ExponentPair& exps,
                                  double t, int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::propL12, exps, t, n_max, grid);
}

inline BoundReport appendix_bound_L(const SmoothToralMap& map, const ExponentPair& exps,
                                    int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::appendix_Lt, exps,
                                     std::numeric_limits<double>::quiet_NaN(), n_max, grid);
}

inline BoundReport appendix_bound_M(const SmoothToralMap& map, const ExponentPair& exps,
                                    int n_max, int grid) {
    return detail::with_fresh_fields(map, BoundFormula::appendix_Mt, exps,
                                     std::numeric_limits<double>::quiet_NaN(), n_max, grid);
}

// radius of the disc in which determinant zeros are meaningful
inline double kitaev_disc_radius(const SmoothToralMap& map, const ExponentPair& exps,
                                 int n_max, int grid) {
    return 1.0 / rho_one(map, exps, n_max, grid).extrapolated;
}

}  // namespace anosov
