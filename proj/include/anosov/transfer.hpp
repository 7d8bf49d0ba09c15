#pragma once

// Transfer operators on trig polynomials and their Fourier-Galerkin
// finite sections in the symbol-weighted basis.
//
// The four kinds share one shape: (Op f)(x) = weight(x) * f(T^sigma x) with
// sigma = +1 for the L family and -1 for the M family.  Applying Op to a
// mode e_k only needs the mapped grid points and Jacobians, which depend on
// (map, sigma, grid) alone, so they are precomputed once (MappedGrid) and
// shared across columns, kinds, and truncation widths.
//
// For linear maps the operator permutes modes exactly, and the assembled
// matrix is written in closed form: column k has its single entry at row
// M^T k (L family) or (M^T)^-1 k (M family) with value symbol(row) /
// symbol(col).  This keeps off-pattern entries exactly zero, which the
// eigensolver's balancing stage exploits; the quadrature path is kept for
// conjugated maps and as a cross-check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "anosov/aniso.hpp"
#include "anosov/fft.hpp"
#include "anosov/torus_map.hpp"
#include "anosov/trig_poly.hpp"

namespace anosov {

struct OperatorKind {
    enum class Family { L, M, Lt, Mt };
    Family family = Family::L;
    double t = 0;  // only the weighted kinds carry a t

    static OperatorKind L() { return {Family::L, 0}; }
    static OperatorKind M() { return {Family::M, 0}; }
    static OperatorKind Lt(double t) {
        require_t(t);
        return {Family::Lt, t};
    }
    static OperatorKind Mt(double t) {
        require_t(t);
        return {Family::Mt, t};
    }

    bool weighted() const { return family == Family::Lt || family == Family::Mt; }
    long long step() const {
        return (family == Family::L || family == Family::Lt) ? 1 : -1;
    }

    int id() const { return static_cast<int>(family); }

    std::string name() const {
        switch (family) {
            case Family::L: return "L";
            case Family::M: return "M";
            case Family::Lt: return "Lt";
            case Family::Mt: return "Mt";
        }
        return "?";
    }

    // exponent e such that the weight is det^e
    double weight_exponent() const {
        switch (family) {
            case Family::L: return 0.0;
            case Family::M: return 1.0;
            case Family::Lt: return 1.0 / t;
            case Family::Mt: return 1.0 - 1.0 / t;
        }
        return 0.0;
    }

    // multiplier applied at x given det D_x T^step
    double weight(double det_along_step) const {
        switch (family) {
            case Family::L: return 1.0;
            case Family::M: return det_along_step;  // det of the inverse branch
            case Family::Lt: return std::pow(det_along_step, 1.0 / t);
            case Family::Mt: return std::pow(det_along_step, 1.0 - 1.0 / t);
        }
        return 1.0;
    }

  private:
    static void require_t(double t) {
        if (!(t > 1.0) || !std::isfinite(t))
            throw std::invalid_argument("weighted operator kinds require t in (1, inf)");
    }
};

// T^step applied to the uniform grid, with the Jacobian determinant of that
// same step at each point
struct MappedGrid {
    int grid = 0;
    long long step = 1;
    std::vector<Vec2> points;
    std::vector<double> det_step;                // |det D_x T^step|
    std::vector<std::complex<double>> d1, d2;    // e^{2 pi i y1}, e^{2 pi i y2}

    static MappedGrid build(const SmoothToralMap& map, long long step, int grid) {
        MappedGrid mg;
        mg.grid = grid;
        mg.step = step;
        const std::size_t m = static_cast<std::size_t>(grid) * grid;
        mg.points.resize(m);
        mg.det_step.resize(m);
        mg.d1.resize(m);
        mg.d2.resize(m);
        for (int g1 = 0; g1 < grid; ++g1)
            for (int g2 = 0; g2 < grid; ++g2) {
                std::size_t i = static_cast<std::size_t>(g1) * grid + g2;
                Vec2 x{static_cast<double>(g1) / grid, static_cast<double>(g2) / grid};
                Vec2 y = map.evaluate(x, step);
                mg.points[i] = y;
                mg.det_step[i] = map.det_jacobian(x, step);
                mg.d1[i] = std::polar(1.0, 2 * M_PI * y.x);
                mg.d2[i] = std::polar(1.0, 2 * M_PI * y.y);
            }
        return mg;
    }
};

// (Op f) re-expanded on a grid of size `grid_size` (defaults to the aliasing
// floor 2(2N+1)); the output box is the largest the grid supports
inline TrigPoly apply_operator(OperatorKind kind, const SmoothToralMap& map,
                               const TrigPoly& f, int grid_size = 0,
                               CompositionInfo* info = nullptr,
                               const MappedGrid* cache = nullptr) {
    const int n = f.half_width();
    const int floor_grid = 2 * (2 * n + 1);
    int grid = (grid_size == 0) ? floor_grid : grid_size;
    if (grid < floor_grid)
        throw std::invalid_argument("operator grid must be at least 2(2N+1)");

    MappedGrid local;
    const MappedGrid* mg = cache;
    if (mg) {
        if (mg->grid != grid || mg->step != kind.step())
            throw std::invalid_argument("mapped-grid cache does not match this call");
    } else {
        local = MappedGrid::build(map, kind.step(), grid);
        mg = &local;
    }

    const std::size_t m = static_cast<std::size_t>(grid) * grid;
    std::vector<std::complex<double>> vals(m);
    for (std::size_t i = 0; i < m; ++i)
        vals[i] = f.evaluate(mg->points[i]) * kind.weight(mg->det_step[i]);

    TrigPoly out = TrigPoly::analyze(std::move(vals), grid, (grid - 1) / 2);
    if (info) {
        double tail = out.edge_fraction();
        info->tail_fraction = tail;
        info->aliasing_flag = tail > 1e-8;
    }
    return out;
}

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GalerkinMatrix {
    int half_width = 0;
    OperatorKind kind;
    AnisoParams params{0, 0, 2, Vec2{1, 0}};
    std::string map_descr;
    std::vector<std::complex<double>> a;  // column-major, dim x dim

    int width() const { return 2 * half_width + 1; }
    int dim() const { return width() * width(); }

    std::size_t mode_index(long long k1, long long k2) const {
        return static_cast<std::size_t>(k1 + half_width) * width() +
               static_cast<std::size_t>(k2 + half_width);
    }

    std::complex<double>& at(std::size_t row, std::size_t col) {
        return a[col * dim() + row];
    }
    std::complex<double> at(std::size_t row, std::size_t col) const {
        return a[col * dim() + row];
    }
};

struct AssemblyOptions {
    int grid_size = 0;        // 0: pick the aliasing-safe default
    int threads = 1;
    int max_half_width = 48;  // (2N+1)^2 x (2N+1)^2 dense complex budget
    bool force_grid_path = false;
};

// smallest grid for which no spectral content of an image mode can alias
// into the read window: the linear part carries mode k to M^T k (component
// reach rowmax*N), and a nonlinear chart smears that line into sidebands
// whose amplitudes sit under the Bessel envelope (z/2)^m / m! with
// z = 2 pi (reach + N) sup|u|, so the margin is padded until that envelope
// drops below the assembly tolerance
inline int assembly_grid_for(const SmoothToralMap& map, int half_width) {
    const IntMat2& m = map.automorphism().matrix();
    long long rowmax = std::max(std::llabs(m.a) + std::llabs(m.c),
                                std::llabs(m.b) + std::llabs(m.d));
    long long reach = rowmax * half_width;
    long long margin = 2;
    if (!map.is_linear()) {
        double z = 2 * M_PI * static_cast<double>(reach + half_width) *
                   map.chart().sup_displacement();
        double log_half = std::log(std::max(z, 1e-12) / 2);
        int mm = 1;
        while (mm < 4096 && mm * log_half - std::lgamma(mm + 1.0) > std::log(1e-13)) ++mm;
        margin = std::max<long long>(margin, mm + 2);
    }
    long long safe = reach + half_width + margin;
    return static_cast<int>(std::max<long long>(2 * (2 * half_width + 1), safe));
}

namespace detail {

inline void assemble_closed_form(GalerkinMatrix& out, const SmoothToralMap& map) {
    const int n = out.half_width;
    IntMat2 action = (out.kind.step() == 1)
                         ? map.automorphism().matrix().transpose()
                         : map.automorphism().matrix().transpose().inverse();
    // |det A| = 1, so every kind's Jacobian weight collapses to 1
    for (long long k1 = -n; k1 <= n; ++k1)
        for (long long k2 = -n; k2 <= n; ++k2) {
            long long r1 = action.a * k1 + action.b * k2;
            long long r2 = action.c * k1 + action.d * k2;
            if (std::llabs(r1) > n || std::llabs(r2) > n) continue;
            double ratio = symbol_value(out.params, r1, r2) /
                           symbol_value(out.params, k1, k2);
            out.at(out.mode_index(r1, r2), out.mode_index(k1, k2)) = {ratio, 0.0};
        }
}

// FFT plan reused across columns; FFTW_UNALIGNED lifts the buffer-alignment
// requirement of fftw_execute_dft on fresh arrays
class ColumnFft {
  public:
    explicit ColumnFft(int grid) : grid_(grid) {
        scratch_.resize(static_cast<std::size_t>(grid) * grid);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_2d(grid, grid,
                                 reinterpret_cast<fftw_complex*>(scratch_.data()),
                                 reinterpret_cast<fftw_complex*>(scratch_.data()),
                                 FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan_) throw std::runtime_error("fft planning failed");
    }
    ~ColumnFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    ColumnFft(const ColumnFft&) = delete;
    ColumnFft& operator=(const ColumnFft&) = delete;

    void forward(std::vector<std::complex<double>>& data) {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(data.data()),
                         reinterpret_cast<fftw_complex*>(data.data()));
    }

  private:
    int grid_;
    std::vector<std::complex<double>> scratch_;
    fftw_plan plan_;
};

inline void assemble_grid_columns(GalerkinMatrix& out, const MappedGrid& mg,
                                  long long k1_lo, long long k1_hi) {
    const int n = out.half_width;
    const int grid = mg.grid;
    const std::size_t m = static_cast<std::size_t>(grid) * grid;
    const double scale = 1.0 / static_cast<double>(m);
    ColumnFft fft(grid);

    std::vector<double> wgt(m);
    for (std::size_t i = 0; i < m; ++i) wgt[i] = out.kind.weight(mg.det_step[i]);

    std::vector<std::complex<double>> q0(m), col(m), vals(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::complex<double> c0{1, 0};
        for (long long e = 0; e < n; ++e) c0 *= std::conj(mg.d2[i]);
        q0[i] = c0;
    }

    // the k1 phase is rebuilt from scratch for every column so the arithmetic
    // path, and with it the result, is independent of how columns are split
    // across threads
    for (long long k1 = k1_lo; k1 <= k1_hi; ++k1) {
        for (std::size_t i = 0; i < m; ++i) {
            std::complex<double> acc{1, 0};
            std::complex<double> base = (k1 >= 0) ? mg.d1[i] : std::conj(mg.d1[i]);
            for (long long e = 0; e < std::llabs(k1); ++e) acc *= base;
            col[i] = acc * q0[i];
        }
        for (long long k2 = -n; k2 <= n; ++k2) {
            for (std::size_t i = 0; i < m; ++i) vals[i] = col[i] * wgt[i];
            fft.forward(vals);
            const std::size_t colidx = out.mode_index(k1, k2);
            const double den = symbol_value(out.params, k1, k2);
            for (long long j1 = -n; j1 <= n; ++j1)
                for (long long j2 = -n; j2 <= n; ++j2) {
                    long long b1 = ((j1 % grid) + grid) % grid;
                    long long b2 = ((j2 % grid) + grid) % grid;
                    std::complex<double> c =
                        vals[static_cast<std::size_t>(b1) * grid + b2] * scale;
                    out.at(out.mode_index(j1, j2), colidx) =
                        c * (symbol_value(out.params, j1, j2) / den);
                }
            if (k2 < n)
                for (std::size_t i = 0; i < m; ++i) col[i] *= mg.d2[i];
        }
    }
}

}  // namespace detail

inline GalerkinMatrix assemble_galerkin(OperatorKind kind, const SmoothToralMap& map,
                                        const AnisoParams& params, int half_width,
                                        AssemblyOptions opt = {}) {
    if (half_width < 1) throw std::invalid_argument("half width must be >= 1");
    if (half_width > opt.max_half_width)
        throw BudgetError("truncation " + std::to_string(half_width) +
                          " exceeds the dense-matrix budget " +
                          std::to_string(opt.max_half_width));

    GalerkinMatrix out;
    out.half_width = half_width;
    out.kind = kind;
    out.params = params;
    out.map_descr = map.describe();
    out.a.assign(static_cast<std::size_t>(out.dim()) * out.dim(), {0.0, 0.0});

    if (map.is_linear() && !opt.force_grid_path) {
        detail::assemble_closed_form(out, map);
        return out;
    }

    int grid = opt.grid_size ? opt.grid_size : assembly_grid_for(map, half_width);
    if (grid < 2 * (2 * half_width + 1))
        throw std::invalid_argument("assembly grid must be at least 2(2N+1)");
    MappedGrid mg = MappedGrid::build(map, kind.step(), grid);

    int workers = std::max(1, opt.threads);
    if (workers == 1) {
        detail::assemble_grid_columns(out, mg, -half_width, half_width);
    } else {
        std::vector<std::thread> pool;
        int rows = 2 * half_width + 1;
        int chunk = (rows + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            long long lo = -half_width + static_cast<long long>(w) * chunk;
            long long hi = std::min<long long>(half_width, lo + chunk - 1);
            if (lo > hi) break;
            pool.emplace_back([&out, &mg, lo, hi] {
                detail::assemble_grid_columns(out, mg, lo, hi);
            });
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// Escape oracle for the mode dynamics: under the transpose action every
// nonzero wavevector must leave the box for good, which is what makes the
// truncated linear operator's nonconstant block nilpotent.  A trajectory is
// declared escaped once its unstable component exceeds any value attainable
// inside the box; re-entry past that point is impossible.
struct OrbitEscapeReport {
    bool all_escape = true;
    int longest_stay = 0;       // consecutive steps inside the box from the start
    long long offenders = 0;    // wavevectors that re-entered after leaving
};

inline OrbitEscapeReport orbit_escape_check(const ToralAutomorphism& aut, int half_width) {
    OrbitEscapeReport rep;
    IntMat2 mt = aut.matrix().transpose();
    ToralAutomorphism mt_aut(mt);
    Vec2L eu = mt_aut.dir_unstable();
    long double lam = std::fabs(mt_aut.eig_unstable());
    const long double box_reach = std::sqrt(2.0L) * half_width;
    const long long step_cap =
        static_cast<long long>(2 * half_width + 1) * (2 * half_width + 1);

    for (long long k1 = -half_width; k1 <= half_width; ++k1)
        for (long long k2 = -half_width; k2 <= half_width; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            __int128 x = k1, y = k2;
            bool left = false;
            int stay = 0;
            for (long long step = 1; step <= step_cap; ++step) {
                __int128 nx = static_cast<__int128>(mt.a) * x + static_cast<__int128>(mt.b) * y;
                __int128 ny = static_cast<__int128>(mt.c) * x + static_cast<__int128>(mt.d) * y;
                x = nx;
                y = ny;
                bool inside = (nx <= half_width && nx >= -half_width &&
                               ny <= half_width && ny >= -half_width);
                if (inside && !left) {
                    stay = static_cast<int>(step);
                } else if (inside && left) {
                    rep.all_escape = false;
                    ++rep.offenders;
                    break;
                } else {
                    left = true;
                    long double u = std::fabs(eu.x * static_cast<long double>(x) +
                                              eu.y * static_cast<long double>(y));
                    if (u > lam * box_reach) break;  // unstable part only grows
                }
            }
            rep.longest_stay = std::max(rep.longest_stay, stay);
        }
    return rep;
}

}  // namespace anosov
