#pragma once

// Hyperbolic dynamics on the 2-torus: integer unimodular automorphisms A and
// their smooth conjugates T = Phi^-1 . A . Phi, where Phi(w) = w + u(w) is a
// trigonometric displacement of the identity.  Conjugation keeps both
// foliations smooth and makes closed-form cross-checks available, while the
// map itself is genuinely nonlinear.
//
// Differentials of iterates use the telescoped form
//     D_w T^n = DPhi(T^n w)^-1 . A^n . DPhi(w),
// which agrees with the n-fold chain product but avoids accumulating
// roundoff.  Exponent computations run in long double because the stable
// contraction |A^n v_s| loses lg(lambda^n) bits to cancellation.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/geometry.hpp"

namespace anosov {

inline constexpr long double kTwoPiL = 6.283185307179586476925286766559L;

// 2x2 integer matrix with overflow-checked exact arithmetic.
struct IntMat2 {
    long long a = 1, b = 0, c = 0, d = 1;

    static long long checked_add(long long x, long long y) {
        long long r;
        if (__builtin_add_overflow(x, y, &r))
            throw std::overflow_error("integer matrix overflow");
        return r;
    }
    static long long checked_mul(long long x, long long y) {
        long long r;
        if (__builtin_mul_overflow(x, y, &r))
            throw std::overflow_error("integer matrix overflow");
        return r;
    }

    IntMat2 operator*(const IntMat2& o) const {
        return {checked_add(checked_mul(a, o.a), checked_mul(b, o.c)),
                checked_add(checked_mul(a, o.b), checked_mul(b, o.d)),
                checked_add(checked_mul(c, o.a), checked_mul(d, o.c)),
                checked_add(checked_mul(c, o.b), checked_mul(d, o.d))};
    }

    long long det() const { return a * d - b * c; }
    long long trace() const { return a + d; }

    // exact inverse, valid only when |det| = 1
    IntMat2 inverse() const {
        long long dt = det();
        if (dt != 1 && dt != -1) throw std::domain_error("matrix is not unimodular");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    IntMat2 transpose() const { return {a, c, b, d}; }

    IntMat2 power(long long n) const {
        IntMat2 base = (n >= 0) ? *this : inverse();
        long long e = (n >= 0) ? n : -n;
        IntMat2 acc;  // identity
        while (e > 0) {
            if (e & 1) acc = acc * base;
            base = (e > 1) ? base * base : base;
            e >>= 1;
        }
        return acc;
    }

    template <class S>
    Vec2T<S> apply(const Vec2T<S>& v) const {
        return {S(a) * v.x + S(b) * v.y, S(c) * v.x + S(d) * v.y};
    }

    // action on wavevectors: k -> M^T k (composition with the linear map
    // sends the Fourier mode k to mode M^T k)
    std::array<long long, 2> transpose_apply(long long k1, long long k2) const {
        return {checked_add(checked_mul(a, k1), checked_mul(c, k2)),
                checked_add(checked_mul(b, k1), checked_mul(d, k2))};
    }

    template <class S>
    Mat2T<S> as() const {
        return {S(a), S(b), S(c), S(d)};
    }
};

// A hyperbolic unimodular integer matrix acting on the torus, with its
// eigendata precomputed in extended precision.
class ToralAutomorphism {
  public:
    explicit ToralAutomorphism(long long a, long long b, long long c, long long d)
        : m_{a, b, c, d} {
        long long dt = m_.det();
        if (dt != 1 && dt != -1)
            throw std::invalid_argument("toral automorphism must have |det| = 1");
        if (std::llabs(m_.trace()) <= 2)
            throw std::invalid_argument("toral automorphism must have |trace| > 2");
        solve_eigen();
    }
    explicit ToralAutomorphism(const IntMat2& m)
        : ToralAutomorphism(m.a, m.b, m.c, m.d) {}

    const IntMat2& matrix() const { return m_; }
    IntMat2 power(long long n) const { return m_.power(n); }
    ToralAutomorphism inverse() const { return ToralAutomorphism(m_.inverse()); }

    // signed eigenvalues, |unstable| > 1 > |stable|
    long double eig_unstable() const { return lam_u_; }
    long double eig_stable() const { return lam_s_; }

    const Vec2L& dir_stable() const { return vs_; }
    const Vec2L& dir_unstable() const { return vu_; }

    std::string describe() const {
        std::ostringstream os;
        os << "linear[" << m_.a << "," << m_.b << ";" << m_.c << "," << m_.d << "]";
        return os.str();
    }

  private:
    void solve_eigen() {
        long double tr = static_cast<long double>(m_.trace());
        long double dt = static_cast<long double>(m_.det());
        long double disc = std::sqrt(tr * tr - 4 * dt);
        long double l1 = (tr + disc) / 2, l2 = (tr - disc) / 2;
        lam_u_ = (std::fabs(l1) > std::fabs(l2)) ? l1 : l2;
        lam_s_ = (std::fabs(l1) > std::fabs(l2)) ? l2 : l1;
        vu_ = eigvec(lam_u_);
        vs_ = eigvec(lam_s_);
    }

    Vec2L eigvec(long double lam) const {
        // (M - lam) v = 0; one of the rows always gives the kernel direction
        // because hyperbolic integer matrices cannot be diagonal
        if (m_.b != 0)
            return Vec2L{static_cast<long double>(m_.b), lam - static_cast<long double>(m_.a)}.normalized();
        if (m_.c != 0)
            return Vec2L{lam - static_cast<long double>(m_.d), static_cast<long double>(m_.c)}.normalized();
        throw std::invalid_argument("degenerate (diagonal) automorphism");
    }

    IntMat2 m_;
    long double lam_u_ = 0, lam_s_ = 0;
    Vec2L vs_, vu_;
};

// One Fourier mode of a displacement component.  A mode (k, c) contributes
// c e^{2 pi i k.w} + conj(c) e^{-2 pi i k.w}, so the displacement is real by
// construction whatever the coefficient list.
struct DisplacementMode {
    long long k1 = 0, k2 = 0;
    std::complex<double> coeff;
};

// Phi(w) = w + u(w) mod 1 with u a real trigonometric 2-vector field.
// sup |Du| <= kappa_max < 1 (checked on a validation grid) makes Phi a
// diffeomorphism and w -> z - u(w) a contraction, so Phi^-1 is computed by
// fixed-point iteration.
class ConjugacyDiffeo {
  public:
    ConjugacyDiffeo() = default;  // identity chart

    ConjugacyDiffeo(std::vector<DisplacementMode> modes_x,
                    std::vector<DisplacementMode> modes_y,
                    double kappa_max = 0.5, int validation_grid = 64)
        : mx_(std::move(modes_x)), my_(std::move(modes_y)), kappa_max_(kappa_max) {
        validate(validation_grid);
    }

    bool is_identity() const {
        auto all_zero = [](const std::vector<DisplacementMode>& ms) {
            for (const auto& mode : ms)
                if (mode.coeff != std::complex<double>{0, 0}) return false;
            return true;
        };
        return all_zero(mx_) && all_zero(my_);
    }
    double kappa() const { return kappa_; }
    double sup_displacement() const { return sup_u_; }
    bool volume_preserving() const { return volume_preserving_; }
    const std::vector<DisplacementMode>& modes_x() const { return mx_; }
    const std::vector<DisplacementMode>& modes_y() const { return my_; }

    Vec2L displacement(const Vec2L& w) const {
        return {component(mx_, w), component(my_, w)};
    }

    // DPhi(w) = I + Du(w)
    Mat2L jacobian(const Vec2L& w) const {
        Mat2L j{1, 0, 0, 1};
        accumulate_jac(mx_, w, j.a, j.b);
        accumulate_jac(my_, w, j.c, j.d);
        return j;
    }

    Vec2L forward(const Vec2L& w) const { return mod1(w + displacement(w)); }

    Vec2L inverse(const Vec2L& z, long double tol = 1e-12L, int max_iter = 200) const {
        Vec2L w = z;
        for (int it = 0; it < max_iter; ++it) {
            Vec2L next = z - displacement(w);
            long double step = std::max(std::fabs(next.x - w.x), std::fabs(next.y - w.y));
            w = next;
            if (step < tol) return mod1(w);
        }
        throw std::runtime_error("chart inversion did not converge (displacement too large?)");
    }

    std::string describe() const {
        std::ostringstream os;
        os << "modes=" << (mx_.size() + my_.size()) << ",sup_u=" << sup_u_
           << ",kappa=" << kappa_;
        return os.str();
    }

  private:
    static long double component(const std::vector<DisplacementMode>& modes, const Vec2L& w) {
        long double v = 0;
        for (const auto& m : modes) {
            long double th = kTwoPiL * (static_cast<long double>(m.k1) * w.x +
                                        static_cast<long double>(m.k2) * w.y);
            v += 2 * (static_cast<long double>(m.coeff.real()) * std::cos(th) -
                      static_cast<long double>(m.coeff.imag()) * std::sin(th));
        }
        return v;
    }

    static void accumulate_jac(const std::vector<DisplacementMode>& modes, const Vec2L& w,
                               long double& d1, long double& d2) {
        for (const auto& m : modes) {
            long double th = kTwoPiL * (static_cast<long double>(m.k1) * w.x +
                                        static_cast<long double>(m.k2) * w.y);
            long double g = -2 * kTwoPiL * (static_cast<long double>(m.coeff.real()) * std::sin(th) +
                                            static_cast<long double>(m.coeff.imag()) * std::cos(th));
            d1 += g * static_cast<long double>(m.k1);
            d2 += g * static_cast<long double>(m.k2);
        }
    }

    void validate(int grid) {
        kappa_ = 0;
        sup_u_ = 0;
        volume_preserving_ = true;
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                Vec2L w{(i + 0.5L) / grid, (j + 0.5L) / grid};
                Mat2L du = jacobian(w);
                du.a -= 1;
                du.d -= 1;
                double nrm = static_cast<double>(du.op_norm());
                kappa_ = std::max(kappa_, nrm);
                Vec2L u = displacement(w);
                sup_u_ = std::max(sup_u_, static_cast<double>(u.norm()));
                Mat2L dphi = du;
                dphi.a += 1;
                dphi.d += 1;
                if (std::fabs(static_cast<double>(dphi.det()) - 1.0) > 1e-12)
                    volume_preserving_ = false;
            }
        if (kappa_ > kappa_max_)
            throw std::invalid_argument("displacement too steep: sup|Du| = " +
                                        std::to_string(kappa_) + " exceeds kappa_max = " +
                                        std::to_string(kappa_max_));
    }

    std::vector<DisplacementMode> mx_, my_;
    double kappa_max_ = 0.5;
    double kappa_ = 0;
    double sup_u_ = 0;
    bool volume_preserving_ = true;
};

struct LocalExponents {
    double lambda = 0;  // unstable expansion of T^n at w, > 1 once hyperbolicity bites
    double nu = 0;      // stable contraction of T^n at w, < 1 likewise
    bool contracting = false;  // nu < 1 and lambda > 1 at this (w, n)
};

// D_w T^n written in the bases (stable, unstable) at w and at T^n w.
// Foliation invariance forces the lower-left entry to vanish; it is kept as
// a diagnostic of the direction-field computation.
struct DifferentialBlocks {
    double a = 0;           // stable -> stable component
    double b = 0;           // unstable -> stable coupling
    double d = 0;           // unstable -> unstable component
    double lower_left = 0;  // stable -> unstable leakage, ~0
    double rem_ratio = 0;   // |b| / |d|
    double basis_det_w = 0, basis_det_tw = 0;
};

class SmoothToralMap {
  public:
    static SmoothToralMap linear(const ToralAutomorphism& a) {
        return SmoothToralMap(a, std::nullopt);
    }
    static SmoothToralMap conjugated(const ToralAutomorphism& a, ConjugacyDiffeo phi) {
        if (phi.is_identity()) return linear(a);
        return SmoothToralMap(a, std::move(phi));
    }

    bool is_linear() const { return !chart_.has_value(); }
    const ToralAutomorphism& automorphism() const { return base_; }
    const ConjugacyDiffeo& chart() const {
        if (!chart_) throw std::logic_error("linear map has no chart");
        return *chart_;
    }

    SmoothToralMap inverse_map() const {
        return SmoothToralMap(base_.inverse(), chart_);
    }

    // T^n(w), any integer n
    Vec2 evaluate(const Vec2& w, long long n = 1) const {
        return evaluate_ld(w.cast<long double>(), n).cast<double>();
    }

    Vec2L evaluate_ld(const Vec2L& w, long long n) const {
        if (n == 0) return mod1(w);
        IntMat2 an = base_.power(n);
        if (is_linear()) return mod1(an.apply(w));
        return chart_->inverse(mod1(an.apply(chart_->forward(w))));
    }

    // D_w T^n; n = 0 gives the identity
    Mat2 differential(const Vec2& w, long long n) const {
        return differential_ld(w.cast<long double>(), n).cast<double>();
    }

    Mat2L differential_ld(const Vec2L& w, long long n) const {
        if (n == 0) return Mat2L{};
        Mat2L an = base_.power(n).as<long double>();
        if (is_linear()) return an;
        Vec2L tw = evaluate_ld(w, n);
        return chart_->jacobian(tw).inverse() * an * chart_->jacobian(w);
    }

    double det_jacobian(const Vec2& w, long long n) const {
        if (n == 0) return 1.0;
        return static_cast<double>(std::fabs(differential_ld(w.cast<long double>(), n).det()));
    }

    std::pair<Vec2, Vec2> foliation_directions(const Vec2& w) const {
        auto [s, u] = foliation_directions_ld(w.cast<long double>());
        return {s.cast<double>(), u.cast<double>()};
    }

    // stable first, unstable second; for conjugated maps the linear
    // eigenlines are transported by D(Phi^-1) at Phi(w) = DPhi(w)^-1
    std::pair<Vec2L, Vec2L> foliation_directions_ld(const Vec2L& w) const {
        if (is_linear()) return {base_.dir_stable(), base_.dir_unstable()};
        Mat2L ji = chart_->jacobian(w).inverse();
        return {(ji * base_.dir_stable()).normalized(),
                (ji * base_.dir_unstable()).normalized()};
    }

    // nu_w(T^n) = |D_w T^n v_s(w)|, lambda_w(T^n)^-1 = |D_{T^n w} T^-n v_u(T^n w)|
    LocalExponents local_exponents(const Vec2& w, long long n) const {
        if (n < 1) throw std::invalid_argument("local_exponents requires n >= 1");
        Vec2L wl = w.cast<long double>();
        auto [vs, vu_unused] = foliation_directions_ld(wl);
        (void)vu_unused;
        long double nu = (differential_ld(wl, n) * vs).norm();
        Vec2L tw = evaluate_ld(wl, n);
        auto [ts_unused, tu] = foliation_directions_ld(tw);
        (void)ts_unused;
        long double lam_inv = (differential_ld(tw, -n) * tu).norm();
        LocalExponents e;
        e.nu = static_cast<double>(nu);
        e.lambda = static_cast<double>(1.0L / lam_inv);
        e.contracting = (e.nu < 1.0 && e.lambda > 1.0);
        return e;
    }

    DifferentialBlocks block_decomposition(const Vec2& w, long long n) const {
        if (n < 1) throw std::invalid_argument("block_decomposition requires n >= 1");
        Vec2L wl = w.cast<long double>();
        auto [sw, uw] = foliation_directions_ld(wl);
        Vec2L twl = evaluate_ld(wl, n);
        auto [st, ut] = foliation_directions_ld(twl);
        Mat2L basis_w{sw.x, uw.x, sw.y, uw.y};
        Mat2L basis_t{st.x, ut.x, st.y, ut.y};
        long double bw = basis_w.det(), bt = basis_t.det();
        if (std::fabs(static_cast<double>(bw)) < 1e-12 ||
            std::fabs(static_cast<double>(bt)) < 1e-12)
            throw std::domain_error("foliation directions are parallel");
        Mat2L c = basis_t.inverse() * differential_ld(wl, n) * basis_w;
        DifferentialBlocks blk;
        blk.a = static_cast<double>(c.a);
        blk.b = static_cast<double>(c.b);
        blk.lower_left = static_cast<double>(c.c);
        blk.d = static_cast<double>(c.d);
        blk.rem_ratio = (blk.d != 0) ? std::fabs(blk.b) / std::fabs(blk.d)
                                     : std::numeric_limits<double>::infinity();
        blk.basis_det_w = static_cast<double>(bw);
        blk.basis_det_tw = static_cast<double>(bt);
        return blk;
    }

    // smallest n such that nu < 1 < lambda simultaneously on the whole grid
    int contraction_onset(int grid = 32, int n_limit = 64) const {
        for (int n = 1; n <= n_limit; ++n) {
            bool ok = true;
            for (int i = 0; i < grid && ok; ++i)
                for (int j = 0; j < grid && ok; ++j) {
                    Vec2 w{(i + 0.5) / grid, (j + 0.5) / grid};
                    ok = local_exponents(w, n).contracting;
                }
            if (ok) return n;
        }
        return -1;
    }

    bool volume_preserving() const {
        return is_linear() || chart_->volume_preserving();
    }

    std::string describe() const {
        if (is_linear()) return base_.describe();
        return "conjugated[" + base_.describe() + ";" + chart_->describe() + "]";
    }

  private:
    SmoothToralMap(const ToralAutomorphism& a, std::optional<ConjugacyDiffeo> phi)
        : base_(a), chart_(std::move(phi)) {
        if (chart_) validate_inverse();
    }

    void validate_inverse() const {
        const int g = 8;
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                Vec2 w{(i + 0.5) / g, (j + 0.5) / g};
                Vec2 back = evaluate(evaluate(w, 1), -1);
                if (torus_dist(back.cast<long double>(), w.cast<long double>()) > 1e-10)
                    throw std::runtime_error("map inverse fails round-trip validation");
            }
    }

    ToralAutomorphism base_;
    std::optional<ConjugacyDiffeo> chart_;
};

}  // namespace anosov
