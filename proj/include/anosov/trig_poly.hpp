#pragma once

// Trigonometric polynomials on the 2-torus: f(x) = sum c_k e^{2 pi i k.x}
// over the box |k1|, |k2| <= N.  Coefficients are stored row-major in
// lexicographic (k1, k2) order, which is also the serialization order.
//
// Grid values live on x = g/G (G x G uniform); synthesis and analysis go
// through zero-padded FFTs and are mutually exact as long as G >= 2N+1.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "anosov/fft.hpp"
#include "anosov/geometry.hpp"

namespace anosov {

class TrigPoly {
  public:
    using Complex = std::complex<double>;

    explicit TrigPoly(int half_width = 0)
        : n_(half_width), c_(static_cast<std::size_t>(width()) * width(), Complex{0, 0}) {
        if (half_width < 0) throw std::invalid_argument("half width must be >= 0");
    }

    int half_width() const { return n_; }
    int width() const { return 2 * n_ + 1; }
    std::size_t size() const { return c_.size(); }

    bool in_box(long long k1, long long k2) const {
        return std::llabs(k1) <= n_ && std::llabs(k2) <= n_;
    }

    std::size_t index(long long k1, long long k2) const {
        if (!in_box(k1, k2)) throw std::out_of_range("wavevector outside truncation box");
        return static_cast<std::size_t>(k1 + n_) * width() + static_cast<std::size_t>(k2 + n_);
    }

    Complex coeff(long long k1, long long k2) const { return c_[index(k1, k2)]; }
    Complex& coeff(long long k1, long long k2) { return c_[index(k1, k2)]; }

    // zero for wavevectors outside the box instead of throwing
    Complex coeff_or_zero(long long k1, long long k2) const {
        return in_box(k1, k2) ? c_[index(k1, k2)] : Complex{0, 0};
    }

    const std::vector<Complex>& data() const { return c_; }
    std::vector<Complex>& data() { return c_; }

    static TrigPoly constant(Complex value) {
        TrigPoly f(0);
        f.coeff(0, 0) = value;
        return f;
    }

    static TrigPoly single_mode(int half_width, long long k1, long long k2,
                                Complex value = {1, 0}) {
        TrigPoly f(half_width);
        f.coeff(k1, k2) = value;
        return f;
    }

    // direct mode summation, exact up to roundoff at any point
    Complex evaluate(const Vec2& x) const {
        const int w = width();
        std::vector<Complex> px(w), py(w);
        fill_phases(px, x.x);
        fill_phases(py, x.y);
        Complex acc{0, 0};
        for (int i = 0; i < w; ++i) {
            Complex row{0, 0};
            const Complex* src = c_.data() + static_cast<std::size_t>(i) * w;
            for (int j = 0; j < w; ++j) row += src[j] * py[j];
            acc += px[i] * row;
        }
        return acc;
    }

    // values on the uniform grid x = (g1/G, g2/G), row-major in g1
    std::vector<Complex> synthesize(int grid) const {
        if (grid < width())
            throw std::invalid_argument("synthesis grid must be at least 2N+1");
        std::vector<Complex> bins(static_cast<std::size_t>(grid) * grid, Complex{0, 0});
        for (long long k1 = -n_; k1 <= n_; ++k1)
            for (long long k2 = -n_; k2 <= n_; ++k2)
                bins[bin_index(k1, k2, grid)] = c_[index(k1, k2)];
        fft2_backward(bins, grid, grid);
        return bins;
    }

    // recover the coefficient box |k| <= half_out from grid samples
    static TrigPoly analyze(std::vector<Complex> values, int grid, int half_out) {
        if (grid < 2 * half_out + 1)
            throw std::invalid_argument("analysis grid must be at least 2N+1");
        fft2_forward(values, grid, grid);
        const double scale = 1.0 / (static_cast<double>(grid) * grid);
        TrigPoly out(half_out);
        for (long long k1 = -half_out; k1 <= half_out; ++k1)
            for (long long k2 = -half_out; k2 <= half_out; ++k2)
                out.coeff(k1, k2) = values[bin_index(k1, k2, grid)] * scale;
        return out;
    }

    // embed or cut to a new half width
    TrigPoly truncate(int half_out) const {
        TrigPoly out(half_out);
        int m = std::min(n_, half_out);
        for (long long k1 = -m; k1 <= m; ++k1)
            for (long long k2 = -m; k2 <= m; ++k2)
                out.coeff(k1, k2) = coeff(k1, k2);
        return out;
    }

    double l2_norm() const {
        long double acc = 0;
        for (const auto& z : c_) acc += static_cast<long double>(std::norm(z));
        return static_cast<double>(std::sqrt(acc));
    }

    double max_abs_coeff() const {
        double m = 0;
        for (const auto& z : c_) m = std::max(m, std::abs(z));
        return m;
    }

    // l2 mass fraction sitting on the outermost frequency shell
    double edge_fraction() const {
        if (n_ == 0) return 0.0;
        long double edge = 0, total = 0;
        for (long long k1 = -n_; k1 <= n_; ++k1)
            for (long long k2 = -n_; k2 <= n_; ++k2) {
                long double m = std::norm(coeff(k1, k2));
                total += m;
                if (std::llabs(k1) == n_ || std::llabs(k2) == n_) edge += m;
            }
        if (total == 0) return 0.0;
        return static_cast<double>(std::sqrt(edge / total));
    }

    bool is_hermitian(double tol = 1e-12) const {
        for (long long k1 = -n_; k1 <= n_; ++k1)
            for (long long k2 = -n_; k2 <= n_; ++k2)
                if (std::abs(coeff(k1, k2) - std::conj(coeff(-k1, -k2))) > tol)
                    return false;
        return true;
    }

    TrigPoly& operator+=(const TrigPoly& o) {
        require_same_box(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    TrigPoly& operator-=(const TrigPoly& o) {
        require_same_box(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    TrigPoly& operator*=(Complex z) {
        for (auto& v : c_) v *= z;
        return *this;
    }
    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
    friend TrigPoly operator*(TrigPoly a, Complex z) { return a *= z; }

  private:
    static std::size_t bin_index(long long k1, long long k2, int grid) {
        long long b1 = (k1 % grid + grid) % grid;
        long long b2 = (k2 % grid + grid) % grid;
        return static_cast<std::size_t>(b1) * grid + static_cast<std::size_t>(b2);
    }

    void fill_phases(std::vector<Complex>& out, double x) const {
        const Complex step = std::polar(1.0, 2 * M_PI * x);
        Complex cur = std::polar(1.0, -2 * M_PI * n_ * x);
        for (int i = 0; i < width(); ++i) {
            out[i] = cur;
            cur *= step;
        }
    }

    void require_same_box(const TrigPoly& o) const {
        if (o.n_ != n_) throw std::invalid_argument("trig poly boxes differ");
    }

    int n_;
    std::vector<Complex> c_;
};

// counter-based generator so coefficient streams are reproducible across
// platforms (no library distribution objects involved)
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

// random polynomial with |c_k| ~ (1 + |k|^3)^-1 so norms of interest converge;
// the draw order is fixed (lexicographic in k), making (N, seed) -> output
// deterministic
inline TrigPoly random_trig_poly(int half_width, std::uint64_t seed) {
    TrigPoly f(half_width);
    std::uint64_t state = seed;
    for (long long k1 = -half_width; k1 <= half_width; ++k1)
        for (long long k2 = -half_width; k2 <= half_width; ++k2) {
            double u1 = 2 * unit_interval(splitmix64(state)) - 1;
            double u2 = 2 * unit_interval(splitmix64(state)) - 1;
            double kn = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
            double damp = 1.0 / (1.0 + kn * kn * kn);
            f.coeff(k1, k2) = std::complex<double>(u1 * damp, u2 * damp);
        }
    return f;
}

}  // namespace anosov
