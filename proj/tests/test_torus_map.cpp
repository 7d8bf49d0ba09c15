#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "anosov/geometry.hpp"
#include "anosov/torus_map.hpp"

using namespace anosov;

namespace {

const ToralAutomorphism kCat(2, 1, 1, 1);

ConjugacyDiffeo shear_chart(double amplitude = 0.03) {
    // u(x, y) = (amplitude * sin(2 pi y), 0): volume preserving single shear
    return ConjugacyDiffeo({{0, 1, {0.0, -amplitude / 2}}}, {});
}

ConjugacyDiffeo skew_chart(double amplitude = 0.02) {
    // u(x, y) = (amplitude * sin(2 pi (x + y)), 0): det(DPhi) not constant
    return ConjugacyDiffeo({{1, 1, {0.0, -amplitude / 2}}}, {});
}

// difference of two torus points as the nearest lift representative
Vec2 torus_delta(const Vec2& p, const Vec2& q) {
    auto wrap = [](double t) { return t - std::round(t); };
    return {wrap(p.x - q.x), wrap(p.y - q.y)};
}

}  // namespace

TEST_CASE("geometry primitives") {
    SECTION("mod1 lands in [0,1) and snaps near-integers") {
        REQUIRE(mod1(-0.25) == Catch::Approx(0.75));
        REQUIRE(mod1(1.0) == 0.0);
        REQUIRE(mod1(3.25) == Catch::Approx(0.25));
        REQUIRE(mod1(-1e-16) == 0.0);
        REQUIRE(mod1(1.0 - 1e-16) == 0.0);
        REQUIRE(std::signbit(mod1(-0.0)) == false);
    }

    SECTION("torus distance uses the shortest representative") {
        REQUIRE(torus_dist(Vec2{0.99, 0.5}, Vec2{0.01, 0.5}) == Catch::Approx(0.02));
        REQUIRE(torus_dist(Vec2{0.25, 0.0}, Vec2{0.25, 0.75}) == Catch::Approx(0.25));
    }

    SECTION("operator norm matches a brute-force sweep over unit vectors") {
        std::vector<Mat2> mats = {{3, 1, 0, 2}, {2, 1, 1, 1}, {0.5, -0.3, 0.8, 0.1}};
        for (const auto& m : mats) {
            double best = 0;
            for (int i = 0; i < 20000; ++i) {
                double th = 2 * M_PI * i / 20000.0;
                Vec2 v{std::cos(th), std::sin(th)};
                best = std::max(best, (m * v).norm());
            }
            REQUIRE(m.op_norm() == Catch::Approx(best).epsilon(1e-7));
        }
    }

    SECTION("2x2 inverse and determinant") {
        Mat2 m{2, 1, 1, 1};
        Mat2 mi = m.inverse();
        Mat2 id = m * mi;
        REQUIRE(id.a == Catch::Approx(1.0));
        REQUIRE(id.d == Catch::Approx(1.0));
        REQUIRE(std::fabs(id.b) < 1e-15);
        REQUIRE(std::fabs(id.c) < 1e-15);
        REQUIRE(m.det() == Catch::Approx(1.0));
    }
}

TEST_CASE("integer matrix arithmetic is exact") {
    IntMat2 a{2, 1, 1, 1};

    SECTION("powers follow the Fibonacci pattern") {
        IntMat2 a8 = a.power(8);
        REQUIRE(a8.a == 1597);
        REQUIRE(a8.b == 987);
        REQUIRE(a8.c == 987);
        REQUIRE(a8.d == 610);
        REQUIRE(a8.det() == 1);
    }

    SECTION("negative powers invert exactly") {
        IntMat2 am8 = a.power(-8);
        IntMat2 id = a.power(8) * am8;
        REQUIRE(id.a == 1);
        REQUIRE(id.b == 0);
        REQUIRE(id.c == 0);
        REQUIRE(id.d == 1);
        REQUIRE(am8.a == 610);
        REQUIRE(am8.b == -987);
    }

    SECTION("wavevector action is the transpose") {
        auto k = a.transpose_apply(13, -21);
        REQUIRE(k[0] == 2 * 13 + 1 * (-21));
        REQUIRE(k[1] == 1 * 13 + 1 * (-21));
    }

    SECTION("overflow in repeated squaring is caught") {
        REQUIRE_THROWS_AS(a.power(64), std::overflow_error);
    }

    SECTION("non-unimodular inverse is rejected") {
        IntMat2 bad{2, 0, 0, 1};
        REQUIRE_THROWS_AS(bad.inverse(), std::domain_error);
    }
}

TEST_CASE("automorphism eigendata") {
    SECTION("golden-ratio eigenvalues of the standard example") {
        REQUIRE(static_cast<double>(kCat.eig_unstable()) ==
                Catch::Approx(2.6180339887498948482).epsilon(1e-15));
        REQUIRE(static_cast<double>(kCat.eig_stable()) ==
                Catch::Approx(0.3819660112501051518).epsilon(1e-15));
    }

    SECTION("eigenvector residuals vanish in extended precision") {
        for (auto [lam, v] : {std::pair{kCat.eig_stable(), kCat.dir_stable()},
                              std::pair{kCat.eig_unstable(), kCat.dir_unstable()}}) {
            Vec2L r = kCat.matrix().apply(v) - v * lam;
            REQUIRE(static_cast<double>(r.norm()) < 1e-18);
            REQUIRE(static_cast<double>(v.norm()) == Catch::Approx(1.0).epsilon(1e-18));
        }
    }

    SECTION("symmetric matrix has orthogonal eigendirections") {
        REQUIRE(std::fabs(static_cast<double>(kCat.dir_stable().dot(kCat.dir_unstable()))) < 1e-18);
    }

    SECTION("eigenvalues multiply to det and sum to trace") {
        ToralAutomorphism m(3, 1, 1, 0);  // det = -1, stable eigenvalue negative
        REQUIRE(static_cast<double>(m.eig_stable() * m.eig_unstable()) ==
                Catch::Approx(-1.0).epsilon(1e-15));
        REQUIRE(static_cast<double>(m.eig_stable() + m.eig_unstable()) ==
                Catch::Approx(3.0).epsilon(1e-15));
        REQUIRE(std::fabs(static_cast<double>(m.eig_stable())) < 1.0);
    }

    SECTION("non-hyperbolic or non-unimodular matrices are rejected") {
        REQUIRE_THROWS_AS(ToralAutomorphism(1, 1, 0, 1), std::invalid_argument);  // shear
        REQUIRE_THROWS_AS(ToralAutomorphism(2, 0, 0, 2), std::invalid_argument);  // det 4
        REQUIRE_THROWS_AS(ToralAutomorphism(0, 1, -1, 0), std::invalid_argument);  // rotation
    }
}

TEST_CASE("conjugacy chart") {
    SECTION("default chart is the identity") {
        ConjugacyDiffeo id;
        REQUIRE(id.is_identity());
        Vec2L w{0.3L, 0.8L};
        REQUIRE(static_cast<double>(torus_dist(id.forward(w), w)) < 1e-18);
        Mat2L j = id.jacobian(w);
        REQUIRE(static_cast<double>(j.a) == 1.0);
        REQUIRE(static_cast<double>(j.b) == 0.0);
    }

    SECTION("mode list produces the intended real displacement") {
        ConjugacyDiffeo phi = shear_chart(0.03);
        for (double y : {0.0, 0.125, 0.37, 0.61, 0.99}) {
            Vec2L u = phi.displacement({0.42L, static_cast<long double>(y)});
            REQUIRE(static_cast<double>(u.x) ==
                    Catch::Approx(0.03 * std::sin(2 * M_PI * y)).margin(1e-15));
            REQUIRE(static_cast<double>(u.y) == 0.0);
        }
        // the reported sup is a grid max, accurate to O(1/G^2) relative
        REQUIRE(phi.sup_displacement() == Catch::Approx(0.03).epsilon(2e-3));
    }

    SECTION("jacobian matches finite differences of the displacement") {
        ConjugacyDiffeo phi({{1, 1, {0.004, -0.01}}, {0, 2, {0.0, 0.006}}},
                            {{1, 0, {-0.008, 0.003}}});
        const long double h = 1e-6L;
        for (auto w : {Vec2L{0.2L, 0.7L}, Vec2L{0.55L, 0.13L}}) {
            Mat2L j = phi.jacobian(w);
            Mat2L fd;
            Vec2L ex{h, 0}, ey{0, h};
            Vec2L dx = (phi.displacement(w + ex) - phi.displacement(w - ex)) * (1 / (2 * h));
            Vec2L dy = (phi.displacement(w + ey) - phi.displacement(w - ey)) * (1 / (2 * h));
            fd = Mat2L{1 + dx.x, dy.x, dx.y, 1 + dy.y};
            REQUIRE(static_cast<double>(std::fabs(j.a - fd.a)) < 1e-8);
            REQUIRE(static_cast<double>(std::fabs(j.b - fd.b)) < 1e-8);
            REQUIRE(static_cast<double>(std::fabs(j.c - fd.c)) < 1e-8);
            REQUIRE(static_cast<double>(std::fabs(j.d - fd.d)) < 1e-8);
        }
    }

    SECTION("inverse undoes forward on a grid") {
        ConjugacyDiffeo phi = skew_chart(0.02);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) {
                Vec2L w{(i + 0.5L) / 9, (j + 0.5L) / 9};
                REQUIRE(static_cast<double>(torus_dist(phi.inverse(phi.forward(w)), w)) < 1e-11);
            }
    }

    SECTION("steep displacements are rejected at construction") {
        // 0.4 sin(2 pi x) has |Du| up to 0.8 pi
        REQUIRE_THROWS_AS(ConjugacyDiffeo({{1, 0, {0.0, -0.2}}}, {}), std::invalid_argument);
    }

    SECTION("volume preservation is detected") {
        REQUIRE(shear_chart().volume_preserving());
        REQUIRE_FALSE(skew_chart().volume_preserving());
    }
}

TEST_CASE("linear map evaluation and exponents") {
    SmoothToralMap cat = SmoothToralMap::linear(kCat);

    SECTION("one step matches direct arithmetic") {
        Vec2 w{0.2, 0.7};
        Vec2 t = cat.evaluate(w, 1);
        REQUIRE(t.x == Catch::Approx(std::fmod(2 * 0.2 + 0.7, 1.0)).margin(1e-15));
        REQUIRE(t.y == Catch::Approx(0.9).margin(1e-15));
    }

    SECTION("iterates compose") {
        Vec2 w{0.123, 0.456};
        Vec2 a = cat.evaluate(w, 3);
        Vec2 b = cat.evaluate(cat.evaluate(w, 2), 1);
        REQUIRE(torus_dist(a.cast<long double>(), b.cast<long double>()) < 1e-12);
        Vec2 back = cat.evaluate(cat.evaluate(w, 5), -5);
        REQUIRE(torus_dist(back.cast<long double>(), w.cast<long double>()) < 1e-12);
    }

    SECTION("exponents are the eigenvalue powers, far below tolerance") {
        long double lu = kCat.eig_unstable(), ls = kCat.eig_stable();
        for (long long n : {1LL, 4LL, 8LL}) {
            auto e = cat.local_exponents({0.37, 0.82}, n);
            REQUIRE(e.nu == Catch::Approx(static_cast<double>(std::pow(ls, n))).epsilon(1e-13));
            REQUIRE(e.lambda == Catch::Approx(static_cast<double>(std::pow(lu, n))).epsilon(1e-13));
            REQUIRE(e.contracting);
        }
    }

    SECTION("exponents are position independent") {
        auto e1 = cat.local_exponents({0.1, 0.2}, 6);
        auto e2 = cat.local_exponents({0.9, 0.45}, 6);
        REQUIRE(e1.nu == Catch::Approx(e2.nu).epsilon(1e-14));
        REQUIRE(e1.lambda == Catch::Approx(e2.lambda).epsilon(1e-14));
    }

    SECTION("orientation-reversing stable direction still contracts") {
        SmoothToralMap m = SmoothToralMap::linear(ToralAutomorphism(3, 1, 1, 0));
        auto e = m.local_exponents({0.3, 0.3}, 2);
        long double ls = ToralAutomorphism(3, 1, 1, 0).eig_stable();
        REQUIRE(e.nu == Catch::Approx(static_cast<double>(ls * ls)).epsilon(1e-13));
        REQUIRE(e.contracting);
    }

    SECTION("inverse map swaps the exponent roles") {
        SmoothToralMap inv = cat.inverse_map();
        Vec2 w{0.31, 0.64};
        auto ei = inv.local_exponents(w, 5);
        Vec2 pre = inv.evaluate(w, 5);
        auto ef = cat.local_exponents(pre, 5);
        REQUIRE(ei.nu == Catch::Approx(1.0 / ef.lambda).epsilon(1e-13));
        REQUIRE(ei.lambda == Catch::Approx(1.0 / ef.nu).epsilon(1e-13));
    }

    SECTION("unit determinant and onset at the first iterate") {
        REQUIRE(cat.det_jacobian({0.2, 0.9}, 7) == Catch::Approx(1.0).epsilon(1e-15));
        REQUIRE(cat.contraction_onset(8, 8) == 1);
        REQUIRE(cat.volume_preserving());
    }
}

TEST_CASE("conjugated map differentials") {
    SmoothToralMap map = SmoothToralMap::conjugated(kCat, skew_chart(0.02));

    SECTION("an identity chart degrades to the linear map") {
        REQUIRE(SmoothToralMap::conjugated(kCat, ConjugacyDiffeo{}).is_linear());
        REQUIRE_FALSE(map.is_linear());
    }

    SECTION("differential matches finite differences of the flow") {
        const double h = 1e-5;
        for (auto w : {Vec2{0.21, 0.68}, Vec2{0.77, 0.05}}) {
            Mat2 d = map.differential(w, 1);
            Vec2 cx = torus_delta(map.evaluate({w.x + h, w.y}, 1), map.evaluate({w.x - h, w.y}, 1)) * (1 / (2 * h));
            Vec2 cy = torus_delta(map.evaluate({w.x, w.y + h}, 1), map.evaluate({w.x, w.y - h}, 1)) * (1 / (2 * h));
            REQUIRE(std::fabs(d.a - cx.x) < 1e-6);
            REQUIRE(std::fabs(d.c - cx.y) < 1e-6);
            REQUIRE(std::fabs(d.b - cy.x) < 1e-6);
            REQUIRE(std::fabs(d.d - cy.y) < 1e-6);
        }
    }

    SECTION("telescoped differential equals the chain product") {
        Vec2 w{0.4, 0.15};
        Mat2 tele = map.differential(w, 3);
        Mat2 chain = map.differential(map.evaluate(w, 2), 1) *
                     map.differential(map.evaluate(w, 1), 1) * map.differential(w, 1);
        REQUIRE(std::fabs(tele.a - chain.a) < 1e-9);
        REQUIRE(std::fabs(tele.b - chain.b) < 1e-9);
        REQUIRE(std::fabs(tele.c - chain.c) < 1e-9);
        REQUIRE(std::fabs(tele.d - chain.d) < 1e-9);
    }

    SECTION("forward and backward iterates cancel") {
        Vec2 w{0.62, 0.33};
        Vec2 back = map.evaluate(map.evaluate(w, 2), -2);
        REQUIRE(torus_dist(back.cast<long double>(), w.cast<long double>()) < 1e-10);
    }

    SECTION("determinant cocycle") {
        Vec2 w{0.27, 0.81};
        double lhs = map.det_jacobian(w, 5);
        double rhs = map.det_jacobian(w, 2) * map.det_jacobian(map.evaluate(w, 2), 3);
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-10));
        REQUIRE_FALSE(map.volume_preserving());
    }

    SECTION("volume-preserving chart gives unit jacobian everywhere") {
        SmoothToralMap vp = SmoothToralMap::conjugated(kCat, shear_chart(0.03));
        REQUIRE(vp.volume_preserving());
        for (auto w : {Vec2{0.11, 0.92}, Vec2{0.5, 0.5}, Vec2{0.83, 0.26}})
            REQUIRE(vp.det_jacobian(w, 4) == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("average jacobian over the torus is the degree") {
        const int g = 64;
        long double acc = 0;
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j)
                acc += map.det_jacobian({(i + 0.5) / g, (j + 0.5) / g}, 1);
        REQUIRE(static_cast<double>(acc / (g * g)) == Catch::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("conjugated map exponents and foliations") {
    ConjugacyDiffeo phi = skew_chart(0.02);
    SmoothToralMap map = SmoothToralMap::conjugated(kCat, phi);
    long double lu = kCat.eig_unstable(), ls = kCat.eig_stable();

    SECTION("transported directions against the chart jacobian formula") {
        // nu(w, n) = |ls|^n |DPhi(T^n w)^-1 vs| / |DPhi(w)^-1 vs| and the
        // mirrored formula for lambda follow from the telescoped differential
        for (auto w : {Vec2{0.18, 0.44}, Vec2{0.73, 0.91}}) {
            for (long long n : {1LL, 3LL, 6LL}) {
                auto e = map.local_exponents(w, n);
                Vec2L wl = w.cast<long double>();
                Vec2L twl = map.evaluate_ld(wl, n);
                long double num_s = (phi.jacobian(twl).inverse() * kCat.dir_stable()).norm();
                long double den_s = (phi.jacobian(wl).inverse() * kCat.dir_stable()).norm();
                long double num_u = (phi.jacobian(twl).inverse() * kCat.dir_unstable()).norm();
                long double den_u = (phi.jacobian(wl).inverse() * kCat.dir_unstable()).norm();
                long double nu_ref = std::pow(std::fabs(ls), (long double)n) * num_s / den_s;
                long double lam_ref = std::pow(std::fabs(lu), (long double)n) * num_u / den_u;
                REQUIRE(e.nu == Catch::Approx(static_cast<double>(nu_ref)).epsilon(1e-11));
                REQUIRE(e.lambda == Catch::Approx(static_cast<double>(lam_ref)).epsilon(1e-11));
            }
        }
    }

    SECTION("exponents stay within the chart distortion envelope") {
        double kap = phi.kappa();
        double lo = (1 - kap) / (1 + kap), hi = (1 + kap) / (1 - kap);
        for (long long n : {1LL, 4LL, 8LL}) {
            auto e = map.local_exponents({0.35, 0.6}, n);
            double nus = static_cast<double>(std::pow(ls, n));
            double lus = static_cast<double>(std::pow(lu, n));
            REQUIRE(e.nu >= lo * nus);
            REQUIRE(e.nu <= hi * nus);
            REQUIRE(e.lambda >= lo * lus);
            REQUIRE(e.lambda <= hi * lus);
        }
    }

    SECTION("inverse map exponent identity carries over") {
        SmoothToralMap inv = map.inverse_map();
        Vec2 w{0.52, 0.19};
        auto ei = inv.local_exponents(w, 4);
        Vec2 pre = inv.evaluate(w, 4);
        auto ef = map.local_exponents(pre, 4);
        REQUIRE(ei.nu == Catch::Approx(1.0 / ef.lambda).epsilon(1e-9));
        REQUIRE(ei.lambda == Catch::Approx(1.0 / ef.nu).epsilon(1e-9));
    }

    SECTION("block decomposition is upper triangular in the foliation bases") {
        for (auto w : {Vec2{0.05, 0.95}, Vec2{0.48, 0.27}}) {
            auto blk = map.block_decomposition(w, 3);
            auto e = map.local_exponents(w, 3);
            REQUIRE(std::fabs(blk.lower_left) < 1e-9);
            REQUIRE(std::fabs(blk.a) == Catch::Approx(e.nu).epsilon(1e-9));
            REQUIRE(std::fabs(blk.d) == Catch::Approx(e.lambda).epsilon(1e-9));
            REQUIRE(blk.rem_ratio < 1.0);
            REQUIRE(std::fabs(blk.basis_det_w) > 0.5);
        }
    }

    SECTION("linear block decomposition is exactly diagonal") {
        SmoothToralMap cat = SmoothToralMap::linear(kCat);
        auto blk = cat.block_decomposition({0.3, 0.7}, 4);
        REQUIRE(std::fabs(blk.lower_left) < 1e-14);
        REQUIRE(std::fabs(blk.b) < 1e-12);
        REQUIRE(std::fabs(blk.a) == Catch::Approx(static_cast<double>(std::pow(ls, 4))).epsilon(1e-12));
        REQUIRE(std::fabs(blk.d) == Catch::Approx(static_cast<double>(std::pow(lu, 4))).epsilon(1e-12));
    }

    SECTION("uniform contraction sets in at a finite iterate") {
        int onset = map.contraction_onset(8, 8);
        REQUIRE(onset >= 1);
        auto e = map.local_exponents({0.4, 0.9}, onset);
        REQUIRE(e.contracting);
    }
}
