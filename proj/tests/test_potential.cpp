/*
   Copyright 2026 the adlab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <cmath>
#include <random>

#include "adlab/potential.hpp"

using namespace adlab;

namespace {

// Independent root oracle: scan V' for sign changes on a fine grid, then
// bisect. Used to freeze the expected critical points of the tilted quartic.
std::vector<double> bisection_roots(const Potential& V, double lo, double hi) {
    std::vector<double> roots;
    const int n = 200000;
    double prev_x = lo, prev_g = V.dV(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double g = V.dV(x);
        if (prev_g == 0.0) roots.push_back(prev_x);
        else if (prev_g * g < 0) {
            double a = prev_x, b = x;
            for (int k = 0; k < 200; ++k) {
                const double m = 0.5 * (a + b);
                (V.dV(a) * V.dV(m) <= 0 ? b : a) = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_g = g;
    }
    return roots;
}

} // namespace

TEST_CASE("quartic family: exact derivatives agree with finite differences") {
    const auto V = Potential::quartic(0.25, 0.0, -0.5, 0.1);
    Potential fd([&](double x) { return V.V(x); }, -2.5, 2.5); // FD-only twin

    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double x = U(gen);
        const double scale = std::max(1.0, std::abs(V.dV(x)));
        CHECK(std::abs(V.dV(x) - fd.dV(x)) / scale < 1e-6);
    }
    // higher orders: looser but still tight for a quartic
    for (double x : {-1.3, -0.4, 0.2, 0.9, 1.7}) {
        CHECK(std::abs(V.d2V(x) - fd.d2V(x)) < 1e-5 * std::max(1.0, std::abs(V.d2V(x))));
        CHECK(std::abs(V.d3V(x) - fd.d3V(x)) < 1e-4 * std::max(1.0, std::abs(V.d3V(x))));
        CHECK(std::abs(V.d4V(x) - fd.d4V(x)) < 1e-4 * std::max(1.0, std::abs(V.d4V(x))));
    }
}

TEST_CASE("find_critical_points: symmetric quartic has roots of x^3 - x") {
    const auto V = Potential::quartic(0.25, 0.0, -0.5, 0.0);
    const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].x == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(pts[1].x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(pts[2].x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pts[0].index == 0);
    CHECK(pts[1].index == 1);
    CHECK(pts[2].index == 0);
    for (const auto& p : pts) CHECK(std::abs(V.dV(p.x)) <= 1e-10);
}

TEST_CASE("find_critical_points: tilted quartic matches the bisection oracle") {
    const auto V = Potential::preset("tilted_quartic");
    const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
    REQUIRE(pts.size() == 3);

    // Frozen from the oracle below (also cross-checked at run time).
    const double expected[3] = {-1.0466805318046023, 0.10103125788101082, 0.9456492739235914};
    for (int i = 0; i < 3; ++i) CHECK(pts[i].x == doctest::Approx(expected[i]).epsilon(1e-10));
    CHECK(pts[0].index == 0);
    CHECK(pts[1].index == 1);
    CHECK(pts[2].index == 0);

    const auto oracle = bisection_roots(V, -2.0, 2.0);
    REQUIRE(oracle.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(pts[i].x == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("find_critical_points: figure-1 preset census") {
    const auto V = Potential::preset("figure1");
    const auto pts = find_critical_points(V, V.box_lo(), V.box_hi(), 1e-10);
    int minima = 0, saddles = 0;
    for (const auto& p : pts) (p.index == 0 ? minima : saddles)++;
    CHECK(minima == 2);
    CHECK(saddles == 1);
}

TEST_CASE("find_critical_points: error paths") {
    // no critical point inside the box
    const auto Vlin = Potential::quartic(0.25, 0.0, -0.5, 0.0);
    CHECK_THROWS_WITH_AS((void)find_critical_points(Vlin, 1.5, 2.0, 1e-10),
                         doctest::Contains("no critical points"), Error);

    // non-Morse: V = x^4 has a degenerate critical point at 0
    const auto Vdeg = Potential::quartic(1.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS((void)find_critical_points(Vdeg, -2.0, 2.0, 1e-10), Error);
}

TEST_CASE("classify_topology") {
    SUBCASE("symmetric wells are degenerate") {
        const auto V = Potential::quartic(0.25, 0.0, -0.5, 0.0);
        const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
        try {
            (void)classify_topology(pts, V);
            FAIL("expected degenerate-wells error");
        } catch (const Error& e) {
            CHECK(e.code() == errc::degenerate_wells);
        }
    }

    SUBCASE("tilted quartic: values from direct evaluation at the roots") {
        const auto V = Potential::preset("tilted_quartic");
        const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
        const auto t = classify_topology(pts, V);
        CHECK(t.m_under.x == doctest::Approx(-1.0466805318046023).epsilon(1e-10));
        CHECK(t.m_hat.x == doctest::Approx(0.9456492739235914).epsilon(1e-10));
        CHECK(t.saddle.x == doctest::Approx(0.10103125788101082).epsilon(1e-10));
        // oracle = direct evaluation at the root-found points
        const double S_oracle = V.V(t.saddle.x) - V.V(t.m_hat.x);
        CHECK(t.barrier_S == doctest::Approx(S_oracle).epsilon(1e-14));
        CHECK(t.barrier_S > 0);
        CHECK(2.0 * t.barrier_S_tilde == doctest::Approx(t.barrier_S).epsilon(1e-14));
        CHECK(t.v_m_under < t.v_m_hat);
        CHECK(t.v_m_hat < t.v_saddle);
        // D_{X*} = |det Hess f|^{1/2} with Hess f = blockdiag(V''/2,1/2,1/2)
        CHECK(t.D_saddle ==
              doctest::Approx(std::sqrt(std::abs(t.saddle.hess) / 8.0)).epsilon(1e-14));
    }

    SUBCASE("wrong census is rejected") {
        const auto V = Potential::quartic(0.25, 0.0, -0.5, 0.1);
        std::vector<CriticalPoint> two_minima = {{-1.0, 0, 2.0}, {1.0, 0, 2.0}};
        try {
            (void)classify_topology(two_minima, V);
            FAIL("expected census error");
        } catch (const Error& e) {
            CHECK(e.code() == errc::not_double_well);
        }
        std::vector<CriticalPoint> census011 = {{-1.0, 0, 2.0}, {0.0, 1, -1.0}, {1.0, 1, -1.0}};
        CHECK_THROWS_AS((void)classify_topology(census011, V), Error);
    }
}

TEST_CASE("extended_phase closed forms") {
    const auto V = Potential::preset("tilted_quartic");

    CHECK_THROWS_AS((void)extended_phase(V, -1.0, 1.0), Error);
    CHECK_THROWS_AS((void)extended_phase(V, 1.0, 0.0), Error);

    const auto phase = extended_phase(V, 1.0, 2.0);

    // f at (x*,0,0) = V(x*)/2
    for (double x : {-1.0466805318046023, 0.10103125788101082, 0.9456492739235914})
        CHECK(phase.f(Vec3(x, 0, 0)) == doctest::Approx(0.5 * V.V(x)).epsilon(1e-14));

    // grad f = (V'/2, v/2, y/2)
    const Vec3 X(0.3, -0.7, 1.1);
    const Vec3 g = phase.grad_f(X);
    CHECK(g[0] == doctest::Approx(0.5 * V.dV(0.3)).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(-0.35).epsilon(1e-14));
    CHECK(g[2] == doctest::Approx(0.55).epsilon(1e-14));

    // b0 at (0, v, y) with nu = 2: (v, -V'(0) - 2yv, 2v^2)
    const double v = 0.4, y = -0.9;
    const Vec3 b = phase.b0(Vec3(0.0, v, y));
    CHECK(b[0] == doctest::Approx(v).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(-V.dV(0.0) - 2.0 * y * v).epsilon(1e-14));
    CHECK(b[2] == doctest::Approx(2.0 * v * v).epsilon(1e-14));
}

TEST_CASE("lifted critical points keep their Morse index") {
    const auto V = Potential::preset("tilted_quartic");
    const auto phase = extended_phase(V, 1.0, 1.0);
    const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
    for (const auto& p : pts) {
        const Vec3 X(p.x, 0.0, 0.0);
        CHECK(phase.grad_f(X).norm() <= 1e-10);
        Eigen::SelfAdjointEigenSolver<Mat3> es(phase.hess_f_at_critical(p));
        int neg = 0;
        for (int i = 0; i < 3; ++i)
            if (es.eigenvalues()[i] < 0) ++neg;
        CHECK(neg == p.index);
    }
}

TEST_CASE("B^T H is antisymmetric at the saddle") {
    const auto V = Potential::preset("tilted_quartic");
    const auto phase = extended_phase(V, 1.3, 0.7);
    const auto pts = find_critical_points(V, -2.0, 2.0, 1e-10);
    const auto topo = classify_topology(pts, V);
    const Mat3 H = phase.hess_f_at_critical(topo.saddle);
    const Mat3 B = phase.db0_at_critical(topo.saddle);
    const Mat3 M = B.transpose() * H;
    CHECK((M + M.transpose()).norm() <= 1e-12);
}

TEST_CASE("Gibbs kernel is annihilated by H0, Y, O pointwise") {
    const auto V = Potential::preset("tilted_quartic");
    const auto phase = extended_phase(V, 1.0, 1.0);
    const double h = 0.3;
    auto u = [&](const Vec3& X) { return std::exp(-phase.f(X) / h); };

    // 4th-order finite differences of the kernel in each variable
    auto d1 = [&](const Vec3& X, int i) {
        const double s = 1e-3;
        Vec3 a = X, b = X, c = X, d = X;
        a[i] += 2 * s; b[i] += s; c[i] -= s; d[i] -= 2 * s;
        return (-u(a) + 8 * u(b) - 8 * u(c) + u(d)) / (12 * s);
    };
    auto d2 = [&](const Vec3& X, int i) {
        const double s = 2e-3;
        Vec3 a = X, b = X, c = X, d = X;
        a[i] += 2 * s; b[i] += s; c[i] -= s; d[i] -= 2 * s;
        return (-u(a) + 16 * u(b) - 30 * u(X) + 16 * u(c) - u(d)) / (12 * s * s);
    };

    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Vec3 X(U(gen), U(gen), U(gen));
        const double x = X[0], v = X[1], y = X[2];
        const double H0u = v * h * d1(X, 0) - V.dV(x) * h * d1(X, 1);
        const double dyu = h * d1(X, 2) + 0.5 * y * u(X); // twisted derivative
        const double dvu = h * d1(X, 1) + 0.5 * v * u(X);
        const double Yu = (v * v - h) * dyu - y * v * dvu;
        const double Ou = -h * h * d2(X, 1) + (0.25 * v * v - 0.5 * h) * u(X);
        const double scale = std::max(1.0, u(X));
        CHECK(std::abs(H0u) <= 1e-7 * scale);
        CHECK(std::abs(Yu) <= 1e-7 * scale);
        CHECK(std::abs(Ou) <= 1e-7 * scale);
    }
}
