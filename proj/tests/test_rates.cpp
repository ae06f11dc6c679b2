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

#include <algorithm>
#include <cmath>
#include <random>

#include "adlab/rates.hpp"

using namespace adlab;

TEST_CASE("mu_of_saddle closed forms") {
    CHECK(mu_of_saddle(1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu_of_saddle(2.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    // (sqrt(5)-1)/2, and the defining quadratic to 1e-14
    const double mu = mu_of_saddle(1.0, 1.0);
    CHECK(mu == doctest::Approx(0.6180339887498949).epsilon(1e-14));
    CHECK(std::abs(mu * mu + mu - 1.0) < 1e-14);

    CHECK_THROWS_AS((void)mu_of_saddle(0.0, 1.0), Error);
    CHECK_THROWS_AS((void)mu_of_saddle(1.0, -1.0), Error);
}

TEST_CASE("mu solves mu^2 + gamma mu - eta = 0 over random parameters") {
    std::mt19937 gen(424242);
    std::uniform_real_distribution<double> U(1e-6, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double g = U(gen), eta = U(gen);
        const double mu = mu_of_saddle(g, eta);
        CHECK(mu > 0);
        CHECK(std::abs(mu * mu + g * mu - eta) <= 1e-13 * std::max(1.0, eta));
    }
}

TEST_CASE("rate_g") {
    CHECK(rate_g(0.1, 1.0, 1.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(rate_g(1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    // direct min over the four branches
    const double h = 0.01, g = 2.0, nu = 1.0;
    const double oracle =
        h * std::min({nu * nu * h * g, 1.0 / g, g / (nu * nu * h), nu * nu * h / g});
    CHECK(oracle == doctest::Approx(5e-5).epsilon(1e-14));
    CHECK(rate_g(h, g, nu) == doctest::Approx(oracle).epsilon(1e-14));

    // for gamma = nu = 1 and h <= 1, g(h) = h^2 exactly
    for (double hh : {1.0, 0.5, 0.2, 0.05})
        CHECK(rate_g(hh, 1.0, 1.0) == doctest::Approx(hh * hh).epsilon(1e-14));

    CHECK_THROWS_AS((void)rate_g(-0.1, 1.0, 1.0), Error);
}

namespace {

DoubleWellTopology synthetic_topology(double hess_mhat, double hess_s, double S) {
    DoubleWellTopology t;
    t.m_under = {-1.0, 0, 2.0};
    t.m_hat = {1.0, 0, hess_mhat};
    t.saddle = {0.0, 1, hess_s};
    t.barrier_S = S;
    t.barrier_S_tilde = 0.5 * S;
    t.det_hess_m_under = 2.0;
    t.det_hess_m_hat = hess_mhat;
    t.det_hess_saddle = hess_s;
    return t;
}

} // namespace

TEST_CASE("eyring_kramers_rate against a high-precision oracle") {
    // d=1, V''(m_hat)=2, V''(s)=-1, gamma=1, S=0.25, h=0.1.
    // Frozen from a 30-digit evaluation of the displayed formula:
    //   mu = (sqrt(5)-1)/2, lambda = mu sqrt(2)/(2 pi) * h * exp(-S/h).
    const auto t = synthetic_topology(2.0, -1.0, 0.25);
    const auto r = eyring_kramers_rate(t, 1.0, 0.1);
    CHECK(r.mu == doctest::Approx(0.6180339887498949).epsilon(1e-14));
    CHECK(r.lambda == doctest::Approx(1.1418558585089934e-3).epsilon(1e-13));

    // S -> infinity kills the rate
    const auto rinf = eyring_kramers_rate(synthetic_topology(2.0, -1.0, 1e4), 1.0, 0.1);
    CHECK(rinf.lambda == 0.0);

    // prefactor constancy: lambda(h) e^{S/h} / h has no hidden h-dependence
    const auto r1 = eyring_kramers_rate(t, 1.0, 0.1);
    const auto r2 = eyring_kramers_rate(t, 1.0, 0.2);
    const double p1 = r1.lambda * std::exp(t.barrier_S / 0.1) / 0.1;
    const double p2 = r2.lambda * std::exp(t.barrier_S / 0.2) / 0.2;
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(r1.prefactor).epsilon(1e-12));

    // lambda increasing in h for fixed S on a sample
    double prev = 0.0;
    for (double h : {0.02, 0.05, 0.1, 0.2, 0.5}) {
        const double lam = eyring_kramers_rate(t, 1.0, h).lambda;
        CHECK(lam > prev);
        prev = lam;
    }

    // missing saddle data
    auto bad = t;
    bad.saddle.index = 0;
    bad.det_hess_saddle = 1.0;
    CHECK_THROWS_AS((void)eyring_kramers_rate(bad, 1.0, 0.1), Error);
}
