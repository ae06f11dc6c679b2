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

#include "adlab/rates.hpp"

#include <cmath>
#include <numbers>

namespace adlab {

double mu_of_saddle(double gamma, double eta) {
    if (gamma <= 0 || eta <= 0)
        fail(errc::parameter, "mu_of_saddle: gamma and eta must be positive");
    return 0.5 * (-gamma + std::sqrt(gamma * gamma + 4.0 * eta));
}

double rate_g(double h, double gamma, double nu) {
    if (h <= 0 || gamma <= 0 || nu <= 0)
        fail(errc::parameter, "rate_g: all parameters must be positive");
    const double a = nu * nu * h;
    return h * std::min(std::min(a * gamma, 1.0 / gamma), std::min(gamma / a, a / gamma));
}

double RatePrediction::log_lambda() const {
    return std::log(prefactor * h) - barrier_S / h;
}

RatePrediction eyring_kramers_rate(const DoubleWellTopology& topo, double gamma, double h) {
    if (h <= 0) fail(errc::parameter, "eyring_kramers_rate: h must be positive");
    if (topo.saddle.index != 1 || topo.det_hess_saddle >= 0)
        fail(errc::topology, "eyring_kramers_rate: saddle Hessian data missing or invalid");

    RatePrediction r;
    r.h = h;
    r.gamma = gamma;
    r.eta = topo.saddle.eta();
    r.barrier_S = topo.barrier_S;
    r.det_hess_m_hat = topo.det_hess_m_hat;
    r.det_hess_saddle = topo.det_hess_saddle;
    r.mu = mu_of_saddle(gamma, r.eta);
    r.prefactor = r.mu * std::sqrt(r.det_hess_m_hat) /
                  (2.0 * std::numbers::pi * std::sqrt(std::abs(r.det_hess_saddle)));
    r.lambda = r.prefactor * h * std::exp(-r.barrier_S / h);
    return r;
}

} // namespace adlab
