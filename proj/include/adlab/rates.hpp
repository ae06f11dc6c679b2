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

#pragma once

#include "adlab/potential.hpp"

namespace adlab {

/// Leading-order Eyring-Kramers prediction for the small nonzero eigenvalue,
/// with the inputs echoed for provenance. No (1+O(sqrt h)) correction is
/// applied; comparisons against numerics use the ratio lambda_num/lambda_ek.
struct RatePrediction {
    double mu = 0;        // saddle rate
    double prefactor = 0; // mu * sqrt(det Hess V(m_hat)) / (2 pi sqrt|det Hess V(s)|)
    double lambda = 0;    // prefactor * h * exp(-S/h)
    double h = 0;
    double gamma = 0;
    double eta = 0;
    double barrier_S = 0;
    double det_hess_m_hat = 0;
    double det_hess_saddle = 0;

    double log_lambda() const; // safe for very small h
};

/// Positive root of mu^2 + gamma mu - eta = 0.
double mu_of_saddle(double gamma, double eta);

/// Hypocoercive scale g(h) = h min(nu^2 h gamma, 1/gamma, gamma/(nu^2 h), nu^2 h/gamma).
double rate_g(double h, double gamma, double nu);

RatePrediction eyring_kramers_rate(const DoubleWellTopology& topo, double gamma, double h);

} // namespace adlab
