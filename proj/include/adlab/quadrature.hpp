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

#include <Eigen/Dense>
#include <functional>

namespace adlab {

struct QuadRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Gauss-Legendre rule on [-1,1] via the Golub-Welsch eigenproblem.
const QuadRule& gauss_legendre(int n);

/// Gauss-Hermite rule for the weight e^{-t^2} on R.
const QuadRule& gauss_hermite(int n);

/// Adaptive panel integration of f on [a,b]: a panel is accepted when the
/// two-half refinement agrees with it to rel_tol (with an absolute floor
/// tied to the running magnitude).
double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-9, int max_depth = 40, int order = 21);

} // namespace adlab
