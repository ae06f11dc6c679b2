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

#include "adlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace adlab {

namespace {

QuadRule golub_welsch(int n, const std::function<double(int)>& offdiag, double mu0) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = offdiag(k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadRule r;
    r.nodes = es.eigenvalues();
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

const QuadRule& cached(std::map<int, QuadRule>& cache, std::mutex& m, int n,
                       const std::function<QuadRule(int)>& make) {
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make(n)).first;
    return it->second;
}

} // namespace

const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex m;
    return cached(cache, m, n, [](int k) {
        return golub_welsch(
            k, [](int j) { return j / std::sqrt(4.0 * j * j - 1.0); }, 2.0);
    });
}

const QuadRule& gauss_hermite(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex m;
    return cached(cache, m, n, [](int k) {
        return golub_welsch(
            k, [](int j) { return std::sqrt(0.5 * j); }, std::sqrt(std::numbers::pi));
    });
}

namespace {

double panel(const std::function<double(double)>& f, double a, double b, const QuadRule& q) {
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * f(c + s * q.nodes[i]);
    return s * acc;
}

double refine(const std::function<double(double)>& f, double a, double b, double coarse,
              double abs_tol, int depth, const QuadRule& q) {
    const double m = 0.5 * (a + b);
    const double left = panel(f, a, m, q);
    const double right = panel(f, m, b, q);
    const double fine = left + right;
    if (depth <= 0 || std::abs(fine - coarse) <= abs_tol) return fine;
    return refine(f, a, m, left, 0.5 * abs_tol, depth - 1, q) +
           refine(f, m, b, right, 0.5 * abs_tol, depth - 1, q);
}

} // namespace

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double rel_tol, int max_depth, int order) {
    const QuadRule& q = gauss_legendre(order);
    // two sweeps: a rough pass fixes the magnitude the tolerance is relative to
    const double rough = refine(f, a, b, panel(f, a, b, q), 1e-3, 12, q);
    const double abs_tol = rel_tol * std::max(std::abs(rough), 1e-300);
    return refine(f, a, b, panel(f, a, b, q), abs_tol, max_depth, q);
}

} // namespace adlab
