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

#include "adlab/wkb.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace adlab {

namespace {

// Taylor data of the drift at the saddle, in coordinates centered there.
// f enters only through 2A grad f = (0, gamma v, 0), which is exact because
// the v-dependence of f is exactly quadratic.
struct SaddleTaylor {
    std::array<Poly3, 3> drift; // b0 + 2A grad f, components to degree 3
    double gamma, nu;
};

SaddleTaylor saddle_taylor(const ExtendedPhase& phase, const CriticalPoint& saddle) {
    const Potential& pot = phase.potential();
    const double s = saddle.x;
    const double v2 = pot.d2V(s), v3 = pot.d3V(s), v4 = pot.d4V(s);

    const Poly3 x = Poly3::variable(0);
    const Poly3 v = Poly3::variable(1);
    const Poly3 y = Poly3::variable(2);

    // -V'(s + x) to degree 3; V'(s) = 0 at a critical point.
    Poly3 minus_dV = x * (-v2) + (x * x) * (-v3 / 2.0) + (x * x * x) * (-v4 / 6.0);

    SaddleTaylor t;
    t.gamma = phase.gamma();
    t.nu = phase.nu();
    t.drift[0] = v;
    t.drift[1] = minus_dV - phase.nu() * (y * v) + phase.gamma() * v;
    t.drift[2] = phase.nu() * (v * v);
    return t;
}

// Eikonal residual w0 = (b0 + 2A grad f) . grad p + (A grad p . grad p) p.
Poly3 w0_of(const SaddleTaylor& t, const Poly3& p) {
    Poly3 r;
    for (int i = 0; i < 3; ++i) r += t.drift[i] * p.derivative(i);
    const Poly3 pv = p.derivative(1);
    r += t.gamma * (pv * pv * p);
    return r;
}

// Transport residual w1 = (b0 + 2A(grad f + ell0 grad ell0)) . grad q
//                        + (A grad ell0 . grad ell0) q + b1 . grad ell0
//                        - div A grad ell0.
Poly3 w1_of(const SaddleTaylor& t, const Poly3& ell0, const Poly3& q) {
    const Poly3 ell0v = ell0.derivative(1);
    Poly3 r;
    for (int i = 0; i < 3; ++i) r += t.drift[i] * q.derivative(i);
    r += 2.0 * t.gamma * (ell0 * ell0v * q.derivative(1));
    r += t.gamma * (ell0v * ell0v * q);
    r += (-t.nu) * ell0.derivative(2);                 // b1 . grad ell0
    r -= t.gamma * ell0.derivative(1).derivative(1);   // div A grad ell0
    return r;
}

} // namespace

Vec3 EikonalData::grad_ell(const Vec3& Xrel, double h) const {
    Vec3 g;
    for (int i = 0; i < 3; ++i)
        g[i] = ell0.derivative(i).eval(Xrel) + h * ell1.derivative(i).eval(Xrel);
    return g;
}

double EikonalData::d2v_ell(const Vec3& Xrel, double h) const {
    return ell0.derivative(1).derivative(1).eval(Xrel) +
           h * ell1.derivative(1).derivative(1).eval(Xrel);
}

LinearEikonal solve_linear_eikonal(const ExtendedPhase& phase, const CriticalPoint& saddle) {
    if (saddle.index != 1)
        fail(errc::topology, "solve_linear_eikonal: point is not an index-1 saddle");
    const double eta = saddle.eta();
    const double gamma = phase.gamma();
    const double mu = 0.5 * (-gamma + std::sqrt(gamma * gamma + 4.0 * eta));
    const double alpha = -0.5 * (gamma + std::sqrt(gamma * gamma + 4.0 * eta));
    const double t = std::sqrt(mu / gamma); // |e1| = 1 in dimension one
    return {Vec3(t * alpha, t, 0.0), mu};
}

Eigen::MatrixXd hom_operator_matrix(const Mat3& Upsilon, double mu, int degree) {
    const auto basis = homogeneous_basis(degree);
    const int n = static_cast<int>(basis.size());
    std::map<Exponent, int, GradedLex> index;
    for (int i = 0; i < n; ++i) index[basis[i]] = i;

    // L m_beta = Upsilon X . grad m_beta + mu m_beta, assembled column-wise.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) {
        const Exponent& beta = basis[col];
        L(col, col) += mu;
        for (int k = 0; k < 3; ++k) {
            if (beta[k] == 0) continue;
            for (int m = 0; m < 3; ++m) {
                if (Upsilon(k, m) == 0.0) continue;
                Exponent e = beta;
                e[k] -= 1;
                e[m] += 1;
                L(index.at(e), col) += Upsilon(k, m) * beta[k];
            }
        }
    }
    return L;
}

HomogeneousPolynomial solve_hom_equation(const Mat3& Upsilon, double mu,
                                         const HomogeneousPolynomial& R) {
    const int j = R.degree();
    if (mu <= 0) fail(errc::parameter, "solve_hom_equation: mu must be positive");

    const auto basis = homogeneous_basis(j);
    const int n = static_cast<int>(basis.size());
    std::map<Exponent, int, GradedLex> index;
    for (int i = 0; i < n; ++i) index[basis[i]] = i;

    const Eigen::MatrixXd L = hom_operator_matrix(Upsilon, mu, j);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0 || smax / smin > 1e12)
        fail(errc::near_resonant, "solve_hom_equation: assembled system nearly singular");

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const auto& [e, c] : R.poly().terms()) rhs(index.at(e)) = -c;

    const Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(L).solve(rhs);

    Poly3 p;
    for (int i = 0; i < n; ++i) p.add_term(basis[i], sol(i));
    return HomogeneousPolynomial(j, p);
}

EikonalData build_ell(const ExtendedPhase& phase, const CriticalPoint& saddle,
                      double toward_x, bool force_flip) {
    EikonalData d;
    d.saddle_x = saddle.x;
    d.H = phase.hess_f_at_critical(saddle);
    d.B = phase.db0_at_critical(saddle);
    d.A = phase.diffusion();
    d.Lambda = 2.0 * d.H * d.A + d.B.transpose();

    auto lin = solve_linear_eikonal(phase, saddle);
    d.mu = lin.mu;
    d.xi = lin.xi;

    // Orientation per the sign convention: xi points toward the E+ side.
    if (!std::isnan(toward_x)) {
        const double eta = saddle.eta();
        const double len = std::min(1.0 / std::sqrt(eta), 0.5 * std::abs(toward_x - saddle.x));
        const Vec3 probe((toward_x > saddle.x ? len : -len), 0.0, 0.0);
        if (d.xi.dot(probe) < 0) {
            d.xi = -d.xi;
            d.flipped = true;
        }
    }
    if (force_flip) {
        d.xi = -d.xi;
        d.flipped = !d.flipped;
    }

    d.Pi_xi = d.xi * d.xi.transpose();
    d.Upsilon = d.Lambda.transpose() + 2.0 * d.A * d.Pi_xi;

    const SaddleTaylor t = saddle_taylor(phase, saddle);

    // Degree 1: ell0,1 = xi . X.
    Poly3 ell0;
    for (int i = 0; i < 3; ++i) ell0 += Poly3::variable(i, d.xi[i]);

    // Degrees 2 and 3 of the eikonal equation: the unknown enters through
    // L = Upsilon X . grad + mu, the rest of w0 at that degree is the known
    // right-hand side.
    for (int j = 2; j <= 3; ++j) {
        const Poly3 Rj = w0_of(t, ell0).homogeneous_part(j);
        ell0 += solve_hom_equation(d.Upsilon, d.mu, HomogeneousPolynomial(j, Rj)).poly();
    }
    d.ell0 = ell0;

    // Transport: degree 0 by dividing by mu, degree 1 through L again.
    Poly3 ell1;
    const double w10 = w1_of(t, ell0, Poly3(0.0)).homogeneous_part(0).coeff({0, 0, 0});
    ell1 += Poly3(-w10 / d.mu);
    const Poly3 R11 = w1_of(t, ell0, ell1).homogeneous_part(1);
    ell1 += solve_hom_equation(d.Upsilon, d.mu, HomogeneousPolynomial(1, R11)).poly();
    d.ell1 = ell1;

    return d;
}

double eval_residual_w(const EikonalData& data, const ExtendedPhase& phase, const Vec3& X,
                       double h) {
    const Vec3 Xrel = X - Vec3(data.saddle_x, 0.0, 0.0);
    const double gamma = phase.gamma();
    const double nu = phase.nu();
    const double x = X[0], v = X[1], y = X[2];

    const double ell = data.ell(Xrel, h);
    const Vec3 g = data.grad_ell(Xrel, h);
    const double dVv = phase.potential().dV(x);

    return v * g[0] + (-dVv - nu * y * v + gamma * v) * g[1] + nu * (v * v - h) * g[2] +
           gamma * ell * g[1] * g[1] - gamma * h * data.d2v_ell(Xrel, h);
}

ResidualCoeffs residual_taylor_coeffs(const EikonalData& data, const ExtendedPhase& phase,
                                      const CriticalPoint& saddle) {
    const SaddleTaylor t = saddle_taylor(phase, saddle);

    const Poly3 w0 = w0_of(t, data.ell0).truncated(3);
    const Poly3 w1 = w1_of(t, data.ell0, data.ell1).truncated(1);

    // Normalize by the size of the right-hand sides the solves consumed.
    Poly3 lin;
    for (int i = 0; i < 3; ++i) lin += Poly3::variable(i, data.xi[i]);
    const double scale0 = std::max(w0_of(t, lin).truncated(3).max_abs_coeff(), 1e-30);
    const double scale1 =
        std::max(w1_of(t, data.ell0, Poly3(0.0)).truncated(1).max_abs_coeff(), 1e-30);

    return {w0.max_abs_coeff() / scale0, w1.max_abs_coeff() / scale1};
}

DetIdentityReport check_det_identity(const EikonalData& data) {
    const Mat3 M = data.H + data.Pi_xi;
    const double detH = data.H.determinant();
    DetIdentityReport r;
    r.rel_error = std::abs(M.determinant() + detH) / std::abs(detH);
    Eigen::SelfAdjointEigenSolver<Mat3> es(M);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

} // namespace adlab
