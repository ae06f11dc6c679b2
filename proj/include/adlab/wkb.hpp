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

#include "adlab/polynomial.hpp"
#include "adlab/potential.hpp"

namespace adlab {

/// Everything the local phase construction at a saddle produces.
///
/// ell0 collects the homogeneous pieces of degree 1..3 of the leading phase,
/// ell1 the degree 0..1 pieces of its first correction; the full phase is
/// ell = ell0 + h*ell1 in coordinates centered at the saddle. xi spans the
/// contracting direction of Lambda = 2HA + B^T, mu > 0 is minus its unique
/// negative eigenvalue and equals the saddle rate.
struct EikonalData {
    double saddle_x = 0;

    Mat3 H;        // Hess f at the saddle
    Mat3 B;        // db0 at the saddle
    Mat3 A;        // diffusion matrix diag(0, gamma, 0)
    Mat3 Lambda;   // 2HA + B^T
    Mat3 Pi_xi;    // xi xi^T
    Mat3 Upsilon;  // Lambda^T + 2 A Pi_xi
    Vec3 xi;
    double mu = 0;

    Poly3 ell0; // degrees 1..3, ell0(0) = 0
    Poly3 ell1; // degrees 0..1
    bool flipped = false; // true when the orientation probe negated xi

    double ell(const Vec3& Xrel, double h) const {
        return ell0.eval(Xrel) + h * ell1.eval(Xrel);
    }
    Vec3 grad_ell(const Vec3& Xrel, double h) const;
    /// Second v-derivative of ell, the only one entering div A grad ell.
    double d2v_ell(const Vec3& Xrel, double h) const;
};

/// Linear eikonal data at an index-1 critical point: xi = t(alpha e1, e1, 0)
/// normalized so that (A xi . xi) = mu, and mu the positive root of
/// mu^2 + gamma mu - eta = 0.
struct LinearEikonal {
    Vec3 xi;
    double mu;
};
LinearEikonal solve_linear_eikonal(const ExtendedPhase& phase, const CriticalPoint& saddle);

/// Matrix of (Upsilon X . grad + mu) on the graded-lex monomial basis of
/// homogeneous degree-j polynomials.
Eigen::MatrixXd hom_operator_matrix(const Mat3& Upsilon, double mu, int degree);

/// Solve (Upsilon X . grad + mu) p = -R on homogeneous polynomials of the
/// degree of R. The assembled system is tiny and solved by dense LU with
/// partial pivoting; a condition number above 1e12 is reported as an error.
HomogeneousPolynomial solve_hom_equation(const Mat3& Upsilon, double mu,
                                         const HomogeneousPolynomial& R);

/// Build the full phase at the saddle. toward_x orients xi so that
/// xi . (X - s) > 0 on the given side (pass the x-coordinate of the shallow
/// minimum); NaN keeps the raw e1 = +1 convention. force_flip negates the
/// resulting orientation, for symmetry checks.
EikonalData build_ell(const ExtendedPhase& phase, const CriticalPoint& saddle,
                      double toward_x = std::numeric_limits<double>::quiet_NaN(),
                      bool force_flip = false);

/// Exact residual w = (b + 2A grad f).grad ell + ell A grad ell . grad ell
/// - h div A grad ell, with the true potential derivatives (not the Taylor
/// data the construction used). X is a point in the original coordinates.
double eval_residual_w(const EikonalData& data, const ExtendedPhase& phase, const Vec3& X,
                       double h);

/// Taylor coefficients of the eikonal/transport residuals that the
/// construction is supposed to annihilate: degree <= 3 of w0, degree <= 1
/// of w1, relative to the largest coefficient that appeared on the way.
struct ResidualCoeffs {
    double w0_rel = 0;
    double w1_rel = 0;
};
ResidualCoeffs residual_taylor_coeffs(const EikonalData& data, const ExtendedPhase& phase,
                                      const CriticalPoint& saddle);

struct DetIdentityReport {
    double rel_error = 0;      // | det(H + Pi_xi) + det H | / |det H|
    double min_eigenvalue = 0; // of H + Pi_xi, expected > 0
};
DetIdentityReport check_det_identity(const EikonalData& data);

} // namespace adlab
