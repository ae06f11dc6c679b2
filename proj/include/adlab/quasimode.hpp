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

#include <cstdint>
#include <optional>
#include <vector>

#include "adlab/quadrature.hpp"
#include "adlab/rates.hpp"
#include "adlab/wkb.hpp"

namespace adlab {

/// Plateau profile: even, 1 on [-1,1], 0 outside [-2,2], quintic-smoothstep
/// transition (C^2).
double zeta_profile(double r);
double zeta_profile_d1(double r);

/// C_h = (1/2) Int zeta(r/tau) e^{-r^2/2h} dr. zeta_one replaces zeta by 1
/// (test hook), giving the full Gaussian integral sqrt(2 pi h)/2.
double normalization_Ch(double tau, double h, bool zeta_one = false);

enum class Region : std::uint8_t {
    outside = 0, // f0 above the 4-delta sublevel
    channel,     // C_{4tau,4delta}, the saddle component of the strip
    e_plus,      // component of the sublevel minus C containing m_hat
    e_minus,     // the rest of the sublevel
};

/// Region decomposition of the (x,v) slice; y enters only through the
/// sublevel condition, so a 2-d flood fill classifies all of R^3.
class CutoffGeometry {
  public:
    static CutoffGeometry build(const ExtendedPhase& phase, const DoubleWellTopology& topo,
                                const EikonalData& eik, double tau, double delta,
                                int grid_n = 768);

    double tau() const { return tau_; }
    double delta() const { return delta_; }
    double f_s() const { return f_s_; }

    Region classify(double x, double v) const;
    Region classify(const Vec3& X) const {
        if (f0(X[0], X[1]) > f_s_ + 4.0 * delta_) return Region::outside;
        return classify(X[0], X[1]);
    }

    double f0(double x, double v) const; // f at y = 0

    /// Largest |chi jump| across the lateral boundary of the channel within
    /// the sublevel; exactly 0 when |ell| >= 2 tau there (sign saturation).
    double max_chi_jump(const EikonalData& eik, double h) const;

    /// Smallest f - f(m_hat) over cells where the hat quasimode can be
    /// nonzero. Must be >= 0, else the Laplace frame is invalid.
    double min_f_excess() const { return min_f_excess_; }

    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }

  private:
    double tau_ = 0, delta_ = 0, f_s_ = 0;
    double sx_ = 0; // saddle x
    Vec3 xi_;
    std::optional<Potential> pot_;
    double x_lo_ = 0, x_hi_ = 0, v_max_ = 0;
    int nx_ = 0, nv_ = 0;
    std::vector<std::uint8_t> label_;
    double min_f_excess_ = 0;

    friend struct QuasimodePair;
};

/// Quadrature controls for the interaction integrals.
struct QuadratureParams {
    int n_hermite = 48;       // Gauss-Hermite points in v and y
    double x_rel_tol = 1e-10; // adaptive panel tolerance in x
    int max_depth = 40;
    double conv_rel_tol = 5e-7; // cross-check between n_hermite and 3/2 n_hermite
    bool check_convergence = true;
};

/// Both quasimodes of Definition 4.1 with every quadrature the interaction
/// analysis needs. Norms and inner products carry the exponentially small
/// scales in log space, so arbitrarily small h is safe.
struct QuasimodePair {
    QuasimodePair(const ExtendedPhase& phase, const DoubleWellTopology& topo,
                  const EikonalData& eik, const CutoffGeometry& cut, double h,
                  QuadratureParams params = {});

    double h = 0;

    // ||psi_m||; psi_under = 2 e^{-(f-f(m_under))/h}, psi_hat per Definition 4.1
    double norm_under = 0;
    double norm_hat = 0;

    /// ||psi_m|| D_m^{1/2} / (2 (pi h)^{(2d+1)/4}) -> 1 as h -> 0.
    double laplace_ratio_under = 0;
    double laplace_ratio_hat = 0;

    /// log |<phi_hat, phi_under>| (the Gram off-diagonal, reported in logs
    /// because it is exponentially small in 1/h).
    double log_gram_offdiag = 0;
    /// Gram diagonal entries, 1 up to quadrature tolerance.
    double gram_diag_hat = 1.0;
    double gram_diag_under = 1.0;

    /// <P phi_hat, phi_hat> through the Dirichlet-form reduction; for the
    /// deep mode <P phi_under, phi_under> = 0 exactly since P psi_under = 0.
    double rayleigh_hat = 0;
    double log_rayleigh_hat = 0; // log of the same value

    double pnorm2_hat = 0;     // ||P phi_hat||^2
    double pstarnorm2_hat = 0; // ||P* phi_hat||^2
    double log_pnorm2_hat = 0;
    double log_pstarnorm2_hat = 0;

    /// Evaluate the hat quasimode (unnormalized) at a point.
    static double psi_hat(const ExtendedPhase& phase, const DoubleWellTopology& topo,
                          const EikonalData& eik, const CutoffGeometry& cut, double h,
                          const Vec3& X);
    static double chi_ell(const EikonalData& eik, const CutoffGeometry& cut, double h,
                          const Vec3& X);
};

/// 2x2 interaction matrix surrogate [[0,0],[0,lambda1]] and its eigenvalues,
/// with the relative error budget assembled from the Riesz-projector bounds:
///   budget = 2 ||P phi|| (||P phi|| + ||P* phi||) / (g(h) lambda1).
struct InteractionReport {
    double lambda0 = 0;
    double lambda1 = 0;
    double budget = 0;
    double matrix[2][2] = {{0, 0}, {0, 0}};
};
InteractionReport interaction_eigenvalues(const QuasimodePair& q, double g_of_h);

/// Default cutoff parameters: tau from the channel geometry (so that the
/// 4-tau strip stays well clear of both wells), delta = S/8.
struct CutoffDefaults {
    double tau;
    double delta;
};
CutoffDefaults default_cutoff(const DoubleWellTopology& topo, const EikonalData& eik);

} // namespace adlab
