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
#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "adlab/error.hpp"

namespace adlab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One-dimensional Morse potential with derivatives up to order 4.
///
/// The built-in quartic family V(x) = a x^4 + b x^3 + c x^2 + e x carries
/// exact derivatives of all orders. User potentials supply V and optionally
/// derivative callbacks; missing orders fall back to central finite
/// differences (4th-order stencils, with per-order steps balancing
/// truncation against roundoff).
class Potential {
  public:
    using Fn = std::function<double(double)>;

    Potential(Fn v, double box_lo, double box_hi);

    static Potential quartic(double a, double b, double c, double e,
                             double box_lo = -2.5, double box_hi = 2.5);

    /// Named presets used by the experiment configs:
    ///   "tilted_quartic": x^4/4 - x^2/2 + 0.1 x
    ///   "figure1":        8 x^4 - 2 x^3 - 7 x^2 + x/2
    static Potential preset(std::string_view name);

    double box_lo() const { return box_lo_; }
    double box_hi() const { return box_hi_; }
    bool exact_derivatives() const { return exact_; }

    double V(double x) const { return v_(x); }
    double dV(double x) const;
    double d2V(double x) const;
    double d3V(double x) const;
    double d4V(double x) const;

    Potential& set_dV(Fn f) { dv_ = std::move(f); return *this; }
    Potential& set_d2V(Fn f) { d2v_ = std::move(f); return *this; }
    Potential& set_d3V(Fn f) { d3v_ = std::move(f); return *this; }
    Potential& set_d4V(Fn f) { d4v_ = std::move(f); return *this; }

  private:
    Fn v_, dv_, d2v_, d3v_, d4v_;
    double box_lo_, box_hi_;
    bool exact_ = false;
};

/// Critical point of V with its Morse data (d = 1, so the Hessian is scalar).
struct CriticalPoint {
    double x = 0.0;
    int index = 0;      // number of negative Hessian eigenvalues, 0 or 1
    double hess = 0.0;  // V''(x)

    /// |negative eigenvalue| at an index-1 point.
    double eta() const {
        if (index != 1) fail(errc::topology, "eta() requested at a non-saddle point");
        return -hess;
    }
};

/// Newton search from a coarse grid of seeds. Every returned point satisfies
/// |V'(x)| <= tol; points closer than 10*tol are merged.
std::vector<CriticalPoint> find_critical_points(const Potential& V, double box_lo,
                                                double box_hi, double tol = 1e-10,
                                                int seeds_per_axis = 64);

inline std::vector<CriticalPoint> find_critical_points(const Potential& V, double tol = 1e-10) {
    return find_critical_points(V, V.box_lo(), V.box_hi(), tol);
}

/// Two minima and one saddle, with the barrier and Hessian data entering the
/// rate formulas. m_under is the strictly deeper minimum.
struct DoubleWellTopology {
    CriticalPoint m_under, m_hat, saddle;
    double v_m_under = 0, v_m_hat = 0, v_saddle = 0;

    double barrier_S = 0;       // V(s) - V(m_hat)
    double barrier_S_tilde = 0; // f(s) - f(m_hat) = S/2

    // det Hess V at each point (scalars for d = 1)
    double det_hess_m_under = 0, det_hess_m_hat = 0, det_hess_saddle = 0;
    // D_{X*} = |det Hess_{X*} f|^{1/2} at the lifted points (x*,0,0)
    double D_m_under = 0, D_m_hat = 0, D_saddle = 0;
};

DoubleWellTopology classify_topology(const std::vector<CriticalPoint>& points,
                                     const Potential& V);

/// The lifted landscape f(x,v,y) = V(x)/2 + (v^2+y^2)/4 on R^3 together with
/// the drift/diffusion data of the generator in divergence form:
///   b = b0 + h b1,  b0 = (v, -V' - nu y v, nu v^2),  b1 = (0, 0, -nu),
///   A = diag(0, gamma, 0),  c = gamma (v^2/4 - h/2).
class ExtendedPhase {
  public:
    ExtendedPhase(Potential V, double gamma, double nu);

    const Potential& potential() const { return pot_; }
    double gamma() const { return gamma_; }
    double nu() const { return nu_; }

    double f(const Vec3& X) const;
    Vec3 grad_f(const Vec3& X) const;
    Mat3 hess_f(const Vec3& X) const;

    Vec3 b0(const Vec3& X) const;
    Vec3 b1() const { return Vec3(0.0, 0.0, -nu_); }
    Vec3 b(const Vec3& X, double h) const { return b0(X) + h * b1(); }
    Mat3 diffusion() const;
    double c(const Vec3& X, double h) const;

    /// Hess_s f at a critical point x* of V: blockdiag(V''(x*)/2, 1/2, 1/2).
    Mat3 hess_f_at_critical(const CriticalPoint& p) const;
    /// db0 at a critical point (x*,0,0).
    Mat3 db0_at_critical(const CriticalPoint& p) const;

  private:
    Potential pot_;
    double gamma_, nu_;
};

inline ExtendedPhase extended_phase(Potential V, double gamma, double nu) {
    return ExtendedPhase(std::move(V), gamma, nu);
}

} // namespace adlab
