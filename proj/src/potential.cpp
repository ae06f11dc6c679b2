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

#include "adlab/potential.hpp"

#include <algorithm>
#include <cmath>

namespace adlab {

namespace {

// Per-order finite-difference steps. Higher orders divide by higher powers of
// the step, so the step grows with the order to keep roundoff below the
// 4th-order truncation error.
constexpr double kStep1 = 1e-4;
constexpr double kStep2 = 4e-4;
constexpr double kStep3 = 4e-3;
constexpr double kStep4 = 2e-2;

double fd_scale(double x) { return std::max(1.0, std::abs(x)); }

} // namespace

Potential::Potential(Fn v, double box_lo, double box_hi)
    : v_(std::move(v)), box_lo_(box_lo), box_hi_(box_hi) {
    if (!(box_lo < box_hi)) fail(errc::parameter, "potential: empty search box");
}

Potential Potential::quartic(double a, double b, double c, double e, double box_lo,
                             double box_hi) {
    Potential p([=](double x) { return ((a * x + b) * x + c) * x * x + e * x; }, box_lo, box_hi);
    p.dv_ = [=](double x) { return ((4 * a * x + 3 * b) * x + 2 * c) * x + e; };
    p.d2v_ = [=](double x) { return (12 * a * x + 6 * b) * x + 2 * c; };
    p.d3v_ = [=](double x) { return 24 * a * x + 6 * b; };
    p.d4v_ = [=](double) { return 24 * a; };
    p.exact_ = true;
    return p;
}

Potential Potential::preset(std::string_view name) {
    if (name == "tilted_quartic") return quartic(0.25, 0.0, -0.5, 0.1);
    if (name == "figure1") return quartic(8.0, -2.0, -7.0, 0.5, -1.2, 1.3);
    fail(errc::parameter, "unknown potential preset '" + std::string(name) + "'");
}

double Potential::dV(double x) const {
    if (dv_) return dv_(x);
    const double s = kStep1 * fd_scale(x);
    return (-v_(x + 2 * s) + 8 * v_(x + s) - 8 * v_(x - s) + v_(x - 2 * s)) / (12 * s);
}

double Potential::d2V(double x) const {
    if (d2v_) return d2v_(x);
    const double s = kStep2 * fd_scale(x);
    return (-v_(x + 2 * s) + 16 * v_(x + s) - 30 * v_(x) + 16 * v_(x - s) - v_(x - 2 * s)) /
           (12 * s * s);
}

double Potential::d3V(double x) const {
    if (d3v_) return d3v_(x);
    const double s = kStep3 * fd_scale(x);
    return (v_(x - 3 * s) - 8 * v_(x - 2 * s) + 13 * v_(x - s) - 13 * v_(x + s) +
            8 * v_(x + 2 * s) - v_(x + 3 * s)) /
           (8 * s * s * s);
}

double Potential::d4V(double x) const {
    if (d4v_) return d4v_(x);
    const double s = kStep4 * fd_scale(x);
    return (-v_(x - 3 * s) + 12 * v_(x - 2 * s) - 39 * v_(x - s) + 56 * v_(x) -
            39 * v_(x + s) + 12 * v_(x + 2 * s) - v_(x + 3 * s)) /
           (6 * s * s * s * s);
}

std::vector<CriticalPoint> find_critical_points(const Potential& V, double box_lo,
                                                double box_hi, double tol,
                                                int seeds_per_axis) {
    if (!(box_lo < box_hi)) fail(errc::parameter, "find_critical_points: empty box");
    if (tol <= 0) fail(errc::parameter, "find_critical_points: tol must be positive");

    // The box is supposed to contain every critical point; a vanishing
    // gradient at the boundary says it was cut through a flat region.
    const double grad_scale =
        std::max({std::abs(V.dV(box_lo)), std::abs(V.dV(box_hi)), 1.0});
    for (double xb : {box_lo, box_hi}) {
        if (std::abs(V.dV(xb)) < 1e3 * tol * grad_scale)
            fail(errc::parameter, "find_critical_points: gradient vanishes at box boundary");
    }

    std::vector<double> roots;
    const int n_seed = std::max(2, seeds_per_axis);
    for (int i = 0; i < n_seed; ++i) {
        double x = box_lo + (box_hi - box_lo) * (i + 0.5) / n_seed;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const double g = V.dV(x);
            if (std::abs(g) <= tol) {
                converged = true;
                break;
            }
            const double H = V.d2V(x);
            if (H == 0.0) break;
            double step = g / H;
            // keep Newton inside the box; runaway seeds are simply dropped
            const double cap = 0.25 * (box_hi - box_lo);
            step = std::clamp(step, -cap, cap);
            x -= step;
            if (x < box_lo || x > box_hi) break;
        }
        if (!converged) continue;
        bool dup = false;
        for (double r : roots)
            if (std::abs(r - x) <= 10 * tol) { dup = true; break; }
        if (!dup) roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());

    if (roots.empty())
        fail(errc::empty_landscape, "find_critical_points: no critical points in box");

    std::vector<CriticalPoint> out;
    out.reserve(roots.size());
    // A root located to |V'| <= tol of a degenerate point sits ~tol^{1/3}
    // away from it, where |V''| ~ tol^{2/3}; the detection threshold has to
    // live on that scale to be reachable at all.
    const double hess_tol = 10.0 * std::pow(tol, 2.0 / 3.0);
    for (double r : roots) {
        const double H = V.d2V(r);
        if (std::abs(H) < hess_tol)
            fail(errc::non_morse, "find_critical_points: degenerate Hessian at x=" +
                                      std::to_string(r));
        out.push_back({r, H < 0 ? 1 : 0, H});
    }
    return out;
}

DoubleWellTopology classify_topology(const std::vector<CriticalPoint>& points,
                                     const Potential& V) {
    std::vector<CriticalPoint> minima, saddles;
    for (const auto& p : points) {
        (p.index == 0 ? minima : saddles).push_back(p);
    }
    if (minima.size() != 2 || saddles.size() != 1)
        fail(errc::not_double_well,
             "classify_topology: census is not {two minima, one saddle}");

    DoubleWellTopology t;
    t.saddle = saddles[0];
    const double v0 = V.V(minima[0].x);
    const double v1 = V.V(minima[1].x);
    t.v_saddle = V.V(t.saddle.x);

    const double depth_scale = t.v_saddle - std::min(v0, v1);
    if (depth_scale <= 0)
        fail(errc::not_double_well, "classify_topology: saddle below a minimum");
    if (std::abs(v0 - v1) < 1e-8 * depth_scale)
        fail(errc::degenerate_wells, "classify_topology: wells have equal depth");

    const bool first_deeper = v0 < v1;
    t.m_under = first_deeper ? minima[0] : minima[1];
    t.m_hat = first_deeper ? minima[1] : minima[0];
    t.v_m_under = first_deeper ? v0 : v1;
    t.v_m_hat = first_deeper ? v1 : v0;

    t.barrier_S = t.v_saddle - t.v_m_hat;
    t.barrier_S_tilde = 0.5 * t.barrier_S;

    t.det_hess_m_under = t.m_under.hess;
    t.det_hess_m_hat = t.m_hat.hess;
    t.det_hess_saddle = t.saddle.hess;

    // Hess f at (x*,0,0) = blockdiag(V''/2, 1/2, 1/2); det = V''/8 for d = 1.
    auto lifted_D = [](double hess_v) { return std::sqrt(std::abs(hess_v) / 8.0); };
    t.D_m_under = lifted_D(t.det_hess_m_under);
    t.D_m_hat = lifted_D(t.det_hess_m_hat);
    t.D_saddle = lifted_D(t.det_hess_saddle);
    return t;
}

ExtendedPhase::ExtendedPhase(Potential V, double gamma, double nu)
    : pot_(std::move(V)), gamma_(gamma), nu_(nu) {
    if (gamma <= 0 || nu <= 0)
        fail(errc::parameter, "extended_phase: gamma and nu must be positive");
}

double ExtendedPhase::f(const Vec3& X) const {
    return 0.5 * pot_.V(X[0]) + 0.25 * (X[1] * X[1] + X[2] * X[2]);
}

Vec3 ExtendedPhase::grad_f(const Vec3& X) const {
    return Vec3(0.5 * pot_.dV(X[0]), 0.5 * X[1], 0.5 * X[2]);
}

Mat3 ExtendedPhase::hess_f(const Vec3& X) const {
    Mat3 H = Mat3::Zero();
    H(0, 0) = 0.5 * pot_.d2V(X[0]);
    H(1, 1) = 0.5;
    H(2, 2) = 0.5;
    return H;
}

Vec3 ExtendedPhase::b0(const Vec3& X) const {
    const double x = X[0], v = X[1], y = X[2];
    return Vec3(v, -pot_.dV(x) - nu_ * y * v, nu_ * v * v);
}

Mat3 ExtendedPhase::diffusion() const {
    Mat3 A = Mat3::Zero();
    A(1, 1) = gamma_;
    return A;
}

double ExtendedPhase::c(const Vec3& X, double h) const {
    return gamma_ * (0.25 * X[1] * X[1] - 0.5 * h);
}

Mat3 ExtendedPhase::hess_f_at_critical(const CriticalPoint& p) const {
    Mat3 H = Mat3::Zero();
    H(0, 0) = 0.5 * p.hess;
    H(1, 1) = 0.5;
    H(2, 2) = 0.5;
    return H;
}

Mat3 ExtendedPhase::db0_at_critical(const CriticalPoint& p) const {
    Mat3 B = Mat3::Zero();
    B(0, 1) = 1.0;
    B(1, 0) = -p.hess;
    return B;
}

} // namespace adlab
