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

#include "adlab/quasimode.hpp"

#include <cmath>
#include <deque>
#include <numbers>

namespace adlab {

namespace {

// Quintic smoothstep on [0,1], C^2 at both ends.
double smoothstep5(double t) {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
double smoothstep5_d1(double t) {
    if (t <= 0 || t >= 1) return 0.0;
    return 30.0 * t * t * (t - 1.0) * (t - 1.0);
}
double smoothstep5_d2(double t) {
    if (t <= 0 || t >= 1) return 0.0;
    return 60.0 * t * (t - 1.0) * (2.0 * t - 1.0);
}

} // namespace

double zeta_profile(double r) {
    const double a = std::abs(r);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 1.0 - smoothstep5(a - 1.0);
}

double zeta_profile_d1(double r) {
    const double a = std::abs(r);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    return -smoothstep5_d1(a - 1.0) * (r > 0 ? 1.0 : -1.0);
}

namespace {

// Int_0^a zeta(r/tau) e^{-r^2/2h} dr: exact erf on [0,tau], fixed-order
// Gauss-Legendre on the smooth transition band, constant beyond 2 tau.
double chi_integral(double a, double tau, double h) {
    const double sgn = a < 0 ? -1.0 : 1.0;
    const double aa = std::min(std::abs(a), 2.0 * tau);
    const double s2h = std::sqrt(2.0 * h);
    double val = std::sqrt(0.5 * std::numbers::pi * h) * std::erf(std::min(aa, tau) / s2h);
    if (aa > tau) {
        const QuadRule& q = gauss_legendre(40);
        const double c = 0.5 * (tau + aa), sc = 0.5 * (aa - tau);
        double acc = 0.0;
        for (int i = 0; i < q.nodes.size(); ++i) {
            const double r = c + sc * q.nodes[i];
            acc += q.weights[i] * zeta_profile(r / tau) * std::exp(-0.5 * r * r / h);
        }
        val += sc * acc;
    }
    return sgn * val;
}

} // namespace

double normalization_Ch(double tau, double h, bool zeta_one) {
    if (tau <= 0 || h <= 0) fail(errc::parameter, "normalization_Ch: tau, h must be positive");
    if (zeta_one) return 0.5 * std::sqrt(2.0 * std::numbers::pi * h);
    return chi_integral(2.0 * tau, tau, h);
}

double CutoffGeometry::f0(double x, double v) const {
    return 0.5 * pot_->V(x) + 0.25 * v * v;
}

Region CutoffGeometry::classify(double x, double v) const {
    if (x < x_lo_ || x > x_hi_ || std::abs(v) > v_max_) return Region::outside;
    int i = static_cast<int>((x - x_lo_) / (x_hi_ - x_lo_) * nx_);
    int j = static_cast<int>((v + v_max_) / (2.0 * v_max_) * nv_);
    i = std::min(std::max(i, 0), nx_ - 1);
    j = std::min(std::max(j, 0), nv_ - 1);
    return static_cast<Region>(label_[static_cast<size_t>(i) * nv_ + j]);
}

CutoffGeometry CutoffGeometry::build(const ExtendedPhase& phase,
                                     const DoubleWellTopology& topo, const EikonalData& eik,
                                     double tau, double delta, int grid_n) {
    if (tau <= 0 || delta <= 0)
        fail(errc::parameter, "cutoff geometry: tau, delta must be positive");

    CutoffGeometry g;
    g.tau_ = tau;
    g.delta_ = delta;
    g.pot_ = phase.potential();
    g.sx_ = topo.saddle.x;
    g.xi_ = eik.xi;
    g.f_s_ = 0.5 * g.pot_->V(g.sx_);

    const double level = g.f_s_ + 4.0 * delta; // f0 sublevel the regions live in
    const Potential& V = *g.pot_;

    // x-extent of the sublevel: bisect V(x) = 2*level outward of the wells
    auto bisect_edge = [&](double inside, double outside) {
        double a = inside, b = outside;
        for (int k = 0; k < 200; ++k) {
            const double m = 0.5 * (a + b);
            (0.5 * V.V(m) <= level ? a : b) = m;
        }
        return 0.5 * (a + b);
    };
    const double pad = 0.02 * (V.box_hi() - V.box_lo());
    g.x_lo_ = bisect_edge(topo.m_under.x, V.box_lo()) - pad;
    g.x_hi_ = bisect_edge(topo.m_hat.x, V.box_hi()) + pad;

    double vmax2 = 0.0;
    for (int i = 0; i <= 512; ++i) {
        const double x = g.x_lo_ + (g.x_hi_ - g.x_lo_) * i / 512.0;
        vmax2 = std::max(vmax2, 4.0 * (level - 0.5 * V.V(x)));
    }
    g.v_max_ = std::sqrt(std::max(vmax2, 1e-12)) * 1.05;

    g.nx_ = grid_n;
    g.nv_ = grid_n;
    g.label_.assign(static_cast<size_t>(g.nx_) * g.nv_, static_cast<std::uint8_t>(Region::outside));

    const double dx = (g.x_hi_ - g.x_lo_) / g.nx_;
    const double dv = 2.0 * g.v_max_ / g.nv_;
    auto xc = [&](int i) { return g.x_lo_ + (i + 0.5) * dx; };
    auto vc = [&](int j) { return -g.v_max_ + (j + 0.5) * dv; };
    auto idx = [&](int i, int j) { return static_cast<size_t>(i) * g.nv_ + j; };

    std::vector<std::uint8_t> in_sub(g.label_.size(), 0), in_strip(g.label_.size(), 0);
    for (int i = 0; i < g.nx_; ++i) {
        const double halfV = 0.5 * V.V(xc(i));
        for (int j = 0; j < g.nv_; ++j) {
            const double v = vc(j);
            if (halfV + 0.25 * v * v > level) continue;
            in_sub[idx(i, j)] = 1;
            const double lin = eik.xi[0] * (xc(i) - g.sx_) + eik.xi[1] * v;
            if (std::abs(lin) <= 4.0 * tau) in_strip[idx(i, j)] = 1;
        }
    }

    auto cell_of = [&](double x, double v) {
        const int i = std::min(std::max(static_cast<int>((x - g.x_lo_) / dx), 0), g.nx_ - 1);
        const int j = std::min(std::max(static_cast<int>((v + g.v_max_) / dv), 0), g.nv_ - 1);
        return std::pair<int, int>(i, j);
    };

    auto flood = [&](std::pair<int, int> seed, Region mark, auto&& passable) {
        std::deque<std::pair<int, int>> queue;
        if (!passable(seed.first, seed.second)) return;
        g.label_[idx(seed.first, seed.second)] = static_cast<std::uint8_t>(mark);
        queue.push_back(seed);
        while (!queue.empty()) {
            auto [i, j] = queue.front();
            queue.pop_front();
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int a = i + di[k], b = j + dj[k];
                if (a < 0 || a >= g.nx_ || b < 0 || b >= g.nv_) continue;
                if (g.label_[idx(a, b)] != static_cast<std::uint8_t>(Region::outside)) continue;
                if (!passable(a, b)) continue;
                g.label_[idx(a, b)] = static_cast<std::uint8_t>(mark);
                queue.push_back({a, b});
            }
        }
    };

    // C: saddle component of the strip inside the sublevel
    flood(cell_of(g.sx_, 0.0), Region::channel,
          [&](int i, int j) { return in_sub[idx(i, j)] && in_strip[idx(i, j)]; });

    const auto mhat_cell = cell_of(topo.m_hat.x, 0.0);
    const auto munder_cell = cell_of(topo.m_under.x, 0.0);
    if (g.label_[idx(mhat_cell.first, mhat_cell.second)] ==
            static_cast<std::uint8_t>(Region::channel) ||
        g.label_[idx(munder_cell.first, munder_cell.second)] ==
            static_cast<std::uint8_t>(Region::channel))
        fail(errc::geometry, "cutoff geometry: channel swallows a well; shrink tau/delta");

    flood(mhat_cell, Region::e_plus, [&](int i, int j) {
        return in_sub[idx(i, j)] &&
               g.label_[idx(i, j)] == static_cast<std::uint8_t>(Region::outside);
    });
    if (g.label_[idx(munder_cell.first, munder_cell.second)] ==
        static_cast<std::uint8_t>(Region::e_plus))
        fail(errc::geometry, "cutoff geometry: E+ reaches the deep well; shrink tau/delta");

    // everything else in the sublevel is E- by definition
    for (size_t k = 0; k < g.label_.size(); ++k)
        if (in_sub[k] && g.label_[k] == static_cast<std::uint8_t>(Region::outside))
            g.label_[k] = static_cast<std::uint8_t>(Region::e_minus);

    // the saddle must be interior to C
    const auto sc = cell_of(g.sx_, 0.0);
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            if (g.label_[idx(sc.first + a, sc.second + b)] !=
                static_cast<std::uint8_t>(Region::channel))
                fail(errc::geometry, "cutoff geometry: saddle not interior to the channel");

    // Laplace-frame guard: wherever the hat quasimode can be nonzero
    // (E+ and the ell > -2.5 tau part of the channel), f must not dip below
    // f(m_hat).
    const double f_mhat = 0.5 * V.V(topo.m_hat.x);
    double min_excess = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx_; ++i)
        for (int j = 0; j < g.nv_; ++j) {
            const auto lab = g.label_[idx(i, j)];
            if (lab == static_cast<std::uint8_t>(Region::e_plus)) {
                min_excess = std::min(min_excess, g.f0(xc(i), vc(j)) - f_mhat);
            } else if (lab == static_cast<std::uint8_t>(Region::channel)) {
                const Vec3 Xr(xc(i) - g.sx_, vc(j), 0.0);
                if (eik.ell0.eval(Xr) > -2.5 * tau)
                    min_excess = std::min(min_excess, g.f0(xc(i), vc(j)) - f_mhat);
            }
        }
    g.min_f_excess_ = min_excess;
    if (!(min_excess > -1e-10))
        fail(errc::geometry, "cutoff geometry: f dips below f(m_hat) on the support of "
                             "the hat quasimode");

    return g;
}

double CutoffGeometry::max_chi_jump(const EikonalData& eik, double h) const {
    const double Ch = normalization_Ch(tau_, h);
    const double dx = (x_hi_ - x_lo_) / nx_;
    const double dv = 2.0 * v_max_ / nv_;
    auto lab = [&](int i, int j) { return label_[static_cast<size_t>(i) * nv_ + j]; };

    double jump = 0.0;
    for (int i = 0; i + 1 < nx_; ++i)
        for (int j = 0; j + 1 < nv_; ++j) {
            const auto c = lab(i, j);
            for (auto [a, b] : {std::pair<int, int>{i + 1, j}, std::pair<int, int>{i, j + 1}}) {
                const auto d = lab(a, b);
                if (c == d) continue;
                const bool pair_ce =
                    (c == static_cast<std::uint8_t>(Region::channel) &&
                     (d == static_cast<std::uint8_t>(Region::e_plus) ||
                      d == static_cast<std::uint8_t>(Region::e_minus))) ||
                    (d == static_cast<std::uint8_t>(Region::channel) &&
                     (c == static_cast<std::uint8_t>(Region::e_plus) ||
                      c == static_cast<std::uint8_t>(Region::e_minus)));
                if (!pair_ce) continue;
                const bool c_is_channel = c == static_cast<std::uint8_t>(Region::channel);
                const int ci = c_is_channel ? i : a, cj = c_is_channel ? j : b;
                const auto e = c_is_channel ? d : c;
                const double x = x_lo_ + (ci + 0.5) * dx;
                const double v = -v_max_ + (cj + 0.5) * dv;
                const double ell = eik.ell0.eval(Vec3(x - sx_, v, 0.0)); // y = 0 slice
                const double chi = chi_integral(ell, tau_, h) / Ch;
                const double side = e == static_cast<std::uint8_t>(Region::e_plus) ? 1.0 : -1.0;
                jump = std::max(jump, std::abs(chi - side));
            }
        }
    return jump;
}

namespace {

// Dense evaluator for a low-degree polynomial and the derivatives the
// quasimode integrands need; avoids walking the Poly3 map in inner loops.
struct FlatPoly {
    struct Term {
        int a, b, c;
        double coef;
    };
    std::vector<Term> terms;

    static FlatPoly from(const Poly3& p) {
        FlatPoly f;
        for (const auto& [e, c] : p.terms()) f.terms.push_back({e[0], e[1], e[2], c});
        return f;
    }

    double eval(double x, double v, double y) const {
        double s = 0.0;
        for (const auto& t : terms) s += t.coef * ipow(x, t.a) * ipow(v, t.b) * ipow(y, t.c);
        return s;
    }

  private:
    static double ipow(double x, int n) {
        double r = 1.0;
        for (int k = 0; k < n; ++k) r *= x;
        return r;
    }
};

struct EllEval {
    FlatPoly l0, l0x, l0v, l0y, l0vv;
    FlatPoly l1, l1x, l1v, l1y, l1vv;
    double sx;

    static EllEval from(const EikonalData& eik) {
        EllEval e;
        e.sx = eik.saddle_x;
        e.l0 = FlatPoly::from(eik.ell0);
        e.l0x = FlatPoly::from(eik.ell0.derivative(0));
        e.l0v = FlatPoly::from(eik.ell0.derivative(1));
        e.l0y = FlatPoly::from(eik.ell0.derivative(2));
        e.l0vv = FlatPoly::from(eik.ell0.derivative(1).derivative(1));
        e.l1 = FlatPoly::from(eik.ell1);
        e.l1x = FlatPoly::from(eik.ell1.derivative(0));
        e.l1v = FlatPoly::from(eik.ell1.derivative(1));
        e.l1y = FlatPoly::from(eik.ell1.derivative(2));
        e.l1vv = FlatPoly::from(eik.ell1.derivative(1).derivative(1));
        return e;
    }

    double ell(double x, double v, double y, double h) const {
        const double xr = x - sx;
        return l0.eval(xr, v, y) + h * l1.eval(xr, v, y);
    }
    void grad(double x, double v, double y, double h, double g[3]) const {
        const double xr = x - sx;
        g[0] = l0x.eval(xr, v, y) + h * l1x.eval(xr, v, y);
        g[1] = l0v.eval(xr, v, y) + h * l1v.eval(xr, v, y);
        g[2] = l0y.eval(xr, v, y) + h * l1y.eval(xr, v, y);
    }
    double d2v(double x, double v, double y, double h) const {
        const double xr = x - sx;
        return l0vv.eval(xr, v, y) + h * l1vv.eval(xr, v, y);
    }
};

// theta(X) and the derivatives entering P psi: smooth descent of
// (f - f_s)/delta from 1 to 2. V(x) is passed in, hoisted out of the
// (v,y) loops by the integrator.
struct ThetaEval {
    double f_s, delta;

    double profile(double t) const {
        if (t <= 1.0) return 1.0;
        if (t >= 2.0) return 0.0;
        return 1.0 - smoothstep5(t - 1.0);
    }
    double profile_d1(double t) const {
        if (t <= 1.0 || t >= 2.0) return 0.0;
        return -smoothstep5_d1(t - 1.0);
    }
    double profile_d2(double t) const {
        if (t <= 1.0 || t >= 2.0) return 0.0;
        return -smoothstep5_d2(t - 1.0);
    }

    double value(double Vx, double v, double y) const {
        return profile((0.5 * Vx + 0.25 * (v * v + y * y) - f_s) / delta);
    }
    void derivs(double Vx, double dVx, double v, double y, double& th, double g[3],
                double& d2vv) const {
        const double t = (0.5 * Vx + 0.25 * (v * v + y * y) - f_s) / delta;
        th = profile(t);
        const double p1 = profile_d1(t), p2 = profile_d2(t);
        const double fx = 0.5 * dVx, fv = 0.5 * v, fy = 0.5 * y;
        g[0] = p1 * fx / delta;
        g[1] = p1 * fv / delta;
        g[2] = p1 * fy / delta;
        d2vv = p2 * fv * fv / (delta * delta) + p1 * 0.5 / delta;
    }
};

// u = theta (chi + 1) with chi region-resolved; the workhorse of every
// quadrature below.
struct HatEval {
    EllEval ell;
    ThetaEval theta;
    double h, tau, Ch;

    double u(double x, double Vx, double v, double y, Region reg) const {
        if (reg == Region::outside) return 0.0;
        double ch;
        switch (reg) {
            case Region::channel: ch = chi_integral(ell.ell(x, v, y, h), tau, h) / Ch; break;
            case Region::e_plus: ch = 1.0; break;
            default: ch = -1.0; break;
        }
        if (ch == -1.0) return 0.0;
        return theta.value(Vx, v, y) * (ch + 1.0);
    }

    // value, gradient and second v-derivative of u in one pass
    void derivs(double x, double Vx, double dVx, double v, double y, Region reg,
                double& uval, double gu[3], double& d2vv) const {
        uval = 0.0;
        gu[0] = gu[1] = gu[2] = 0.0;
        d2vv = 0.0;
        if (reg == Region::outside) return;

        double th, gth[3], d2th;
        theta.derivs(Vx, dVx, v, y, th, gth, d2th);

        double ch, gch[3] = {0, 0, 0}, d2ch = 0;
        if (reg == Region::channel) {
            const double l = ell.ell(x, v, y, h);
            ch = chi_integral(l, tau, h) / Ch;
            const double zeta = zeta_profile(l / tau);
            if (zeta != 0.0) {
                const double density = std::exp(-0.5 * l * l / h) / Ch;
                double gl[3];
                ell.grad(x, v, y, h, gl);
                for (int i = 0; i < 3; ++i) gch[i] = zeta * density * gl[i];
                const double zp = zeta_profile_d1(l / tau) / tau;
                d2ch = density * (zp * gl[1] * gl[1] +
                                  zeta * (ell.d2v(x, v, y, h) - l * gl[1] * gl[1] / h));
            }
        } else {
            ch = reg == Region::e_plus ? 1.0 : -1.0;
        }

        uval = th * (ch + 1.0);
        if (th == 0.0) return;
        for (int i = 0; i < 3; ++i) gu[i] = gth[i] * (ch + 1.0) + th * gch[i];
        d2vv = d2th * (ch + 1.0) + 2.0 * gth[1] * gch[1] + th * d2ch;
    }
};

constexpr int kComponents = 5; // u^2, 2u, gamma(h d_v u)^2, (Pu)^2, (P*u)^2

// All five hat-frame integrands in one Gauss-Hermite sweep per x value.
struct HatNodeEval {
    const Potential* V;
    const CutoffGeometry* cut;
    const HatEval* hat;
    double V0, h, gamma, nu;
    int n_gh;

    void eval_x(double x, double out[kComponents]) const {
        const QuadRule& gh = gauss_hermite(n_gh);
        const int n = static_cast<int>(gh.nodes.size());
        const double s2h = std::sqrt(2.0 * h);
        const double Vx = V->V(x), dVx = V->dV(x);
        const double level = cut->f_s() + 4.0 * cut->delta();
        const double e = -(Vx - V0) / h;
        const bool log_path = e > 600.0;

        double acc[kComponents] = {0, 0, 0, 0, 0};
        bool any = false;
        for (int i = 0; i < n; ++i) {
            const double v = s2h * gh.nodes[i];
            const Region lab = cut->classify(x, v);
            if (lab == Region::outside) continue;
            // y-extent of the sublevel at this (x,v)
            const double y2cap = 4.0 * (level - 0.5 * Vx) - v * v;
            if (y2cap <= 0.0) continue;

            double row[kComponents] = {0, 0, 0, 0, 0};
            bool row_any = false;
            for (int j = 0; j < n; ++j) {
                const double y = s2h * gh.nodes[j];
                if (y * y > y2cap) continue;
                double u, gu[3], d2;
                hat->derivs(x, Vx, dVx, v, y, lab, u, gu, d2);
                if (u == 0.0 && gu[0] == 0.0 && gu[1] == 0.0 && gu[2] == 0.0 && d2 == 0.0)
                    continue;
                const double bv0 = -dVx - nu * y * v;
                const double gv = gamma * v;
                const double by = nu * (v * v - h);
                const double adv = -gamma * h * h * d2;
                const double pop = adv + h * (v * gu[0] + (bv0 + gv) * gu[1] + by * gu[2]);
                const double posp = adv + h * (-v * gu[0] + (-bv0 + gv) * gu[1] - by * gu[2]);
                double w = gh.weights[j];
                if (log_path) {
                    const double le = e + std::log(gh.weights[i]) + std::log(w);
                    if (le > 690.0)
                        fail(errc::geometry, "frame integrator: exploding weight");
                    w = std::exp(le);
                }
                row[0] += w * u * u;
                row[1] += w * 2.0 * u;
                row[2] += w * gamma * h * h * gu[1] * gu[1];
                row[3] += w * pop * pop;
                row[4] += w * posp * posp;
                row_any = true;
            }
            if (!row_any) continue;
            const double wi = log_path ? 1.0 : gh.weights[i];
            for (int c = 0; c < kComponents; ++c) acc[c] += wi * row[c];
            any = true;
        }

        if (!any) {
            for (int c = 0; c < kComponents; ++c) out[c] = 0.0;
            return;
        }
        const double scale = 2.0 * h * (log_path ? 1.0 : std::exp(e));
        for (int c = 0; c < kComponents; ++c) out[c] = scale * acc[c];
    }
};

// Vector-valued adaptive panels: a panel is accepted when every component
// agrees with its two-half refinement to its own absolute tolerance.
struct VecPanels {
    const HatNodeEval* f;
    const QuadRule* q;

    void panel(double a, double b, double out[kComponents]) const {
        const double c = 0.5 * (a + b), s = 0.5 * (b - a);
        double node[kComponents];
        for (int k = 0; k < kComponents; ++k) out[k] = 0.0;
        for (int i = 0; i < q->nodes.size(); ++i) {
            f->eval_x(c + s * q->nodes[i], node);
            for (int k = 0; k < kComponents; ++k) out[k] += q->weights[i] * node[k];
        }
        for (int k = 0; k < kComponents; ++k) out[k] *= s;
    }

    void refine(double a, double b, const double coarse[kComponents],
                const double abs_tol[kComponents], int depth, double out[kComponents]) const {
        const double m = 0.5 * (a + b);
        double left[kComponents], right[kComponents], fine[kComponents];
        panel(a, m, left);
        panel(m, b, right);
        bool ok = true;
        for (int k = 0; k < kComponents; ++k) {
            fine[k] = left[k] + right[k];
            ok = ok && std::abs(fine[k] - coarse[k]) <= abs_tol[k];
        }
        if (depth <= 0 || ok) {
            for (int k = 0; k < kComponents; ++k) out[k] = fine[k];
            return;
        }
        double tol2[kComponents], lo[kComponents], ro[kComponents];
        for (int k = 0; k < kComponents; ++k) tol2[k] = 0.5 * abs_tol[k];
        refine(a, m, left, tol2, depth - 1, lo);
        refine(m, b, right, tol2, depth - 1, ro);
        for (int k = 0; k < kComponents; ++k) out[k] = lo[k] + ro[k];
    }

    // Breakpoints seed the panels at the known mass locations (wells and
    // saddle at scale sqrt(h)); the rough pass then only fixes magnitudes.
    void run(const std::vector<double>& brk, double rel_tol, int max_depth,
             double out[kComponents]) const {
        const int nseg = static_cast<int>(brk.size()) - 1;
        std::vector<std::array<double, kComponents>> coarse(nseg);
        double scale[kComponents] = {0, 0, 0, 0, 0};
        for (int s = 0; s < nseg; ++s) {
            panel(brk[s], brk[s + 1], coarse[s].data());
            for (int k = 0; k < kComponents; ++k) scale[k] += std::abs(coarse[s][k]);
        }

        double tol[kComponents], rough[kComponents] = {0, 0, 0, 0, 0};
        for (int k = 0; k < kComponents; ++k)
            tol[k] = 1e-3 * std::max(scale[k], 1e-300) / nseg;
        for (int s = 0; s < nseg; ++s) {
            double r[kComponents];
            refine(brk[s], brk[s + 1], coarse[s].data(), tol, 10, r);
            for (int k = 0; k < kComponents; ++k) rough[k] += r[k];
        }

        for (int k = 0; k < kComponents; ++k) {
            tol[k] = rel_tol * std::max(std::abs(rough[k]), 1e-300) / nseg;
            out[k] = 0.0;
        }
        for (int s = 0; s < nseg; ++s) {
            double r[kComponents];
            refine(brk[s], brk[s + 1], coarse[s].data(), tol, max_depth, r);
            for (int k = 0; k < kComponents; ++k) out[k] += r[k];
        }
    }
};

std::vector<double> seeded_breakpoints(double a, double b, std::initializer_list<double> centers,
                                       double h) {
    std::vector<double> brk{a, b};
    const double w = std::sqrt(h);
    for (double c : centers)
        for (double k : {-15.0, -5.0, -1.5, 1.5, 5.0, 15.0}) {
            const double p = c + k * w;
            if (p > a + 1e-12 && p < b - 1e-12) brk.push_back(p);
        }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [](double p, double q) { return std::abs(p - q) < 1e-12; }),
              brk.end());
    return brk;
}

} // namespace

double QuasimodePair::chi_ell(const EikonalData& eik, const CutoffGeometry& cut, double h,
                              const Vec3& X) {
    const Region reg = cut.classify(X);
    switch (reg) {
        case Region::channel:
            return chi_integral(eik.ell0.eval(X - Vec3(eik.saddle_x, 0, 0)) +
                                    h * eik.ell1.eval(X - Vec3(eik.saddle_x, 0, 0)),
                                cut.tau(), h) /
                   normalization_Ch(cut.tau(), h);
        case Region::e_plus: return 1.0;
        case Region::e_minus: return -1.0;
        default: return 0.0;
    }
}

double QuasimodePair::psi_hat(const ExtendedPhase& phase, const DoubleWellTopology& topo,
                              const EikonalData& eik, const CutoffGeometry& cut, double h,
                              const Vec3& X) {
    const double chi = chi_ell(eik, cut, h, X);
    if (chi == -1.0) return 0.0;
    ThetaEval th{cut.f_s(), cut.delta()};
    const double f_mhat = 0.5 * phase.potential().V(topo.m_hat.x);
    return th.value(phase.potential().V(X[0]), X[1], X[2]) * (chi + 1.0) *
           std::exp(-(phase.f(X) - f_mhat) / h);
}

QuasimodePair::QuasimodePair(const ExtendedPhase& phase, const DoubleWellTopology& topo,
                             const EikonalData& eik, const CutoffGeometry& cut, double hh,
                             QuadratureParams params) {
    h = hh;
    if (h <= 0) fail(errc::parameter, "quasimode: h must be positive");
    const Potential& V = phase.potential();
    const double gamma = phase.gamma();
    const double nu = phase.nu();
    const double V_mhat = V.V(topo.m_hat.x);
    const double V_munder = V.V(topo.m_under.x);

    HatEval hat{EllEval::from(eik), ThetaEval{cut.f_s(), cut.delta()}, h, cut.tau(),
                normalization_Ch(cut.tau(), h)};

    // x-range for the deep-mode Gaussian: where e^{-(V-V(m_under))/h} matters
    auto decay_edge = [&](double inside, double outside, double V0) {
        double a = inside, b = outside;
        for (int k = 0; k < 200; ++k) {
            const double m = 0.5 * (a + b);
            (V.V(m) - V0 <= 75.0 * h ? a : b) = m;
        }
        return 0.5 * (a + b);
    };

    struct Vals {
        double n2_hat, n2_under, cross, dirichlet, pnorm2, pstarnorm2;
    };
    auto compute_all = [&](int n_gh, double xtol) {
        Vals o{};
        HatNodeEval nodes{&V, &cut, &hat, V_mhat, h, gamma, nu, n_gh};
        VecPanels panels{&nodes, &gauss_legendre(21)};
        const auto brk =
            seeded_breakpoints(cut.x_lo(), cut.x_hi(), {topo.saddle.x, topo.m_hat.x}, h);
        double vals[kComponents];
        panels.run(brk, xtol, params.max_depth, vals);
        o.n2_hat = vals[0];
        o.cross = vals[1];
        o.dirichlet = vals[2];
        o.pnorm2 = vals[3];
        o.pstarnorm2 = vals[4];

        // deep-mode norm: the v,y Gaussians are exact, only x is quadrature
        const double xa = decay_edge(topo.m_under.x, V.box_lo(), V_munder);
        const double xb = decay_edge(topo.m_hat.x, V.box_hi(), V_munder);
        o.n2_under = 4.0 * (2.0 * std::numbers::pi * h) *
                     adaptive_gl([&](double x) { return std::exp(-(V.V(x) - V_munder) / h); },
                                 xa, xb, xtol, params.max_depth);
        return o;
    };

    auto base = compute_all(params.n_hermite, params.x_rel_tol);
    double diag_ratio_hat = 1.0, diag_ratio_under = 1.0;
    if (params.check_convergence) {
        auto fine = compute_all(params.n_hermite * 3 / 2, params.x_rel_tol);
        auto rel = [](double a, double b) {
            return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
        };
        diag_ratio_hat = fine.n2_hat / base.n2_hat;
        diag_ratio_under = fine.n2_under / base.n2_under;
        const double worst =
            std::max({rel(base.n2_hat, fine.n2_hat), rel(base.n2_under, fine.n2_under),
                      rel(base.dirichlet, fine.dirichlet), rel(base.pnorm2, fine.pnorm2),
                      rel(base.pstarnorm2, fine.pstarnorm2)});
        if (worst > params.conv_rel_tol)
            fail(errc::accuracy, "quasimode quadrature did not converge; achieved " +
                                     std::to_string(worst));
        base = fine;
    }

    norm_hat = std::sqrt(base.n2_hat);
    norm_under = std::sqrt(base.n2_under);
    gram_diag_hat = diag_ratio_hat;
    gram_diag_under = diag_ratio_under;

    const double pi_h_34 = std::pow(std::numbers::pi * h, 3.0 / 4.0);
    laplace_ratio_hat = norm_hat * std::sqrt(topo.D_m_hat) / (2.0 * pi_h_34);
    laplace_ratio_under = norm_under * std::sqrt(topo.D_m_under) / (2.0 * pi_h_34);

    // <psi_hat, psi_under> = e^{-(f(m_hat)-f(m_under))/h} * cross
    const double dlog = -(0.5 * (V_mhat - V_munder)) / h;
    log_gram_offdiag =
        dlog + std::log(std::abs(base.cross)) - std::log(norm_hat) - std::log(norm_under);

    rayleigh_hat = base.dirichlet / base.n2_hat;
    log_rayleigh_hat = std::log(base.dirichlet) - std::log(base.n2_hat);
    pnorm2_hat = base.pnorm2 / base.n2_hat;
    pstarnorm2_hat = base.pstarnorm2 / base.n2_hat;
    log_pnorm2_hat = std::log(base.pnorm2) - std::log(base.n2_hat);
    log_pstarnorm2_hat = std::log(base.pstarnorm2) - std::log(base.n2_hat);
}

InteractionReport interaction_eigenvalues(const QuasimodePair& q, double g_of_h) {
    InteractionReport r;
    r.lambda0 = 0.0; // P psi_under = 0 identically
    r.lambda1 = q.rayleigh_hat;
    r.matrix[1][1] = q.rayleigh_hat;

    const double a = 0.5 * q.log_pnorm2_hat;
    const double b = 0.5 * q.log_pstarnorm2_hat;
    const double m = std::max(a, b);
    const double logsum = m + std::log(std::exp(a - m) + std::exp(b - m));
    r.budget = std::exp(std::numbers::ln2 + a + logsum - std::log(g_of_h) -
                        q.log_rayleigh_hat);
    return r;
}

CutoffDefaults default_cutoff(const DoubleWellTopology& topo, const EikonalData& eik) {
    const double reach = std::min(std::abs(topo.m_hat.x - topo.saddle.x),
                                  std::abs(topo.m_under.x - topo.saddle.x));
    return {std::abs(eik.xi[0]) * reach / 6.0, topo.barrier_S / 8.0};
}

} // namespace adlab
