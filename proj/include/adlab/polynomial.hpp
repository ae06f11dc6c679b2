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
#include <cmath>
#include <map>
#include <vector>

#include "adlab/error.hpp"

namespace adlab {

/// Exponent multi-index for a monomial in three variables (x, v, y).
using Exponent = std::array<int, 3>;

/// Graded lexicographic order: total degree first, then lex with x > v > y.
struct GradedLex {
    bool operator()(const Exponent& a, const Exponent& b) const {
        const int da = a[0] + a[1] + a[2];
        const int db = b[0] + b[1] + b[2];
        if (da != db) return da < db;
        return a > b; // within a degree, earlier basis element = larger x power
    }
};

/// Sparse polynomial in the three phase-space variables, exact coefficient
/// arithmetic over double. Everything here is tiny (degree <= 8), so the
/// map representation costs nothing and keeps the algebra transparent.
class Poly3 {
  public:
    using Terms = std::map<Exponent, double, GradedLex>;

    Poly3() = default;
    explicit Poly3(double c) { if (c != 0.0) terms_[{0, 0, 0}] = c; }

    static Poly3 monomial(const Exponent& e, double c) {
        Poly3 p;
        if (c != 0.0) p.terms_[e] = c;
        return p;
    }
    static Poly3 variable(int i, double c = 1.0) {
        Exponent e{0, 0, 0};
        e[i] = 1;
        return monomial(e, c);
    }

    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add_term(const Exponent& e, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    Poly3& operator+=(const Poly3& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Poly3& operator-=(const Poly3& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    Poly3& operator*=(double s) {
        if (s == 0.0) { terms_.clear(); return *this; }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend Poly3 operator+(Poly3 a, const Poly3& b) { return a += b; }
    friend Poly3 operator-(Poly3 a, const Poly3& b) { return a -= b; }
    friend Poly3 operator*(Poly3 a, double s) { return a *= s; }
    friend Poly3 operator*(double s, Poly3 a) { return a *= s; }

    friend Poly3 operator*(const Poly3& a, const Poly3& b) {
        Poly3 r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_)
                r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
        return r;
    }

    Poly3 derivative(int i) const {
        Poly3 r;
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponent d = e;
            d[i] -= 1;
            r.add_term(d, c * e[i]);
        }
        return r;
    }

    double eval(const Eigen::Vector3d& X) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_)
            s += c * ipow(X[0], e[0]) * ipow(X[1], e[1]) * ipow(X[2], e[2]);
        return s;
    }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
        return d;
    }

    Poly3 homogeneous_part(int j) const {
        Poly3 r;
        for (const auto& [e, c] : terms_)
            if (e[0] + e[1] + e[2] == j) r.add_term(e, c);
        return r;
    }

    Poly3 truncated(int max_degree) const {
        Poly3 r;
        for (const auto& [e, c] : terms_)
            if (e[0] + e[1] + e[2] <= max_degree) r.add_term(e, c);
        return r;
    }

    double coeff(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? 0.0 : it->second;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

  private:
    static double ipow(double x, int n) {
        double r = 1.0;
        for (int k = 0; k < n; ++k) r *= x;
        return r;
    }

    Terms terms_;
};

/// All exponents of total degree exactly j over three variables, in graded
/// lexicographic order. This fixes the basis used by the homogeneous solver.
inline std::vector<Exponent> homogeneous_basis(int j) {
    std::vector<Exponent> basis;
    for (int a = j; a >= 0; --a)
        for (int b = j - a; b >= 0; --b) basis.push_back({a, b, j - a - b});
    return basis;
}

/// Homogeneous polynomial of fixed degree j in three variables. A thin
/// wrapper over Poly3 whose constructor enforces the degree invariant.
class HomogeneousPolynomial {
  public:
    HomogeneousPolynomial() = default;
    HomogeneousPolynomial(int degree, Poly3 p) : degree_(degree), poly_(std::move(p)) {
        for (const auto& [e, c] : poly_.terms()) {
            (void)c;
            if (e[0] + e[1] + e[2] != degree_)
                fail(errc::parameter, "HomogeneousPolynomial: term of wrong degree");
        }
    }

    int degree() const { return degree_; }
    const Poly3& poly() const { return poly_; }
    double eval(const Eigen::Vector3d& X) const { return poly_.eval(X); }

  private:
    int degree_ = 0;
    Poly3 poly_;
};

} // namespace adlab
