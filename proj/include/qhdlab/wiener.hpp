#pragma once

// Composition h(f) of a Wiener-algebra field with an analytic function h
// given by its Taylor series at z0. The series is summed term by term with
// sparse-convolution powers of (f - z0); a geometric tail bound with ratio
// ||f - z0||_l1 / (R/2) controls truncation.

#include <limits>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/field.hpp"

namespace qhdlab {

struct PowerSeries {
    Complex z0;
    std::vector<Complex> coeffs;  // a_k for polynomial series
    double radius = 0.0;          // radius of convergence (may be inf)
    // Coefficient generator for non-polynomial series.
    std::function<Complex(std::size_t)> gen;

    Complex coeff(std::size_t k) const {
        if (gen) return gen(k);
        return k < coeffs.size() ? coeffs[k] : Complex(0.0, 0.0);
    }
    bool finite() const { return !gen; }
    Complex value_at_center() const { return coeff(0); }
};

inline PowerSeries series_square(Complex z0) {
    return {z0, {z0 * z0, 2.0 * z0, Complex(1.0, 0.0)},
            std::numeric_limits<double>::infinity(), nullptr};
}

// 1/z around z0 != 0: a_k = (-1)^k / z0^{k+1}, radius |z0|.
inline PowerSeries series_reciprocal(Complex z0) {
    if (z0 == Complex(0.0, 0.0)) throw RadiusExceeded("1/z has no expansion at 0");
    PowerSeries s;
    s.z0 = z0;
    s.radius = std::abs(z0);
    s.gen = [z0](std::size_t k) {
        Complex v = 1.0 / z0;
        for (std::size_t j = 0; j < k; ++j) v *= -1.0 / z0;
        return v;
    };
    return s;
}

// sqrt(z) around real z0 > 0 (principal branch), radius z0.
inline PowerSeries series_sqrt(double z0) {
    if (!(z0 > 0.0)) throw RadiusExceeded("sqrt expansion needs z0 > 0");
    PowerSeries s;
    s.z0 = Complex(z0, 0.0);
    s.radius = z0;
    s.gen = [z0](std::size_t k) {
        double c = 1.0, a = 0.5;  // binomial(1/2, k) z0^{1/2 - k}
        for (std::size_t j = 0; j < k; ++j) {
            c *= a / double(j + 1);
            a -= 1.0;
        }
        return Complex(c * std::pow(z0, 0.5 - double(k)), 0.0);
    };
    return s;
}

inline PowerSeries series_exp(Complex z0) {
    PowerSeries s;
    s.z0 = z0;
    s.radius = std::numeric_limits<double>::infinity();
    s.gen = [z0](std::size_t k) {
        Complex v = std::exp(z0);
        for (std::size_t j = 1; j <= k; ++j) v /= double(j);
        return v;
    };
    return s;
}

struct ComposeReport {
    double dist = 0.0;        // ||f - z0||_l1
    double tail_bound = 0.0;  // bound on the dropped series tail in l1
    std::size_t terms = 0;    // series terms summed
    double measured_C = 0.0;  // ( ||h(f)||_l1 - |h(z0)| ) / dist, when dist > 0
};

// Truncated-series evaluation of h(f). Requires ||f - z0||_l1 < R/2; stops
// once the tail bound drops below tol.
inline FourierField2D wiener_compose(const FourierField2D& f, const PowerSeries& h,
                                     double tol = 1e-12, ComposeReport* report = nullptr) {
    FourierField2D u = f;  // u = f - z0
    u.add({0, 0}, -h.z0);
    const double dist = wiener_norm(u);
    if (!(dist < h.radius / 2.0))
        throw RadiusExceeded("||f - z0||_l1 = " + std::to_string(dist) +
                             " not below half the radius " + std::to_string(h.radius));

    FourierField2D acc(f.frame(), f.cutoff(), f.stride());
    acc.set({0, 0}, h.coeff(0));

    // Geometric ratio of successive terms; < 1 by the precondition. For
    // entire functions the measured term ratio is used instead.
    const double geo = std::isfinite(h.radius) ? 2.0 * dist / h.radius : 0.5;

    FourierField2D pw = u;  // u^k
    const std::size_t max_terms = 4096;
    double tail = 0.0;
    std::size_t k = 1;
    double prev_term = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (;; ++k) {
        if (k > max_terms) throw TruncationNotConverged("series did not converge in 4096 terms");
        Complex ak = h.coeff(k);
        if (ak != Complex(0.0, 0.0)) {
            FourierField2D term = pw;
            term *= ak;
            acc = acc + term;
        }
        if (h.finite() && k + 1 >= h.coeffs.size()) break;
        if (dist == 0.0) break;
        double tnext = std::abs(h.coeff(k + 1)) * std::pow(dist, double(k + 1));
        // Terms that stop decreasing mean the declared radius was optimistic.
        if (std::isfinite(prev_term) && tnext >= prev_term && tnext > tol) {
            if (++growing > 8 && k > 16)
                throw TruncationNotConverged(
                    "series terms are not decreasing at k = " + std::to_string(k) +
                    "; declared radius appears too large for the coefficients");
        } else {
            growing = 0;
        }
        double ratio = geo;
        if (!std::isfinite(h.radius) && prev_term > 0.0 && std::isfinite(prev_term))
            ratio = std::min(0.9, std::max(geo, tnext / prev_term));
        tail = tnext / (1.0 - ratio);
        if (tail < tol) break;
        prev_term = tnext;
        pw = field_product(pw, u, f.frame(), f.cutoff());
    }
    if (report) {
        report->dist = dist;
        report->tail_bound = tail;
        report->terms = k + 1;
        double h0 = std::abs(h.value_at_center());
        report->measured_C = dist > 0.0 ? (wiener_norm(acc) - h0) / dist : 0.0;
    }
    return acc;
}

}  // namespace qhdlab
