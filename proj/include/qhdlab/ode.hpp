#pragma once

// Adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4)) over flat
// complex state vectors, with PI step-size control. Error is measured in a
// mixed absolute/relative RMS norm.

#include <vector>

#include "qhdlab/core.hpp"

namespace qhdlab {

using OdeState = std::vector<Complex>;
using OdeRhs = std::function<void(double t, const OdeState& y, OdeState& dydt)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_dt = 1e-3;
    double max_dt = 1.0;
    std::size_t max_steps = 50'000'000;
};

namespace detail_ode {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace detail_ode

// Integrates from (t0, y) to t1 in place; calls observe(t, y) after every
// accepted step (and once at the start) when provided.
inline void ode_integrate(const OdeRhs& rhs, OdeState& y, double t0, double t1,
                          const OdeOptions& opt = {},
                          const std::function<void(double, const OdeState&)>& observe = nullptr) {
    using namespace detail_ode;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const std::size_t n = y.size();
    OdeState k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);

    double t = t0;
    double dt = std::min(opt.initial_dt, std::abs(t1 - t0));
    if (dt <= 0.0) dt = 1e-6;
    double prev_err = 1.0;
    if (observe) observe(t, y);
    rhs(t, y, k1);
    std::size_t steps = 0;

    auto stage = [&](OdeState& out, std::initializer_list<std::pair<const OdeState*, double>> terms) {
        for (std::size_t i = 0; i < n; ++i) {
            Complex acc = y[i];
            for (auto& [k, a] : terms) acc += (dir * dt) * a * (*k)[i];
            out[i] = acc;
        }
    };

    while (dir * (t1 - t) > 0.0) {
        if (++steps > opt.max_steps) throw StepFailure("step limit exceeded");
        dt = std::min(dt, std::abs(t1 - t));

        stage(ytmp, {{&k1, a21}});
        rhs(t + dir * c2 * dt, ytmp, k2);
        stage(ytmp, {{&k1, a31}, {&k2, a32}});
        rhs(t + dir * c3 * dt, ytmp, k3);
        stage(ytmp, {{&k1, a41}, {&k2, a42}, {&k3, a43}});
        rhs(t + dir * c4 * dt, ytmp, k4);
        stage(ytmp, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}});
        rhs(t + dir * c5 * dt, ytmp, k5);
        stage(ytmp, {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}});
        rhs(t + dir * dt, ytmp, k6);
        stage(y5, {{&k1, b1}, {&k3, b3}, {&k4, b4}, {&k5, b5}, {&k6, b6}});
        rhs(t + dir * dt, y5, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex de = (dir * dt) * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                       e6 * k6[i] + e7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            double r = std::abs(de) / sc;
            err += r * r;
        }
        err = std::sqrt(err / std::max<std::size_t>(n, 1));

        if (err <= 1.0) {
            t += dir * dt;
            y.swap(y5);
            k1.swap(k7);  // FSAL
            if (observe) observe(t, y);
            double fac = 0.9 * std::pow(err > 0 ? err : 1e-10, -0.7 / 5.0) *
                         std::pow(prev_err > 0 ? prev_err : 1e-10, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            dt = std::min(dt * fac, opt.max_dt);
            prev_err = err;
        } else {
            double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            dt *= fac;
            if (dt < 1e-14 * std::max(1.0, std::abs(t)))
                throw StepFailure("tolerance unattainable (dt underflow at t = " + std::to_string(t) + ")");
        }
    }
}

}  // namespace qhdlab
