#pragma once

// The finite-dimensional effective system: one complex amplitude per
// generation. Gauged variant (the CKSTT system):
//
//   dB_i/dt = -i B_i^2 conj(B_i) + 2 i conj(B_i) (B_{i-1}^2 + B_{i+1}^2)
//
// raw variant adds the mass rotation  + i kappa (sum_k |b_k|^2) b_i, where
// kappa defaults to the idealized 2^N and both flows are conjugated by the
// gauge phase exp(i kappa M tau). Boundary convention B_0 = B_{N+1} = 0.

#include <limits>
#include <sstream>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/ode.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

enum class ToyVariant { GaugedB, RawB };

struct ToyState {
    std::vector<Complex> b;
    ToyVariant variant = ToyVariant::GaugedB;
    double kappa = 0.0;  // mass-phase coefficient of the raw variant

    int n() const { return int(b.size()); }
    double mass() const {
        double acc = 0.0;
        for (auto& v : b) acc += std::norm(v);
        return acc;
    }
};

inline ToyState make_toy_state(int N, ToyVariant variant = ToyVariant::GaugedB,
                               double kappa = std::numeric_limits<double>::quiet_NaN()) {
    ToyState s;
    s.b.assign(N, Complex(0.0, 0.0));
    s.variant = variant;
    s.kappa = std::isnan(kappa) ? std::pow(2.0, double(N)) : kappa;
    return s;
}

inline void toy_rhs_into(const std::vector<Complex>& b, ToyVariant variant, double kappa,
                         std::vector<Complex>& out) {
    const int N = int(b.size());
    const Complex I(0.0, 1.0);
    double msum = 0.0;
    if (variant == ToyVariant::RawB)
        for (auto& v : b) msum += std::norm(v);
    for (int i = 0; i < N; ++i) {
        Complex lo = i > 0 ? b[i - 1] : Complex(0.0, 0.0);
        Complex hi = i + 1 < N ? b[i + 1] : Complex(0.0, 0.0);
        Complex v = -I * b[i] * b[i] * std::conj(b[i]) +
                    2.0 * I * std::conj(b[i]) * (lo * lo + hi * hi);
        if (variant == ToyVariant::RawB) v += I * kappa * msum * b[i];
        out[i] = v;
    }
}

inline ToyState toy_rhs(const ToyState& s) {
    ToyState d = s;
    toy_rhs_into(s.b, s.variant, s.kappa, d.b);
    return d;
}

// Hamiltonian generating the gauged flow under i dB/dt = dh/dBbar:
// h = sum 1/2 |B_i|^4 - sum_i (B_i^2 conj(B_{i+1})^2 + conj); the raw flow
// adds -kappa/2 (sum |b|^2)^2.
inline double toy_hamiltonian(const ToyState& s) {
    const int N = s.n();
    double h = 0.0;
    for (int i = 0; i < N; ++i) h += 0.5 * std::norm(s.b[i]) * std::norm(s.b[i]);
    for (int i = 0; i + 1 < N; ++i)
        h -= 2.0 * (s.b[i] * s.b[i] * std::conj(s.b[i + 1] * s.b[i + 1])).real();
    if (s.variant == ToyVariant::RawB) {
        double m = s.mass();
        h -= 0.5 * s.kappa * m * m;
    }
    return h;
}

struct ToyTrajectory {
    std::vector<double> t;
    std::vector<std::vector<Complex>> b;
    ToyVariant variant = ToyVariant::GaugedB;
    double kappa = 0.0;
    double mass_drift = 0.0;  // max relative |M(t) - M(0)| / M(0)
    double ham_drift = 0.0;   // max relative Hamiltonian drift

    ToyState state_at(std::size_t k) const {
        return {b.at(k), variant, kappa};
    }
    std::string to_csv() const {
        std::ostringstream os;
        os << "t";
        for (std::size_t i = 0; i < (b.empty() ? 0 : b[0].size()); ++i) os << ",b" << i + 1 << "_sq";
        os << "\n";
        char buf[64];
        for (std::size_t k = 0; k < t.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g", t[k]);
            os << buf;
            for (auto& v : b[k]) {
                std::snprintf(buf, sizeof buf, ",%.12g", std::norm(v));
                os << buf;
            }
            os << "\n";
        }
        return os.str();
    }
};

// Adaptive integration with mass / Hamiltonian drift monitoring; samples at
// `nsamples + 1` uniform times including both endpoints.
inline ToyTrajectory integrate_toy(const ToyState& s0, double T, double tol, int nsamples = 200) {
    if (!(T > 0.0)) throw StepFailure("integrate_toy requires T > 0");
    ToyTrajectory traj;
    traj.variant = s0.variant;
    traj.kappa = s0.kappa;
    const double m0 = s0.mass();
    const double h0 = toy_hamiltonian(s0);
    const double hscale = std::max(std::abs(h0), 1e-30);

    OdeRhs rhs = [&](double, const OdeState& y, OdeState& dy) {
        toy_rhs_into(y, s0.variant, s0.kappa, dy);
    };
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    OdeState y = s0.b;
    traj.t.push_back(0.0);
    traj.b.push_back(y);
    for (int k = 1; k <= nsamples; ++k) {
        double t0 = T * double(k - 1) / nsamples, t1 = T * double(k) / nsamples;
        ode_integrate(rhs, y, t0, t1, opt);
        traj.t.push_back(t1);
        traj.b.push_back(y);
        ToyState cur{y, s0.variant, s0.kappa};
        if (m0 > 0.0)
            traj.mass_drift = std::max(traj.mass_drift, std::abs(cur.mass() - m0) / m0);
        traj.ham_drift =
            std::max(traj.ham_drift, std::abs(toy_hamiltonian(cur) - h0) / hscale);
    }
    return traj;
}

enum class GaugeDirection { RawToGauged, GaugedToRaw };

// B_i(tau) = exp(-i kappa M tau) b_i removes the mass rotation: if b solves
// the raw system with + i kappa M b, then B solves the gauged system. The
// sign is pinned by the two-path conjugacy oracle in the tests.
inline ToyState gauge_map(const ToyState& s, double tau, GaugeDirection dir) {
    ToyState out = s;
    double phase = -s.kappa * s.mass() * tau;
    if (dir == GaugeDirection::GaugedToRaw) phase = -phase;
    Complex ph = std::polar(1.0, phase);
    for (auto& v : out.b) v *= ph;
    out.variant = dir == GaugeDirection::RawToGauged ? ToyVariant::GaugedB : ToyVariant::RawB;
    return out;
}

// b(tau) -> lambda^-1 b(lambda^-2 tau): samples (t, b) map to (lambda^2 t,
// lambda^-1 b). The rescaled trajectory solves the same equations.
inline ToyTrajectory scale_orbit(const ToyTrajectory& traj, double lambda) {
    if (!(lambda > 0.0)) throw StepFailure("lambda must be > 0");
    ToyTrajectory out = traj;
    for (auto& t : out.t) t *= lambda * lambda;
    for (auto& st : out.b)
        for (auto& v : st) v /= lambda;
    return out;
}

// Max |FD derivative - rhs| over interior samples (4th-order differences);
// requires uniform sampling.
inline double trajectory_residual(const ToyTrajectory& traj) {
    if (traj.t.size() < 5) throw StepFailure("need at least 5 samples");
    const double h = traj.t[1] - traj.t[0];
    double worst = 0.0;
    std::vector<Complex> rhs(traj.b[0].size());
    for (std::size_t k = 2; k + 2 < traj.t.size(); ++k) {
        toy_rhs_into(traj.b[k], traj.variant, traj.kappa, rhs);
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            Complex fd = (traj.b[k - 2][i] - 8.0 * traj.b[k - 1][i] + 8.0 * traj.b[k + 1][i] -
                          traj.b[k + 2][i]) /
                         (12.0 * h);
            worst = std::max(worst, std::abs(fd - rhs[i]));
        }
    }
    return worst;
}

// --- cascade shooting -----------------------------------------------------

struct ShootingConfig {
    int source_gen = 3;        // 1-based
    int target_gen = 0;        // 0 = N - 1
    double target_fraction = 0.7;
    double tmax_factor = 8.0;  // horizon = factor * N * log(1/nu)
    int phase_grid = 16;
    int refine_iters = 10;
    double tol = 1e-10;
    int samples = 400;
};

struct CascadeResult {
    ToyTrajectory trajectory;       // best orbit found (gauged variant)
    double T0 = 0.0;                // time of peak target fraction
    double peak_fraction = 0.0;
    int target_gen = 0;
    double nu = 0.0;
    double phase_knob = 0.0;        // winning phase increment
    double amp4_knob = 1.0;         // winning next-generation amplitude factor
    bool reached_target = false;
};

struct SearchFailedError : Error {
    CascadeResult best;
    explicit SearchFailedError(const CascadeResult& b)
        : Error("SearchFailed: best fraction " + std::to_string(b.peak_fraction) +
                " below target"),
          best(b) {}
};

namespace detail_toy {

inline ToyState cascade_initial(int N, double nu, int source, double phase_step, double amp4) {
    ToyState s = make_toy_state(N, ToyVariant::GaugedB);
    double rest = 0.0;
    for (int j = 0; j < N; ++j) {
        if (j + 1 == source) continue;
        double amp = nu * ((j + 1 == source + 1) ? amp4 : 1.0);
        s.b[j] = std::polar(amp, phase_step * double(j + 1 - source));
        rest += std::norm(s.b[j]);
    }
    if (rest >= 1.0) throw StepFailure("nu too large for unit mass");
    s.b[source - 1] = Complex(std::sqrt(1.0 - rest), 0.0);
    return s;
}

}  // namespace detail_toy

// Shooting over a one-parameter phase family plus the next-generation
// amplitude, maximizing the peak mass fraction in the target generation.
inline CascadeResult cascade_search(int N, double nu, const ShootingConfig& cfg = {}) {
    if (N < 5) throw StepFailure("cascade_search needs N >= 5");
    if (!(nu > 0.0)) throw StepFailure("cascade_search needs nu > 0");
    const int target = cfg.target_gen > 0 ? cfg.target_gen : N - 1;
    const double Tmax = cfg.tmax_factor * double(N) * std::log(1.0 / nu);

    auto shoot = [&](double phase_step, double amp4, ToyTrajectory* keep) {
        ToyState s0 = detail_toy::cascade_initial(N, nu, cfg.source_gen, phase_step, amp4);
        ToyTrajectory traj = integrate_toy(s0, Tmax, cfg.tol, cfg.samples);
        double peak = 0.0, tpeak = 0.0;
        for (std::size_t k = 0; k < traj.t.size(); ++k) {
            double frac = std::norm(traj.b[k][target - 1]);
            if (frac > peak) {
                peak = frac;
                tpeak = traj.t[k];
            }
        }
        if (keep) *keep = std::move(traj);
        return std::make_pair(peak, tpeak);
    };

    double best_peak = -1.0, best_phase = 0.0, best_amp = 1.0;
    for (int p = 0; p < cfg.phase_grid; ++p) {
        double phase = kTwoPi * double(p) / double(cfg.phase_grid);
        auto [peak, tpeak] = shoot(phase, 1.0, nullptr);
        if (peak > best_peak) {
            best_peak = peak;
            best_phase = phase;
        }
    }
    // Golden-section refinement of the phase knob.
    {
        const double gr = 0.61803398874989484;
        double a = best_phase - kTwoPi / cfg.phase_grid, b = best_phase + kTwoPi / cfg.phase_grid;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = shoot(x1, 1.0, nullptr).first, f2 = shoot(x2, 1.0, nullptr).first;
        for (int it = 0; it < cfg.refine_iters; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = shoot(x2, 1.0, nullptr).first;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = shoot(x1, 1.0, nullptr).first;
            }
        }
        double xm = f1 > f2 ? x1 : x2, fm = std::max(f1, f2);
        if (fm > best_peak) {
            best_peak = fm;
            best_phase = xm;
        }
    }
    // Amplitude knob for the generation above the source.
    for (double amp : {0.25, 0.5, 2.0, 4.0}) {
        auto [peak, tpeak] = shoot(best_phase, amp, nullptr);
        if (peak > best_peak) {
            best_peak = peak;
            best_amp = amp;
        }
    }

    CascadeResult res;
    res.nu = nu;
    res.target_gen = target;
    res.phase_knob = best_phase;
    res.amp4_knob = best_amp;
    auto [peak, tpeak] = shoot(best_phase, best_amp, &res.trajectory);
    res.peak_fraction = peak;
    res.T0 = tpeak;
    res.reached_target = peak >= cfg.target_fraction;
    if (!res.reached_target) throw SearchFailedError(res);
    return res;
}

inline nlohmann::json cascade_to_json(const CascadeResult& r) {
    return {{"nu", r.nu},
            {"target_gen", r.target_gen},
            {"T0", r.T0},
            {"peak_fraction", r.peak_fraction},
            {"phase_knob", r.phase_knob},
            {"amp4_knob", r.amp4_knob},
            {"reached_target", r.reached_target},
            {"mass_drift", r.trajectory.mass_drift},
            {"hamiltonian_drift", r.trajectory.ham_drift}};
}

}  // namespace qhdlab
