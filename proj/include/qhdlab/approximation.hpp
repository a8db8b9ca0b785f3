#pragma once

// Deviation experiment: embed a toy orbit on the scaled set, reconstruct a
// wave function, evolve the full truncated NLS, pull each sample back
// through the same frames, and measure the l1 distance to the embedded
// orbit. The sweep over q exposes the delta^2 = (eps q)^-2 suppression of
// the normal-form remainder; the sweep over lambda exposes the amplitude
// suppression.

#include <vector>

#include "qhdlab/config.hpp"
#include "qhdlab/hydro.hpp"
#include "qhdlab/nls.hpp"
#include "qhdlab/normal_form.hpp"
#include "qhdlab/reduction.hpp"
#include "qhdlab/restricted.hpp"
#include "qhdlab/toy_model.hpp"

namespace qhdlab {

struct DeviationConfig {
    LambdaSet pattern;        // q = 1 pattern; scaled per run
    double m = 1.0;
    double eps = 1.0;
    double lambda = 40.0;     // amplitude scaling; embedded size ~ G/lambda
    double tau_end = 4.0;     // toy-time horizon of the comparison
    int samples = 20;
    double dt = 0.05;         // Lawson step in physical time
    double toy_tol = 1e-12;
    std::vector<Complex> b0;  // per-generation amplitudes of the toy datum
};

struct DeviationSeries {
    int q = 0;
    double lambda = 0.0;
    double t_end = 0.0;
    std::vector<double> t;
    std::vector<double> deviation;  // l1 distance to the embedded orbit
    double sup = 0.0;
    double first_sample = 0.0;  // transient scale right after the start
    double mass_drift = 0.0;
};

// Reference toy flow for the embedding: the raw variant with the exact
// mass-phase coefficient, run on conjugated data (the table flow on
// U_Lambda is the conjugate of the toy flow; see restricted.hpp).
inline ToyTrajectory reference_toy_orbit(const LambdaSet& pattern, double eps,
                                         const std::vector<Complex>& b0, double tau_end,
                                         double tol, int samples) {
    ToyState d0 = make_toy_state(pattern.N, ToyVariant::RawB,
                                 mass_phase_coeff_exact(pattern.gen_size));
    for (int i = 0; i < pattern.N; ++i) d0.b[i] = std::conj(b0[i]);
    return integrate_toy(d0, tau_end, tol, samples);
}

inline DeviationSeries run_deviation(const DeviationConfig& cfg, int q) {
    LambdaSet ls = scale(cfg.pattern, q);
    FrequencyTable freq(cfg.m, cfg.eps);

    // toy reference over the scaled horizon
    const double lam = cfg.lambda;
    const double t_end = cfg.tau_end * lam * lam / toy_time_scale(cfg.eps);
    auto toy = reference_toy_orbit(cfg.pattern, cfg.eps, cfg.b0, cfg.tau_end, cfg.toy_tol,
                                   cfg.samples);

    // initial field
    int cutoff = 1;
    for (auto& n : ls.members()) cutoff = std::max(cutoff, n.linf());
    ToyState init = make_toy_state(ls.N);
    for (int i = 0; i < ls.N; ++i) init.b[i] = std::conj(toy.b.front()[i]) / lam;
    auto r0 = embed_toy(ls, init, cutoff);
    auto z0 = apply_S(r0.with_frame(Frame::DiagonalW), freq, MapDirection::Forward);
    ReducedState st0{z0, 0.0, cfg.m};
    auto psi0 = planewave_reconstruct(st0);

    // full evolution, sampled at the toy sample times
    NlsSim sim(psi0, NlsEquation::Rescaled, cfg.eps);
    const double mass0 = sim.mass();
    DeviationSeries out;
    out.q = q;
    out.lambda = lam;
    out.t_end = t_end;

    for (int k = 0; k <= cfg.samples; ++k) {
        double target = t_end * double(k) / cfg.samples;
        while (sim.t() < target - 1e-12) {
            double step = std::min(cfg.dt, target - sim.t());
            sim.step_lawson(step);
        }
        auto psi = sim.field();
        auto stk = planewave_reduce(psi, cfg.m, 1e-6);
        auto w = apply_S(stk.z, freq, MapDirection::Inverse);
        auto r = rotating_frame(w, freq, sim.t(), MapDirection::Forward);

        ToyState ref = make_toy_state(ls.N);
        for (int i = 0; i < ls.N; ++i) ref.b[i] = std::conj(toy.b[k][i]) / lam;
        auto rref = embed_toy(ls, ref, cutoff);
        double dev = wiener_norm(r - rref);
        out.t.push_back(sim.t());
        out.deviation.push_back(dev);
        out.sup = std::max(out.sup, dev);
        if (k == 1) out.first_sample = dev;
        out.mass_drift = std::max(out.mass_drift, std::abs(sim.mass() - mass0) / mass0);
    }
    return out;
}

inline std::vector<DeviationSeries> q_sweep(const DeviationConfig& cfg, const std::vector<int>& qs) {
    std::vector<DeviationSeries> out;
    for (int q : qs) out.push_back(run_deviation(cfg, q));
    return out;
}

inline std::vector<DeviationSeries> lambda_sweep(DeviationConfig cfg, int q,
                                                 const std::vector<double>& lambdas) {
    std::vector<DeviationSeries> out;
    for (double l : lambdas) {
        cfg.lambda = l;
        out.push_back(run_deviation(cfg, q));
    }
    return out;
}

inline std::string deviation_to_csv(const DeviationSeries& s) {
    std::ostringstream os;
    os << "t,deviation\n";
    char buf[80];
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", s.t[i], s.deviation[i]);
        os << buf;
    }
    return os.str();
}

// --- end-to-end growth experiment -------------------------------------------

struct GrowthConfig {
    LambdaSet pattern;
    double m = 1.0;
    double eps = 1.0;
    int q = 16;
    double lambda = 40.0;
    double nu = 1e-2;
    double s = 2.0;
    int source_gen = 3;
    int target_gen = 0;  // 0 = N - 1
    double horizon_factor = 1.2;  // in units of the expected transfer time
    double dt = 0.05;
    int samples = 60;
    double shoot_tmax_factor = 6.0;
    double target_fraction = 0.6;
};

struct GrowthResult {
    double hs0 = 0.0;
    double hs_peak = 0.0;
    double t_peak = 0.0;
    double ratio = 0.0;          // H^s(T)/H^s(0) at the best sample
    double ms_ratio_rho_v = 0.0; // Madelung Ms ratio at the same sample
    double toy_T0 = 0.0;
    double peak_fraction = 0.0;  // toy-level transfer fraction
    double predicted_ratio = 0.0;  // from the toy orbit and the set weights
    std::vector<double> t;
    std::vector<double> hs;
    std::vector<double> ms;
    std::vector<double> l1dist;  // closeness to the plane wave
};

// End-to-end demonstration: shoot for a toy cascade orbit, embed it, evolve
// the full truncated NLS, pull back, and report the Sobolev growth of the
// wave function together with the Madelung M^s growth.
inline GrowthResult run_growth(const GrowthConfig& cfg) {
    ShootingConfig scfg;
    scfg.source_gen = cfg.source_gen;
    scfg.target_gen = cfg.target_gen > 0 ? cfg.target_gen : cfg.pattern.N - 1;
    scfg.target_fraction = cfg.target_fraction;
    scfg.tmax_factor = cfg.shoot_tmax_factor;
    auto cascade = cascade_search(cfg.pattern.N, cfg.nu, scfg);

    GrowthResult out;
    out.toy_T0 = cascade.T0;
    out.peak_fraction = cascade.peak_fraction;

    LambdaSet ls = scale(cfg.pattern, cfg.q);
    FrequencyTable freq(cfg.m, cfg.eps);
    int cutoff = 1;
    for (auto& n : ls.members()) cutoff = std::max(cutoff, n.linf());

    // initial datum: the cascade start, conjugated for the table flow
    ToyState init = make_toy_state(ls.N);
    for (int i = 0; i < ls.N; ++i) init.b[i] = std::conj(cascade.trajectory.b.front()[i]) / cfg.lambda;
    auto r0 = embed_toy(ls, init, cutoff);
    auto z0 = apply_S(r0.with_frame(Frame::DiagonalW), freq, MapDirection::Forward);
    ReducedState st0{z0, 0.0, cfg.m};
    auto psi0 = planewave_reconstruct(st0);

    // horizon: the toy orbit predicts the H^s ratio curve through the
    // per-generation weights; run until just past its predicted peak
    std::vector<double> wgen(ls.N, 0.0);
    for (int i = 0; i < ls.N; ++i)
        for (auto& n : ls.generations[i])
            wgen[i] += std::pow(1.0 + double(n.norm2()), cfg.s);
    double pred0 = 0.0;
    for (int i = 0; i < ls.N; ++i) pred0 += std::norm(cascade.trajectory.b.front()[i]) * wgen[i];
    double tau_star = cascade.T0, pred_peak = 0.0;
    for (std::size_t k = 0; k < cascade.trajectory.t.size(); ++k) {
        double p = 0.0;
        for (int i = 0; i < ls.N; ++i) p += std::norm(cascade.trajectory.b[k][i]) * wgen[i];
        if (p > pred_peak) {
            pred_peak = p;
            tau_star = cascade.trajectory.t[k];
        }
    }
    out.predicted_ratio = std::sqrt(pred_peak / pred0);
    const double t_transfer = tau_star * cfg.lambda * cfg.lambda / toy_time_scale(cfg.eps);
    const double t_end = cfg.horizon_factor * t_transfer;

    NlsSim sim(psi0, NlsEquation::Rescaled, cfg.eps);
    auto sample = [&](double t) {
        auto psi = sim.field();
        double hs = hs_norm(psi, cfg.s);
        double l1 = std::abs(std::abs(psi.at({0, 0})) - std::sqrt(cfg.m));
        for (auto& [n, c] : psi.coeffs())
            if (!n.is_zero()) l1 += std::abs(c);
        auto h = madelung(psi, cfg.eps);
        double ms = ms_norm(h, cfg.s, MsVariant::RhoV);
        out.t.push_back(t);
        out.hs.push_back(hs);
        out.ms.push_back(ms);
        out.l1dist.push_back(l1);
    };
    sample(0.0);
    out.hs0 = out.hs.front();
    for (int k = 1; k <= cfg.samples; ++k) {
        double target = t_end * double(k) / cfg.samples;
        while (sim.t() < target - 1e-12) sim.step_lawson(std::min(cfg.dt, target - sim.t()));
        sample(sim.t());
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < out.hs.size(); ++i)
        if (out.hs[i] > out.hs[best]) best = i;
    out.hs_peak = out.hs[best];
    out.t_peak = out.t[best];
    out.ratio = out.hs_peak / out.hs0;
    out.ms_ratio_rho_v = out.ms[best] / out.ms.front();
    return out;
}

inline std::string growth_to_csv(const GrowthResult& g) {
    std::ostringstream os;
    os << "t,hs,ms_rho_v,l1_to_plane_wave\n";
    char buf[120];
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", g.t[i], g.hs[i], g.ms[i],
                      g.l1dist[i]);
        os << buf;
    }
    return os.str();
}

}  // namespace qhdlab
