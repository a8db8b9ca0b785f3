#pragma once

// The acceptance battery: every exit criterion of the artifact as a named,
// timed check with a one-line verdict. The CLI exposes these as the
// `acceptance` experiment; the ctest suite runs them one by one.

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

#include "qhdlab/approximation.hpp"
#include "qhdlab/hydro.hpp"
#include "qhdlab/lambda_set.hpp"
#include "qhdlab/nls.hpp"
#include "qhdlab/normal_form.hpp"
#include "qhdlab/reduction.hpp"
#include "qhdlab/restricted.hpp"
#include "qhdlab/toy_model.hpp"

namespace qhdlab::acceptance {

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail_acc {

struct Check {
    bool pass = true;
    std::ostringstream msg;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (msg.tellp() > 0) msg << "; ";
            msg << "FAILED " << what;
        }
    }
    void note(const std::string& what) {
        if (msg.tellp() > 0) msg << "; ";
        msg << what;
    }
};

// Pinned desk sets. Constructions are deterministic in the seed, so these
// are stable artifacts of the suite.
inline LambdaSet desk_n3(int q) { return build_lambda(3, 6, q, 42); }

inline LambdaSet desk_n4() { return build_lambda(4, 6, 1, 42); }

inline LambdaSet desk_n5() {
    BuildOptions opt;
    opt.base_radius = 25;
    return build_lambda(5, 8, 1, 1, opt);
}

inline LambdaSet desk_n7() {
    BuildOptions opt;
    opt.base_radius = 60;
    opt.annulus_lo = 0.85;
    opt.branch_per_hop = 32;
    opt.max_attempts = 100;
    return build_lambda(7, 8, 1, 50, opt);
}

// Pattern for the deviation sweeps (small coordinates keep the grids small).
inline LambdaSet sweep_pattern() {
    BuildOptions opt;
    opt.base_radius = 16;
    opt.max_attempts = 80;
    return build_lambda(4, 6, 1, 1, opt);
}

inline FourierField2D random_reduced(std::mt19937_64& rng, int cutoff, int nmodes, double amp,
                                     int stride = 1) {
    std::uniform_int_distribution<int> coord(-3, 3);
    std::normal_distribution<double> g(0.0, amp);
    FourierField2D f(Frame::DiagonalW, cutoff, stride);
    for (int k = 0; k < nmodes; ++k) {
        LatticePoint n{stride * coord(rng), stride * coord(rng)};
        if (n.is_zero()) continue;
        f.add(n, Complex(g(rng), g(rng)));
    }
    return f;
}

}  // namespace detail_acc

// 1. d(n)^2 - e(n)^2 = 1 to 1e-12 for all |n|_inf <= 64 across the 3x3
//    (m, eps) grid; the 2 m eps^-2 / |n|^2 decay bounds hold exactly.
inline CriterionResult criterion_1() {
    using namespace detail_acc;
    Check c;
    double worst = 0.0;
    for (double m : {0.5, 1.0, 2.0})
        for (double eps : {0.25, 0.5, 1.0}) {
            double me2 = 2.0 * m / (eps * eps);
            for (int x = -64; x <= 64; ++x)
                for (int y = -64; y <= 64; ++y) {
                    LatticePoint n{x, y};
                    if (n.is_zero()) continue;
                    auto de = diag_coeffs(n, m, eps);
                    double err = std::abs(de.d * de.d - de.e * de.e - 1.0);
                    worst = std::max(worst, err);
                    if (err > 1e-12) {
                        c.require(false, "identity at " + n.str());
                        goto done;
                    }
                    double bound = me2 / double(n.norm2());
                    if (std::abs(de.e) > bound || std::abs(de.d - 1.0) > bound) {
                        c.require(false, "decay bound at " + n.str());
                        goto done;
                    }
                }
        }
done:
    c.note("max |d^2-e^2-1| = " + std::to_string(worst));
    return {1, c.pass, c.msg.str(), 0.0};
}

// 2. Quadratic-form identity under S on 100 random reduced fields to 1e-8,
//    symplectic block identities to 1e-12.
inline CriterionResult criterion_2() {
    using namespace detail_acc;
    Check c;
    const double m = 1.0, eps = 1.0;
    FrequencyTable freq(m, eps);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto w = random_reduced(rng, 24, 12, 0.3);
        if (w.support_size() == 0) continue;
        auto z = apply_S(w, freq, MapDirection::Forward);
        double lhs = h2_reduced(z, m, eps);
        double rhs = h2_diagonal(w, freq);
        double rel = std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs));
        worst = std::max(worst, rel);
        c.require(rel <= 1e-8, "quadratic form identity (rel " + std::to_string(rel) + ")");
        for (auto& [n, cc] : w.coeffs()) {
            auto de = freq.diag(n);
            c.require(std::abs(de.d * de.d - de.e * de.e - 1.0) <= 1e-12, "symplectic block");
            auto dem = freq.diag(-n);
            c.require(de.d == dem.d && de.e == dem.e, "real-to-real evenness");
        }
        if (!c.pass) break;
    }
    c.note("max relative quadratic-form error = " + std::to_string(worst));
    return {2, c.pass, c.msg.str(), 0.0};
}

// 3. Homological residuals <= 1e-10 on the N = 3 desk set; generator
//    sup-norms shrink by a factor in [3.5, 4.5] under q -> 2q.
inline CriterionResult criterion_3() {
    using namespace detail_acc;
    Check c;
    SimConfig cfg16, cfg32;
    cfg16.q = 16;
    cfg32.q = 32;
    FrequencyTable freq(1.0, 1.0);
    auto ls16 = desk_n3(16);
    auto ls32 = desk_n3(32);

    auto src3 = build_G3_source(ls16, cfg16, freq);
    auto f3 = solve_homological(src3, freq, 16, nullptr);
    double r3 = verify_homological(f3, freq, src3);
    c.require(r3 <= 1e-10, "F3 residual " + std::to_string(r3));

    auto src4 = build_H4_source(ls16, cfg16);
    auto g4 = solve_homological(src4, freq, 16, nullptr);
    double r4 = verify_homological(g4, freq, src4);
    c.require(r4 <= 1e-10, "G4 residual " + std::to_string(r4));

    GeneratorReport f16, f32, g16, g32;
    build_generator_F3(ls16, cfg16, freq, &f16);
    build_generator_F3(ls32, cfg32, freq, &f32);
    build_generator_G4(ls16, cfg16, freq, &g16);
    build_generator_G4(ls32, cfg32, freq, &g32);
    double fac3 = f16.sup_coeff / f32.sup_coeff;
    double fac4 = g16.sup_coeff / g32.sup_coeff;
    c.require(fac3 >= 3.5 && fac3 <= 4.5, "[[F3]] delta^2 factor " + std::to_string(fac3));
    c.require(fac4 >= 3.5 && fac4 <= 4.5, "[[G4]] delta^2 factor " + std::to_string(fac4));
    c.note("residuals " + std::to_string(r3) + ", " + std::to_string(r4) + "; factors " +
           std::to_string(fac3) + ", " + std::to_string(fac4));
    return {3, c.pass, c.msg.str(), 0.0};
}

// 4. Small divisors on the desk set at q = 32: 3- and 4-wave divisors above
//    0.5 q^2, nuclear families below K eps^-4 q^-2 with the measured K, and
//    the family bound shrinking by [3, 5] when q doubles.
inline CriterionResult criterion_4() {
    using namespace detail_acc;
    Check c;
    SimConfig cfg32, cfg64;
    cfg32.q = 32;
    cfg64.q = 64;
    auto rep32 = verify_small_divisors(desk_n3(32), cfg32);
    auto rep64 = verify_small_divisors(desk_n3(64), cfg64);
    c.require(rep32.kappa3 >= 0.5, "kappa3 = " + std::to_string(rep32.kappa3));
    c.require(rep32.kappa4 >= 0.5, "kappa4 = " + std::to_string(rep32.kappa4));
    double fbound = rep32.K_family * std::pow(cfg32.eps, -4.0) / (32.0 * 32.0);
    c.require(rep32.family_max <= fbound * (1.0 + 1e-12), "family bound");
    double factor = rep32.family_max / rep64.family_max;
    c.require(factor >= 3.0 && factor <= 5.0, "family q-scaling factor " + std::to_string(factor));
    c.note("kappa3 " + std::to_string(rep32.kappa3) + ", kappa4 " + std::to_string(rep32.kappa4) +
           ", K " + std::to_string(rep32.K_family) + ", q-factor " + std::to_string(factor));
    return {4, c.pass, c.msg.str(), 0.0};
}

// 5. Exhaustive property certificates for the N = 5 and N = 7 sets plus the
//    s = 2 weight-ratio certificate on the N = 7 set.
inline CriterionResult criterion_5() {
    using namespace detail_acc;
    Check c;
    auto n5 = desk_n5();
    auto rep5 = verify_lambda(n5);
    c.require(rep5.all_pass(), "N=5 properties");
    auto n7 = desk_n7();
    auto rep7 = verify_lambda(n7);
    c.require(rep7.all_pass(), "N=7 properties");
    double ratio = weight_ratio(n7, 2.0, 3, 5);
    c.require(ratio >= 2.0, "weight ratio " + std::to_string(ratio));
    c.note("N7 ratio(3->5, s=2) = " + std::to_string(ratio));
    return {5, c.pass, c.msg.str(), 0.0};
}

// 6. Toy cascade at N = 5: fraction >= 0.7 in generation 4, conservation,
//    and T0 growing about linearly in log(1/nu).
inline CriterionResult criterion_6() {
    using namespace detail_acc;
    Check c;
    ShootingConfig scfg;
    scfg.target_fraction = 0.7;
    scfg.tol = 1e-12;
    CascadeResult res;
    try {
        res = cascade_search(5, 1e-3, scfg);
    } catch (const SearchFailedError& e) {
        c.require(false, "cascade fraction " + std::to_string(e.best.peak_fraction));
        return {6, c.pass, c.msg.str(), 0.0};
    }
    c.require(res.peak_fraction >= 0.7, "fraction " + std::to_string(res.peak_fraction));
    c.require(res.trajectory.mass_drift < 1e-9,
              "mass drift " + std::to_string(res.trajectory.mass_drift));
    c.require(res.trajectory.ham_drift < 1e-8,
              "H_TM drift " + std::to_string(res.trajectory.ham_drift));

    // T0 trend with the winning knobs reused across nu
    std::vector<double> t0s;
    for (double nu : {1e-2, 1e-3, 1e-4}) {
        ToyState s0 = make_toy_state(5);
        double rest = 0.0;
        for (int j = 0; j < 5; ++j) {
            if (j == 2) continue;
            double a = nu * ((j == 3) ? res.amp4_knob : 1.0);
            s0.b[j] = std::polar(a, res.phase_knob * double(j - 2));
            rest += std::norm(s0.b[j]);
        }
        s0.b[2] = Complex(std::sqrt(1.0 - rest), 0.0);
        double tmax = scfg.tmax_factor * 5.0 * std::log(1.0 / nu);
        auto traj = integrate_toy(s0, tmax, 1e-11, 400);
        double peak = 0.0, tpeak = 0.0;
        for (std::size_t k = 0; k < traj.t.size(); ++k)
            if (std::norm(traj.b[k][3]) > peak) {
                peak = std::norm(traj.b[k][3]);
                tpeak = traj.t[k];
            }
        t0s.push_back(tpeak);
    }
    // equal log-steps: successive differences should be comparable
    double d1 = t0s[1] - t0s[0], d2 = t0s[2] - t0s[1];
    bool trend = d1 > 0.0 && d2 > 0.0 && d2 / d1 >= 0.5 && d2 / d1 <= 1.5;
    c.require(trend, "T0 trend (T0 = " + std::to_string(t0s[0]) + ", " + std::to_string(t0s[1]) +
                         ", " + std::to_string(t0s[2]) + ")");
    c.note("T0(nu) = " + std::to_string(t0s[0]) + ", " + std::to_string(t0s[1]) + ", " +
           std::to_string(t0s[2]) + "; fraction " + std::to_string(res.peak_fraction));
    return {6, c.pass, c.msg.str(), 0.0};
}

// 7. U_Lambda-restricted effective dynamics from intragenerationally equal
//    data stays equal and matches the toy flow after tau = 2 eps^-2 t and
//    the gauge, to 1e-6 over unit tau.
inline CriterionResult criterion_7() {
    using namespace detail_acc;
    Check c;
    const double eps = 1.0;
    auto ls = desk_n4();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<Complex> b0(ls.N);
    for (auto& v : b0) v = Complex(g(rng), g(rng));

    const double tau_end = 1.0;
    auto traj = integrate_on_lambda(ls, eps, b0, tau_end / toy_time_scale(eps), 1e-12, 8);
    ModeSpace space(ls.members());
    double spread = 0.0;
    for (auto& w : traj.w) spread = std::max(spread, intragenerational_spread(ls, space, w));
    c.require(spread <= 1e-8, "intragenerational spread " + std::to_string(spread));

    auto toy0 = make_toy_state(ls.N, ToyVariant::RawB, mass_phase_coeff_exact(ls.gen_size));
    for (int i = 0; i < ls.N; ++i) toy0.b[i] = std::conj(b0[i]);
    auto toy = integrate_toy(toy0, tau_end, 1e-12, 8);
    auto final_b = collapse_generations(ls, space, traj.w.back());
    double worst = 0.0;
    for (int i = 0; i < ls.N; ++i)
        worst = std::max(worst, std::abs(final_b[i] - std::conj(toy.b.back()[i])));
    c.require(worst <= 1e-6, "toy match error " + std::to_string(worst));

    // the same comparison through the gauged flow and the gauge map
    auto gauged0 = gauge_map(toy0, 0.0, GaugeDirection::RawToGauged);
    auto gtraj = integrate_toy(gauged0, tau_end, 1e-12, 8);
    ToyState gend{gtraj.b.back(), ToyVariant::GaugedB, toy0.kappa};
    auto back = gauge_map(gend, tau_end, GaugeDirection::GaugedToRaw);
    double worst2 = 0.0;
    for (int i = 0; i < ls.N; ++i)
        worst2 = std::max(worst2, std::abs(final_b[i] - std::conj(back.b[i])));
    c.require(worst2 <= 1e-6, "gauged-route match " + std::to_string(worst2));
    c.note("spread " + std::to_string(spread) + ", sup errors " + std::to_string(worst) + " / " +
           std::to_string(worst2) + " (reparametrization tau = 2 eps^-2 t)");
    return {7, c.pass, c.msg.str(), 0.0};
}

// 8. NLS integrator: structurally exact sublattice invariance, mass to
//    1e-12 over 10^4 steps, second-order energy drift; momentum sits at the
//    conservation floor of the split scheme.
inline CriterionResult criterion_8() {
    using namespace detail_acc;
    Check c;
    SimConfig cfg;
    cfg.q = 4;
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> coord(-3, 3);
    std::normal_distribution<double> g(0.0, 1.0);
    FourierField2D f(Frame::ShiftedPsi, 16, 4);
    f.set({0, 0}, Complex(1.0, 0.0));
    for (int k = 0; k < 6; ++k) {
        LatticePoint n{4 * coord(rng), 4 * coord(rng)};
        if (n.is_zero()) continue;
        f.add(n, 0.05 * Complex(g(rng), g(rng)));
    }

    NlsSim sim(f, NlsEquation::Rescaled, 1.0, 64);
    double m0 = sim.mass();
    for (int s = 0; s < 10000; ++s) sim.step_strang(1e-3);
    double mdrift = std::abs(sim.mass() - m0) / m0;
    c.require(mdrift < 1e-12, "mass drift " + std::to_string(mdrift));
    auto fin = sim.field();
    bool on_lattice = true;
    for (auto& [n, cc] : fin.coeffs()) on_lattice = on_lattice && n.x % 4 == 0 && n.y % 4 == 0;
    c.require(on_lattice, "off-sublattice mass");

    auto run = [&](double dt) {
        auto traj = integrate_nls(f, 1.0, dt, cfg, NlsEquation::Rescaled, 2, NlsStepper::Strang,
                                  5, 64);
        return std::make_pair(traj.log.energy_drift(), traj.log.momentum_drift());
    };
    auto [e1, p1] = run(2e-3);
    auto [e2, p2] = run(1e-3);
    double efac = e1 / e2;
    c.require(efac >= 3.0 && efac <= 5.0, "energy dt-factor " + std::to_string(efac));
    // both sub-flows conserve momentum exactly; the drift must sit at the
    // floor (and in particular not grow when dt halves)
    bool mom_ok = (p1 < 1e-10 && p2 < 1e-10) || (p1 / p2 >= 3.0 && p1 / p2 <= 5.0);
    c.require(mom_ok, "momentum drift " + std::to_string(p1) + " / " + std::to_string(p2));
    c.note("mass " + std::to_string(mdrift) + ", energy factor " + std::to_string(efac) +
           ", momentum drifts " + std::to_string(p1) + ", " + std::to_string(p2));
    return {8, c.pass, c.msg.str(), 0.0};
}

// 9. Hydrodynamics: plane-wave residuals at machine level, second-order
//    residual convergence, Madelung identities, matching quantum-correction
//    forms.
inline CriterionResult criterion_9() {
    using namespace detail_acc;
    Check c;
    const double eps = 1.0;
    SimConfig cfg;

    FourierField2D pw(Frame::PhysicalU, 8);
    pw.set({1, 0}, Complex(1.0, 0.0));
    auto traj = integrate_nls(pw, 4e-3, 1e-3, cfg, NlsEquation::Original, 4);
    std::vector<HydroState> states;
    for (auto& fld : traj.fields) states.push_back(madelung(fld, eps, 1e-6, 32));
    auto res = qhd_residual(states, traj.t[1] - traj.t[0]);
    c.require(res.continuity <= 1e-10 && res.momentum <= 1e-10,
              "plane-wave residuals " + std::to_string(res.continuity) + ", " +
                  std::to_string(res.momentum));

    FourierField2D u0(Frame::PhysicalU, 8);
    u0.set({0, 0}, Complex(1.0, 0.0));
    u0.set({1, 0}, Complex(0.02, 0.0));
    auto run = [&](double dt) {
        auto tr = integrate_nls(u0, 4.0 * dt, dt, cfg, NlsEquation::Original, 4);
        std::vector<HydroState> st;
        for (auto& fld : tr.fields) st.push_back(madelung(fld, eps, 1e-6, 32));
        return qhd_residual(st, dt).continuity;
    };
    double factor = run(4e-3) / run(2e-3);
    c.require(factor >= 2.5 && factor <= 6.0, "residual dt-order factor " + std::to_string(factor));

    auto h = madelung(u0, eps, 1e-6, 64);
    double idmax = 0.0;
    for (std::size_t i = 0; i < h.rho.v.size(); ++i) {
        idmax = std::max(idmax, std::abs(h.rho.v[i] - h.sqrt_rho.v[i] * h.sqrt_rho.v[i]));
        idmax = std::max(idmax, std::abs(h.Lx.v[i] - h.sqrt_rho.v[i] * h.vx.v[i]));
    }
    c.require(idmax <= 1e-10, "pointwise identities " + std::to_string(idmax));
    c.require(h.max_curl <= 1e-10, "curl " + std::to_string(h.max_curl));

    auto v = u0;
    v *= std::polar(1.0, 0.77);
    auto hv = madelung(v, eps, 1e-6, 64);
    double gauge = 0.0;
    for (std::size_t i = 0; i < h.rho.v.size(); ++i)
        gauge = std::max(gauge, std::abs(h.rho.v[i] - hv.rho.v[i]));
    c.require(gauge <= 1e-12, "gauge invariance " + std::to_string(gauge));

    double qc = quantum_correction_mismatch(h);
    c.require(qc <= 1e-8, "quantum correction forms " + std::to_string(qc));
    c.note("residual order factor " + std::to_string(factor) + ", qc mismatch " +
           std::to_string(qc));
    return {9, c.pass, c.msg.str(), 0.0};
}

// 10. Norm equivalence: bounded ratios across the perturbation family and
//     genuine blow-up along the near-vacuum family.
inline CriterionResult criterion_10() {
    using namespace detail_acc;
    Check c;
    const double m = 1.0, s = 2.0, eps = 1.0;
    double lo = 1e9, hi = 0.0;
    for (double a : {0.01, 0.05, 0.1, 0.2, 0.3}) {
        FourierField2D u(Frame::PhysicalU, 8);
        u.set({0, 0}, Complex(std::sqrt(m), 0.0));
        u.set({1, 0}, Complex(a * std::sqrt(m), 0.0));
        auto rep = equivalence_report(u, m, s, eps, 10.0);
        c.require(rep.within_window, "window at a = " + std::to_string(a));
        lo = std::min(lo, rep.ratio_rho_v);
        hi = std::max(hi, rep.ratio_rho_v);
    }
    double prev = 0.0;
    bool grows = true;
    for (double cc : {0.5, 0.25, 0.1, 0.05, 0.02}) {
        FourierField2D u(Frame::PhysicalU, 8);
        u.set({0, 0}, Complex(std::sqrt(m), 0.0));
        u.set({1, 0}, Complex((1.0 - cc) * std::sqrt(m), 0.0));
        auto rep = equivalence_report(u, m, s, eps, 10.0, false);
        double inv = 1.0 / rep.ratio_rho_v;
        grows = grows && inv > prev;
        prev = inv;
    }
    c.require(grows, "near-vacuum blow-up");
    bool violated = false;
    try {
        FourierField2D u(Frame::PhysicalU, 8);
        u.set({0, 0}, Complex(std::sqrt(m), 0.0));
        u.set({1, 0}, Complex(0.97 * std::sqrt(m), 0.0));
        equivalence_report(u, m, s, eps, 10.0);
    } catch (const HypothesisViolated&) {
        violated = true;
    }
    c.require(violated, "hypothesis violation detection");
    c.note("ratio range [" + std::to_string(lo) + ", " + std::to_string(hi) +
           "], vacuum inverse-ratio end " + std::to_string(prev));
    return {10, c.pass, c.msg.str(), 0.0};
}

// 11. Approximation trends: sup_t l1 deviation non-increasing across
//     q in {8, 16, 32} and non-increasing in lambda, plus the
//     near-equilibrium control run.
inline CriterionResult criterion_11() {
    using namespace detail_acc;
    Check c;
    auto pattern = sweep_pattern();
    DeviationConfig dc;
    dc.pattern = pattern;
    dc.lambda = 60.0;
    dc.tau_end = 0.4;
    dc.samples = 8;
    dc.dt = 0.25;
    dc.b0 = {Complex(0.2, 0.0), Complex(0.8, 0.1), Complex(0.3, -0.2), Complex(0.1, 0.05)};

    // control: frozen single-generation equilibrium stays put
    DeviationConfig ctrl = dc;
    ctrl.b0 = {Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
    ctrl.tau_end = 0.2;
    ctrl.samples = 4;
    auto cs = run_deviation(ctrl, 16);
    c.require(cs.sup <= 10.0 * std::max(cs.first_sample, 1e-12),
              "control run sup " + std::to_string(cs.sup) + " vs first " +
                  std::to_string(cs.first_sample));

    std::vector<double> sups;
    for (int q : {8, 16, 32}) {
        auto s = run_deviation(dc, q);
        sups.push_back(s.sup);
    }
    bool mono_q = sups[1] <= sups[0] * 1.05 && sups[2] <= sups[1] * 1.05;
    c.require(mono_q, "q-trend " + std::to_string(sups[0]) + " -> " + std::to_string(sups[1]) +
                          " -> " + std::to_string(sups[2]));

    std::vector<double> lsups;
    for (double lam : {40.0, 80.0, 160.0}) {
        DeviationConfig dl = dc;
        dl.lambda = lam;
        auto s = run_deviation(dl, 16);
        lsups.push_back(s.sup);
    }
    bool mono_l = lsups[1] <= lsups[0] * 1.05 && lsups[2] <= lsups[1] * 1.05;
    c.require(mono_l, "lambda-trend " + std::to_string(lsups[0]) + " -> " +
                          std::to_string(lsups[1]) + " -> " + std::to_string(lsups[2]));
    c.note("q-sweep sups " + std::to_string(sups[0]) + ", " + std::to_string(sups[1]) + ", " +
           std::to_string(sups[2]) + "; lambda-sweep " + std::to_string(lsups[0]) + ", " +
           std::to_string(lsups[1]) + ", " + std::to_string(lsups[2]));
    return {11, c.pass, c.msg.str(), 0.0};
}

// 12. End-to-end Sobolev growth demonstration. The parameters live at desk
//     scale: the arbitrarily large growth factors of the full theory sit at
//     q and lambda ranges far beyond any numerical run, so the check pins
//     the s = 2 ratio at 2.
inline CriterionResult criterion_12() {
    using namespace detail_acc;
    Check c;
    GrowthConfig gc;
    {
        BuildOptions opt;
        opt.base_radius = 12;
        opt.annulus_lo = 0.9;
        opt.score_top = 2;
        opt.max_attempts = 300;
        opt.best_ratio_from = 1;
        opt.best_ratio_to = 4;
        gc.pattern = build_lambda(5, 6, 1, 1, opt);
    }
    gc.q = 16;
    gc.lambda = 20.0;
    gc.nu = 3e-2;
    gc.s = 2.0;
    gc.source_gen = 1;
    gc.target_gen = 4;
    gc.horizon_factor = 1.2;
    gc.dt = 0.35;
    gc.samples = 40;
    gc.target_fraction = 0.5;
    gc.shoot_tmax_factor = 6.0;

    auto res = run_growth(gc);
    c.require(res.ratio >= 2.0, "H^2 ratio " + std::to_string(res.ratio));
    c.note("H^2 ratio " + std::to_string(res.ratio) + " at t = " + std::to_string(res.t_peak) +
           " (toy prediction " + std::to_string(res.predicted_ratio) + ", transfer fraction " +
           std::to_string(res.peak_fraction) + ", M^2 ratio " +
           std::to_string(res.ms_ratio_rho_v) +
           "); caveat: the arbitrarily large growth factors of the full theory require " +
           "parameter ranges (q, lambda double-exponential in N) far out of desk reach");
    return {12, c.pass, c.msg.str(), 0.0};
}

inline CriterionResult run_criterion(int id) {
    using Clock = std::chrono::steady_clock;
    auto t0 = Clock::now();
    CriterionResult r;
    switch (id) {
        case 1: r = criterion_1(); break;
        case 2: r = criterion_2(); break;
        case 3: r = criterion_3(); break;
        case 4: r = criterion_4(); break;
        case 5: r = criterion_5(); break;
        case 6: r = criterion_6(); break;
        case 7: r = criterion_7(); break;
        case 8: r = criterion_8(); break;
        case 9: r = criterion_9(); break;
        case 10: r = criterion_10(); break;
        case 11: r = criterion_11(); break;
        case 12: r = criterion_12(); break;
        default: throw ConfigError("criterion id must be 1..12");
    }
    r.id = id;
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

inline std::vector<CriterionResult> run_criteria(std::vector<int> ids) {
    if (ids.empty())
        for (int i = 1; i <= 12; ++i) ids.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run_criterion(id));
    return out;
}

inline std::string format_result(const CriterionResult& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%6.1f s", r.seconds);
    return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" +
           buf + "): " + r.detail;
}

}  // namespace qhdlab::acceptance
