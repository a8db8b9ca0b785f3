#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qhdlab/hydro.hpp"
#include "qhdlab/nls.hpp"

using namespace qhdlab;

namespace {

FourierField2D plane_wave_state(double m, LatticePoint k, int cutoff = 8) {
    FourierField2D f(Frame::PhysicalU, cutoff);
    f.set(k, Complex(std::sqrt(m), 0.0));
    return f;
}

FourierField2D perturbed(double m, double a, int cutoff = 8) {
    FourierField2D f(Frame::PhysicalU, cutoff);
    f.set({0, 0}, Complex(std::sqrt(m), 0.0));
    f.set({1, 0}, Complex(a * std::sqrt(m), 0.0));
    return f;
}

}  // namespace

TEST_CASE("madelung of plane waves") {
    const double m = 1.3, eps = 0.7;
    auto h0 = madelung(plane_wave_state(m, {0, 0}), eps);
    for (double r : h0.rho.v) CHECK(r == doctest::Approx(m).epsilon(1e-12));
    for (double v : h0.vx.v) CHECK(std::abs(v) < 1e-12);
    for (double l : h0.Lx.v) CHECK(std::abs(l) < 1e-12);

    auto hk = madelung(plane_wave_state(m, {2, -1}), eps);
    for (double r : hk.rho.v) CHECK(r == doctest::Approx(m).epsilon(1e-10));
    for (double v : hk.vx.v) CHECK(v == doctest::Approx(eps * 2.0).epsilon(1e-10));
    for (double v : hk.vy.v) CHECK(v == doctest::Approx(-eps).epsilon(1e-10));
    CHECK(hk.max_curl < 1e-10);
}

TEST_CASE("madelung identities on a perturbed plane wave") {
    auto u = perturbed(1.0, 0.01);
    auto h = madelung(u, 1.0);
    for (std::size_t i = 0; i < h.rho.v.size(); ++i) {
        CHECK(std::abs(h.rho.v[i] - h.sqrt_rho.v[i] * h.sqrt_rho.v[i]) < 1e-12);
        CHECK(std::abs(h.Lx.v[i] - h.sqrt_rho.v[i] * h.vx.v[i]) < 1e-10);
        CHECK(std::abs(h.Ly.v[i] - h.sqrt_rho.v[i] * h.vy.v[i]) < 1e-10);
    }
    CHECK(h.max_curl < 1e-10);
}

TEST_CASE("gauge invariance: constant phases do not change the transform") {
    auto u = perturbed(1.0, 0.05);
    auto v = u;
    v *= std::polar(1.0, 1.234);
    auto hu = madelung(u, 1.0), hv = madelung(v, 1.0);
    for (std::size_t i = 0; i < hu.rho.v.size(); ++i) {
        CHECK(hu.rho.v[i] == doctest::Approx(hv.rho.v[i]).epsilon(1e-13));
        CHECK(hu.vx.v[i] == doctest::Approx(hv.vx.v[i]).epsilon(1e-10));
    }
}

TEST_CASE("vacuum is detected") {
    FourierField2D u(Frame::PhysicalU, 4);
    u.set({0, 0}, Complex(1.0, 0.0));
    u.set({1, 0}, Complex(1.0, 0.0));  // 1 + e^{ix} vanishes at x = pi
    CHECK_THROWS_AS(madelung(u, 1.0), VacuumDetected);
}

TEST_CASE("conserved quantities of reference states") {
    const double cell = 4.0 * kPi * kPi;
    auto h = madelung(plane_wave_state(1.0, {0, 0}), 1.0);
    auto q = conserved_quantities(h);
    CHECK(q.mass == doctest::Approx(cell).epsilon(1e-12));
    CHECK(q.energy == doctest::Approx(0.5 * cell).epsilon(1e-12));
    CHECK(std::abs(q.momentum[0]) < 1e-12);

    const double m = 0.8, eps = 0.5;
    auto hk = conserved_quantities(madelung(plane_wave_state(m, {1, 0}), eps));
    CHECK(hk.momentum[0] == doctest::Approx(cell * m * eps).epsilon(1e-10));
    CHECK(std::abs(hk.momentum[1]) < 1e-10);
}

TEST_CASE("ms_norm reference values") {
    // constant state (rho, v) = (1, 0)
    auto h = madelung(plane_wave_state(1.0, {0, 0}), 1.0);
    CHECK(ms_norm(h, 2.0, MsVariant::RhoV) == doctest::Approx(1.0).epsilon(1e-12));

    // (rho, v) = (1, (eps, 0)) from the plane wave at (1, 0) with eps = 1:
    // v = eps k = (1, 0)
    auto h2 = madelung(plane_wave_state(1.0, {1, 0}), 1.0);
    CHECK(ms_norm(h2, 2.0, MsVariant::RhoV) == doctest::Approx(2.0).epsilon(1e-10));

    // (rho, v) = (4, (1,0)): sqrt rho = 2, Lambda = 2 (1,0) -> 2 + 2 = 4
    auto u = plane_wave_state(4.0, {1, 0});
    auto h3 = madelung(u, 1.0);
    CHECK(ms_norm(h3, 2.0, MsVariant::SqrtRhoLambda) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("quantum correction forms agree on smooth states") {
    auto u = perturbed(1.0, 0.05);
    auto h = madelung(u, 0.8, 1e-6, 64);
    CHECK(quantum_correction_mismatch(h) < 1e-8);
}

TEST_CASE("plane-wave trajectory has vanishing QHD residual") {
    const double m = 1.0, eps = 1.0;
    SimConfig cfg;
    auto traj = integrate_nls(plane_wave_state(m, {1, 0}, 8), 4e-3, 1e-3, cfg,
                              NlsEquation::Original, 4);
    REQUIRE(traj.fields.size() == 5);
    std::vector<HydroState> states;
    for (auto& f : traj.fields) states.push_back(madelung(f, eps, 1e-6, 32));
    auto res = qhd_residual(states, traj.t[1] - traj.t[0]);
    CHECK(res.continuity < 1e-10);
    CHECK(res.momentum < 1e-10);
}

TEST_CASE("QHD residual converges at second order in dt") {
    const double eps = 1.0;
    auto u0 = perturbed(1.0, 0.02);
    auto run = [&](double dt) {
        SimConfig cfg;
        auto traj = integrate_nls(u0, 4.0 * dt, dt, cfg, NlsEquation::Original, 4);
        std::vector<HydroState> states;
        for (auto& f : traj.fields) states.push_back(madelung(f, eps, 1e-6, 32));
        return qhd_residual(states, dt);
    };
    // The dominant residual is the O(dt^2) solver error of the sampled
    // trajectory (the 4th-order differencing is subordinate); halving dt
    // should shrink the continuity residual by about 4.
    auto r1 = run(4e-3), r2 = run(2e-3);
    double factor = r1.continuity / r2.continuity;
    CHECK(factor > 2.5);
    CHECK(factor < 6.0);
}

TEST_CASE("wrong eps in the residual evaluation is detected") {
    const double eps = 1.0;
    auto u0 = perturbed(1.0, 0.05);
    SimConfig cfg;
    const double dt = 2e-3;
    auto traj = integrate_nls(u0, 4.0 * dt, dt, cfg, NlsEquation::Original, 4);
    std::vector<HydroState> good, bad;
    for (auto& f : traj.fields) {
        good.push_back(madelung(f, eps, 1e-6, 32));
        auto b = madelung(f, eps, 1e-6, 32);
        b.eps = 2.0;  // deliberately wrong semiclassical parameter
        bad.push_back(b);
    }
    auto rg = qhd_residual(good, dt), rb = qhd_residual(bad, dt);
    CHECK(rb.momentum > 100.0 * rg.momentum);
}

TEST_CASE("energy drift along a simulated trajectory stays small") {
    const double eps = 1.0;
    auto u0 = perturbed(1.0, 0.05);
    SimConfig cfg;
    auto traj = integrate_nls(u0, 1.0, 1e-3, cfg, NlsEquation::Original, 10);
    std::vector<double> energies;
    for (auto& f : traj.fields)
        energies.push_back(conserved_quantities(madelung(f, eps, 1e-6, 32)).energy);
    double ref = energies.front();
    for (double e : energies) CHECK(std::abs(e - ref) / std::abs(ref) < 1e-6);
}

TEST_CASE("equivalence report on reference families") {
    // constant u = sqrt(m), m = 1: both norms equal 1
    auto rep = equivalence_report(plane_wave_state(1.0, {0, 0}), 1.0, 2.0, 1.0);
    CHECK(rep.ratio_rho_v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.within_window);

    // perturbation family: ratios bounded uniformly in a
    for (double a : {0.01, 0.05, 0.1, 0.2, 0.3}) {
        auto r = equivalence_report(perturbed(1.0, a), 1.0, 2.0, 1.0);
        CHECK(r.within_window);
        CHECK(r.ratio_rho_v > 0.1);
        CHECK(r.ratio_rho_v < 10.0);
    }

    // near-vacuum family: hypothesis genuinely fails
    FourierField2D bad(Frame::PhysicalU, 8);
    bad.set({0, 0}, Complex(1.0, 0.0));
    bad.set({1, 0}, Complex(0.98, 0.0));
    CHECK_THROWS_AS(equivalence_report(bad, 1.0, 2.0, 1.0), HypothesisViolated);

    // ... and the measured ratios blow up as min |u| -> 0
    double prev = 0.0;
    for (double c : {0.5, 0.2, 0.1}) {
        FourierField2D u(Frame::PhysicalU, 8);
        u.set({0, 0}, Complex(1.0, 0.0));
        u.set({1, 0}, Complex(1.0 - c, 0.0));
        auto r = equivalence_report(u, 1.0, 2.0, 1.0, 10.0, /*enforce=*/false);
        double inv = 1.0 / r.ratio_rho_v;  // M^s / H^s grows
        CHECK(inv > prev);
        prev = inv;
    }
}

TEST_CASE("eps scaling of the equivalence ratios") {
    // phase-modulated state: theta = A sin(k x), rho = m exactly
    const double A = 0.45;
    const int k = 6;
    const int M = 64;
    fft::Grid2 g(M);
    for (int iy = 0; iy < M; ++iy)
        for (int ix = 0; ix < M; ++ix) {
            double x = kTwoPi * ix / M;
            g.at(ix, iy) = std::polar(1.0, A * std::sin(k * x));
        }
    auto u = from_grid(g, Frame::PhysicalU, 24);

    double r1 = equivalence_report(u, 1.0, 2.0, 1.0).ratio_rho_v;
    double r4 = equivalence_report(u, 1.0, 2.0, 0.25).ratio_rho_v;
    // upper ratio scales like eps^-1 once the velocity part dominates
    CHECK(r4 / r1 > 2.0);
    CHECK(r4 / r1 < 4.5);
}
