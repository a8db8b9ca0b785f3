#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qhdlab/nls.hpp"

using namespace qhdlab;

namespace {

FourierField2D perturbed_plane_wave(double m, double amp, int cutoff, std::uint64_t seed,
                                    int stride = 1, int nmodes = 6) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coord(-3, 3);
    std::normal_distribution<double> g(0.0, 1.0);
    FourierField2D f(Frame::ShiftedPsi, cutoff, stride);
    f.set({0, 0}, Complex(std::sqrt(m), 0.0));
    for (int k = 0; k < nmodes; ++k) {
        LatticePoint n{stride * coord(rng), stride * coord(rng)};
        if (n.is_zero()) continue;
        f.add(n, amp * Complex(g(rng), g(rng)));
    }
    return f;
}

}  // namespace

TEST_CASE("plane wave follows the exact orbit") {
    const double m = 1.7, eps = 0.8;
    FourierField2D f(Frame::ShiftedPsi, 8);
    f.set({0, 0}, Complex(std::sqrt(m), 0.0));
    NlsSim sim(f, NlsEquation::Rescaled, eps, 16);
    const double dt = 1e-3;
    for (int s = 0; s < 100; ++s) sim.step_strang(dt);
    // psi_0(t) = sqrt(m) exp(-i Omega(0) t), Omega(0) = 2 eps^-2 m
    Complex expect = std::sqrt(m) * std::polar(1.0, -2.0 * m / (eps * eps) * sim.t());
    Complex got = sim.field().at({0, 0});
    CHECK(std::abs(got - expect) < 1e-12);
}

TEST_CASE("zero field stays zero") {
    FourierField2D f(Frame::ShiftedPsi, 4);
    NlsSim sim(f, NlsEquation::Rescaled, 1.0, 8);
    for (int s = 0; s < 10; ++s) sim.step_strang(0.01);
    CHECK(sim.mass() == 0.0);
}

TEST_CASE("original equation reproduces the unscaled plane-wave phase") {
    const double m = 0.9, eps = 0.5;
    FourierField2D f(Frame::PhysicalU, 8);
    f.set({2, 1}, Complex(std::sqrt(m), 0.0));  // plane wave at mode k
    NlsSim sim(f, NlsEquation::Original, eps, 32);
    const double dt = 5e-4;
    for (int s = 0; s < 200; ++s) sim.step_strang(dt);
    // u_k(t) = sqrt(m) exp(-i (eps |k|^2 / 2 + m / eps) t)
    double rate = 0.5 * eps * 5.0 + m / eps;
    Complex expect = std::sqrt(m) * std::polar(1.0, -rate * sim.t());
    CHECK(std::abs(sim.field().at({2, 1}) - expect) < 1e-11);
}

TEST_CASE("mass conserved to machine precision over many steps") {
    auto f = perturbed_plane_wave(1.0, 0.05, 8, 5);
    NlsSim sim(f, NlsEquation::Rescaled, 1.0);
    double m0 = sim.mass();
    for (int s = 0; s < 10000; ++s) sim.step_strang(1e-3);
    CHECK(std::abs(sim.mass() - m0) / m0 < 1e-12);
}

TEST_CASE("sublattice data stay on the sublattice exactly") {
    auto f = perturbed_plane_wave(1.0, 0.05, 16, 7, /*stride=*/4);
    auto traj = integrate_nls(f, 0.5, 1e-3, SimConfig{}, NlsEquation::Rescaled, 4);
    for (auto& field : traj.fields) {
        CHECK(field.stride() == 4);
        for (auto& [n, c] : field.coeffs()) {
            CHECK(n.x % 4 == 0);
            CHECK(n.y % 4 == 0);
        }
    }
    CHECK(traj.log.mass_drift() < 1e-12);
}

TEST_CASE("energy drift shrinks ~4x when dt halves; momentum is conserved") {
    auto f = perturbed_plane_wave(1.0, 0.2, 8, 11, 1, 8);
    SimConfig cfg;
    auto run = [&](double dt) {
        auto traj = integrate_nls(f, 1.0, dt, cfg, NlsEquation::Rescaled, 2);
        return traj.log.energy_drift();
    };
    double e1 = run(2e-3), e2 = run(1e-3);
    double factor = e1 / e2;
    CHECK(factor > 3.0);
    CHECK(factor < 5.0);

    // Both split sub-flows are exactly translation invariant, so momentum
    // sits at the resolution floor once the solution is well resolved.
    auto fsmall = perturbed_plane_wave(1.0, 0.02, 8, 11, 1, 8);
    auto traj = integrate_nls(fsmall, 1.0, 1e-3, cfg, NlsEquation::Rescaled, 2,
                              NlsStepper::Strang, 1, 64);
    CHECK(traj.log.momentum_drift() < 1e-10);
}

TEST_CASE("Lawson stepper agrees with Strang on a short horizon") {
    auto f = perturbed_plane_wave(1.0, 0.05, 8, 13);
    SimConfig cfg;
    auto a = integrate_nls(f, 0.5, 1e-4, cfg, NlsEquation::Rescaled, 1, NlsStepper::Strang, 100);
    auto b = integrate_nls(f, 0.5, 5e-3, cfg, NlsEquation::Rescaled, 1, NlsStepper::Lawson, 10);
    double diff = wiener_norm(a.fields.back() - b.fields.back());
    CHECK(diff < 1e-7);
    CHECK(b.log.mass_drift() < 1e-9);
}

TEST_CASE("shift_mode") {
    auto u = perturbed_plane_wave(1.0, 0.1, 8, 19);

    SUBCASE("k = 0 is the identity at any t") {
        auto s = shift_mode(u, {0, 0}, 3.7);
        CHECK(wiener_norm(s - u) == 0.0);
    }
    SUBCASE("plane wave at mode k moves to the zero mode") {
        FourierField2D pw(Frame::PhysicalU, 8);
        pw.set({3, -2}, Complex(2.0, 0.0));
        auto s = shift_mode(pw, {3, -2}, 1.23);
        CHECK(s.support_size() == 1);
        CHECK(std::abs(std::abs(s.at({0, 0})) - 2.0) < 1e-15);
    }
    SUBCASE("t = 0 is a pure index shift preserving the l1 norm") {
        auto s = shift_mode(u, {1, 1}, 0.0);
        CHECK(s.at({-1, -1}) == u.at({0, 0}));
        CHECK(wiener_norm(s) == doctest::Approx(wiener_norm(u)).epsilon(1e-14));
    }
    SUBCASE("phases are unimodular at any t") {
        auto s = shift_mode(u, {2, 0}, 0.77);
        CHECK(wiener_norm(s) == doctest::Approx(wiener_norm(u)).epsilon(1e-13));
    }
    SUBCASE("overflowing shift throws") {
        CHECK_THROWS_AS(shift_mode(u, {12, 12}, 0.0), CutoffOverflow);
    }
}

TEST_CASE("shifted field solves the zero-mode equation") {
    // Evolve u localized at mode k, shift each sample back to psi, and check
    // psi against the equations of motion via 4th-order time differences.
    const LatticePoint k{1, 0};
    const double eps = 1.0;
    auto u0full = perturbed_plane_wave(1.0, 0.02, 6, 23);
    FourierField2D u0(Frame::PhysicalU, 8);
    for (auto& [n, c] : u0full.coeffs()) u0.set(n + k, c);

    SimConfig cfg;
    const double h = 2e-4;
    auto traj = integrate_nls(u0, 4.0 * h, h, cfg, NlsEquation::Rescaled, 4);
    REQUIRE(traj.fields.size() == 5);
    // trim the tiny spectral tail the evolution deposits near the cutoff so
    // the shifted support stays inside it
    auto trim = [](const FourierField2D& f, int keep) {
        FourierField2D out(f.frame(), f.cutoff(), f.stride());
        for (auto& [n, c] : f.coeffs())
            if (n.linf() <= keep) out.set(n, c);
        return out;
    };
    std::vector<FourierField2D> psi;
    for (std::size_t i = 0; i < 5; ++i)
        psi.push_back(shift_mode(trim(traj.fields[i], 6), k, traj.t[i]));

    auto& mid = psi[2];
    double worst = 0.0;
    for (auto& [n, c] : mid.coeffs()) {
        Complex fd = (psi[0].at(n) - 8.0 * psi[1].at(n) + 8.0 * psi[3].at(n) - psi[4].at(n)) /
                     (12.0 * h);
        Complex conv = 0.0;
        for (auto& [a, ca] : mid.coeffs())
            for (auto& [b, cb] : mid.coeffs()) conv += ca * cb * std::conj(mid.at(a + b - n));
        Complex rhs = Complex(0.0, -1.0) * (double(n.norm2()) * c + 2.0 / (eps * eps) * conv);
        worst = std::max(worst, std::abs(fd - rhs));
    }
    CHECK(worst < 1e-6);
}
