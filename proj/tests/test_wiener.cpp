#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qhdlab/wiener.hpp"

using namespace qhdlab;

TEST_CASE("constant field maps to h(z0)") {
    FourierField2D f(Frame::PhysicalU, 4);
    f.set({0, 0}, Complex(2.5, 0.0));
    auto out = wiener_compose(f, series_exp(Complex(2.5, 0.0)));
    CHECK(out.support_size() == 1);
    CHECK(std::abs(out.at({0, 0}) - std::exp(Complex(2.5, 0.0))) < 1e-12);
}

TEST_CASE("square series reproduces the convolution square") {
    FourierField2D f(Frame::PhysicalU, 4);
    f.set({0, 0}, Complex(1.0, 0.0));
    f.set({1, 0}, Complex(0.1, 0.0));
    auto out = wiener_compose(f, series_square(Complex(1.0, 0.0)));
    CHECK(std::abs(out.at({0, 0}) - 1.0) < 1e-14);
    CHECK(std::abs(out.at({1, 0}) - 0.2) < 1e-14);
    CHECK(std::abs(out.at({2, 0}) - 0.01) < 1e-14);
    CHECK(out.support_size() == 3);
}

TEST_CASE("reciprocal composition: bound and pointwise values") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> amp(0.0, 1.0);
    const double m = 2.0;
    for (int trial = 0; trial < 20; ++trial) {
        FourierField2D f(Frame::PhysicalU, 24);
        f.set({0, 0}, Complex(std::sqrt(m), 0.0));
        for (int k = 0; k < 5; ++k) {
            std::uniform_int_distribution<int> coord(-3, 3);
            LatticePoint n{coord(rng), coord(rng)};
            if (n.is_zero()) continue;
            f.add(n, 0.002 * Complex(amp(rng), amp(rng)));
        }
        ComposeReport rep;
        auto inv = wiener_compose(f, series_reciprocal(Complex(std::sqrt(m), 0.0)), 1e-13, &rep);
        // ||h o f||_l1 <= |h(z0)| + C delta with a finite measured C
        CHECK(wiener_norm(inv) <= 1.0 / std::sqrt(m) + 10.0 * rep.dist);
        CHECK(rep.tail_bound < 1e-12);
        // pointwise oracle: (h o f)(x) ~ 1 / f(x) on the grid
        auto gf = to_grid(f, 64), gi = to_grid(inv, 64);
        for (std::size_t i = 0; i < gf.v.size(); i += 37)
            CHECK(std::abs(gi.v[i] - 1.0 / gf.v[i]) < 1e-10);
    }
}

TEST_CASE("sqrt composition squares back to the argument") {
    FourierField2D f(Frame::PhysicalU, 16);
    f.set({0, 0}, Complex(1.0, 0.0));
    f.set({1, 1}, Complex(0.008, 0.004));
    f.set({-2, 0}, Complex(0.0, -0.006));
    auto root = wiener_compose(f, series_sqrt(1.0), 1e-14);
    auto sq = field_product(root, root, Frame::PhysicalU, 16);
    CHECK(wiener_norm(sq - f) < 1e-10);
}

TEST_CASE("radius guard") {
    FourierField2D f(Frame::PhysicalU, 4);
    f.set({0, 0}, Complex(1.0, 0.0));
    f.set({1, 0}, Complex(0.6, 0.0));  // distance 0.6 >= R/2 = 0.5
    CHECK_THROWS_AS(wiener_compose(f, series_reciprocal(Complex(1.0, 0.0))), RadiusExceeded);
}

TEST_CASE("non-convergent truncation is reported") {
    // A series whose declared radius is larger than its coefficients support:
    // a_k = 1 with claimed radius 4. At distance 1.5 the terms grow without
    // bound and the tail estimate never drops below tolerance.
    PowerSeries lying;
    lying.z0 = Complex(0.0, 0.0);
    lying.radius = 4.0;
    lying.gen = [](std::size_t) { return Complex(1.0, 0.0); };

    FourierField2D f(Frame::PhysicalU, 4);
    f.set({1, 0}, Complex(1.5, 0.0));
    CHECK_THROWS_AS(wiener_compose(f, lying, 1e-13), TruncationNotConverged);
}
