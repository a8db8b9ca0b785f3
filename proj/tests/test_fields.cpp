#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qhdlab/field.hpp"

using namespace qhdlab;

namespace {

FourierField2D random_field(std::mt19937_64& rng, int cutoff, int nmodes, int stride = 1,
                            Frame frame = Frame::PhysicalU) {
    std::uniform_int_distribution<int> coord(-cutoff / stride, cutoff / stride);
    std::normal_distribution<double> amp(0.0, 1.0);
    FourierField2D f(frame, cutoff, stride);
    for (int k = 0; k < nmodes; ++k) {
        LatticePoint n{stride * coord(rng), stride * coord(rng)};
        if (n.is_zero() && frame_excludes_zero(frame)) continue;
        f.add(n, Complex(amp(rng), amp(rng)));
    }
    return f;
}

}  // namespace

TEST_CASE("hs_norm on the defining examples") {
    FourierField2D constant(Frame::ShiftedPsi, 8);
    constant.set({0, 0}, Complex(1.0, 0.0));  // sqrt(m), m = 1
    CHECK(hs_norm(constant, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hs_norm(constant, 3.7) == doctest::Approx(1.0).epsilon(1e-14));

    FourierField2D single(Frame::ShiftedPsi, 8);
    single.set({1, 0}, Complex(1.0, 0.0));
    CHECK(hs_norm(single, 2.0) == doctest::Approx(2.0).epsilon(1e-14));

    FourierField2D f(Frame::ShiftedPsi, 8);
    f.set({3, 4}, Complex(2.0, 0.0));
    CHECK(hs_norm(f, 1.0) == doctest::Approx(2.0 * std::sqrt(26.0)).epsilon(1e-14));
}

TEST_CASE("wiener and l2 norms") {
    FourierField2D f(Frame::ShiftedPsi, 8);
    f.set({0, 0}, Complex(std::sqrt(2.0), 0.0));
    CHECK(wiener_norm(f) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    FourierField2D g(Frame::ShiftedPsi, 8);
    g.set({1, 2}, Complex(0.0, 0.3));
    g.set({-1, 5}, Complex(0.4, 0.0));
    CHECK(wiener_norm(g) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(l2_norm(g) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("hs_norm is monotone in s and matches l2 at s = 0") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_field(rng, 12, 10);
        CHECK(hs_norm(f, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-13));
        double prev = 0.0;
        for (double s : {0.0, 0.5, 1.0, 2.0, 3.5}) {
            double v = hs_norm(f, s);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("grid round trip reproduces coefficients to 1e-12 relative") {
    std::mt19937_64 rng(13);
    for (int stride : {1, 4}) {
        auto f = random_field(rng, 16, 25, stride);
        int M = dealiased_grid_size(16 / stride);
        auto g = to_grid(f, M);
        auto back = from_grid(g, f.frame(), f.cutoff(), stride);
        double num = wiener_norm(back - f), den = wiener_norm(f);
        CHECK(num / den < 1e-12);
    }
}

TEST_CASE("Plancherel: sequence l2 equals physical-space quadrature") {
    std::mt19937_64 rng(17);
    auto f = random_field(rng, 16, 30);
    auto g = to_grid(f, 64);
    double quad = 0.0;
    for (auto& v : g.v) quad += std::norm(v);
    quad = std::sqrt(quad / double(g.v.size()));
    CHECK(quad == doctest::Approx(l2_norm(f)).epsilon(1e-10));
}

TEST_CASE("Wiener algebra: ||fg||_l1 <= ||f||_l1 ||g||_l1 for 100 random pairs") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        auto f = random_field(rng, 8, 6);
        auto g = random_field(rng, 8, 6);
        auto fg = field_product(f, g, Frame::PhysicalU, 16);
        CHECK(wiener_norm(fg) <= wiener_norm(f) * wiener_norm(g) * (1.0 + 1e-15));
    }
}

TEST_CASE("field product agrees with grid multiplication") {
    std::mt19937_64 rng(23);
    auto f = random_field(rng, 6, 8);
    auto g = random_field(rng, 6, 8);
    auto conv = field_product(f, g, Frame::PhysicalU, 12);
    int M = 32;  // 12-mode product needs M > 24
    auto gf = to_grid(f, M), gg = to_grid(g, M);
    for (std::size_t i = 0; i < gf.v.size(); ++i) gf.v[i] *= gg.v[i];
    auto viagrid = from_grid(gf, Frame::PhysicalU, 12);
    CHECK(wiener_norm(viagrid - conv) < 1e-12 * std::max(1.0, wiener_norm(conv)));
}

TEST_CASE("embedding: sup norm bounded by the l1 norm") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 25; ++trial) {
        auto f = random_field(rng, 10, 12);
        CHECK(sup_norm_on_grid(f) <= wiener_norm(f) * (1.0 + 1e-13));
    }
}

TEST_CASE("lattice and frame invariants are enforced") {
    FourierField2D f(Frame::ShiftedPsi, 8, 4);
    CHECK_THROWS_AS(f.set({2, 4}, Complex(1.0, 0.0)), FieldError);    // off q Z^2
    CHECK_THROWS_AS(f.set({12, 0}, Complex(1.0, 0.0)), CutoffOverflow);
    f.set({4, -8}, Complex(1.0, 0.0));
    CHECK(f.at({4, -8}) == Complex(1.0, 0.0));

    FourierField2D z(Frame::ReducedZ, 8);
    CHECK_THROWS_AS(z.set({0, 0}, Complex(1.0, 0.0)), FieldError);
}

TEST_CASE("JSON serialization round trip") {
    std::mt19937_64 rng(31);
    auto f = random_field(rng, 12, 9, 3, Frame::DiagonalW);
    auto j = field_to_json(f);
    CHECK(j["frame"] == "diagonal-w");
    CHECK(j["stride"] == 3);
    auto back = field_from_json(j);
    CHECK(wiener_norm(back - f) == 0.0);
}
