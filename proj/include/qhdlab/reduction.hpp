#pragma once

// Coordinate frames around the plane wave:
//
//   psi_0 = alpha e^{i theta},  psi - psi_0 = z e^{i theta},
//   alpha = sqrt(m - sum_{n != 0} |z_n|^2)      (mass level sum |psi_n|^2 = m)
//
//   z_n = d(n) w_n + e(n) conj(w_{-n})          (diagonalizing map S)
//   w_n = d(n) z_n - e(n) conj(z_{-n})
//
//   r_n = w_n e^{+i omega(n) t}                 (rotating frame; the free
//                                                flow w_n ~ e^{-i omega t}
//                                                becomes constant)

#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/field.hpp"
#include "qhdlab/frequency.hpp"
#include "qhdlab/lambda_set.hpp"
#include "qhdlab/toy_model.hpp"

namespace qhdlab {

struct ReducedState {
    FourierField2D z;    // reduced-z frame, no zero mode
    double theta = 0.0;  // phase of the zero mode
    double m = 0.0;      // mass level

    double alpha() const {
        double s = m - mass(z);
        if (!(s > 0.0)) throw MassMismatch("||z||^2 exceeds the mass level");
        return std::sqrt(s);
    }
};

// psi -> (z, theta): z_n = psi_n e^{-i theta} for n != 0, theta = arg psi_0.
// Requires |psi_0| above the vacuum floor and sequence mass m to 1e-8.
inline ReducedState planewave_reduce(const FourierField2D& psi, double m,
                                     double vacuum_floor_factor = 1e-6) {
    Complex p0 = psi.at({0, 0});
    if (std::abs(p0) < vacuum_floor_factor * std::sqrt(m))
        throw VacuumAtZeroMode("|psi_0| = " + std::to_string(std::abs(p0)));
    double total = mass(psi);
    if (std::abs(total - m) > 1e-8 * std::max(1.0, m))
        throw MassMismatch("mass " + std::to_string(total) + " != level " + std::to_string(m));
    ReducedState st;
    st.m = m;
    st.theta = std::arg(p0);
    st.z = FourierField2D(Frame::ReducedZ, psi.cutoff(), psi.stride());
    Complex rot = std::polar(1.0, -st.theta);
    for (auto& [n, c] : psi.coeffs())
        if (!n.is_zero()) st.z.set(n, c * rot);
    return st;
}

// (z, theta) -> psi = (alpha + z) e^{i theta}; the zero mode is restored so
// that the sequence mass is exactly m.
inline FourierField2D planewave_reconstruct(const ReducedState& st) {
    FourierField2D psi(Frame::ShiftedPsi, st.z.cutoff(), st.z.stride());
    Complex rot = std::polar(1.0, st.theta);
    psi.set({0, 0}, st.alpha() * rot);
    for (auto& [n, c] : st.z.coeffs()) psi.set(n, c * rot);
    return psi;
}

// d theta / dt for co-evolution in reduced-frame runs, derived from the
// zero-mode component of the shifted equation:
//   theta' = -(2 eps^-2 / alpha) Re sum_{n1-n2+n3=0} z_{n1} conj(z_{n2}) z_{n3},
// with the convention z_0 = alpha.
inline double theta_rhs(const ReducedState& st, double eps) {
    FourierField2D zfull = st.z.with_frame(Frame::ShiftedPsi);
    double alpha = st.alpha();
    zfull.add({0, 0}, alpha);
    // Re sum_{a-b+c=0} z_a conj(z_b) z_c  =  mean over the grid of |Z|^2 Z
    int kmax = 1;
    for (auto& [n, c] : zfull.coeffs()) kmax = std::max(kmax, n.linf() / zfull.stride());
    auto g = to_grid(zfull, dealiased_grid_size(kmax));
    Complex acc = 0.0;
    for (auto& v : g.v) acc += std::norm(v) * v;
    double re_sum = (acc / double(g.v.size())).real();
    return -2.0 / (eps * eps) / alpha * re_sum;
}

enum class MapDirection { Forward, Inverse };

// Componentwise 2x2 mixing of (n, -n) pairs; Forward maps diagonal-w to
// reduced-z, Inverse undoes it.
inline FourierField2D apply_S(const FourierField2D& f, const FrequencyTable& freq,
                              MapDirection dir) {
    Frame out_frame = dir == MapDirection::Forward ? Frame::ReducedZ : Frame::DiagonalW;
    FourierField2D out(out_frame, f.cutoff(), f.stride());
    for (auto& [n, c] : f.coeffs()) {
        auto de = freq.diag(n);
        double e = dir == MapDirection::Forward ? de.e : -de.e;
        out.add(n, de.d * c);
        out.add(-n, e * std::conj(c));
    }
    return out;
}

// Quadratic Hamiltonian of the reduced system in table normalization:
// sum (|n|^2 + 2 m eps^-2) |z_n|^2 + m eps^-2 sum (z_n z_{-n} + conj);
// composed with S it must become sum omega(n) |w_n|^2.
inline double h2_reduced(const FourierField2D& z, double m, double eps) {
    double me2 = m / (eps * eps);
    double acc = 0.0;
    Complex cross = 0.0;
    for (auto& [n, c] : z.coeffs()) {
        acc += (double(n.norm2()) + 2.0 * me2) * std::norm(c);
        cross += c * z.at(-n);
    }
    return acc + 2.0 * me2 * cross.real();
}

inline double h2_diagonal(const FourierField2D& w, const FrequencyTable& freq) {
    double acc = 0.0;
    for (auto& [n, c] : w.coeffs()) acc += freq.omega(n) * std::norm(c);
    return acc;
}

// Full reduced Hamiltonian h2 + eps^-2 h4 + eps^-2 K in table normalization,
// from the expansion of mean |alpha + z|^4 with alpha^2 = m - nu:
//   h4 = S' - sum |z_n|^4 - nu^2 - nu X,   X = sum_n (z_n z_{-n} + conj),
//   K  = 2 alpha mean((z + conj z) |z|^2).
// It equals the full NLS Hamiltonian of (alpha + z) minus the plane-wave
// value; the equality is an oracle exercised by the tests.
inline double h_reduced_total(const FourierField2D& z, double m, double eps) {
    double nu = 0.0, quart = 0.0;
    Complex xsum = 0.0;
    for (auto& [n, c] : z.coeffs()) {
        nu += std::norm(c);
        quart += std::norm(c) * std::norm(c);
        xsum += c * z.at(-n);
    }
    double X = 2.0 * xsum.real();
    if (!(nu < m)) throw MassMismatch("||z||^2 exceeds the mass level");
    double alpha = std::sqrt(m - nu);

    int kmax = 1;
    for (auto& [n, c] : z.coeffs()) kmax = std::max(kmax, n.linf() / z.stride());
    auto g = to_grid(z, dealiased_grid_size(kmax));
    double s_all = 0.0, g3 = 0.0;
    for (auto& v : g.v) {
        double a2 = std::norm(v);
        s_all += a2 * a2;
        g3 += 2.0 * v.real() * a2;
    }
    s_all /= double(g.v.size());
    g3 /= double(g.v.size());
    double sprime = s_all - 2.0 * nu * nu + quart;

    double e2 = 1.0 / (eps * eps);
    return h2_reduced(z, m, eps) + e2 * (sprime - quart - nu * nu - nu * X) +
           2.0 * e2 * alpha * g3;
}

// w_n <-> r_n = w_n e^{+i omega(n) t}.
inline FourierField2D rotating_frame(const FourierField2D& f, const FrequencyTable& freq,
                                     double t, MapDirection dir) {
    Frame out_frame = dir == MapDirection::Forward ? Frame::RotatingR : Frame::DiagonalW;
    FourierField2D out(out_frame, f.cutoff(), f.stride());
    double sgn = dir == MapDirection::Forward ? +1.0 : -1.0;
    for (auto& [n, c] : f.coeffs()) out.set(n, c * std::polar(1.0, sgn * freq.omega(n) * t));
    return out;
}

// Paints generation values of a toy state onto the set: r_n = b_i, n in
// Lambda_i. The result is supported exactly on Lambda.
inline FourierField2D embed_toy(const LambdaSet& ls, const ToyState& b, int cutoff,
                                int stride = 0) {
    if (int(b.b.size()) != ls.N) throw SupportMismatch("toy state size != generation count");
    int q = stride > 0 ? stride : std::max(1, ls.q);
    FourierField2D out(Frame::RotatingR, cutoff, q);
    for (int i = 0; i < ls.N; ++i)
        for (auto& n : ls.generations[i])
            out.set(n, b.b[i]);
    return out;
}

}  // namespace qhdlab
