#pragma once

// Madelung transform and quantum-Euler diagnostics. The hydrodynamic state
// lives on the physical grid of the field's (reduced) torus cell:
//
//   rho = |u|^2,  v = eps Im(conj(u) grad u) / rho,
//   Lambda = eps Im(conj(phi) grad u),  phi = u/|u|,
//
// so no phase unwrapping is ever needed. Space derivatives are spectral;
// time derivatives of trajectory samples use 4th-order centered differences.

#include <array>
#include <sstream>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/field.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

// Real scalar field on an M x M grid with spectral differentiation.
struct RealGrid {
    int n = 0;
    int stride = 1;  // wavenumbers are stride * fft bin frequency
    std::vector<double> v;

    RealGrid() = default;
    RealGrid(int size, int str) : n(size), stride(str), v(std::size_t(size) * size, 0.0) {}
    double& at(int ix, int iy) { return v[std::size_t(iy) * n + ix]; }
    double at(int ix, int iy) const { return v[std::size_t(iy) * n + ix]; }
    double mean() const {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / double(v.size());
    }
};

namespace detail_hydro {

inline fft::Grid2 to_complex(const RealGrid& g) {
    fft::Grid2 out(g.n);
    for (std::size_t i = 0; i < g.v.size(); ++i) out.v[i] = Complex(g.v[i], 0.0);
    return out;
}

// d/dx_axis via the spectral multiplier i * n_axis.
inline RealGrid derivative(const RealGrid& g, int axis) {
    fft::Grid2 spec = to_complex(g);
    fft::transform2(spec, -1);
    const double scale = 1.0 / double(spec.v.size());
    for (int by = 0; by < g.n; ++by)
        for (int bx = 0; bx < g.n; ++bx) {
            double f = g.stride * fft::freq_of(axis == 0 ? bx : by, g.n);
            spec.at(bx, by) *= Complex(0.0, f) * scale;
        }
    fft::transform2(spec, +1);
    RealGrid out(g.n, g.stride);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = spec.v[i].real();
    return out;
}

// H^s norm of a real grid field in the sequence convention.
inline double hs_norm_grid(const RealGrid& g, double s) {
    fft::Grid2 spec = to_complex(g);
    fft::transform2(spec, -1);
    const double scale = 1.0 / double(spec.v.size());
    double acc = 0.0;
    for (int by = 0; by < g.n; ++by)
        for (int bx = 0; bx < g.n; ++bx) {
            double fx = g.stride * fft::freq_of(bx, g.n);
            double fy = g.stride * fft::freq_of(by, g.n);
            acc += std::norm(spec.at(bx, by) * scale) * std::pow(1.0 + fx * fx + fy * fy, s);
        }
    return std::sqrt(acc);
}

}  // namespace detail_hydro

struct HydroState {
    int n = 0;
    int stride = 1;
    double eps = 1.0;
    RealGrid rho, sqrt_rho;
    RealGrid vx, vy;  // velocity
    RealGrid Lx, Ly;  // current Lambda = sqrt(rho) v
    double max_curl = 0.0;

    double min_rho() const {
        double m = std::numeric_limits<double>::infinity();
        for (double x : rho.v) m = std::min(m, x);
        return m;
    }
};

// Madelung transform of a vacuum-free field. The vacuum floor is relative
// to the root mean density.
inline HydroState madelung(const FourierField2D& u, double eps, double vacuum_floor = 1e-6,
                           int grid_n = 0) {
    int kmax = 1;
    for (auto& [n, c] : u.coeffs()) kmax = std::max(kmax, n.linf() / u.stride());
    const int M = grid_n > 0 ? grid_n : dealiased_grid_size(kmax);
    fft::Grid2 ug = to_grid(u, M);

    const double ref = std::sqrt(mass(u));
    double minabs = std::numeric_limits<double>::infinity();
    for (auto& v : ug.v) minabs = std::min(minabs, std::abs(v));
    if (minabs < vacuum_floor * ref)
        throw VacuumDetected("min |u| = " + std::to_string(minabs) + " below floor " +
                             std::to_string(vacuum_floor * ref));

    // spectral gradients of u
    fft::Grid2 spec = ug;
    fft::transform2(spec, -1);
    const double scale = 1.0 / double(spec.v.size());
    fft::Grid2 dux(M), duy(M);
    for (int by = 0; by < M; ++by)
        for (int bx = 0; bx < M; ++bx) {
            double fx = u.stride() * fft::freq_of(bx, M);
            double fy = u.stride() * fft::freq_of(by, M);
            Complex c = spec.at(bx, by) * scale;
            dux.at(bx, by) = Complex(0.0, fx) * c;
            duy.at(bx, by) = Complex(0.0, fy) * c;
        }
    fft::transform2(dux, +1);
    fft::transform2(duy, +1);

    HydroState h;
    h.n = M;
    h.stride = u.stride();
    h.eps = eps;
    for (RealGrid* g : {&h.rho, &h.sqrt_rho, &h.vx, &h.vy, &h.Lx, &h.Ly}) *g = RealGrid(M, u.stride());
    for (std::size_t i = 0; i < ug.v.size(); ++i) {
        Complex uu = ug.v[i];
        double r = std::norm(uu);
        double sr = std::sqrt(r);
        Complex phi_bar = std::conj(uu) / sr;  // conj(u)/|u|
        h.rho.v[i] = r;
        h.sqrt_rho.v[i] = sr;
        h.Lx.v[i] = eps * (phi_bar * dux.v[i]).imag();
        h.Ly.v[i] = eps * (phi_bar * duy.v[i]).imag();
        h.vx.v[i] = eps * (std::conj(uu) * dux.v[i]).imag() / r;
        h.vy.v[i] = eps * (std::conj(uu) * duy.v[i]).imag() / r;
    }
    // irrotationality diagnostic
    RealGrid curl1 = detail_hydro::derivative(h.vy, 0), curl2 = detail_hydro::derivative(h.vx, 1);
    for (std::size_t i = 0; i < curl1.v.size(); ++i)
        h.max_curl = std::max(h.max_curl, std::abs(curl1.v[i] - curl2.v[i]));
    return h;
}

enum class MsVariant { RhoV, SqrtRhoLambda };

// ||rho||_{H^s} + ||v||_{H^{s-1}} (or the (sqrt rho, Lambda) variant), all
// norms spectral in the sequence convention.
inline double ms_norm(const HydroState& h, double s, MsVariant variant = MsVariant::RhoV) {
    using detail_hydro::hs_norm_grid;
    if (variant == MsVariant::RhoV) {
        double a = hs_norm_grid(h.rho, s);
        double bx = hs_norm_grid(h.vx, s - 1.0), by = hs_norm_grid(h.vy, s - 1.0);
        return a + std::sqrt(bx * bx + by * by);
    }
    double a = hs_norm_grid(h.sqrt_rho, s);
    double bx = hs_norm_grid(h.Lx, s - 1.0), by = hs_norm_grid(h.Ly, s - 1.0);
    return a + std::sqrt(bx * bx + by * by);
}

struct ConservedQuantities {
    double mass = 0.0;      // int rho dx
    double energy = 0.0;    // (1/2) int eps |grad sqrt(rho)|^2 + eps^-1 rho |v|^2 + eps^-1 rho^2
    std::array<double, 2> momentum{0.0, 0.0};  // int rho v dx
};

inline ConservedQuantities conserved_quantities(const HydroState& h) {
    using detail_hydro::derivative;
    const double cell = 4.0 * kPi * kPi;  // (2 pi)^2, quadrature over the torus
    ConservedQuantities out;
    out.mass = cell * h.rho.mean();
    RealGrid sx = derivative(h.sqrt_rho, 0), sy = derivative(h.sqrt_rho, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < h.rho.v.size(); ++i) {
        double grad2 = sx.v[i] * sx.v[i] + sy.v[i] * sy.v[i];
        double v2 = h.vx.v[i] * h.vx.v[i] + h.vy.v[i] * h.vy.v[i];
        acc += h.eps * grad2 + (h.rho.v[i] * v2 + h.rho.v[i] * h.rho.v[i]) / h.eps;
    }
    out.energy = 0.5 * cell * acc / double(h.rho.v.size());
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < h.rho.v.size(); ++i) {
        px += h.rho.v[i] * h.vx.v[i];
        py += h.rho.v[i] * h.vy.v[i];
    }
    out.momentum = {cell * px / double(h.rho.v.size()), cell * py / double(h.rho.v.size())};
    return out;
}

inline ConservedQuantities conserved_quantities(const FourierField2D& u, double eps) {
    return conserved_quantities(madelung(u, eps));
}

// --- QHD residuals ---------------------------------------------------------

struct QhdResidual {
    double continuity = 0.0;  // L^2 norm of  d_t rho + div(rho v)
    double momentum = 0.0;    // L^2 norm of the momentum equation residual
};

// The two forms of the quantum correction, evaluated on a state:
// direct (eps^2/2) rho grad(Lap sqrt(rho)/sqrt(rho)) and the divergence form
// eps^2 div(1/4 Hess(rho) - grad sqrt(rho) x grad sqrt(rho)). Returns the
// L^2 mismatch (per component, root-sum-squared).
inline double quantum_correction_mismatch(const HydroState& h) {
    using detail_hydro::derivative;
    const double e2 = h.eps * h.eps;
    RealGrid sx = derivative(h.sqrt_rho, 0), sy = derivative(h.sqrt_rho, 1);
    RealGrid sxx = derivative(sx, 0), syy = derivative(sy, 1);
    // direct form
    RealGrid ratio(h.n, h.stride);
    for (std::size_t i = 0; i < ratio.v.size(); ++i)
        ratio.v[i] = (sxx.v[i] + syy.v[i]) / h.sqrt_rho.v[i];
    RealGrid rx = derivative(ratio, 0), ry = derivative(ratio, 1);
    // divergence form
    RealGrid rhox = derivative(h.rho, 0), rhoy = derivative(h.rho, 1);
    RealGrid rxx = derivative(rhox, 0), rxy = derivative(rhox, 1), ryy = derivative(rhoy, 1);
    auto tensor = [&](int i, int j) {
        RealGrid out(h.n, h.stride);
        const RealGrid& hij = (i == 0 && j == 0) ? rxx : (i == 1 && j == 1) ? ryy : rxy;
        const RealGrid& si = i == 0 ? sx : sy;
        const RealGrid& sj = j == 0 ? sx : sy;
        for (std::size_t k = 0; k < out.v.size(); ++k)
            out.v[k] = 0.25 * hij.v[k] - si.v[k] * sj.v[k];
        return out;
    };
    double acc = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        RealGrid t0 = tensor(comp, 0), t1 = tensor(comp, 1);
        RealGrid d0 = derivative(t0, 0), d1 = derivative(t1, 1);
        const RealGrid& direct = comp == 0 ? rx : ry;
        for (std::size_t k = 0; k < d0.v.size(); ++k) {
            double div_form = e2 * (d0.v[k] + d1.v[k]);
            double direct_form = 0.5 * e2 * h.rho.v[k] * direct.v[k];
            double diff = div_form - direct_form;
            acc += diff * diff;
        }
    }
    return std::sqrt(acc / double(h.rho.v.size()));
}

// Residuals of the QHD system on five consecutive, equally spaced states.
inline QhdResidual qhd_residual(const std::vector<HydroState>& states, double dt_samples) {
    using detail_hydro::derivative;
    if (states.size() != 5) throw StepFailure("qhd_residual needs exactly 5 samples");
    const HydroState& h = states[2];
    const double e2 = h.eps * h.eps;
    const std::size_t nv = h.rho.v.size();

    auto dt4 = [&](auto&& get) {
        RealGrid out(h.n, h.stride);
        for (std::size_t i = 0; i < nv; ++i)
            out.v[i] = (get(states[0], i) - 8.0 * get(states[1], i) + 8.0 * get(states[3], i) -
                        get(states[4], i)) /
                       (12.0 * dt_samples);
        return out;
    };

    RealGrid drho = dt4([](const HydroState& s, std::size_t i) { return s.rho.v[i]; });
    RealGrid dmx = dt4([](const HydroState& s, std::size_t i) { return s.rho.v[i] * s.vx.v[i]; });
    RealGrid dmy = dt4([](const HydroState& s, std::size_t i) { return s.rho.v[i] * s.vy.v[i]; });

    auto product = [&](const RealGrid& a, const RealGrid& b) {
        RealGrid out(h.n, h.stride);
        for (std::size_t i = 0; i < nv; ++i) out.v[i] = a.v[i] * b.v[i];
        return out;
    };

    RealGrid mx = product(h.rho, h.vx), my = product(h.rho, h.vy);
    RealGrid cont = derivative(mx, 0);
    {
        RealGrid tmp = derivative(my, 1);
        for (std::size_t i = 0; i < nv; ++i) cont.v[i] += tmp.v[i] + drho.v[i];
    }
    QhdResidual res;
    double acc = 0.0;
    for (double x : cont.v) acc += x * x;
    res.continuity = std::sqrt(acc / double(nv));

    // momentum equation
    RealGrid sx = derivative(h.sqrt_rho, 0), sy = derivative(h.sqrt_rho, 1);
    RealGrid rhox = derivative(h.rho, 0), rhoy = derivative(h.rho, 1);
    RealGrid rxx = derivative(rhox, 0), rxy = derivative(rhox, 1), ryy = derivative(rhoy, 1);
    acc = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        const RealGrid& vi = comp == 0 ? h.vx : h.vy;
        RealGrid flux0 = product(product(h.rho, vi), h.vx);
        RealGrid flux1 = product(product(h.rho, vi), h.vy);
        RealGrid d0 = derivative(flux0, 0), d1 = derivative(flux1, 1);
        // pressure gradient: grad(rho^2/2) = rho grad rho
        const RealGrid& rc = comp == 0 ? rhox : rhoy;
        // quantum tensor row
        const RealGrid& hi0 = comp == 0 ? rxx : rxy;
        const RealGrid& hi1 = comp == 0 ? rxy : ryy;
        const RealGrid& si = comp == 0 ? sx : sy;
        RealGrid q0(h.n, h.stride), q1(h.n, h.stride);
        for (std::size_t i = 0; i < nv; ++i) {
            q0.v[i] = 0.25 * hi0.v[i] - si.v[i] * sx.v[i];
            q1.v[i] = 0.25 * hi1.v[i] - si.v[i] * sy.v[i];
        }
        RealGrid dq0 = derivative(q0, 0), dq1 = derivative(q1, 1);
        const RealGrid& dm = comp == 0 ? dmx : dmy;
        for (std::size_t i = 0; i < nv; ++i) {
            double r = dm.v[i] + d0.v[i] + d1.v[i] + h.rho.v[i] * rc.v[i] -
                       e2 * (dq0.v[i] + dq1.v[i]);
            acc += r * r;
        }
    }
    res.momentum = std::sqrt(acc / double(nv));
    return res;
}

// --- norm equivalence -------------------------------------------------------

struct EquivalenceReport {
    double s = 0.0, m = 0.0, eps = 0.0;
    double hypothesis_linf = 0.0;   // min_phi ||u - sqrt(m) e^{i phi}||_inf
    double hypothesis_slack = 0.0;  // sqrt(m)/2 - hypothesis_linf
    double wiener_closeness = 0.0;  // min_phi ||u - sqrt(m) e^{i phi}||_l1 <||u||_H1>
    double hs = 0.0;
    double ms_rho_v = 0.0, ms_sqrt_lambda = 0.0;
    double ratio_rho_v = 0.0;        // ||u||_Hs / ||(rho, v)||_Ms
    double ratio_sqrt_lambda = 0.0;  // ||u||_Hs / ||(sqrt rho, Lambda)||_Ms
    bool within_window = false;
};

inline nlohmann::json equivalence_to_json(const EquivalenceReport& r) {
    return {{"s", r.s},
            {"m", r.m},
            {"eps", r.eps},
            {"hypothesis_linf", r.hypothesis_linf},
            {"hypothesis_slack", r.hypothesis_slack},
            {"wiener_closeness", r.wiener_closeness},
            {"hs", r.hs},
            {"ms_rho_v", r.ms_rho_v},
            {"ms_sqrt_lambda", r.ms_sqrt_lambda},
            {"ratio_rho_v", r.ratio_rho_v},
            {"ratio_sqrt_lambda", r.ratio_sqrt_lambda},
            {"within_window", r.within_window}};
}

// Measures both H^s / M^s ratios after checking the closeness hypothesis
// min_phi ||u - sqrt(m) e^{i phi}||_inf <= sqrt(m)/2 (the phase is optimized
// by scan plus golden refinement).
inline EquivalenceReport equivalence_report(const FourierField2D& u, double m, double s,
                                            double eps, double window_M = 10.0,
                                            bool enforce_hypothesis = true) {
    EquivalenceReport rep;
    rep.s = s;
    rep.m = m;
    rep.eps = eps;

    int kmax = 1;
    for (auto& [n, c] : u.coeffs()) kmax = std::max(kmax, n.linf() / u.stride());
    const int M = dealiased_grid_size(kmax);
    fft::Grid2 ug = to_grid(u, M);
    auto linf_for = [&](double phi) {
        Complex ref = std::polar(std::sqrt(m), phi);
        double worst = 0.0;
        for (auto& v : ug.v) worst = std::max(worst, std::abs(v - ref));
        return worst;
    };
    double best_phi = 0.0, best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
        double phi = kTwoPi * k / 64.0;
        double val = linf_for(phi);
        if (val < best) {
            best = val;
            best_phi = phi;
        }
    }
    {
        const double gr = 0.61803398874989484;
        double a = best_phi - kTwoPi / 64.0, b = best_phi + kTwoPi / 64.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = linf_for(x1), f2 = linf_for(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 > f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = linf_for(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = linf_for(x1);
            }
        }
        best = std::min(best, std::min(f1, f2));
    }
    rep.hypothesis_linf = best;
    rep.hypothesis_slack = std::sqrt(m) / 2.0 - best;
    if (enforce_hypothesis && rep.hypothesis_slack < 0.0)
        throw HypothesisViolated("min_phi ||u - sqrt(m) e^{i phi}||_inf = " + std::to_string(best) +
                                 " > sqrt(m)/2; slack " + std::to_string(rep.hypothesis_slack));

    // The l1 closeness is exactly minimized at phi = arg(u_0).
    double l1close = 0.0;
    for (auto& [n, c] : u.coeffs())
        if (!n.is_zero()) l1close += std::abs(c);
    l1close += std::abs(std::abs(u.at({0, 0})) - std::sqrt(m));
    double h1 = hs_norm(u, 1.0);
    rep.wiener_closeness = l1close * std::sqrt(1.0 + h1 * h1);

    rep.hs = hs_norm(u, s);
    auto h = madelung(u, eps);
    rep.ms_rho_v = ms_norm(h, s, MsVariant::RhoV);
    rep.ms_sqrt_lambda = ms_norm(h, s, MsVariant::SqrtRhoLambda);
    rep.ratio_rho_v = rep.hs / rep.ms_rho_v;
    rep.ratio_sqrt_lambda = rep.hs / rep.ms_sqrt_lambda;
    double lo = 1.0 / window_M, hi = window_M / eps;
    rep.within_window = rep.ratio_rho_v >= lo && rep.ratio_rho_v <= hi &&
                        rep.ratio_sqrt_lambda >= lo && rep.ratio_sqrt_lambda <= hi;
    return rep;
}

// --- serialization -----------------------------------------------------------

inline std::string hydro_to_csv(const HydroState& h) {
    std::ostringstream os;
    os << "ix,iy,rho,vx,vy,Lx,Ly\n";
    char buf[160];
    for (int iy = 0; iy < h.n; ++iy)
        for (int ix = 0; ix < h.n; ++ix) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", ix, iy,
                          h.rho.at(ix, iy), h.vx.at(ix, iy), h.vy.at(ix, iy), h.Lx.at(ix, iy),
                          h.Ly.at(ix, iy));
            os << buf;
        }
    return os.str();
}

}  // namespace qhdlab
