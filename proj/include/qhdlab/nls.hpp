#pragma once

// Spectral simulation of the cubic NLS on the torus, in both time
// normalizations:
//
//   original:  i eps du/dt = -(eps^2/2) Lap u + |u|^2 u
//   rescaled:  i du/dt     = -Lap u + 2 eps^-2 |u|^2 u
//
// Fields supported on a dilated sublattice q Z^2 are represented on the
// reduced torus (indices divided by q, dispersion scaled by q^2), so
// off-sublattice coefficients do not exist in the state at all: sublattice
// invariance is structural, not approximate.
//
// Two steppers share the state: Strang splitting (both sub-flows are exact
// isometries of the grid L^2 norm, so mass is conserved to rounding) and a
// Lawson (integrating-factor) RK4 whose linear propagator absorbs the mean
// nonlinear rotation; the latter takes much larger steps on long horizons.

#include <sstream>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/config.hpp"
#include "qhdlab/field.hpp"

namespace qhdlab {

enum class NlsEquation { Original, Rescaled };

struct InvariantSample {
    double t = 0.0;
    double mass = 0.0;
    double hamiltonian = 0.0;
    double px = 0.0, py = 0.0;
};

struct InvariantLog {
    std::vector<InvariantSample> samples;

    void push(const InvariantSample& s) {
        if (!samples.empty() && !(s.t > samples.back().t))
            throw StepFailure("invariant log timestamps must increase");
        samples.push_back(s);
    }
    double max_rel_drift(double InvariantSample::* field) const {
        if (samples.empty()) return 0.0;
        double ref = samples.front().*field;
        double scale = std::max(std::abs(ref), 1e-30);
        double worst = 0.0;
        for (auto& s : samples) worst = std::max(worst, std::abs(s.*field - ref) / scale);
        return worst;
    }
    double mass_drift() const { return max_rel_drift(&InvariantSample::mass); }
    double energy_drift() const { return max_rel_drift(&InvariantSample::hamiltonian); }
    double momentum_drift() const {
        double a = max_rel_drift(&InvariantSample::px), b = max_rel_drift(&InvariantSample::py);
        return std::max(a, b);
    }
    std::string to_csv() const {
        std::ostringstream os;
        os << "t,mass,hamiltonian,px,py\n";
        char buf[160];
        for (auto& s : samples) {
            std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.mass,
                          s.hamiltonian, s.px, s.py);
            os << buf;
        }
        return os.str();
    }
};

class NlsSim {
  public:
    NlsSim(const FourierField2D& f0, NlsEquation eq, double eps, int grid_n = 0)
        : eq_(eq),
          eps_(eps),
          stride_(f0.stride()),
          cutoff_(f0.cutoff()),
          frame_(f0.frame()) {
        int kmax = 1;
        for (auto& [n, c] : f0.coeffs()) kmax = std::max(kmax, n.linf() / stride_);
        grid_n_ = grid_n > 0 ? grid_n : dealiased_grid_size(kmax);
        spec_ = fft::Grid2(grid_n_);
        for (auto& [n, c] : f0.coeffs())
            spec_.at(fft::bin_of(n.x / stride_, grid_n_), fft::bin_of(n.y / stride_, grid_n_)) = c;
        mass_ref_ = mass();
    }

    double t() const { return t_; }
    int grid_size() const { return grid_n_; }
    double eps() const { return eps_; }

    double mass() const {
        double acc = 0.0;
        for (auto& v : spec_.v) acc += std::norm(v);
        return acc;
    }

    // Conserved energy of the equation in table normalization.
    double hamiltonian() const {
        double kin = 0.0;
        for (int by = 0; by < grid_n_; ++by)
            for (int bx = 0; bx < grid_n_; ++bx)
                kin += n2_true(bx, by) * std::norm(spec_.at(bx, by));
        fft::Grid2 phys = spec_;
        fft::transform2(phys, +1);
        double quart = 0.0;
        for (auto& v : phys.v) quart += std::norm(v) * std::norm(v);
        quart /= double(phys.v.size());
        if (eq_ == NlsEquation::Rescaled) return kin + quart / (eps_ * eps_);
        return 0.5 * eps_ * kin + 0.5 * quart / eps_;
    }

    std::array<double, 2> momentum() const {
        double px = 0.0, py = 0.0;
        for (int by = 0; by < grid_n_; ++by)
            for (int bx = 0; bx < grid_n_; ++bx) {
                double w = std::norm(spec_.at(bx, by));
                px += double(stride_ * fft::freq_of(bx, grid_n_)) * w;
                py += double(stride_ * fft::freq_of(by, grid_n_)) * w;
            }
        return {px, py};
    }

    InvariantSample invariants() const {
        auto p = momentum();
        return {t_, mass(), hamiltonian(), p[0], p[1]};
    }

    // One Strang step: half linear phase, full pointwise nonlinear phase,
    // half linear phase.
    void step_strang(double dt) {
        apply_linear(0.5 * dt);
        fft::transform2(spec_, +1);
        const double rate = nonlinear_rate();
        for (auto& v : spec_.v) v *= std::polar(1.0, -rate * std::norm(v) * dt);
        fft::transform2(spec_, -1);
        const double scale = 1.0 / (double(grid_n_) * double(grid_n_));
        for (auto& v : spec_.v) v *= scale;
        apply_linear(0.5 * dt);
        t_ += dt;
    }

    // One Lawson-RK4 step; the linear propagator includes the mean phase
    // rotation, so the remaining nonlinearity is small near a plane wave.
    void step_lawson(double dt) {
        const std::size_t nv = spec_.v.size();
        auto N = [&](const fft::Grid2& s, fft::Grid2& out) {
            out = s;
            fft::transform2(out, +1);
            const double rate = nonlinear_rate();
            const Complex mi(0.0, -1.0);
            for (auto& v : out.v) v = mi * rate * (std::norm(v) - mass_ref_) * v;
            fft::transform2(out, -1);
            const double scale = 1.0 / double(nv);
            for (auto& v : out.v) v *= scale;
        };
        fft::Grid2 k1(grid_n_), k2(grid_n_), k3(grid_n_), k4(grid_n_), tmp(grid_n_);

        N(spec_, k1);
        tmp = spec_;
        axpy(tmp, 0.5 * dt, k1);
        phase(tmp, 0.5 * dt);
        N(tmp, k2);
        tmp = spec_;
        phase(tmp, 0.5 * dt);
        axpy(tmp, 0.5 * dt, k2);
        N(tmp, k3);
        tmp = spec_;
        phase(tmp, dt);
        phase(k3, 0.5 * dt);
        axpy(tmp, dt, k3);
        N(tmp, k4);

        phase(spec_, dt);
        phase(k1, dt);
        phase(k2, 0.5 * dt);
        // k3 already carries the half-step phase
        for (std::size_t i = 0; i < nv; ++i)
            spec_.v[i] += (dt / 6.0) * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
        t_ += dt;
    }

    FourierField2D field(double* truncated_l1 = nullptr) const {
        fft::Grid2 phys = spec_;
        fft::transform2(phys, +1);
        return from_grid(phys, frame_, cutoff_, stride_, truncated_l1);
    }

    fft::Grid2 physical() const {
        fft::Grid2 phys = spec_;
        fft::transform2(phys, +1);
        return phys;
    }

  private:
    double n2_true(int bx, int by) const {
        double fx = stride_ * fft::freq_of(bx, grid_n_);
        double fy = stride_ * fft::freq_of(by, grid_n_);
        return fx * fx + fy * fy;
    }
    double nonlinear_rate() const {
        return eq_ == NlsEquation::Rescaled ? 2.0 / (eps_ * eps_) : 1.0 / eps_;
    }
    const std::vector<double>& linear_rates() const {
        if (rates_.empty()) {
            rates_.resize(spec_.v.size());
            for (int by = 0; by < grid_n_; ++by)
                for (int bx = 0; bx < grid_n_; ++bx) {
                    double n2 = n2_true(bx, by);
                    rates_[std::size_t(by) * grid_n_ + bx] =
                        eq_ == NlsEquation::Rescaled ? n2 : 0.5 * eps_ * n2;
                }
        }
        return rates_;
    }
    // Cached exp(-i (rate + shift) tau) tables; a run uses only a couple of
    // distinct (tau, shift) pairs, so a tiny table suffices.
    const std::vector<Complex>& phase_factors(double tau, double shift) const {
        for (auto& e : phase_cache_)
            if (e.tau == tau && e.shift == shift) return e.f;
        auto& rates = linear_rates();
        if (phase_cache_.size() > 6) phase_cache_.erase(phase_cache_.begin());
        phase_cache_.push_back({tau, shift, {}});
        auto& f = phase_cache_.back().f;
        f.resize(rates.size());
        for (std::size_t i = 0; i < rates.size(); ++i)
            f[i] = std::polar(1.0, -(rates[i] + shift) * tau);
        return f;
    }
    void apply_linear(double dt) {
        auto& f = phase_factors(dt, 0.0);
        for (std::size_t i = 0; i < spec_.v.size(); ++i) spec_.v[i] *= f[i];
    }
    // exp(-i (L + mean shift) tau) on a spectral array
    void phase(fft::Grid2& g, double tau) const {
        auto& f = phase_factors(tau, nonlinear_rate() * mass_ref_);
        for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] *= f[i];
    }
    static void axpy(fft::Grid2& y, double a, const fft::Grid2& x) {
        for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
    }

    struct PhaseEntry {
        double tau, shift;
        std::vector<Complex> f;
    };

    NlsEquation eq_;
    double eps_;
    int stride_, cutoff_, grid_n_ = 0;
    Frame frame_;
    fft::Grid2 spec_;
    double t_ = 0.0;
    double mass_ref_ = 0.0;
    mutable std::vector<double> rates_;
    mutable std::vector<PhaseEntry> phase_cache_;
};

struct NlsTrajectory {
    std::vector<double> t;
    std::vector<FourierField2D> fields;
    InvariantLog log;
};

enum class NlsStepper { Strang, Lawson };

// Fixed-step integration with `nsamples` uniformly spaced field snapshots
// (endpoints included) and invariant logging every `log_every` steps.
inline NlsTrajectory integrate_nls(const FourierField2D& f0, double T, double dt,
                                   const SimConfig& cfg,
                                   NlsEquation eq = NlsEquation::Rescaled,
                                   int nsamples = 10, NlsStepper method = NlsStepper::Strang,
                                   int log_every = 1, int grid_n = 0) {
    if (!(T > 0.0) || !(dt > 0.0)) throw StepFailure("integrate_nls needs T, dt > 0");
    NlsSim sim(f0, eq, cfg.eps, grid_n);
    const long steps = std::lround(T / dt);
    if (steps < 1) throw StepFailure("T/dt < 1");
    NlsTrajectory traj;
    traj.t.push_back(0.0);
    traj.fields.push_back(sim.field());
    traj.log.push(sim.invariants());
    long next_sample = 1;
    for (long s = 1; s <= steps; ++s) {
        if (method == NlsStepper::Strang)
            sim.step_strang(dt);
        else
            sim.step_lawson(dt);
        if (s % std::max(1, log_every) == 0 || s == steps) traj.log.push(sim.invariants());
        if (s * nsamples >= next_sample * steps) {
            traj.t.push_back(sim.t());
            traj.fields.push_back(sim.field());
            ++next_sample;
        }
    }
    return traj;
}

// psi_n = u_{n+k} exp(i (|k|^2 + 2 k.n) t): shifts a solution localized at
// mode k to one localized at zero.
inline FourierField2D shift_mode(const FourierField2D& u, LatticePoint k, double t) {
    int stride = (k.x % u.stride() == 0 && k.y % u.stride() == 0) ? u.stride() : 1;
    FourierField2D out(u.frame(), u.cutoff(), stride);
    for (auto& [m, c] : u.coeffs()) {
        LatticePoint n = m - k;
        if (n.linf() > u.cutoff())
            throw CutoffOverflow("shifted mode " + n.str() + " exceeds cutoff");
        double phase = (double(k.norm2()) + 2.0 * double(k.dot(n))) * t;
        out.set(n, c * std::polar(1.0, phase));
    }
    return out;
}

}  // namespace qhdlab
