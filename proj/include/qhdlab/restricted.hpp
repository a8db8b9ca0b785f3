#pragma once

// Dynamics of the resonant effective Hamiltonian restricted to the modes of
// the set (and optionally a halo of outside modes), integrated directly from
// the monomial table. This is the finite system whose intragenerational
// collapse is the toy model; the derived time reparametrization in table
// normalization is tau = 2 eps^-2 t, and the collapsed amplitudes match the
// conjugate of the raw toy flow with the exact mass-phase coefficient
// mass_phase_coeff_exact(G).

#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/hamiltonian.hpp"
#include "qhdlab/normal_form.hpp"
#include "qhdlab/ode.hpp"
#include "qhdlab/toy_model.hpp"

namespace qhdlab {

inline double toy_time_scale(double eps) { return 2.0 / (eps * eps); }

struct RestrictedTrajectory {
    std::vector<double> t;                   // physical time
    std::vector<std::vector<Complex>> w;     // per-mode values, space order
    std::vector<LatticePoint> modes;
};

// Functional part of K_1 beyond the normal form: the prefactor
// [f(||w||^2) - f(||P_Lambda w||^2)] with f(x) = sqrt(m - x) multiplies the
// A_{3,<=1} cubic table. Its vector field vanishes identically on U_Lambda.
struct K1OverPart {
    const CompiledHamiltonian* g3 = nullptr;  // eps^-2 G^(3,<=1) compiled
    std::vector<bool> in_lambda;              // per space index
    double m = 1.0;

    void add_flow(const std::vector<Complex>& w, std::vector<Complex>& out) const {
        double nl = 0.0, nlam = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double a = std::norm(w[i]);
            nl += a;
            if (in_lambda[i]) nlam += a;
        }
        auto f = [&](double x) { return std::sqrt(std::max(m - x, 1e-300)); };
        auto fp = [&](double x) { return -0.5 / std::sqrt(std::max(m - x, 1e-300)); };
        double pref = f(nl) - f(nlam);
        if (pref != 0.0) {
            std::vector<Complex> xg(w.size(), Complex(0.0, 0.0));
            g3->add_flow(w, xg);
            for (std::size_t i = 0; i < w.size(); ++i) out[i] += pref * xg[i];
        }
        // gradient of the prefactor: -i G(w) [f'(nl) - 1_Lambda f'(nlam)] w_n
        Complex gv = g3->evaluate(w);
        const Complex mi(0.0, -1.0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            double grad = fp(nl) - (in_lambda[i] ? fp(nlam) : 0.0);
            if (grad != 0.0) out[i] += mi * gv * grad * w[i];
        }
    }
};

// Integrates the table dynamics i dw/dt = dh/dwbar on the given mode space.
// `extra` (optional) adds the functional K1-over-part.
inline RestrictedTrajectory integrate_restricted(const MonomialHamiltonian& table,
                                                 const ModeSpace& space,
                                                 const std::vector<Complex>& w0, double T,
                                                 double tol, int nsamples = 50,
                                                 const K1OverPart* extra = nullptr) {
    CompiledHamiltonian ham(table, space);
    OdeRhs rhs = [&](double, const OdeState& y, OdeState& dy) {
        std::fill(dy.begin(), dy.end(), Complex(0.0, 0.0));
        ham.add_flow(y, dy);
        if (extra) extra->add_flow(y, dy);
    };
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    RestrictedTrajectory traj;
    traj.modes = space.modes;
    OdeState y = w0;
    traj.t.push_back(0.0);
    traj.w.push_back(y);
    for (int k = 1; k <= nsamples; ++k) {
        double t0 = T * double(k - 1) / nsamples, t1 = T * double(k) / nsamples;
        ode_integrate(rhs, y, t0, t1, opt);
        traj.t.push_back(t1);
        traj.w.push_back(y);
    }
    return traj;
}

// Convenience: evolve U_Lambda data given per-generation amplitudes.
inline RestrictedTrajectory integrate_on_lambda(const LambdaSet& ls, double eps,
                                                const std::vector<Complex>& b0, double T,
                                                double tol, int nsamples = 50) {
    auto table = build_N0_table(ls, eps);
    ModeSpace space(ls.members());
    std::vector<Complex> w0(space.dim());
    int idx = 0;
    for (int g = 0; g < ls.N; ++g)
        for (std::size_t j = 0; j < ls.generations[g].size(); ++j) w0[idx++] = b0[g];
    return integrate_restricted(table, space, w0, T, tol, nsamples);
}

// Largest within-generation deviation of a restricted state.
inline double intragenerational_spread(const LambdaSet& ls, const ModeSpace& space,
                                       const std::vector<Complex>& w) {
    double worst = 0.0;
    for (int g = 0; g < ls.N; ++g) {
        const auto& gen = ls.generations[g];
        Complex ref = w[space.at(gen[0])];
        for (auto& n : gen) worst = std::max(worst, std::abs(w[space.at(n)] - ref));
    }
    return worst;
}

// Collapse an intragenerationally equal state to per-generation amplitudes.
inline std::vector<Complex> collapse_generations(const LambdaSet& ls, const ModeSpace& space,
                                                 const std::vector<Complex>& w) {
    std::vector<Complex> b(ls.N);
    for (int g = 0; g < ls.N; ++g) b[g] = w[space.at(ls.generations[g][0])];
    return b;
}

}  // namespace qhdlab
