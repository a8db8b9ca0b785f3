#pragma once

#include <cstdint>

#include "qhdlab/core.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

// Global simulation parameters. delta = 1/(eps q) is the small quantity
// controlling the normal-form remainder; it is recorded and reported with
// every run rather than asserted here.
struct SimConfig {
    double m = 1.0;       // mass level (> 0)
    double eps = 1.0;     // semiclassical parameter, in (0, 1]
    double s = 2.0;       // Sobolev index (> 1)
    int q = 1;            // sublattice dilation (>= 1)
    int N = 5;            // generation count (>= 3)
    double lambda = 40.0; // orbit scaling (> 0)
    int cutoff = 64;      // spectral truncation (|n|_inf <= cutoff)
    double dt = 1e-3;     // split-step time step
    double tol = 1e-10;   // ODE integrator tolerance
    std::uint64_t seed = 1;

    double delta() const { return 1.0 / (eps * double(q)); }

    void validate() const {
        if (!(m > 0.0)) throw ConfigError("m must be > 0");
        if (!(eps > 0.0) || eps > 1.0) throw ConfigError("eps must be in (0, 1]");
        if (!(s > 1.0)) throw ConfigError("s must be > 1");
        if (q < 1) throw ConfigError("q must be a positive integer");
        if (N < 3) throw ConfigError("N must be >= 3");
        if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
        if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
    }
};

inline nlohmann::json simconfig_to_json(const SimConfig& c) {
    return {{"m", c.m},         {"eps", c.eps},     {"s", c.s},       {"q", c.q},
            {"N", c.N},         {"lambda", c.lambda}, {"cutoff", c.cutoff},
            {"dt", c.dt},       {"tol", c.tol},     {"seed", c.seed}, {"delta", c.delta()}};
}

}  // namespace qhdlab
