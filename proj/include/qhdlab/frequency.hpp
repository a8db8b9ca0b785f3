#pragma once

// Linear frequencies of the reduced plane wave and the coefficients of the
// diagonalizing change of variables:
//
//   omega(n) = sqrt(|n|^4 + 4 eps^-2 m |n|^2)
//   d(n) = sqrt(1 + 4 m eps^-2 / (omega + |n|^2)) + e(n)
//   e(n) = -2 m eps^-2 / sqrt((omega + |n|^2)(omega + |n|^2 + 4 m eps^-2))
//
// with d^2 - e^2 = 1 and both even in n.

#include <mutex>
#include <unordered_map>
#include <vector>

#include "qhdlab/core.hpp"

namespace qhdlab {

inline double omega(LatticePoint n, double m, double eps) {
    if (n.is_zero()) throw ZeroMode("omega undefined at n = 0");
    double n2 = double(n.norm2());
    return std::sqrt(n2 * n2 + 4.0 * m / (eps * eps) * n2);
}

struct DiagCoeffs {
    double d = 1.0;
    double e = 0.0;
};

inline DiagCoeffs diag_coeffs(LatticePoint n, double m, double eps) {
    if (n.is_zero()) throw ZeroMode("diagonalization undefined at n = 0");
    double n2 = double(n.norm2());
    double me2 = m / (eps * eps);
    double om = std::sqrt(n2 * n2 + 4.0 * me2 * n2);
    double a = om + n2;
    double e = -2.0 * me2 / std::sqrt(a * (a + 4.0 * me2));
    double d = std::sqrt(1.0 + 4.0 * me2 / a) + e;
    return {d, e};
}

// Memoized omega/d/e per mode; the cache sits behind a lock, lookups return
// by value so callers never hold references into it.
class FrequencyTable {
  public:
    FrequencyTable(double m, double eps) : m_(m), eps_(eps) {}

    double m() const { return m_; }
    double eps() const { return eps_; }

    double omega(LatticePoint n) const { return entry(n).om; }
    DiagCoeffs diag(LatticePoint n) const {
        auto e = entry(n);
        return {e.d, e.e};
    }

  private:
    struct Entry {
        double om, d, e;
    };
    Entry entry(LatticePoint n) const {
        std::scoped_lock lock(mu_);
        auto it = cache_.find(n);
        if (it != cache_.end()) return it->second;
        Entry e{qhdlab::omega(n, m_, eps_), 0.0, 0.0};
        auto de = qhdlab::diag_coeffs(n, m_, eps_);
        e.d = de.d;
        e.e = de.e;
        return cache_.emplace(n, e).first->second;
    }

    double m_, eps_;
    mutable std::mutex mu_;
    mutable std::unordered_map<LatticePoint, Entry, LatticePointHash> cache_;
};

// Small divisor sum_i sigma_i omega(n_i); requires momentum zero.
inline double divisor(const std::vector<int>& signs, const std::vector<LatticePoint>& modes,
                      const FrequencyTable& table) {
    if (signs.size() != modes.size()) throw MomentumViolation("sign/mode count mismatch");
    LatticePoint mom{0, 0};
    for (std::size_t i = 0; i < modes.size(); ++i) mom = mom + signs[i] * modes[i];
    if (!mom.is_zero()) throw MomentumViolation("sum sigma_i n_i = " + mom.str());
    double acc = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) acc += signs[i] * table.omega(modes[i]);
    return acc;
}

}  // namespace qhdlab
