#pragma once

// Sparse homogeneous Hamiltonians in the variables (w, wbar):
//
//   h(w, wbar) = sum_terms  coeff * prod_j w_{n_j}^{sigma_j},
//   w^+ = w,  w^- = wbar,  with momentum  sum_j sigma_j n_j = 0.
//
// Coefficients are stored against the *multiset* of signed modes (the table
// coefficient is the sum over all orderings of the textbook ordered sum).
// Convention fixed once for the whole library: the equations of motion of a
// table h are  i dw_n/dt = d h / d wbar_n,  i.e. the (2 pi)^2 weight of the
// defining integrals is already absorbed into the coefficients, and the
// bracket with a diagonal quadratic table multiplies each monomial by
// -i sum_j sigma_j omega(n_j).

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/frequency.hpp"
#include "qhdlab/lambda_set.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

struct SignedMode {
    int sigma = +1;  // +1 ~ w, -1 ~ wbar
    LatticePoint n;
    friend constexpr bool operator==(SignedMode, SignedMode) = default;
    friend constexpr auto operator<=>(SignedMode, SignedMode) = default;
};

using Monomial = std::vector<SignedMode>;

inline Monomial canonical(Monomial m) {
    std::sort(m.begin(), m.end());
    return m;
}

inline LatticePoint momentum(const Monomial& m) {
    LatticePoint p{0, 0};
    for (auto& s : m) p = p + s.sigma * s.n;
    return p;
}

inline Monomial conjugate_monomial(const Monomial& m) {
    Monomial out = m;
    for (auto& s : out) s.sigma = -s.sigma;
    return canonical(out);
}

class MonomialHamiltonian {
  public:
    MonomialHamiltonian() = default;
    explicit MonomialHamiltonian(int degree) : degree_(degree) {}

    int degree() const { return degree_; }
    const std::map<Monomial, Complex>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    void add(Monomial m, Complex c) {
        if (int(m.size()) != degree_) throw SupportMismatch("monomial degree mismatch");
        if (!momentum(m).is_zero())
            throw MomentumViolation("monomial violates momentum: " + describe(m));
        m = canonical(std::move(m));
        auto [it, inserted] = terms_.emplace(std::move(m), c);
        if (!inserted) {
            it->second += c;
            if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
        }
    }

    // [[H]] = sup |coeff|
    double sup_coeff() const {
        double m = 0.0;
        for (auto& [mon, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

    // Support class against a set: "A_{k,0}", "A_{k,1}", "A_{k,>=2}" or "mixed".
    std::string support_class(const LambdaSet& ls) const {
        std::set<LatticePoint> mem;
        for (auto& p : ls.members()) mem.insert(p);
        int lo = degree_ + 1, hi = -1;
        for (auto& [mon, c] : terms_) {
            int d = 0;
            for (auto& s : mon) d += mem.count(s.n) ? 0 : 1;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        if (hi < 0) return "empty";
        auto cls = [&](int d) {
            return d == 0 ? std::string("A_{") + std::to_string(degree_) + ",0}"
                 : d == 1 ? std::string("A_{") + std::to_string(degree_) + ",1}"
                          : std::string("A_{") + std::to_string(degree_) + ",>=2}";
        };
        if (lo == hi || (lo <= 1 && hi <= 1 && cls(lo) == cls(hi))) return cls(hi);
        if (lo >= 2) return cls(2);
        return "mixed";
    }

    static std::string describe(const Monomial& m) {
        std::string s;
        for (auto& sm : m) s += (sm.sigma > 0 ? "+" : "-") + sm.n.str();
        return s;
    }

    friend MonomialHamiltonian operator+(const MonomialHamiltonian& a, const MonomialHamiltonian& b) {
        if (a.degree_ != b.degree_) throw SupportMismatch("degree mismatch in sum");
        MonomialHamiltonian out = a;
        for (auto& [m, c] : b.terms_) out.add(m, c);
        return out;
    }

    MonomialHamiltonian& operator*=(Complex s) {
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

  private:
    int degree_ = 0;
    std::map<Monomial, Complex> terms_;
};

// {H^(2), .} with diagonal H^(2) = sum omega(n) |w_n|^2: each monomial picks
// up the factor -i sum_j sigma_j omega(n_j).
inline MonomialHamiltonian poisson_with_quadratic(const MonomialHamiltonian& h,
                                                  const FrequencyTable& table) {
    MonomialHamiltonian out(h.degree());
    for (auto& [m, c] : h.terms()) {
        double om = 0.0;
        for (auto& s : m) om += s.sigma * table.omega(s.n);
        Complex factor(0.0, -om);  // -i * divisor
        if (factor != Complex(0.0, 0.0)) out.add(m, c * factor);
    }
    return out;
}

// --- evaluation / vector field ------------------------------------------

// Finite mode basis for turning tables into ODE right-hand sides.
struct ModeSpace {
    std::vector<LatticePoint> modes;
    std::unordered_map<LatticePoint, int, LatticePointHash> index;

    explicit ModeSpace(std::vector<LatticePoint> ms) : modes(std::move(ms)) {
        for (int i = 0; i < int(modes.size()); ++i) {
            if (!index.emplace(modes[i], i).second) throw SupportMismatch("duplicate mode");
        }
    }
    int at(LatticePoint n) const {
        auto it = index.find(n);
        if (it == index.end()) throw SupportMismatch("mode " + n.str() + " not in space");
        return it->second;
    }
    std::size_t dim() const { return modes.size(); }
};

// Table compiled against a ModeSpace for fast repeated evaluation.
class CompiledHamiltonian {
  public:
    CompiledHamiltonian(const MonomialHamiltonian& h, const ModeSpace& space) : degree_(h.degree()) {
        for (auto& [m, c] : h.terms()) {
            Term t;
            t.coeff = c;
            for (auto& s : m) t.slots.push_back({s.sigma, space.at(s.n)});
            terms_.push_back(std::move(t));
        }
    }

    Complex evaluate(const std::vector<Complex>& w) const {
        Complex acc = 0.0;
        for (auto& t : terms_) {
            Complex p = t.coeff;
            for (auto& [sg, i] : t.slots) p *= sg > 0 ? w[i] : std::conj(w[i]);
            acc += p;
        }
        return acc;
    }

    // Accumulates dw/dt = -i dh/dwbar into out (same length as w).
    void add_flow(const std::vector<Complex>& w, std::vector<Complex>& out) const {
        const Complex minus_i(0.0, -1.0);
        for (auto& t : terms_) {
            for (std::size_t j = 0; j < t.slots.size(); ++j) {
                if (t.slots[j].first > 0) continue;  // differentiate wbar slots only
                Complex p = t.coeff;
                for (std::size_t k = 0; k < t.slots.size(); ++k) {
                    if (k == j) continue;
                    auto& [sg, i] = t.slots[k];
                    p *= sg > 0 ? w[i] : std::conj(w[i]);
                }
                out[t.slots[j].second] += minus_i * p;
            }
        }
    }

  private:
    struct Term {
        Complex coeff;
        std::vector<std::pair<int, int>> slots;  // (sigma, mode index)
    };
    int degree_;
    std::vector<Term> terms_;
};

// --- serialization -------------------------------------------------------

inline nlohmann::json hamiltonian_to_json(const MonomialHamiltonian& h) {
    nlohmann::json terms = nlohmann::json::array();
    for (auto& [m, c] : h.terms()) {
        std::string sigma;
        nlohmann::json modes = nlohmann::json::array();
        for (auto& s : m) {
            sigma += s.sigma > 0 ? '+' : '-';
            modes.push_back({s.n.x, s.n.y});
        }
        terms.push_back({sigma, modes, c.real(), c.imag()});
    }
    return {{"degree", h.degree()}, {"terms", terms}};
}

inline MonomialHamiltonian hamiltonian_from_json(const nlohmann::json& j) {
    MonomialHamiltonian h(j.at("degree").get<int>());
    for (auto& t : j.at("terms")) {
        std::string sigma = t.at(0).get<std::string>();
        Monomial m;
        for (std::size_t i = 0; i < sigma.size(); ++i)
            m.push_back({sigma[i] == '+' ? +1 : -1,
                         {t.at(1).at(i).at(0).get<int>(), t.at(1).at(i).at(1).get<int>()}});
        h.add(m, Complex(t.at(2).get<double>(), t.at(3).get<double>()));
    }
    return h;
}

}  // namespace qhdlab
