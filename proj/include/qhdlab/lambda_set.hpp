#pragma once

// N-generation frequency sets with the CKSTT family structure. Everything
// in this header is exact integer arithmetic; no floating point enters any
// property check.

#include <algorithm>
#include <array>
#include <map>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qhdlab/core.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

// Nuclear family: parents p1, p2 in generation i, children c1, c2 in
// generation i+1, forming the non-degenerate rectangle p1 - c1 + p2 - c2 = 0
// with |p1|^2 + |p2|^2 = |c1|^2 + |c2|^2.
struct Family {
    LatticePoint p1, c1, p2, c2;
    int parent_gen = 0;  // 1-based

    bool momentum_zero() const { return (p1 - c1 + p2 - c2).is_zero(); }
    bool resonant() const { return p1.norm2() + p2.norm2() == c1.norm2() + c2.norm2(); }
    bool degenerate() const {
        return p1 == p2 || c1 == c2 || p1 == c1 || p1 == c2 || p2 == c1 || p2 == c2 ||
               p1.is_zero() || p2.is_zero() || c1.is_zero() || c2.is_zero();
    }
};

struct LambdaSet {
    int q = 1;
    int N = 0;
    int gen_size = 0;  // G; the paper uses 2^{N-1}, desk sets may use less
    bool reduced_multiplicity = false;
    std::vector<std::vector<LatticePoint>> generations;  // size N
    std::vector<Family> families;

    std::vector<LatticePoint> members() const {
        std::vector<LatticePoint> all;
        for (auto& g : generations) all.insert(all.end(), g.begin(), g.end());
        return all;
    }
    // 1-based generation index, 0 if absent.
    int generation_of(LatticePoint n) const {
        for (int i = 0; i < int(generations.size()); ++i)
            for (auto& p : generations[i])
                if (p == n) return i + 1;
        return 0;
    }
    bool contains(LatticePoint n) const { return generation_of(n) != 0; }
};

// Square completion over the Gaussian integers: children span the diagonal
// perpendicular to (n1, n3) with the same midpoint and length.
inline std::pair<LatticePoint, LatticePoint> complete_family(LatticePoint n1, LatticePoint n3) {
    if (n1 == n3) throw DegenerateRectangle("coincident parents " + n1.str());
    LatticePoint s = n1 + n3;
    LatticePoint d = n1 - n3;
    if ((s.x & 1) || (s.y & 1))
        throw NonIntegerChildren("parents " + n1.str() + ", " + n3.str() +
                                 " have odd coordinate sums");
    LatticePoint mid{s.x / 2, s.y / 2};
    LatticePoint half{d.x / 2, d.y / 2};
    LatticePoint rot = half.rot90();
    LatticePoint n2 = mid + rot, n4 = mid - rot;
    if (n2 == n4) throw DegenerateRectangle("children coincide");
    if (n2.is_zero() || n4.is_zero()) throw DegenerateRectangle("child at origin");
    if (n2 == n1 || n2 == n3 || n4 == n1 || n4 == n3)
        throw DegenerateRectangle("child equals parent");
    return {n2, n4};
}

inline LambdaSet scale(const LambdaSet& in, int k) {
    if (k < 1) throw ConstructionFailed("scale factor must be >= 1");
    LambdaSet out = in;
    out.q = in.q * k;
    for (auto& g : out.generations)
        for (auto& p : g) p = k * p;
    for (auto& f : out.families) {
        f.p1 = k * f.p1;
        f.p2 = k * f.p2;
        f.c1 = k * f.c1;
        f.c2 = k * f.c2;
    }
    return out;
}

// --- verification -------------------------------------------------------

struct PropertyCheck {
    bool pass = true;
    std::string witness;  // non-empty exactly when failed
};

struct PropertyReport {
    std::array<PropertyCheck, 7> p;  // P1..P7
    bool families_valid = true;
    std::string families_witness;
    // diagnostics
    std::vector<std::array<double, 4>> weight_ratios;   // {s, i, j, ratio}
    std::vector<std::array<double, 2>> radius_minmax;   // per generation {min|n|, max|n|}

    bool all_pass() const {
        if (!families_valid) return false;
        for (auto& c : p)
            if (!c.pass) return false;
        return true;
    }
    std::vector<bool> pass_vector() const {
        std::vector<bool> v;
        for (auto& c : p) v.push_back(c.pass);
        return v;
    }
};

namespace detail {

struct PairKey {
    LatticePoint sum;
    std::int64_t diag2;
    friend bool operator<(const PairKey& a, const PairKey& b) {
        if (a.sum != b.sum) return a.sum < b.sum;
        return a.diag2 < b.diag2;
    }
};

// All rectangles with vertices in `pts`, reported as two diagonal pairs.
struct Rectangle {
    LatticePoint a, c;  // one diagonal
    LatticePoint b, d;  // the other
};

inline std::vector<Rectangle> all_rectangles(const std::vector<LatticePoint>& pts) {
    std::map<PairKey, std::vector<std::pair<LatticePoint, LatticePoint>>> buckets;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            LatticePoint a = pts[i], b = pts[j];
            buckets[{a + b, (a - b).norm2()}].push_back({a, b});
        }
    std::vector<Rectangle> out;
    for (auto& [key, pairs] : buckets)
        for (std::size_t i = 0; i < pairs.size(); ++i)
            for (std::size_t j = i + 1; j < pairs.size(); ++j)
                out.push_back({pairs[i].first, pairs[i].second, pairs[j].first, pairs[j].second});
    return out;
}

inline std::string quad_str(LatticePoint a, LatticePoint b, LatticePoint c, LatticePoint d) {
    return a.str() + " " + b.str() + " " + c.str() + " " + d.str();
}

}  // namespace detail

inline double weight_ratio(const LambdaSet& ls, double s, int i, int j) {
    if (i < 1 || j < 1 || i > ls.N || j > ls.N) throw ConstructionFailed("generation index out of range");
    auto wsum = [&](int g) {
        double acc = 0.0;
        for (auto& n : ls.generations[g - 1]) acc += std::pow(double(n.norm2()), s);
        return acc;
    };
    return wsum(j) / wsum(i);
}

inline PropertyReport verify_lambda(const LambdaSet& ls) {
    PropertyReport rep;
    const auto pts = ls.members();
    std::set<LatticePoint> all(pts.begin(), pts.end());

    // Stored families must satisfy the rectangle identities exactly and sit
    // in consecutive generations.
    for (auto& f : ls.families) {
        bool ok = f.momentum_zero() && f.resonant() && !f.degenerate();
        int gp1 = ls.generation_of(f.p1), gp2 = ls.generation_of(f.p2);
        int gc1 = ls.generation_of(f.c1), gc2 = ls.generation_of(f.c2);
        ok = ok && gp1 == f.parent_gen && gp2 == f.parent_gen && gc1 == f.parent_gen + 1 &&
             gc2 == f.parent_gen + 1;
        if (!ok) {
            rep.families_valid = false;
            rep.families_witness = detail::quad_str(f.p1, f.c1, f.p2, f.c2);
            break;
        }
    }

    // Disjointness / no origin (part of the type invariants; folded into P5's
    // slot would be misleading, so treat violations as family-structure ones).
    if (all.size() != pts.size() || all.count({0, 0})) {
        rep.families_valid = false;
        rep.families_witness = "generations not disjoint or contain 0";
    }

    const auto rects = detail::all_rectangles(pts);

    // A rectangle is family-shaped when one diagonal lies in generation i and
    // the other in generation i+1.
    auto family_shape = [&](const detail::Rectangle& r) -> std::optional<int> {
        int ga = ls.generation_of(r.a), gc = ls.generation_of(r.c);
        int gb = ls.generation_of(r.b), gd = ls.generation_of(r.d);
        if (ga == gc && gb == gd) {
            if (gb == ga + 1) return ga;       // (a,c) parents
            if (ga == gb + 1) return gb;       // (b,d) parents
        }
        return std::nullopt;
    };

    // P1 (closure): any right-angle triple completes inside the set.
    for (auto& b : pts) {
        for (auto& a : pts) {
            if (a == b) continue;
            for (auto& c : pts) {
                if (c == b || c == a) continue;
                if ((a - b).dot(c - b) != 0) continue;
                LatticePoint fourth = a + c - b;
                if (!all.count(fourth)) {
                    rep.p[0] = {false, detail::quad_str(a, b, c, fourth) + " (fourth missing)"};
                    goto p1_done;
                }
            }
        }
    }
p1_done:;

    // P5 (faithfulness): no rectangles besides nuclear families.
    for (auto& r : rects) {
        if (!family_shape(r)) {
            rep.p[4] = {false, detail::quad_str(r.a, r.b, r.c, r.d)};
            break;
        }
    }

    // P2 / P3: existence and uniqueness of spouse/children and parents/sibling.
    {
        std::map<LatticePoint, int> parent_count, child_count;
        for (auto& r : rects) {
            auto pg = family_shape(r);
            if (!pg) continue;
            bool ac_parents = ls.generation_of(r.a) == *pg;
            LatticePoint P1 = ac_parents ? r.a : r.b, P2 = ac_parents ? r.c : r.d;
            LatticePoint C1 = ac_parents ? r.b : r.a, C2 = ac_parents ? r.d : r.c;
            parent_count[P1]++;
            parent_count[P2]++;
            child_count[C1]++;
            child_count[C2]++;
        }
        for (int g = 1; g <= ls.N - 1 && rep.p[1].pass; ++g)
            for (auto& n : ls.generations[g - 1])
                if (parent_count[n] != 1) {
                    rep.p[1] = {false, n.str() + " has " + std::to_string(parent_count[n]) +
                                           " families as parent"};
                    break;
                }
        for (int g = 2; g <= ls.N && rep.p[2].pass; ++g)
            for (auto& n : ls.generations[g - 1])
                if (child_count[n] != 1) {
                    rep.p[2] = {false, n.str() + " has " + std::to_string(child_count[n]) +
                                           " families as child"};
                    break;
                }
    }

    // P4 (non-degeneracy): sibling of a mode never equals its spouse. Uses the
    // stored family list (already checked to be geometrically valid).
    {
        std::map<LatticePoint, LatticePoint> spouse, sibling;
        for (auto& f : ls.families) {
            spouse[f.p1] = f.p2;
            spouse[f.p2] = f.p1;
            sibling[f.c1] = f.c2;
            sibling[f.c2] = f.c1;
        }
        for (auto& [n, sib] : sibling) {
            auto it = spouse.find(n);
            if (it != spouse.end() && it->second == sib) {
                rep.p[3] = {false, n.str() + " has spouse = sibling = " + sib.str()};
                break;
            }
        }
    }

    // P6: every zero-momentum quadruple is trivial or a nuclear family.
    {
        std::set<std::pair<std::pair<LatticePoint, LatticePoint>, std::pair<LatticePoint, LatticePoint>>>
            family_index;
        auto norm_pair = [](LatticePoint a, LatticePoint b) {
            return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        };
        for (auto& f : ls.families)
            family_index.insert({norm_pair(f.p1, f.p2), norm_pair(f.c1, f.c2)});
        bool done = false;
        for (auto& n1 : pts) {
            for (auto& n2 : pts) {
                for (auto& n3 : pts) {
                    LatticePoint n4 = n1 - n2 + n3;
                    if (!all.count(n4)) continue;
                    bool trivial = (n1 == n2 && n3 == n4) || (n1 == n4 && n3 == n2);
                    if (trivial) continue;
                    bool fam = family_index.count({norm_pair(n1, n3), norm_pair(n2, n4)}) ||
                               family_index.count({norm_pair(n2, n4), norm_pair(n1, n3)});
                    if (!fam) {
                        rep.p[5] = {false, detail::quad_str(n1, n2, n3, n4)};
                        done = true;
                        break;
                    }
                }
                if (done) break;
            }
            if (done) break;
        }
    }

    // P7: no 3-wave resonance with two modes in the set; the third mode is
    // forced by momentum conservation (zero mode excluded by the reduction).
    {
        static constexpr std::array<std::array<int, 3>, 8> signs{{{+1, +1, +1},
                                                                  {+1, +1, -1},
                                                                  {+1, -1, +1},
                                                                  {+1, -1, -1},
                                                                  {-1, +1, +1},
                                                                  {-1, +1, -1},
                                                                  {-1, -1, +1},
                                                                  {-1, -1, -1}}};
        bool done = false;
        for (auto& n1 : pts) {
            for (auto& n2 : pts) {
                for (auto& sg : signs) {
                    LatticePoint n3 = -sg[2] * (sg[0] * n1 + sg[1] * n2);
                    if (n3.is_zero()) continue;
                    std::int64_t v = std::int64_t(sg[0]) * n1.norm2() +
                                     std::int64_t(sg[1]) * n2.norm2() +
                                     std::int64_t(sg[2]) * n3.norm2();
                    if (v == 0) {
                        rep.p[6] = {false, n1.str() + " " + n2.str() + " " + n3.str() +
                                               " signs " + std::to_string(sg[0]) +
                                               std::to_string(sg[1]) + std::to_string(sg[2])};
                        done = true;
                        break;
                    }
                }
                if (done) break;
            }
            if (done) break;
        }
    }

    // Diagnostics: radius bounds and a default table of weight ratios.
    for (auto& g : ls.generations) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (auto& n : g) {
            double r = std::sqrt(double(n.norm2()));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        rep.radius_minmax.push_back({lo, hi});
    }
    for (double s : {1.0, 2.0, 3.0})
        for (int i = 1; i < ls.N; ++i)
            rep.weight_ratios.push_back({s, double(i), double(i + 1), weight_ratio(ls, s, i, i + 1)});

    return rep;
}

// --- construction -------------------------------------------------------

struct BuildOptions {
    int max_attempts = 200;
    int base_radius = 24;      // gen-1 points drawn from an annulus of this scale
    double annulus_lo = 0.5;   // inner radius fraction of the annulus
    int max_linf = 0;          // 0 = unbounded; else reject children beyond
    bool spread_bias = true;   // prefer matchings that polarize |n|^4 weights
    int score_top = 0;         // 0 = score all children; k > 0 = only the k largest
    std::size_t matching_limit = 4000;  // matchings enumerated per hop
    int branch_per_hop = 24;   // candidates tried per hop before backtracking
    int node_budget = 4000;    // total DFS nodes per attempt
    // When > 0, keep attempting and return the admissible set with the best
    // weight ratio sum_{gen j}|n|^{2s} / sum_{gen i}|n|^{2s} at s = 2 between
    // best_ratio_from and best_ratio_to (searching all attempts).
    int best_ratio_from = 0;
    int best_ratio_to = 0;
};

namespace detail {

inline bool same_parity(LatticePoint a, LatticePoint b) {
    return ((a.x ^ b.x) & 1) == 0 && ((a.y ^ b.y) & 1) == 0;
}

// Perfect matchings of a generation respecting pairwise parity and the
// family-graph constraint: members carry the id of the family they were born
// into (-1 for generation 1), and no two couples may connect the same pair
// of families. A double marriage between two families is structurally
// resonant: if (c1, c2) and (c3, c4) are two sibling pairs and both couples
// (c1, c3), (c2, c4) marry, the square completion forces
// grandparent - grandchild + grandparent - grandchild = 0, a non-family
// zero-momentum quadruple. A self-loop is a sibling marriage, excluded for
// the same reason P4 excludes it.
using Matching = std::vector<std::pair<int, int>>;

inline void enumerate_matchings_rec(const std::vector<LatticePoint>& pts,
                                    const std::vector<int>& family_id, std::vector<bool>& used,
                                    std::set<std::pair<int, int>>& fam_edges, Matching& cur,
                                    std::vector<Matching>& out, std::size_t limit) {
    if (out.size() >= limit) return;
    const int n = int(pts.size());
    int a = -1;
    for (int i = 0; i < n; ++i)
        if (!used[i]) {
            a = i;
            break;
        }
    if (a < 0) {
        out.push_back(cur);
        return;
    }
    used[a] = true;
    for (int b = a + 1; b < n; ++b) {
        if (used[b] || !same_parity(pts[a], pts[b])) continue;
        int fa = family_id[a], fb = family_id[b];
        bool edge = false;
        if (fa >= 0 || fb >= 0) {
            if (fa == fb) continue;  // sibling marriage
            auto e = std::minmax(fa, fb);
            if (fam_edges.count(e)) continue;  // double marriage between families
            fam_edges.insert(e);
            edge = true;
        }
        used[b] = true;
        cur.push_back({a, b});
        enumerate_matchings_rec(pts, family_id, used, fam_edges, cur, out, limit);
        cur.pop_back();
        used[b] = false;
        if (edge) fam_edges.erase(std::minmax(fa, fb));
        if (out.size() >= limit) break;
    }
    used[a] = false;
}

inline std::vector<Matching> enumerate_matchings(const std::vector<LatticePoint>& pts,
                                                 const std::vector<int>& family_id,
                                                 std::size_t limit) {
    std::vector<bool> used(pts.size(), false);
    std::set<std::pair<int, int>> fam_edges;
    Matching cur;
    std::vector<Matching> out;
    enumerate_matchings_rec(pts, family_id, used, fam_edges, cur, out, limit);
    return out;
}

// Candidate set grown point by point. Each insertion is validated against
// the property precursors so that the final exhaustive verification rarely
// fails: no incomplete rectangles and no rectangles outside the family list
// (P1/P5), no non-family zero-momentum quadruples (P6), no 3-wave
// resonances (P7).
class GrowingSet {
  public:
    bool contains(LatticePoint p) const { return pts_.count(p) != 0; }
    const std::vector<LatticePoint>& points() const { return list_; }

    void add_point(LatticePoint p) {
        pts_.insert(p);
        list_.push_back(p);
    }

    void register_family(LatticePoint p1, LatticePoint p2, LatticePoint c1, LatticePoint c2) {
        rects_.insert(rect_key(p1, p2, c1, c2));
    }

    // Empty string when p is admissible given the current points plus the
    // `pending` ones assumed present.
    std::string check_point(LatticePoint p, const std::vector<LatticePoint>& pending) const {
        if (p.is_zero()) return "zero mode";
        if (contains(p)) return "duplicate point";
        for (auto& q : pending)
            if (q == p) return "duplicate pending point";

        std::vector<LatticePoint> all = list_;
        all.insert(all.end(), pending.begin(), pending.end());
        auto present = [&](LatticePoint v) {
            if (v == p) return true;
            if (pts_.count(v)) return true;
            for (auto& q : pending)
                if (q == v) return true;
            return false;
        };

        // Rectangle precursors involving p.
        for (std::size_t i = 0; i < all.size(); ++i) {
            LatticePoint a = all[i];
            for (std::size_t j = 0; j < all.size(); ++j) {
                if (i == j) continue;
                LatticePoint b = all[j];
                // right angle at p between a and b
                if (j > i && (a - p).dot(b - p) == 0) {
                    LatticePoint v = a + b - p;
                    if (!present(v)) return "incomplete rectangle " + p.str() + a.str() + b.str();
                    if (!rects_.count(rect_key(a, b, p, v)))
                        return "non-family rectangle at " + p.str();
                }
                // right angle at a between p and b
                if ((p - a).dot(b - a) == 0) {
                    LatticePoint v = p + b - a;
                    if (!present(v)) return "incomplete rectangle at corner " + a.str();
                    if (!rects_.count(rect_key(p, b, a, v)))
                        return "non-family rectangle at corner " + a.str();
                }
            }
        }

        // P6 precursor: zero-momentum quadruples involving p.
        for (auto& x : all) {
            for (auto& y : all) {
                // p in a + slot: (p, x, y, v), v = p - x + y
                LatticePoint v = p - x + y;
                if (present(v) && !quad_ok(p, x, y, v)) return "zero-sum quadruple at " + p.str();
                // p in a - slot: (x, p, y, v), v = x - p + y
                v = x - p + y;
                if (present(v) && !quad_ok(x, p, y, v)) return "zero-sum quadruple at " + p.str();
            }
            // quadruples with p twice: (p, x, p, v) and (x, p, y=p) cases
            LatticePoint v = p - x + p;
            if (present(v) && !quad_ok(p, x, p, v)) return "zero-sum quadruple at " + p.str();
        }

        // P7 precursor: 3-wave combinations of p with any member.
        static constexpr std::array<std::array<int, 3>, 8> signs{{{+1, +1, +1},
                                                                  {+1, +1, -1},
                                                                  {+1, -1, +1},
                                                                  {+1, -1, -1},
                                                                  {-1, +1, +1},
                                                                  {-1, +1, -1},
                                                                  {-1, -1, +1},
                                                                  {-1, -1, -1}}};
        std::vector<LatticePoint> withp = all;
        withp.push_back(p);
        for (auto& x : withp)
            for (auto& sg : signs) {
                LatticePoint n3 = -sg[2] * (sg[0] * p + sg[1] * x);
                if (n3.is_zero()) continue;
                std::int64_t s = std::int64_t(sg[0]) * p.norm2() + std::int64_t(sg[1]) * x.norm2() +
                                 std::int64_t(sg[2]) * n3.norm2();
                if (s == 0) return "3-wave resonance with " + x.str();
            }
        return {};
    }

  private:
    using DiagPair = std::pair<LatticePoint, LatticePoint>;
    using RectKey = std::pair<DiagPair, DiagPair>;

    static DiagPair norm_pair(LatticePoint a, LatticePoint b) {
        return a < b ? DiagPair{a, b} : DiagPair{b, a};
    }
    static RectKey rect_key(LatticePoint d1a, LatticePoint d1b, LatticePoint d2a, LatticePoint d2b) {
        DiagPair u = norm_pair(d1a, d1b), v = norm_pair(d2a, d2b);
        return u < v ? RectKey{u, v} : RectKey{v, u};
    }

    bool quad_ok(LatticePoint n1, LatticePoint n2, LatticePoint n3, LatticePoint n4) const {
        bool trivial = (n1 == n2 && n3 == n4) || (n1 == n4 && n3 == n2);
        if (trivial) return true;
        return rects_.count(rect_key(n1, n3, n2, n4)) != 0;
    }

    std::set<LatticePoint> pts_;
    std::vector<LatticePoint> list_;
    std::set<RectKey> rects_;
};

}  // namespace detail

// Randomized generation-by-generation procreation with rejection sampling
// against (P1)-(P7); the q-dilation is applied last.
inline LambdaSet build_lambda(int N, int G, int q, std::uint64_t seed,
                              const BuildOptions& opt = {}) {
    if (N < 3) throw ConstructionFailed("N must be >= 3");
    if (G < 4 || (G & 1))
        throw ConstructionFailed(
            "per-generation size must be even and >= 4: with fewer members a child's "
            "spouse is forced to be its sibling, so (P4) cannot hold");
    if (G < 6 && N >= 3)
        throw ConstructionFailed(
            "per-generation size must be >= 6: with two families per hop the marriage "
            "graph is forced to double an edge, and a double marriage between two "
            "families always completes grandparents into a non-family zero-momentum "
            "quadruple, so (P6) cannot hold");
    if (q < 1) throw ConstructionFailed("q must be >= 1");

    std::mt19937_64 rng(seed);
    std::string last_blocker = "placement";
    LambdaSet best_set;
    double best_weight = 0.0;

    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        // The box grows slowly over attempts: small coordinates are preferred
        // but feasibility wins.
        const int radius = opt.base_radius + (opt.base_radius * attempt) / 50;
        std::uniform_int_distribution<int> coord(-radius, radius);

        // Generation 1: distinct nonzero points, all of one parity class so
        // that every pairing is marriageable; each point must pass the
        // incremental property precursors. Points are drawn from an annulus
        // to give the spread bias mixed radii to work with.
        detail::GrowingSet grow;
        std::vector<LatticePoint> gen1;
        int guard = 0;
        while (int(gen1.size()) < G && guard++ < 800) {
            LatticePoint p{2 * coord(rng), 2 * coord(rng)};
            double rlo = opt.annulus_lo * 2.0 * radius;
            if (double(p.norm2()) < rlo * rlo) continue;
            if (opt.max_linf > 0 && p.linf() > opt.max_linf) continue;
            if (!grow.check_point(p, {}).empty()) continue;
            grow.add_point(p);
            gen1.push_back(p);
        }
        if (int(gen1.size()) < G) {
            last_blocker = "generation-1 placement";
            continue;
        }

        LambdaSet ls;
        ls.q = 1;
        ls.N = N;
        ls.gen_size = G;
        ls.reduced_multiplicity = G < (1 << (N - 1));
        ls.generations.assign(1, gen1);

        // Depth-first search over hops with backtracking: at each hop the
        // admissible matchings are tried in descending spread-score order.
        struct Frame {
            std::vector<Family> fams;
            double score = 0.0;
        };
        int nodes = opt.node_budget;
        std::map<LatticePoint, int> born_family;
        int next_family_id = 0;

        std::function<bool(detail::GrowingSet&, int)> descend =
            [&](detail::GrowingSet& state, int g) -> bool {
            if (g >= N) return true;
            const auto& cur = ls.generations[g - 1];
            std::vector<int> family_id(G, -1);
            for (int i = 0; i < G; ++i)
                if (auto it = born_family.find(cur[i]); it != born_family.end())
                    family_id[i] = it->second;

            auto matchings = detail::enumerate_matchings(cur, family_id, opt.matching_limit);
            std::vector<Frame> cands;
            for (auto& match : matchings) {
                Frame fr;
                bool ok = true;
                for (auto& [ia, ib] : match) {
                    LatticePoint p1 = cur[ia], p2 = cur[ib], c1, c2;
                    try {
                        std::tie(c1, c2) = complete_family(p1, p2);
                    } catch (const Error&) {
                        ok = false;
                        break;
                    }
                    if (opt.max_linf > 0 && (c1.linf() > opt.max_linf || c2.linf() > opt.max_linf)) {
                        ok = false;
                        break;
                    }
                    fr.fams.push_back({p1, c1, p2, c2, g});
                }
                if (ok) {
                    std::vector<double> w4;
                    for (auto& f : fr.fams) {
                        w4.push_back(double(f.c1.norm2()) * double(f.c1.norm2()));
                        w4.push_back(double(f.c2.norm2()) * double(f.c2.norm2()));
                    }
                    std::sort(w4.begin(), w4.end(), std::greater<>());
                    int take = opt.score_top > 0 ? std::min<int>(opt.score_top, w4.size()) : int(w4.size());
                    for (int i = 0; i < take; ++i) fr.score += w4[i];
                }
                // Parity viability of the next hop: children marry only within
                // componentwise parity classes, and a class holding exactly one
                // sibling pair is a dead end.
                if (ok && g + 1 < N) {
                    std::map<std::pair<int, int>, std::vector<int>> classes;
                    for (int fi = 0; fi < int(fr.fams.size()); ++fi) {
                        auto& f = fr.fams[fi];
                        classes[{f.c1.x & 1, f.c1.y & 1}].push_back(fi);
                        classes[{f.c2.x & 1, f.c2.y & 1}].push_back(fi);
                    }
                    for (auto& [cls, members] : classes) {
                        if (members.size() & 1) ok = false;
                        if (members.size() == 2 && members[0] == members[1]) ok = false;
                    }
                }
                if (ok) cands.push_back(std::move(fr));
            }
            if (opt.spread_bias) {
                std::stable_sort(cands.begin(), cands.end(),
                                 [](const Frame& a, const Frame& b) { return a.score > b.score; });
            } else {
                std::shuffle(cands.begin(), cands.end(), rng);
            }

            int tried = 0;
            for (auto& cand : cands) {
                if (tried++ >= opt.branch_per_hop || nodes <= 0) break;
                --nodes;
                detail::GrowingSet trial = state;
                std::vector<LatticePoint> children;
                bool ok = true;
                for (auto& f : cand.fams) {
                    trial.register_family(f.p1, f.p2, f.c1, f.c2);
                    if (!trial.check_point(f.c1, {f.c2}).empty()) {
                        ok = false;
                        break;
                    }
                    trial.add_point(f.c1);
                    if (!trial.check_point(f.c2, {}).empty()) {
                        ok = false;
                        break;
                    }
                    trial.add_point(f.c2);
                    children.push_back(f.c1);
                    children.push_back(f.c2);
                }
                if (!ok) continue;

                const auto fam_count = ls.families.size();
                for (auto& f : cand.fams) {
                    ls.families.push_back(f);
                    born_family[f.c1] = next_family_id;
                    born_family[f.c2] = next_family_id;
                    ++next_family_id;
                }
                ls.generations.push_back(children);
                if (descend(trial, g + 1)) return true;
                // rollback
                ls.generations.pop_back();
                while (ls.families.size() > fam_count) {
                    born_family.erase(ls.families.back().c1);
                    born_family.erase(ls.families.back().c2);
                    ls.families.pop_back();
                }
            }
            return false;
        };

        if (!descend(grow, 1)) {
            last_blocker = "procreation search exhausted";
            continue;
        }

        auto rep = verify_lambda(ls);
        if (rep.all_pass()) {
            if (opt.best_ratio_from <= 0) return q > 1 ? scale(ls, q) : ls;
            double w = weight_ratio(ls, 2.0, opt.best_ratio_from, opt.best_ratio_to);
            if (w > best_weight) {
                best_weight = w;
                best_set = ls;
            }
            continue;
        }
        for (int i = 0; i < 7; ++i)
            if (!rep.p[i].pass) {
                last_blocker = "P" + std::to_string(i + 1) + " [" + rep.p[i].witness + "]";
                break;
            }
    }
    if (opt.best_ratio_from > 0 && best_weight > 0.0)
        return q > 1 ? scale(best_set, q) : best_set;
    throw ConstructionFailed("no valid set after " + std::to_string(opt.max_attempts) +
                             " attempts; last blocker: " + last_blocker);
}

// --- serialization -------------------------------------------------------

inline nlohmann::json lambda_to_json(const LambdaSet& ls) {
    nlohmann::json gens = nlohmann::json::array();
    for (auto& g : ls.generations) {
        nlohmann::json jg = nlohmann::json::array();
        for (auto& n : g) jg.push_back({n.x, n.y});
        gens.push_back(jg);
    }
    nlohmann::json fams = nlohmann::json::array();
    for (auto& f : ls.families)
        fams.push_back({{f.p1.x, f.p1.y}, {f.c1.x, f.c1.y}, {f.p2.x, f.p2.y}, {f.c2.x, f.c2.y}});
    return {{"q", ls.q},
            {"N", ls.N},
            {"gen_size", ls.gen_size},
            {"reduced_multiplicity", ls.reduced_multiplicity},
            {"generations", gens},
            {"families", fams}};
}

inline LambdaSet lambda_from_json(const nlohmann::json& j) {
    LambdaSet ls;
    ls.q = j.at("q").get<int>();
    ls.N = j.at("N").get<int>();
    ls.gen_size = j.at("gen_size").get<int>();
    ls.reduced_multiplicity = j.value("reduced_multiplicity", false);
    for (auto& jg : j.at("generations")) {
        std::vector<LatticePoint> g;
        for (auto& p : jg) g.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        ls.generations.push_back(g);
    }
    int pg = 1, count = 0, per_hop = ls.gen_size / 2;
    for (auto& jf : j.at("families")) {
        Family f;
        f.p1 = {jf.at(0).at(0).get<int>(), jf.at(0).at(1).get<int>()};
        f.c1 = {jf.at(1).at(0).get<int>(), jf.at(1).at(1).get<int>()};
        f.p2 = {jf.at(2).at(0).get<int>(), jf.at(2).at(1).get<int>()};
        f.c2 = {jf.at(3).at(0).get<int>(), jf.at(3).at(1).get<int>()};
        f.parent_gen = pg;
        ls.families.push_back(f);
        if (++count == per_hop) {
            count = 0;
            ++pg;
        }
    }
    return ls;
}

inline nlohmann::json report_to_json(const PropertyReport& rep) {
    nlohmann::json props = nlohmann::json::array();
    for (int i = 0; i < 7; ++i)
        props.push_back({{"property", "P" + std::to_string(i + 1)},
                         {"pass", rep.p[i].pass},
                         {"witness", rep.p[i].witness}});
    nlohmann::json ratios = nlohmann::json::array();
    for (auto& r : rep.weight_ratios)
        ratios.push_back({{"s", r[0]}, {"i", int(r[1])}, {"j", int(r[2])}, {"ratio", r[3]}});
    nlohmann::json radii = nlohmann::json::array();
    for (auto& r : rep.radius_minmax) radii.push_back({{"min", r[0]}, {"max", r[1]}});
    return {{"properties", props},
            {"families_valid", rep.families_valid},
            {"families_witness", rep.families_witness},
            {"all_pass", rep.all_pass()},
            {"weight_ratios", ratios},
            {"radius_minmax", radii}};
}

}  // namespace qhdlab
