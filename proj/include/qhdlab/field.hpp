#pragma once

// Complex Fourier coefficients on a truncated, possibly q-dilated, 2-D
// integer lattice. Convention used across the whole library:
//
//   psi(x) = sum_n psi_n e^{i n.x},   x in T^2 = (R / 2 pi Z)^2,
//
// and every norm is a sequence norm of the coefficients:
//   ||psi||_s^2   = sum |psi_n|^2 <n>^{2s},   <n> = sqrt(1 + |n|^2)
//   ||psi||_l1    = sum |psi_n|
//   ||psi||_L2    = sqrt(sum |psi_n|^2)
// so volume factors (2 pi)^2 never enter norms. Physical-space quadrature
// is normalized to match: mean over the grid of |psi|^2 equals ||psi||_L2^2.

#include <map>
#include <vector>

#include "qhdlab/core.hpp"
#include "qhdlab/fft.hpp"
#include "vendor_json.hpp"

namespace qhdlab {

enum class Frame { PhysicalU, ShiftedPsi, ReducedZ, DiagonalW, RotatingR };

inline const char* frame_name(Frame f) {
    switch (f) {
        case Frame::PhysicalU: return "physical-u";
        case Frame::ShiftedPsi: return "shifted-psi";
        case Frame::ReducedZ: return "reduced-z";
        case Frame::DiagonalW: return "diagonal-w";
        case Frame::RotatingR: return "rotating-r";
    }
    return "?";
}

inline Frame frame_from_name(const std::string& s) {
    for (Frame f : {Frame::PhysicalU, Frame::ShiftedPsi, Frame::ReducedZ,
                    Frame::DiagonalW, Frame::RotatingR})
        if (s == frame_name(f)) return f;
    throw FieldError("unknown frame tag: " + s);
}

// Frames obtained after the symplectic reduction carry no zero mode.
inline bool frame_excludes_zero(Frame f) {
    return f == Frame::ReducedZ || f == Frame::DiagonalW || f == Frame::RotatingR;
}

class FourierField2D {
  public:
    using CoeffMap = std::map<LatticePoint, Complex>;

    FourierField2D() = default;
    FourierField2D(Frame frame, int cutoff, int stride = 1)
        : frame_(frame), cutoff_(cutoff), stride_(stride) {
        if (cutoff_ < 0 || stride_ < 1) throw FieldError("bad cutoff/stride");
    }

    Frame frame() const { return frame_; }
    int cutoff() const { return cutoff_; }
    int stride() const { return stride_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    std::size_t support_size() const { return coeffs_.size(); }

    void check_mode(LatticePoint n) const {
        if (n.linf() > cutoff_)
            throw CutoffOverflow("mode " + n.str() + " exceeds cutoff " + std::to_string(cutoff_));
        if (stride_ > 1 && (n.x % stride_ != 0 || n.y % stride_ != 0))
            throw FieldError("mode " + n.str() + " off the dilated sublattice q=" + std::to_string(stride_));
        if (n.is_zero() && frame_excludes_zero(frame_))
            throw FieldError(std::string("zero mode not allowed in frame ") + frame_name(frame_));
    }

    void set(LatticePoint n, Complex c) {
        check_mode(n);
        if (c == Complex(0.0, 0.0))
            coeffs_.erase(n);
        else
            coeffs_[n] = c;
    }

    void add(LatticePoint n, Complex c) { set(n, at(n) + c); }

    Complex at(LatticePoint n) const {
        auto it = coeffs_.find(n);
        return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
    }

    FourierField2D with_frame(Frame f) const {
        FourierField2D out(f, cutoff_, stride_);
        for (auto& [n, c] : coeffs_) out.set(n, c);
        return out;
    }

    friend FourierField2D operator-(const FourierField2D& a, const FourierField2D& b) {
        FourierField2D out = a;
        for (auto& [n, c] : b.coeffs_) out.add(n, -c);
        return out;
    }
    friend FourierField2D operator+(const FourierField2D& a, const FourierField2D& b) {
        FourierField2D out = a;
        for (auto& [n, c] : b.coeffs_) out.add(n, c);
        return out;
    }
    FourierField2D& operator*=(Complex s) {
        for (auto& [n, c] : coeffs_) c *= s;
        return *this;
    }

  private:
    CoeffMap coeffs_;
    Frame frame_ = Frame::PhysicalU;
    int cutoff_ = 0;
    int stride_ = 1;
};

// --- norms ------------------------------------------------------------

inline double hs_norm(const FourierField2D& f, double s) {
    if (s < 0) throw FieldError("hs_norm requires s >= 0");
    double acc = 0.0;
    for (auto& [n, c] : f.coeffs()) acc += std::norm(c) * std::pow(1.0 + double(n.norm2()), s);
    return std::sqrt(acc);
}

inline double l2_norm(const FourierField2D& f) {
    double acc = 0.0;
    for (auto& [n, c] : f.coeffs()) acc += std::norm(c);
    return std::sqrt(acc);
}

inline double wiener_norm(const FourierField2D& f) {
    double acc = 0.0;
    for (auto& [n, c] : f.coeffs()) acc += std::abs(c);
    return acc;
}

// Sequence-convention mass sum |psi_n|^2; the plane wave sqrt(m) has mass m
// (equivalently L^2(T^2) mass (2 pi)^2 m).
inline double mass(const FourierField2D& f) {
    double acc = 0.0;
    for (auto& [n, c] : f.coeffs()) acc += std::norm(c);
    return acc;
}

// --- grid synthesis / analysis ----------------------------------------

// Smallest power-of-two grid on which cubic products of modes up to the
// cutoff are alias-free (2/3-style rule for cubic terms: M >= 4 K + 1).
inline int dealiased_grid_size(int cutoff_reduced) {
    return fft::next_pow2(4 * cutoff_reduced + 2);
}

// Samples of the field on an M x M grid of its fundamental cell
// [0, 2 pi / q)^2; coefficient at n lands in bin (n/q mod M).
inline fft::Grid2 to_grid(const FourierField2D& f, int grid_n) {
    const int q = f.stride();
    fft::Grid2 g(grid_n);
    for (auto& [n, c] : f.coeffs()) {
        int kx = n.x / q, ky = n.y / q;
        if (2 * std::abs(kx) >= grid_n || 2 * std::abs(ky) >= grid_n)
            throw CutoffOverflow("grid too small for mode " + n.str());
        g.at(fft::bin_of(kx, grid_n), fft::bin_of(ky, grid_n)) += c;
    }
    fft::transform2(g, +1);  // synthesis: psi(x_j) = sum psi_n e^{i n.x_j}
    return g;
}

// Inverse of to_grid; modes beyond the cutoff are discarded and their
// l1 mass is reported through *truncated_l1 when given.
inline FourierField2D from_grid(const fft::Grid2& g, Frame frame, int cutoff, int stride = 1,
                                double* truncated_l1 = nullptr) {
    const int M = g.n;
    fft::Grid2 tmp = g;
    fft::transform2(tmp, -1);
    const double scale = 1.0 / (double(M) * double(M));
    FourierField2D out(frame, cutoff, stride);
    double dropped = 0.0;
    for (int by = 0; by < M; ++by) {
        for (int bx = 0; bx < M; ++bx) {
            Complex c = tmp.at(bx, by) * scale;
            if (c == Complex(0.0, 0.0)) continue;
            LatticePoint n{stride * fft::freq_of(bx, M), stride * fft::freq_of(by, M)};
            bool keep = n.linf() <= cutoff && !(n.is_zero() && frame_excludes_zero(frame));
            if (keep)
                out.set(n, c);
            else
                dropped += std::abs(c);
        }
    }
    if (truncated_l1) *truncated_l1 = dropped;
    return out;
}

// Max grid modulus; together with wiener_norm this exposes the embedding
// ||f||_inf <= ||f||_l1.
inline double sup_norm_on_grid(const FourierField2D& f, int grid_n = 0) {
    int q = f.stride();
    int K = 0;
    for (auto& [n, c] : f.coeffs()) K = std::max(K, std::max(std::abs(n.x / q), std::abs(n.y / q)));
    if (grid_n == 0) grid_n = fft::next_pow2(std::max(4, 2 * K + 2));
    fft::Grid2 g = to_grid(f, grid_n);
    double m = 0.0;
    for (auto& v : g.v) m = std::max(m, std::abs(v));
    return m;
}

// Pointwise product via sparse convolution, truncated to the cutoff of the
// result (modes beyond it are dropped).
inline FourierField2D field_product(const FourierField2D& a, const FourierField2D& b,
                                    Frame frame, int cutoff) {
    int stride = (a.stride() == b.stride()) ? a.stride() : 1;
    FourierField2D out(frame, cutoff, stride);
    for (auto& [n, c] : a.coeffs()) {
        for (auto& [m, d] : b.coeffs()) {
            LatticePoint s = n + m;
            if (s.linf() > cutoff) continue;
            if (s.is_zero() && frame_excludes_zero(frame)) continue;
            out.add(s, c * d);
        }
    }
    return out;
}

// --- serialization -----------------------------------------------------

inline nlohmann::json field_to_json(const FourierField2D& f) {
    nlohmann::json entries = nlohmann::json::array();
    for (auto& [n, c] : f.coeffs())
        entries.push_back({n.x, n.y, c.real(), c.imag()});
    return {{"frame", frame_name(f.frame())},
            {"stride", f.stride()},
            {"cutoff", f.cutoff()},
            {"entries", entries}};
}

inline FourierField2D field_from_json(const nlohmann::json& j) {
    FourierField2D f(frame_from_name(j.at("frame").get<std::string>()),
                     j.at("cutoff").get<int>(), j.at("stride").get<int>());
    for (auto& e : j.at("entries"))
        f.set({e.at(0).get<int>(), e.at(1).get<int>()},
              Complex(e.at(2).get<double>(), e.at(3).get<double>()));
    return f;
}

}  // namespace qhdlab
