#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace qhdlab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define QHDLAB_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                                \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

QHDLAB_DEFINE_ERROR(FieldError);
QHDLAB_DEFINE_ERROR(RadiusExceeded);
QHDLAB_DEFINE_ERROR(TruncationNotConverged);
QHDLAB_DEFINE_ERROR(NonIntegerChildren);
QHDLAB_DEFINE_ERROR(DegenerateRectangle);
QHDLAB_DEFINE_ERROR(ConstructionFailed);
QHDLAB_DEFINE_ERROR(ZeroMode);
QHDLAB_DEFINE_ERROR(MomentumViolation);
QHDLAB_DEFINE_ERROR(ZeroDivisor);
QHDLAB_DEFINE_ERROR(SupportMismatch);
QHDLAB_DEFINE_ERROR(StepFailure);
QHDLAB_DEFINE_ERROR(CutoffOverflow);
QHDLAB_DEFINE_ERROR(VacuumAtZeroMode);
QHDLAB_DEFINE_ERROR(MassMismatch);
QHDLAB_DEFINE_ERROR(VacuumDetected);
QHDLAB_DEFINE_ERROR(HypothesisViolated);
QHDLAB_DEFINE_ERROR(ConfigError);
QHDLAB_DEFINE_ERROR(ExperimentFailed);

#undef QHDLAB_DEFINE_ERROR

// Point of the integer frequency lattice Z^2.
struct LatticePoint {
    int x = 0;
    int y = 0;

    friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) {
        return {a.x + b.x, a.y + b.y};
    }
    friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) {
        return {a.x - b.x, a.y - b.y};
    }
    friend constexpr LatticePoint operator*(int k, LatticePoint a) {
        return {k * a.x, k * a.y};
    }
    constexpr LatticePoint operator-() const { return {-x, -y}; }
    friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
    friend constexpr auto operator<=>(LatticePoint, LatticePoint) = default;

    constexpr std::int64_t norm2() const {
        return std::int64_t(x) * x + std::int64_t(y) * y;
    }
    constexpr std::int64_t dot(LatticePoint o) const {
        return std::int64_t(x) * o.x + std::int64_t(y) * o.y;
    }
    constexpr bool is_zero() const { return x == 0 && y == 0; }
    constexpr int linf() const {
        int ax = x < 0 ? -x : x, ay = y < 0 ? -y : y;
        return ax > ay ? ax : ay;
    }
    // Multiplication by i under the identification (x, y) <-> x + iy.
    constexpr LatticePoint rot90() const { return {-y, x}; }

    std::string str() const {
        return "(" + std::to_string(x) + "," + std::to_string(y) + ")";
    }
};

// Japanese bracket <n> = sqrt(1 + |n|^2).
inline double jbracket(LatticePoint n) {
    return std::sqrt(1.0 + double(n.norm2()));
}

struct LatticePointHash {
    std::size_t operator()(LatticePoint p) const {
        std::uint64_t v = (std::uint64_t(std::uint32_t(p.x)) << 32) | std::uint32_t(p.y);
        v ^= v >> 33;
        v *= 0xff51afd7ed558ccdULL;
        v ^= v >> 33;
        return std::size_t(v);
    }
};

}  // namespace qhdlab
