#pragma once

#include <stdexcept>
#include <string>

namespace cics {

// Value-comparison tolerance: all "exact" checks in tests and all geometric
// decisions (dominance, tie-breaks) treat differences within EPS as equal.
inline constexpr double EPS = 1e-9;
// Probability-mass tolerance: transition rows and distributions must sum to
// one within EPS_P before renormalization.
inline constexpr double EPS_P = 1e-12;

// Invalid inputs or parameter combinations outside an operation's domain
// (negative values, infeasible index equations, malformed curves, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// An enumeration or state-space size exceeded its documented cap.
struct CapError : std::runtime_error {
    explicit CapError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed serialized input (JSON/CSV/commit specs).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Mode { Min, Max };

inline const char* mode_name(Mode m) { return m == Mode::Min ? "min" : "max"; }

// Equality up to absolute-plus-relative slack at the standard tolerance.
inline bool close(double a, double b, double tol = EPS) {
    double scale = 1.0;
    double aa = a < 0 ? -a : a, ab = b < 0 ? -b : b;
    if (aa > scale) scale = aa;
    if (ab > scale) scale = ab;
    return (a > b ? a - b : b - a) <= tol * scale;
}

}  // namespace cics
