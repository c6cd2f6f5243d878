#pragma once

#include <vector>

#include "cics/common.hpp"
#include "cics/dist.hpp"

namespace cics {

// Piecewise-linear clamp-expectation curve.
//  Min mode: f(y) = E[min(y, W)] — concave, nondecreasing, slopes 1 -> 0.
//  Max mode: f(y) = E[max(y, W)] — convex, nondecreasing, slopes 0 -> 1.
// Stored as breakpoints (y[i], value f[i], slope s[i] to the right of y[i])
// with y[0] == 0. Left of y[0] the slope is 1 (min) / 0 (max); right of the
// last breakpoint the final slope extends.
struct Curve {
    Mode mode = Mode::Min;
    std::vector<double> y;  // strictly increasing, y[0] == 0
    std::vector<double> f;  // value at each breakpoint
    std::vector<double> s;  // slope to the right of each breakpoint

    double value_at(double yy) const;
    double slope_right(double yy) const;
    double value_at_zero() const { return f.front(); }
    // Plateau (min) / asymptote offset (max) is the mean of the underlying
    // distribution for well-formed curves.
};

// Exact curve of a distribution: breakpoints at the support atoms.
Curve curve_of(const Dist& w, Mode mode);

// Inverse of curve_of: recovers the distribution from slope changes.
// DomainError when slopes are out of range, non-monotone for the mode, or
// the tail slope is wrong (e.g. the identity ray has no distribution).
Dist dist_of(const Curve& f);

// Pointwise envelope: min of the curves (Min mode) / max (Max mode).
// Crossing points become breakpoints; collinear pieces are merged. All
// curves must share one mode.
Curve combine(const std::vector<Curve>& curves);

// Weighted sum  sum_i w_i * curve_i + constant  (weights nonnegative).
Curve affine_sum(const std::vector<std::pair<const Curve*, double>>& terms,
                 double constant, Mode mode);

// The identity ray f(y) = y, usable as a combine() input (it has no
// underlying distribution).
Curve identity_curve(Mode mode);

// alpha * f(y / alpha): scales the underlying atoms by alpha. Requires
// alpha >= 1 in Min mode, 0 < alpha <= 1 in Max mode.
Curve diag_scale(const Curve& f, double alpha);

struct DomCheck {
    bool ok = true;
    double witness = 0.0;  // y (second order) or quantile level (first order)
    double slack = 0.0;    // worst signed violation (positive = violated)
};

// Second-order check: f_A(y) <= f_B(y) for all y (Min mode) or
// f_A(y) >= f_B(y) (Max mode), decided exactly at breakpoint unions.
DomCheck dominates_2nd(const Dist& a, const Dist& b, Mode mode,
                       double tol = EPS);

// First-order check: quantile(a, q) <= quantile(b, q) for all q.
DomCheck dominates_1st(const Dist& a, const Dist& b, double tol = EPS);

// Smallest alpha >= 1 (Min) / largest alpha in (0,1] (Max) such that the
// committed curve is an alpha-approximation of the optimal curve:
//   Min: f_pi(alpha * y) <= alpha * f_M(y) for all y
//   Max: f_pi(alpha * y) >= alpha * f_M(y) for all y
// equivalently dominates_2nd(w_pi, scale_dist(w_m, alpha), mode).
// Bisection to 1e-9; DomainError if no alpha <= 1e6 works (Min mode).
double local_approx_factor(const Dist& w_pi, const Dist& w_m, Mode mode);

// Row-stochastic map from the atoms of one distribution onto another.
struct StochasticMap {
    std::vector<double> from;  // source atoms, ascending
    std::vector<Dist> to;      // image distribution per source atom
};

// Constructive witness of second-order dominance: a map m with
//   (a) pushforward of z under m equals x exactly, and
//   (b) per-row mean contraction E[m(z)] <= z (Min) / >= z (Max).
// Precondition: dominates_2nd(x, z, mode); DomainError (naming a witness
// point) otherwise. Max mode runs the Min construction on negated values.
StochasticMap sdom_map(const Dist& x, const Dist& z, Mode mode);

// Image of z under the map (rows matched to z's atoms within EPS).
Dist pushforward(const StochasticMap& m, const Dist& z);

// Row lookup by source value (within EPS); DomainError if absent.
const Dist& map_row(const StochasticMap& m, double z);

}  // namespace cics
