#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cics/common.hpp"

namespace cics {

// Finite discrete distribution over nonnegative reals. Atoms are kept sorted
// by value with strictly positive probabilities summing to one.
struct Dist {
    std::vector<double> v;  // atom values, strictly increasing
    std::vector<double> p;  // atom probabilities, positive, sum == 1

    std::size_t size() const { return v.size(); }
    double min_support() const { return v.front(); }
    double max_support() const { return v.back(); }
    std::vector<std::pair<double, double>> atoms() const;
};

enum class Side { Below, Above };
enum class Clamp { Min, Max };

// Strict constructor for user-supplied atom lists: requires nonnegative
// values, positive probabilities, and total mass within EPS_P of one.
// Duplicate values are merged; mass is renormalized to exactly one.
Dist make_dist(const std::vector<std::pair<double, double>>& atoms);

// Lenient constructor for internally computed weighted atom lists (mixtures,
// pushforwards): drops zero-mass atoms, merges values within `merge_tol`
// (absolute + relative), and renormalizes. Total mass must be positive.
Dist dist_from_weighted(const std::vector<std::pair<double, double>>& atoms,
                        double merge_tol = EPS);

struct Moments {
    double mean;
    double median;
};

Moments moments(const Dist& d);
double dist_mean(const Dist& d);

// Sum over atoms of p * (t - v)^+ (Below) or p * (v - t)^+ (Above).
double expected_shortfall(const Dist& d, double t, Side side);

// E[min(y, X)] (Clamp::Min) or E[max(y, X)] (Clamp::Max).
double expected_clamp(const Dist& d, double y, Clamp c);

// Inverse of expected_shortfall in its threshold argument.
//  Below: smallest g with E[(g - X)^+] = c; for c = 0 returns min support.
//  Above: smallest h >= 0 with E[(X - h)^+] = c; for c = 0 returns max
//         support; errors (DomainError) when c exceeds E[X] so no
//         nonnegative solution exists.
double solve_index(const Dist& d, double c, Side side);

struct Split {
    Dist le;        // conditional distribution given X <= t
    double p_le;    // P(X <= t)
    Dist gt;        // conditional distribution given X > t
    double p_gt;    // P(X > t)
};

// Condition on {X <= t} / {X > t}. Requires min support <= t < max support
// so both sides are nonempty.
Split condition_split(const Dist& d, double t);

// Smallest atom value whose CDF reaches q (within EPS); q <= 0 gives the
// minimum support. Requires q <= 1 + EPS.
double quantile(const Dist& d, double q);

double cdf(const Dist& d, double x);

// Atom values scaled by alpha > 0, probabilities unchanged.
Dist scale_dist(const Dist& d, double alpha);

// Atom values shifted by delta (resulting values must stay nonnegative).
Dist shift_dist(const Dist& d, double delta);

// Pushforward of d under min(v, y) / max(v, y).
Dist clamp_dist(const Dist& d, double y, Clamp c);

// Mixture sum_i w_i * components_i with nonnegative weights summing to ~1.
Dist mix_dists(const std::vector<std::pair<const Dist*, double>>& components);

bool dists_close(const Dist& a, const Dist& b, double tol = EPS);

}  // namespace cics
