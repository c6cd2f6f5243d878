#include "cics/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cics {

namespace {

bool values_equal(double a, double b, double tol) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

Dist build_sorted(std::vector<std::pair<double, double>> atoms, double merge_tol) {
    std::sort(atoms.begin(), atoms.end());
    Dist d;
    double total = 0.0;
    for (const auto& [val, mass] : atoms) {
        if (!d.v.empty() && values_equal(d.v.back(), val, merge_tol)) {
            d.p.back() += mass;
        } else {
            d.v.push_back(val);
            d.p.push_back(mass);
        }
        total += mass;
    }
    for (double& q : d.p) q /= total;
    return d;
}

}  // namespace

std::vector<std::pair<double, double>> Dist::atoms() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], p[i]);
    return out;
}

Dist make_dist(const std::vector<std::pair<double, double>>& atoms) {
    if (atoms.empty()) throw DomainError("distribution needs at least one atom");
    double total = 0.0;
    for (const auto& [val, mass] : atoms) {
        if (!(val >= 0.0)) {
            std::ostringstream os;
            os << "atom value must be nonnegative, got " << val;
            throw DomainError(os.str());
        }
        if (!(mass > 0.0)) {
            std::ostringstream os;
            os << "atom probability must be positive, got " << mass;
            throw DomainError(os.str());
        }
        total += mass;
    }
    if (std::fabs(total - 1.0) > EPS_P) {
        std::ostringstream os;
        os << "atom probabilities sum to " << total << ", expected 1";
        throw DomainError(os.str());
    }
    return build_sorted(atoms, EPS_P);
}

Dist dist_from_weighted(const std::vector<std::pair<double, double>>& atoms,
                        double merge_tol) {
    std::vector<std::pair<double, double>> kept;
    kept.reserve(atoms.size());
    double total = 0.0;
    for (const auto& [val, mass] : atoms) {
        if (mass <= 0.0) continue;
        kept.emplace_back(val, mass);
        total += mass;
    }
    if (kept.empty() || !(total > 0.0))
        throw DomainError("weighted atom list has no positive mass");
    return build_sorted(std::move(kept), merge_tol);
}

double dist_mean(const Dist& d) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) m += d.p[i] * d.v[i];
    return m;
}

Moments moments(const Dist& d) { return {dist_mean(d), quantile(d, 0.5)}; }

double expected_shortfall(const Dist& d, double t, Side side) {
    double s = 0.0;
    if (side == Side::Below) {
        for (std::size_t i = 0; i < d.size() && d.v[i] < t; ++i)
            s += d.p[i] * (t - d.v[i]);
    } else {
        for (std::size_t i = d.size(); i-- > 0 && d.v[i] > t;)
            s += d.p[i] * (d.v[i] - t);
    }
    return s;
}

double expected_clamp(const Dist& d, double y, Clamp c) {
    double s = 0.0;
    if (c == Clamp::Min) {
        for (std::size_t i = 0; i < d.size(); ++i) s += d.p[i] * std::min(y, d.v[i]);
    } else {
        for (std::size_t i = 0; i < d.size(); ++i) s += d.p[i] * std::max(y, d.v[i]);
    }
    return s;
}

double solve_index(const Dist& d, double c, Side side) {
    if (c < 0.0) throw DomainError("index equation needs a nonnegative cost");
    if (side == Side::Below) {
        if (c == 0.0) return d.min_support();
        // Walk E[(g - X)^+] = mass*g - weighted_sum over segments between atoms.
        double mass = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i + 1 < d.size(); ++i) {
            mass += d.p[i];
            wsum += d.p[i] * d.v[i];
            double at_next = mass * d.v[i + 1] - wsum;
            if (at_next >= c) return (c + wsum) / mass;
        }
        // Beyond the top atom the shortfall is g - mean.
        return c + dist_mean(d);
    }
    if (c == 0.0) return d.max_support();
    double mean = dist_mean(d);
    if (c > mean + EPS_P) {
        std::ostringstream os;
        os << "index equation infeasible: cost " << c << " exceeds expected value "
           << mean;
        throw DomainError(os.str());
    }
    // Walk E[(X - h)^+] = suffix_weighted_sum - h*suffix_mass from the top.
    double mass = 0.0, wsum = 0.0;
    for (std::size_t i = d.size(); i-- > 1;) {
        mass += d.p[i];
        wsum += d.p[i] * d.v[i];
        double at_prev = wsum - mass * d.v[i - 1];
        if (at_prev >= c) return (wsum - c) / mass;
    }
    // Below the bottom atom the shortfall is mean - h; clamp h at zero.
    return std::max(0.0, mean - c);
}

Split condition_split(const Dist& d, double t) {
    double tol = EPS_P * std::max({1.0, std::fabs(t), std::fabs(d.max_support())});
    if (t < d.min_support() - tol || t >= d.max_support() - tol) {
        std::ostringstream os;
        os << "split point " << t << " outside [min support, max support) = ["
           << d.min_support() << ", " << d.max_support() << ")";
        throw DomainError(os.str());
    }
    Split s;
    s.p_le = 0.0;
    s.p_gt = 0.0;
    std::vector<std::pair<double, double>> le, gt;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.v[i] <= t + tol) {
            le.emplace_back(d.v[i], d.p[i]);
            s.p_le += d.p[i];
        } else {
            gt.emplace_back(d.v[i], d.p[i]);
            s.p_gt += d.p[i];
        }
    }
    s.le = dist_from_weighted(le, EPS_P);
    s.gt = dist_from_weighted(gt, EPS_P);
    return s;
}

double quantile(const Dist& d, double q) {
    if (q > 1.0 + EPS) throw DomainError("quantile level above 1");
    if (q <= 0.0) return d.min_support();
    double cum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cum += d.p[i];
        if (cum >= q - EPS) return d.v[i];
    }
    return d.max_support();
}

double cdf(const Dist& d, double x) {
    double cum = 0.0;
    for (std::size_t i = 0; i < d.size() && d.v[i] <= x; ++i) cum += d.p[i];
    return cum;
}

Dist scale_dist(const Dist& d, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("scale factor must be positive");
    Dist out = d;
    for (double& val : out.v) val *= alpha;
    return out;
}

Dist shift_dist(const Dist& d, double delta) {
    Dist out = d;
    for (double& val : out.v) {
        val += delta;
        if (val < 0.0) throw DomainError("shift would create a negative value");
    }
    return out;
}

Dist clamp_dist(const Dist& d, double y, Clamp c) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double val = c == Clamp::Min ? std::min(y, d.v[i]) : std::max(y, d.v[i]);
        atoms.emplace_back(val, d.p[i]);
    }
    return dist_from_weighted(atoms, EPS_P);
}

Dist mix_dists(const std::vector<std::pair<const Dist*, double>>& components) {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& [dist, w] : components) {
        if (w <= 0.0) continue;
        for (std::size_t i = 0; i < dist->size(); ++i)
            atoms.emplace_back(dist->v[i], w * dist->p[i]);
    }
    return dist_from_weighted(atoms);
}

bool dists_close(const Dist& a, const Dist& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!close(a.v[i], b.v[i], tol) || !close(a.p[i], b.p[i], tol)) return false;
    }
    return true;
}

}  // namespace cics
