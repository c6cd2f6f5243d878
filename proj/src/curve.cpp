#include "cics/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cics {

namespace {

constexpr double KINK_TOL = 1e-12;  // slope change below this is collinear

double rel_scale(double a, double b) {
    return std::max({1.0, std::fabs(a), std::fabs(b)});
}

bool same_value(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * rel_scale(a, b);
}

}  // namespace

double Curve::value_at(double yy) const {
    if (yy <= y.front()) {
        double left = mode == Mode::Min ? 1.0 : 0.0;
        return f.front() + left * (yy - y.front());
    }
    auto it = std::upper_bound(y.begin(), y.end(), yy);
    std::size_t i = static_cast<std::size_t>(it - y.begin()) - 1;
    return f[i] + s[i] * (yy - y[i]);
}

double Curve::slope_right(double yy) const {
    if (yy < y.front()) return mode == Mode::Min ? 1.0 : 0.0;
    auto it = std::upper_bound(y.begin(), y.end(), yy);
    return s[static_cast<std::size_t>(it - y.begin()) - 1];
}

Curve curve_of(const Dist& w, Mode mode) {
    Curve c;
    c.mode = mode;
    std::size_t start = 0;
    double cum = 0.0;
    if (w.v.front() == 0.0) {
        cum = w.p.front();
        start = 1;
    }
    if (mode == Mode::Min) {
        c.y.push_back(0.0);
        c.f.push_back(0.0);
        c.s.push_back(1.0 - cum);
    } else {
        c.y.push_back(0.0);
        c.f.push_back(dist_mean(w));
        c.s.push_back(cum);
    }
    for (std::size_t i = start; i < w.size(); ++i) {
        double yy = w.v[i];
        double ff = c.f.back() + c.s.back() * (yy - c.y.back());
        cum += w.p[i];
        c.y.push_back(yy);
        c.f.push_back(ff);
        c.s.push_back(mode == Mode::Min ? 1.0 - cum : cum);
    }
    c.s.back() = mode == Mode::Min ? 0.0 : 1.0;  // exact tail slope
    return c;
}

Dist dist_of(const Curve& c) {
    const std::size_t n = c.y.size();
    if (n == 0) throw DomainError("empty curve");
    for (std::size_t i = 0; i < n; ++i) {
        if (c.s[i] < -1e-9 || c.s[i] > 1.0 + 1e-9)
            throw DomainError("curve slope outside [0, 1]");
        if (i > 0) {
            bool bad = c.mode == Mode::Min ? c.s[i] > c.s[i - 1] + 1e-9
                                           : c.s[i] < c.s[i - 1] - 1e-9;
            if (bad) throw DomainError("curve slopes not monotone for its mode");
        }
    }
    double tail = c.s.back();
    std::vector<std::pair<double, double>> atoms;
    if (c.mode == Mode::Min) {
        if (tail > 1e-9)
            throw DomainError("min-mode curve does not plateau: no distribution");
        double prev = 1.0;  // slope left of the first breakpoint
        for (std::size_t i = 0; i < n; ++i) {
            double drop = prev - std::min(prev, c.s[i]);
            if (drop > EPS_P) atoms.emplace_back(c.y[i], drop);
            prev = std::min(prev, c.s[i]);
        }
    } else {
        if (tail < 1.0 - 1e-9)
            throw DomainError("max-mode curve tail slope below 1: no distribution");
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rise = std::max(prev, c.s[i]) - prev;
            if (rise > EPS_P) atoms.emplace_back(c.y[i], rise);
            prev = std::max(prev, c.s[i]);
        }
    }
    double total = 0.0;
    for (auto& [v, p] : atoms) total += p;
    if (std::fabs(total - 1.0) > 1e-9)
        throw DomainError("curve slope changes do not sum to unit mass");
    return dist_from_weighted(atoms, EPS_P);
}

Curve identity_curve(Mode mode) {
    Curve c;
    c.mode = mode;
    c.y = {0.0};
    c.f = {0.0};
    c.s = {1.0};
    return c;
}

namespace {

std::vector<double> merged_grid(const std::vector<Curve>& curves) {
    std::vector<double> g;
    for (const auto& c : curves) g.insert(g.end(), c.y.begin(), c.y.end());
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double x : g) {
        if (out.empty() || !same_value(out.back(), x, 1e-12)) out.push_back(x);
    }
    return out;
}

// Append a breakpoint, collapsing coincident positions (last writer wins).
void push_bp(Curve& c, double y, double f, double s) {
    if (!c.y.empty() && same_value(c.y.back(), y, 1e-12)) {
        c.f.back() = f;
        c.s.back() = s;
        return;
    }
    c.y.push_back(y);
    c.f.push_back(f);
    c.s.push_back(s);
}

// Drop collinear interior breakpoints and repair FP-level slope wiggles; a
// real monotonicity violation is a bug in the envelope construction.
Curve normalized(Curve c) {
    Curve out;
    out.mode = c.mode;
    for (std::size_t i = 0; i < c.y.size(); ++i) {
        if (i > 0) {
            bool bad = c.mode == Mode::Min ? c.s[i] > out.s.back() + 1e-7
                                           : c.s[i] < out.s.back() - 1e-7;
            if (bad) throw std::logic_error("curve envelope lost concavity/convexity");
            c.s[i] = c.mode == Mode::Min ? std::min(c.s[i], out.s.back())
                                         : std::max(c.s[i], out.s.back());
        }
        if (i > 0 && std::fabs(c.s[i] - out.s.back()) <= KINK_TOL) {
            out.s.back() = c.s[i];  // keep the later, fresher slope
            continue;
        }
        push_bp(out, c.y[i], c.f[i], c.s[i]);
    }
    return out;
}

}  // namespace

Curve affine_sum(const std::vector<std::pair<const Curve*, double>>& terms,
                 double constant, Mode mode) {
    std::vector<Curve> cs;
    cs.reserve(terms.size());
    for (auto& [c, w] : terms) cs.push_back(*c);
    std::vector<double> grid = merged_grid(cs);
    Curve out;
    out.mode = mode;
    for (double x : grid) {
        double val = constant, slope = 0.0;
        for (auto& [c, w] : terms) {
            val += w * c->value_at(x);
            slope += w * c->slope_right(x);
        }
        push_bp(out, x, val, slope);
    }
    return out;
}

Curve combine(const std::vector<Curve>& curves) {
    if (curves.empty()) throw DomainError("combine needs at least one curve");
    const Mode mode = curves.front().mode;
    for (const auto& c : curves)
        if (c.mode != mode) throw DomainError("combine requires a single mode");
    const double sign = mode == Mode::Min ? 1.0 : -1.0;  // minimize sign*value

    std::vector<double> grid = merged_grid(curves);
    auto winner_at = [&](double x) {
        std::size_t best = 0;
        double bv = sign * curves[0].value_at(x), bs = sign * curves[0].slope_right(x);
        for (std::size_t j = 1; j < curves.size(); ++j) {
            double v = sign * curves[j].value_at(x), sl = sign * curves[j].slope_right(x);
            if (v < bv - 1e-12 * rel_scale(v, bv) ||
                (same_value(v, bv, 1e-12) && sl < bs)) {
                best = j;
                bv = v;
                bs = sl;
            }
        }
        return best;
    };

    Curve out;
    out.mode = mode;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double x = grid[gi];
        double seg_end = gi + 1 < grid.size() ? grid[gi + 1] : inf;
        std::size_t w = winner_at(x);
        push_bp(out, x, curves[w].value_at(x), curves[w].slope_right(x));
        // Chase crossings inside (x, seg_end), where every curve is affine.
        while (true) {
            double vx = curves[w].value_at(x), sw = curves[w].slope_right(x);
            double best_x = inf;
            std::size_t best_j = w;
            for (std::size_t j = 0; j < curves.size(); ++j) {
                if (j == w) continue;
                double vj = curves[j].value_at(x), sj = curves[j].slope_right(x);
                double gap = sign * (vj - vx);
                double closing = sign * (sw - sj);
                if (gap <= 1e-12 * rel_scale(vj, vx) || closing <= 1e-15) continue;
                double cx = x + gap / closing;
                const double bound = std::isinf(seg_end)
                                         ? seg_end
                                         : seg_end - 1e-12 * rel_scale(1.0, seg_end);
                if (cx < bound && cx < best_x) {
                    best_x = cx;
                    best_j = j;
                }
            }
            if (best_j == w) break;
            x = best_x;
            w = best_j;
            push_bp(out, x, curves[w].value_at(x), curves[w].slope_right(x));
        }
    }
    return normalized(out);
}

Curve diag_scale(const Curve& c, double alpha) {
    if (c.mode == Mode::Min && alpha < 1.0 - 1e-12)
        throw DomainError("min-mode diagonal scaling requires alpha >= 1");
    if (c.mode == Mode::Max && !(alpha > 0.0 && alpha <= 1.0 + 1e-12))
        throw DomainError("max-mode diagonal scaling requires alpha in (0, 1]");
    Curve out = c;
    for (double& yy : out.y) yy *= alpha;
    for (double& ff : out.f) ff *= alpha;
    return out;
}

DomCheck dominates_2nd(const Dist& a, const Dist& b, Mode mode, double tol) {
    std::vector<double> pts;
    pts.push_back(0.0);
    pts.insert(pts.end(), a.v.begin(), a.v.end());
    pts.insert(pts.end(), b.v.begin(), b.v.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Clamp cl = mode == Mode::Min ? Clamp::Min : Clamp::Max;
    DomCheck out;
    double worst = -std::numeric_limits<double>::infinity();
    for (double y : pts) {
        double fa = expected_clamp(a, y, cl);
        double fb = expected_clamp(b, y, cl);
        double viol = (mode == Mode::Min ? fa - fb : fb - fa) / rel_scale(fa, fb);
        if (viol > worst) {
            worst = viol;
            out.witness = y;
        }
    }
    out.slack = worst;
    out.ok = worst <= tol;
    return out;
}

DomCheck dominates_1st(const Dist& a, const Dist& b, double tol) {
    std::size_t i = 0, j = 0;
    double ca = a.p[0], cb = b.p[0];
    DomCheck out;
    double worst = -std::numeric_limits<double>::infinity();
    while (true) {
        double viol = (a.v[i] - b.v[j]) / rel_scale(a.v[i], b.v[j]);
        if (viol > worst) {
            worst = viol;
            out.witness = std::min(ca, cb);
        }
        bool last_a = i + 1 == a.size(), last_b = j + 1 == b.size();
        if (last_a && last_b) break;
        if (std::fabs(ca - cb) <= 1e-12 || (last_a && ca <= cb) || (last_b && cb <= ca)) {
            if (!last_a) ca += a.p[++i];
            if (!last_b) cb += b.p[++j];
        } else if (ca < cb) {
            ca += a.p[++i];
        } else {
            cb += b.p[++j];
        }
    }
    out.slack = worst;
    out.ok = worst <= tol;
    return out;
}

double local_approx_factor(const Dist& w_pi, const Dist& w_m, Mode mode) {
    auto feasible = [&](double alpha) {
        return dominates_2nd(w_pi, scale_dist(w_m, alpha), mode, EPS).ok;
    };
    if (feasible(1.0)) return 1.0;
    if (mode == Mode::Min) {
        double lo = 1.0, hi = 2.0;
        while (!feasible(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e6)
                throw DomainError("no local approximation factor below 1e6");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
            double mid = 0.5 * (lo + hi);
            (feasible(mid) ? hi : lo) = mid;
        }
        return hi;
    }
    double hi = 1.0, lo = 0.5;
    while (!feasible(lo)) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-9)
            throw DomainError("no local approximation factor above 1e-9");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

namespace {

struct WorkAtom {
    double z;
    double mass;
    std::vector<std::pair<int, double>> src;  // original row -> mass
};

double f_work(const std::vector<WorkAtom>& w, double y) {
    double s = 0.0;
    for (const auto& a : w) s += a.mass * std::min(y, a.z);
    return s;
}

// Insert mass at `value` keeping atoms sorted, merging nearby values.
void deposit(std::vector<WorkAtom>& w, double value, double mass,
             std::vector<std::pair<int, double>> src) {
    if (mass <= 0.0) return;
    auto it = std::lower_bound(
        w.begin(), w.end(), value,
        [](const WorkAtom& a, double v) { return a.z < v; });
    if (it != w.end() && same_value(it->z, value, 1e-10)) {
        it->mass += mass;
        for (auto& sm : src) it->src.push_back(sm);
        return;
    }
    if (it != w.begin() && same_value(std::prev(it)->z, value, 1e-10)) {
        auto p = std::prev(it);
        p->mass += mass;
        for (auto& sm : src) p->src.push_back(sm);
        return;
    }
    w.insert(it, WorkAtom{value, mass, std::move(src)});
}

StochasticMap finish_map(const Dist& x, const Dist& z,
                         const std::vector<WorkAtom>& w) {
    std::vector<std::vector<std::pair<double, double>>> rows(z.size());
    for (const auto& atom : w) {
        // Snap the final value onto x's support.
        auto it = std::lower_bound(x.v.begin(), x.v.end(), atom.z);
        double best = std::numeric_limits<double>::infinity();
        double snapped = atom.z;
        for (auto cand : {it, it == x.v.begin() ? it : std::prev(it)}) {
            if (cand == x.v.end()) continue;
            double d = std::fabs(*cand - atom.z);
            if (d < best) {
                best = d;
                snapped = *cand;
            }
        }
        if (best > 1e-6 * rel_scale(snapped, atom.z))
            throw std::logic_error("dominance map produced a value off the target support");
        for (const auto& [r, m] : atom.src)
            if (m > 0.0) rows[static_cast<std::size_t>(r)].emplace_back(snapped, m);
    }
    StochasticMap out;
    out.from = z.v;
    out.to.reserve(z.size());
    for (std::size_t r = 0; r < z.size(); ++r)
        out.to.push_back(dist_from_weighted(rows[r], EPS_P));
    return out;
}

StochasticMap sdom_map_min(const Dist& x, const Dist& z) {
    std::vector<WorkAtom> w;
    w.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        w.push_back({z.v[i], z.p[i], {{static_cast<int>(i), z.p[i]}}});

    auto take_atom = [&](std::size_t idx) {
        WorkAtom a = std::move(w[idx]);
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(idx));
        return a;
    };

    for (int guard = 0;; ++guard) {
        if (guard > 100000)
            throw std::logic_error("dominance map failed to converge");
        // First index where the working atoms disagree with x.
        std::size_t i = 0;
        while (i < x.size() && i < w.size() && same_value(x.v[i], w[i].z, 1e-9) &&
               std::fabs(x.p[i] - w[i].mass) <= 1e-9)
            ++i;
        if (i >= x.size() || i >= w.size()) break;  // fully matched
        double a = x.v[i];
        // Interpolation residue from earlier splits can leave working atoms an
        // ulp away from `a`; snap and merge them onto it so the crossing
        // search below never sees a zero-width interval just above `a`.
        bool snapped = false;
        for (std::size_t k = i; k < w.size() && same_value(w[k].z, a, 1e-9);) {
            if (w[k].z != a) {
                w[k].z = a;
                snapped = true;
            }
            if (k > i && w[k - 1].z == a) {
                w[k - 1].mass += w[k].mass;
                for (auto& sm : w[k].src) w[k - 1].src.push_back(sm);
                w.erase(w.begin() + static_cast<std::ptrdiff_t>(k));
                snapped = true;
            } else {
                ++k;
            }
        }
        if (snapped) continue;  // re-scan: the snap may have completed a match
        if (i + 1 == x.size()) {
            // Everything at or above x's top atom maps onto it.
            std::vector<std::pair<int, double>> src;
            double mass = 0.0;
            while (w.size() > i) {
                WorkAtom atom = take_atom(w.size() - 1);
                mass += atom.mass;
                for (auto& sm : atom.src) src.push_back(sm);
            }
            deposit(w, a, mass, std::move(src));
            break;
        }
        // Chord of f_x over [x_i, x_{i+1}], extended as a line.
        double fa = expected_clamp(x, a, Clamp::Min);
        double fx1 = expected_clamp(x, x.v[i + 1], Clamp::Min);
        double lslope = (fx1 - fa) / (x.v[i + 1] - a);
        auto line = [&](double yy) { return fa + lslope * (yy - a); };
        // Second intersection of the line with the working curve.
        double b = std::numeric_limits<double>::quiet_NaN();
        double prev_y = a, prev_d = 0.0;
        for (std::size_t k = 0; k <= w.size(); ++k) {
            double t, dt;
            if (k < w.size()) {
                t = w[k].z;
                if (t <= a) continue;
                dt = f_work(w, t) - line(t);
            } else {
                // Beyond the top atom the working curve is flat; the line
                // keeps climbing (lslope > 0 off the plateau), so solve there.
                double plateau = f_work(w, w.back().z);
                t = a + (plateau - fa) / lslope;
                dt = 0.0;
                if (t <= prev_y) t = prev_y;  // FP guard
            }
            if (dt <= 1e-15 * rel_scale(f_work(w, t), line(t))) {
                b = dt < prev_d ? prev_y + prev_d * (t - prev_y) / (prev_d - dt) : t;
                break;
            }
            prev_y = t;
            prev_d = dt;
        }
        if (!(b > a)) throw std::logic_error("dominance map found no crossing");
        // Split interior atoms of (a, b): each leftmost interior atom goes
        // partly to a and partly to the next support point (the final one to
        // b itself), in an exactly mean-preserving way.
        bool progressed = false;
        while (true) {
            std::size_t j0 = w.size();
            std::size_t interior = 0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                double tol = 1e-12 * rel_scale(w[k].z, b);
                if (w[k].z > a + tol && w[k].z < b - tol) {
                    if (interior == 0) j0 = k;
                    ++interior;
                }
            }
            if (interior == 0) break;
            double bprime = interior >= 2 ? w[j0 + 1].z : b;
            WorkAtom atom = take_atom(j0);
            // lambda = (s1 - s)/(s1 - s2) over the working curve's slopes
            // collapses algebraically to the mean-preserving weight below.
            double lambda = (bprime - atom.z) / (bprime - a);
            if (lambda > 1.0) lambda = 1.0;
            if (lambda < 0.0) lambda = 0.0;
            progressed = true;
            if (lambda >= 1.0 - 1e-12) {
                deposit(w, a, atom.mass, std::move(atom.src));
                continue;
            }
            if (lambda <= 1e-12) {
                deposit(w, bprime, atom.mass, std::move(atom.src));
                continue;
            }
            std::vector<std::pair<int, double>> src_a, src_b;
            for (auto& [r, m] : atom.src) {
                src_a.emplace_back(r, lambda * m);
                src_b.emplace_back(r, (1.0 - lambda) * m);
            }
            deposit(w, a, lambda * atom.mass, std::move(src_a));
            deposit(w, bprime, (1.0 - lambda) * atom.mass, std::move(src_b));
        }
        if (!progressed)
            throw std::logic_error("dominance map stalled without interior atoms");
    }
    return finish_map(x, z, w);
}

}  // namespace

StochasticMap sdom_map(const Dist& x, const Dist& z, Mode mode) {
    auto dc = dominates_2nd(x, z, mode, EPS);
    if (!dc.ok) {
        std::ostringstream os;
        os << "second-order dominance precondition fails at y=" << dc.witness
           << " (violation " << dc.slack << ")";
        throw DomainError(os.str());
    }
    if (mode == Mode::Min) return sdom_map_min(x, z);
    // Max mode: reflect values, run the min construction, reflect back.
    double top = std::max(x.max_support(), z.max_support());
    std::vector<std::pair<double, double>> xn, zn;
    for (std::size_t i = 0; i < x.size(); ++i)
        xn.emplace_back(top - x.v[i], x.p[i]);
    for (std::size_t i = 0; i < z.size(); ++i)
        zn.emplace_back(top - z.v[i], z.p[i]);
    Dist xr = dist_from_weighted(xn, EPS_P), zr = dist_from_weighted(zn, EPS_P);
    StochasticMap neg = sdom_map_min(xr, zr);
    StochasticMap out;
    out.from = z.v;
    out.to.resize(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) {
        double zneg = top - z.v[r];
        const Dist& row = map_row(neg, zneg);
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t k = 0; k < row.size(); ++k) {
            double val = top - row.v[k];
            // Snap back onto x's support.
            double best = std::numeric_limits<double>::infinity(), snapped = val;
            for (double cand : x.v) {
                double d = std::fabs(cand - val);
                if (d < best) {
                    best = d;
                    snapped = cand;
                }
            }
            if (best > 1e-6 * rel_scale(snapped, val))
                throw std::logic_error("reflected dominance map missed the target support");
            atoms.emplace_back(snapped, row.p[k]);
        }
        out.to[r] = dist_from_weighted(atoms, EPS_P);
    }
    return out;
}

const Dist& map_row(const StochasticMap& m, double z) {
    for (std::size_t i = 0; i < m.from.size(); ++i)
        if (same_value(m.from[i], z, EPS)) return m.to[i];
    std::ostringstream os;
    os << "no map row for source value " << z;
    throw DomainError(os.str());
}

Dist pushforward(const StochasticMap& m, const Dist& z) {
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Dist& row = map_row(m, z.v[i]);
        for (std::size_t k = 0; k < row.size(); ++k)
            atoms.emplace_back(row.v[k], z.p[i] * row.p[k]);
    }
    return dist_from_weighted(atoms);
}

}  // namespace cics
