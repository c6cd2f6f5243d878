#include "cics/variants.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "cics/curve.hpp"

namespace cics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Largest y where the open- and peek-committed optimality curves still agree:
// the maximal root of D(y) = cp - co + E[min(y, X+co)] - E[min(y, X)].
// D is nondecreasing, D(0) = cp - co <= 0, and D = cp > 0 past the support.
double pbpi_cross(const Dist& d, double co, double cp) {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (double v : d.v) {
        pts.push_back(v);
        pts.push_back(v + co);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const Dist shifted = shift_dist(d, co);
    auto D = [&](double y) {
        return cp - co + expected_clamp(shifted, y, Clamp::Min) -
               expected_clamp(d, y, Clamp::Min);
    };
    std::size_t last = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (D(pts[i]) <= 1e-12) last = i;
    }
    const double dk = D(pts[last]);
    if (last + 1 >= pts.size()) return pts[last];  // D hits cp right after
    const double dn = D(pts[last + 1]);
    if (dn <= dk + 1e-15) return pts[last + 1];
    return pts[last] - dk * (pts[last + 1] - pts[last]) / (dn - dk);
}

}  // namespace

PbpiBox make_pbpi_box(const Dist& d, double open_cost, double peek_cost) {
    if (!(open_cost > 0.0)) throw DomainError("peek-or-open box needs open_cost > 0");
    if (!(peek_cost > 0.0)) throw DomainError("peek-or-open box needs peek_cost > 0");
    PbpiBox b;
    b.dist = d;
    b.open_cost = open_cost;
    b.peek_cost = peek_cost;
    b.peek_dropped = peek_cost >= open_cost;
    b.g_open = solve_index(d, open_cost, Side::Below);
    b.g_peek = solve_index(shift_dist(d, open_cost), peek_cost, Side::Below);
    b.y_cross = b.peek_dropped ? kNaN : pbpi_cross(d, open_cost, peek_cost);
    return b;
}

Mdp build_pbpi(const PbpiBox& b) {
    Mdp m;
    m.nodes.emplace_back();  // root
    MdpAction open;
    open.label = "open";
    open.cost = b.open_cost;
    for (std::size_t i = 0; i < b.dist.size(); ++i) {
        m.nodes.push_back(MdpNode{b.dist.v[i], {}});
        open.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, b.dist.p[i]);
    }
    m.nodes[0].actions.push_back(std::move(open));
    if (!b.peek_dropped) {
        MdpAction peek;
        peek.label = "peek";
        peek.cost = b.peek_cost;
        for (std::size_t i = 0; i < b.dist.size(); ++i) {
            MdpNode seen;  // value known; opening is the only remaining move
            MdpAction take;
            take.label = "open";
            take.cost = b.open_cost;
            m.nodes.push_back(MdpNode{b.dist.v[i], {}});
            take.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, 1.0);
            seen.actions.push_back(std::move(take));
            m.nodes.push_back(std::move(seen));
            peek.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, b.dist.p[i]);
        }
        m.nodes[0].actions.push_back(std::move(peek));
    }
    require_valid(m);
    return m;
}

PbpiRule pbpi_commit(const PbpiBox& b) {
    PbpiRule r;
    r.dominated = b.peek_dropped || b.g_peek >= b.g_open - 1e-12;
    const double co = b.open_cost, cp = b.peek_cost;
    // g_peek >= open_cost > 0: the support of X + open_cost starts there.
    r.lhs = (co / cp) * (1.0 - co / b.g_peek);
    r.rhs = 1.0 + std::min(cp / co, co / b.g_peek);
    r.open = r.dominated || r.lhs <= r.rhs;
    return r;
}

Commitment pbpi_commitment(const PbpiBox& b, bool open) {
    const Mdp m = build_pbpi(b);
    std::map<int, int> pick;
    for (std::size_t s = 0; s < m.nodes.size(); ++s) {
        if (m.nodes[s].terminal()) continue;
        pick[static_cast<int>(s)] = 0;
    }
    if (!open) {
        if (b.peek_dropped) throw DomainError("peek action was dropped for this box");
        pick[Mdp::root] = 1;
    }
    return deterministic_commitment(m, pick);
}

std::pair<std::vector<int>, std::vector<int>> pbpi_phi_partition(
    const std::vector<PbpiBox>& boxes) {
    std::vector<int> open_side, peek_side;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const double co = boxes[i].open_cost, cp = boxes[i].peek_cost;
        if (co / cp <= 1.0 + cp / co)
            open_side.push_back(static_cast<int>(i));
        else
            peek_side.push_back(static_cast<int>(i));
    }
    return {open_side, peek_side};
}

// ---------------------------------------------------------------------------

namespace {

int additive_node(const AdditiveBox& b, Mdp& m, unsigned remaining, double acc,
                  std::size_t node_cap) {
    if (m.nodes.size() >= node_cap)
        throw CapError("additive box expansion exceeds node cap");
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.emplace_back();
    if (remaining == 0u) {
        m.nodes[id].value = acc;
        return id;
    }
    std::vector<MdpAction> acts;
    for (std::size_t i = 0; i < b.components.size(); ++i) {
        if (!(remaining >> i & 1u)) continue;
        MdpAction a;
        a.label = "probe " + std::to_string(i);
        a.cost = b.components[i].second;
        const Dist& d = b.components[i].first;
        for (std::size_t j = 0; j < d.size(); ++j) {
            int child = additive_node(b, m, remaining & ~(1u << i), acc + d.v[j], node_cap);
            a.next.emplace_back(child, d.p[j]);
        }
        acts.push_back(std::move(a));
    }
    m.nodes[id].actions = std::move(acts);
    return id;
}

}  // namespace

Mdp build_additive(const AdditiveBox& b, std::size_t node_cap) {
    if (b.components.empty()) throw DomainError("additive box needs at least one component");
    if (b.components.size() > 20) throw CapError("additive box component count exceeds 20");
    Mdp m;
    additive_node(b, m, (1u << b.components.size()) - 1u, 0.0, node_cap);
    require_valid(m);
    return m;
}

Chain additive_order_chain(const AdditiveBox& b, const std::vector<int>& order) {
    if (order.size() != b.components.size())
        throw DomainError("order must list every component exactly once");
    std::vector<bool> seen(b.components.size(), false);
    for (int i : order) {
        if (i < 0 || static_cast<std::size_t>(i) >= b.components.size() || seen[i])
            throw DomainError("order must list every component exactly once");
        seen[i] = true;
    }
    Mdp m;
    // One chain node per realized prefix; the terminal holds the full sum.
    auto rec = [&](auto&& self, std::size_t k, double acc) -> int {
        const int id = static_cast<int>(m.nodes.size());
        m.nodes.emplace_back();
        if (k == order.size()) {
            m.nodes[id].value = acc;
            return id;
        }
        const auto& [d, c] = b.components[order[k]];
        MdpAction a;
        a.label = "probe " + std::to_string(order[k]);
        a.cost = c;
        for (std::size_t j = 0; j < d.size(); ++j)
            a.next.emplace_back(self(self, k + 1, acc + d.v[j]), d.p[j]);
        m.nodes[id].actions.push_back(std::move(a));
        return id;
    };
    rec(rec, 0, 0.0);
    return as_chain(m);
}

std::vector<int> additive_static_commit(const AdditiveBox& b, Mode mode) {
    const std::size_t k = b.components.size();
    if (k == 0) throw DomainError("additive box needs at least one component");
    if (k > 6) throw CapError("static-commit order search capped at 6 components");
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> best = order;
    double best_idx = 0.0;
    bool first = true;
    do {
        const Chain ch = additive_order_chain(b, order);
        const Amortization am = water_fill(ch, mode);
        const double idx = ch.m.nodes[Mdp::root].terminal()
                               ? ch.m.nodes[Mdp::root].value
                               : am.water_level.at(Mdp::root);
        const bool better = mode == Mode::Min ? idx < best_idx - 1e-12
                                              : idx > best_idx + 1e-12;
        if (first || better) {
            best = order;
            best_idx = idx;
            first = false;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// ---------------------------------------------------------------------------

WsAlternative make_ws_alternative(const Dist& d, double cost) {
    if (!(cost > 0.0)) throw DomainError("weighing cost must be positive");
    WsAlternative a;
    a.dist = d;
    a.cost = cost;
    const Moments mo = moments(d);
    a.mu = mo.mean;
    a.med = mo.median;
    a.g = solve_index(d, cost, Side::Below);
    a.h = cost <= a.mu + EPS_P ? solve_index(d, cost, Side::Above) : kNaN;
    if (a.g <= a.mu * (1.0 + 1e-12) + 1e-15) {
        a.kappa = a.med > 0.0
                      ? a.mu / a.med + std::log2(std::max(1.0, a.mu / a.g))
                      : std::numeric_limits<double>::infinity();
    } else {
        a.kappa = kNaN;
    }
    return a;
}

namespace {

int ws_node(const WsAlternative& a, const std::vector<double>& menu, Mdp& m,
            const Dist& cur, std::size_t node_cap) {
    if (m.nodes.size() >= node_cap)
        throw CapError("weigh-tree expansion exceeds node cap");
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.emplace_back();
    const double lo = cur.min_support(), hi = cur.max_support();

    MdpAction stop;
    stop.label = "stop";
    stop.cost = 0.0;
    m.nodes.push_back(MdpNode{dist_mean(cur), {}});
    stop.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, 1.0);
    std::vector<MdpAction> acts;
    acts.push_back(std::move(stop));

    if (hi - lo > a.cost) {  // otherwise further weighings cannot pay off
        for (double t : menu) {
            if (t < lo || t >= hi) continue;  // outcome certain: no information
            Split sp = condition_split(cur, t);
            MdpAction w;
            w.label = "weigh<=" + std::to_string(t);
            w.cost = a.cost;
            const int left = ws_node(a, menu, m, sp.le, node_cap);
            w.next.emplace_back(left, sp.p_le);
            const int right = ws_node(a, menu, m, sp.gt, node_cap);
            w.next.emplace_back(right, sp.p_gt);
            acts.push_back(std::move(w));
        }
    }
    m.nodes[id].actions = std::move(acts);
    return id;
}

}  // namespace

Mdp build_ws(const WsAlternative& a, const std::vector<double>& menu,
             std::size_t node_cap) {
    std::vector<double> eff = menu.empty() ? a.dist.v : menu;
    std::sort(eff.begin(), eff.end());
    eff.erase(std::unique(eff.begin(), eff.end()), eff.end());
    const double lo = a.dist.min_support(), hi = a.dist.max_support();
    if (hi - lo > a.cost) {
        const bool any = std::any_of(eff.begin(), eff.end(),
                                     [&](double t) { return t >= lo && t < hi; });
        if (!any) throw DomainError("threshold menu offers no informative weighing");
    }
    Mdp m;
    ws_node(a, eff, m, a.dist, node_cap);
    require_valid(m);
    return m;
}

Chain ws_halving_chain(const WsAlternative& a, double t1, double t2) {
    if (!(t1 > 0.0) || !(t2 > 0.0) || t2 < t1 - 1e-12)
        throw DomainError("halving chain needs 0 < t1 <= t2");
    std::vector<double> ts;
    for (double t = t2; t >= t1 * (1.0 - 1e-12); t /= 2.0) ts.push_back(t);
    Mdp m;
    auto rec = [&](auto&& self, const Dist& cur, std::size_t k) -> int {
        const int id = static_cast<int>(m.nodes.size());
        m.nodes.emplace_back();
        if (k == ts.size()) {
            m.nodes[id].value = dist_mean(cur);
            return id;
        }
        const double t = ts[k];
        const double lo = cur.min_support(), hi = cur.max_support();
        if (t >= hi) {  // answer surely "below": move on without paying
            m.nodes.pop_back();
            return self(self, cur, k + 1);
        }
        if (t < lo) {  // answer surely "above": the policy stops here
            m.nodes[id].value = dist_mean(cur);
            return id;
        }
        Split sp = condition_split(cur, t);
        MdpAction w;
        w.label = "weigh<=" + std::to_string(t);
        w.cost = a.cost;
        // "above" stops at the upper conditional mean; "below" continues.
        m.nodes.push_back(MdpNode{dist_mean(sp.gt), {}});
        const int stop_id = static_cast<int>(m.nodes.size()) - 1;
        const int cont_id = self(self, sp.le, k + 1);
        w.next.emplace_back(cont_id, sp.p_le);
        w.next.emplace_back(stop_id, sp.p_gt);
        m.nodes[id].actions.push_back(std::move(w));
        return id;
    };
    rec(rec, a.dist, 0);
    return as_chain(m);
}

Chain ws_commit(const WsAlternative& a) {
    const double lim = std::min(a.mu, a.med);
    if (a.g > lim * (1.0 + 1e-12) + 1e-15) {
        Mdp m = terminal_mdp(a.mu);
        return as_chain(m);
    }
    // Here cost = E[(g - X)^+] <= E[(mu - X)^+] <= mu, so h is defined,
    // and h >= g makes the threshold range nonempty.
    const double t2 = std::min(a.med, a.h);
    return ws_halving_chain(a, a.g, std::max(a.g, t2));
}

Dist ws_surrogate_reference(const WsAlternative& a) {
    if (a.g > a.mu * (1.0 + 1e-12) + 1e-15)
        throw DomainError("amortized-total reference needs g <= mean");
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < a.dist.size(); ++i)
        atoms.emplace_back(std::min(a.h, std::max(a.g, a.dist.v[i])), a.dist.p[i]);
    return dist_from_weighted(atoms, EPS);
}

// ---------------------------------------------------------------------------

PboiBox make_pboi_box(const Dist& d, double cost) {
    if (cost < 0.0) throw DomainError("inspection cost must be nonnegative");
    PboiBox b;
    const double mu = dist_mean(d);
    const double excess = expected_shortfall(d, mu, Side::Above);
    if (cost > excess + 1e-12) {
        // Grabbing unopened dominates any inspection: collapse the box.
        b.dist = make_dist({{mu, 1.0}});
        b.cost = 0.0;
        b.normalized = true;
        b.mu = mu;
        b.g = mu;
        b.h_below = mu;
        b.h = mu;
        b.w_open = b.dist;
        b.w_star = b.dist;
        return b;
    }
    b.dist = d;
    b.cost = cost;
    b.mu = mu;
    b.g = solve_index(d, cost, Side::Above);
    b.h_below = solve_index(d, cost, Side::Below);
    b.h = std::min(mu, b.h_below);
    b.w_open = clamp_dist(d, b.g, Clamp::Min);
    b.w_star = clamp_dist(b.w_open, b.h, Clamp::Max);
    return b;
}

Mdp build_pboi(const PboiBox& b) {
    Mdp m;
    m.nodes.emplace_back();
    MdpAction open;
    open.label = "open";
    open.cost = b.cost;
    for (std::size_t i = 0; i < b.dist.size(); ++i) {
        m.nodes.push_back(MdpNode{b.dist.v[i], {}});
        open.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, b.dist.p[i]);
    }
    MdpAction grab;
    grab.label = "grab";
    grab.cost = 0.0;
    m.nodes.push_back(MdpNode{b.mu, {}});
    grab.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, 1.0);
    m.nodes[0].actions.push_back(std::move(open));
    m.nodes[0].actions.push_back(std::move(grab));
    require_valid(m);
    return m;
}

SemilocalRule pboi_semilocal_rule(const PboiBox& b, double beta) {
    if (!(beta >= 0.0) || beta > 1.0) throw DomainError("beta must lie in [0, 1]");
    SemilocalRule r;
    if (b.cost >= b.mu - 1e-12) {
        // Only reachable at mu = cost = 0 (a worthless box): grab-with-certainty
        // semantics, flagged for the caller.
        r.alpha = 1.0;
        r.p = b.mu > 0.0 ? b.cost / b.mu : 0.0;
        r.degenerate = beta > 0.0;
        return r;
    }
    const double cm = b.cost / b.mu;
    const double denom = 1.0 + cm - beta * b.cost / (b.mu - b.cost);
    double alpha = 1.0 / denom;
    if (!(alpha > 0.0) || alpha > 1.0) alpha = 1.0;
    r.alpha = alpha;
    r.p = cm * alpha;
    return r;
}

SemilocalCheck check_semilocal(const PboiBox& b, double p, double alpha, double beta) {
    if (!(p >= 0.0) || p > 1.0) throw DomainError("p must lie in [0, 1]");
    if (!(alpha > 0.0) || alpha > 1.0 + 1e-12) throw DomainError("alpha must lie in (0, 1]");
    const Dist scaled = scale_dist(b.w_star, alpha);
    std::vector<double> ys;
    ys.push_back(0.0);
    ys.push_back(b.mu);
    for (double v : b.w_open.v) ys.push_back(v);
    for (double v : scaled.v) ys.push_back(v);
    double top = 0.0;
    for (double y : ys) top = std::max(top, y);
    ys.push_back(top + 1.0);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    SemilocalCheck out;
    out.slack = -std::numeric_limits<double>::infinity();
    for (double y : ys) {
        if (y < 0.0) continue;
        const double lhs = (1.0 - p) * expected_clamp(b.w_open, y, Clamp::Max) +
                           p * std::max(b.mu, y);
        const double rhs = expected_clamp(scaled, y, Clamp::Max) - p * beta * b.mu;
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        const double viol = (rhs - lhs) / scale;
        if (viol > out.slack) {
            out.slack = viol;
            out.witness_y = y;
        }
    }
    out.ok = out.slack <= EPS;
    return out;
}

}  // namespace cics
