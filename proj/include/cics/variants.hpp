#pragma once

#include <utility>
#include <vector>

#include "cics/amort.hpp"
#include "cics/mdp.hpp"

namespace cics {

// ---------------------------------------------------------------------------
// Peek-or-open box: pay open_cost to learn and bank the value, or pay the
// cheaper peek_cost to learn it first and then decide whether to open.
// ---------------------------------------------------------------------------
struct PbpiBox {
    Dist dist;
    double open_cost = 0.0;
    double peek_cost = 0.0;
    bool peek_dropped = false;  // peek_cost >= open_cost: peek is pointless
    double g_open = 0.0;        // index of the open-committed chain
    double g_peek = 0.0;        // index of the peek-committed chain
    double y_cross = 0.0;       // largest y where the two committed curves meet
};

PbpiBox make_pbpi_box(const Dist& d, double open_cost, double peek_cost);

// Root actions: "open" (terminals per atom) and, unless dropped, "peek"
// (posterior states with a single mandatory "open" action each).
Mdp build_pboi(const struct PboiBox& b);
Mdp build_pbpi(const PbpiBox& b);

struct PbpiRule {
    bool open = true;   // commit to opening (else to peeking)
    bool dominated = false;  // peek dominated (g_peek >= g_open): open wins outright
    double lhs = 0.0;   // open-side scaling factor
    double rhs = 0.0;   // peek-side scaling factor
};
PbpiRule pbpi_commit(const PbpiBox& b);

// Whole-box commitment rows for build_pbpi (root choice; peek states have
// their single mandatory action).
Commitment pbpi_commitment(const PbpiBox& b, bool open);

// Cost-ratio partition: boxes committed to open (first) vs to peek (second).
std::pair<std::vector<int>, std::vector<int>> pbpi_phi_partition(
    const std::vector<PbpiBox>& boxes);

// ---------------------------------------------------------------------------
// Additive box: independent components probed one at a time; the box's value
// is the sum of all component values.
// ---------------------------------------------------------------------------
struct AdditiveBox {
    std::vector<std::pair<Dist, double>> components;  // (law, probe cost)
};

// Full adaptive MDP (choose any unprobed component next).
Mdp build_additive(const AdditiveBox& b, std::size_t node_cap = 2000000);
// Chain probing the components in a fixed order.
Chain additive_order_chain(const AdditiveBox& b, const std::vector<int>& order);
// Best fixed order by root water level; ties keep the lexicographically
// earlier order. Component count capped at 6 (720 orders).
std::vector<int> additive_static_commit(const AdditiveBox& b, Mode mode = Mode::Min);

// ---------------------------------------------------------------------------
// Weighing-scale alternative: each weighing (cost c) compares the hidden
// value against a chosen threshold; stopping accepts the conditional mean.
// ---------------------------------------------------------------------------
struct WsAlternative {
    Dist dist;
    double cost = 0.0;
    double mu = 0.0;     // mean
    double med = 0.0;    // median (lower atom on ties)
    double g = 0.0;      // below-index solution
    double h = 0.0;      // above-index solution (NaN when cost > mean)
    double kappa = 0.0;  // mu/med + log2(mu/g) when g <= mu, else NaN
};

WsAlternative make_ws_alternative(const Dist& d, double cost);

// Full weigh MDP over a threshold menu (empty menu = support atoms). Each
// state offers a free "stop" plus one weigh per in-range threshold; branches
// whose conditional support width is <= cost offer only "stop".
Mdp build_ws(const WsAlternative& a, const std::vector<double>& menu = {},
             std::size_t node_cap = 200000);

// One-sided halving chain: weigh thresholds t2, t2/2, ... down to the last
// one >= t1; answering "above" stops at the upper conditional mean, the
// final "below" stops at the remaining conditional mean. Thresholds whose
// outcome is certain are resolved without a weighing.
Chain ws_halving_chain(const WsAlternative& a, double t1, double t2);

// Committed chain: a bare terminal at the mean when g > min(mu, med),
// otherwise the halving chain with t1 = g, t2 = min(med, h).
Chain ws_commit(const WsAlternative& a);

// Law of min(h, max(g, X)) — the amortized-total reference (needs g <= mu).
Dist ws_surrogate_reference(const WsAlternative& a);

// ---------------------------------------------------------------------------
// Optional-inspection box: open (cost c, value revealed) or grab unopened
// (expected value mu, no cost).
// ---------------------------------------------------------------------------
struct PboiBox {
    Dist dist;
    double cost = 0.0;
    double mu = 0.0;
    double g = 0.0;        // above-index solution
    double h_below = 0.0;  // below-index solution
    double h = 0.0;        // min(mu, h_below)
    bool normalized = false;  // degenerate input replaced by ({mu:1}, 0)
    Dist w_open;  // law of min(X, g)
    Dist w_star;  // law of max(min(X, g), h); mean equals mu
};

// Degenerate boxes (cost exceeding E[(X - mu)^+], i.e. grabbing dominates
// everything) are normalized to a costless deterministic box at mu.
PboiBox make_pboi_box(const Dist& d, double cost);

struct SemilocalRule {
    double alpha = 1.0;
    double p = 0.0;
    bool degenerate = false;  // cost == mu edge (worthless box)
};
// alpha(beta) = 1 / (1 + c/mu - beta*c/(mu-c)) clamped into (0, 1];
// p = (c/mu) * alpha.
SemilocalRule pboi_semilocal_rule(const PboiBox& b, double beta);

struct SemilocalCheck {
    bool ok = true;
    double witness_y = 0.0;
    double slack = 0.0;  // worst signed violation (positive = violated)
};
// (1-p) E[max(W_open, y)] + p max(mu, y) >= E[max(alpha W*, y)] - p*beta*mu
// for all y >= 0, decided at breakpoints.
SemilocalCheck check_semilocal(const PboiBox& b, double p, double alpha, double beta);

}  // namespace cics
