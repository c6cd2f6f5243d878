#pragma once

#include <map>

#include "cics/curve.hpp"
#include "cics/dist.hpp"
#include "cics/mdp.hpp"

namespace cics {

// Cost amortization of a chain: shares spread each state's inspection cost
// over the trajectories through it, raising (Min) / draining (Max) the
// amortized leaf totals to a common water level per state.
struct Amortization {
    Mode mode = Mode::Min;
    std::map<int, double> water_level;      // non-terminal node -> level g
    std::map<int, double> state_index;      // node -> best final amortized
                                            // total over leaves below it
    std::map<int, double> trajectory_cost;  // leaf -> final amortized total
    std::map<int, double> leaf_prob;        // leaf -> reach probability
    std::map<int, std::map<int, double>> shares;  // state -> leaf -> share
    Dist surrogate;                         // law of the amortized total
};

Amortization water_fill(const Chain& chain, Mode mode);

// Optimality curve of an Mdp:
//   Min: f_M(y) = min{ y, min_a [cost_a + sum_s P(s|a) f_{M_s}(y)] }
//   Max: f_M(y) = max{ y, max_a [-cost_a + sum_s P(s|a) f_{M_s}(y)] }
// with terminals contributing E[min(y, v)] / E[max(y, v)].
Curve mdp_curve(const Mdp& m, Mode mode);

// The surrogate law W* with f_M(y) = E[min(y, W*)] (resp. max).
Dist mdp_surrogate(const Mdp& m, Mode mode);

// Amortization of a deterministic commitment against the MDP's own
// surrogate: per-leaf amortized-cost laws whose leaf-probability mixture
// reproduces mdp_surrogate(m) exactly, plus signed per-state shares with
// E[leaf law] = leaf value +/- the shares routed onto the leaf (cost
// sharing) and, per state, expected shares <= reach * action cost (cost
// dominance). Individual shares can be negative when the commitment picks
// an action the surrogate prices below the values it can reach.
struct Decomposition {
    Mode mode = Mode::Min;
    std::map<int, Dist> leaf_cost;    // original leaf id -> amortized law
    std::map<int, double> leaf_prob;  // original leaf id -> reach probability
    std::map<int, std::map<int, double>> shares;  // original state -> leaf
    Dist mixture;                     // leaf-probability mixture of leaf_cost
};

Decomposition decompose(const Mdp& m, const Commitment& pi, Mode mode);

}  // namespace cics
