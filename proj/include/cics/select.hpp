#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cics/mdp.hpp"
#include "cics/variants.hpp"

namespace cics {

// ---------------------------------------------------------------------------
// Matroids over ground set {0, ..., n-1}, subsets as bitmasks.
// ---------------------------------------------------------------------------
struct Matroid {
    enum class Kind { Uniform, Partition } kind = Kind::Uniform;
    int n = 0;
    int k = 0;                              // uniform cap
    std::vector<std::vector<int>> blocks;   // partition blocks
    std::vector<int> caps;                  // per-block caps
    std::vector<int> block_of;              // element -> block index

    int rank(std::uint32_t mask) const;
    int full_rank() const;
};

Matroid uniform_matroid(int n, int k);
Matroid partition_matroid(const std::vector<std::vector<int>>& blocks,
                          const std::vector<int>& caps);

struct OracleResult {
    bool independent = false;  // S + i independent
    int rank_s = 0;            // rank of S alone
    bool augments = false;     // adding i raises the rank of S
};
OracleResult matroid_oracle(const Matroid& m, std::uint32_t S, int i);

// ---------------------------------------------------------------------------
// Joint selection over alternatives.
// ---------------------------------------------------------------------------
struct Instance {
    Mode mode = Mode::Min;
    Matroid matroid;
    std::vector<Mdp> alts;
};

enum class Method { Exact, Mc };
struct McParams {
    std::uint64_t seed = 0;
    int reps = 0;
};

// Value of the index policy run on committed chains: repeatedly advance the
// rank-augmenting chain with the best root-state index, accept at terminals
// (min mode: until the rank is full; max mode: while the best index is
// positive, then stop).
double index_policy_value(const std::vector<Chain>& chains, const Matroid& m,
                          Mode mode, Method method = Method::Exact,
                          McParams mc = {}, std::size_t state_cap = 2000000);

// E[opt-basis objective of independent draws from the given laws]: the
// selection benchmark evaluated on amortized-total laws.
double surrogate_bound(const std::vector<Dist>& laws, const Matroid& m, Mode mode,
                       Method method = Method::Exact, McParams mc = {},
                       std::size_t cap = 2000000);

struct OptResult {
    double value = 0.0;
    std::string root_action;  // e.g. "advance alt 1 via 'open'", "accept alt 0", "stop"
};
// Exact optimal adaptive policy over the joint state space (memoized).
OptResult brute_force_opt(const Instance& inst, std::size_t state_cap = 2000000);

struct GapResult {
    double gap = 1.0;         // worst restricted/unrestricted optimum ratio
    double opt_value = 0.0;   // unrestricted optimum
    double best_value = 0.0;  // best committed optimum
    std::vector<Commitment> best;  // a tuple attaining the gap
};
// Enumerates deterministic commitment tuples (product capped), solves each
// restricted instance exactly, and reports the ratio closest to 1 from the
// committed side (min mode: smallest restricted/opt >= 1; max mode: largest
// restricted/opt <= 1).
GapResult commitment_gap(const Instance& inst, std::size_t tuple_cap = 10000,
                         std::size_t state_cap = 2000000);

struct ComposeResult {
    double value = 0.0;
    std::vector<double> alpha;  // per-box scaling factor
    std::vector<double> p;      // per-box grab probability
    double alpha_min = 1.0;     // worst factor across boxes
};
// Randomized grab-or-open composition: walk boxes by decreasing mean, grab
// box i with probability p_i when still addable, then run the max-mode index
// policy on the resulting chains (grabbed: bare terminal at the mean;
// others: open chains).
ComposeResult semilocal_compose(const std::vector<PboiBox>& boxes, const Matroid& m,
                                double beta, Method method = Method::Exact,
                                McParams mc = {});

}  // namespace cics
