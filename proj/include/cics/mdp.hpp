#pragma once

#include <map>
#include <string>
#include <vector>

#include "cics/common.hpp"
#include "cics/dist.hpp"

namespace cics {

struct MdpAction {
    std::string label;
    double cost = 0.0;
    std::vector<std::pair<int, double>> next;  // (child node id, probability)
};

// Finite-horizon Markov decision process whose state graph is a tree.
// A node with no actions is terminal and carries a nonnegative payoff.
struct MdpNode {
    double value = 0.0;
    std::vector<MdpAction> actions;
    bool terminal() const { return actions.empty(); }
};

struct Mdp {
    std::vector<MdpNode> nodes;  // node 0 is the root
    static constexpr int root = 0;
};

// An Mdp in which every non-terminal state has exactly one action.
struct Chain {
    Mdp m;
};

struct Validation {
    bool ok = true;
    std::vector<std::string> errors;
    int horizon = 0;  // max number of actions on a root-to-leaf path
    int states = 0;
    int leaves = 0;
};

Validation validate_mdp(const Mdp& m);
void require_valid(const Mdp& m);  // DomainError listing the first problems

bool is_chain(const Mdp& m);
Chain as_chain(const Mdp& m);  // DomainError if some state has several actions

// Action choice per reachable non-terminal state; each row is a probability
// vector over that state's actions (one-hot = deterministic).
struct Commitment {
    std::map<int, std::vector<double>> choice;
};

Commitment deterministic_commitment(const Mdp& m, const std::map<int, int>& pick);
bool is_deterministic(const Commitment& pi);

// Restriction of m to pi. Randomized rows collapse into one mixture action
// (probability-weighted transitions, mean cost). Only the subtree reachable
// under pi is kept; source maps new node ids back to m's node ids.
struct Committed {
    Chain chain;
    std::vector<int> source;
};
Committed apply_commitment(const Mdp& m, const Commitment& pi);

// Every deterministic commitment, reachability-aware (states cut off by an
// earlier choice contribute no factor), in canonical order: root action
// index first, then child combinations lexicographically.
std::vector<Commitment> enumerate_commitments(const Mdp& m,
                                              std::size_t cap = 10000);

// Builders.
Mdp terminal_mdp(double value);
// Single action ("inspect", given cost) leading to one terminal per atom.
Mdp chain_from_dist(const Dist& d, double cost, const std::string& label = "inspect");

}  // namespace cics
