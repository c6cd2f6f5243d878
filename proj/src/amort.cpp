#include "cics/amort.hpp"

#include <algorithm>
#include <cmath>

namespace cics {

namespace {

struct LeafState {
    int leaf;
    double p;    // probability conditional on reaching the current subtree
    double rho;  // amortized total so far
};

std::vector<LeafState> fill_node(const Mdp& m, int node, Mode mode, Amortization& out) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    if (nd.terminal()) return {{node, 1.0, nd.value}};
    const MdpAction& act = nd.actions.front();
    std::vector<LeafState> pool;
    for (const auto& [child, prob] : act.next) {
        for (LeafState ls : fill_node(m, child, mode, out)) {
            ls.p *= prob;
            pool.push_back(ls);
        }
    }
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(pool.size());
    for (const auto& ls : pool) atoms.emplace_back(ls.rho, ls.p);
    Dist d = dist_from_weighted(atoms, EPS_P);
    double g = solve_index(d, act.cost, mode == Mode::Min ? Side::Below : Side::Above);
    out.water_level[node] = g;
    for (auto& ls : pool) {
        double share = mode == Mode::Min ? std::max(0.0, g - ls.rho)
                                         : std::max(0.0, ls.rho - g);
        if (share > 0.0) out.shares[node][ls.leaf] = share;
        ls.rho = mode == Mode::Min ? std::max(g, ls.rho) : std::min(g, ls.rho);
    }
    return pool;
}

// state_index: best final amortized total over the leaves below each node.
double index_node(const Mdp& m, int node, Mode mode, Amortization& out) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    double best;
    if (nd.terminal()) {
        best = out.trajectory_cost.at(node);
    } else {
        bool first = true;
        best = 0.0;
        for (const auto& [child, prob] : nd.actions.front().next) {
            double b = index_node(m, child, mode, out);
            best = first ? b : (mode == Mode::Min ? std::min(best, b) : std::max(best, b));
            first = false;
        }
    }
    out.state_index[node] = best;
    return best;
}

}  // namespace

Amortization water_fill(const Chain& chain, Mode mode) {
    require_valid(chain.m);
    if (!is_chain(chain.m)) throw DomainError("water filling needs a chain");
    Amortization out;
    out.mode = mode;
    std::vector<LeafState> final_states = fill_node(chain.m, Mdp::root, mode, out);
    std::vector<std::pair<double, double>> atoms;
    for (const auto& ls : final_states) {
        out.trajectory_cost[ls.leaf] = ls.rho;
        out.leaf_prob[ls.leaf] = ls.p;
        atoms.emplace_back(ls.rho, ls.p);
    }
    out.surrogate = dist_from_weighted(atoms, EPS_P);
    index_node(chain.m, Mdp::root, mode, out);
    return out;
}

namespace {

Curve curve_node(const Mdp& m, int node, Mode mode) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    if (nd.terminal())
        return curve_of(dist_from_weighted({{nd.value, 1.0}}, EPS_P), mode);
    std::vector<Curve> child_cache;
    std::vector<Curve> options;
    options.push_back(identity_curve(mode));
    for (const auto& act : nd.actions) {
        std::vector<Curve> kids;
        kids.reserve(act.next.size());
        for (const auto& [child, prob] : act.next)
            kids.push_back(curve_node(m, child, mode));
        std::vector<std::pair<const Curve*, double>> terms;
        for (std::size_t k = 0; k < kids.size(); ++k)
            terms.emplace_back(&kids[k], act.next[k].second);
        double constant = mode == Mode::Min ? act.cost : -act.cost;
        options.push_back(affine_sum(terms, constant, mode));
    }
    return combine(options);
}

}  // namespace

Curve mdp_curve(const Mdp& m, Mode mode) {
    require_valid(m);
    return curve_node(m, Mdp::root, mode);
}

Dist mdp_surrogate(const Mdp& m, Mode mode) { return dist_of(mdp_curve(m, mode)); }

namespace {

struct NodeDecomp {
    // (leaf id, probability conditional on the subtree root)
    std::vector<std::pair<int, double>> leaves;
    std::map<int, Dist> rho;  // leaf id -> amortized law at this level
};

NodeDecomp decompose_node(const Mdp& m, const Commitment& pi, int node, Mode mode,
                          std::vector<Dist>& surr_cache, std::vector<char>& have,
                          Decomposition& out) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    NodeDecomp res;
    if (nd.terminal()) {
        res.leaves.emplace_back(node, 1.0);
        res.rho[node] = dist_from_weighted({{nd.value, 1.0}}, EPS_P);
        return res;
    }
    auto it = pi.choice.find(node);
    if (it == pi.choice.end()) throw DomainError("commitment does not cover a reachable state");
    std::size_t j = 0;
    while (j < it->second.size() && std::fabs(it->second[j] - 1.0) > EPS_P) ++j;
    if (j >= it->second.size())
        throw DomainError("decompose needs a deterministic commitment");
    const MdpAction& act = nd.actions[j];

    auto surrogate_of = [&](int k) -> const Dist& {
        if (!have[static_cast<std::size_t>(k)]) {
            surr_cache[static_cast<std::size_t>(k)] = dist_of(curve_node(m, k, mode));
            have[static_cast<std::size_t>(k)] = 1;
        }
        return surr_cache[static_cast<std::size_t>(k)];
    };

    // Z: the transition mixture of the children's own optimal surrogates.
    std::vector<std::pair<double, double>> zatoms;
    std::vector<NodeDecomp> kids;
    for (const auto& [child, prob] : act.next) {
        kids.push_back(decompose_node(m, pi, child, mode, surr_cache, have, out));
        const Dist& ws = surrogate_of(child);
        for (std::size_t a = 0; a < ws.size(); ++a)
            zatoms.emplace_back(ws.v[a], prob * ws.p[a]);
    }
    Dist z = dist_from_weighted(zatoms, EPS_P);
    double g = solve_index(z, act.cost, mode == Mode::Min ? Side::Below : Side::Above);
    Dist zhat = clamp_dist(z, g, mode == Mode::Min ? Clamp::Max : Clamp::Min);
    StochasticMap mm = sdom_map(surrogate_of(node), zhat, mode);

    for (std::size_t c = 0; c < kids.size(); ++c) {
        double prob = act.next[c].second;
        for (auto& [leaf, pcond] : kids[c].leaves) {
            const Dist& child_rho = kids[c].rho.at(leaf);
            Dist clamped =
                clamp_dist(child_rho, g, mode == Mode::Min ? Clamp::Max : Clamp::Min);
            Dist pushed = pushforward(mm, clamped);
            double share = mode == Mode::Min
                               ? dist_mean(pushed) - dist_mean(child_rho)
                               : dist_mean(child_rho) - dist_mean(pushed);
            if (std::fabs(share) > EPS_P) out.shares[node][leaf] = share;
            res.rho[leaf] = std::move(pushed);
            res.leaves.emplace_back(leaf, prob * pcond);
        }
    }
    return res;
}

}  // namespace

Decomposition decompose(const Mdp& m, const Commitment& pi, Mode mode) {
    require_valid(m);
    if (!is_deterministic(pi))
        throw DomainError("decompose is defined for deterministic commitments only");
    Decomposition out;
    out.mode = mode;
    std::vector<Dist> surr_cache(m.nodes.size());
    std::vector<char> have(m.nodes.size(), 0);
    NodeDecomp root = decompose_node(m, pi, Mdp::root, mode, surr_cache, have, out);
    std::vector<std::pair<double, double>> mix;
    for (auto& [leaf, p] : root.leaves) {
        out.leaf_prob[leaf] = p;
        const Dist& d = root.rho.at(leaf);
        for (std::size_t a = 0; a < d.size(); ++a) mix.emplace_back(d.v[a], p * d.p[a]);
    }
    out.leaf_cost = std::move(root.rho);
    out.mixture = dist_from_weighted(mix, EPS_P);
    return out;
}

}  // namespace cics
