#include "cics/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cics {

Validation validate_mdp(const Mdp& m) {
    Validation out;
    const int n = static_cast<int>(m.nodes.size());
    if (n == 0) {
        out.ok = false;
        out.errors.push_back("mdp has no nodes");
        return out;
    }
    std::vector<int> parent(m.nodes.size(), -1);
    std::vector<int> depth(m.nodes.size(), -1);
    std::vector<int> stack = {Mdp::root};
    depth[Mdp::root] = 0;
    int visited = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++visited;
        const MdpNode& node = m.nodes[static_cast<std::size_t>(u)];
        if (node.terminal()) {
            ++out.leaves;
            if (node.value < 0.0) {
                std::ostringstream os;
                os << "terminal node " << u << " has negative value " << node.value;
                out.errors.push_back(os.str());
            }
            out.horizon = std::max(out.horizon, depth[static_cast<std::size_t>(u)]);
            continue;
        }
        for (std::size_t j = 0; j < node.actions.size(); ++j) {
            const MdpAction& act = node.actions[j];
            if (act.cost < 0.0) {
                std::ostringstream os;
                os << "node " << u << " action " << j << " has negative cost";
                out.errors.push_back(os.str());
            }
            if (act.next.empty()) {
                std::ostringstream os;
                os << "node " << u << " action " << j << " has no transitions";
                out.errors.push_back(os.str());
                continue;
            }
            double total = 0.0;
            for (const auto& [child, prob] : act.next) {
                total += prob;
                if (prob <= 0.0) {
                    std::ostringstream os;
                    os << "node " << u << " action " << j
                       << " has a nonpositive transition probability";
                    out.errors.push_back(os.str());
                }
                if (child < 0 || child >= n) {
                    std::ostringstream os;
                    os << "node " << u << " action " << j << " references node "
                       << child << " outside [0, " << n << ")";
                    out.errors.push_back(os.str());
                    continue;
                }
                if (child == Mdp::root || parent[static_cast<std::size_t>(child)] != -1) {
                    std::ostringstream os;
                    os << "node " << child << " is reached twice: state graph is not a tree";
                    out.errors.push_back(os.str());
                    continue;
                }
                parent[static_cast<std::size_t>(child)] = u;
                depth[static_cast<std::size_t>(child)] =
                    depth[static_cast<std::size_t>(u)] + 1;
                stack.push_back(child);
            }
            if (std::fabs(total - 1.0) > EPS_P) {
                std::ostringstream os;
                os << "node " << u << " action " << j << " transition probabilities sum to "
                   << total;
                out.errors.push_back(os.str());
            }
        }
    }
    if (visited != n) {
        std::ostringstream os;
        os << (n - visited) << " node(s) unreachable from the root";
        out.errors.push_back(os.str());
    }
    out.states = visited;
    out.ok = out.errors.empty();
    return out;
}

void require_valid(const Mdp& m) {
    Validation v = validate_mdp(m);
    if (v.ok) return;
    std::ostringstream os;
    os << "invalid mdp:";
    for (std::size_t i = 0; i < v.errors.size() && i < 4; ++i) os << " " << v.errors[i] << ";";
    throw DomainError(os.str());
}

bool is_chain(const Mdp& m) {
    for (const auto& node : m.nodes)
        if (node.actions.size() > 1) return false;
    return true;
}

Chain as_chain(const Mdp& m) {
    if (!is_chain(m)) throw DomainError("mdp has a state with several actions: not a chain");
    return Chain{m};
}

Commitment deterministic_commitment(const Mdp& m, const std::map<int, int>& pick) {
    Commitment pi;
    for (const auto& [node, action] : pick) {
        if (node < 0 || static_cast<std::size_t>(node) >= m.nodes.size())
            throw DomainError("commitment names a state outside the mdp");
        const auto& acts = m.nodes[static_cast<std::size_t>(node)].actions;
        if (action < 0 || static_cast<std::size_t>(action) >= acts.size())
            throw DomainError("commitment picks an action outside the state's menu");
        std::vector<double> row(acts.size(), 0.0);
        row[static_cast<std::size_t>(action)] = 1.0;
        pi.choice[node] = std::move(row);
    }
    return pi;
}

bool is_deterministic(const Commitment& pi) {
    for (const auto& [node, row] : pi.choice) {
        int ones = 0;
        for (double q : row) {
            if (std::fabs(q - 1.0) <= EPS_P)
                ++ones;
            else if (std::fabs(q) > EPS_P)
                return false;
        }
        if (ones != 1) return false;
    }
    return true;
}

namespace {

int build_committed(const Mdp& m, const Commitment& pi, int old_id, Committed& out) {
    int new_id = static_cast<int>(out.chain.m.nodes.size());
    out.chain.m.nodes.emplace_back();
    out.source.push_back(old_id);
    const MdpNode& node = m.nodes[static_cast<std::size_t>(old_id)];
    if (node.terminal()) {
        out.chain.m.nodes[static_cast<std::size_t>(new_id)].value = node.value;
        return new_id;
    }
    auto it = pi.choice.find(old_id);
    if (it == pi.choice.end()) {
        std::ostringstream os;
        os << "commitment does not cover reachable state " << old_id;
        throw DomainError(os.str());
    }
    const std::vector<double>& row = it->second;
    if (row.size() != node.actions.size()) {
        std::ostringstream os;
        os << "commitment row for state " << old_id << " has " << row.size()
           << " entries for " << node.actions.size() << " actions";
        throw DomainError(os.str());
    }
    double total = 0.0;
    for (double q : row) {
        if (q < -EPS_P) throw DomainError("commitment probabilities must be nonnegative");
        total += q;
    }
    if (std::fabs(total - 1.0) > EPS_P) {
        std::ostringstream os;
        os << "commitment row for state " << old_id << " sums to " << total;
        throw DomainError(os.str());
    }
    MdpAction mix;
    bool first = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] <= EPS_P) continue;
        const MdpAction& act = node.actions[j];
        if (first) {
            mix.label = act.label;
            first = false;
        } else {
            mix.label += "+" + act.label;
        }
        mix.cost += row[j] * act.cost;
        for (const auto& [child, prob] : act.next) {
            int built = build_committed(m, pi, child, out);
            mix.next.emplace_back(built, row[j] * prob);
        }
    }
    out.chain.m.nodes[static_cast<std::size_t>(new_id)].actions.push_back(std::move(mix));
    return new_id;
}

void enumerate_node(const Mdp& m, int node, std::vector<std::map<int, int>>& acc,
                    std::size_t cap);

// Cross acc with all commitment choices of the subtree rooted at `node`.
void cross_with(const Mdp& m, int node, std::vector<std::map<int, int>>& acc,
                std::size_t cap) {
    std::vector<std::map<int, int>> sub = {{}};
    enumerate_node(m, node, sub, cap);
    if (sub.size() == 1 && sub.front().empty()) return;  // terminal subtree
    std::vector<std::map<int, int>> next;
    if (acc.size() * sub.size() > cap) {
        std::ostringstream os;
        os << "deterministic commitment count exceeds cap " << cap;
        throw CapError(os.str());
    }
    next.reserve(acc.size() * sub.size());
    for (const auto& base : acc)
        for (const auto& ext : sub) {
            std::map<int, int> merged = base;
            merged.insert(ext.begin(), ext.end());
            next.push_back(std::move(merged));
        }
    acc.swap(next);
}

// acc is extended in place with choices for the subtree at `node`.
void enumerate_node(const Mdp& m, int node, std::vector<std::map<int, int>>& acc,
                    std::size_t cap) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    if (nd.terminal()) return;
    std::vector<std::map<int, int>> out;
    for (std::size_t j = 0; j < nd.actions.size(); ++j) {
        std::vector<std::map<int, int>> branch = {{{node, static_cast<int>(j)}}};
        for (const auto& [child, prob] : nd.actions[j].next)
            cross_with(m, child, branch, cap);
        if (out.size() + branch.size() > cap) {
            std::ostringstream os;
            os << "deterministic commitment count exceeds cap " << cap;
            throw CapError(os.str());
        }
        out.insert(out.end(), branch.begin(), branch.end());
    }
    // Combine with what the caller accumulated so far.
    std::vector<std::map<int, int>> next;
    if (acc.size() * out.size() > cap) {
        std::ostringstream os;
        os << "deterministic commitment count exceeds cap " << cap;
        throw CapError(os.str());
    }
    next.reserve(acc.size() * out.size());
    for (const auto& base : acc)
        for (const auto& ext : out) {
            std::map<int, int> merged = base;
            merged.insert(ext.begin(), ext.end());
            next.push_back(std::move(merged));
        }
    acc.swap(next);
}

}  // namespace

Committed apply_commitment(const Mdp& m, const Commitment& pi) {
    require_valid(m);
    Committed out;
    build_committed(m, pi, Mdp::root, out);
    return out;
}

std::vector<Commitment> enumerate_commitments(const Mdp& m, std::size_t cap) {
    require_valid(m);
    std::vector<std::map<int, int>> picks = {{}};
    enumerate_node(m, Mdp::root, picks, cap);
    std::vector<Commitment> out;
    out.reserve(picks.size());
    for (const auto& pk : picks) {
        Commitment pi;
        for (const auto& [node, action] : pk) {
            std::vector<double> row(
                m.nodes[static_cast<std::size_t>(node)].actions.size(), 0.0);
            row[static_cast<std::size_t>(action)] = 1.0;
            pi.choice[node] = std::move(row);
        }
        out.push_back(std::move(pi));
    }
    return out;
}

Mdp terminal_mdp(double value) {
    Mdp m;
    m.nodes.emplace_back();
    m.nodes.back().value = value;
    return m;
}

Mdp chain_from_dist(const Dist& d, double cost, const std::string& label) {
    Mdp m;
    m.nodes.emplace_back();
    MdpAction act;
    act.label = label;
    act.cost = cost;
    for (std::size_t i = 0; i < d.size(); ++i) {
        MdpNode t;
        t.value = d.v[i];
        m.nodes.push_back(t);
        act.next.emplace_back(static_cast<int>(m.nodes.size()) - 1, d.p[i]);
    }
    m.nodes.front().actions.push_back(std::move(act));
    return m;
}

}  // namespace cics
