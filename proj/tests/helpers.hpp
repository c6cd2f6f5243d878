// Shared generators and utilities for the test binaries.
#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cics/amort.hpp"
#include "cics/curve.hpp"
#include "cics/dist.hpp"
#include "cics/mdp.hpp"

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Random distribution with exact rational probabilities (integer weights) and
// values snapped to a 1/8 grid so that derived quantities stay reproducible.
inline cics::Dist random_dist(std::mt19937_64& g, int max_atoms = 4,
                              double vmin = 0.0, double vmax = 10.0) {
    std::uniform_int_distribution<int> na(1, max_atoms);
    std::uniform_int_distribution<int> wt(1, 6);
    std::uniform_real_distribution<double> val(vmin, vmax);
    int n = na(g);
    std::vector<int> w(static_cast<std::size_t>(n));
    int tot = 0;
    for (auto& x : w) {
        x = wt(g);
        tot += x;
    }
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < n; ++i) {
        double v = std::round(val(g) * 8.0) / 8.0;
        atoms.emplace_back(v, static_cast<double>(w[static_cast<std::size_t>(i)]) / tot);
    }
    return cics::make_dist(atoms);
}

// Random finite-tree MDP. Terminal values live on [0.5, 10] so that max-mode
// draining never exhausts a subtree: costs are kept small enough that the
// running amortized value stays positive on every path.
struct MdpGenConfig {
    cics::Mode mode = cics::Mode::Min;
    int max_depth = 3;
    int max_actions = 3;
    int max_branch = 3;
    double p_term = 0.45;
    int node_budget = 40;
};

inline int gen_mdp_node(std::mt19937_64& g, const MdpGenConfig& cfg, cics::Mdp& m,
                        int depth) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> val(0.5, 10.0);
    int id = static_cast<int>(m.nodes.size());
    m.nodes.emplace_back();
    bool terminal = depth >= cfg.max_depth ||
                    (depth > 0 && coin(g) < cfg.p_term) ||
                    static_cast<int>(m.nodes.size()) > cfg.node_budget;
    if (terminal) {
        m.nodes[static_cast<std::size_t>(id)].value = std::round(val(g) * 4.0) / 4.0;
        return id;
    }
    std::uniform_int_distribution<int> nact(1, cfg.max_actions);
    std::uniform_int_distribution<int> nbr(1, cfg.max_branch);
    std::uniform_int_distribution<int> wt(1, 4);
    std::uniform_real_distribution<double> cost_min(0.05, 1.2);
    std::uniform_real_distribution<double> cost_max(0.01, 0.08);
    int acts = nact(g);
    for (int a = 0; a < acts; ++a) {
        cics::MdpAction act;
        act.label = "a" + std::to_string(a);
        act.cost = cfg.mode == cics::Mode::Min ? cost_min(g) : cost_max(g);
        int br = nbr(g);
        std::vector<int> w(static_cast<std::size_t>(br));
        int tot = 0;
        for (auto& x : w) {
            x = wt(g);
            tot += x;
        }
        for (int b = 0; b < br; ++b) {
            int child = gen_mdp_node(g, cfg, m, depth + 1);
            act.next.emplace_back(child,
                                  static_cast<double>(w[static_cast<std::size_t>(b)]) / tot);
        }
        m.nodes[static_cast<std::size_t>(id)].actions.push_back(std::move(act));
    }
    return id;
}

inline cics::Mdp random_mdp(std::mt19937_64& g, const MdpGenConfig& cfg) {
    cics::Mdp m;
    gen_mdp_node(g, cfg, m, 0);
    return m;
}

// Number of deterministic commitments of an MDP (product of action counts).
inline double commitment_count(const cics::Mdp& m) {
    double n = 1.0;
    for (const auto& nd : m.nodes)
        if (!nd.terminal()) n *= static_cast<double>(nd.actions.size());
    return n;
}

// Extract the deterministic pick from a one-hot commitment row map.
inline std::map<int, int> picks_of(const cics::Commitment& pi) {
    std::map<int, int> out;
    for (const auto& [node, row] : pi.choice) {
        int best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
        out[node] = best;
    }
    return out;
}

// Reach probability of every original node under a deterministic pick.
inline void reach_rec(const cics::Mdp& m, const std::map<int, int>& pick, int node,
                      double p, std::map<int, double>& out) {
    out[node] += p;
    const auto& nd = m.nodes[static_cast<std::size_t>(node)];
    if (nd.terminal()) return;
    const auto& act = nd.actions[static_cast<std::size_t>(pick.at(node))];
    for (const auto& [child, q] : act.next) reach_rec(m, pick, child, p * q, out);
}

inline std::map<int, double> reach_probs(const cics::Mdp& m,
                                         const std::map<int, int>& pick) {
    std::map<int, double> out;
    reach_rec(m, pick, cics::Mdp::root, 1.0, out);
    return out;
}

// Mean-preserving (or mean-shrinking) riskier copy of a distribution: each
// atom is randomly split into a +/- pair around (or slightly below) itself.
inline cics::Dist risky_spread(std::mt19937_64& g, const cics::Dist& z,
                               bool allow_shift_down) {
    std::uniform_real_distribution<double> delta(0.0, 1.0);
    std::uniform_real_distribution<double> shift(0.0, 0.3);
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double d = std::round(delta(g) * 8.0) / 8.0;
        double s = allow_shift_down ? std::round(shift(g) * 8.0) / 8.0 : 0.0;
        double c = std::max(0.0, z.v[i] - s);
        d = std::min(d, c);  // keep atom values nonnegative
        atoms.emplace_back(c - d, 0.5 * z.p[i]);
        atoms.emplace_back(c + d, 0.5 * z.p[i]);
    }
    return cics::dist_from_weighted(atoms, 1e-12);
}

// --------------------------------------------------------------------------
// Subprocess helper for CLI round-trip tests.
// --------------------------------------------------------------------------
struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'')
            q += "'\\''";
        else
            q += c;
    }
    q += "'";
    return q;
}

inline CliResult run_cli(const std::string& exe, const std::vector<std::string>& args) {
    static int counter = 0;
    std::string errfile = "/tmp/cics_test_err_" + std::to_string(++counter) + ".txt";
    std::string cmd = shell_quote(exe);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>" + shell_quote(errfile);
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
    int status = pclose(pipe);
    res.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(errfile);
    std::stringstream ss;
    ss << ef.rdbuf();
    res.err = ss.str();
    std::remove(errfile.c_str());
    return res;
}

inline std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = "/tmp/cics_test_" + name;
    std::ofstream f(path);
    f << text;
    return path;
}

}  // namespace testutil
