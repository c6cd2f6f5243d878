#include "cics/select.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "cics/amort.hpp"

namespace cics {

// ---------------------------------------------------------------------------
// Matroids
// ---------------------------------------------------------------------------

int Matroid::rank(std::uint32_t mask) const {
    if (kind == Kind::Uniform)
        return std::min(std::popcount(mask), k);
    int r = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        int in = 0;
        for (int e : blocks[b])
            if (mask >> e & 1u) ++in;
        r += std::min(in, caps[b]);
    }
    return r;
}

int Matroid::full_rank() const {
    return rank(n >= 32 ? ~0u : (1u << n) - 1u);
}

Matroid uniform_matroid(int n, int k) {
    if (n < 0 || n > 31) throw DomainError("ground set size must lie in [0, 31]");
    if (k < 0 || k > n) throw DomainError("uniform matroid needs 0 <= k <= n");
    Matroid m;
    m.kind = Matroid::Kind::Uniform;
    m.n = n;
    m.k = k;
    return m;
}

Matroid partition_matroid(const std::vector<std::vector<int>>& blocks,
                          const std::vector<int>& caps) {
    if (blocks.size() != caps.size())
        throw DomainError("partition matroid needs one cap per block");
    Matroid m;
    m.kind = Matroid::Kind::Partition;
    m.blocks = blocks;
    m.caps = caps;
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.size());
    if (n > 31) throw DomainError("ground set size must lie in [0, 31]");
    m.n = n;
    m.block_of.assign(n, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (caps[b] < 0) throw DomainError("partition caps must be nonnegative");
        for (int e : blocks[b]) {
            if (e < 0 || e >= n || m.block_of[e] != -1)
                throw DomainError("blocks must partition the ground set exactly");
            m.block_of[e] = static_cast<int>(b);
        }
    }
    return m;
}

OracleResult matroid_oracle(const Matroid& m, std::uint32_t S, int i) {
    if (i < 0 || i >= m.n) throw DomainError("element outside the ground set");
    OracleResult r;
    r.rank_s = m.rank(S);
    const std::uint32_t Si = S | (1u << i);
    const int rank_si = m.rank(Si);
    r.independent = rank_si == std::popcount(Si);
    r.augments = rank_si > r.rank_s;
    return r;
}

// ---------------------------------------------------------------------------
// Index policy on committed chains
// ---------------------------------------------------------------------------

namespace {

struct ChainCtx {
    const Chain* chain = nullptr;
    Amortization am;
    int accepted_code = 0;  // status value meaning "accepted"
};

struct PolicyStep {
    int pick = -1;       // chain to act on (-1: stop / done)
    bool accept = false;  // terminal acceptance vs advance
};

// One decision of the index policy given per-chain statuses.
PolicyStep policy_step(const std::vector<ChainCtx>& ctx, const Matroid& m,
                       Mode mode, const std::vector<int>& status) {
    std::uint32_t accepted = 0;
    for (std::size_t i = 0; i < ctx.size(); ++i)
        if (status[i] == ctx[i].accepted_code) accepted |= 1u << i;
    PolicyStep st;
    if (mode == Mode::Min && m.rank(accepted) == m.full_rank()) return st;
    int best = -1;
    double best_idx = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (status[i] == ctx[i].accepted_code) continue;
        if (!matroid_oracle(m, accepted, static_cast<int>(i)).augments) continue;
        const double idx = ctx[i].am.state_index.at(status[i]);
        const bool better = mode == Mode::Min ? idx < best_idx - 1e-12
                                              : idx > best_idx + 1e-12;
        if (best < 0 || better) {
            best = static_cast<int>(i);
            best_idx = idx;
        }
    }
    if (best < 0) return st;  // max mode only: nothing augments
    if (mode == Mode::Max && best_idx <= 1e-12) return st;  // nothing worth holding
    st.pick = best;
    st.accept = ctx[static_cast<std::size_t>(best)]
                    .chain->m.nodes[static_cast<std::size_t>(status[best])]
                    .terminal();
    return st;
}

class IndexPolicyExact {
  public:
    IndexPolicyExact(const std::vector<ChainCtx>& ctx, const Matroid& m, Mode mode,
                     std::size_t state_cap)
        : ctx_(ctx), m_(m), mode_(mode) {
        radix_.resize(ctx.size());
        double total = 1.0;
        std::uint64_t r = 1;
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            radix_[i] = r;
            const std::uint64_t stride = ctx[i].chain->m.nodes.size() + 1;
            total *= static_cast<double>(stride);
            if (total > static_cast<double>(state_cap))
                throw CapError("joint policy state space exceeds cap");
            r *= stride;
        }
    }

    double run(std::vector<int>& status) {
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < status.size(); ++i)
            code += radix_[i] * static_cast<std::uint64_t>(status[i]);
        if (auto it = memo_.find(code); it != memo_.end()) return it->second;
        const PolicyStep st = policy_step(ctx_, m_, mode_, status);
        double val = 0.0;
        if (st.pick >= 0) {
            const std::size_t i = static_cast<std::size_t>(st.pick);
            const MdpNode& nd =
                ctx_[i].chain->m.nodes[static_cast<std::size_t>(status[i])];
            const int saved = status[i];
            if (st.accept) {
                status[i] = ctx_[i].accepted_code;
                val = nd.value + run(status);
            } else {
                const MdpAction& a = nd.actions.front();
                val = mode_ == Mode::Min ? a.cost : -a.cost;
                for (const auto& [child, prob] : a.next) {
                    status[i] = child;
                    val += prob * run(status);
                }
            }
            status[i] = saved;
        }
        memo_.emplace(code, val);
        return val;
    }

  private:
    const std::vector<ChainCtx>& ctx_;
    const Matroid& m_;
    Mode mode_;
    std::vector<std::uint64_t> radix_;
    std::unordered_map<std::uint64_t, double> memo_;
};

std::mt19937_64 replica_rng(std::uint64_t seed, int rep) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(rep)};
    return std::mt19937_64(sq);
}

int sample_child(const MdpAction& a, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    for (const auto& [child, prob] : a.next) {
        u -= prob;
        if (u <= 0.0) return child;
    }
    return a.next.back().first;
}

std::vector<ChainCtx> make_ctx(const std::vector<Chain>& chains, Mode mode) {
    std::vector<ChainCtx> ctx(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        ctx[i].chain = &chains[i];
        ctx[i].am = water_fill(chains[i], mode);
        ctx[i].accepted_code = static_cast<int>(chains[i].m.nodes.size());
    }
    return ctx;
}

}  // namespace

double index_policy_value(const std::vector<Chain>& chains, const Matroid& m,
                          Mode mode, Method method, McParams mc,
                          std::size_t state_cap) {
    if (static_cast<int>(chains.size()) != m.n)
        throw DomainError("need exactly one chain per ground-set element");
    std::vector<ChainCtx> ctx = make_ctx(chains, mode);
    if (method == Method::Exact) {
        IndexPolicyExact dp(ctx, m, mode, state_cap);
        std::vector<int> status(chains.size(), Mdp::root);
        return dp.run(status);
    }
    if (mc.reps <= 0) throw DomainError("Monte Carlo needs reps > 0");
    double sum = 0.0;
    for (int rep = 0; rep < mc.reps; ++rep) {
        auto rng = replica_rng(mc.seed, rep);
        std::vector<int> status(chains.size(), Mdp::root);
        double val = 0.0;
        while (true) {
            const PolicyStep st = policy_step(ctx, m, mode, status);
            if (st.pick < 0) break;
            const std::size_t i = static_cast<std::size_t>(st.pick);
            const MdpNode& nd =
                chains[i].m.nodes[static_cast<std::size_t>(status[i])];
            if (st.accept) {
                val += nd.value;
                status[i] = ctx[i].accepted_code;
            } else {
                const MdpAction& a = nd.actions.front();
                val += mode == Mode::Min ? a.cost : -a.cost;
                status[i] = sample_child(a, rng);
            }
        }
        sum += val;
    }
    return sum / mc.reps;
}

// ---------------------------------------------------------------------------
// Benchmark on amortized-total laws
// ---------------------------------------------------------------------------

namespace {

double basis_objective(const std::vector<double>& w, const Matroid& m, Mode mode) {
    std::vector<int> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mode == Mode::Min ? w[a] < w[b] : w[a] > w[b];
    });
    std::uint32_t S = 0;
    double val = 0.0;
    const int full = m.full_rank();
    int r = 0;
    for (int i : order) {
        if (mode == Mode::Max && w[i] <= 0.0) break;
        if (r == full) break;
        if (!matroid_oracle(m, S, i).augments) continue;
        S |= 1u << i;
        val += w[i];
        ++r;
    }
    return val;
}

}  // namespace

double surrogate_bound(const std::vector<Dist>& laws, const Matroid& m, Mode mode,
                       Method method, McParams mc, std::size_t cap) {
    if (static_cast<int>(laws.size()) != m.n)
        throw DomainError("need exactly one law per ground-set element");
    if (method == Method::Exact) {
        double total = 1.0;
        for (const Dist& d : laws) {
            total *= static_cast<double>(d.size());
            if (total > static_cast<double>(cap))
                throw CapError("joint support enumeration exceeds cap");
        }
        std::vector<std::size_t> idx(laws.size(), 0);
        std::vector<double> w(laws.size());
        double sum = 0.0;
        while (true) {
            double prob = 1.0;
            for (std::size_t i = 0; i < laws.size(); ++i) {
                prob *= laws[i].p[idx[i]];
                w[i] = laws[i].v[idx[i]];
            }
            sum += prob * basis_objective(w, m, mode);
            std::size_t i = 0;
            for (; i < laws.size(); ++i) {
                if (++idx[i] < laws[i].size()) break;
                idx[i] = 0;
            }
            if (i == laws.size()) break;
        }
        return sum;
    }
    if (mc.reps <= 0) throw DomainError("Monte Carlo needs reps > 0");
    double sum = 0.0;
    std::vector<double> w(laws.size());
    for (int rep = 0; rep < mc.reps; ++rep) {
        auto rng = replica_rng(mc.seed, rep);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (std::size_t i = 0; i < laws.size(); ++i) {
            double u = uni(rng);
            std::size_t j = 0;
            for (; j + 1 < laws[i].size(); ++j) {
                u -= laws[i].p[j];
                if (u <= 0.0) break;
            }
            w[i] = laws[i].v[j];
        }
        sum += basis_objective(w, m, mode);
    }
    return sum / mc.reps;
}

// ---------------------------------------------------------------------------
// Exact optimum over the joint adaptive state space
// ---------------------------------------------------------------------------

namespace {

class BruteForce {
  public:
    BruteForce(const Instance& inst, std::size_t state_cap) : inst_(inst) {
        radix_.resize(inst.alts.size());
        double total = 1.0;
        std::uint64_t r = 1;
        for (std::size_t i = 0; i < inst.alts.size(); ++i) {
            require_valid(inst.alts[i]);
            radix_[i] = r;
            const std::uint64_t stride = inst.alts[i].nodes.size() + 1;
            total *= static_cast<double>(stride);
            if (total > static_cast<double>(state_cap))
                throw CapError("joint optimum state space exceeds cap");
            r *= stride;
        }
    }

    int accepted_code(std::size_t i) const {
        return static_cast<int>(inst_.alts[i].nodes.size());
    }

    struct Choice {
        double value = 0.0;
        std::string what;
    };

    // All decisions available in `status`, each with its continuation value.
    std::vector<Choice> choices(std::vector<int>& status) {
        std::uint32_t accepted = 0;
        for (std::size_t i = 0; i < status.size(); ++i)
            if (status[i] == accepted_code(i)) accepted |= 1u << i;
        std::vector<Choice> out;
        if (inst_.mode == Mode::Max) out.push_back({0.0, "stop"});
        else if (inst_.matroid.rank(accepted) == inst_.matroid.full_rank())
            out.push_back({0.0, "stop"});
        for (std::size_t i = 0; i < status.size(); ++i) {
            if (status[i] == accepted_code(i)) continue;
            const MdpNode& nd =
                inst_.alts[i].nodes[static_cast<std::size_t>(status[i])];
            const int saved = status[i];
            if (nd.terminal()) {
                if (!matroid_oracle(inst_.matroid, accepted, static_cast<int>(i))
                         .augments)
                    continue;
                status[i] = accepted_code(i);
                out.push_back({nd.value + value(status),
                               "accept alt " + std::to_string(i)});
                status[i] = saved;
                continue;
            }
            for (const MdpAction& a : nd.actions) {
                double v = inst_.mode == Mode::Min ? a.cost : -a.cost;
                for (const auto& [child, prob] : a.next) {
                    status[i] = child;
                    v += prob * value(status);
                }
                status[i] = saved;
                out.push_back({v, "advance alt " + std::to_string(i) + " via '" +
                                      a.label + "'"});
            }
        }
        return out;
    }

    double value(std::vector<int>& status) {
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < status.size(); ++i)
            code += radix_[i] * static_cast<std::uint64_t>(status[i]);
        if (auto it = memo_.find(code); it != memo_.end()) return it->second;
        // Min mode stops only once the rank is full; max mode may stop anytime.
        memo_.emplace(code, 0.0);  // placeholder; tree MDPs cannot revisit states
        const std::vector<Choice> cs = choices(status);
        double best = 0.0;
        bool first = true;
        for (const Choice& c : cs) {
            if (first || (inst_.mode == Mode::Min ? c.value < best : c.value > best))
                best = c.value;
            first = false;
        }
        memo_[code] = best;
        return best;
    }

  private:
    const Instance& inst_;
    std::vector<std::uint64_t> radix_;
    std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace

OptResult brute_force_opt(const Instance& inst, std::size_t state_cap) {
    if (static_cast<int>(inst.alts.size()) != inst.matroid.n)
        throw DomainError("need exactly one alternative per ground-set element");
    BruteForce bf(inst, state_cap);
    std::vector<int> status(inst.alts.size(), Mdp::root);
    OptResult res;
    res.value = bf.value(status);
    auto cs = bf.choices(status);
    for (const auto& c : cs) {
        if (std::abs(c.value - res.value) <= 1e-12 * std::max(1.0, std::abs(res.value))) {
            res.root_action = c.what;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Commitment gap
// ---------------------------------------------------------------------------

GapResult commitment_gap(const Instance& inst, std::size_t tuple_cap,
                         std::size_t state_cap) {
    if (static_cast<int>(inst.alts.size()) != inst.matroid.n)
        throw DomainError("need exactly one alternative per ground-set element");
    std::vector<std::vector<Commitment>> options;
    double tuples = 1.0;
    for (const Mdp& alt : inst.alts) {
        options.push_back(enumerate_commitments(alt, tuple_cap));
        tuples *= static_cast<double>(options.back().size());
        if (tuples > static_cast<double>(tuple_cap))
            throw CapError("commitment tuple count exceeds cap");
    }
    GapResult res;
    const OptResult full = brute_force_opt(inst, state_cap);
    res.opt_value = full.value;

    std::vector<std::size_t> idx(inst.alts.size(), 0);
    bool first = true;
    while (true) {
        Instance restricted;
        restricted.mode = inst.mode;
        restricted.matroid = inst.matroid;
        std::vector<Commitment> tuple;
        for (std::size_t i = 0; i < inst.alts.size(); ++i) {
            tuple.push_back(options[i][idx[i]]);
            restricted.alts.push_back(
                apply_commitment(inst.alts[i], options[i][idx[i]]).chain.m);
        }
        const double rv = brute_force_opt(restricted, state_cap).value;
        const double ratio = std::abs(full.value) < 1e-15
                                 ? (std::abs(rv) < 1e-15 ? 1.0 : (inst.mode == Mode::Min
                                                                      ? std::numeric_limits<double>::infinity()
                                                                      : 0.0))
                                 : rv / full.value;
        const bool better = inst.mode == Mode::Min ? ratio < res.gap : ratio > res.gap;
        if (first || better) {
            res.gap = ratio;
            res.best_value = rv;
            res.best = tuple;
            first = false;
        }
        std::size_t i = 0;
        for (; i < inst.alts.size(); ++i) {
            if (++idx[i] < options[i].size()) break;
            idx[i] = 0;
        }
        if (i == inst.alts.size()) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Randomized grab-or-open composition
// ---------------------------------------------------------------------------

namespace {

double compose_once(const std::vector<PboiBox>& boxes, const Matroid& m,
                    const std::vector<int>& order, const std::vector<bool>& coin) {
    std::uint32_t grabbed = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int id = order[pos];
        if (coin[pos] && matroid_oracle(m, grabbed, id).independent)
            grabbed |= 1u << id;
    }
    std::vector<Chain> chains;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (grabbed >> i & 1u)
            chains.push_back(as_chain(terminal_mdp(boxes[i].mu)));
        else
            chains.push_back(as_chain(chain_from_dist(boxes[i].dist, boxes[i].cost, "open")));
    }
    return index_policy_value(chains, m, Mode::Max, Method::Exact);
}

}  // namespace

ComposeResult semilocal_compose(const std::vector<PboiBox>& boxes, const Matroid& m,
                                double beta, Method method, McParams mc) {
    if (static_cast<int>(boxes.size()) != m.n)
        throw DomainError("need exactly one box per ground-set element");
    ComposeResult res;
    std::vector<double> p(boxes.size());
    res.alpha.resize(boxes.size());
    res.p.resize(boxes.size());
    res.alpha_min = 1.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const SemilocalRule r = pboi_semilocal_rule(boxes[i], beta);
        res.alpha[i] = r.alpha;
        res.p[i] = r.p;
        p[i] = r.p;
        res.alpha_min = std::min(res.alpha_min, r.alpha);
    }
    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return boxes[a].mu > boxes[b].mu; });

    if (method == Method::Exact) {
        const std::size_t n = boxes.size();
        if (n > 20) throw CapError("exact composition enumerates at most 20 coins");
        std::vector<bool> coin(n);
        double sum = 0.0;
        for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
            double weight = 1.0;
            for (std::size_t pos = 0; pos < n; ++pos) {
                const bool k = mask >> pos & 1ull;
                coin[pos] = k;
                weight *= k ? p[static_cast<std::size_t>(order[pos])]
                            : 1.0 - p[static_cast<std::size_t>(order[pos])];
            }
            if (weight <= 0.0) continue;
            sum += weight * compose_once(boxes, m, order, coin);
        }
        res.value = sum;
        return res;
    }
    if (mc.reps <= 0) throw DomainError("Monte Carlo needs reps > 0");
    double sum = 0.0;
    std::vector<bool> coin(boxes.size());
    for (int rep = 0; rep < mc.reps; ++rep) {
        auto rng = replica_rng(mc.seed, rep);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (std::size_t pos = 0; pos < boxes.size(); ++pos)
            coin[pos] = uni(rng) < p[static_cast<std::size_t>(order[pos])];
        sum += compose_once(boxes, m, order, coin);
    }
    res.value = sum / mc.reps;
    return res;
}

}  // namespace cics
