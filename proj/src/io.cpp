#include "cics/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace cics::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical JSON
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void dump_rec(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_rec(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump_rec(j[i], out);
            }
            out += ']';
            break;
        }
        case json::value_t::string:
            out += j.dump();
            break;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            break;
        case json::value_t::number_float:
            out += fmt_double(j.get<double>());
            break;
        default:
            out += "null";
            break;
    }
}

const json& req(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string("missing field '") + key + "'");
    return j.at(key);
}

double num(const json& j, const char* what) {
    if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
    return j.get<double>();
}

int integer(const json& j, const char* what) {
    if (!j.is_number_integer())
        throw ParseError(std::string(what) + " must be an integer");
    return j.get<int>();
}

}  // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    dump_rec(j, out);
    return out;
}

// ---------------------------------------------------------------------------
// Leaf encoders / decoders
// ---------------------------------------------------------------------------

json dist_to_json(const Dist& d) {
    json arr = json::array();
    for (std::size_t i = 0; i < d.size(); ++i)
        arr.push_back(json::array({d.v[i], d.p[i]}));
    return arr;
}

Dist dist_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ParseError("dist must be a nonempty array of [value, prob] pairs");
    std::vector<std::pair<double, double>> atoms;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw ParseError("dist entries must be [value, prob] pairs");
        atoms.emplace_back(num(e[0], "dist value"), num(e[1], "dist prob"));
    }
    return make_dist(atoms);
}

json matroid_to_json(const Matroid& m) {
    json j;
    if (m.kind == Matroid::Kind::Uniform) {
        j["type"] = "uniform";
        j["n"] = m.n;
        j["k"] = m.k;
    } else {
        j["type"] = "partition";
        j["blocks"] = m.blocks;
        j["caps"] = m.caps;
    }
    return j;
}

Matroid matroid_from_json(const json& j) {
    const std::string type = req(j, "type").get<std::string>();
    if (type == "uniform")
        return uniform_matroid(integer(req(j, "n"), "matroid n"),
                               integer(req(j, "k"), "matroid k"));
    if (type == "partition") {
        const json& jb = req(j, "blocks");
        const json& jc = req(j, "caps");
        if (!jb.is_array() || !jc.is_array())
            throw ParseError("partition matroid needs 'blocks' and 'caps' arrays");
        std::vector<std::vector<int>> blocks;
        for (const auto& b : jb) {
            std::vector<int> blk;
            for (const auto& e : b) blk.push_back(integer(e, "block element"));
            blocks.push_back(std::move(blk));
        }
        std::vector<int> caps;
        for (const auto& c : jc) caps.push_back(integer(c, "cap"));
        return partition_matroid(blocks, caps);
    }
    throw ParseError("unknown matroid type '" + type + "'");
}

namespace {

json node_to_json(const Mdp& m, int s) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(s)];
    json j;
    if (nd.terminal()) {
        j["value"] = nd.value;
        return j;
    }
    json acts = json::array();
    for (const MdpAction& a : nd.actions) {
        json ja;
        ja["label"] = a.label;
        ja["cost"] = a.cost;
        json nx = json::array();
        for (const auto& [child, prob] : a.next) {
            json e;
            e["p"] = prob;
            e["node"] = node_to_json(m, child);
            nx.push_back(std::move(e));
        }
        ja["next"] = std::move(nx);
        acts.push_back(std::move(ja));
    }
    j["actions"] = std::move(acts);
    return j;
}

int node_from_json(const json& jn, Mdp& m) {
    if (!jn.is_object()) throw ParseError("tree nodes must be objects");
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.emplace_back();
    if (jn.contains("actions")) {
        const json& ja = jn.at("actions");
        if (!ja.is_array() || ja.empty())
            throw ParseError("'actions' must be a nonempty array");
        std::vector<MdpAction> acts;
        for (std::size_t ai = 0; ai < ja.size(); ++ai) {
            const json& a = ja[ai];
            MdpAction act;
            act.label = a.contains("label") ? a.at("label").get<std::string>()
                                            : "a" + std::to_string(ai);
            act.cost = num(req(a, "cost"), "action cost");
            const json& nx = req(a, "next");
            if (!nx.is_array() || nx.empty())
                throw ParseError("'next' must be a nonempty array");
            for (const auto& e : nx) {
                const double p = num(req(e, "p"), "transition prob");
                const int child = node_from_json(req(e, "node"), m);
                act.next.emplace_back(child, p);
            }
            acts.push_back(std::move(act));
        }
        m.nodes[static_cast<std::size_t>(id)].actions = std::move(acts);
        return id;
    }
    if (jn.contains("value")) {
        m.nodes[static_cast<std::size_t>(id)].value =
            num(jn.at("value"), "terminal value");
        return id;
    }
    throw ParseError("tree nodes need either 'value' or 'actions'");
}

}  // namespace

json mdp_to_json(const Mdp& m) {
    return node_to_json(m, Mdp::root);
}

Mdp mdp_from_json(const json& j) {
    Mdp m;
    node_from_json(j, m);
    require_valid(m);
    return m;
}

// ---------------------------------------------------------------------------
// Instance files
// ---------------------------------------------------------------------------

namespace {

AltSpec alt_from_json(const json& j) {
    AltSpec a;
    a.type = req(j, "type").get<std::string>();
    if (a.type == "pb") {
        a.dist = dist_from_json(req(j, "dist"));
        a.cost = num(req(j, "cost"), "cost");
    } else if (a.type == "pbpi") {
        a.dist = dist_from_json(req(j, "dist"));
        a.open_cost = num(req(j, "open_cost"), "open_cost");
        a.peek_cost = num(req(j, "peek_cost"), "peek_cost");
    } else if (a.type == "ws" || a.type == "pboi") {
        a.dist = dist_from_json(req(j, "dist"));
        a.cost = num(req(j, "cost"), "cost");
    } else if (a.type == "additive") {
        const json& jc = req(j, "components");
        if (!jc.is_array() || jc.empty())
            throw ParseError("'components' must be a nonempty array");
        for (const auto& e : jc)
            a.additive.components.emplace_back(dist_from_json(req(e, "dist")),
                                               num(req(e, "cost"), "cost"));
    } else if (a.type == "mdp") {
        a.mdp = mdp_from_json(req(j, "tree"));
    } else {
        throw ParseError("unknown alternative type '" + a.type + "'");
    }
    return a;
}

json alt_to_json(const AltSpec& a) {
    json j;
    j["type"] = a.type;
    if (a.type == "pb" || a.type == "ws" || a.type == "pboi") {
        j["dist"] = dist_to_json(a.dist);
        j["cost"] = a.cost;
    } else if (a.type == "pbpi") {
        j["dist"] = dist_to_json(a.dist);
        j["open_cost"] = a.open_cost;
        j["peek_cost"] = a.peek_cost;
    } else if (a.type == "additive") {
        json comps = json::array();
        for (const auto& [d, c] : a.additive.components) {
            json e;
            e["dist"] = dist_to_json(d);
            e["cost"] = c;
            comps.push_back(std::move(e));
        }
        j["components"] = std::move(comps);
    } else {
        j["tree"] = mdp_to_json(a.mdp);
    }
    return j;
}

}  // namespace

InstanceFile parse_instance_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    InstanceFile f;
    f.schema_version = integer(req(j, "schema_version"), "schema_version");
    if (f.schema_version != 1) throw ParseError("unsupported schema_version");
    const std::string mode = req(j, "mode").get<std::string>();
    if (mode == "min")
        f.mode = Mode::Min;
    else if (mode == "max")
        f.mode = Mode::Max;
    else
        throw ParseError("mode must be 'min' or 'max'");
    f.matroid = matroid_from_json(req(j, "matroid"));
    const json& alts = req(j, "alternatives");
    if (!alts.is_array()) throw ParseError("'alternatives' must be an array");
    for (const auto& e : alts) f.alts.push_back(alt_from_json(e));
    if (static_cast<int>(f.alts.size()) != f.matroid.n)
        throw ParseError("matroid ground set size must match the alternative count");
    return f;
}

InstanceFile load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance_text(ss.str());
}

std::string canonical_instance(const InstanceFile& f) {
    json j;
    j["schema_version"] = f.schema_version;
    j["mode"] = mode_name(f.mode);
    j["matroid"] = matroid_to_json(f.matroid);
    json alts = json::array();
    for (const AltSpec& a : f.alts) alts.push_back(alt_to_json(a));
    j["alternatives"] = std::move(alts);
    return canonical_dump(j) + "\n";
}

// ---------------------------------------------------------------------------
// Building, committing, summarizing
// ---------------------------------------------------------------------------

Mdp built_alt(const AltSpec& a, std::size_t node_cap) {
    if (a.type == "pb") return chain_from_dist(a.dist, a.cost);
    if (a.type == "pbpi") return build_pbpi(make_pbpi_box(a.dist, a.open_cost, a.peek_cost));
    if (a.type == "ws") return build_ws(make_ws_alternative(a.dist, a.cost), {}, node_cap);
    if (a.type == "pboi") return build_pboi(make_pboi_box(a.dist, a.cost));
    if (a.type == "additive") return build_additive(a.additive, node_cap);
    return a.mdp;
}

double chain_expected_total(const Mdp& m, Mode mode) {
    auto rec = [&](auto&& self, int s) -> double {
        const MdpNode& nd = m.nodes[static_cast<std::size_t>(s)];
        if (nd.terminal()) return nd.value;
        double v = 0.0;
        for (const auto& [child, prob] : nd.actions.front().next)
            v += prob * self(self, child);
        return v + (mode == Mode::Min ? nd.actions.front().cost
                                      : -nd.actions.front().cost);
    };
    return rec(rec, Mdp::root);
}

Chain default_commit(const AltSpec& a, Mode mode) {
    if (a.type == "pb") return as_chain(chain_from_dist(a.dist, a.cost));
    if (a.type == "pbpi") {
        const PbpiBox b = make_pbpi_box(a.dist, a.open_cost, a.peek_cost);
        const PbpiRule r = pbpi_commit(b);
        return apply_commitment(build_pbpi(b), pbpi_commitment(b, r.open)).chain;
    }
    if (a.type == "ws") return ws_commit(make_ws_alternative(a.dist, a.cost));
    if (a.type == "pboi") {
        const PboiBox b = make_pboi_box(a.dist, a.cost);
        return as_chain(chain_from_dist(b.dist, b.cost, "open"));
    }
    if (a.type == "additive")
        return additive_order_chain(a.additive, additive_static_commit(a.additive, mode));
    // Explicit tree: the committed chain with the best plain expected total.
    const auto options = enumerate_commitments(a.mdp, 10000);
    Chain best;
    double best_total = 0.0;
    bool first = true;
    for (const Commitment& c : options) {
        Chain ch = apply_commitment(a.mdp, c).chain;
        const double t = chain_expected_total(ch.m, mode);
        const bool better = mode == Mode::Min ? t < best_total - 1e-12
                                              : t > best_total + 1e-12;
        if (first || better) {
            best = std::move(ch);
            best_total = t;
            first = false;
        }
    }
    return best;
}

double alt_index(const AltSpec& a, Mode mode) {
    if (a.type == "mdp") {
        const Dist w = mdp_surrogate(a.mdp, mode);
        return mode == Mode::Min ? w.min_support() : w.max_support();
    }
    const Chain ch = default_commit(a, mode);
    return water_fill(ch, mode).state_index.at(Mdp::root);
}

json alt_summary(const AltSpec& a, Mode mode) {
    json s;
    s["type"] = a.type;
    s["index"] = alt_index(a, mode);
    auto opt_num = [](double x) {
        return std::isfinite(x) ? json(x) : json(nullptr);
    };
    if (a.type == "pb") {
        s["cost"] = a.cost;
        s["mean"] = dist_mean(a.dist);
    } else if (a.type == "pbpi") {
        const PbpiBox b = make_pbpi_box(a.dist, a.open_cost, a.peek_cost);
        const PbpiRule r = pbpi_commit(b);
        s["g_open"] = b.g_open;
        s["g_peek"] = b.g_peek;
        s["y_cross"] = opt_num(b.y_cross);
        s["peek_dropped"] = b.peek_dropped;
        s["rule"] = {{"open", r.open},
                     {"dominated", r.dominated},
                     {"lhs", r.lhs},
                     {"rhs", r.rhs}};
    } else if (a.type == "ws") {
        const WsAlternative w = make_ws_alternative(a.dist, a.cost);
        s["cost"] = a.cost;
        s["mean"] = w.mu;
        s["median"] = w.med;
        s["g"] = w.g;
        s["h"] = opt_num(w.h);
        s["kappa"] = opt_num(w.kappa);
    } else if (a.type == "pboi") {
        const PboiBox b = make_pboi_box(a.dist, a.cost);
        s["cost"] = b.cost;
        s["mean"] = b.mu;
        s["g"] = b.g;
        s["h"] = b.h;
        s["normalized"] = b.normalized;
    } else if (a.type == "additive") {
        s["components"] = a.additive.components.size();
        s["order"] = additive_static_commit(a.additive, mode);
    } else {
        s["surrogate_mean"] = dist_mean(mdp_surrogate(a.mdp, mode));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Commitment specs
// ---------------------------------------------------------------------------

namespace {

Commitment commit_from_labels(const Mdp& m, const std::vector<std::string>& labels) {
    std::map<int, int> pick;
    std::deque<int> queue{Mdp::root};
    std::size_t li = 0;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        const MdpNode& nd = m.nodes[static_cast<std::size_t>(s)];
        if (nd.terminal()) continue;
        int j = -1;
        if (nd.actions.size() == 1) {
            j = 0;  // mandatory move: no label consumed
        } else {
            if (li >= labels.size())
                throw ParseError("commit spec ends before every reachable state is covered");
            const std::string& lab = labels[li++];
            for (std::size_t ai = 0; ai < nd.actions.size(); ++ai) {
                if (m.nodes[static_cast<std::size_t>(s)].actions[ai].label == lab) {
                    j = static_cast<int>(ai);
                    break;
                }
            }
            if (j < 0) {
                try {
                    std::size_t pos = 0;
                    const int idx = std::stoi(lab, &pos);
                    if (pos == lab.size() && idx >= 0 &&
                        idx < static_cast<int>(nd.actions.size()))
                        j = idx;
                } catch (...) {
                }
            }
            if (j < 0)
                throw ParseError("no action labeled '" + lab + "' at the visited state");
        }
        pick[s] = j;
        for (const auto& [child, prob] : nd.actions[static_cast<std::size_t>(j)].next)
            queue.push_back(child);
    }
    if (li != labels.size()) throw ParseError("commit spec has unused labels");
    return deterministic_commitment(m, pick);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<Chain> committed_chains(const InstanceFile& f, const std::string& spec) {
    std::map<int, std::vector<std::string>> overrides;
    if (!trim(spec).empty()) {
        for (const std::string& entry : split(spec, ';')) {
            const std::string e = trim(entry);
            if (e.empty()) continue;
            const auto eq = e.find('=');
            if (eq == std::string::npos)
                throw ParseError("commit entries look like 'ALT=label/label'");
            int alt = 0;
            try {
                alt = std::stoi(trim(e.substr(0, eq)));
            } catch (...) {
                throw ParseError("commit entries start with an alternative number");
            }
            if (alt < 0 || alt >= static_cast<int>(f.alts.size()))
                throw ParseError("commit entry names an unknown alternative");
            if (overrides.count(alt))
                throw ParseError("duplicate commit entry for one alternative");
            std::vector<std::string> labels;
            for (const std::string& lab : split(trim(e.substr(eq + 1)), '/'))
                labels.push_back(trim(lab));
            if (labels.size() == 1 && labels[0].empty()) labels.clear();
            overrides[alt] = std::move(labels);
        }
    }
    std::vector<Chain> chains;
    for (std::size_t i = 0; i < f.alts.size(); ++i) {
        const auto it = overrides.find(static_cast<int>(i));
        if (it == overrides.end()) {
            chains.push_back(default_commit(f.alts[i], f.mode));
        } else {
            const Mdp m = built_alt(f.alts[i]);
            chains.push_back(apply_commitment(m, commit_from_labels(m, it->second)).chain);
        }
    }
    return chains;
}

std::string curve_csv(const Curve& c) {
    std::string out = "y,f,slope\n";
    for (std::size_t i = 0; i < c.y.size(); ++i) {
        out += fmt_double(c.y[i]);
        out += ',';
        out += fmt_double(c.f[i]);
        out += ',';
        out += fmt_double(c.s[i]);
        out += '\n';
    }
    return out;
}

}  // namespace cics::io
