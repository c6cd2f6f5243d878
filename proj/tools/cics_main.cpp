#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cics/amort.hpp"
#include "cics/curve.hpp"
#include "cics/io.hpp"
#include "cics/select.hpp"
#include "cics/variants.hpp"

namespace {

using cics::Chain;
using cics::Commitment;
using cics::Curve;
using cics::Dist;
using cics::Matroid;
using cics::Mdp;
using cics::Mode;
using nlohmann::json;

void emit(const json& j) { std::cout << cics::io::canonical_dump(j) << "\n"; }

cics::McParams parse_mc(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw cics::ParseError("--mc expects 'SEED,REPS'");
    cics::McParams mc;
    try {
        mc.seed = std::stoull(s.substr(0, comma));
        mc.reps = std::stoi(s.substr(comma + 1));
    } catch (...) {
        throw cics::ParseError("--mc expects 'SEED,REPS'");
    }
    return mc;
}

// Inverse of the --commit format: action labels of a deterministic
// commitment in breadth-first order over the states it keeps reachable
// (single-action states are skipped, matching what parsing expects).
std::string commit_labels(const Mdp& m, const Commitment& pi) {
    std::deque<int> queue{Mdp::root};
    std::vector<std::string> labels;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        const auto& nd = m.nodes[static_cast<std::size_t>(s)];
        if (nd.terminal()) continue;
        const auto& row = pi.choice.at(s);
        std::size_t j = 0;
        for (std::size_t a = 1; a < row.size(); ++a)
            if (row[a] > row[j]) j = a;
        if (nd.actions.size() >= 2) labels.push_back(nd.actions[j].label);
        for (const auto& [child, prob] : nd.actions[j].next) queue.push_back(child);
    }
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += '/';
        out += labels[i];
    }
    return out;
}

cics::Instance built_instance(const cics::io::InstanceFile& f) {
    cics::Instance inst;
    inst.mode = f.mode;
    inst.matroid = f.matroid;
    for (const auto& a : f.alts) inst.alts.push_back(cics::io::built_alt(a));
    return inst;
}

int run(int argc, char** argv) {
    CLI::App app{"Costly-information combinatorial selection toolkit"};
    app.require_subcommand(1);

    std::string file, commit_spec, mc_spec, out_path, semilocal_spec;
    int alt = 0;
    double alpha = 1.0, beta = 0.1;
    bool pointwise = false;
    std::size_t tuple_cap = 10000;

    auto* cmd_index = app.add_subcommand(
        "index", "Per-alternative indices and family summaries");
    cmd_index->add_option("file", file, "instance file")->required();

    auto* cmd_curve = app.add_subcommand(
        "curve", "Optimality curve of one alternative as CSV");
    cmd_curve->add_option("file", file, "instance file")->required();
    cmd_curve->add_option("--alt", alt, "alternative number")->required();
    cmd_curve->add_option("--out", out_path, "write CSV here instead of stdout");

    auto* cmd_surrogate = app.add_subcommand(
        "surrogate", "Amortized-total law of one alternative");
    cmd_surrogate->add_option("file", file, "instance file")->required();
    cmd_surrogate->add_option("--alt", alt, "alternative number")->required();

    auto* cmd_eval = app.add_subcommand(
        "eval", "Index-policy value on committed chains");
    cmd_eval->add_option("file", file, "instance file")->required();
    cmd_eval->add_option("--commit", commit_spec,
                         "per-alternative action labels, e.g. '0=peek;2=a1/a2'");
    cmd_eval->add_option("--mc", mc_spec, "Monte Carlo as 'SEED,REPS'");

    auto* cmd_opt = app.add_subcommand(
        "opt", "Exact optimal adaptive policy value");
    cmd_opt->add_option("file", file, "instance file")->required();

    auto* cmd_gap = app.add_subcommand(
        "gap", "Commitment gap over deterministic commitment tuples");
    cmd_gap->add_option("file", file, "instance file")->required();
    cmd_gap->add_option("--tuple-cap", tuple_cap, "commitment tuple cap");

    auto* cmd_verify = app.add_subcommand(
        "verify", "Dominance checks of a committed chain against its alternative");
    cmd_verify->add_option("file", file, "instance file")->required();
    cmd_verify->add_option("--alt", alt, "alternative number")->required();
    cmd_verify->add_option("--alpha", alpha, "scaling factor")->required();
    cmd_verify->add_flag("--pointwise", pointwise, "first-order check instead");
    cmd_verify->add_option("--semilocal", semilocal_spec,
                           "grab-or-open check as 'BETA,P'");
    cmd_verify->add_option("--commit", commit_spec,
                           "committed chain override, e.g. '1=peek'");

    auto* cmd_compose = app.add_subcommand(
        "compose-semilocal", "Randomized grab-or-open composition value");
    cmd_compose->add_option("file", file, "instance file")->required();
    cmd_compose->add_option("--beta", beta, "slack parameter")->required();
    cmd_compose->add_option("--mc", mc_spec, "Monte Carlo as 'SEED,REPS'");

    CLI11_PARSE(app, argc, argv);

    const cics::io::InstanceFile f = cics::io::load_instance(file);
    auto check_alt = [&]() {
        if (alt < 0 || alt >= static_cast<int>(f.alts.size()))
            throw cics::ParseError("--alt is out of range");
    };

    if (app.got_subcommand(cmd_index)) {
        json alts = json::array();
        for (std::size_t i = 0; i < f.alts.size(); ++i) {
            json s = cics::io::alt_summary(f.alts[i], f.mode);
            s["alt"] = i;
            alts.push_back(std::move(s));
        }
        emit({{"mode", cics::mode_name(f.mode)}, {"alternatives", std::move(alts)}});
    } else if (app.got_subcommand(cmd_curve)) {
        check_alt();
        const Curve c = cics::mdp_curve(
            cics::io::built_alt(f.alts[static_cast<std::size_t>(alt)]), f.mode);
        const std::string csv = cics::io::curve_csv(c);
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(out_path);
            if (!out) throw cics::ParseError("cannot write '" + out_path + "'");
            out << csv;
        }
    } else if (app.got_subcommand(cmd_surrogate)) {
        check_alt();
        const Dist w = cics::mdp_surrogate(
            cics::io::built_alt(f.alts[static_cast<std::size_t>(alt)]), f.mode);
        emit({{"alt", alt},
              {"mode", cics::mode_name(f.mode)},
              {"surrogate", cics::io::dist_to_json(w)},
              {"mean", cics::dist_mean(w)}});
    } else if (app.got_subcommand(cmd_eval)) {
        const std::vector<Chain> chains = cics::io::committed_chains(f, commit_spec);
        double value = 0.0;
        if (mc_spec.empty()) {
            value = cics::index_policy_value(chains, f.matroid, f.mode);
        } else {
            value = cics::index_policy_value(chains, f.matroid, f.mode,
                                             cics::Method::Mc, parse_mc(mc_spec));
        }
        emit({{"mode", cics::mode_name(f.mode)},
              {"method", mc_spec.empty() ? "exact" : "mc"},
              {"value", value}});
    } else if (app.got_subcommand(cmd_opt)) {
        const cics::OptResult r = brute_force_opt(built_instance(f));
        emit({{"mode", cics::mode_name(f.mode)},
              {"value", r.value},
              {"root_action", r.root_action}});
    } else if (app.got_subcommand(cmd_gap)) {
        const cics::Instance inst = built_instance(f);
        const cics::GapResult r = cics::commitment_gap(inst, tuple_cap);
        std::string best;
        for (std::size_t i = 0; i < inst.alts.size(); ++i) {
            if (i) best += ';';
            best += std::to_string(i) + "=" + commit_labels(inst.alts[i], r.best[i]);
        }
        emit({{"mode", cics::mode_name(f.mode)},
              {"gap", r.gap},
              {"opt_value", r.opt_value},
              {"best_value", r.best_value},
              {"best_commit", best}});
    } else if (app.got_subcommand(cmd_verify)) {
        check_alt();
        const cics::io::AltSpec& spec = f.alts[static_cast<std::size_t>(alt)];
        if (!semilocal_spec.empty()) {
            if (spec.type != "pboi")
                throw cics::DomainError(
                    "the grab-or-open check applies to 'pboi' alternatives");
            const auto comma = semilocal_spec.find(',');
            if (comma == std::string::npos)
                throw cics::ParseError("--semilocal expects 'BETA,P'");
            double b = 0.0, p = 0.0;
            try {
                b = std::stod(semilocal_spec.substr(0, comma));
                p = std::stod(semilocal_spec.substr(comma + 1));
            } catch (...) {
                throw cics::ParseError("--semilocal expects 'BETA,P'");
            }
            const cics::PboiBox box = cics::make_pboi_box(spec.dist, spec.cost);
            const cics::SemilocalCheck chk = cics::check_semilocal(box, p, alpha, b);
            emit({{"check", "semilocal"},
                  {"pass", chk.ok},
                  {"witness_y", chk.witness_y},
                  {"slack", chk.slack}});
            return 0;
        }
        std::string one_alt_spec = commit_spec;
        const std::vector<Chain> chains = cics::io::committed_chains(f, one_alt_spec);
        const Dist w_pi =
            cics::water_fill(chains[static_cast<std::size_t>(alt)], f.mode).surrogate;
        const Dist w_m = cics::mdp_surrogate(cics::io::built_alt(spec), f.mode);
        const Dist scaled = cics::scale_dist(w_m, alpha);
        if (pointwise) {
            const cics::DomCheck chk = cics::dominates_1st(w_pi, scaled);
            emit({{"check", "pointwise"},
                  {"pass", chk.ok},
                  {"witness_y", chk.witness},
                  {"slack", chk.slack}});
        } else {
            const cics::DomCheck chk = cics::dominates_2nd(w_pi, scaled, f.mode);
            emit({{"check", "local"},
                  {"pass", chk.ok},
                  {"witness_y", chk.witness},
                  {"slack", chk.slack}});
        }
    } else if (app.got_subcommand(cmd_compose)) {
        std::vector<cics::PboiBox> boxes;
        for (const auto& a : f.alts) {
            if (a.type != "pboi")
                throw cics::DomainError(
                    "composition needs every alternative to be 'pboi'");
            boxes.push_back(cics::make_pboi_box(a.dist, a.cost));
        }
        cics::ComposeResult r;
        if (mc_spec.empty()) {
            r = cics::semilocal_compose(boxes, f.matroid, beta);
        } else {
            r = cics::semilocal_compose(boxes, f.matroid, beta, cics::Method::Mc,
                                        parse_mc(mc_spec));
        }
        emit({{"mode", cics::mode_name(f.mode)},
              {"value", r.value},
              {"alpha", r.alpha},
              {"p", r.p},
              {"alpha_min", r.alpha_min}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cics::ParseError& e) {
        std::cerr << R"({"error":{"type":"parse","message":)" << json(e.what()).dump()
                  << "}}\n";
        return 2;
    } catch (const cics::CapError& e) {
        std::cerr << R"({"error":{"type":"cap","message":)" << json(e.what()).dump()
                  << "}}\n";
        return 3;
    } catch (const cics::DomainError& e) {
        std::cerr << R"({"error":{"type":"domain","message":)" << json(e.what()).dump()
                  << "}}\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << R"({"error":{"type":"internal","message":)"
                  << json(e.what()).dump() << "}}\n";
        return 1;
    }
}
