#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "cics/amort.hpp"
#include "cics/curve.hpp"
#include "cics/io.hpp"
#include "cics/select.hpp"
#include "cics/variants.hpp"

namespace py = pybind11;

namespace {

using Atoms = std::vector<std::pair<double, double>>;

cics::Dist to_dist(const Atoms& a) { return cics::make_dist(a); }

Atoms from_dist(const cics::Dist& d) {
    Atoms out;
    for (std::size_t i = 0; i < d.size(); ++i) out.emplace_back(d.v[i], d.p[i]);
    return out;
}

cics::Mode to_mode(const std::string& s) {
    if (s == "min") return cics::Mode::Min;
    if (s == "max") return cics::Mode::Max;
    throw cics::DomainError("mode must be 'min' or 'max'");
}

py::dict dom_dict(const cics::DomCheck& c) {
    py::dict d;
    d["ok"] = c.ok;
    d["witness"] = c.witness;
    d["slack"] = c.slack;
    return d;
}

}  // namespace

PYBIND11_MODULE(_cics, m) {
    m.doc() = "Costly-information combinatorial selection core";

    m.def("make_dist", [](const Atoms& a) { return from_dist(to_dist(a)); },
          "Normalize [(value, prob), ...] atoms");
    m.def("dist_mean",
          [](const Atoms& a) { return cics::dist_mean(to_dist(a)); });
    m.def("quantile", [](const Atoms& a, double q) {
        return cics::quantile(to_dist(a), q);
    });
    m.def("solve_index",
          [](const Atoms& a, double cost, const std::string& side) {
              return cics::solve_index(to_dist(a), cost,
                                       side == "below" ? cics::Side::Below
                                                       : cics::Side::Above);
          },
          py::arg("atoms"), py::arg("cost"), py::arg("side"));

    m.def("optimality_curve",
          [](const std::string& tree_json, const std::string& mode) {
              const cics::Mdp tree =
                  cics::io::mdp_from_json(nlohmann::json::parse(tree_json));
              const cics::Curve c = cics::mdp_curve(tree, to_mode(mode));
              std::vector<std::tuple<double, double, double>> pts;
              for (std::size_t i = 0; i < c.y.size(); ++i)
                  pts.emplace_back(c.y[i], c.f[i], c.s[i]);
              return pts;
          },
          "Breakpoints (y, f, right-slope) of the optimality curve");
    m.def("mdp_surrogate",
          [](const std::string& tree_json, const std::string& mode) {
              const cics::Mdp tree =
                  cics::io::mdp_from_json(nlohmann::json::parse(tree_json));
              return from_dist(cics::mdp_surrogate(tree, to_mode(mode)));
          });
    m.def("water_fill",
          [](const std::string& tree_json, const std::string& mode) {
              const cics::Mdp tree =
                  cics::io::mdp_from_json(nlohmann::json::parse(tree_json));
              const cics::Amortization am =
                  cics::water_fill(cics::as_chain(tree), to_mode(mode));
              py::dict d;
              d["water_level"] = am.water_level;
              d["state_index"] = am.state_index;
              d["trajectory_cost"] = am.trajectory_cost;
              d["leaf_prob"] = am.leaf_prob;
              d["shares"] = am.shares;
              d["surrogate"] = from_dist(am.surrogate);
              return d;
          });

    m.def("dominates_1st", [](const Atoms& a, const Atoms& b) {
        return dom_dict(cics::dominates_1st(to_dist(a), to_dist(b)));
    });
    m.def("dominates_2nd",
          [](const Atoms& a, const Atoms& b, const std::string& mode) {
              return dom_dict(cics::dominates_2nd(to_dist(a), to_dist(b), to_mode(mode)));
          });
    m.def("local_approx_factor",
          [](const Atoms& a, const Atoms& b, const std::string& mode) {
              return cics::local_approx_factor(to_dist(a), to_dist(b), to_mode(mode));
          });
    m.def("sdom_map",
          [](const Atoms& x, const Atoms& z, const std::string& mode) {
              const cics::StochasticMap sm =
                  cics::sdom_map(to_dist(x), to_dist(z), to_mode(mode));
              std::vector<std::pair<double, Atoms>> rows;
              for (std::size_t i = 0; i < sm.from.size(); ++i)
                  rows.emplace_back(sm.from[i], from_dist(sm.to[i]));
              return rows;
          },
          "Mean-preserving atom map certifying second-order dominance");

    m.def("pbpi_rule", [](const Atoms& a, double open_cost, double peek_cost) {
        const cics::PbpiBox b = cics::make_pbpi_box(to_dist(a), open_cost, peek_cost);
        const cics::PbpiRule r = cics::pbpi_commit(b);
        py::dict d;
        d["g_open"] = b.g_open;
        d["g_peek"] = b.g_peek;
        d["y_cross"] = b.y_cross;
        d["peek_dropped"] = b.peek_dropped;
        d["open"] = r.open;
        d["dominated"] = r.dominated;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        return d;
    });
    m.def("ws_params", [](const Atoms& a, double cost) {
        const cics::WsAlternative w = cics::make_ws_alternative(to_dist(a), cost);
        py::dict d;
        d["mean"] = w.mu;
        d["median"] = w.med;
        d["g"] = w.g;
        d["h"] = w.h;
        d["kappa"] = w.kappa;
        return d;
    });
    m.def("pboi_rule", [](const Atoms& a, double cost, double beta) {
        const cics::PboiBox b = cics::make_pboi_box(to_dist(a), cost);
        const cics::SemilocalRule r = cics::pboi_semilocal_rule(b, beta);
        py::dict d;
        d["mean"] = b.mu;
        d["g"] = b.g;
        d["h"] = b.h;
        d["normalized"] = b.normalized;
        d["alpha"] = r.alpha;
        d["p"] = r.p;
        d["degenerate"] = r.degenerate;
        return d;
    });

    auto parse = [](const std::string& text) {
        return cics::io::parse_instance_text(text);
    };
    m.def("canonical_instance", [parse](const std::string& text) {
        return cics::io::canonical_instance(parse(text));
    });
    m.def("instance_index", [parse](const std::string& text) {
        const cics::io::InstanceFile f = parse(text);
        nlohmann::json alts = nlohmann::json::array();
        for (std::size_t i = 0; i < f.alts.size(); ++i) {
            nlohmann::json s = cics::io::alt_summary(f.alts[i], f.mode);
            s["alt"] = i;
            alts.push_back(std::move(s));
        }
        return cics::io::canonical_dump(alts);
    });
    m.def("instance_eval",
          [parse](const std::string& text, const std::string& commit) {
              const cics::io::InstanceFile f = parse(text);
              return cics::index_policy_value(cics::io::committed_chains(f, commit),
                                              f.matroid, f.mode);
          },
          py::arg("text"), py::arg("commit") = std::string());
    m.def("instance_opt", [parse](const std::string& text) {
        const cics::io::InstanceFile f = parse(text);
        cics::Instance inst;
        inst.mode = f.mode;
        inst.matroid = f.matroid;
        for (const auto& a : f.alts) inst.alts.push_back(cics::io::built_alt(a));
        const cics::OptResult r = cics::brute_force_opt(inst);
        return std::make_pair(r.value, r.root_action);
    });
    m.def("compose_semilocal", [parse](const std::string& text, double beta) {
        const cics::io::InstanceFile f = parse(text);
        std::vector<cics::PboiBox> boxes;
        for (const auto& a : f.alts) {
            if (a.type != "pboi")
                throw cics::DomainError("composition needs 'pboi' alternatives");
            boxes.push_back(cics::make_pboi_box(a.dist, a.cost));
        }
        const cics::ComposeResult r = cics::semilocal_compose(boxes, f.matroid, beta);
        py::dict d;
        d["value"] = r.value;
        d["alpha"] = r.alpha;
        d["p"] = r.p;
        d["alpha_min"] = r.alpha_min;
        return d;
    });
}
