#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cics/amort.hpp"
#include "cics/mdp.hpp"
#include "cics/select.hpp"
#include "cics/variants.hpp"

namespace cics::io {

// One alternative as written in an instance file. `type` selects the family:
//   "pb"       value law + inspection cost
//   "pbpi"     value law + open_cost + peek_cost
//   "ws"       value law + weighing cost
//   "pboi"     value law + optional inspection cost
//   "additive" independent components, each a law + probe cost
//   "mdp"      explicit decision tree
struct AltSpec {
    std::string type;
    Dist dist;
    double cost = 0.0;
    double open_cost = 0.0;
    double peek_cost = 0.0;
    AdditiveBox additive;
    Mdp mdp;
};

struct InstanceFile {
    int schema_version = 1;
    Mode mode = Mode::Min;
    Matroid matroid;
    std::vector<AltSpec> alts;
};

// Strict parse; throws ParseError on malformed JSON or schema violations.
InstanceFile parse_instance_text(const std::string& text);
InstanceFile load_instance(const std::string& path);

// Canonical encoding: objects with sorted keys, no whitespace, floats at 12
// significant digits (non-finite -> null), trailing newline. Reparsing and
// re-encoding the canonical form is byte-stable.
std::string canonical_dump(const nlohmann::json& j);
std::string canonical_instance(const InstanceFile& f);

nlohmann::json dist_to_json(const Dist& d);
Dist dist_from_json(const nlohmann::json& j);
nlohmann::json matroid_to_json(const Matroid& m);
Matroid matroid_from_json(const nlohmann::json& j);
nlohmann::json mdp_to_json(const Mdp& m);
Mdp mdp_from_json(const nlohmann::json& j);

// The alternative's full decision tree.
Mdp built_alt(const AltSpec& a, std::size_t node_cap = 200000);
// The family's default committed chain: pb = itself; pbpi = its commit rule;
// ws = its committed halving chain; pboi = open unconditionally; additive =
// best fixed order; mdp = commitment with the best expected total.
Chain default_commit(const AltSpec& a, Mode mode);
// Root water level / drain level of the default committed chain; for "mdp",
// the extreme support point of the tree's amortized-total law.
double alt_index(const AltSpec& a, Mode mode);
// Scalar summary of one alternative (type-specific fields).
nlohmann::json alt_summary(const AltSpec& a, Mode mode);

// Committed chains for evaluation: the default rule everywhere, except
// alternatives named in `spec` ("I=label/label/...; J=..."), whose action
// labels are consumed in breadth-first order over the states their own
// earlier choices keep reachable. Bare action indices work as labels.
std::vector<Chain> committed_chains(const InstanceFile& f, const std::string& spec);

// Plain expected total (costs plus terminal value) of running a chain.
double chain_expected_total(const Mdp& m, Mode mode);

// "y,f,slope" rows, floats at 12 significant digits.
std::string curve_csv(const Curve& c);

}  // namespace cics::io
