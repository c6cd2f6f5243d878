#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

#include "cics/amort.hpp"
#include "cics/curve.hpp"
#include "cics/mdp.hpp"
#include "cics/variants.hpp"

using namespace cics;

namespace {

double plain_total(const Mdp& m, int node, Mode mode) {
    const MdpNode& nd = m.nodes[static_cast<std::size_t>(node)];
    if (nd.terminal()) return nd.value;
    const MdpAction& act = nd.actions[0];
    double t = mode == Mode::Min ? act.cost : -act.cost;
    for (const auto& [child, p] : act.next) t += p * plain_total(m, child, mode);
    return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Peek-or-open boxes
// ---------------------------------------------------------------------------

TEST_CASE("pbpi worked example: expensive peek is dominated") {
    PbpiBox b = make_pbpi_box(make_dist({{0.0, 0.5}, {2.0, 0.5}}), 0.5, 0.4);
    CHECK(b.g_open == doctest::Approx(1.0));
    CHECK(b.g_peek == doctest::Approx(1.3));
    CHECK(b.y_cross == doctest::Approx(0.2));
    CHECK_FALSE(b.peek_dropped);
    PbpiRule r = pbpi_commit(b);
    CHECK(r.dominated);
    CHECK(r.open);
    CHECK(r.lhs == doctest::Approx(0.5 / 0.4 * (1.0 - 0.5 / 1.3)).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(1.0 + std::min(0.4 / 0.5, 0.5 / 1.3)).epsilon(1e-9));
}

TEST_CASE("pbpi worked example: cheap peek wins") {
    PbpiBox b = make_pbpi_box(make_dist({{0.0, 0.5}, {2.0, 0.5}}), 0.5, 0.1);
    CHECK(b.g_open == doctest::Approx(1.0));
    CHECK(b.g_peek == doctest::Approx(0.7));
    CHECK(b.y_cross == doctest::Approx(2.3));
    PbpiRule r = pbpi_commit(b);
    CHECK_FALSE(r.dominated);
    CHECK(r.lhs == doctest::Approx(10.0 / 7.0).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(1.2).epsilon(1e-9));
    CHECK_FALSE(r.open);  // lhs > rhs: peek
}

TEST_CASE("pbpi guards and degenerate peeks") {
    Dist d = make_dist({{0.0, 0.5}, {2.0, 0.5}});
    CHECK_THROWS_AS(make_pbpi_box(d, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(make_pbpi_box(d, 0.5, 0.0), DomainError);

    PbpiBox dropped = make_pbpi_box(d, 0.5, 0.6);  // peek costs more than opening
    CHECK(dropped.peek_dropped);
    PbpiRule r = pbpi_commit(dropped);
    CHECK(r.open);
    CHECK(r.dominated);
    CHECK_THROWS_AS(pbpi_commitment(dropped, false), DomainError);
}

TEST_CASE("pbpi mdp structure and committed chains") {
    PbpiBox b = make_pbpi_box(make_dist({{0.0, 0.5}, {2.0, 0.5}}), 0.5, 0.1);
    Mdp m = build_pbpi(b);
    CHECK(validate_mdp(m).ok);
    REQUIRE(m.nodes[0].actions.size() == 2);
    CHECK(m.nodes[0].actions[0].label == "open");
    CHECK(m.nodes[0].actions[1].label == "peek");
    CHECK(enumerate_commitments(m).size() == 2);

    // Open commitment: pay c_o then stop; expected total = 0.5 + 1 = 1.5.
    Committed open_cm = apply_commitment(m, pbpi_commitment(b, true));
    CHECK(plain_total(open_cm.chain.m, 0, Mode::Min) == doctest::Approx(1.5));
    // Peek commitment: pay c_p, observe, then pay c_o and stop: 0.1 + 0.5 + 1.
    Committed peek_cm = apply_commitment(m, pbpi_commitment(b, false));
    CHECK(plain_total(peek_cm.chain.m, 0, Mode::Min) == doctest::Approx(1.6));

    // The two committed curves genuinely cross at y_cross: beyond it the
    // open-committed curve is the cheaper one.
    Curve fo = mdp_curve(open_cm.chain.m, Mode::Min);
    Curve fp = mdp_curve(peek_cm.chain.m, Mode::Min);
    CHECK(fo.value_at(b.y_cross) == doctest::Approx(fp.value_at(b.y_cross)).epsilon(1e-9));
    CHECK(fo.value_at(b.y_cross + 0.5) < fp.value_at(b.y_cross + 0.5) + 1e-12);
    CHECK(fp.value_at(b.y_cross - 0.1) <= fo.value_at(b.y_cross - 0.1) + 1e-12);
}

TEST_CASE("golden-ratio partition splits boxes by cost ratio") {
    Dist d = make_dist({{0.0, 0.5}, {2.0, 0.5}});
    std::vector<PbpiBox> boxes = {
        make_pbpi_box(d, 0.3, 0.2),   // ratio 1.5 < phi: open side
        make_pbpi_box(d, 0.4, 0.2),   // ratio 2.0 > phi: peek side
        make_pbpi_box(d, 0.2, 0.2),   // ratio 1.0: open side
    };
    auto [open_side, peek_side] = pbpi_phi_partition(boxes);
    CHECK(open_side == std::vector<int>{0, 2});
    CHECK(peek_side == std::vector<int>{1});
}

// ---------------------------------------------------------------------------
// Additive boxes
// ---------------------------------------------------------------------------

TEST_CASE("additive box tree pays every probe cost") {
    AdditiveBox b;
    b.components = {{make_dist({{1.0, 0.5}, {3.0, 0.5}}), 0.25},
                    {make_dist({{0.0, 0.5}, {2.0, 0.5}}), 0.5}};
    Mdp m = build_additive(b);
    CHECK(validate_mdp(m).ok);
    double want = 2.0 + 1.0 + 0.75;  // sum of means + sum of costs
    CHECK(dist_mean(mdp_surrogate(m, Mode::Min)) == doctest::Approx(want).epsilon(1e-10));

    for (std::vector<int> order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
        Chain ch = additive_order_chain(b, order);
        CHECK(plain_total(ch.m, 0, Mode::Min) == doctest::Approx(want).epsilon(1e-10));
    }
    CHECK_THROWS_AS(additive_order_chain(b, {0}), DomainError);
    CHECK_THROWS_AS(additive_order_chain(b, {0, 0}), DomainError);
}

TEST_CASE("additive static commitment picks the best order deterministically") {
    AdditiveBox b;
    b.components = {{make_dist({{5.0, 1.0}}), 1.0},                      // no information
                    {make_dist({{0.0, 0.5}, {10.0, 0.5}}), 1.0}};        // informative
    std::vector<int> best = additive_static_commit(b, Mode::Min);
    double best_level =
        water_fill(additive_order_chain(b, best), Mode::Min).water_level.at(0);
    for (std::vector<int> order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
        double level =
            water_fill(additive_order_chain(b, order), Mode::Min).water_level.at(0);
        CHECK(best_level <= level + 1e-9);
    }

    AdditiveBox tie;
    tie.components = {{make_dist({{1.0, 0.5}, {3.0, 0.5}}), 0.5},
                      {make_dist({{1.0, 0.5}, {3.0, 0.5}}), 0.5}};
    CHECK(additive_static_commit(tie, Mode::Min) == std::vector<int>{0, 1});

    AdditiveBox big;
    for (int i = 0; i < 7; ++i)
        big.components.push_back({make_dist({{1.0, 1.0}}), 0.1});
    CHECK_THROWS_AS(additive_static_commit(big), CapError);
}

// ---------------------------------------------------------------------------
// Weighing-scale alternatives
// ---------------------------------------------------------------------------

TEST_CASE("weighing-scale parameters on a small support") {
    WsAlternative a = make_ws_alternative(
        make_dist({{1.0, 0.25}, {2.0, 0.25}, {3.0, 0.25}, {4.0, 0.25}}), 0.3);
    CHECK(a.mu == doctest::Approx(2.5));
    CHECK(a.med == doctest::Approx(2.0));  // lower atom of the 0.5 tie
    CHECK(a.g == doctest::Approx(2.1).epsilon(1e-10));
    CHECK(a.h == doctest::Approx(2.9).epsilon(1e-10));
    CHECK(a.kappa == doctest::Approx(1.25 + std::log2(2.5 / 2.1)).epsilon(1e-9));

    Dist ref = ws_surrogate_reference(a);
    CHECK(dists_close(ref, make_dist({{2.1, 0.5}, {2.9, 0.5}}), 1e-9));
}

TEST_CASE("weighing-scale parameters degrade gracefully") {
    WsAlternative a = make_ws_alternative(make_dist({{1.0, 0.5}, {3.0, 0.5}}), 2.5);
    CHECK(std::isnan(a.h));      // cost above the mean: no draining level
    CHECK(std::isnan(a.kappa));  // g above the mean as well
}

TEST_CASE("full weigh tree stops for free and never loses mass") {
    WsAlternative a = make_ws_alternative(
        make_dist({{1.0, 0.25}, {2.0, 0.25}, {3.0, 0.25}, {4.0, 0.25}}), 0.3);
    Mdp m = build_ws(a);
    CHECK(validate_mdp(m).ok);
    for (const MdpNode& nd : m.nodes) {
        if (nd.terminal()) continue;
        bool has_stop = false;
        for (const MdpAction& act : nd.actions)
            if (act.label == "stop") has_stop = true;
        CHECK(has_stop);
    }
    // Optimal plain value never weighs: the surrogate mean is exactly mu.
    CHECK(dist_mean(mdp_surrogate(m, Mode::Min)) == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("weigh tree prunes uninformative branches") {
    // Width 0.2 <= cost 0.5: the tree collapses to an immediate stop.
    WsAlternative tight = make_ws_alternative(make_dist({{1.0, 0.5}, {1.2, 0.5}}), 0.5);
    Mdp m = build_ws(tight);
    CHECK(m.nodes.size() == 2);  // root + its stop terminal
    // A menu that offers no in-range threshold on a wide support is an error.
    WsAlternative wide = make_ws_alternative(make_dist({{1.0, 0.5}, {9.0, 0.5}}), 0.1);
    CHECK_THROWS_AS(build_ws(wide, {42.0}), DomainError);
}

TEST_CASE("halving chain resolves certain outcomes without weighing") {
    WsAlternative a =
        make_ws_alternative(make_dist({{1.0, 1.0 / 3}, {2.0, 1.0 / 3}, {3.0, 1.0 / 3}}), 0.1);
    // Thresholds 5, 2.5: the first is certain-below and costs nothing.
    Chain ch = ws_halving_chain(a, 2.0, 5.0);
    Amortization am = water_fill(ch, Mode::Min);
    std::map<double, double> seen;
    for (const auto& [leaf, p] : am.leaf_prob)
        seen[ch.m.nodes[static_cast<std::size_t>(leaf)].value] += p;
    REQUIRE(seen.size() == 2);
    CHECK(seen.at(3.0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(seen.at(1.5) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    // Only one weighing is ever paid.
    CHECK(plain_total(ch.m, 0, Mode::Min) == doctest::Approx(2.0 + 0.1).epsilon(1e-10));

    // Threshold below the whole support: certain-above, stop immediately.
    WsAlternative high = make_ws_alternative(make_dist({{4.0, 0.5}, {6.0, 0.5}}), 0.2);
    Chain base = ws_halving_chain(high, 1.0, 1.0);
    REQUIRE(base.m.nodes.size() == 1);
    CHECK(base.m.nodes[0].value == doctest::Approx(5.0));
}

TEST_CASE("ws_commit switches between stopping and halving") {
    // Median at the bottom atom: g exceeds min(mu, med), commit to the mean.
    WsAlternative skew = make_ws_alternative(make_dist({{0.0, 0.5}, {10.0, 0.5}}), 4.0);
    Chain stop = ws_commit(skew);
    REQUIRE(stop.m.nodes.size() == 1);
    CHECK(stop.m.nodes[0].value == doctest::Approx(5.0));

    // The discrete-uniform instance commits to the halving chain with
    // t1 = g = 2, t2 = min(med, h) = 4.95; expected total = 5.3.
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < 100; ++i) atoms.emplace_back(0.05 + 0.1 * i, 0.01);
    WsAlternative unif = make_ws_alternative(make_dist(atoms), 0.2);
    CHECK(unif.g == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(unif.h == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(unif.med == doctest::Approx(4.95));
    CHECK(unif.kappa == doctest::Approx(5.0 / 4.95 + std::log2(5.0 / 2.0)).epsilon(1e-9));
    Chain commit = ws_commit(unif);
    CHECK(plain_total(commit.m, 0, Mode::Min) == doctest::Approx(5.3).epsilon(1e-10));
}

// ---------------------------------------------------------------------------
// Optional-inspection boxes
// ---------------------------------------------------------------------------

TEST_CASE("pboi box parameters on the worked two-point prize") {
    PboiBox b = make_pboi_box(make_dist({{1.0, 0.75}, {8.0, 0.25}}), 1.0);
    CHECK_FALSE(b.normalized);
    CHECK(b.mu == doctest::Approx(2.75));
    CHECK(b.g == doctest::Approx(4.0));
    CHECK(b.h_below == doctest::Approx(7.0 / 3.0).epsilon(1e-10));
    CHECK(b.h == doctest::Approx(7.0 / 3.0).epsilon(1e-10));
    CHECK(dists_close(b.w_open, make_dist({{1.0, 0.75}, {4.0, 0.25}}), 1e-9));
    CHECK(dists_close(b.w_star, make_dist({{7.0 / 3.0, 0.75}, {4.0, 0.25}}), 1e-9));
    CHECK(dist_mean(b.w_star) == doctest::Approx(b.mu).epsilon(1e-10));
}

TEST_CASE("pboi degenerate boxes are normalized away") {
    // cost 0.8 > E[(X - mu)+] = 0.5: grabbing always wins.
    PboiBox b = make_pboi_box(make_dist({{1.0, 0.5}, {3.0, 0.5}}), 0.8);
    CHECK(b.normalized);
    CHECK(b.cost == doctest::Approx(0.0));
    REQUIRE(b.dist.size() == 1);
    CHECK(b.dist.v[0] == doctest::Approx(2.0));
    SemilocalRule r = pboi_semilocal_rule(b, 0.1);
    CHECK(r.alpha == doctest::Approx(1.0));
    CHECK(r.p == doctest::Approx(0.0));
}

TEST_CASE("semilocal rule and check on the worked prize box") {
    PboiBox b = make_pboi_box(make_dist({{1.0, 0.75}, {8.0, 0.25}}), 1.0);
    SemilocalRule r = pboi_semilocal_rule(b, 0.1);
    CHECK(r.alpha == doctest::Approx(0.765407554672).epsilon(1e-9));
    CHECK(r.p == doctest::Approx(0.278330019881).epsilon(1e-9));
    CHECK_FALSE(r.degenerate);

    SemilocalCheck ok_chk = check_semilocal(b, r.p, r.alpha, 0.1);
    CHECK(ok_chk.ok);
    // Inflating the scaling factor breaks the inequality and names a witness.
    SemilocalCheck bad = check_semilocal(b, r.p, r.alpha + 0.05, 0.1);
    CHECK_FALSE(bad.ok);
    CHECK(bad.slack > 0.0);
}

TEST_CASE("pboi mdp offers open and grab") {
    PboiBox b = make_pboi_box(make_dist({{1.0, 0.75}, {8.0, 0.25}}), 1.0);
    Mdp m = build_pboi(b);
    CHECK(validate_mdp(m).ok);
    REQUIRE(m.nodes[0].actions.size() == 2);
    CHECK(m.nodes[0].actions[0].label == "open");
    CHECK(m.nodes[0].actions[1].label == "grab");
    // Grabbing unopened is the best plain policy: E[W*] = mu in max mode.
    CHECK(dist_mean(mdp_surrogate(m, Mode::Max)) == doctest::Approx(2.75).epsilon(1e-10));
}
