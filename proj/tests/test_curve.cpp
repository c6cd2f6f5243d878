#include "doctest.h"
#include "helpers.hpp"

#include "cics/curve.hpp"
#include "cics/dist.hpp"

using namespace cics;

TEST_CASE("curve_of matches expected_clamp everywhere") {
    auto g = testutil::rng(404);
    std::uniform_real_distribution<double> yy(0.0, 14.0);
    for (int it = 0; it < 100; ++it) {
        Dist d = testutil::random_dist(g, 5);
        Curve cmin = curve_of(d, Mode::Min);
        Curve cmax = curve_of(d, Mode::Max);
        for (int k = 0; k < 6; ++k) {
            double y = yy(g);
            CHECK(cmin.value_at(y) ==
                  doctest::Approx(expected_clamp(d, y, Clamp::Min)).epsilon(1e-12));
            CHECK(cmax.value_at(y) ==
                  doctest::Approx(expected_clamp(d, y, Clamp::Max)).epsilon(1e-12));
        }
        CHECK(cmin.y.front() == 0.0);
        CHECK(cmax.value_at_zero() == doctest::Approx(dist_mean(d)).epsilon(1e-12));
    }
}

TEST_CASE("curve/dist round-trip is exact in both modes") {
    auto g = testutil::rng(505);
    for (int it = 0; it < 200; ++it) {
        Dist d = testutil::random_dist(g, 6);
        CHECK(dists_close(dist_of(curve_of(d, Mode::Min)), d, 1e-9));
        CHECK(dists_close(dist_of(curve_of(d, Mode::Max)), d, 1e-9));
    }
}

TEST_CASE("diag_scale matches scaling the underlying law") {
    auto g = testutil::rng(606);
    // Min mode stretches (alpha >= 1), max mode shrinks (alpha in (0, 1]).
    std::uniform_real_distribution<double> stretch(1.0, 3.0);
    std::uniform_real_distribution<double> shrink(0.2, 1.0);
    for (int it = 0; it < 100; ++it) {
        Dist d = testutil::random_dist(g, 5, 0.125, 9.0);
        for (Mode mode : {Mode::Min, Mode::Max}) {
            double alpha = mode == Mode::Min ? stretch(g) : shrink(g);
            Curve scaled = diag_scale(curve_of(d, mode), alpha);
            CHECK(dists_close(dist_of(scaled), scale_dist(d, alpha), 1e-9));
        }
    }
    Dist d = make_dist({{1.0, 0.5}, {3.0, 0.5}});
    CHECK_THROWS_AS(diag_scale(curve_of(d, Mode::Min), 0.9), DomainError);
    CHECK_THROWS_AS(diag_scale(curve_of(d, Mode::Max), 1.1), DomainError);
}

TEST_CASE("combine takes the pointwise envelope") {
    // Two-action tree from the two_action_choice instance: the lower envelope
    // of y, 1 + E[min(y, X1)], 1/8 + E[min(y, X2)] has breakpoints
    // (0,0,1), (1,1,3/4), (2.5,2.125,1/4), (4,2.5,0).
    Dist x1 = make_dist({{2.0 / 3.0, 0.75}, {4.0, 0.25}});
    Dist x2 = make_dist({{0.5, 0.25}, {3.0, 0.75}});
    Curve c1 = curve_of(x1, Mode::Min);
    Curve c2 = curve_of(x2, Mode::Min);
    Curve f1 = affine_sum({{&c1, 1.0}}, 1.0, Mode::Min);
    Curve f2 = affine_sum({{&c2, 1.0}}, 0.125, Mode::Min);
    Curve env = combine({identity_curve(Mode::Min), f1, f2});
    REQUIRE(env.y.size() == 4);
    CHECK(env.y[0] == doctest::Approx(0.0));
    CHECK(env.f[0] == doctest::Approx(0.0));
    CHECK(env.s[0] == doctest::Approx(1.0));
    CHECK(env.y[1] == doctest::Approx(1.0));
    CHECK(env.f[1] == doctest::Approx(1.0));
    CHECK(env.s[1] == doctest::Approx(0.75));
    CHECK(env.y[2] == doctest::Approx(2.5));
    CHECK(env.f[2] == doctest::Approx(2.125));
    CHECK(env.s[2] == doctest::Approx(0.25));
    CHECK(env.y[3] == doctest::Approx(4.0));
    CHECK(env.f[3] == doctest::Approx(2.5));
    CHECK(env.s[3] == doctest::Approx(0.0));
}

TEST_CASE("combine lower/upper envelope property on random curves") {
    auto g = testutil::rng(707);
    std::uniform_real_distribution<double> yy(0.0, 14.0);
    for (int it = 0; it < 60; ++it) {
        for (Mode mode : {Mode::Min, Mode::Max}) {
            Dist d1 = testutil::random_dist(g, 4);
            Dist d2 = testutil::random_dist(g, 4);
            Curve c1 = curve_of(d1, mode);
            Curve c2 = curve_of(d2, mode);
            Curve env = combine({c1, c2, identity_curve(mode)});
            for (int k = 0; k < 8; ++k) {
                double y = yy(g);
                double want = mode == Mode::Min
                                  ? std::min({c1.value_at(y), c2.value_at(y), y})
                                  : std::max({c1.value_at(y), c2.value_at(y), y});
                CHECK(env.value_at(y) == doctest::Approx(want).epsilon(1e-10));
            }
            // Min-mode optimality curves are concave: slopes nonincreasing.
            // Max-mode ones are convex: slopes nondecreasing.
            for (std::size_t i = 0; i + 1 < env.s.size(); ++i) {
                if (mode == Mode::Min)
                    CHECK(env.s[i + 1] <= env.s[i] + 1e-12);
                else
                    CHECK(env.s[i + 1] >= env.s[i] - 1e-12);
            }
        }
    }
}

TEST_CASE("affine_sum adds curves and constants") {
    Dist d = make_dist({{1.0, 0.5}, {3.0, 0.5}});
    Curve c = curve_of(d, Mode::Min);
    Curve two = affine_sum({{&c, 2.0}}, 0.5, Mode::Min);
    for (double y : {0.0, 0.7, 1.0, 2.2, 3.0, 5.0})
        CHECK(two.value_at(y) == doctest::Approx(2.0 * c.value_at(y) + 0.5).epsilon(1e-12));
}

TEST_CASE("first-order dominance and its second-order consequence") {
    auto g = testutil::rng(808);
    std::uniform_real_distribution<double> up(0.0, 2.0);
    int checked = 0;
    for (int it = 0; it < 250; ++it) {
        Dist a = testutil::random_dist(g, 5);
        // b = a with every atom pushed up: a is stochastically smaller.
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t i = 0; i < a.size(); ++i)
            atoms.emplace_back(a.v[i] + std::round(up(g) * 8.0) / 8.0, a.p[i]);
        Dist b = dist_from_weighted(atoms, 1e-12);
        DomCheck first = dominates_1st(a, b);
        CHECK(first.ok);
        CHECK(dominates_2nd(a, b, Mode::Min).ok);
        CHECK(dominates_2nd(b, a, Mode::Max).ok);
        ++checked;
    }
    CHECK(checked == 250);
}

TEST_CASE("dominance checks report meaningful witnesses") {
    Dist a = make_dist({{0.0, 0.5}, {10.0, 0.5}});
    Dist b = make_dist({{4.0, 1.0}});
    // E[min(y,a)] <= E[min(y,b)] fails for y near 10: witness must expose it.
    DomCheck chk = dominates_2nd(b, a, Mode::Min);
    CHECK_FALSE(chk.ok);
    double fa = expected_clamp(b, chk.witness, Clamp::Min);
    double fb = expected_clamp(a, chk.witness, Clamp::Min);
    CHECK(fa > fb);

    DomCheck f1 = dominates_1st(b, a);
    CHECK_FALSE(f1.ok);
}

TEST_CASE("local_approx_factor brackets the scaled dominance threshold") {
    Dist w = make_dist({{1.0, 0.5}, {3.0, 0.5}});
    CHECK(local_approx_factor(w, w, Mode::Min) == doctest::Approx(1.0));
    CHECK(local_approx_factor(w, w, Mode::Max) == doctest::Approx(1.0));

    // w_pi = 1.5x the law: factor must be exactly 1.5 in Min mode.
    Dist wp = scale_dist(w, 1.5);
    double f = local_approx_factor(wp, w, Mode::Min);
    CHECK(f == doctest::Approx(1.5).epsilon(1e-6));
    // Max mode: wp = 0.6x the law: factor 0.6.
    Dist wm = scale_dist(w, 0.6);
    double fm = local_approx_factor(wm, w, Mode::Max);
    CHECK(fm == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("sdom_map reproduces the worked mapping") {
    Dist x = make_dist({{1.0, 0.25}, {2.5, 0.5}, {4.0, 0.25}});
    Dist z = make_dist({{2.0, 0.75}, {4.0, 0.25}});
    StochasticMap m = sdom_map(x, z, Mode::Min);
    REQUIRE(m.from.size() == 2);
    const Dist& row2 = map_row(m, 2.0);
    REQUIRE(row2.size() == 2);
    CHECK(row2.v[0] == doctest::Approx(1.0));
    CHECK(row2.p[0] == doctest::Approx(1.0 / 3.0));
    CHECK(row2.v[1] == doctest::Approx(2.5));
    CHECK(row2.p[1] == doctest::Approx(2.0 / 3.0));
    const Dist& row4 = map_row(m, 4.0);
    REQUIRE(row4.size() == 1);
    CHECK(row4.v[0] == doctest::Approx(4.0));
    CHECK(row4.p[0] == doctest::Approx(1.0));
    CHECK(dists_close(pushforward(m, z), x, 1e-9));
}

TEST_CASE("sdom_map postconditions on random dominated pairs") {
    auto g = testutil::rng(909);
    for (int it = 0; it < 120; ++it) {
        Dist z = testutil::random_dist(g, 4, 1.0, 9.0);
        Dist x = testutil::risky_spread(g, z, /*allow_shift_down=*/it % 2 == 0);
        REQUIRE(dominates_2nd(x, z, Mode::Min).ok);
        StochasticMap m = sdom_map(x, z, Mode::Min);
        CHECK(dists_close(pushforward(m, z), x, 1e-9));
        for (std::size_t i = 0; i < m.from.size(); ++i)
            CHECK(dist_mean(m.to[i]) <= m.from[i] + 1e-9);
    }
}

TEST_CASE("sdom_map max mode mirrors the min construction") {
    auto g = testutil::rng(1010);
    for (int it = 0; it < 60; ++it) {
        Dist z = testutil::random_dist(g, 4, 1.0, 9.0);
        // Spread + shift up: x dominates z for the max-mode (convex) order.
        std::uniform_real_distribution<double> shift(0.0, 0.3);
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double s = std::round(shift(g) * 8.0) / 8.0;
            double dlt = std::round(shift(g) * 8.0) / 8.0;
            atoms.emplace_back(z.v[i] + s - dlt, 0.5 * z.p[i]);
            atoms.emplace_back(z.v[i] + s + dlt, 0.5 * z.p[i]);
        }
        Dist x = dist_from_weighted(atoms, 1e-12);
        REQUIRE(dominates_2nd(x, z, Mode::Max).ok);
        StochasticMap m = sdom_map(x, z, Mode::Max);
        CHECK(dists_close(pushforward(m, z), x, 1e-9));
        for (std::size_t i = 0; i < m.from.size(); ++i)
            CHECK(dist_mean(m.to[i]) >= m.from[i] - 1e-9);
    }
}

TEST_CASE("sdom_map rejects non-dominated pairs with a witness") {
    Dist x = make_dist({{4.0, 1.0}});
    Dist z = make_dist({{0.0, 0.5}, {10.0, 0.5}});
    CHECK_THROWS_AS(sdom_map(x, z, Mode::Min), DomainError);
}
