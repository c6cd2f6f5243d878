#include "doctest.h"
#include "helpers.hpp"

#include "cics/dist.hpp"

using namespace cics;

TEST_CASE("make_dist sorts, merges and validates") {
    Dist d = make_dist({{3.0, 0.25}, {1.0, 0.5}, {3.0, 0.25}});
    REQUIRE(d.size() == 2);
    CHECK(d.v[0] == doctest::Approx(1.0));
    CHECK(d.v[1] == doctest::Approx(3.0));
    CHECK(d.p[0] == doctest::Approx(0.5));
    CHECK(d.p[1] == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_dist({}), DomainError);
    CHECK_THROWS_AS(make_dist({{1.0, 0.7}, {2.0, 0.7}}), DomainError);
    CHECK_THROWS_AS(make_dist({{1.0, -0.5}, {2.0, 1.5}}), DomainError);
}

TEST_CASE("dist_from_weighted drops empty mass and normalizes") {
    Dist d = dist_from_weighted({{2.0, 3.0}, {1.0, 1.0}, {5.0, 0.0}}, 1e-12);
    REQUIRE(d.size() == 2);
    CHECK(d.v[0] == doctest::Approx(1.0));
    CHECK(d.p[0] == doctest::Approx(0.25));
    CHECK(d.p[1] == doctest::Approx(0.75));
    CHECK_THROWS_AS(dist_from_weighted({{1.0, 0.0}}, 1e-12), DomainError);
}

TEST_CASE("moments and quantiles") {
    Dist d = make_dist({{1.0, 0.25}, {2.0, 0.25}, {6.0, 0.5}});
    CHECK(dist_mean(d) == doctest::Approx(3.75));
    Moments mo = moments(d);
    CHECK(mo.mean == doctest::Approx(3.75));
    CHECK(mo.median == doctest::Approx(2.0));  // lower atom at the 0.5 tie
    CHECK(quantile(d, 0.25) == doctest::Approx(1.0));
    CHECK(quantile(d, 0.51) == doctest::Approx(6.0));
    CHECK(quantile(d, 0.0) == doctest::Approx(1.0));
    CHECK(quantile(d, 1.0) == doctest::Approx(6.0));
    CHECK(cdf(d, 1.0) == doctest::Approx(0.25));
    CHECK(cdf(d, 5.9) == doctest::Approx(0.5));
}

TEST_CASE("quantile tolerates accumulated rounding in the cdf") {
    // 100 equal atoms of nominal mass 0.01: the running sum hits 0.5 only up
    // to floating error, yet the median must stay at the 50th atom.
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < 100; ++i) atoms.emplace_back(0.05 + 0.1 * i, 0.01);
    Dist d = make_dist(atoms);
    CHECK(quantile(d, 0.5) == doctest::Approx(4.95));
    CHECK(moments(d).median == doctest::Approx(4.95));
}

TEST_CASE("expected shortfall and clamp closed forms") {
    Dist d = make_dist({{0.0, 0.5}, {4.0, 0.5}});
    CHECK(expected_shortfall(d, 2.0, Side::Below) == doctest::Approx(1.0));  // E[(2-X)+]
    CHECK(expected_shortfall(d, 2.0, Side::Above) == doctest::Approx(1.0));  // E[(X-2)+]
    CHECK(expected_clamp(d, 2.0, Clamp::Min) == doctest::Approx(1.0));       // E[min(2,X)]
    CHECK(expected_clamp(d, 2.0, Clamp::Max) == doctest::Approx(3.0));       // E[max(2,X)]

    // identity: E[min(y,X)] + E[(X-y)+] = E[X]
    auto g = testutil::rng(101);
    for (int it = 0; it < 50; ++it) {
        Dist r = testutil::random_dist(g, 5);
        std::uniform_real_distribution<double> yy(0.0, 12.0);
        double y = yy(g);
        CHECK(expected_clamp(r, y, Clamp::Min) + expected_shortfall(r, y, Side::Above) ==
              doctest::Approx(dist_mean(r)).epsilon(1e-12));
        CHECK(expected_clamp(r, y, Clamp::Max) - expected_shortfall(r, y, Side::Below) ==
              doctest::Approx(dist_mean(r)).epsilon(1e-12));
    }
}

TEST_CASE("solve_index reproduces hand-solved levels") {
    // Below: level g with E[(g-X)+] = c.
    CHECK(solve_index(make_dist({{0.0, 0.5}, {2.0, 0.5}}), 0.5, Side::Below) ==
          doctest::Approx(1.0));
    CHECK(solve_index(make_dist({{2.0 / 3.0, 0.75}, {4.0, 0.25}}), 1.0, Side::Below) ==
          doctest::Approx(2.0));
    CHECK(solve_index(make_dist({{0.5, 0.25}, {3.0, 0.75}}), 0.125, Side::Below) ==
          doctest::Approx(1.0));
    // Above: level g with E[(X-g)+] = c.
    CHECK(solve_index(make_dist({{1.0, 0.75}, {8.0, 0.25}}), 1.0, Side::Above) ==
          doctest::Approx(4.0));
    CHECK(solve_index(make_dist({{1.0, 0.75}, {8.0, 0.25}}), 1.0, Side::Below) ==
          doctest::Approx(7.0 / 3.0));
}

TEST_CASE("solve_index edge cases") {
    Dist d = make_dist({{1.0, 0.5}, {3.0, 0.5}});
    CHECK(solve_index(d, 0.0, Side::Below) == doctest::Approx(1.0));
    CHECK(solve_index(d, 0.0, Side::Above) == doctest::Approx(3.0));
    CHECK_THROWS_AS(solve_index(d, -0.1, Side::Below), DomainError);
    CHECK_THROWS_AS(solve_index(d, 2.5, Side::Above), DomainError);  // c > mean
}

TEST_CASE("solve_index satisfies its defining equation on random inputs") {
    auto g = testutil::rng(202);
    std::uniform_real_distribution<double> cc(0.001, 3.0);
    for (int it = 0; it < 200; ++it) {
        Dist d = testutil::random_dist(g, 5, 0.0, 8.0);
        double c = cc(g);
        double lev = solve_index(d, c, Side::Below);
        CHECK(expected_shortfall(d, lev, Side::Below) == doctest::Approx(c).epsilon(1e-10));
        double ca = std::min(c, 0.9 * dist_mean(d));
        if (ca > 0.0) {
            double la = solve_index(d, ca, Side::Above);
            CHECK(expected_shortfall(d, la, Side::Above) ==
                  doctest::Approx(ca).epsilon(1e-10));
        }
    }
}

TEST_CASE("condition_split preserves total mass and mean") {
    auto g = testutil::rng(303);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        Dist d = testutil::random_dist(g, 5);
        while (d.max_support() <= d.min_support()) d = testutil::random_dist(g, 5);
        // Split points must lie in [min support, max support).
        double t = d.min_support() +
                   uu(g) * 0.999 * (d.max_support() - d.min_support());
        Split s = condition_split(d, t);
        CHECK(s.p_le + s.p_gt == doctest::Approx(1.0).epsilon(1e-12));
        double m = 0.0;
        if (s.p_le > 0.0) m += s.p_le * dist_mean(s.le);
        if (s.p_gt > 0.0) m += s.p_gt * dist_mean(s.gt);
        CHECK(m == doctest::Approx(dist_mean(d)).epsilon(1e-12));
        if (s.p_le > 0.0) CHECK(s.le.max_support() <= t + 1e-12);
        if (s.p_gt > 0.0) CHECK(s.gt.min_support() > t - 1e-12);
    }
    // Out-of-range split points are rejected.
    CHECK_THROWS_AS(condition_split(make_dist({{1.0, 1.0}}), 0.5), DomainError);
    CHECK_THROWS_AS(condition_split(make_dist({{1.0, 0.5}, {2.0, 0.5}}), 2.0),
                    DomainError);
}

TEST_CASE("transforms: scale, shift, clamp, mix") {
    Dist d = make_dist({{1.0, 0.5}, {3.0, 0.5}});
    Dist s = scale_dist(d, 2.0);
    CHECK(s.v[0] == doctest::Approx(2.0));
    CHECK(s.v[1] == doctest::Approx(6.0));
    CHECK_THROWS_AS(scale_dist(d, 0.0), DomainError);

    Dist sh = shift_dist(d, 1.5);
    CHECK(sh.v[0] == doctest::Approx(2.5));
    CHECK_THROWS_AS(shift_dist(d, -1.5), DomainError);

    Dist cl = clamp_dist(d, 2.0, Clamp::Min);  // min(X, 2)
    CHECK(cl.v[0] == doctest::Approx(1.0));
    CHECK(cl.v[1] == doctest::Approx(2.0));
    Dist ch = clamp_dist(d, 2.0, Clamp::Max);  // max(X, 2)
    CHECK(ch.v[0] == doctest::Approx(2.0));
    CHECK(ch.v[1] == doctest::Approx(3.0));

    Dist a = make_dist({{0.0, 1.0}});
    Dist mix = mix_dists({{&a, 0.25}, {&d, 0.75}});
    CHECK(mix.size() == 3);
    CHECK(dist_mean(mix) == doctest::Approx(0.75 * 2.0));
}

TEST_CASE("dists_close distinguishes structure") {
    Dist a = make_dist({{1.0, 0.5}, {2.0, 0.5}});
    Dist b = make_dist({{1.0, 0.5}, {2.0, 0.5}});
    Dist c = make_dist({{1.0, 0.4}, {2.0, 0.6}});
    CHECK(dists_close(a, b));
    CHECK_FALSE(dists_close(a, c));
}
