#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "liouville/geometry/build.hpp"
#include "liouville/geometry/io.hpp"

using namespace liouville;
using namespace liouville::geometry;
using Catch::Approx;

namespace {

// Dense-scan projection oracle: global minimum of |p - c(t)| over a fine
// parameter grid (independent of the Newton path in project_to_curve).
DistanceResult scan_project(const CurveSegment& c, Point2 p, int n = 1000000) {
    DistanceResult best;
    best.d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        double t = double(i) / n;
        double d = distance(c.at(t), p);
        if (d < best.d) {
            best.d = d;
            best.t = t;
            best.foot = c.at(t);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("project_to_curve on flat and circular pieces") {
    auto axis = line_segment({-1, 0}, {1, 0});
    auto r = project_to_curve(axis, {0.3, 0.5});
    CHECK(r.d == Approx(0.5).margin(1e-12));
    CHECK(r.foot.x == Approx(0.3).margin(1e-12));
    CHECK(r.foot.y == Approx(0.0).margin(1e-12));

    auto arc = circle_arc({0, 0}, 1.0, 0.0, kPi);  // upper half circle
    auto rc = project_to_curve(arc, {0, 0.5});
    CHECK(rc.d == Approx(0.5).margin(1e-12));
    CHECK(rc.foot.x == Approx(0.0).margin(1e-10));
    CHECK(rc.foot.y == Approx(1.0).margin(1e-10));
}

TEST_CASE("project_to_curve matches the dense-scan oracle on a parabola") {
    auto para = graph_curve({{0, 0}, 0.0}, -1.0, 1.0, [](double x) { return x * x; },
                            [](double x) { return 2 * x; }, [](double) { return 2.0; },
                            Regularity::C2Alpha, 1.0, 2.0);
    Point2 p{0.5, 0.1};
    auto fast = project_to_curve(para, p);
    // frozen from the million-point scan oracle
    CHECK(fast.d == Approx(0.11001475174462406).margin(1e-6));
    CHECK(fast.foot.x == Approx(0.42841811584953576).margin(1e-6));
    CHECK(fast.foot.y == Approx(0.18354208198806624).margin(1e-6));
    auto slow = scan_project(para, p);
    CHECK(fast.d == Approx(slow.d).margin(1e-6));
    CHECK(distance(fast.foot, slow.foot) < 1e-5);

    // never fails: a point opposite an endpoint clamps there
    auto edge = project_to_curve(para, {3.0, 9.0});
    CHECK(edge.t == Approx(1.0).margin(1e-9));
}

TEST_CASE("distance_to_boundary basics") {
    auto dom = disk(1.0);
    auto r = dom.distance_to_boundary({0.5, 0});
    CHECK(r.d == Approx(0.5).margin(1e-10));

    SECTION("quarter-plane corner distances") {
        auto sec = sector(0.5, 1.0);
        auto q = sec.distance_to_boundary({0.2, 0.1});
        CHECK(q.d == Approx(0.1).margin(1e-12));
        CHECK(q.corner == 0);
        CHECK(q.d1 == Approx(0.1).margin(1e-12));
        CHECK(q.d2 == Approx(0.2).margin(1e-12));
    }
    SECTION("invalid queries") {
        CHECK_THROWS_AS(dom.distance_to_boundary({2.0, 0}), std::domain_error);
        CHECK_THROWS_AS(dom.distance_to_boundary({1.0, 0}), std::domain_error);
    }
    SECTION("agrees with per-segment projections") {
        auto cc = curved_corner(0.75, 0.2, 1.0);
        Rng rng(7);
        int done = 0;
        for (int tries = 0; tries < 4000 && done < 100; ++tries) {
            Point2 p{rng.uniform(cc.bbox_min().x, cc.bbox_max().x),
                     rng.uniform(cc.bbox_min().y, cc.bbox_max().y)};
            if (!cc.inside(p)) continue;
            auto res = cc.distance_to_boundary(p);
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& s : cc.segments()) dmin = std::min(dmin, project_to_curve(s, p).d);
            CHECK(res.d == Approx(dmin).margin(1e-12));
            ++done;
        }
        REQUIRE(done == 100);
    }
    SECTION("matches dense-scan oracle on a perturbed corner") {
        auto cc = curved_corner(0.75, 0.2, 1.0);
        Rng rng(11);
        int done = 0;
        for (int tries = 0; tries < 2000 && done < 12; ++tries) {
            Point2 p{rng.uniform(0.0, 0.8), rng.uniform(0.0, 0.8)};
            if (!cc.inside(p)) continue;
            auto res = cc.distance_to_boundary(p);
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& s : cc.segments()) dmin = std::min(dmin, scan_project(s, p, 200000).d);
            CHECK(res.d == Approx(dmin).margin(1e-8));
            ++done;
        }
        REQUIRE(done == 12);
    }
}

TEST_CASE("curvature sign convention and values") {
    auto seg = line_segment({0, 0}, {1, 0});
    CHECK(curvature_at(seg, 0.5) == Approx(0.0).margin(1e-14));

    // circle traversed counterclockwise (disk on the left): +1/r
    auto circ = circle_arc({0, 0}, 2.0, 0, 2 * kPi);
    CHECK(curvature_at(circ, 0.25) == Approx(0.5).margin(1e-12));

    // ellipse (a,b) = (2,1) at (2,0): curvature b/a^2 = 0.25
    auto ell = CurveSegment(
        [](double t) { return Point2{2 * std::cos(2 * kPi * t), std::sin(2 * kPi * t)}; },
        [](double t) {
            return Vec2{-4 * kPi * std::sin(2 * kPi * t), 2 * kPi * std::cos(2 * kPi * t)};
        },
        [](double t) {
            return Vec2{-8 * kPi * kPi * std::cos(2 * kPi * t),
                        -4 * kPi * kPi * std::sin(2 * kPi * t)};
        },
        Regularity::C2Alpha, 1.0, 2.0);
    double kappa = curvature_at(ell, 0.0);
    CHECK(kappa == Approx(0.25).margin(1e-12));
    // cross-check by finite differences of the tangent angle over arc length
    double dt = 1e-6;
    auto angle = [&](double t) { return std::atan2(ell.velocity(t).y, ell.velocity(t).x); };
    double dtheta = angle(dt) - angle(-dt);
    double ds = 2 * dt * ell.velocity(0.0).norm();
    CHECK(dtheta / ds == Approx(kappa).epsilon(1e-5));

    auto rough = power_graph_arm(1, 0.5, 0.2, 1.0, 1.0);
    CHECK_THROWS_AS(curvature_at(rough, 0.5), std::domain_error);
}

TEST_CASE("corner frames") {
    SECTION("sector corner is already in standard position") {
        auto sec = sector(0.5, 1.0);
        auto fr = sec.corner_frame(sec.corner(0));
        CHECK(fr.is_identity(1e-12));
    }
    SECTION("vertex (1,1) with sigma_1 pointing up rotates by -pi/2") {
        std::vector<CurveSegment> segs;
        segs.push_back(line_segment({1, 1}, {1, 2}));
        segs.push_back(line_segment({1, 2}, {0, 1}));
        segs.push_back(line_segment({0, 1}, {1, 1}));
        CornerSpec c{{1, 1}, 0.5, 0, 2, 0};
        auto dom = DomainSpec::create(std::move(segs), {c});
        auto fr = dom.corner_frame(dom.corner(0));
        Point2 q = fr.apply({1, 2});  // on sigma_1's ray
        CHECK(q.x == Approx(1.0).margin(1e-12));
        CHECK(q.y == Approx(0.0).margin(1e-12));
        // sigma_2's ray lands at polar angle mu pi
        Point2 q2 = fr.apply({0.5, 1});
        CHECK(polar_angle(q2) == Approx(0.5 * kPi).margin(1e-9));
    }
    SECTION("frames are isometries") {
        auto cc = curved_corner(1.5, 0.3, 1.0);
        auto fr = cc.corner_frame(cc.corner(0));
        Rng rng(3);
        for (int i = 0; i < 50; ++i) {
            Point2 a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            Point2 b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            CHECK(distance(fr.apply(a), fr.apply(b)) == Approx(distance(a, b)).margin(1e-12));
            CHECK(distance(fr.inverse(fr.apply(a)), a) < 1e-12);
        }
    }
    SECTION("sigma_2 tangent rays open at mu pi for built domains") {
        for (double mu : {0.5, 0.75, 1.5}) {
            auto cc = curved_corner(mu, 0.25, 1.0);
            Vec2 r1 = cc.tangent_ray(cc.corner(0), true);
            Vec2 r2 = cc.tangent_ray(cc.corner(0), false);
            double open_angle = polar_angle({dot(r1, r2), cross(r1, r2)});
            CHECK(open_angle == Approx(mu * kPi).margin(1e-9));
        }
    }
}

TEST_CASE("region classification") {
    // near-flat C^{1,alpha} corner with mu = 1 behaves like a half-plane edge
    auto dom = c1alpha_corner(0.5, 0.01, 1.3, 1.0);
    RegionConfig cfg;
    cfg.c0 = 0.1;

    SECTION("far-from-boundary point lands in Omega1") {
        Point2 p{0.2, 0.1};  // chart radius is 0.2 * min segment length
        double zn = p.norm();
        auto r = dom.distance_to_boundary(p);
        REQUIRE(std::min(r.d1, r.d2) > cfg.c0 * zn);
        CHECK(dom.classify_region(0, p, cfg) == RegionClass::Omega1);
    }
    SECTION("equality cases map to the gamma curves") {
        // walk down until d1 = c0 |z| within 1e-13
        double theta = 0.3;
        auto d_active = [&](double rr) {
            Point2 p = from_polar(rr, theta);
            auto r = dom.distance_to_boundary(p);
            return std::min(r.d1, r.d2) - cfg.c0 * p.norm();
        };
        double lo = 0.01, hi = 0.2;
        REQUIRE(d_active(lo) * d_active(hi) < 0);
        for (int i = 0; i < 100; ++i) {
            double mid = 0.5 * (lo + hi);
            (d_active(mid) * d_active(lo) > 0 ? lo : hi) = mid;
        }
        Point2 p = from_polar(0.5 * (lo + hi), theta);
        CHECK(dom.classify_region(0, p, cfg) == RegionClass::Gamma1);
    }
    SECTION("partition and independent re-evaluation") {
        Rng rng(17);
        const CornerSpec& c = dom.corner(0);
        RegionConfig rc;  // defaults
        double c0 = 0.4 * (0.5 * c.mu * std::atan(0.25));
        double c1 = 10.0 / dom.diameter();
        int done = 0;
        for (int tries = 0; tries < 20000 && done < 1000; ++tries) {
            Point2 p = from_polar(rng.log_uniform(1e-3, c.chart_radius * 0.99),
                                  rng.uniform(0.05, kPi - 0.05));
            if (!dom.inside(p)) continue;
            auto r = dom.distance_to_boundary(p);
            double da = std::min(r.d1, r.d2), zn = p.norm();
            RegionClass got = dom.classify_region(0, p, rc);
            RegionClass want = da > c0 * zn          ? RegionClass::Omega1
                               : da < c1 * zn * zn   ? RegionClass::Omega3
                                                     : RegionClass::Omega2;
            // skip the measure-zero gamma curves (tolerance band)
            if (std::abs(da - c0 * zn) < 1e-11 || std::abs(da - c1 * zn * zn) < 1e-11) continue;
            CHECK(got == want);
            ++done;
        }
        REQUIRE(done == 1000);
    }
    SECTION("outside the chart is an error") {
        CHECK_THROWS_AS(dom.classify_region(0, {1.0, 0.5}, cfg), std::domain_error);
    }
}

TEST_CASE("build_domain dispatch and validation") {
    CHECK(disk(1.0).corners().empty());
    CHECK(disk(1.0).segments().size() == 1);

    auto sec = sector(0.5, 1.0);
    CHECK(sec.segments().size() == 3);
    CHECK(sec.corners().size() == 1);
    CHECK(sec.corner(0).mu == 0.5);

    SECTION("curved corner tangents open at mu pi") {
        auto cc = curved_corner(1.5, 0.1, 1.0);
        Vec2 r1 = cc.tangent_ray(cc.corner(0), true);
        Vec2 r2 = cc.tangent_ray(cc.corner(0), false);
        CHECK(polar_angle({dot(r1, r2), cross(r1, r2)}) == Approx(1.5 * kPi).margin(1e-9));
    }
    SECTION("invalid parameters throw") {
        CHECK_THROWS_AS(disk(-1.0), std::invalid_argument);
        CHECK_THROWS_AS(sector(2.5, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(curved_corner(0.5, 0.6, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(build_domain("sector", {}), std::invalid_argument);
        CHECK_THROWS_AS(build_domain("nope", {{"mu", 0.5}}), std::invalid_argument);
    }
    SECTION("dispatcher") {
        auto v = build_domain("localized_pair", {{"mu", 0.5}});
        REQUIRE(v.size() == 2);
        CHECK(v[0].corners().size() == 1);
        CHECK(v[1].corners().size() == 1);
        CHECK(build_domain("smooth_blob", {}).size() == 1);
    }
}

TEST_CASE("localized pair coincides inside the shared ball") {
    auto pair = localized_pair(1.5);
    for (const auto& q : pair.first.polyline()) {
        if (q.norm() > 0.9 * pair.rho || q.norm() < 1e-9) continue;
        CHECK(pair.second.project(q).d < 1e-9);
    }
}

TEST_CASE("graph-curve foot inequalities near a rough point") {
    // |phi'(x)| <= M_b x^alpha with M_b = M (1 + alpha); feet of points with
    // |y| <= x/4 satisfy x' <= 2|z| and |x - x'| <= d |phi'(x')|.
    double alpha = 0.5, M = 0.2;
    auto arm = power_graph_arm(1, alpha, M, 1.0, 1.0);
    auto dphi = [&](double x) { return M * (1 + alpha) * std::pow(x, alpha); };
    Rng rng(23);
    int done = 0;
    while (done < 1000) {
        double x = rng.log_uniform(1e-3, 0.5);
        double y = M * std::pow(x, 1 + alpha) + rng.uniform(0.0, x / 4);
        if (std::abs(y) > x / 4) continue;
        Point2 z{x, y};
        auto r = project_to_curve(arm, z);
        double xp = r.foot.x;
        CHECK(xp <= 2 * z.norm() + 1e-12);
        CHECK(std::abs(x - xp) <= r.d * std::abs(dphi(xp)) + 1e-12);
        ++done;
    }
}

TEST_CASE("declared bound constants are consistent with sampled derivatives") {
    auto arc = circle_arc({0, 0}, 2.0, 0, kPi);
    CHECK(sampled_bound_constant(arc) == Approx(arc.bound_constant()).epsilon(0.1));
    auto arm = power_graph_arm(1, 0.5, 0.2, 1.0, 1.0);
    CHECK(sampled_bound_constant(arm) <= arm.bound_constant() * 1.1);
    CHECK(sampled_bound_constant(arm) >= arm.bound_constant() * 0.9);
}

TEST_CASE("domain JSON round trip") {
    for (const auto& dom :
         {disk(1.0), sector(0.75, 1.0), curved_corner(1.5, 0.3, 1.0),
          c1alpha_corner(0.5, 0.2, 1.0, 1.0), smooth_blob(), localized_pair(0.5).second}) {
        auto j = to_json(dom);
        auto back = domain_from_json(j);
        REQUIRE(back.segments().size() == dom.segments().size());
        REQUIRE(back.corners().size() == dom.corners().size());
        for (std::size_t s = 0; s < dom.segments().size(); ++s)
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
                CHECK(distance(back.segments()[s].at(t), dom.segments()[s].at(t)) < 1e-12);
        for (std::size_t c = 0; c < dom.corners().size(); ++c) {
            CHECK(back.corners()[c].mu == dom.corners()[c].mu);
            CHECK(distance(back.corners()[c].vertex, dom.corners()[c].vertex) < 1e-12);
        }
    }
    SECTION("custom curves without descriptors are rejected") {
        CurveSegment custom([](double t) { return Point2{t, 0}; },
                            [](double) { return Vec2{1, 0}; }, [](double) { return Vec2{0, 0}; },
                            Regularity::C2, 1.0, 1.0);
        CHECK_THROWS_AS(segment_to_json(custom), std::invalid_argument);
    }
}

TEST_CASE("self-intersecting loops are rejected") {
    // bow tie
    std::vector<CurveSegment> segs;
    segs.push_back(line_segment({0, 0}, {1, 1}));
    segs.push_back(line_segment({1, 1}, {1, 0}));
    segs.push_back(line_segment({1, 0}, {0, 1}));
    segs.push_back(line_segment({0, 1}, {0, 0}));
    CHECK_THROWS_AS(DomainSpec::create(std::move(segs), {}), std::invalid_argument);
}

TEST_CASE("concurrent distance queries agree with serial ones") {
    auto dom = smooth_blob();
    std::vector<Point2> pts;
    Rng rng(5);
    while (pts.size() < 200) {
        Point2 p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (dom.inside(p)) pts.push_back(p);
    }
    std::vector<double> serial(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) serial[i] = dom.distance_to_boundary(pts[i]).d;
    std::vector<double> parallel(pts.size());
    std::vector<std::thread> threads;
    for (int w = 0; w < 4; ++w)
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < pts.size(); i += 4)
                parallel[i] = dom.distance_to_boundary(pts[i]).d;
        });
    for (auto& t : threads) t.join();
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(parallel[i] == serial[i]);
}
