#pragma once

// The theorems as experiments: certified pointwise brackets from tangent
// balls, error profiles against model expansions, log-log rate fits, the
// localization comparison, and the barrier sign audit.

#include "liouville/solver/solve.hpp"

namespace liouville::asymptotics {

using closedform::DomainPtr;
using closedform::ModelExpansion;
using geometry::DomainSpec;
using solver::GridSolution;

// ---------------------------------------------------------------------------
// Pointwise brackets (interior / exterior tangent balls).

struct Bracket {
    double lower = 0, upper = 0;
    double r_interior = 0, r_exterior = 0;
    bool cone_fallback = false;  // lower came from the exterior-cone bound
};

namespace detail {

// Largest verified ball around c_t = foot + t e through p: distance-certified
// containment, bisected between the last good and first bad radius.
inline double max_interior_ball(const DomainSpec& dom, Point2 foot, Vec2 e, double d) {
    auto ok = [&](double t) {
        Point2 c = foot + e * t;
        if (!dom.inside(c)) return false;
        return dom.project(c).d >= t * (1.0 - 1e-9);
    };
    double good = d, bad = 0;
    for (double t = d; t <= 4 * dom.diameter(); t *= 1.7) {
        if (ok(t))
            good = t;
        else {
            bad = t;
            break;
        }
    }
    if (bad == 0) return good;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (good + bad);
        (ok(mid) ? good : bad) = mid;
    }
    return good;
}

inline bool exterior_ball_ok(const DomainSpec& dom, Point2 center, double r) {
    if (dom.inside(center)) return false;
    return dom.project(center).d >= r * (1.0 - 1e-9);
}

}  // namespace detail

// Upper bound: ball solution on the largest verified interior ball through p
// tangent-ish at the foot. Lower bound: exterior-ball solution at the
// regularity-prescribed radius (1/|kappa| for C2-class feet, d^{1-alpha}/(2M)
// for C1alpha), shrunk geometrically until the distance certificate holds;
// if nothing verifies, the exterior-cone bound of the nearest corner is used
// and flagged.
inline Bracket bracket_point(const DomainSpec& dom, Point2 p) {
    geometry::DistanceResult res = dom.distance_to_boundary(p);
    double d = res.d;
    Vec2 e = (p - res.foot) / d;
    Bracket out;

    double t = detail::max_interior_ball(dom, res.foot, e, d);
    out.r_interior = t;
    // |p - c_t| = t - d: u_{t,c}(p) = log(2t / (t^2 - (t-d)^2))
    out.upper = std::log(2 * t / (t * t - (t - d) * (t - d)));

    const auto& seg = dom.segments()[res.segment];
    double r0;
    if (seg.regularity() == geometry::Regularity::C1Alpha) {
        r0 = std::pow(d, 1.0 - seg.alpha()) / (2.0 * seg.bound_constant());
    } else {
        double kappa = geometry::curvature_at(seg, res.t);
        r0 = std::abs(kappa) > 1e-9 ? (kappa > 0 ? 1.0 : 0.95) / std::abs(kappa)
                                    : 0.5 * dom.diameter();
    }
    r0 = std::min(r0, 2.0 * dom.diameter());
    double r = r0;
    bool found = false;
    while (r > 1e-3 * d) {
        if (detail::exterior_ball_ok(dom, res.foot - e * r, r)) {
            found = true;
            break;
        }
        r *= 0.6;
    }
    if (found) {
        out.r_exterior = r;
        // |p - center| = d + r: v_{r}(p) = -log d - log(1 + d/(2r))
        out.lower = -std::log(d) - std::log1p(d / (2 * r));
    } else {
        // Exterior-cone comparison at the nearest corner (Lemma-style bound).
        double theta = kPi / 2;
        if (res.corner >= 0) {
            double mu = dom.corner(res.corner).mu;
            theta = std::min(kPi / 2, 0.5 * (2.0 - mu) * kPi);
        }
        double s = std::sin(theta);
        out.lower = -std::log(d) - std::log((1 + 2 * s) / (2 * s * s));
        out.cone_fallback = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Error profiles and rate fits.

struct ProfileSample {
    double d = 0;        // distance to the boundary (or |z| for localization)
    double e_abs = 0;
    double e_signed = 0;
    Point2 p;
};

struct ErrorProfile {
    std::vector<ProfileSample> samples;  // ascending d
    std::string domain;
    std::string model;
    std::string note;
};

struct SamplerSpec {
    Point2 anchor;        // boundary point or corner vertex
    Vec2 direction;       // unit inward direction of the sampling ray
    double d_hi = 0.4;    // largest target distance
    double d_lo = 0.01;   // smallest target distance
    int per_octave = 3;   // geometric levels per factor of 2
};

namespace detail {

// Point on the ray with d(p) = target (monotone bisection in the ray param).
inline Point2 ray_point_at_distance(const DomainSpec& dom, const SamplerSpec& sp, double target) {
    auto dist_at = [&](double s) -> double {
        Point2 p = sp.anchor + sp.direction * s;
        if (!dom.inside(p)) return -1;
        return dom.project(p).d;
    };
    double lo = 0, hi = target;
    // walk outward until we pass the target
    for (int i = 0; i < 200 && dist_at(hi) >= 0 && dist_at(hi) < target; ++i) {
        lo = hi;
        hi *= 1.25;
    }
    if (!(dist_at(hi) >= target))
        throw std::domain_error("error_profile: ray cannot reach the requested distance");
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (dist_at(mid) < target ? lo : hi) = mid;
    }
    return sp.anchor + sp.direction * (0.5 * (lo + hi));
}

}  // namespace detail

// Signed and absolute errors of the numerical solution against a model at
// geometrically spaced distances along a ray toward the boundary feature.
inline ErrorProfile error_profile(const GridSolution& sol, const ModelExpansion& model,
                                  const SamplerSpec& sp) {
    const DomainSpec& dom = *sol.grid->domain;
    if (!(sp.d_lo > 0) || sp.d_hi <= sp.d_lo)
        throw std::invalid_argument("error_profile: bad distance window");
    ErrorProfile prof;
    prof.domain = dom.name();
    prof.model = model.describe();
    double ratio = std::pow(2.0, 1.0 / sp.per_octave);
    for (double target = sp.d_hi; target >= sp.d_lo * (1 - 1e-12); target /= ratio) {
        Point2 p = detail::ray_point_at_distance(dom, sp, target);
        if (!sol.in_trust(p)) continue;  // sampler contract: trust-region points only
        double d = dom.project(p).d;
        double e = sol.evaluate(p) - model.value(p);
        prof.samples.push_back({d, std::abs(e), e, p});
    }
    std::reverse(prof.samples.begin(), prof.samples.end());
    if (prof.samples.size() < 4)
        throw std::runtime_error("error_profile: fewer than 4 usable samples");
    return prof;
}

struct RateFit {
    double slope = 0;
    double log_c = 0;  // fit is log e = slope log d + log_c
    double rms = 0;    // residual RMS in log space
    double d_min = 0, d_max = 0;
    int count = 0;
    int dropped_zero = 0;

    double constant() const { return std::exp(log_c); }
};

// Least-squares line in (log d, log e); zero errors are dropped with a
// diagnostic count.
inline RateFit fit_rate(const ErrorProfile& prof, double d_min = 0, double d_max = 0) {
    if (prof.samples.empty()) throw std::invalid_argument("fit_rate: empty profile");
    if (d_min <= 0) d_min = prof.samples.front().d;
    if (d_max <= 0) d_max = prof.samples.back().d;
    std::vector<std::pair<double, double>> pts;
    int dropped = 0;
    for (const auto& s : prof.samples) {
        if (s.d < d_min * (1 - 1e-12) || s.d > d_max * (1 + 1e-12)) continue;
        if (s.e_abs <= 0) {
            ++dropped;
            continue;
        }
        pts.emplace_back(std::log(s.d), std::log(s.e_abs));
    }
    if (pts.size() < 4)
        throw std::runtime_error("fit_rate: fewer than 4 positive samples in the window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = double(pts.size());
    double denom = n * sxx - sx * sx;
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.log_c = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (auto [x, y] : pts) {
        double r = y - (fit.slope * x + fit.log_c);
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    fit.d_min = d_min;
    fit.d_max = d_max;
    fit.count = int(pts.size());
    fit.dropped_zero = dropped;
    return fit;
}

struct EstimateReport {
    bool pass = false;
    double expected_power = 0;
    double slope_tol = 0;
    RateFit fit;
    ErrorProfile profile;  // embedded samples
};

// Pass iff the fitted slope reaches expected_power - slope_tol with a finite
// constant. Failure is a result, not an error.
inline EstimateReport check_estimate(const ErrorProfile& prof, double expected_power,
                                     double slope_tol) {
    EstimateReport rep;
    rep.expected_power = expected_power;
    rep.slope_tol = slope_tol;
    rep.fit = fit_rate(prof);
    rep.profile = prof;
    rep.pass = rep.fit.slope >= expected_power - slope_tol && std::isfinite(rep.fit.log_c);
    return rep;
}

// ---------------------------------------------------------------------------
// Localization (two domains coinciding near a corner).

// |u1 - u2| sampled along the corner bisector at geometric radii; the profile
// carries |z| in the d slot. Throws if the boundaries differ inside the
// sampling ball.
inline ErrorProfile localization_gap(const GridSolution& sol1, const GridSolution& sol2,
                                     Point2 vertex, double mu, double rho, double r_hi,
                                     double r_lo, int per_octave = 3) {
    const DomainSpec& d1 = *sol1.grid->domain;
    const DomainSpec& d2 = *sol2.grid->domain;
    if (r_hi > 0.5 * rho)
        throw std::invalid_argument("localization_gap: sampling ball exceeds the coincidence ball");
    // Coincidence check: boundary points of each domain inside B_{2 r_hi} must
    // lie on the other boundary.
    for (const auto& dom_pair : {std::pair{&d1, &d2}, std::pair{&d2, &d1}}) {
        for (const auto& q : dom_pair.first->polyline()) {
            if (distance(q, vertex) > 2 * r_hi) continue;
            if (dom_pair.second->project(q).d > 1e-9 * d1.scale())
                throw std::runtime_error("localization_gap: domains differ inside the sampling ball");
        }
    }
    geometry::RigidMotion frame = d1.corner_frame(d1.corners().at(0));
    ErrorProfile prof;
    prof.domain = d1.name() + " vs " + d2.name();
    prof.model = "localization";
    double ratio = std::pow(2.0, 1.0 / per_octave);
    for (double r = r_hi; r >= r_lo * (1 - 1e-12); r /= ratio) {
        Point2 p = frame.inverse(from_polar(r, mu * kPi / 2));
        if (!sol1.in_trust(p) || !sol2.in_trust(p)) continue;
        double gap = sol1.evaluate(p) - sol2.evaluate(p);
        prof.samples.push_back({r, std::abs(gap), gap, p});
    }
    std::reverse(prof.samples.begin(), prof.samples.end());
    if (prof.samples.size() < 4)
        throw std::runtime_error("localization_gap: fewer than 4 usable samples");
    return prof;
}

// ---------------------------------------------------------------------------
// Barrier sign audit (supersolution / subsolution FD checks on the cone).

struct SuperSubReport {
    int samples = 0;
    int violations_super = 0;
    int violations_sub = 0;
    int widened_tol = 0;         // points where the FD error budget exceeded 1e-6
    double worst_super = -1e300; // most positive supersolution residual
    double worst_sub = 1e300;    // most negative subsolution residual
    bool pass() const { return violations_super == 0 && violations_sub == 0; }
};

// Residual sign checks at quasi-random cone points r in (r_lo, r_hi),
// theta in the middle band of the opening. The tolerance at each point is
// max(1e-6, FD roundoff budget ~ 4e-9/d^2); widened points are counted.
inline SuperSubReport super_sub_check(double mu, double A, int count, std::uint64_t seed = 1,
                                      double r_lo = 0.01, double r_hi = 10.0) {
    ScalarField super = closedform::cone_supersolution(mu, A);
    ScalarField sub = closedform::cone_subsolution(mu, A);
    ModelExpansion cone = closedform::cone_solution(mu);
    Rng rng(derive_seed(seed, "supersub"));
    SuperSubReport rep;
    for (int i = 0; i < count; ++i) {
        double r = rng.log_uniform(r_lo, r_hi);
        double th = rng.uniform(0.15 * mu * kPi, 0.85 * mu * kPi);
        Point2 p = from_polar(r, th);
        double d_edge = cone.defect(p) / mu;  // r sin(theta/mu) ~ distance scale to the edges
        double h = std::clamp(0.0046 * d_edge, 1e-7, 0.02);
        double tol = std::max(1e-6, 8e-9 / (d_edge * d_edge));
        if (tol > 1e-6) ++rep.widened_tol;
        double rs = closedform::liouville_residual(super, p, h);
        double rb = closedform::liouville_residual(sub, p, h);
        rep.worst_super = std::max(rep.worst_super, rs);
        rep.worst_sub = std::min(rep.worst_sub, rb);
        if (rs > tol) ++rep.violations_super;
        if (rb < -tol) ++rep.violations_sub;
        ++rep.samples;
    }
    return rep;
}

}  // namespace liouville::asymptotics
