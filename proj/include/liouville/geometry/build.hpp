#pragma once

// Domain factories for the experiments: disks, sectors, conformally bent
// corners, C^{1,alpha} corners, smooth blobs and localized pairs. Each
// built-in segment carries a descriptor ("type p1 p2 ...") from which the
// JSON round trip reconstructs it.

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "liouville/geometry/domain.hpp"

namespace liouville::geometry {

using Complex = std::complex<double>;

inline Complex to_complex(Point2 p) { return {p.x, p.y}; }
inline Point2 to_point(Complex z) { return {z.real(), z.imag()}; }

// ---------------------------------------------------------------------------
// Quadratic conformal map Phi(z) = z + amp z^2, injective on |z| < 1/(2 amp).

struct QuadraticMap {
    double amp = 0;

    Complex eval(Complex z) const { return z + amp * z * z; }
    Complex deriv(Complex z) const { return 1.0 + 2.0 * amp * z; }
    // Principal-branch inverse, valid well inside the injectivity disk.
    Complex inverse(Complex w) const {
        if (amp == 0) return w;
        return (std::sqrt(Complex(1.0) + 4.0 * amp * w) - 1.0) / (2.0 * amp);
    }
    Complex inverse_deriv(Complex w) const { return 1.0 / deriv(inverse(w)); }
};

namespace detail {

inline std::string join_numbers(std::initializer_list<double> vs) {
    std::string s;
    for (double v : vs) s += " " + format_g(v);
    return s;
}

// Image of a parametric curve under the quadratic map, chain-rule derivatives.
inline CurveSegment map_under_quadratic(const QuadraticMap& m, CurveSegment::Map z,
                                        CurveSegment::Map dz, CurveSegment::Map ddz,
                                        Regularity reg, double alpha, double bound,
                                        std::string descriptor) {
    auto pos = [m, z](double t) { return to_point(m.eval(to_complex(z(t)))); };
    auto vel = [m, z, dz](double t) {
        return to_point(m.deriv(to_complex(z(t))) * to_complex(dz(t)));
    };
    auto acc = [m, z, dz, ddz](double t) {
        Complex zt = to_complex(z(t)), d1 = to_complex(dz(t)), d2 = to_complex(ddz(t));
        return to_point(2.0 * m.amp * d1 * d1 + m.deriv(zt) * d2);
    };
    return CurveSegment(pos, vel, acc, reg, alpha, bound, std::move(descriptor));
}

}  // namespace detail

// which: 1 = first arm (image of [0,R] on the real axis), 2 = closing arc,
// 3 = second arm (image of the mu*pi ray, traversed toward the vertex).
inline CurveSegment quadratic_corner_segment(int which, double mu, double amp, double R) {
    QuadraticMap m{amp};
    double span = mu * kPi;
    std::string d = "qseg" + detail::join_numbers({double(which), mu, amp, R});
    switch (which) {
        case 1:
            return detail::map_under_quadratic(
                m, [R](double t) { return Point2{R * t, 0}; },
                [R](double) { return Point2{R, 0}; }, [](double) { return Point2{0, 0}; },
                Regularity::C2Alpha, 1.0, std::max(2 * amp, 1e-9), d);
        case 2:
            return detail::map_under_quadratic(
                m, [=](double t) { return from_polar(R, span * t); },
                [=](double t) { return perp(from_polar(R, span * t)) * span; },
                [=](double t) { return from_polar(R, span * t) * (-span * span); },
                Regularity::C2Alpha, 1.0, 1.0 / R + 2 * amp, d);
        case 3:
            return detail::map_under_quadratic(
                m, [=](double t) { return from_polar(R * (1 - t), span); },
                [=](double t) { return from_polar(-R, span); },
                [](double) { return Point2{0, 0}; },
                Regularity::C2Alpha, 1.0, std::max(2 * amp, 1e-9), d);
        default:
            throw std::invalid_argument("quadratic_corner_segment: which must be 1, 2 or 3");
    }
}

// C^{1,alpha} power-graph arm y = sign M x^{1+alpha} over x in [0,R] in the
// frame rotated by `rotation`; which=1 runs outward, which=2 inward.
inline CurveSegment power_graph_arm(int which, double alpha, double M, double R, double mu) {
    auto phi = [M, alpha](double x) { return M * std::pow(x, 1 + alpha); };
    auto dphi = [M, alpha](double x) { return M * (1 + alpha) * std::pow(x, alpha); };
    auto ddphi = [M, alpha](double x) {
        return M * (1 + alpha) * alpha * std::pow(std::max(x, 1e-14), alpha - 1.0);
    };
    double bound = M * (1 + alpha);
    std::string d = "pgarm" + detail::join_numbers({double(which), alpha, M, R, mu});
    if (which == 1)
        return graph_curve({{0, 0}, 0.0}, 0.0, R, phi, dphi, ddphi, Regularity::C1Alpha, alpha,
                           bound, d);
    if (which == 2) {
        auto nphi = [phi](double x) { return -phi(x); };
        auto ndphi = [dphi](double x) { return -dphi(x); };
        auto nddphi = [ddphi](double x) { return -ddphi(x); };
        return graph_curve({{0, 0}, mu * kPi}, R, 0.0, nphi, ndphi, nddphi, Regularity::C1Alpha,
                           alpha, bound, d);
    }
    throw std::invalid_argument("power_graph_arm: which must be 1 or 2");
}

// Star-shaped loop r(theta) = R (1 + a cos(lobes * theta)).
inline CurveSegment blob_segment(double R, double a, int lobes) {
    auto rad = [=](double th) { return R * (1 + a * std::cos(lobes * th)); };
    auto drad = [=](double th) { return -R * a * lobes * std::sin(lobes * th); };
    auto ddrad = [=](double th) { return -R * a * lobes * lobes * std::cos(lobes * th); };
    auto pos = [=](double t) { return from_polar(rad(2 * kPi * t), 2 * kPi * t); };
    auto vel = [=](double t) {
        double th = 2 * kPi * t;
        Vec2 e = from_polar(1.0, th);
        return (e * drad(th) + perp(e) * rad(th)) * (2 * kPi);
    };
    auto acc = [=](double t) {
        double th = 2 * kPi * t;
        Vec2 e = from_polar(1.0, th);
        return (e * (ddrad(th) - rad(th)) + perp(e) * (2 * drad(th))) * (4 * kPi * kPi);
    };
    double bound = (1.0 + a * lobes * lobes) / (R * (1 - a));
    return CurveSegment(pos, vel, acc, Regularity::C2Alpha, 1.0, bound,
                        "blob" + detail::join_numbers({R, a, double(lobes)}));
}

// Closure arc r(s) = R (1 + amp (1 - cos(2 pi k s))/2) >= R over the sector
// opening: never enters B_R, so localized pairs coincide there.
inline CurveSegment wavy_arc_segment(double mu, double R, double amp, int lobes) {
    double span = mu * kPi;
    auto rad = [=](double s) { return R * (1 + 0.5 * amp * (1 - std::cos(2 * kPi * lobes * s))); };
    auto drad = [=](double s) { return R * amp * kPi * lobes * std::sin(2 * kPi * lobes * s); };
    auto ddrad = [=](double s) {
        return R * amp * 2 * kPi * kPi * lobes * lobes * std::cos(2 * kPi * lobes * s);
    };
    auto pos = [=](double s) { return from_polar(rad(s), span * s); };
    auto vel = [=](double s) {
        Vec2 e = from_polar(1.0, span * s);
        return e * drad(s) + perp(e) * (rad(s) * span);
    };
    auto acc = [=](double s) {
        Vec2 e = from_polar(1.0, span * s);
        return e * (ddrad(s) - rad(s) * span * span) + perp(e) * (2 * drad(s) * span);
    };
    return CurveSegment(pos, vel, acc, Regularity::C2Alpha, 1.0, (1 + amp * lobes * lobes) * 8 / R,
                        "wavyarc" + detail::join_numbers({mu, R, amp, double(lobes)}));
}

// ---------------------------------------------------------------------------
// Whole-domain factories.

inline DomainSpec disk(double r, Point2 x0 = {0, 0}) {
    if (r <= 0) throw std::invalid_argument("disk: radius must be > 0");
    return DomainSpec::create({circle_arc(x0, r, 0, 2 * kPi)}, {}, "disk r=" + format_g(r));
}

// Circular sector of opening mu*pi and radius R, vertex at the origin,
// first arm along the positive x-axis. One tagged corner (the vertex).
inline DomainSpec sector(double mu, double R) {
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("sector: mu must lie in (0,2)");
    if (R <= 0) throw std::invalid_argument("sector: R must be > 0");
    std::vector<CurveSegment> segs;
    segs.push_back(line_segment({0, 0}, {R, 0}));
    segs.push_back(circle_arc({0, 0}, R, 0, mu * kPi));
    segs.push_back(line_segment(from_polar(R, mu * kPi), {0, 0}));
    CornerSpec corner{{0, 0}, mu, 0, 2, 0};
    return DomainSpec::create(std::move(segs), {corner},
                              "sector mu=" + format_g(mu) + " R=" + format_g(R));
}

// Image of the exact sector under Phi(z) = z + amp z^2. Angles are preserved,
// so the corner still opens at mu*pi, but the arms are genuinely curved C^2
// curves; the same map transports the cone solution, giving the solver an
// exact reference near the corner.
inline DomainSpec curved_corner(double mu, double amp, double R = 1.0) {
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("curved_corner: mu must lie in (0,2)");
    // either bend direction is fine; injectivity needs |amp| R < 0.45
    if (amp != 0 && R >= 0.45 / std::abs(amp))
        throw std::invalid_argument("curved_corner: R too large for injectivity of the map");
    CornerSpec corner{{0, 0}, mu, 0, 2, 0};
    return DomainSpec::create({quadratic_corner_segment(1, mu, amp, R),
                               quadratic_corner_segment(2, mu, amp, R),
                               quadratic_corner_segment(3, mu, amp, R)},
                              {corner},
                              "curved_corner mu=" + format_g(mu) + " amp=" + format_g(amp) +
                                  " R=" + format_g(R));
}

// Corner with two C^{1,alpha} arms y = M x^{1+alpha} (in each arm's tangent
// frame), opening mu*pi; mu = 1 is the flat C^{1,alpha} boundary-point case.
inline DomainSpec c1alpha_corner(double alpha, double M, double R, double mu = 1.0) {
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("c1alpha_corner: alpha in (0,1]");
    if (M <= 0 || R <= 0) throw std::invalid_argument("c1alpha_corner: M and R must be > 0");
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("c1alpha_corner: mu must lie in (0,2)");
    if (M * std::pow(R, alpha) > 0.2)
        throw std::invalid_argument("c1alpha_corner: M R^alpha too large (arms would fold)");
    auto arm1 = power_graph_arm(1, alpha, M, R, mu);
    auto arm2 = power_graph_arm(2, alpha, M, R, mu);
    Point2 e1 = arm1.at(1.0), e2 = arm2.at(0.0);
    double rr = e1.norm();  // = |e2| by the mirror symmetry
    double a1 = polar_angle(e1);
    double a2 = polar_angle(e2);
    if (a2 <= a1) a2 += 2 * kPi;
    auto arc = circle_arc({0, 0}, rr, a1, a2);
    CornerSpec corner{{0, 0}, mu, 0, 2, 0};
    return DomainSpec::create({arm1, arc, arm2}, {corner},
                              "c1alpha_corner alpha=" + format_g(alpha) + " M=" + format_g(M) +
                                  " R=" + format_g(R) + " mu=" + format_g(mu));
}

inline DomainSpec smooth_blob(double R = 1.0, double a = 0.15, int lobes = 3) {
    if (R <= 0 || a < 0 || a >= 0.3)
        throw std::invalid_argument("smooth_blob: need R>0, a in [0,0.3)");
    return DomainSpec::create({blob_segment(R, a, lobes)}, {},
                              "smooth_blob R=" + format_g(R) + " a=" + format_g(a));
}

// ---------------------------------------------------------------------------
// Two domains coinciding inside B_rho of a shared corner at the origin:
// identical straight arms, different far closures (plain arc vs wavy arc).

struct LocalizedPair {
    DomainSpec first;
    DomainSpec second;
    double rho = 0;  // boundaries coincide inside B_rho
};

inline DomainSpec sector_wavy(double mu, double R, double wave_amp, int wave_lobes,
                              const std::string& name) {
    std::vector<CurveSegment> segs;
    segs.push_back(line_segment({0, 0}, {R, 0}));
    segs.push_back(wavy_arc_segment(mu, R, wave_amp, wave_lobes));
    segs.push_back(line_segment(from_polar(R, mu * kPi), {0, 0}));
    CornerSpec corner{{0, 0}, mu, 0, 2, 0};
    return DomainSpec::create(std::move(segs), {corner}, name);
}

inline LocalizedPair localized_pair(double mu) {
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("localized_pair: mu must lie in (0,2)");
    DomainSpec a = sector(mu, 1.0);
    DomainSpec b = sector_wavy(mu, 1.0, 0.6, 3, "localized_pair_b mu=" + format_g(mu));
    return {std::move(a), std::move(b), 1.0};
}

// ---------------------------------------------------------------------------
// String-keyed dispatcher, used by the JSON interface and the CLI.
// localized_pair yields two domains; everything else yields one.

inline std::vector<DomainSpec> build_domain(const std::string& kind,
                                            const std::map<std::string, double>& p) {
    auto get = [&](const std::string& key, double fallback, bool required = false) {
        auto it = p.find(key);
        if (it == p.end()) {
            if (required) throw std::invalid_argument("build_domain: missing parameter " + key);
            return fallback;
        }
        return it->second;
    };
    if (kind == "disk") return {disk(get("r", 1.0), {get("x0", 0.0), get("y0", 0.0)})};
    if (kind == "sector") return {sector(get("mu", 0.5, true), get("R", 1.0))};
    if (kind == "curved_corner")
        return {curved_corner(get("mu", 0.5, true), get("amp", 0.15), get("R", 1.0))};
    if (kind == "c1alpha_corner")
        return {c1alpha_corner(get("alpha", 0.5, true), get("M", 0.2), get("R", 1.0),
                               get("mu", 1.0))};
    if (kind == "smooth_blob")
        return {smooth_blob(get("R", 1.0), get("a", 0.15), int(get("lobes", 3)))};
    if (kind == "localized_pair") {
        LocalizedPair pr = localized_pair(get("mu", 0.5, true));
        return {std::move(pr.first), std::move(pr.second)};
    }
    throw std::invalid_argument("build_domain: unknown kind '" + kind + "'");
}

}  // namespace liouville::geometry
