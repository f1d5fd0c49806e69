#pragma once

// Parametric boundary pieces. Curves carry analytic first and second
// derivatives: distance projection, tangent cones and curvature for the
// rate experiments must not depend on numerical differentiation of the
// geometry.

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>

#include "liouville/core.hpp"

namespace liouville::geometry {

enum class Regularity { C1Alpha, C2, C2Alpha };

inline const char* to_string(Regularity r) {
    switch (r) {
        case Regularity::C1Alpha: return "C1alpha";
        case Regularity::C2: return "C2";
        case Regularity::C2Alpha: return "C2alpha";
    }
    return "?";
}

class CurveSegment {
public:
    using Map = std::function<Point2(double)>;

    CurveSegment() = default;
    CurveSegment(Map pos, Map vel, Map acc, Regularity reg, double alpha, double bound_m,
                 std::string descriptor = {})
        : pos_(std::move(pos)), vel_(std::move(vel)), acc_(std::move(acc)),
          reg_(reg), alpha_(alpha), bound_m_(bound_m), descriptor_(std::move(descriptor)) {
        if (bound_m_ <= 0) throw std::invalid_argument("CurveSegment: bound constant must be > 0");
    }

    Point2 at(double t) const { return pos_(t); }
    Vec2 velocity(double t) const { return vel_(t); }
    Vec2 acceleration(double t) const { return acc_(t); }

    Point2 start() const { return pos_(0.0); }
    Point2 end() const { return pos_(1.0); }

    Regularity regularity() const { return reg_; }
    double alpha() const { return alpha_; }
    double bound_constant() const { return bound_m_; }
    // Construction recipe, e.g. "line 0 0 1 0"; used by the JSON round trip.
    const std::string& descriptor() const { return descriptor_; }

    // Arc length by 64-panel Gauss-ish midpoint sampling; plenty for scale
    // decisions (chart radii, thin-domain checks).
    double length() const {
        const int n = 256;
        double s = 0;
        for (int i = 0; i < n; ++i) s += velocity((i + 0.5) / n).norm();
        return s / n;
    }

    bool valid() const { return static_cast<bool>(pos_); }

private:
    Map pos_, vel_, acc_;
    Regularity reg_ = Regularity::C2;
    double alpha_ = 1.0;
    double bound_m_ = 1.0;
    std::string descriptor_;
};

// ---------------------------------------------------------------------------
// Built-in curves.

inline CurveSegment line_segment(Point2 a, Point2 b) {
    if (distance(a, b) == 0) throw std::invalid_argument("line_segment: degenerate");
    std::string d = "line " + format_g(a.x) + " " + format_g(a.y) + " " + format_g(b.x) + " " + format_g(b.y);
    return CurveSegment(
        [a, b](double t) { return a + (b - a) * t; },
        [a, b](double) { return b - a; },
        [](double) { return Vec2{0, 0}; },
        Regularity::C2Alpha, 1.0, 1e-12 + 1.0, d);
}

// Circular arc, angles in radians, traversed from theta0 to theta1
// (counterclockwise when theta1 > theta0).
inline CurveSegment circle_arc(Point2 center, double radius, double theta0, double theta1) {
    if (radius <= 0) throw std::invalid_argument("circle_arc: radius must be > 0");
    double span = theta1 - theta0;
    std::string d = "arc " + format_g(center.x) + " " + format_g(center.y) + " " + format_g(radius) +
                    " " + format_g(theta0) + " " + format_g(theta1);
    return CurveSegment(
        [=](double t) { return center + from_polar(radius, theta0 + span * t); },
        [=](double t) {
            double a = theta0 + span * t;
            return Vec2{-radius * span * std::sin(a), radius * span * std::cos(a)};
        },
        [=](double t) {
            double a = theta0 + span * t;
            return Vec2{-radius * span * span * std::cos(a), -radius * span * span * std::sin(a)};
        },
        Regularity::C2Alpha, 1.0, 1.0 / radius + 1e-12, d);
}

// Graph curve y = phi(x) over x in [x0, x1] in a local frame given by
// origin + rotation. phi, dphi, ddphi are analytic callables.
struct GraphFrame {
    Point2 origin{0, 0};
    double rotation = 0.0;  // radians, frame x-axis direction
};

inline CurveSegment graph_curve(const GraphFrame& fr, double x0, double x1,
                                std::function<double(double)> phi,
                                std::function<double(double)> dphi,
                                std::function<double(double)> ddphi,
                                Regularity reg, double alpha, double bound_m,
                                std::string descriptor = {}) {
    double c = std::cos(fr.rotation), s = std::sin(fr.rotation);
    auto to_world = [=](Vec2 v) { return Vec2{c * v.x - s * v.y, s * v.x + c * v.y}; };
    Point2 o = fr.origin;
    double dx = x1 - x0;
    return CurveSegment(
        [=](double t) {
            double x = x0 + dx * t;
            return o + to_world({x, phi(x)});
        },
        [=](double t) {
            double x = x0 + dx * t;
            return to_world({dx, dx * dphi(x)});
        },
        [=](double t) {
            double x = x0 + dx * t;
            return to_world({0.0, dx * dx * ddphi(x)});
        },
        reg, alpha, bound_m, std::move(descriptor));
}

// Signed curvature of the parametric curve at t (positive when the curve
// bends toward the left of the velocity).
inline double parametric_curvature(const CurveSegment& c, double t) {
    Vec2 v = c.velocity(t), a = c.acceleration(t);
    double speed = v.norm();
    if (speed == 0) throw std::domain_error("curvature: vanishing velocity");
    return cross(v, a) / (speed * speed * speed);
}

// Samples the |phi''| (C2) or |phi'(x)|/x^alpha (C1alpha) bound in graph
// coordinates over the local tangent frame at base_t and reports the observed
// maximum. Used to validate the declared bound constant.
inline double sampled_bound_constant(const CurveSegment& c, int samples = 512, double base_t = 0.0) {
    double worst = 0;
    if (c.regularity() == Regularity::C1Alpha) {
        Point2 base = c.at(base_t);
        Vec2 v0 = c.velocity(base_t);
        if (v0.norm() < 1e-14) {
            double probe = base_t < 0.5 ? base_t + 1e-5 : base_t - 1e-5;
            v0 = c.at(probe) - base;
            if (base_t >= 0.5) v0 = v0 * -1.0;
        }
        Vec2 tan = normalized(v0);
        for (int i = 0; i <= samples; ++i) {
            double t = double(i) / samples;
            if (t == base_t) continue;
            Vec2 rel = c.at(t) - base;
            Vec2 v = c.velocity(t);
            double x = std::abs(dot(rel, tan));
            if (x <= 1e-14) continue;
            double slope = std::abs(cross(tan, v)) / std::max(std::abs(dot(tan, v)), 1e-300);
            worst = std::max(worst, slope / std::pow(x, c.alpha()));
        }
    } else {
        for (int i = 0; i <= samples; ++i) {
            double t = double(i) / samples;
            Vec2 v = c.velocity(t), a = c.acceleration(t);
            double sp2 = v.norm2();
            // |second derivative in graph coords| = |v x a| / |v|^3
            worst = std::max(worst, std::abs(cross(v, a)) / (sp2 * std::sqrt(sp2)));
        }
    }
    return worst;
}

}  // namespace liouville::geometry
