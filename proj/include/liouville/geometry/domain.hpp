#pragma once

// Piecewise-smooth planar domains with tagged corners: distance queries,
// projections, curvature, corner frames and the near-corner region
// classification used by the rate experiments.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liouville/core.hpp"
#include "liouville/geometry/curve.hpp"

namespace liouville::geometry {

struct CornerSpec {
    Point2 vertex;
    double mu = 1.0;          // opening angle is mu*pi
    int segment1 = -1;        // sigma_1, then sigma_2 in counterclockwise order
    int segment2 = -1;
    double chart_radius = 0;  // filled at domain construction when left 0
};

struct DistanceResult {
    double d = 0;             // distance to the boundary
    Point2 foot;              // closest boundary point
    int segment = -1;         // segment realizing d (lowest id on ties)
    double t = 0;             // curve parameter of the foot
    double second_d = std::numeric_limits<double>::infinity();  // best other segment
    int corner = -1;          // nearest tagged corner, -1 if none
    double d1 = 0, d2 = 0;    // distances to that corner's sigma_1/sigma_2
};

struct RegionConfig {
    double c0 = 0;  // 0 means "use the default 0.4 * (mu/2) * arctan(1/4)"
    double c1 = 0;  // 0 means "use the default 10 / diameter"
};

enum class RegionClass { Omega1, Gamma1, Omega2, Gamma2, Omega3 };

inline const char* to_string(RegionClass c) {
    switch (c) {
        case RegionClass::Omega1: return "Omega1";
        case RegionClass::Gamma1: return "Gamma1";
        case RegionClass::Omega2: return "Omega2";
        case RegionClass::Gamma2: return "Gamma2";
        case RegionClass::Omega3: return "Omega3";
    }
    return "?";
}

// Rigid motion q = R_{-phi} (p - pivot): sends pivot to the origin and the
// direction phi to the positive x-axis.
struct RigidMotion {
    Point2 pivot;
    double c = 1, s = 0;  // cos(phi), sin(phi)

    Point2 apply(Point2 p) const {
        Vec2 r = p - pivot;
        return {c * r.x + s * r.y, -s * r.x + c * r.y};
    }
    Point2 inverse(Point2 q) const {
        return pivot + Vec2{c * q.x - s * q.y, s * q.x + c * q.y};
    }
    bool is_identity(double tol = 1e-14) const {
        return pivot.norm() < tol && std::abs(s) < tol && c > 0;
    }
};

// ---------------------------------------------------------------------------
// Projection of a point onto one curve segment.

namespace detail {

inline double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 80) {
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Global minimizer of |p - curve(t)| over t in [0,1]. Dense scan seeds a
// Newton iteration on the stationarity condition; golden section on the
// bracketing interval is the fallback, so the query never fails.
inline DistanceResult project_to_curve(const CurveSegment& curve, Point2 p) {
    if (!p.finite()) throw std::invalid_argument("project_to_curve: point not finite");
    const int n = 256;
    double best_t = 0, best_q = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        double t = double(i) / n;
        double q = (curve.at(t) - p).norm2();
        if (q < best_q) { best_q = q; best_t = t; }
    }
    double lo = std::max(0.0, best_t - 1.0 / n), hi = std::min(1.0, best_t + 1.0 / n);

    // Newton on g(t) = (c(t)-p).c'(t).
    double t = best_t;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        Vec2 r = curve.at(t) - p;
        Vec2 v = curve.velocity(t), a = curve.acceleration(t);
        double g = dot(r, v);
        double dg = v.norm2() + dot(r, a);
        if (!std::isfinite(g) || !std::isfinite(dg)) break;
        if (t == 0.0 && g > 0) { converged = true; break; }   // clamped minimum at an endpoint
        if (t == 1.0 && g < 0) { converged = true; break; }
        if (dg <= 0) break;
        double step = g / dg;
        double tn = std::clamp(t - step, 0.0, 1.0);
        if (std::abs(tn - t) < 1e-15) { t = tn; converged = true; break; }
        t = tn;
        if (t < lo - 0.1 || t > hi + 0.1) break;  // wandered off the bracket
    }
    if (!converged || (curve.at(t) - p).norm2() > best_q + 1e-30) {
        t = detail::golden_min([&](double s) { return (curve.at(s) - p).norm2(); }, lo, hi);
        if ((curve.at(t) - p).norm2() > best_q) t = best_t;
    }
    DistanceResult res;
    res.t = t;
    res.foot = curve.at(t);
    res.d = distance(p, res.foot);
    return res;
}

// ---------------------------------------------------------------------------

class DomainSpec {
public:
    // One outer loop, counterclockwise (domain on the left of travel).
    static DomainSpec create(std::vector<CurveSegment> loop, std::vector<CornerSpec> corners,
                             std::string name = {}) {
        DomainSpec d;
        d.segments_ = std::move(loop);
        d.corners_ = std::move(corners);
        d.name_ = std::move(name);
        d.finalize();
        return d;
    }

    const std::vector<CurveSegment>& segments() const { return segments_; }
    const std::vector<CornerSpec>& corners() const { return corners_; }
    const std::string& name() const { return name_; }

    Point2 bbox_min() const { return bbox_min_; }
    Point2 bbox_max() const { return bbox_max_; }
    double diameter() const { return diameter_; }
    // Desk scale used for default tolerances and rate windows.
    double scale() const { return 0.5 * diameter_; }
    Point2 centroid() const { return centroid_; }
    const std::vector<Point2>& polyline() const { return polyline_; }

    // Winding-number test on the cached boundary polyline.
    bool inside(Point2 p) const {
        if (p.x < bbox_min_.x || p.x > bbox_max_.x || p.y < bbox_min_.y || p.y > bbox_max_.y)
            return false;
        int wn = 0;
        const auto& pl = polyline_;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
            const Point2& a = pl[i];
            const Point2& b = pl[i + 1];
            if (a.y <= p.y) {
                if (b.y > p.y && cross(b - a, p - a) > 0) ++wn;
            } else {
                if (b.y <= p.y && cross(b - a, p - a) < 0) --wn;
            }
        }
        return wn != 0;
    }

    // Minimum over segments of the projection distance; valid for any finite
    // p, inside or not. Ties resolve to the lowest segment id.
    DistanceResult project(Point2 p) const {
        DistanceResult best;
        best.d = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        for (int i = 0; i < int(segments_.size()); ++i) {
            DistanceResult r = project_to_curve(segments_[i], p);
            if (r.d < best.d - 1e-14 * scale()) {
                second = best.d;
                best = r;
                best.segment = i;
            } else if (r.d < second) {
                second = r.d;
            }
        }
        best.second_d = second;
        fill_corner_info(best, p);
        return best;
    }

    // Distance to the boundary from an interior point.
    DistanceResult distance_to_boundary(Point2 p) const {
        if (!p.finite()) throw std::invalid_argument("distance_to_boundary: point not finite");
        DistanceResult r = project(p);
        if (r.d < 1e-12 * scale())
            throw std::domain_error("distance_to_boundary: query point lies on the boundary");
        if (!inside(p))
            throw std::domain_error("distance_to_boundary: query point outside the domain");
        return r;
    }

    const CornerSpec& corner(int id) const {
        if (id < 0 || id >= int(corners_.size())) throw std::out_of_range("corner id");
        return corners_[id];
    }

    // Frame sending the corner vertex to the origin and sigma_1's tangent ray
    // to the positive x-axis; the tangent cone becomes V_mu = {0<theta<mu pi}.
    RigidMotion corner_frame(const CornerSpec& c) const {
        Vec2 ray1 = tangent_ray(c, /*first=*/true);
        double phi = std::atan2(ray1.y, ray1.x);
        return RigidMotion{c.vertex, std::cos(phi), std::sin(phi)};
    }

    RegionClass classify_region(int corner_id, Point2 p, RegionConfig cfg = {}) const {
        const CornerSpec& c = corner(corner_id);
        double zn = distance(p, c.vertex);
        if (zn > c.chart_radius)
            throw std::domain_error("classify_region: point outside the corner chart");
        if (!inside(p)) throw std::domain_error("classify_region: point outside the domain");
        double c0_max = 0.5 * c.mu * std::atan(0.25);
        double c0 = cfg.c0 > 0 ? cfg.c0 : 0.4 * c0_max;
        double c1 = cfg.c1 > 0 ? cfg.c1 : 10.0 / diameter_;
        if (c0 >= c0_max)
            throw std::invalid_argument("classify_region: c0 must be < (mu/2) atan(1/4)");
        double d1 = project_to_curve(segments_[c.segment1], p).d;
        double d2 = project_to_curve(segments_[c.segment2], p).d;
        double da = std::min(d1, d2);  // active-side convention
        double tol = 1e-12 * scale();
        if (std::abs(da - c0 * zn) <= tol) return RegionClass::Gamma1;
        if (da > c0 * zn) return RegionClass::Omega1;
        if (std::abs(da - c1 * zn * zn) <= tol) return RegionClass::Gamma2;
        if (da < c1 * zn * zn) return RegionClass::Omega3;
        return RegionClass::Omega2;
    }

    // Direction of sigma_i leaving the vertex.
    Vec2 tangent_ray(const CornerSpec& c, bool first) const {
        int sid = first ? c.segment1 : c.segment2;
        if (sid < 0 || sid >= int(segments_.size()))
            throw std::invalid_argument("corner references unknown segment");
        const CurveSegment& seg = segments_[sid];
        bool at_start = distance(seg.start(), c.vertex) <= distance(seg.end(), c.vertex);
        Vec2 v = at_start ? seg.velocity(0.0) : seg.velocity(1.0) * -1.0;
        return normalized(v);
    }

private:
    void fill_corner_info(DistanceResult& r, Point2 p) const {
        if (corners_.empty()) return;
        int best = 0;
        for (int i = 1; i < int(corners_.size()); ++i)
            if (distance(p, corners_[i].vertex) < distance(p, corners_[best].vertex)) best = i;
        r.corner = best;
        r.d1 = project_to_curve(segments_[corners_[best].segment1], p).d;
        r.d2 = project_to_curve(segments_[corners_[best].segment2], p).d;
    }

    void finalize() {
        if (segments_.empty()) throw std::invalid_argument("DomainSpec: empty boundary");
        double total_len = 0;
        for (const auto& s : segments_) total_len += s.length();
        // Boundary polyline cache (winding tests, plots).
        const int total_pts = 10000;
        polyline_.clear();
        polyline_.reserve(total_pts + segments_.size() + 1);
        for (const auto& s : segments_) {
            int n = std::max(8, int(total_pts * s.length() / total_len));
            for (int i = 0; i < n; ++i) polyline_.push_back(s.at(double(i) / n));
        }
        polyline_.push_back(polyline_.front());

        bbox_min_ = bbox_max_ = polyline_.front();
        centroid_ = {0, 0};
        for (const auto& p : polyline_) {
            bbox_min_.x = std::min(bbox_min_.x, p.x);
            bbox_min_.y = std::min(bbox_min_.y, p.y);
            bbox_max_.x = std::max(bbox_max_.x, p.x);
            bbox_max_.y = std::max(bbox_max_.y, p.y);
            centroid_ += p;
        }
        centroid_ = centroid_ / double(polyline_.size());
        diameter_ = std::max(bbox_max_.x - bbox_min_.x, bbox_max_.y - bbox_min_.y);
        if (!(diameter_ > 0) || !std::isfinite(diameter_))
            throw std::invalid_argument("DomainSpec: degenerate bounding box");

        for (std::size_t i = 0; i < segments_.size(); ++i) {
            Point2 e = segments_[i].end();
            Point2 s = segments_[(i + 1) % segments_.size()].start();
            if (distance(e, s) > 1e-12 * diameter_)
                throw std::invalid_argument("DomainSpec: boundary loop is not closed");
        }

        check_no_self_intersection();

        double min_len = std::numeric_limits<double>::infinity();
        for (const auto& s : segments_) min_len = std::min(min_len, s.length());
        for (auto& c : corners_) {
            if (c.segment1 < 0 || c.segment2 < 0 || c.segment1 >= int(segments_.size()) ||
                c.segment2 >= int(segments_.size()))
                throw std::invalid_argument("CornerSpec: segment id out of range");
            if (!(c.mu > 0) || !(c.mu < 2))
                throw std::invalid_argument("CornerSpec: mu must lie in (0,2)");
            if (c.chart_radius <= 0) c.chart_radius = 0.2 * min_len;
            // The tangent rays must open at exactly mu*pi (counterclockwise
            // from sigma_1 to sigma_2).
            Vec2 r1 = tangent_ray(c, true), r2 = tangent_ray(c, false);
            double open_angle = polar_angle(Vec2{dot(r1, r2), cross(r1, r2)});
            if (std::abs(open_angle - c.mu * kPi) > 1e-9)
                throw std::invalid_argument("CornerSpec: tangent rays open at " +
                                            format_g(open_angle / kPi) + "*pi, expected mu = " +
                                            format_g(c.mu));
        }
    }

    void check_no_self_intersection() const {
        // Coarse sampled certificate.
        const int n = 512;
        std::vector<Point2> pl;
        pl.reserve(n);
        double total_len = 0;
        for (const auto& s : segments_) total_len += s.length();
        for (const auto& s : segments_) {
            int m = std::max(4, int(n * s.length() / total_len));
            for (int i = 0; i < m; ++i) pl.push_back(s.at(double(i) / m));
        }
        // strict straddle test with a scale-relative dead zone (collinear
        // chords along straight pieces land at +-1e-17 under FMA contraction)
        double eps = 1e-12 * diameter_ * diameter_;
        auto sgn = [eps](double v) { return v > eps ? 1 : (v < -eps ? -1 : 0); };
        auto seg_intersect = [&](Point2 a, Point2 b, Point2 c, Point2 d) {
            int d1 = sgn(cross(b - a, c - a)), d2 = sgn(cross(b - a, d - a));
            int d3 = sgn(cross(d - c, a - c)), d4 = sgn(cross(d - c, b - c));
            return d1 * d2 < 0 && d3 * d4 < 0;
        };
        int m = int(pl.size());
        for (int i = 0; i < m; ++i) {
            for (int j = i + 2; j < m; ++j) {
                if (i == 0 && j == m - 1) continue;  // adjacent around the loop
                if (seg_intersect(pl[i], pl[(i + 1) % m], pl[j], pl[(j + 1) % m]))
                    throw std::invalid_argument("DomainSpec: boundary self-intersects");
            }
        }
    }

    std::vector<CurveSegment> segments_;
    std::vector<CornerSpec> corners_;
    std::string name_;
    std::vector<Point2> polyline_;
    Point2 bbox_min_, bbox_max_, centroid_;
    double diameter_ = 0;
};

// Signed curvature with respect to the inward normal (counterclockwise outer
// loop: the disk's circle gives +1/r). Undefined below C^2 regularity.
inline double curvature_at(const CurveSegment& curve, double t) {
    if (curve.regularity() == Regularity::C1Alpha)
        throw std::domain_error("curvature_at: curve is only C^{1,alpha}");
    return parametric_curvature(curve, t);
}

inline RigidMotion corner_frame(const DomainSpec& domain, const CornerSpec& corner) {
    return domain.corner_frame(corner);
}

inline DistanceResult distance_to_boundary(const DomainSpec& domain, Point2 p) {
    return domain.distance_to_boundary(p);
}

}  // namespace liouville::geometry
