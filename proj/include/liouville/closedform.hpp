#pragma once

// Exact solutions and model expansions of Delta u = e^{2u}: ball and
// exterior-ball solutions, the cone solution v_mu, the corner comparison
// function f_mu, the smooth-boundary expansion -log d + kappa d / 2, cone
// barriers, and the finite-difference residual oracles.
//
// Every model exposes its boundary defect E = e^{-u}. E vanishes linearly at
// the blow-up boundary and is smooth up to it, so numerical differentiation
// of models goes through E (never through the log singularity); the solver's
// defect correction relies on that.

#include <atomic>
#include <memory>
#include <string>

#include "liouville/geometry/build.hpp"
#include "liouville/geometry/domain.hpp"

namespace liouville::closedform {

using geometry::CornerSpec;
using geometry::DomainSpec;
using geometry::RigidMotion;

using DomainPtr = std::shared_ptr<const DomainSpec>;

namespace detail {

struct ModelImpl {
    virtual ~ModelImpl() = default;

    // E = e^{-u}; analytic continuation may be <= 0 outside the model domain.
    virtual double defect(Point2 p) const = 0;
    virtual bool analytic_derivatives() const { return false; }
    virtual Vec2 defect_gradient(Point2 p) const { return fd_defect_gradient(p); }
    virtual double defect_laplacian(Point2 p) const { return fd_defect_laplacian(p); }
    // Validity weight in [0,1]; the solver fades its correction with it.
    virtual double trust_weight(Point2) const { return 1.0; }
    virtual std::string describe() const = 0;
    // Step used by the fallback FD on E.
    virtual double fd_step(Point2) const { return 1e-4; }

    double value(Point2 p) const {
        double e = defect(p);
        if (!(e > 0)) throw std::domain_error(describe() + ": evaluation outside model domain");
        return -std::log(e);
    }

    Vec2 fd_defect_gradient(Point2 p) const {
        double h = fd_step(p);
        return fd_gradient([this](Point2 q) { return defect(q); }, p, h);
    }
    double fd_defect_laplacian(Point2 p) const {
        double h = fd_step(p);
        return fd_laplacian([this](Point2 q) { return defect(q); }, p, h);
    }
};

}  // namespace detail

class ModelExpansion {
public:
    ModelExpansion() = default;
    explicit ModelExpansion(std::shared_ptr<const detail::ModelImpl> impl) : impl_(std::move(impl)) {}

    bool valid() const { return impl_ != nullptr; }

    double value(Point2 p) const { return impl_->value(p); }
    double operator()(Point2 p) const { return impl_->value(p); }
    double defect(Point2 p) const { return impl_->defect(p); }
    Vec2 defect_gradient(Point2 p) const { return impl_->defect_gradient(p); }
    double defect_laplacian(Point2 p) const { return impl_->defect_laplacian(p); }
    double trust_weight(Point2 p) const { return impl_->trust_weight(p); }
    double fd_step(Point2 p) const { return impl_->fd_step(p); }
    std::string describe() const { return impl_ ? impl_->describe() : "<null>"; }

    // Delta u and |grad u|^2 through the defect identities
    // (u = -log E: grad u = -grad E / E, Delta u = -Delta E / E + |grad E|^2 / E^2).
    double laplacian(Point2 p) const {
        double e = impl_->defect(p);
        if (!(e > 0)) throw std::domain_error("laplacian: outside model domain");
        Vec2 g = impl_->defect_gradient(p);
        return -impl_->defect_laplacian(p) / e + g.norm2() / (e * e);
    }

    ScalarField as_field() const {
        auto impl = impl_;
        return [impl](Point2 p) { return impl->value(p); };
    }

private:
    std::shared_ptr<const detail::ModelImpl> impl_;
};

// ---------------------------------------------------------------------------
// Ball and exterior-ball solutions (the two workhorse comparison solutions).

namespace detail {

struct BallImpl : ModelImpl {
    double r;
    Point2 x0;
    BallImpl(double r_, Point2 x0_) : r(r_), x0(x0_) {
        if (r <= 0) throw std::invalid_argument("ball_solution: r must be > 0");
    }
    // u = log(2r / (r^2 - |x-x0|^2)), E = (r^2 - |x-x0|^2) / (2r)
    double defect(Point2 p) const override { return (r * r - (p - x0).norm2()) / (2 * r); }
    bool analytic_derivatives() const override { return true; }
    Vec2 defect_gradient(Point2 p) const override { return (p - x0) * (-1.0 / r); }
    double defect_laplacian(Point2) const override { return -2.0 / r; }
    std::string describe() const override { return "ball(r=" + format_g(r) + ")"; }
};

struct ExteriorBallImpl : ModelImpl {
    double r;
    Point2 x0;
    ExteriorBallImpl(double r_, Point2 x0_) : r(r_), x0(x0_) {
        if (r <= 0) throw std::invalid_argument("exterior_ball_solution: r must be > 0");
    }
    // u = log(2r / (|x-x0|^2 - r^2)), E = (|x-x0|^2 - r^2) / (2r)
    double defect(Point2 p) const override { return ((p - x0).norm2() - r * r) / (2 * r); }
    bool analytic_derivatives() const override { return true; }
    Vec2 defect_gradient(Point2 p) const override { return (p - x0) * (1.0 / r); }
    double defect_laplacian(Point2) const override { return 2.0 / r; }
    std::string describe() const override { return "exterior_ball(r=" + format_g(r) + ")"; }
};

struct HalfPlaneImpl : ModelImpl {
    // u = -log y on the upper half plane
    double defect(Point2 p) const override { return p.y; }
    bool analytic_derivatives() const override { return true; }
    Vec2 defect_gradient(Point2) const override { return {0, 1}; }
    double defect_laplacian(Point2) const override { return 0; }
    std::string describe() const override { return "half_plane"; }
};

// Polar angle continued smoothly across both cone edges: atan2 is wrapped so
// the branch jump sits on the bisector of the complement wedge, keeping the
// defect smooth in a neighborhood of each arm.
inline double cone_angle(Point2 q, double mu) {
    double theta = std::atan2(q.y, q.x);
    if (theta < -(2.0 - mu) * kPi / 2.0) theta += 2 * kPi;
    return theta;
}

struct ConeImpl : ModelImpl {
    double mu;
    RigidMotion frame;  // world -> cone coordinates
    ConeImpl(double mu_, RigidMotion f) : mu(mu_), frame(f) {
        if (!(mu > 0 && mu < 2)) throw std::invalid_argument("cone_solution: mu must lie in (0,2)");
    }
    // v_mu = -log(mu r sin(theta/mu)), E = mu r sin(theta/mu)
    double defect(Point2 p) const override {
        Point2 q = frame.apply(p);
        double theta = cone_angle(q, mu);
        return mu * q.norm() * std::sin(theta / mu);
    }
    bool analytic_derivatives() const override { return true; }
    Vec2 defect_gradient(Point2 p) const override {
        Point2 q = frame.apply(p);
        double theta = cone_angle(q, mu);
        Vec2 er = normalized(q);
        // dE/dr = mu sin(theta/mu), (1/r) dE/dtheta = cos(theta/mu)
        Vec2 g = er * (mu * std::sin(theta / mu)) + perp(er) * std::cos(theta / mu);
        return {frame.c * g.x - frame.s * g.y, frame.s * g.x + frame.c * g.y};  // rotate back
    }
    double defect_laplacian(Point2 p) const override {
        Point2 q = frame.apply(p);
        double theta = cone_angle(q, mu);
        return (mu - 1.0 / mu) * std::sin(theta / mu) / q.norm();
    }
    double fd_step(Point2 p) const override { return std::max(1e-8, 1e-3 * frame.apply(p).norm()); }
    std::string describe() const override { return "cone(mu=" + format_g(mu) + ")"; }
};

}  // namespace detail

inline ModelExpansion ball_solution(double r, Point2 x0 = {0, 0}) {
    return ModelExpansion(std::make_shared<detail::BallImpl>(r, x0));
}
inline ModelExpansion exterior_ball_solution(double r, Point2 x0 = {0, 0}) {
    return ModelExpansion(std::make_shared<detail::ExteriorBallImpl>(r, x0));
}
inline ModelExpansion half_plane_solution() {
    return ModelExpansion(std::make_shared<detail::HalfPlaneImpl>());
}
inline ModelExpansion cone_solution(double mu, RigidMotion frame = {}) {
    return ModelExpansion(std::make_shared<detail::ConeImpl>(mu, frame));
}

// ---------------------------------------------------------------------------
// Corner comparison function f_mu on an actual domain.

namespace detail {

struct CornerModelImpl : ModelImpl {
    DomainPtr domain;
    int corner_id;
    CornerSpec corner;
    RigidMotion frame;
    mutable std::atomic<long> clamp_count{0};  // arcsin argument clamps (diagnostic)

    CornerModelImpl(DomainPtr d, int cid) : domain(std::move(d)), corner_id(cid) {
        corner = domain->corner(corner_id);
        if (!(corner.mu > 0 && corner.mu < 2))
            throw std::invalid_argument("corner_model: mu must lie in (0,2)");
        frame = domain->corner_frame(corner);
    }

    double branch_defect(double ratio, double zn) const {
        double mu = corner.mu;
        if (ratio > 1.0) {
            if (ratio > 1.0 + 1e-12) clamp_count.fetch_add(1, std::memory_order_relaxed);
            ratio = 1.0;
        }
        return mu * zn * std::sin(std::asin(ratio) / mu);
    }

    double defect(Point2 p) const override {
        double zn = distance(p, corner.vertex);
        if (zn == 0) throw std::domain_error("corner_model: evaluation at the vertex");
        double mu = corner.mu;
        double d1 = geometry::project_to_curve(domain->segments()[corner.segment1], p).d;
        double d2 = geometry::project_to_curve(domain->segments()[corner.segment2], p).d;
        if (mu <= 1.0) return branch_defect(std::min(d1, d2) / zn, zn);
        // mu in (1,2): three branches; the equidistant set has interior and
        // the middle branch reads the frame polar angle directly.
        if (std::abs(d1 - d2) <= 1e-9 * zn) {
            Point2 q = frame.apply(p);
            double theta = std::atan2(q.y, q.x);
            if (theta < 0) theta += 2 * kPi;
            return mu * zn * std::sin(theta / mu);
        }
        return branch_defect(std::min(d1, d2) / zn, zn);
    }

    double trust_weight(Point2 p) const override {
        double zn = distance(p, corner.vertex);
        return 1.0 - smoothstep((zn / corner.chart_radius - 0.6) / 0.4);
    }
    double fd_step(Point2 p) const override {
        return std::max(1e-8, 1e-3 * distance(p, corner.vertex));
    }
    std::string describe() const override {
        return "corner_model(mu=" + format_g(corner.mu) + ")";
    }
};

}  // namespace detail

inline ModelExpansion corner_model(DomainPtr domain, int corner_id = 0) {
    return ModelExpansion(std::make_shared<detail::CornerModelImpl>(std::move(domain), corner_id));
}

// ---------------------------------------------------------------------------
// Smooth-boundary expansion -log d + kappa d / 2 and the bare -log d model.

namespace detail {

// Signed distance: positive inside, negative outside. The side is read from
// the inward normal at the foot (boundary traversed counterclockwise), which
// is exact wherever the foot is unique.
inline double signed_distance(const DomainSpec& dom, Point2 p, geometry::DistanceResult* out) {
    geometry::DistanceResult r = dom.project(p);
    const auto& seg = dom.segments()[r.segment];
    Vec2 inward = perp(normalized(seg.velocity(r.t)));
    double sign = dot(p - r.foot, inward) >= 0 ? 1.0 : -1.0;
    if (out) *out = r;
    return sign * r.d;
}

struct DistanceBasedImpl : ModelImpl {
    DomainPtr domain;
    bool curvature_term;

    DistanceBasedImpl(DomainPtr d, bool curv) : domain(std::move(d)), curvature_term(curv) {}

    // E = d e^{-kappa d / 2} (signed d, so E is smooth across the boundary).
    double defect(Point2 p) const override {
        geometry::DistanceResult r;
        double d = signed_distance(*domain, p, &r);
        if (!curvature_term) return d;
        const auto& seg = domain->segments()[r.segment];
        if (seg.regularity() == geometry::Regularity::C1Alpha)
            throw std::domain_error("smooth_model: foot lies on a C^{1,alpha} segment");
        double kappa = geometry::curvature_at(seg, r.t);
        return d * std::exp(-0.5 * kappa * d);
    }

    double trust_weight(Point2 p) const override {
        geometry::DistanceResult r = domain->project(p);
        double w = 1.0;
        if (std::isfinite(r.second_d) && r.d > 0) {
            double gap = (r.second_d - r.d) / r.d;  // foot ambiguity guard
            w *= smoothstep((gap - 0.25) / 0.5);
        }
        for (const auto& c : domain->corners()) {
            double zn = distance(p, c.vertex);
            w *= smoothstep((zn / c.chart_radius - 0.5) / 0.5);
        }
        return w;
    }
    double fd_step(Point2 p) const override {
        double d = domain->project(p).d;
        return std::clamp(0.02 * d, 1e-8, 1e-3 * domain->scale());
    }
    std::string describe() const override {
        return curvature_term ? "smooth_model" : "log_distance_model";
    }
};

}  // namespace detail

inline ModelExpansion smooth_model(DomainPtr domain) {
    return ModelExpansion(std::make_shared<detail::DistanceBasedImpl>(std::move(domain), true));
}
inline ModelExpansion log_distance_model(DomainPtr domain) {
    return ModelExpansion(std::make_shared<detail::DistanceBasedImpl>(std::move(domain), false));
}

// ---------------------------------------------------------------------------
// Cone solution transported through the quadratic corner map (an exact
// solution on the bent cone; the reference the solver corrects against on
// curved_corner domains).

namespace detail {

struct TransportedConeImpl : ModelImpl {
    double mu;
    geometry::QuadraticMap map;
    double r_inj;

    TransportedConeImpl(double mu_, double amp) : mu(mu_), map{amp} {
        if (!(mu > 0 && mu < 2))
            throw std::invalid_argument("transported_cone_model: mu must lie in (0,2)");
        r_inj = amp != 0 ? 0.45 / std::abs(amp) : std::numeric_limits<double>::infinity();
    }

    // u(w) = v_mu(z) - log |Phi'(z)|, z = Phi^{-1}(w):
    // E(w) = mu r sin(theta/mu) |Phi'(z)|.
    double defect(Point2 p) const override {
        geometry::Complex z = map.inverse(geometry::to_complex(p));
        double theta = cone_angle(geometry::to_point(z), mu);
        return mu * std::abs(z) * std::sin(theta / mu) * std::abs(map.deriv(z));
    }
    double trust_weight(Point2 p) const override {
        double zn = std::abs(map.inverse(geometry::to_complex(p)));
        return 1.0 - smoothstep((zn / r_inj - 0.5) / 0.3);
    }
    double fd_step(Point2 p) const override { return std::max(1e-8, 1e-3 * p.norm()); }
    std::string describe() const override {
        return "transported_cone(mu=" + format_g(mu) + ", amp=" + format_g(map.amp) + ")";
    }
};

// Pointwise blend of model values with smooth weights (normalized); E falls
// out of the blended value.
struct BlendImpl : ModelImpl {
    struct Part {
        ModelExpansion model;
        std::function<double(Point2)> weight;
    };
    std::vector<Part> parts;

    explicit BlendImpl(std::vector<Part> ps) : parts(std::move(ps)) {}

    double defect(Point2 p) const override {
        double m = 0, wsum = 0;
        for (const auto& pt : parts) {
            double w = pt.weight(p);
            if (w <= 0) continue;
            double e = pt.model.defect(p);
            if (!(e > 0)) return e;  // outside: propagate the sign
            m += w * -std::log(e);
            wsum += w;
        }
        if (wsum <= 0) throw std::domain_error("blended model: no active component");
        return std::exp(-m / wsum);  // normalized blend of the log-values
    }
    double trust_weight(Point2 p) const override {
        double w = 0;
        for (const auto& pt : parts) w += pt.weight(p) * pt.model.trust_weight(p);
        return std::clamp(w, 0.0, 1.0);
    }
    double fd_step(Point2 p) const override {
        double s = 1e-3;
        for (const auto& pt : parts)
            if (pt.weight(p) > 0) s = std::min(s, pt.model.fd_step(p));
        return s;
    }
    std::string describe() const override { return "blended_model"; }
};

}  // namespace detail

inline ModelExpansion transported_cone_model(double mu, double amp) {
    return ModelExpansion(std::make_shared<detail::TransportedConeImpl>(mu, amp));
}

inline ModelExpansion blended_model(
    std::vector<std::pair<ModelExpansion, std::function<double(Point2)>>> parts) {
    std::vector<detail::BlendImpl::Part> ps;
    for (auto& [m, w] : parts) ps.push_back({std::move(m), std::move(w)});
    return ModelExpansion(std::make_shared<detail::BlendImpl>(std::move(ps)));
}

// Corner-near model within r_on of the vertex, fading to the far model by
// r_off (the standard reference for sector-like domains: cone or transported
// cone near the corner, smooth expansion near the far boundary).
inline ModelExpansion corner_blend(ModelExpansion near_model, ModelExpansion far_model,
                                   Point2 vertex, double r_on, double r_off) {
    auto w_near = [vertex, r_on, r_off](Point2 p) {
        return 1.0 - smoothstep((distance(p, vertex) - r_on) / (r_off - r_on));
    };
    auto w_far = [w_near](Point2 p) { return 1.0 - w_near(p); };
    return blended_model({{std::move(near_model), w_near}, {std::move(far_model), w_far}});
}

// ---------------------------------------------------------------------------
// Cone barriers of the comparison arguments:
//   supersolution  v_mu + log(1 + A |z|^{sqrt(2)/mu}),
//   subsolution    v_mu - log(1 + A |z|^{1/mu}).

inline ScalarField cone_supersolution(double mu, double A, RigidMotion frame = {}) {
    if (A < 0) throw std::invalid_argument("cone_supersolution: A must be >= 0");
    ModelExpansion v = cone_solution(mu, frame);
    double pw = std::sqrt(2.0) / mu;
    return [v, A, pw, frame](Point2 p) {
        double r = frame.apply(p).norm();
        return v.value(p) + std::log(1 + A * std::pow(r, pw));
    };
}

inline ScalarField cone_subsolution(double mu, double A, RigidMotion frame = {}) {
    if (A < 0) throw std::invalid_argument("cone_subsolution: A must be >= 0");
    ModelExpansion v = cone_solution(mu, frame);
    double pw = 1.0 / mu;
    return [v, A, pw, frame](Point2 p) {
        double r = frame.apply(p).norm();
        return v.value(p) - std::log(1 + A * std::pow(r, pw));
    };
}

// ---------------------------------------------------------------------------
// Residual oracles.

// Fourth-order FD estimate of Delta fn - e^{2 fn} at p. The stencil must stay
// inside fn's domain; domain errors propagate.
inline double liouville_residual(const ScalarField& fn, Point2 p, double h) {
    if (h <= 0) throw std::invalid_argument("liouville_residual: h must be > 0");
    double lap;
    try {
        lap = fd_laplacian(fn, p, h);
    } catch (const std::domain_error&) {
        throw std::domain_error("liouville_residual: stencil exits the function's domain");
    }
    return lap - std::exp(2.0 * fn(p));
}

// Numerical S(v) = d Delta v - Delta d - (e^{2v} - 1)/d; Delta d comes from
// finite differences of the distance field, as the operator prescribes.
inline double s_residual(const ScalarField& v, const DomainSpec& domain, Point2 p, double h) {
    if (h <= 0) throw std::invalid_argument("s_residual: h must be > 0");
    auto dist_field = [&domain](Point2 q) {
        if (!domain.inside(q)) throw std::domain_error("s_residual: stencil exits the domain");
        return domain.project(q).d;
    };
    double d = dist_field(p);
    double lap_v = fd_laplacian(v, p, h);
    double lap_d = fd_laplacian(dist_field, p, h);
    return d * lap_v - lap_d - (std::exp(2.0 * v(p)) - 1.0) / d;
}

}  // namespace liouville::closedform
