#pragma once

// Holomorphic maps (power, inversion, affine, composites) and the conformal
// transport of Liouville solutions: u1(z) = u2(f(z)) + log|f'(z)|.

#include <complex>
#include <memory>
#include <optional>

#include "liouville/geometry/curve.hpp"
#include "liouville/geometry/domain.hpp"

namespace liouville::conformal {

using Complex = std::complex<double>;

inline Complex to_complex(Point2 p) { return {p.x, p.y}; }
inline Point2 to_point(Complex z) { return {z.real(), z.imag()}; }

namespace detail {

struct MapImpl {
    virtual ~MapImpl() = default;
    virtual Complex eval(Complex z) const = 0;
    virtual Complex deriv(Complex z) const = 0;
    virtual Complex deriv2(Complex z) const = 0;
    // Throws std::domain_error on branch-cut / pole violations.
    virtual void check(Complex z) const {}
    virtual std::optional<double> power_exponent() const { return std::nullopt; }
    virtual std::string describe() const = 0;
};

struct PowerImpl : MapImpl {
    double p;
    double cut;  // branch cut along the ray at this angle; arguments taken in (cut, cut + 2pi)

    PowerImpl(double p_, double cut_) : p(p_), cut(cut_) {
        if (p <= 0) throw std::invalid_argument("power_map: exponent must be > 0");
    }
    double arg_in_branch(Complex z) const {
        double a = std::arg(z);
        while (a <= cut) a += 2 * kPi;
        while (a > cut + 2 * kPi) a -= 2 * kPi;
        return a;
    }
    Complex at_power(Complex z, double q) const {
        double r = std::abs(z);
        if (r == 0) return {0, 0};
        double a = arg_in_branch(z);
        return std::polar(std::pow(r, q), q * a);
    }
    Complex eval(Complex z) const override { return at_power(z, p); }
    Complex deriv(Complex z) const override {
        check(z);
        return p * at_power(z, p - 1);
    }
    Complex deriv2(Complex z) const override {
        check(z);
        return p * (p - 1) * at_power(z, p - 2);
    }
    void check(Complex z) const override {
        if (std::abs(z) == 0)
            throw std::domain_error("power_map: derivative at the branch point");
        double a = arg_in_branch(z);
        double margin = 1e-13;
        if (a - cut < margin || cut + 2 * kPi - a < margin)
            throw std::domain_error("power_map: point on the branch cut");
    }
    std::optional<double> power_exponent() const override { return p; }
    std::string describe() const override { return "power(" + format_g(p) + ")"; }
};

struct InversionImpl : MapImpl {
    Complex pole;  // z -> 1 / (z - P)
    explicit InversionImpl(Complex P) : pole(P) {}
    Complex eval(Complex z) const override {
        check(z);
        return 1.0 / (z - pole);
    }
    Complex deriv(Complex z) const override {
        check(z);
        Complex w = z - pole;
        return -1.0 / (w * w);
    }
    Complex deriv2(Complex z) const override {
        check(z);
        Complex w = z - pole;
        return 2.0 / (w * w * w);
    }
    void check(Complex z) const override {
        if (std::abs(z - pole) < 1e-300) throw std::domain_error("inversion: evaluation at the pole");
    }
    std::string describe() const override { return "inversion"; }
};

struct AffineImpl : MapImpl {
    Complex a, b;  // z -> a z + b
    AffineImpl(Complex a_, Complex b_) : a(a_), b(b_) {
        if (std::abs(a) == 0) throw std::invalid_argument("affine_map: a must be nonzero");
    }
    Complex eval(Complex z) const override { return a * z + b; }
    Complex deriv(Complex) const override { return a; }
    Complex deriv2(Complex) const override { return {0, 0}; }
    std::string describe() const override { return "affine"; }
};

struct CompositeImpl : MapImpl {
    std::shared_ptr<const MapImpl> outer, inner;
    CompositeImpl(std::shared_ptr<const MapImpl> o, std::shared_ptr<const MapImpl> i)
        : outer(std::move(o)), inner(std::move(i)) {}
    Complex eval(Complex z) const override { return outer->eval(inner->eval(z)); }
    Complex deriv(Complex z) const override {
        return outer->deriv(inner->eval(z)) * inner->deriv(z);
    }
    Complex deriv2(Complex z) const override {
        Complex gi = inner->eval(z), d1 = inner->deriv(z);
        return outer->deriv2(gi) * d1 * d1 + outer->deriv(gi) * inner->deriv2(z);
    }
    void check(Complex z) const override {
        inner->check(z);
        outer->check(inner->eval(z));
    }
    std::string describe() const override {
        return outer->describe() + " . " + inner->describe();
    }
};

}  // namespace detail

struct InjectivityDisk {
    Point2 center;
    double radius;
};

class HolomorphicMap {
public:
    HolomorphicMap() = default;
    explicit HolomorphicMap(std::shared_ptr<const detail::MapImpl> impl,
                            std::optional<InjectivityDisk> disk = std::nullopt)
        : impl_(std::move(impl)), disk_(disk) {}

    Point2 eval(Point2 z) const {
        guard(z);
        return to_point(impl_->eval(to_complex(z)));
    }
    Complex derivative(Point2 z) const {
        guard(z);
        return impl_->deriv(to_complex(z));
    }
    Complex second_derivative(Point2 z) const {
        guard(z);
        return impl_->deriv2(to_complex(z));
    }
    std::optional<double> power_exponent() const { return impl_->power_exponent(); }
    const std::optional<InjectivityDisk>& injectivity_disk() const { return disk_; }
    std::string describe() const { return impl_ ? impl_->describe() : "<null>"; }

    std::shared_ptr<const detail::MapImpl> impl() const { return impl_; }

private:
    void guard(Point2 z) const {
        if (disk_ && distance(z, disk_->center) > disk_->radius)
            throw std::domain_error(describe() + ": outside the declared injectivity disk");
        impl_->check(to_complex(z));
    }

    std::shared_ptr<const detail::MapImpl> impl_;
    std::optional<InjectivityDisk> disk_;
};

// Branch cut default: the negative imaginary axis side, -pi; cone usage
// passes a cut inside the complement wedge.
inline HolomorphicMap power_map(double p, double cut_angle = -kPi,
                                std::optional<InjectivityDisk> disk = std::nullopt) {
    return HolomorphicMap(std::make_shared<detail::PowerImpl>(p, cut_angle), disk);
}
inline HolomorphicMap inversion_map(Point2 pole,
                                    std::optional<InjectivityDisk> disk = std::nullopt) {
    return HolomorphicMap(std::make_shared<detail::InversionImpl>(to_complex(pole)), disk);
}
inline HolomorphicMap affine_map(Complex a, Complex b = {0, 0}) {
    return HolomorphicMap(std::make_shared<detail::AffineImpl>(a, b));
}
inline HolomorphicMap compose(const HolomorphicMap& outer, const HolomorphicMap& inner) {
    auto disk = inner.injectivity_disk();
    return HolomorphicMap(std::make_shared<detail::CompositeImpl>(outer.impl(), inner.impl()), disk);
}

inline Point2 map_eval(const HolomorphicMap& m, Point2 z) { return m.eval(z); }
inline Complex map_derivative(const HolomorphicMap& m, Point2 z) { return m.derivative(z); }

// Auxiliary inversion point for the reentrant-corner analysis: well outside
// the domain, on the far side of the centroid from the corner vertex.
inline Point2 default_inversion_point(const geometry::DomainSpec& domain, Point2 vertex) {
    Vec2 dir = domain.centroid() - vertex;
    if (dir.norm() < 1e-12 * domain.scale()) dir = {1, 0};
    return domain.centroid() + normalized(dir) * (2.0 * domain.diameter());
}

// ---------------------------------------------------------------------------
// Conformal transport of solutions: if u2 solves Delta u = e^{2u} on Omega_2
// and f maps Omega_1 one-to-one onto Omega_2, then u2(f(z)) + log|f'(z)|
// solves the same equation on Omega_1.

inline ScalarField pullback_solution(ScalarField u2, HolomorphicMap f) {
    return [u2 = std::move(u2), f = std::move(f)](Point2 z) {
        Point2 w = f.eval(z);
        double jac = std::abs(f.derivative(z));
        if (jac == 0) throw std::domain_error("pullback_solution: vanishing derivative");
        return u2(w) + std::log(jac);
    };
}

// Image of a boundary piece under the map, derivatives by the chain rule.
// The regularity tag is recomputed when a C^2-class curve ends at the branch
// point of a power map z -> z^q: the image is a C^{1,mu}-graph with mu = 1/q
// when mu < 1, and stays C^2-class (Hoelder second derivative) when mu > 1.
inline geometry::CurveSegment push_curve(const geometry::CurveSegment& curve,
                                         const HolomorphicMap& m) {
    using geometry::Regularity;
    // Interior samples must avoid cuts and poles; endpoints may sit on the
    // branch point itself (the corner-arm use).
    for (int i = 1; i < 32; ++i) {
        Point2 p = curve.at(i / 32.0);
        m.impl()->check(to_complex(p));  // throws on violation
    }
    auto pos = [curve, m](double t) {
        return to_point(m.impl()->eval(to_complex(curve.at(t))));
    };
    auto vel = [curve, m](double t) {
        Complex d = m.impl()->deriv(to_complex(curve.at(t)));
        return to_point(d * to_complex(curve.velocity(t)));
    };
    auto acc = [curve, m](double t) {
        Complex z = to_complex(curve.at(t));
        Complex c1 = to_complex(curve.velocity(t)), c2 = to_complex(curve.acceleration(t));
        return to_point(m.impl()->deriv2(z) * c1 * c1 + m.impl()->deriv(z) * c2);
    };

    Regularity tag = curve.regularity();
    double alpha = curve.alpha();
    double base_t = curve.start().norm() <= curve.end().norm() ? 0.0 : 1.0;
    bool touches_origin = std::min(curve.start().norm(), curve.end().norm()) < 1e-12;
    if (auto q = m.power_exponent(); q && touches_origin && *q != 1.0) {
        double mu_eff = 1.0 / *q;
        if (mu_eff < 1.0) {
            tag = Regularity::C1Alpha;
            alpha = mu_eff;
        } else {
            tag = Regularity::C2Alpha;
            alpha = std::min(1.0, mu_eff - 1.0);
        }
    }
    geometry::CurveSegment image(pos, vel, acc, tag, alpha, 1.0, {});
    double bound = geometry::sampled_bound_constant(image, 512, base_t);
    return geometry::CurveSegment(pos, vel, acc, tag, alpha, std::max(bound, 1e-12), {});
}

}  // namespace liouville::conformal
