#pragma once

// Small shared vocabulary: plane points, finite-difference helpers,
// deterministic sampling, formatting.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace liouville {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2() = default;
    Point2(double x_, double y_) : x(x_), y(y_) {}

    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    Point2 operator/(double s) const { return {x / s, y / s}; }
    Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Vec2 = Point2;

inline Point2 operator*(double s, const Point2& p) { return p * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }  // rotate +90 degrees
inline Vec2 normalized(const Vec2& v) {
    double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return v / n;
}
inline Point2 from_polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

// Polar angle in [0, 2pi).
inline double polar_angle(const Vec2& v) {
    double a = std::atan2(v.y, v.x);
    return a < 0 ? a + 2.0 * kPi : a;
}

using ScalarField = std::function<double(Point2)>;

// Quintic smoothstep, 0 at t<=0, 1 at t>=1, C^2 across the ends.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// ---------------------------------------------------------------------------
// Finite differences (the residual oracles everywhere use these).

// Fourth-order central estimate of the Laplacian of f at p with spacing h.
inline double fd_laplacian(const ScalarField& f, Point2 p, double h) {
    auto second = [&](bool along_x) {
        auto at = [&](double s) {
            return along_x ? f({p.x + s, p.y}) : f({p.x, p.y + s});
        };
        return (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
    };
    return second(true) + second(false);
}

// Fourth-order central gradient.
inline Vec2 fd_gradient(const ScalarField& f, Point2 p, double h) {
    auto d1 = [&](bool along_x) {
        auto at = [&](double s) {
            return along_x ? f({p.x + s, p.y}) : f({p.x, p.y + s});
        };
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    };
    return {d1(true), d1(false)};
}

// ---------------------------------------------------------------------------
// Deterministic random sampling. std::uniform_real_distribution is not
// pinned across standard libraries, so draws are built from raw 64-bit
// streams (splitmix64), making run outputs byte-reproducible from the seed.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double log_uniform(double a, double b) { return a * std::exp(uniform() * std::log(b / a)); }

private:
    std::uint64_t state_;
};

// Stable sub-seed derivation (FNV-1a over the label, mixed with the root).
inline std::uint64_t derive_seed(std::uint64_t root, const std::string& label) {
    std::uint64_t h = 14695981039346656037ULL ^ root;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h ? h : 0x9e3779b97f4a7c15ULL;
}

// ---------------------------------------------------------------------------
// Formatting (gcc 11 lacks <format>).

inline std::string format_g(double v, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string format_f(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace liouville
