#pragma once

// Uniform Cartesian lattice with Shortley-Weller boundary metadata. Node
// status and cut fractions come from the boundary's intersections with the
// lattice lines. Intersections are classified by marching the sampled loop:
// sign changes give transversal crossings (refined by bisection on the exact
// curve, so cut points sit on the boundary to ~1e-13 h); collinear runs and
// tangential touches are detected from the sign pattern, contribute boundary
// points for the arm cuts, and flip the inside/outside parity only when the
// loop actually changes sides.

#include <cstdlib>
#include <vector>

#include "liouville/closedform.hpp"
#include "liouville/geometry/domain.hpp"

namespace liouville::solver {

using closedform::DomainPtr;

struct Grid {
    DomainPtr domain;
    double h = 0;
    double x0 = 0, y0 = 0;  // lattice origin (node i,j at x0 + i h, y0 + j h)
    int nx = 0, ny = 0;

    enum class Status : std::uint8_t { Exterior, Interior, NearBoundary };

    std::vector<Status> status;  // nx * ny
    std::vector<double> dist;    // distance to boundary; NaN on exterior nodes
    // Arm cut fractions in (0,1]; 1 = full arm. Order: east, west, north, south.
    struct Cuts {
        double e = 1, w = 1, n = 1, s = 1;
    };
    std::vector<Cuts> cuts;

    int idx(int i, int j) const { return j * nx + i; }
    Point2 point(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    bool in_lattice(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    Status status_at(int i, int j) const {
        return in_lattice(i, j) ? status[idx(i, j)] : Status::Exterior;
    }

    std::size_t interior_count() const {
        std::size_t n = 0;
        for (auto s : status)
            if (s != Status::Exterior) ++n;
        return n;
    }
};

namespace detail {

struct LoopSample {
    int seg;
    double t;
    Point2 p;
};

struct LineEvents {
    std::vector<double> parity;  // transversal crossing coords (sorted)
    std::vector<double> arm;     // all boundary points on the line (sorted)
};

// Bisection root of (coord(t) - level) on one curve piece with a sign change.
inline double transversal_root(const geometry::CurveSegment& seg, bool horizontal, double level,
                               double t_lo, double t_hi, double f_lo) {
    auto val = [&](double t) {
        Point2 p = seg.at(t);
        return (horizontal ? p.y : p.x) - level;
    };
    for (int it = 0; it < 60; ++it) {
        double tm = 0.5 * (t_lo + t_hi);
        double fm = val(tm);
        if (fm == 0) return tm;
        if ((fm < 0) == (f_lo < 0)) {
            t_lo = tm;
            f_lo = fm;
        } else {
            t_hi = tm;
        }
    }
    return 0.5 * (t_lo + t_hi);
}

// Events of one lattice line against the sampled loop. `coord` picks the
// along-line coordinate, `off` the offset from the line.
inline LineEvents line_events(const std::vector<LoopSample>& loop,
                              const std::vector<geometry::CurveSegment>& segs, bool horizontal,
                              double level, double f_tol) {
    const int n = int(loop.size());
    auto off_of = [&](const Point2& p) { return (horizontal ? p.y : p.x) - level; };
    auto along_of = [&](const Point2& p) { return horizontal ? p.x : p.y; };

    // start at a sample clearly off the line
    int start = -1;
    for (int s = 0; s < n; ++s)
        if (std::abs(off_of(loop[s].p)) > f_tol) {
            start = s;
            break;
        }
    if (start < 0) throw std::runtime_error("discretize: boundary loop collapses onto a lattice line");

    LineEvents ev;
    int prev = start;
    double f_prev = off_of(loop[prev].p);
    std::vector<int> zero_run;  // consecutive on-line samples since prev
    for (int step = 1; step <= n; ++step) {
        int s = (start + step) % n;
        double f = off_of(loop[s].p);
        if (std::abs(f) <= f_tol) {
            zero_run.push_back(s);
            continue;
        }
        if (zero_run.empty()) {
            if ((f_prev < 0) != (f < 0)) {
                // transversal root inside the piece (prev -> s); same segment
                // by construction unless the joint itself is the root, which
                // the zero-run branch would have caught.
                const LoopSample& a = loop[prev];
                const LoopSample& b = loop[s];
                double x;
                if (a.seg == b.seg) {
                    double tr = transversal_root(segs[a.seg], horizontal, level, a.t, b.t, f_prev);
                    x = along_of(segs[a.seg].at(tr));
                } else {
                    // crossing within the joint gap; both samples are within
                    // one fine step of the joint point
                    double tr = transversal_root(segs[a.seg], horizontal, level, a.t, 1.0, f_prev);
                    x = along_of(segs[a.seg].at(tr));
                }
                ev.parity.push_back(x);
                ev.arm.push_back(x);
            }
        } else {
            // collinear run (or isolated touch) between prev and s
            double lo = along_of(loop[zero_run.front()].p), hi = lo;
            for (int z : zero_run) {
                double c = along_of(loop[z].p);
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            ev.arm.push_back(lo);
            if (hi > lo) ev.arm.push_back(hi);
            if ((f_prev < 0) != (f < 0)) ev.parity.push_back(0.5 * (lo + hi));
            zero_run.clear();
        }
        prev = s;
        f_prev = f;
    }
    std::sort(ev.parity.begin(), ev.parity.end());
    std::sort(ev.arm.begin(), ev.arm.end());
    return ev;
}

}  // namespace detail

// Builds the Shortley-Weller lattice. LIOUVILLE_MAX_GRID_MB caps the node
// allocation when set.
inline Grid discretize(DomainPtr domain, double h) {
    if (h <= 0) throw std::invalid_argument("discretize: h must be > 0");
    if (h >= 0.26 * domain->diameter())
        throw std::invalid_argument("discretize: h too coarse for this domain");

    Grid g;
    g.domain = domain;
    g.h = h;
    Point2 lo = domain->bbox_min(), hi = domain->bbox_max();
    g.x0 = lo.x - h;
    g.y0 = lo.y - h;
    g.nx = int(std::ceil((hi.x - g.x0) / h)) + 2;
    g.ny = int(std::ceil((hi.y - g.y0) / h)) + 2;

    if (const char* cap = std::getenv("LIOUVILLE_MAX_GRID_MB")) {
        double mb = double(g.nx) * g.ny * (sizeof(double) * 5 + 1) / (1024.0 * 1024.0);
        if (mb > std::atof(cap))
            throw std::runtime_error("discretize: grid would need " + format_f(mb, 1) +
                                     " MB, above LIOUVILLE_MAX_GRID_MB");
    }

    const auto& segs = domain->segments();

    // Fine loop sampling (one list, cyclic).
    std::vector<detail::LoopSample> loop;
    for (int si = 0; si < int(segs.size()); ++si) {
        int nsamp = std::clamp(int(4 * segs[si].length() / h), 64, 400000);
        for (int i = 0; i < nsamp; ++i) {
            double t = double(i) / nsamp;
            loop.push_back({si, t, segs[si].at(t)});
        }
    }

    const double f_tol = 1e-12 * std::max(1.0, domain->diameter());
    const double snap = 1e-7 * h;  // nodes this close to a boundary point count as on it

    std::vector<detail::LineEvents> rows(g.ny), cols(g.nx);
    for (int j = 0; j < g.ny; ++j) rows[j] = detail::line_events(loop, segs, true, g.y0 + j * h, f_tol);
    for (int i = 0; i < g.nx; ++i) cols[i] = detail::line_events(loop, segs, false, g.x0 + i * h, f_tol);

    auto dedup = [&](std::vector<double>& v) {
        std::vector<double> out;
        for (double c : v)
            if (out.empty() || c - out.back() > 1e-9 * h) out.push_back(c);
        v.swap(out);
    };
    for (auto& e : rows) { dedup(e.parity); dedup(e.arm); }
    for (auto& e : cols) { dedup(e.parity); dedup(e.arm); }

    g.status.assign(std::size_t(g.nx) * g.ny, Grid::Status::Exterior);
    g.cuts.assign(std::size_t(g.nx) * g.ny, Grid::Cuts{});
    g.dist.assign(std::size_t(g.nx) * g.ny, std::numeric_limits<double>::quiet_NaN());

    auto near_within = [](const std::vector<double>& v, double x, double tol) {
        auto it = std::lower_bound(v.begin(), v.end(), x - tol);
        return it != v.end() && *it <= x + tol;
    };
    auto near_any = [&](const std::vector<double>& v, double x) {
        return near_within(v, x, snap);
    };

    // Row parity; a node on a boundary point stays exterior.
    for (int j = 0; j < g.ny; ++j) {
        const auto& pc = rows[j].parity;
        if (pc.empty()) continue;
        std::size_t k = 0;
        bool inside = false;
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x0 + i * h;
            while (k < pc.size() && pc[k] < x - snap) {
                inside = !inside;
                ++k;
            }
            if (near_any(rows[j].arm, x) || near_any(pc, x)) continue;  // on the boundary
            if (inside) g.status[g.idx(i, j)] = Grid::Status::Interior;
        }
    }
    // Column parity demotes (a node must be inside along both lines).
    for (int i = 0; i < g.nx; ++i) {
        const auto& pc = cols[i].parity;
        std::size_t k = 0;
        bool inside = false;
        for (int j = 0; j < g.ny; ++j) {
            double y = g.y0 + j * h;
            while (k < pc.size() && pc[k] < y - snap) {
                inside = !inside;
                ++k;
            }
            if (near_any(cols[i].arm, y) || !inside) g.status[g.idx(i, j)] = Grid::Status::Exterior;
        }
    }

    // Nodes essentially on the boundary along their row or column demote;
    // their neighbors' arms then stop at the same boundary point (fraction 1).
    const double pin = 4 * snap;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior) continue;
            if (near_within(rows[j].arm, g.x0 + i * h, pin) ||
                near_within(cols[i].arm, g.y0 + j * h, pin))
                g.status[id] = Grid::Status::Exterior;
        }

    // Distance field; anything within snap of the boundary demotes too.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior) continue;
            double d = domain->project(g.point(i, j)).d;
            if (d <= snap) {
                g.status[id] = Grid::Status::Exterior;
                continue;
            }
            g.dist[id] = d;
        }

    // Arm cuts from the boundary-point tables; double crossings inside a full
    // arm mean an unresolvable slit.
    auto arm_cut = [&](const std::vector<double>& ac, double a, double b, bool neighbor_interior,
                       Point2 node) -> double {
        auto where = [&] {
            return " at node (" + format_g(node.x) + ", " + format_g(node.y) + ")";
        };
        double lo2 = std::min(a, b), hi2 = std::max(a, b);
        auto it0 = std::lower_bound(ac.begin(), ac.end(), lo2 + snap);
        auto it1 = std::lower_bound(ac.begin(), ac.end(), hi2 - snap);
        int count = int(it1 - it0);
        if (neighbor_interior) {
            if (count >= 2)
                throw std::runtime_error(
                    "discretize: boundary crosses a lattice edge twice (domain feature thinner "
                    "than 2h)" + where() + "; use a smaller h");
            if (count == 1)
                throw std::runtime_error(
                    "discretize: inconsistent interior classification at a lattice edge" +
                    where() + "; use a smaller h");
            return 1.0;
        }
        if (count == 0) {
            // the crossing may sit at (or just past) the demoted neighbor node
            auto near_b = std::find_if(ac.begin(), ac.end(), [&](double c) {
                return std::abs(c - b) <= pin + snap;
            });
            if (near_b != ac.end()) return 1.0;
            throw std::runtime_error("discretize: missing boundary crossing on a cut arm" +
                                     where() + "; use a smaller h");
        }
        double c = (b > a) ? *it0 : *(it1 - 1);
        return std::max(std::abs(c - a) / h, 1e-7);
    };

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior) continue;
            double x = g.x0 + i * h, y = g.y0 + j * h;
            Grid::Cuts c;
            bool boundary_arm = false;
            auto handle = [&](double& frac, const std::vector<double>& ac, double a, double b,
                              Grid::Status nb) {
                bool nb_int = nb != Grid::Status::Exterior;
                frac = arm_cut(ac, a, b, nb_int, g.point(i, j));
                boundary_arm |= (frac < 1.0 || !nb_int);
            };
            handle(c.e, rows[j].arm, x, x + h, g.status_at(i + 1, j));
            handle(c.w, rows[j].arm, x, x - h, g.status_at(i - 1, j));
            handle(c.n, cols[i].arm, y, y + h, g.status_at(i, j + 1));
            handle(c.s, cols[i].arm, y, y - h, g.status_at(i, j - 1));
            g.cuts[id] = c;
            if (boundary_arm) g.status[id] = Grid::Status::NearBoundary;
        }
    }

    return g;
}

}  // namespace liouville::solver
