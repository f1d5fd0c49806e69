#pragma once

// Grid-refinement studies and solution export (CSV and a little-endian
// binary dump).

#include <fstream>

#include "liouville/solver/solve.hpp"

namespace liouville::solver {

struct StudyRow {
    double h = 0;
    double err_fixed = 0;   // max node error on the fixed comparison region
    double err_trust = 0;   // max node error on this grid's own trust region
    double order = 0;       // log2(e_prev / e_this), 0 for the first row
    std::size_t nodes = 0;
};

// Max |u_h - model| over grid nodes with d >= d_fixed (common region across
// all h, default 10 * max h) plus the per-grid trust-region error.
inline std::vector<StudyRow> convergence_study(DomainPtr domain, const ModelExpansion& model,
                                               std::vector<double> hs, SolverConfig cfg,
                                               double d_fixed = 0) {
    if (hs.empty()) throw std::invalid_argument("convergence_study: no grid spacings");
    double hmax = *std::max_element(hs.begin(), hs.end());
    if (d_fixed <= 0) d_fixed = cfg.trust_factor * hmax;
    std::vector<StudyRow> rows;
    for (double h : hs) {
        cfg.h = h;
        GridSolution sol = solve_blowup(domain, cfg);
        const Grid& g = *sol.grid;
        StudyRow row;
        row.h = h;
        row.nodes = g.interior_count();
        for (std::size_t id = 0; id < g.status.size(); ++id) {
            if (g.status[id] == Grid::Status::Exterior) continue;
            int i = int(id) % g.nx, j = int(id) / g.nx;
            double err = std::abs(sol.u[id] - model.value(g.point(i, j)));
            if (g.dist[id] >= d_fixed) row.err_fixed = std::max(row.err_fixed, err);
            if (g.dist[id] >= sol.trust_distance) row.err_trust = std::max(row.err_trust, err);
        }
        if (!rows.empty() && row.err_fixed > 0)
            row.order = std::log2(rows.back().err_fixed / row.err_fixed) /
                        std::log2(rows.back().h / row.h);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Exports. CSV: one row per non-exterior node, columns x,y,d,u_h.

inline void solution_to_csv(const GridSolution& sol, std::ostream& out) {
    const Grid& g = *sol.grid;
    out << "x,y,d,u_h\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior) continue;
            Point2 p = g.point(i, j);
            out << format_g(p.x) << ',' << format_g(p.y) << ',' << format_g(g.dist[id]) << ','
                << format_g(sol.u[id]) << '\n';
        }
}

// Binary dump layout (little endian):
//   bytes 0..7   magic "LIOUGRD1"
//   f64          h, x0, y0
//   u32          nx, ny
//   then nx*ny row-major records: u8 status, f64 u, f64 d
inline void solution_to_binary(const GridSolution& sol, std::ostream& out) {
    const Grid& g = *sol.grid;
    out.write("LIOUGRD1", 8);
    auto w64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    w64(g.h);
    w64(g.x0);
    w64(g.y0);
    w32(std::uint32_t(g.nx));
    w32(std::uint32_t(g.ny));
    for (std::size_t id = 0; id < g.status.size(); ++id) {
        std::uint8_t s = std::uint8_t(g.status[id]);
        out.write(reinterpret_cast<const char*>(&s), 1);
        w64(sol.u[id]);
        w64(g.dist[id]);
    }
}

struct BinaryHeader {
    double h, x0, y0;
    std::uint32_t nx, ny;
};

inline BinaryHeader read_binary_header(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (std::string(magic, 8) != "LIOUGRD1")
        throw std::runtime_error("read_binary_header: bad magic");
    BinaryHeader h{};
    in.read(reinterpret_cast<char*>(&h.h), 8);
    in.read(reinterpret_cast<char*>(&h.x0), 8);
    in.read(reinterpret_cast<char*>(&h.y0), 8);
    in.read(reinterpret_cast<char*>(&h.nx), 4);
    in.read(reinterpret_cast<char*>(&h.ny), 4);
    return h;
}

}  // namespace liouville::solver
