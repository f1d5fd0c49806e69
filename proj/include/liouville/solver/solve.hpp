#pragma once

// Damped-Newton Shortley-Weller solver for Delta u = e^{2u} with blow-up
// boundary data, in two modes:
//
//   ConstantK  Dirichlet data u = k at the true cut points for an increasing
//              k-sequence, monotone iterates, stop when the trust-region
//              increment is below tolerance (the constant-k approximation
//              scheme).
//   Matched    boundary-adjacent nodes pinned to a blow-up model; the PDE is
//              solved at full-stencil nodes.
//
// Both modes share a defect correction: the residual subtracts
// chi(x) (L_h m - Delta m)(x) for a reference model m (shifted to
// m_k = -log(e^{-m} + e^{-k}) in ConstantK mode, so m_k = k on the boundary).
// The correction cancels the O(1/d^4) truncation of the blow-up profile that
// otherwise reduces the scheme to first order; chi fades it away from the
// boundary and outside the model's validity region.

#include <Eigen/Sparse>
#include <variant>

#include "liouville/solver/grid.hpp"

namespace liouville::solver {

using closedform::ModelExpansion;

struct ConstantKMode {
    std::vector<double> ks;  // strictly increasing

    static ConstantKMode default_sequence() {
        ConstantKMode m;
        for (double k = 2; k <= 24; k += 2) m.ks.push_back(k);
        return m;
    }
};

struct MatchedMode {
    ModelExpansion model;
};

struct SolverConfig {
    double h = 1.0 / 64;
    std::variant<ConstantKMode, MatchedMode> boundary = ConstantKMode::default_sequence();
    double newton_tol = 1e-10;  // on max_j |F_j| / max(1, e^{2 u_j})
    int max_newton_iter = 50;
    int max_halvings = 30;
    double k_stop_tol = 1e-6;     // trust-region increment stopping threshold
    double trust_factor = 10.0;   // trust region is {d >= trust_factor * h}
    bool defect_correction = true;
    ModelExpansion correction_model;  // defaults to the Matched model if unset
    double chi_on = 0.25, chi_off = 0.55;  // correction fade, in units of domain scale
};

struct NewtonReport {
    int iterations = 0;
    double residual_raw = 0;
    double residual_scaled = 0;
    double linear_residual = 0;  // worst relative residual of the linear solves
    int halvings = 0;
    bool converged = false;
    // ConstantK bookkeeping
    std::vector<double> ks_run;
    double final_increment = 0;
    double min_increment = 0;  // most negative node-wise increment (monotonicity)
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, NewtonReport rep)
        : std::runtime_error(what), report(std::move(rep)) {}
    NewtonReport report;
};

struct GridSolution {
    std::shared_ptr<const Grid> grid;
    std::vector<double> u;  // per lattice node; NaN on exterior
    std::string mode;
    NewtonReport report;
    double trust_distance = 0;

    bool in_trust(Point2 p) const {
        return grid->domain->inside(p) && grid->domain->project(p).d >= trust_distance;
    }

    // Bilinear interpolation from the surrounding cell; all four nodes must
    // carry values and p must lie in the trust region.
    double evaluate(Point2 p) const {
        const Grid& g = *grid;
        if (!in_trust(p)) throw std::domain_error("evaluate: point outside the trust region");
        double fx = (p.x - g.x0) / g.h, fy = (p.y - g.y0) / g.h;
        int i = int(std::floor(fx)), j = int(std::floor(fy));
        if (i >= g.nx - 1) i = g.nx - 2;
        if (j >= g.ny - 1) j = g.ny - 2;
        double ax = fx - i, ay = fy - j;
        double vals[4];
        int ii[4] = {i, i + 1, i, i + 1}, jj[4] = {j, j, j + 1, j + 1};
        for (int q = 0; q < 4; ++q) {
            if (g.status_at(ii[q], jj[q]) == Grid::Status::Exterior)
                throw std::domain_error("evaluate: interpolation cell touches the exterior");
            vals[q] = u[g.idx(ii[q], jj[q])];
        }
        return (1 - ax) * (1 - ay) * vals[0] + ax * (1 - ay) * vals[1] +
               (1 - ax) * ay * vals[2] + ax * ay * vals[3];
    }

    double value_at_node(int i, int j) const { return u[grid->idx(i, j)]; }
};

// ---------------------------------------------------------------------------

namespace detail {

struct Stencil {
    // SW coefficients: c_center u_P + sum c_arm u_arm approximates Delta u.
    double c_center = 0;
    double c_arm[4] = {0, 0, 0, 0};  // e, w, n, s
};

inline Stencil sw_stencil(const Grid::Cuts& c, double h) {
    Stencil s;
    double ae = c.e * h, aw = c.w * h, an = c.n * h, as_ = c.s * h;
    s.c_arm[0] = 2.0 / (ae * (ae + aw));
    s.c_arm[1] = 2.0 / (aw * (ae + aw));
    s.c_arm[2] = 2.0 / (an * (an + as_));
    s.c_arm[3] = 2.0 / (as_ * (an + as_));
    s.c_center = -2.0 / (ae * aw) - 2.0 / (an * as_);
    return s;
}

// The four arm sample points of a node (neighbor node or boundary cut point).
inline void arm_points(const Grid& g, int i, int j, Point2 out[4], bool is_cut[4]) {
    const Grid::Cuts& c = g.cuts[g.idx(i, j)];
    Point2 p = g.point(i, j);
    double h = g.h;
    double fr[4] = {c.e, c.w, c.n, c.s};
    int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int a = 0; a < 4; ++a) {
        is_cut[a] = g.status_at(i + di[a], j + dj[a]) == Grid::Status::Exterior;
        double f = is_cut[a] ? fr[a] : 1.0;
        out[a] = {p.x + di[a] * f * h, p.y + dj[a] * f * h};
    }
}

}  // namespace detail

// Defect-correction field: per node,
//
//   corr_j = chi_j ([L_h m_eps]_interior-arms - Delta m_eps) + [L_h m_eps]_cut-arms
//
// with m_eps = -log(E + eps), E the model defect (eps = 0 reproduces the
// model itself). The cut-arm part enters ungated: it must cancel the
// boundary data contribution of L_h u exactly (in ConstantK mode
// m_eps = eps-shift value = k at every cut point), otherwise nodes where the
// model trust fades would keep absorbing the growing data. Nodes where the
// shifted defect is non-positive at a stencil point get no gated correction.
inline std::vector<double> correction_field(const Grid& g, const ModelExpansion& model,
                                            double eps, double chi_on, double chi_off) {
    std::vector<double> corr(g.status.size(), 0.0);
    double scale = g.domain->scale();
    auto m_eps = [&](Point2 p) -> double {
        double e = model.defect(p) + eps;
        if (!(e > 0)) throw std::domain_error("correction: defect not positive");
        return -std::log(e);
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior) continue;
            Point2 p = g.point(i, j);
            detail::Stencil st = detail::sw_stencil(g.cuts[id], g.h);
            Point2 arm[4];
            bool is_cut[4];
            detail::arm_points(g, i, j, arm, is_cut);

            double cut_part = 0;
            bool has_cut = false;
            try {
                for (int a = 0; a < 4; ++a)
                    if (is_cut[a]) {
                        has_cut = true;
                        cut_part += st.c_arm[a] * m_eps(arm[a]);  // E(cut) + eps > 0 for eps > 0
                    }
            } catch (const std::domain_error&) {
                continue;  // eps = 0 at a cut point: pinned in Matched mode, no correction
            }

            double chi = 1.0 - smoothstep((g.dist[id] / scale - chi_on) / (chi_off - chi_on));
            chi *= model.trust_weight(p);
            double gated = 0;
            if (chi >= 1e-12) {
                try {
                    double lhm = st.c_center * m_eps(p);
                    for (int a = 0; a < 4; ++a)
                        if (!is_cut[a]) lhm += st.c_arm[a] * m_eps(arm[a]);
                    // Delta m_eps = -Delta E/(E+eps) + |grad E|^2/(E+eps)^2
                    double e = model.defect(p) + eps;
                    Vec2 ge = model.defect_gradient(p);
                    double lap = -model.defect_laplacian(p) / e + ge.norm2() / (e * e);
                    gated = chi * (lhm - lap);
                } catch (const std::domain_error&) {
                    gated = 0;  // model not usable here
                }
            } else if (has_cut) {
                // fully untrusted but carrying data arms: the node decouples
                // from its boundary data (cut_part below cancels it); the
                // interior arms then close its equation.
            }
            corr[id] = gated + cut_part;
        }
    }
    return corr;
}

// ---------------------------------------------------------------------------
// One damped-Newton Dirichlet solve on an assembled grid.
//
//   F(u)_j = (L_h u)_j - e^{2 u_j} - corr_j = 0   at solved nodes,
//   u = pin[j]                                   at pinned nodes,
//   u(cut point) = g(cut point)                  on boundary arms.
//
// The Jacobian L_h - diag(2 e^{2u}) is factored by SparseLU; the relative
// residual of every linear solve is checked against 1e-12.

struct DirichletProblem {
    const Grid& g;
    ScalarField boundary;                 // evaluated at cut points
    const std::vector<double>* pinned;    // per-node values, NaN = not pinned (may be null)
    const std::vector<double>* corr;      // may be null
};

inline bool is_pinned(const DirichletProblem& pr, int id) {
    return pr.pinned && !std::isnan((*pr.pinned)[id]);
}

inline std::vector<double> newton_solve(const DirichletProblem& pr, const SolverConfig& cfg,
                                        const std::vector<double>& u0, NewtonReport& rep) {
    const Grid& g = pr.g;
    std::vector<int> unknown_of(g.status.size(), -1);
    std::vector<int> node_of;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int id = g.idx(i, j);
            if (g.status[id] == Grid::Status::Exterior || is_pinned(pr, id)) continue;
            unknown_of[id] = int(node_of.size());
            node_of.push_back(id);
        }
    int n = int(node_of.size());
    if (n == 0) throw std::invalid_argument("newton_solve: no unknowns");

    std::vector<double> u = u0;

    // Fixed contributions and stencil tables.
    std::vector<detail::Stencil> st(n);
    std::vector<std::array<int, 4>> nb(n);      // unknown index of arm neighbor, -1 if fixed
    std::vector<double> fixed_part(n, 0.0);     // boundary/pinned arm contributions
    for (int k = 0; k < n; ++k) {
        int id = node_of[k];
        int i = id % g.nx, j = id / g.nx;
        st[k] = detail::sw_stencil(g.cuts[id], g.h);
        Point2 arm[4];
        bool is_cut[4];
        detail::arm_points(g, i, j, arm, is_cut);
        int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int a = 0; a < 4; ++a) {
            int nid = g.in_lattice(i + di[a], j + dj[a]) ? g.idx(i + di[a], j + dj[a]) : -1;
            if (is_cut[a]) {
                nb[k][a] = -1;
                fixed_part[k] += st[k].c_arm[a] * pr.boundary(arm[a]);
            } else if (is_pinned(pr, nid)) {
                nb[k][a] = -1;
                fixed_part[k] += st[k].c_arm[a] * (*pr.pinned)[nid];
            } else {
                nb[k][a] = unknown_of[nid];
            }
        }
        if (pr.corr) fixed_part[k] -= (*pr.corr)[id];
    }

    auto residual = [&](const std::vector<double>& uu, Eigen::VectorXd& F, double& raw,
                        double& scaled) {
        raw = scaled = 0;
        for (int k = 0; k < n; ++k) {
            double acc = fixed_part[k] + st[k].c_center * uu[node_of[k]];
            for (int a = 0; a < 4; ++a)
                if (nb[k][a] >= 0) acc += st[k].c_arm[a] * uu[node_of[nb[k][a]]];
            double ex = std::exp(2.0 * uu[node_of[k]]);
            double f = acc - ex;
            F[k] = f;
            raw = std::max(raw, std::abs(f));
            scaled = std::max(scaled, std::abs(f) / std::max(1.0, ex));
        }
    };

    Eigen::SparseMatrix<double> J(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(5 * n);
        for (int k = 0; k < n; ++k) {
            trip.emplace_back(k, k, 1.0);
            for (int a = 0; a < 4; ++a)
                if (nb[k][a] >= 0) trip.emplace_back(k, nb[k][a], 1.0);
        }
        J.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(J);

    Eigen::VectorXd F(n), Fnew(n);
    double raw, scaled;
    residual(u, F, raw, scaled);
    rep = NewtonReport{};
    int it = 0;
    for (; it < cfg.max_newton_iter && scaled > cfg.newton_tol; ++it) {
        // Assemble J = L_h - diag(2 e^{2u}).
        for (int k = 0; k < n; ++k) {
            double ex = std::exp(2.0 * u[node_of[k]]);
            J.coeffRef(k, k) = st[k].c_center - 2.0 * ex;
            for (int a = 0; a < 4; ++a)
                if (nb[k][a] >= 0) J.coeffRef(k, nb[k][a]) = st[k].c_arm[a];
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw SolveError("newton_solve: singular Jacobian factorization", rep);
        Eigen::VectorXd delta = lu.solve(-F);
        double lin_res = (J * delta + F).norm() / std::max(F.norm(), 1e-300);
        rep.linear_residual = std::max(rep.linear_residual, lin_res);
        if (lin_res > 1e-9) throw SolveError("newton_solve: linear solve lost accuracy", rep);

        double tstep = 1.0;
        int hv = 0;
        std::vector<double> utry = u;
        for (; hv <= cfg.max_halvings; ++hv) {
            for (int k = 0; k < n; ++k) utry[node_of[k]] = u[node_of[k]] + tstep * delta[k];
            double raw2, scaled2;
            residual(utry, Fnew, raw2, scaled2);
            if (scaled2 < scaled || scaled <= cfg.newton_tol) {
                u.swap(utry);
                F.swap(Fnew);
                raw = raw2;
                scaled = scaled2;
                break;
            }
            tstep *= 0.5;
        }
        rep.halvings += hv;
        if (hv > cfg.max_halvings)
            throw SolveError("newton_solve: line search failed (residual " + format_g(scaled) + ")",
                             rep);
    }
    rep.iterations = it;
    rep.residual_raw = raw;
    rep.residual_scaled = scaled;
    rep.converged = scaled <= cfg.newton_tol;
    if (!rep.converged)
        throw SolveError("newton_solve: no convergence in " + std::to_string(it) + " iterations",
                         rep);
    return u;
}

// Public Dirichlet solve: finite data g at the cut points, no pinning, no
// correction. The plain scheme of the constant-k subproblems.
inline GridSolution solve_dirichlet(std::shared_ptr<const Grid> grid, ScalarField gdata,
                                    const SolverConfig& cfg) {
    const Grid& g = *grid;
    std::vector<double> u0(g.status.size(), 0.0);
    for (std::size_t id = 0; id < g.status.size(); ++id)
        if (g.status[id] == Grid::Status::Exterior)
            u0[id] = std::numeric_limits<double>::quiet_NaN();
    DirichletProblem pr{g, gdata, nullptr, nullptr};
    NewtonReport rep;
    GridSolution sol;
    sol.u = newton_solve(pr, cfg, u0, rep);
    sol.grid = std::move(grid);
    sol.mode = "dirichlet";
    sol.report = rep;
    sol.trust_distance = cfg.trust_factor * cfg.h;
    return sol;
}

// ---------------------------------------------------------------------------
// Blow-up solves.

inline GridSolution solve_blowup_on(std::shared_ptr<const Grid> grid, const SolverConfig& cfg) {
    const Grid& g = *grid;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    GridSolution sol;
    sol.grid = grid;
    sol.trust_distance = cfg.trust_factor * g.h;

    if (std::holds_alternative<MatchedMode>(cfg.boundary)) {
        const ModelExpansion& model = std::get<MatchedMode>(cfg.boundary).model;
        if (!model.valid()) throw std::invalid_argument("solve_blowup: Matched mode needs a model");
        std::vector<double> pinned(g.status.size(), nan);
        std::vector<double> u0(g.status.size(), nan);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int id = g.idx(i, j);
                if (g.status[id] == Grid::Status::Exterior) continue;
                double v = model.value(g.point(i, j));
                u0[id] = v;
                if (g.status[id] == Grid::Status::NearBoundary) pinned[id] = v;
            }
        const ModelExpansion& corr_model =
            cfg.correction_model.valid() ? cfg.correction_model : model;
        std::vector<double> corr;
        if (cfg.defect_correction)
            corr = correction_field(g, corr_model, 0.0, cfg.chi_on, cfg.chi_off);
        auto never = [](Point2) -> double {
            throw std::logic_error("matched mode has no cut-point data");
        };
        DirichletProblem pr{g, never, &pinned, cfg.defect_correction ? &corr : nullptr};
        NewtonReport rep;
        sol.u = newton_solve(pr, cfg, u0, rep);
        for (std::size_t id = 0; id < pinned.size(); ++id)
            if (!std::isnan(pinned[id])) sol.u[id] = pinned[id];
        sol.report = rep;
        sol.mode = "matched(" + model.describe() + ")";
        return sol;
    }

    const ConstantKMode& mode = std::get<ConstantKMode>(cfg.boundary);
    if (mode.ks.empty()) throw std::invalid_argument("solve_blowup: empty k sequence");
    for (std::size_t i = 1; i < mode.ks.size(); ++i)
        if (mode.ks[i] <= mode.ks[i - 1])
            throw std::invalid_argument("solve_blowup: k sequence must be strictly increasing");
    if (cfg.defect_correction && !cfg.correction_model.valid())
        throw std::invalid_argument("solve_blowup: ConstantK correction needs a model");

    std::vector<double> u(g.status.size(), nan);
    for (std::size_t id = 0; id < g.status.size(); ++id)
        if (g.status[id] != Grid::Status::Exterior) u[id] = mode.ks.front();

    NewtonReport rep_all;
    rep_all.min_increment = 0;
    std::vector<double> prev;
    bool converged_seq = false;
    for (double k : mode.ks) {
        std::vector<double> corr;
        if (cfg.defect_correction)
            corr = correction_field(g, cfg.correction_model, std::exp(-k), cfg.chi_on,
                                    cfg.chi_off);
        auto gdata = [k](Point2) { return k; };
        DirichletProblem pr{g, gdata, nullptr, cfg.defect_correction ? &corr : nullptr};
        NewtonReport rep;
        u = newton_solve(pr, cfg, u, rep);
        rep_all.iterations += rep.iterations;
        rep_all.halvings += rep.halvings;
        rep_all.linear_residual = std::max(rep_all.linear_residual, rep.linear_residual);
        rep_all.residual_raw = rep.residual_raw;
        rep_all.residual_scaled = rep.residual_scaled;
        rep_all.ks_run.push_back(k);
        if (!prev.empty()) {
            double inc_trust = 0, inc_min = 0;
            for (std::size_t id = 0; id < u.size(); ++id) {
                if (std::isnan(u[id])) continue;
                double d = g.dist[id];
                double inc = u[id] - prev[id];
                inc_min = std::min(inc_min, inc);
                if (d >= sol.trust_distance) inc_trust = std::max(inc_trust, std::abs(inc));
            }
            rep_all.min_increment = std::min(rep_all.min_increment, inc_min);
            rep_all.final_increment = inc_trust;
            if (inc_min < -1e-4)
                throw SolveError("solve_blowup: constant-k iterates lost monotonicity", rep_all);
            if (inc_trust < cfg.k_stop_tol) {
                converged_seq = true;
                break;
            }
        }
        prev = u;
    }
    if (!converged_seq && mode.ks.size() > 1)
        throw SolveError("solve_blowup: k-sequence did not converge on the trust region "
                         "(last increment " +
                             format_g(rep_all.final_increment) + ")",
                         rep_all);
    rep_all.converged = true;
    sol.u = std::move(u);
    sol.report = rep_all;
    sol.mode = "constant_k";
    return sol;
}

inline GridSolution solve_blowup(DomainPtr domain, const SolverConfig& cfg) {
    auto grid = std::make_shared<Grid>(discretize(domain, cfg.h));
    return solve_blowup_on(grid, cfg);
}

inline double evaluate(const GridSolution& sol, Point2 p) { return sol.evaluate(p); }

}  // namespace liouville::solver
