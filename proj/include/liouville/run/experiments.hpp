#pragma once

// The experiment catalog behind the batch runner. Each kind consumes its
// [[experiment]] table, runs solver + asymptotics jobs, and returns a
// verdict, a JSON report, CSV tables and an SVG plot. Verdicts of advisory
// experiments never fail a run.

#include "json.hpp"
#include "liouville/asymptotics.hpp"
#include "liouville/kahler.hpp"
#include "liouville/run/svg.hpp"
#include "liouville/run/toml.hpp"
#include "liouville/solver/study.hpp"

namespace liouville::run {

using closedform::DomainPtr;
using closedform::ModelExpansion;
using nlohmann::json;

struct JobOutput {
    std::string filename;
    std::string content;
};

struct JobResult {
    std::string name;
    std::string kind;
    std::string verdict;  // pass | fail | advisory-pass | advisory-fail | info | crash
    bool binding = true;
    std::string summary;
    json report;
    std::vector<JobOutput> files;
    double seconds = 0;

    bool failed_binding() const { return verdict == "fail" || verdict == "crash"; }
};

// ---------------------------------------------------------------------------
// Reference models per domain family (pinning data + defect correction).

inline ModelExpansion sector_reference(DomainPtr dom, double mu, double R) {
    return closedform::corner_blend(closedform::cone_solution(mu),
                                    closedform::smooth_model(dom), {0, 0}, 0.55 * R, 0.75 * R);
}

inline ModelExpansion curved_corner_reference(DomainPtr dom, double mu, double amp, double R) {
    return closedform::corner_blend(closedform::transported_cone_model(mu, amp),
                                    closedform::smooth_model(dom), {0, 0}, 0.5 * R, 0.7 * R);
}

namespace detail {

inline json fit_to_json(const asymptotics::RateFit& f) {
    return json{{"slope", f.slope},     {"log_c", f.log_c},   {"constant", f.constant()},
                {"rms", f.rms},         {"d_min", f.d_min},   {"d_max", f.d_max},
                {"count", f.count},     {"dropped_zero", f.dropped_zero}};
}

inline json profile_to_json(const asymptotics::ErrorProfile& p) {
    json samples = json::array();
    for (const auto& s : p.samples)
        samples.push_back({{"d", s.d}, {"e_abs", s.e_abs}, {"e_signed", s.e_signed},
                           {"x", s.p.x}, {"y", s.p.y}});
    return json{{"domain", p.domain}, {"model", p.model}, {"samples", samples}};
}

inline std::string profile_csv(const asymptotics::ErrorProfile& p) {
    std::string out = "d,e_abs,e_signed,x,y\n";
    for (const auto& s : p.samples)
        out += format_g(s.d) + "," + format_g(s.e_abs) + "," + format_g(s.e_signed) + "," +
               format_g(s.p.x) + "," + format_g(s.p.y) + "\n";
    return out;
}

inline std::string rate_plot(const std::string& title, const asymptotics::ErrorProfile& prof,
                             const asymptotics::RateFit& fit) {
    PlotSeries pts;
    pts.label = "samples";
    for (const auto& s : prof.samples)
        if (s.e_abs > 0) pts.points.push_back({s.d, s.e_abs});
    PlotLine ln{fit.slope, fit.log_c,
                "fit: slope " + format_f(fit.slope, 3) + ", C " + format_g(fit.constant(), 4)};
    return loglog_svg(title, "distance d", "|error|", {pts}, {ln});
}

// Window-shrink diagnostic: refitting on [d_min, d_max/2^j] must not lower
// the slope by more than the fit residual (pre-asymptotic guard); violations
// mark the experiment inconclusive rather than failing it.
inline bool window_monotone(const asymptotics::ErrorProfile& prof,
                            const asymptotics::RateFit& base) {
    for (int j = 1; j <= 2; ++j) {
        double hi = base.d_max / std::pow(2.0, j);
        if (hi <= base.d_min * 2.5) break;
        int inside = 0;
        for (const auto& s : prof.samples)
            if (s.d >= base.d_min && s.d <= hi && s.e_abs > 0) ++inside;
        if (inside < 4) break;
        auto f = asymptotics::fit_rate(prof, base.d_min, hi);
        if (f.slope < base.slope - base.rms - f.rms) return false;
    }
    return true;
}

inline solver::GridSolution solve_matched(DomainPtr dom, const ModelExpansion& model, double h) {
    solver::SolverConfig cfg;
    cfg.h = h;
    cfg.boundary = solver::MatchedMode{model};
    return solver::solve_blowup(std::move(dom), cfg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// disk-validate: Matched solve against the exact ball solution over a grid
// ladder; binding on the h = h_check error and on the empirical orders.

inline JobResult run_disk_validate(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "disk-validate";
    double radius = toml_number(t, "radius", 1.0);
    std::vector<double> hs = toml_numbers(t, "h", {1.0 / 32, 1.0 / 64, 1.0 / 128});
    double h_check = toml_number(t, "h_check", 1.0 / 64);
    double tol = toml_number(t, "tol", 5e-4);
    double d_floor = toml_number(t, "d_floor", 0.1);
    double order_lo = toml_number(t, "order_lo", 1.5);
    double order_hi = toml_number(t, "order_hi", 2.5);

    auto dom = std::make_shared<const geometry::DomainSpec>(geometry::disk(radius));
    auto ball = closedform::ball_solution(radius);

    double hmax = *std::max_element(hs.begin(), hs.end());
    double d_fixed = 10 * hmax;
    json rows = json::array();
    std::string csv = "h,err_floor,err_fixed,order,nodes\n";
    double err_check = -1, prev_fixed = 0, prev_h = 0;
    std::vector<double> orders;
    PlotSeries pts;
    pts.label = "max error, d >= " + format_g(d_fixed, 3);
    for (double h : hs) {
        auto sol = detail::solve_matched(dom, ball, h);
        const auto& g = *sol.grid;
        double ef = 0, efl = 0;
        for (std::size_t id = 0; id < g.status.size(); ++id) {
            if (g.status[id] == solver::Grid::Status::Exterior) continue;
            int i = int(id) % g.nx, j = int(id) / g.nx;
            double e = std::abs(sol.u[id] - ball.value(g.point(i, j)));
            if (g.dist[id] >= d_fixed) ef = std::max(ef, e);
            if (g.dist[id] >= d_floor) efl = std::max(efl, e);
        }
        double order = 0;
        if (prev_h > 0) {
            order = std::log2(prev_fixed / ef) / std::log2(prev_h / h);
            orders.push_back(order);
        }
        if (std::abs(h - h_check) < 1e-12) err_check = efl;
        rows.push_back({{"h", h}, {"err_floor", efl}, {"err_fixed", ef}, {"order", order},
                        {"nodes", g.interior_count()}});
        csv += format_g(h) + "," + format_g(efl) + "," + format_g(ef) + "," + format_g(order) +
               "," + std::to_string(g.interior_count()) + "\n";
        pts.points.push_back({h, ef});
        prev_fixed = ef;
        prev_h = h;
    }
    bool orders_ok = !orders.empty();
    for (double o : orders) orders_ok &= (o >= order_lo && o <= order_hi);
    bool pass = err_check >= 0 && err_check < tol && orders_ok;
    res.verdict = pass ? "pass" : "fail";
    res.summary = "err(h=" + format_g(h_check, 4) + ", d>=" + format_g(d_floor, 3) +
                  ") = " + format_g(err_check, 4) + (err_check < tol ? " < " : " >= ") +
                  format_g(tol, 3) + "; orders " + (orders_ok ? "in" : "outside") + " [" +
                  format_g(order_lo, 3) + ", " + format_g(order_hi, 3) + "]";
    res.report = json{{"rows", rows},
                      {"err_check", err_check},
                      {"tol", tol},
                      {"orders", orders},
                      {"order_window", {order_lo, order_hi}}};
    res.files.push_back({"table.csv", csv});
    res.files.push_back(
        {"plot.svg", loglog_svg("disk validation: error vs h", "h", "max error", {pts}, {})});
    return res;
}

// ---------------------------------------------------------------------------
// smooth-rate: |u + log d - kappa d / 2| on the disk, expected O(d^2).

inline JobResult run_smooth_rate(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "smooth-rate";
    double radius = toml_number(t, "radius", 1.0);
    double h = toml_number(t, "h", 1.0 / 256);
    double d_lo = toml_number(t, "d_lo", 0.05);
    double d_hi = toml_number(t, "d_hi", 0.4);
    double slope_lo = toml_number(t, "slope_lo", 1.8);
    double slope_hi = toml_number(t, "slope_hi", 2.2);

    auto dom = std::make_shared<const geometry::DomainSpec>(geometry::disk(radius));
    auto ball = closedform::ball_solution(radius);
    auto sol = detail::solve_matched(dom, ball, h);
    auto smooth = closedform::smooth_model(dom);

    asymptotics::SamplerSpec sp;
    sp.anchor = {radius, 0};
    sp.direction = {-1, 0};
    sp.d_hi = d_hi;
    sp.d_lo = d_lo;
    sp.per_octave = int(toml_number(t, "per_octave", 4));
    auto prof = asymptotics::error_profile(sol, smooth, sp);
    auto fit = asymptotics::fit_rate(prof, d_lo, d_hi);
    // Taylor oracle of the closed form: e(d) = -log(1 - d/2r) - d/2r ~ d^2/(8 r^2)
    double worst_ratio = 0;
    for (const auto& s : prof.samples) {
        double expect = -std::log1p(-s.d / (2 * radius)) - s.d / (2 * radius);
        worst_ratio = std::max(worst_ratio, std::abs(s.e_abs / expect - 1.0));
    }
    bool inconclusive = !detail::window_monotone(prof, fit);
    bool pass = fit.slope >= slope_lo && fit.slope <= slope_hi;
    res.verdict = inconclusive && !pass ? "advisory-fail" : (pass ? "pass" : "fail");
    res.summary = "slope " + format_f(fit.slope, 3) + " in [" + format_g(slope_lo, 3) + ", " +
                  format_g(slope_hi, 3) + "]" + (pass ? "" : " VIOLATED") +
                  "; taylor dev " + format_f(worst_ratio * 100, 1) + "%";
    res.report = json{{"fit", detail::fit_to_json(fit)},
                      {"profile", detail::profile_to_json(prof)},
                      {"taylor_max_rel_dev", worst_ratio},
                      {"window_monotone", !inconclusive},
                      {"slope_window", {slope_lo, slope_hi}}};
    res.files.push_back({"profile.csv", detail::profile_csv(prof)});
    res.files.push_back({"plot.svg", detail::rate_plot("smooth boundary expansion rate", prof, fit)});
    return res;
}

// ---------------------------------------------------------------------------
// c1alpha-rate: |u + log d| near a C^{1,alpha} boundary point (binding at
// mu = 1) or |u - f_mu| at a C^{1,alpha} corner (the Remark; advisory).

inline JobResult run_c1alpha_rate(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "c1alpha-rate";
    double alpha = toml_number(t, "alpha", 0.5);
    double M = toml_number(t, "M", 0.2);
    double R = toml_number(t, "R", 1.0);
    double mu = toml_number(t, "mu", 1.0);
    double h = toml_number(t, "h", 1.0 / 256);
    double slope_min = toml_number(t, "slope_min", alpha - 0.2);
    bool corner_variant = std::abs(mu - 1.0) > 1e-12;
    res.binding = !corner_variant && toml_bool(t, "binding", true);

    auto dom =
        std::make_shared<const geometry::DomainSpec>(geometry::c1alpha_corner(alpha, M, R, mu));
    auto logd = closedform::log_distance_model(dom);
    auto sol = detail::solve_matched(dom, logd, h);
    ModelExpansion target =
        corner_variant ? closedform::corner_model(dom, 0) : logd;

    asymptotics::SamplerSpec sp;
    sp.anchor = {0, 0};
    sp.direction = from_polar(1.0, mu * kPi / 2);
    sp.d_hi = toml_number(t, "d_hi", 0.2 * R);
    sp.d_lo = toml_number(t, "d_lo", 20 * h);
    sp.per_octave = int(toml_number(t, "per_octave", 4));
    auto prof = asymptotics::error_profile(sol, target, sp);
    auto check = asymptotics::check_estimate(prof, alpha, alpha - slope_min);
    bool inconclusive = !detail::window_monotone(prof, check.fit);

    bool pass = check.pass;
    if (res.binding)
        res.verdict = pass ? "pass" : (inconclusive ? "advisory-fail" : "fail");
    else
        res.verdict = pass ? "advisory-pass" : "advisory-fail";
    res.summary = std::string(corner_variant ? "corner Remark (advisory): " : "") + "slope " +
                  format_f(check.fit.slope, 3) + " vs threshold " + format_f(slope_min, 3) +
                  " (target " + format_g(alpha, 3) + ")";
    res.report = json{{"alpha", alpha},
                      {"mu", mu},
                      {"M", M},
                      {"fit", detail::fit_to_json(check.fit)},
                      {"profile", detail::profile_to_json(prof)},
                      {"threshold", slope_min},
                      {"window_monotone", !inconclusive},
                      {"advisory", !res.binding}};
    res.files.push_back({"profile.csv", detail::profile_csv(prof)});
    res.files.push_back({"plot.svg", detail::rate_plot("C^{1,alpha} boundary rate", prof, check.fit)});
    return res;
}

// ---------------------------------------------------------------------------
// corner-rate: |u - f_mu| toward a curved corner, expected O(d).

inline JobResult run_corner_rate(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "corner-rate";
    double mu = toml_number(t, "mu", 0.5);
    // Bend the arms so the O(d) corner term and the localization tail of the
    // bounded domain reinforce instead of cancelling inside the fit window.
    double amp = toml_number(t, "amp", mu > 1 ? 0.3 : -0.3);
    double R = toml_number(t, "R", 1.0);
    double h = toml_number(t, "h", 1.0 / 256);
    double slope_min = toml_number(t, "slope_min", 0.8);

    auto dom = std::make_shared<const geometry::DomainSpec>(geometry::curved_corner(mu, amp, R));
    auto model = curved_corner_reference(dom, mu, amp, R);
    auto sol = detail::solve_matched(dom, model, h);
    auto fmu = closedform::corner_model(dom, 0);

    asymptotics::SamplerSpec sp;
    sp.anchor = {0, 0};
    sp.direction = from_polar(1.0, mu * kPi / 2);
    sp.d_hi = toml_number(t, "d_hi", 0.2 * R);  // feature scale = arm length
    sp.d_lo = toml_number(t, "d_lo", 20 * h);
    sp.per_octave = int(toml_number(t, "per_octave", 4));
    auto prof = asymptotics::error_profile(sol, fmu, sp);
    auto check = asymptotics::check_estimate(prof, 1.0, 1.0 - slope_min);
    bool inconclusive = !detail::window_monotone(prof, check.fit);

    res.verdict = check.pass ? "pass" : (inconclusive ? "advisory-fail" : "fail");
    res.summary = "mu=" + format_g(mu, 3) + ": slope " + format_f(check.fit.slope, 3) +
                  (check.pass ? " >= " : " < ") + format_f(slope_min, 3) + ", C = " +
                  format_g(check.fit.constant(), 4);
    res.report = json{{"mu", mu},
                      {"amp", amp},
                      {"fit", detail::fit_to_json(check.fit)},
                      {"profile", detail::profile_to_json(prof)},
                      {"threshold", slope_min},
                      {"window_monotone", !inconclusive}};
    res.files.push_back({"profile.csv", detail::profile_csv(prof)});
    res.files.push_back({"plot.svg", detail::rate_plot("corner estimate rate (mu=" +
                                                       format_g(mu, 3) + ")", prof, check.fit)});
    return res;
}

// ---------------------------------------------------------------------------
// localization: gap between solutions of two domains coinciding near the
// corner, expected O(|z|^{1/mu}).

inline JobResult run_localization(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "localization";
    double mu = toml_number(t, "mu", 0.5);
    double h = toml_number(t, "h", 1.0 / 128);
    double slope_min = toml_number(t, "slope_min", 1.0 / mu - 0.4);

    auto pair = geometry::localized_pair(mu);
    auto da = std::make_shared<const geometry::DomainSpec>(std::move(pair.first));
    auto db = std::make_shared<const geometry::DomainSpec>(std::move(pair.second));
    auto ma = sector_reference(da, mu, 1.0);
    auto mb = sector_reference(db, mu, 1.0);
    auto sa = detail::solve_matched(da, ma, h);
    auto sb = detail::solve_matched(db, mb, h);

    double sin_b = std::sin(std::min(mu * kPi / 2, kPi / 2));  // bisector distance factor
    double r_lo = toml_number(t, "r_lo", 10 * h / sin_b * 1.1);
    double r_hi = toml_number(t, "r_hi", 0.45);
    auto prof = asymptotics::localization_gap(sa, sb, {0, 0}, mu, pair.rho, r_hi, r_lo,
                                              int(toml_number(t, "per_octave", 5)));
    auto check = asymptotics::check_estimate(prof, 1.0 / mu, 1.0 / mu - slope_min);
    bool inconclusive = !detail::window_monotone(prof, check.fit);

    res.verdict = check.pass ? "pass" : (inconclusive ? "advisory-fail" : "fail");
    res.summary = "mu=" + format_g(mu, 3) + ": gap slope " + format_f(check.fit.slope, 3) +
                  (check.pass ? " >= " : " < ") + format_f(slope_min, 3) + " (1/mu = " +
                  format_f(1.0 / mu, 3) + ")";
    res.report = json{{"mu", mu},
                      {"rho", pair.rho},
                      {"fit", detail::fit_to_json(check.fit)},
                      {"profile", detail::profile_to_json(prof)},
                      {"threshold", slope_min},
                      {"window_monotone", !inconclusive}};
    res.files.push_back({"profile.csv", detail::profile_csv(prof)});
    res.files.push_back({"plot.svg", detail::rate_plot("localization gap (mu=" + format_g(mu, 3) +
                                                       ")", prof, check.fit)});
    return res;
}

// ---------------------------------------------------------------------------
// bracket-audit: tangent-ball brackets must contain the numerical solution.

inline JobResult run_bracket_audit(const TomlTable& t, std::uint64_t seed) {
    JobResult res;
    res.kind = "bracket-audit";
    double h = toml_number(t, "h", 1.0 / 64);
    int n_points = int(toml_number(t, "points", 1000));
    double slack = toml_number(t, "slack", 10 * h * h);

    struct Case {
        DomainPtr dom;
        ModelExpansion model;
        std::string label;
    };
    std::vector<Case> cases;
    {
        auto d1 = std::make_shared<const geometry::DomainSpec>(geometry::disk(1.0));
        cases.push_back({d1, closedform::ball_solution(1.0), "disk"});
        auto d2 = std::make_shared<const geometry::DomainSpec>(geometry::sector(0.5, 1.0));
        cases.push_back({d2, sector_reference(d2, 0.5, 1.0), "sector"});
        auto d3 =
            std::make_shared<const geometry::DomainSpec>(geometry::curved_corner(0.5, 0.3, 1.0));
        cases.push_back({d3, curved_corner_reference(d3, 0.5, 0.3, 1.0), "curved_corner"});
    }
    int violations = 0, total = 0, fallbacks = 0;
    double worst_margin = 1e300;
    std::string csv = "domain,x,y,d,lower,u_num,upper,fallback\n";
    Rng rng(derive_seed(seed, "bracket"));
    for (auto& c : cases) {
        auto sol = detail::solve_matched(c.dom, c.model, h);
        int want = n_points / int(cases.size());
        int got = 0;
        for (int tries = 0; tries < want * 300 && got < want; ++tries) {
            Point2 p{rng.uniform(c.dom->bbox_min().x, c.dom->bbox_max().x),
                     rng.uniform(c.dom->bbox_min().y, c.dom->bbox_max().y)};
            if (!c.dom->inside(p) || !sol.in_trust(p)) continue;
            auto br = asymptotics::bracket_point(*c.dom, p);
            double u = sol.evaluate(p);
            double m = std::min(u - (br.lower - slack), (br.upper + slack) - u);
            worst_margin = std::min(worst_margin, m);
            if (m < 0) ++violations;
            if (br.cone_fallback) ++fallbacks;
            csv += c.label + "," + format_g(p.x) + "," + format_g(p.y) + "," +
                   format_g(c.dom->project(p).d) + "," + format_g(br.lower) + "," + format_g(u) +
                   "," + format_g(br.upper) + "," + (br.cone_fallback ? "1" : "0") + "\n";
            ++got;
            ++total;
        }
    }
    bool pass = violations == 0 && total >= n_points * 9 / 10;
    res.verdict = pass ? "pass" : "fail";
    res.summary = std::to_string(violations) + " violations over " + std::to_string(total) +
                  " points (slack " + format_g(slack, 3) + ", worst margin " +
                  format_g(worst_margin, 3) + ", " + std::to_string(fallbacks) + " cone fallbacks)";
    res.report = json{{"violations", violations},
                      {"points", total},
                      {"slack", slack},
                      {"worst_margin", worst_margin},
                      {"cone_fallbacks", fallbacks}};
    res.files.push_back({"points.csv", csv});
    return res;
}

// ---------------------------------------------------------------------------
// supersub-audit: barrier sign checks on the cone.

inline JobResult run_supersub_audit(const TomlTable& t, std::uint64_t seed) {
    JobResult res;
    res.kind = "supersub-audit";
    std::vector<double> mus = toml_numbers(t, "mu", {0.3, 0.9, 1.5});
    std::vector<double> As = toml_numbers(t, "A", {0.5, 2.0});
    int n = int(toml_number(t, "points", 10000));

    json rows = json::array();
    std::string csv = "mu,A,samples,violations_super,violations_sub,worst_super,worst_sub,widened\n";
    bool pass = true;
    for (double mu : mus)
        for (double A : As) {
            auto rep = asymptotics::super_sub_check(mu, A, n, derive_seed(seed, "ss"));
            pass &= rep.pass();
            rows.push_back({{"mu", mu},
                            {"A", A},
                            {"samples", rep.samples},
                            {"violations_super", rep.violations_super},
                            {"violations_sub", rep.violations_sub},
                            {"worst_super", rep.worst_super},
                            {"worst_sub", rep.worst_sub},
                            {"widened_tol", rep.widened_tol}});
            csv += format_g(mu) + "," + format_g(A) + "," + std::to_string(rep.samples) + "," +
                   std::to_string(rep.violations_super) + "," + std::to_string(rep.violations_sub) +
                   "," + format_g(rep.worst_super) + "," + format_g(rep.worst_sub) + "," +
                   std::to_string(rep.widened_tol) + "\n";
        }
    res.verdict = pass ? "pass" : "fail";
    res.summary = pass ? "all sign checks passed" : "sign violations detected";
    res.report = json{{"cases", rows}};
    res.files.push_back({"table.csv", csv});
    return res;
}

// ---------------------------------------------------------------------------
// kahler-product: two-disk product potential (k = n = 2).

inline JobResult run_kahler_product(const TomlTable& t, std::uint64_t seed) {
    JobResult res;
    res.kind = "kahler-product";
    int n = int(toml_number(t, "n", 2));
    int points = int(toml_number(t, "points", 1000));
    double residual_tol = toml_number(t, "residual_tol", 1e-6);

    kahler::ProductDomainSpec spec;
    spec.n = n;
    double s = std::sqrt((n + 1) / 8.0);
    for (int i = 0; i < n; ++i) {
        auto dom = std::make_shared<const geometry::DomainSpec>(geometry::disk(1.0));
        spec.factors.push_back(kahler::factor_from_liouville(
            closedform::ball_solution(s).as_field(), n, dom, "closed-form disk"));
    }
    auto u = kahler::compose_product(spec);

    // Center value oracle via the residual-checked scaling chain:
    // u_i(0) = (2/(n+1)) (log(2/s) - log 4), s = sqrt((n+1)/8).
    double center_oracle = n * (2.0 / (n + 1)) * (std::log(2.0 / s) - std::log(4.0));
    double center = u(kahler::ProductPoint(n, Point2{0, 0}));

    Rng rng(derive_seed(seed, "kahler"));
    double worst = 0;
    int got = 0;
    for (int tries = 0; tries < points * 200 && got < points; ++tries) {
        kahler::ProductPoint z;
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            Point2 p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            if (p.norm() > 0.7) {
                ok = false;
                break;
            }
            z.push_back(p);
        }
        if (!ok) continue;
        worst = std::max(worst, std::abs(kahler::monge_ampere_residual(spec, z, 1e-3)));
        ++got;
    }
    auto bound = kahler::product_bound_check(spec, int(toml_number(t, "bound_samples", 300)), 4,
                                             0.16, derive_seed(seed, "kbound"));

    bool pass = worst < residual_tol && std::abs(center - center_oracle) < 1e-4 && bound.stable;
    res.verdict = pass ? "pass" : "fail";
    res.summary = "MA residual " + format_g(worst, 3) + (worst < residual_tol ? " < " : " >= ") +
                  format_g(residual_tol, 3) + "; center " + format_f(center, 6) + " (oracle " +
                  format_f(center_oracle, 6) + "); bound " + (bound.stable ? "stable" : "UNSTABLE");
    json sups = json::array();
    std::string csv = "level_floor,sup\n";
    for (std::size_t l = 0; l < bound.level_sup.size(); ++l) {
        sups.push_back({{"floor", bound.level_floor[l]}, {"sup", bound.level_sup[l]}});
        csv += format_g(bound.level_floor[l]) + "," + format_g(bound.level_sup[l]) + "\n";
    }
    res.report = json{{"n", n},
                      {"ma_residual_max", worst},
                      {"residual_tol", residual_tol},
                      {"center", center},
                      {"center_oracle", center_oracle},
                      {"bound_levels", sups},
                      {"bound_stable", bound.stable},
                      {"c2_term_present", bound.c2_term_present}};
    res.files.push_back({"bound_levels.csv", csv});
    return res;
}

// ---------------------------------------------------------------------------
// convergence-study: grid ladder against a model or fine reference.

inline JobResult run_convergence_study(const TomlTable& t, std::uint64_t) {
    JobResult res;
    res.kind = "convergence-study";
    std::string dkind = toml_string(t, "domain", "disk");
    std::map<std::string, double> params;
    for (const char* key : {"r", "R", "mu", "amp", "alpha", "M", "a", "lobes", "x0", "y0"})
        if (t.count(key)) params[key] = t.at(key).as_number();
    auto doms = geometry::build_domain(dkind, params);
    auto dom = std::make_shared<const geometry::DomainSpec>(std::move(doms.front()));

    ModelExpansion model;
    if (dkind == "disk") {
        model = closedform::ball_solution(params.count("r") ? params["r"] : 1.0);
    } else if (dkind == "sector") {
        model = sector_reference(dom, params["mu"], params.count("R") ? params["R"] : 1.0);
    } else if (dkind == "curved_corner") {
        model = curved_corner_reference(dom, params["mu"],
                                        params.count("amp") ? params["amp"] : 0.3,
                                        params.count("R") ? params["R"] : 1.0);
    } else {
        model = closedform::smooth_model(dom);
    }
    std::vector<double> hs = toml_numbers(t, "h", {1.0 / 32, 1.0 / 64, 1.0 / 128});
    solver::SolverConfig cfg;
    cfg.boundary = solver::MatchedMode{model};
    bool exact_ref = dkind == "disk";
    double order_lo = toml_number(t, "order_lo", 0);
    double order_hi = toml_number(t, "order_hi", 0);

    json rows = json::array();
    std::string csv = "h,err_fixed,err_trust,order,nodes\n";
    std::vector<solver::StudyRow> table;
    if (exact_ref) {
        table = solver::convergence_study(dom, model, hs, cfg);
    } else {
        // self-convergence against the finest grid in the list
        double h_ref = *std::min_element(hs.begin(), hs.end());
        cfg.h = h_ref;
        auto ref = solver::solve_blowup(dom, cfg);
        double hmax = *std::max_element(hs.begin(), hs.end());
        double d_fixed = 10 * hmax;
        double prev_e = 0, prev_h = 0;
        for (double h : hs) {
            if (h == h_ref) continue;
            cfg.h = h;
            auto sol = solver::solve_blowup(dom, cfg);
            const auto& g = *sol.grid;
            solver::StudyRow row;
            row.h = h;
            row.nodes = g.interior_count();
            for (std::size_t id = 0; id < g.status.size(); ++id) {
                if (g.status[id] == solver::Grid::Status::Exterior) continue;
                if (g.dist[id] < d_fixed) continue;
                int i = int(id) % g.nx, j = int(id) / g.nx;
                Point2 p = g.point(i, j);
                if (!ref.in_trust(p)) continue;
                double e = std::abs(sol.u[id] - ref.evaluate(p));
                row.err_fixed = std::max(row.err_fixed, e);
                row.err_trust = row.err_fixed;
            }
            if (prev_h > 0)
                row.order = std::log2(prev_e / row.err_fixed) / std::log2(prev_h / h);
            prev_e = row.err_fixed;
            prev_h = h;
            table.push_back(row);
        }
    }
    PlotSeries pts;
    pts.label = "max error";
    bool orders_ok = true;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table[i];
        rows.push_back({{"h", r.h}, {"err_fixed", r.err_fixed}, {"err_trust", r.err_trust},
                        {"order", r.order}, {"nodes", r.nodes}});
        csv += format_g(r.h) + "," + format_g(r.err_fixed) + "," + format_g(r.err_trust) + "," +
               format_g(r.order) + "," + std::to_string(r.nodes) + "\n";
        pts.points.push_back({r.h, r.err_fixed});
        if (i > 0 && order_hi > 0) orders_ok &= (r.order >= order_lo && r.order <= order_hi);
    }
    bool binding = order_hi > 0;
    res.binding = binding;
    res.verdict = binding ? (orders_ok ? "pass" : "fail") : "info";
    res.summary = "final order " + (table.size() > 1 ? format_f(table.back().order, 3)
                                                     : std::string("n/a")) +
                  ", finest error " + format_g(table.empty() ? 0 : table.back().err_fixed, 4);
    res.report = json{{"domain", dkind}, {"rows", rows}, {"reference", exact_ref ? "exact" : "fine-grid"}};
    res.files.push_back({"table.csv", csv});
    res.files.push_back({"plot.svg", loglog_svg("convergence: " + dkind, "h", "max error", {pts}, {})});
    return res;
}

// ---------------------------------------------------------------------------

inline JobResult run_experiment(const std::string& name, const TomlTable& t, std::uint64_t seed) {
    std::string kind = toml_string(t, "kind", "");
    std::uint64_t job_seed = derive_seed(seed, name);
    JobResult res;
    if (kind == "disk-validate") res = run_disk_validate(t, job_seed);
    else if (kind == "smooth-rate") res = run_smooth_rate(t, job_seed);
    else if (kind == "c1alpha-rate") res = run_c1alpha_rate(t, job_seed);
    else if (kind == "corner-rate") res = run_corner_rate(t, job_seed);
    else if (kind == "localization") res = run_localization(t, job_seed);
    else if (kind == "bracket-audit") res = run_bracket_audit(t, job_seed);
    else if (kind == "supersub-audit") res = run_supersub_audit(t, job_seed);
    else if (kind == "kahler-product") res = run_kahler_product(t, job_seed);
    else if (kind == "convergence-study") res = run_convergence_study(t, job_seed);
    else throw std::invalid_argument("unknown experiment kind '" + kind + "'");
    res.name = name;
    res.report["name"] = name;
    res.report["kind"] = res.kind;
    res.report["verdict"] = res.verdict;
    res.report["binding"] = res.binding;
    res.report["summary"] = res.summary;
    return res;
}

// Kinds must validate before any job runs (config errors exit 2).
inline void validate_experiment(const TomlTable& t) {
    static const char* kinds[] = {"disk-validate",  "smooth-rate",    "c1alpha-rate",
                                  "corner-rate",    "localization",   "bracket-audit",
                                  "supersub-audit", "kahler-product", "convergence-study"};
    std::string kind = toml_string(t, "kind", "");
    for (const char* k : kinds)
        if (kind == k) return;
    throw std::invalid_argument("unknown experiment kind '" + kind + "'");
}

}  // namespace liouville::run
