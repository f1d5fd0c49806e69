#pragma once

// JSON round trip for domain specs.
//
// Schema:
//   {
//     "name":    "sector mu=0.5 R=1",
//     "loops":   [ [ {"type": "line", "params": [ax, ay, bx, by]}, ... ] ],
//     "corners": [start {"vertex": [x, y], "mu": m, "segments": [i, j],
//                  "chart_radius": r} ]
//   }
//
// Segment types and their params:
//   line    ax ay bx by              straight segment a -> b
//   arc     cx cy r t0 t1            circle arc, angles in radians
//   qseg    which mu amp R           curved-corner piece (image of the sector
//                                    under z + amp z^2); which = 1 arm, 2 arc, 3 arm
//   pgarm   which alpha M R mu       C^{1,alpha} power-graph arm
//   blob    R a lobes                star-shaped loop r = R(1 + a cos(lobes t))
//   wavyarc mu R amp lobes           wavy sector closure (localized pairs)

#include <sstream>
#include <vector>

#include "json.hpp"
#include "liouville/geometry/build.hpp"

namespace liouville::geometry {

inline nlohmann::json segment_to_json(const CurveSegment& seg) {
    if (seg.descriptor().empty())
        throw std::invalid_argument("segment_to_json: segment has no descriptor (custom curve)");
    std::istringstream in(seg.descriptor());
    std::string type;
    in >> type;
    std::vector<double> params;
    double v;
    while (in >> v) params.push_back(v);
    return nlohmann::json{{"type", type}, {"params", params}};
}

inline CurveSegment segment_from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    std::vector<double> p = j.at("params").get<std::vector<double>>();
    auto need = [&](std::size_t n) {
        if (p.size() != n)
            throw std::invalid_argument("segment_from_json: '" + type + "' expects " +
                                        std::to_string(n) + " params");
    };
    if (type == "line") { need(4); return line_segment({p[0], p[1]}, {p[2], p[3]}); }
    if (type == "arc") { need(5); return circle_arc({p[0], p[1]}, p[2], p[3], p[4]); }
    if (type == "qseg") { need(4); return quadratic_corner_segment(int(p[0]), p[1], p[2], p[3]); }
    if (type == "pgarm") { need(5); return power_graph_arm(int(p[0]), p[1], p[2], p[3], p[4]); }
    if (type == "blob") { need(3); return blob_segment(p[0], p[1], int(p[2])); }
    if (type == "wavyarc") { need(4); return wavy_arc_segment(p[0], p[1], p[2], int(p[3])); }
    throw std::invalid_argument("segment_from_json: unknown type '" + type + "'");
}

inline nlohmann::json to_json(const DomainSpec& d) {
    nlohmann::json loop = nlohmann::json::array();
    for (const auto& s : d.segments()) loop.push_back(segment_to_json(s));
    nlohmann::json corners = nlohmann::json::array();
    for (const auto& c : d.corners())
        corners.push_back({{"vertex", {c.vertex.x, c.vertex.y}},
                           {"mu", c.mu},
                           {"segments", {c.segment1, c.segment2}},
                           {"chart_radius", c.chart_radius}});
    return nlohmann::json{{"name", d.name()},
                          {"loops", nlohmann::json::array({loop})},
                          {"corners", corners}};
}

inline DomainSpec domain_from_json(const nlohmann::json& j) {
    const auto& loops = j.at("loops");
    if (!loops.is_array() || loops.size() != 1)
        throw std::invalid_argument("domain_from_json: exactly one boundary loop is supported");
    std::vector<CurveSegment> segs;
    for (const auto& js : loops[0]) segs.push_back(segment_from_json(js));
    std::vector<CornerSpec> corners;
    for (const auto& jc : j.value("corners", nlohmann::json::array())) {
        CornerSpec c;
        c.vertex = {jc.at("vertex")[0].get<double>(), jc.at("vertex")[1].get<double>()};
        c.mu = jc.at("mu").get<double>();
        c.segment1 = jc.at("segments")[0].get<int>();
        c.segment2 = jc.at("segments")[1].get<int>();
        c.chart_radius = jc.value("chart_radius", 0.0);
        corners.push_back(c);
    }
    return DomainSpec::create(std::move(segs), std::move(corners),
                              j.value("name", std::string{}));
}

}  // namespace liouville::geometry
