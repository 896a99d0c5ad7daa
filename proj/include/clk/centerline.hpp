#pragma once

#include <optional>

#include <json.hpp>

#include "clk/common.hpp"

namespace clk {

/// One polyline of a centerline tree. Non-root segments start at `junction`,
/// which lies on the parent segment.
struct CenterlineSegment {
    int parent = -1;                    // segment id, -1 for segments rooted at the tree root
    std::optional<PointMM> junction;    // first point when attached to a parent
    std::vector<PointMM> points;        // ordered, physical mm
};

struct Centerline {
    PointMM root;
    std::vector<CenterlineSegment> segments;

    bool empty() const {
        for (const auto& s : segments)
            if (!s.points.empty()) return false;
        return true;
    }

    std::vector<PointMM> junction_points() const {
        std::vector<PointMM> out;
        for (const auto& s : segments)
            if (s.junction) out.push_back(*s.junction);
        return out;
    }
};

struct Endpoint {
    PointMM p;
    double confidence = 1.0;
};

/// Root point plus detected/annotated branch-terminal points.
struct EndpointSet {
    PointMM root;
    std::vector<Endpoint> endpoints;
    std::string source;  // "analytic" | "bfs" | "decoded"
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const PointMM& p) {
    return nlohmann::ordered_json::array({p.x, p.y, p.z});
}

inline PointMM point_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ClkError("expected [x,y,z] point");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::ordered_json to_json(const Centerline& cl) {
    nlohmann::ordered_json j;
    j["root"] = to_json(cl.root);
    j["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : cl.segments) {
        nlohmann::ordered_json js;
        js["parent"] = s.parent >= 0 ? nlohmann::ordered_json(s.parent) : nlohmann::ordered_json(nullptr);
        js["junction"] = s.junction ? to_json(*s.junction) : nlohmann::ordered_json(nullptr);
        auto pts = nlohmann::ordered_json::array();
        for (const auto& p : s.points) pts.push_back(to_json(p));
        js["points"] = std::move(pts);
        j["segments"].push_back(std::move(js));
    }
    return j;
}

inline Centerline centerline_from_json(const nlohmann::json& j) {
    Centerline cl;
    cl.root = point_from_json(j.at("root"));
    for (const auto& js : j.at("segments")) {
        CenterlineSegment s;
        s.parent = js.at("parent").is_null() ? -1 : js.at("parent").get<int>();
        if (!js.at("junction").is_null()) s.junction = point_from_json(js.at("junction"));
        for (const auto& p : js.at("points")) s.points.push_back(point_from_json(p));
        cl.segments.push_back(std::move(s));
    }
    return cl;
}

inline nlohmann::ordered_json to_json(const EndpointSet& eps) {
    nlohmann::ordered_json j;
    j["root"] = to_json(eps.root);
    j["endpoints"] = nlohmann::ordered_json::array();
    for (const auto& e : eps.endpoints) {
        nlohmann::ordered_json je;
        je["p"] = to_json(e.p);
        je["conf"] = e.confidence;
        j["endpoints"].push_back(std::move(je));
    }
    j["source"] = eps.source;
    return j;
}

inline EndpointSet endpoints_from_json(const nlohmann::json& j) {
    EndpointSet eps;
    eps.root = point_from_json(j.at("root"));
    for (const auto& je : j.at("endpoints"))
        eps.endpoints.push_back({point_from_json(je.at("p")), je.at("conf").get<double>()});
    eps.source = j.at("source").get<std::string>();
    return eps;
}

// ---------------------------------------------------------------------------
// Polyline helpers
// ---------------------------------------------------------------------------

inline double polyline_length(const std::vector<PointMM>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

/// Resamples a polyline at uniform arc-length steps; keeps both endpoints.
inline std::vector<PointMM> resample_polyline(const std::vector<PointMM>& pts, double step) {
    if (pts.size() <= 1) return pts;
    double total = polyline_length(pts);
    if (total == 0.0) return {pts.front()};
    int n = std::max(1, int(std::ceil(total / step)));
    std::vector<PointMM> out;
    out.reserve(n + 1);
    std::size_t seg = 0;
    double seg_start = 0.0;
    double seg_len = distance(pts[0], pts[1]);
    for (int k = 0; k <= n; ++k) {
        double s = total * double(k) / double(n);
        while (seg + 2 < pts.size() && seg_start + seg_len < s) {
            seg_start += seg_len;
            ++seg;
            seg_len = distance(pts[seg], pts[seg + 1]);
        }
        double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
        out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
    }
    return out;
}

/// All segment points of a centerline resampled at `step`, concatenated.
inline std::vector<PointMM> flatten_resampled(const Centerline& cl, double step) {
    std::vector<PointMM> out;
    for (const auto& s : cl.segments) {
        auto r = resample_polyline(s.points, step);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

}  // namespace clk
