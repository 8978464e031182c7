#include "gpintent/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "gpintent/error.hpp"

namespace gpintent {

GazeRay GazeRay::toward(const Vec3& origin, const Vec3& dir) {
    const double n = dir.norm();
    if (!origin.allFinite() || !std::isfinite(n) || n == 0.0) throw InvalidArgument("gaze direction is degenerate");
    return {origin, dir / n};
}

void SceneConfig::validate() const {
    if (points.empty()) throw InvalidArgument("scene has no interaction points");
    std::set<int> ids;
    for (const auto& p : points) {
        if (p.id < 1 || p.id > 18) throw InvalidArgument(fmt::format("interaction point id {} outside [1,18]", p.id));
        if (!p.pos.allFinite()) throw InvalidArgument(fmt::format("interaction point {} is not finite", p.id));
        if (!ids.insert(p.id).second) throw InvalidArgument(fmt::format("duplicate point id {}", p.id));
    }
    if (std::abs(plane.normal.norm() - 1.0) > 1e-9) throw InvalidArgument("plane normal must be unit length");
    if (!plane.point.allFinite()) throw InvalidArgument("plane point is not finite");
    for (const auto& s : safe_points) {
        if (s.id < 20 || s.id > 24) throw InvalidArgument(fmt::format("safe point id {} outside [20,24]", s.id));
        if (!ids.insert(s.id).second) throw InvalidArgument(fmt::format("duplicate point id {}", s.id));
        if (!s.pos.allFinite()) throw InvalidArgument(fmt::format("safe point {} is not finite", s.id));
        if (std::abs(plane.signed_distance(s.pos)) > 1e-6)
            throw InvalidArgument(fmt::format("safe point {} is not on the partition plane", s.id));
    }
    if (!(human.radius > 0.0) || !std::isfinite(human.radius) || !human.center.allFinite())
        throw InvalidArgument("human sphere needs a finite center and a positive radius");
    if (!head.allFinite()) throw InvalidArgument("head position is not finite");
}

bool SceneConfig::is_safe_point(int id) const {
    return std::any_of(safe_points.begin(), safe_points.end(), [id](const SafePoint& s) { return s.id == id; });
}

bool SceneConfig::has_point(int id) const {
    return is_safe_point(id) ||
           std::any_of(points.begin(), points.end(), [id](const InteractionPoint& p) { return p.id == id; });
}

const Vec3& SceneConfig::position(int id) const {
    for (const auto& p : points)
        if (p.id == id) return p.pos;
    for (const auto& s : safe_points)
        if (s.id == id) return s.pos;
    throw InvalidArgument(fmt::format("unknown point id {}", id));
}

SceneConfig default_scene() {
    // Points come in small clusters (door panel, dashboard, console, roof)
    // with gaps of 0.4 m or more between clusters, so a reach between
    // clusters leaves every point's r-neighbourhood on the way.
    struct Cluster {
        Vec3 center;
        std::array<int, 3> ids;  // 0 = unused slot
    };
    const std::array<Cluster, 7> clusters{{
        {Vec3(0.45, 0.55, -0.25), {2, 18, 6}},   // left door
        {Vec3(0.60, -0.45, -0.30), {11, 14, 7}},  // right footwell
        {Vec3(1.00, -0.10, 0.10), {5, 8, 0}},    // dashboard centre
        {Vec3(0.95, 0.45, 0.15), {15, 1, 9}},    // dashboard left
        {Vec3(0.55, 0.05, 0.30), {12, 10, 13}},  // roof console
        {Vec3(0.80, -0.55, 0.20), {3, 4, 0}},    // dashboard right
        {Vec3(1.05, 0.10, -0.30), {17, 16, 0}},  // centre console
    }};
    const std::array<Vec3, 3> offset{Vec3(0.0, 0.07, 0.0), Vec3(0.0, -0.07, 0.0), Vec3(0.0, 0.0, 0.08)};

    SceneConfig s;
    for (const auto& c : clusters)
        for (std::size_t k = 0; k < 3; ++k)
            if (c.ids[k] != 0) s.points.push_back({c.ids[k], c.center + offset[k]});
    std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    s.plane = {Vec3(1.25, 0.0, 0.0), Vec3::UnitX()};
    for (int k = 0; k < 5; ++k) s.safe_points.push_back({20 + k, Vec3(1.25, 0.6 - 0.3 * k, 0.35)});
    s.human = {Vec3(-0.10, 0.0, -0.10), 0.30};
    s.head = Vec3(-0.10, 0.0, 0.45);
    return s;
}

namespace {

using nlohmann::json;

Vec3 read_xyz(const json& j, const char* a, const char* b, const char* c) {
    return {j.at(a).get<double>(), j.at(b).get<double>(), j.at(c).get<double>()};
}

} // namespace

SceneConfig parse_scene(const std::string& text) {
    SceneConfig s;
    try {
        const json j = json::parse(text);
        for (const auto& p : j.at("points")) s.points.push_back({p.at("id").get<int>(), read_xyz(p, "x", "y", "z")});
        for (const auto& p : j.at("safe_points"))
            s.safe_points.push_back({p.at("id").get<int>(), read_xyz(p, "x", "y", "z")});
        const json& pl = j.at("plane");
        s.plane = {read_xyz(pl, "px", "py", "pz"), read_xyz(pl, "nx", "ny", "nz")};
        const json& h = j.at("human");
        s.human = {read_xyz(h, "cx", "cy", "cz"), h.at("radius").get<double>()};
        if (j.contains("head")) {
            s.head = read_xyz(j.at("head"), "x", "y", "z");
        } else {
            s.head = s.human.center;
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(fmt::format("malformed scene: {}", e.what()));
    }
    s.validate();
    return s;
}

SceneConfig load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open scene file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

std::string scene_to_json(const SceneConfig& s) {
    json j;
    j["points"] = json::array();
    for (const auto& p : s.points) j["points"].push_back({{"id", p.id}, {"x", p.pos.x()}, {"y", p.pos.y()}, {"z", p.pos.z()}});
    j["safe_points"] = json::array();
    for (const auto& p : s.safe_points)
        j["safe_points"].push_back({{"id", p.id}, {"x", p.pos.x()}, {"y", p.pos.y()}, {"z", p.pos.z()}});
    j["plane"] = {{"px", s.plane.point.x()},  {"py", s.plane.point.y()},  {"pz", s.plane.point.z()},
                  {"nx", s.plane.normal.x()}, {"ny", s.plane.normal.y()}, {"nz", s.plane.normal.z()}};
    j["human"] = {{"cx", s.human.center.x()}, {"cy", s.human.center.y()}, {"cz", s.human.center.z()},
                  {"radius", s.human.radius}};
    j["head"] = {{"x", s.head.x()}, {"y", s.head.y()}, {"z", s.head.z()}};
    return j.dump(2);
}

namespace {

template <typename P>
const P& nearest_of(const Vec3& pos, std::span<const P> pts) {
    if (pts.empty()) throw InvalidArgument("nearest-point query over an empty set");
    const P* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        const double d = (p.pos - pos).squaredNorm();
        if (d < best_d || (d == best_d && p.id < best->id)) {
            best = &p;
            best_d = d;
        }
    }
    return *best;
}

} // namespace

const InteractionPoint& nearest_point(const Vec3& pos, std::span<const InteractionPoint> points) {
    return nearest_of(pos, points);
}

const SafePoint& nearest_safe_point(const Vec3& pos, std::span<const SafePoint> safe_points) {
    return nearest_of(pos, safe_points);
}

double gaze_score(const GazeRay& ray, const Vec3& p) {
    const Vec3 dir = ray.direction.normalized();
    const Vec3 rel = p - ray.origin;
    const double along = rel.dot(dir);
    if (!(along > 0.0)) throw BehindUser("point is not in front of the gaze origin");
    const double perp = (rel - along * dir).norm();
    return perp / along;
}

const InteractionPoint& gaze_select(const GazeRay& ray, std::span<const InteractionPoint> points) {
    const InteractionPoint* best = nullptr;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        double s;
        try {
            s = gaze_score(ray, p.pos);
        } catch (const BehindUser&) {
            continue;
        }
        if (best == nullptr || s < best_score || (s == best_score && p.id < best->id)) {
            best = &p;
            best_score = s;
        }
    }
    if (best == nullptr) throw NoCandidate("no interaction point in front of the user");
    return *best;
}

Region region_of(const Vec3& pos, const PartitionPlane& plane) {
    return plane.signed_distance(pos) > 0.0 ? Region::FreeSpace : Region::Interior;
}

double distance_to_sphere(const Vec3& pos, const HumanSphere& s) {
    return std::max(0.0, (pos - s.center).norm() - s.radius);
}

} // namespace gpintent
