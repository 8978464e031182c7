#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gpintent {

using Vec3 = Eigen::Vector3d;

struct InteractionPoint {
    int id;
    Vec3 pos;
};

struct SafePoint {
    int id;
    Vec3 pos;
};

/// Interior (user workspace) is the closed negative half-space of `normal`.
struct PartitionPlane {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitX();

    double signed_distance(const Vec3& p) const { return (p - point).dot(normal); }
};

struct HumanSphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.3;
};

struct GazeRay {
    Vec3 origin;
    Vec3 direction;  // unit length

    /// Normalizes `dir`; throws InvalidArgument on a zero or non-finite vector.
    static GazeRay toward(const Vec3& origin, const Vec3& dir);
};

enum class Region { Interior, FreeSpace };

struct SceneConfig {
    std::vector<InteractionPoint> points;
    std::vector<SafePoint> safe_points;
    PartitionPlane plane;
    HumanSphere human;
    Vec3 head = Vec3::Zero();  // gaze origin used by the trajectory generator

    /// Throws InvalidArgument naming the first violated invariant.
    void validate() const;

    bool is_safe_point(int id) const;
    bool has_point(int id) const;
    /// Position of an interaction or safe point; throws InvalidArgument when unknown.
    const Vec3& position(int id) const;
};

/// Synthetic cockpit: 18 interaction points in seven clusters inside a
/// 1.2 m x 0.8 m x 0.6 m box, five safe points on the partition plane, the
/// seated user's sphere behind the nearest cluster.
SceneConfig default_scene();

SceneConfig load_scene(const std::filesystem::path& path);
SceneConfig parse_scene(const std::string& json_text);
std::string scene_to_json(const SceneConfig& scene);

/// Nearest point by Euclidean distance; ties go to the lowest id.
const InteractionPoint& nearest_point(const Vec3& pos, std::span<const InteractionPoint> points);
const SafePoint& nearest_safe_point(const Vec3& pos, std::span<const SafePoint> safe_points);

/// Ratio of perpendicular distance to along-ray distance (tangent of the
/// visual angle). Throws BehindUser when the projection is not in front.
double gaze_score(const GazeRay& ray, const Vec3& p);

/// Point with the smallest gaze score; ties to the lowest id. Throws
/// NoCandidate when every point is behind the user.
const InteractionPoint& gaze_select(const GazeRay& ray, std::span<const InteractionPoint> points);

/// On-plane positions count as Interior.
Region region_of(const Vec3& pos, const PartitionPlane& plane);

double distance_to_sphere(const Vec3& pos, const HumanSphere& s);

} // namespace gpintent
