#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpintent/sample.hpp"
#include "gpintent/scene.hpp"

namespace gpintent {

enum class DistanceClass { Long, Medium, Short };
std::string_view to_string(DistanceClass c);
DistanceClass parse_distance_class(std::string_view s);

struct TrajectoryRecord {
    std::vector<TimedSample> samples;
    int start_id = 0;
    int end_id = 0;
    DistanceClass label = DistanceClass::Medium;
    std::uint64_t seed = 0;

    bool has_gaze() const;
};

struct PointPair {
    int start;
    int end;
    DistanceClass label;
};

/// The seven reach motions: two long, three medium, two short.
std::vector<PointPair> default_pairs();

struct GenParams {
    double long_duration = 3.5;
    double medium_duration = 2.5;
    double short_duration = 1.5;
    double idle_prefix = 5.0;  // hand resting on the start point before the reach
    double hold_suffix = 0.5;  // hand resting on the end point after the reach
    double noise_std = 0.003;  // position (m) and velocity (m/s)
    double gaze_lead = 0.4;  // gaze switches to the target this long before the hand moves
    std::uint64_t seed = 42;

    double duration(DistanceClass c) const;
    void validate() const;
};

struct KinematicSample {
    Vec3 position;
    Vec3 velocity;
};

/// Minimum-jerk point-to-point profile a + (b - a)(10 s^3 - 15 s^4 + 6 s^5),
/// s = t / T. Sampled at t = k / rate for k = 0..N with N = max(1, round(T * rate));
/// the duration is snapped to N / rate so both endpoints are hit exactly.
std::vector<KinematicSample> min_jerk(const Vec3& a, const Vec3& b, double duration, double rate = kSampleRate);

/// Closed-form state at time t (clamped to [0, T]).
KinematicSample min_jerk_at(const Vec3& a, const Vec3& b, double duration, double t);

/// Gaze from `head`: at `start` before motion_start - lead, at `target` from then on.
void synth_gaze(std::span<TimedSample> samples, const Vec3& head, const Vec3& start, const Vec3& target,
                double motion_start, double lead);

/// One minimum-jerk reach with idle prefix, hold suffix, sensor noise and gaze.
TrajectoryRecord generate_record(const SceneConfig& scene, const PointPair& pair, const GenParams& params,
                                 std::uint64_t stream);

/// One record per pair, each with its own deterministic noise stream.
std::vector<TrajectoryRecord> gen_corpus(const SceneConfig& scene, const std::vector<PointPair>& pairs,
                                         const GenParams& params);

/// Largest distance from the first/last positions to the named scene points.
double endpoint_error(const TrajectoryRecord& rec, const SceneConfig& scene);

inline constexpr std::string_view kTrajectoryHeader =
    "t_s,hand_x_m,hand_y_m,hand_z_m,hand_vx_mps,hand_vy_mps,hand_vz_mps,"
    "gaze_ox_m,gaze_oy_m,gaze_oz_m,gaze_dx,gaze_dy,gaze_dz";

void write_csv(std::ostream& os, const TrajectoryRecord& rec);
void write_csv(const std::filesystem::path& path, const TrajectoryRecord& rec);
/// Throws ParseError with the offending line number.
TrajectoryRecord read_csv(std::istream& is);
TrajectoryRecord read_csv(const std::filesystem::path& path);

struct MapeResult {
    double percent = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;  // |actual| <= exclude_below
};

/// 100/n * sum |pred - actual| / |actual| over entries with |actual| > exclude_below.
MapeResult mape(std::span<const double> pred, std::span<const double> actual, double exclude_below = 0.0);

double rmse(std::span<const double> pred, std::span<const double> actual);

} // namespace gpintent
