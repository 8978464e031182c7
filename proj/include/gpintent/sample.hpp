#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpintent/scene.hpp"

namespace gpintent {

inline constexpr double kSampleRate = 34.0;
inline constexpr double kSamplePeriod = 1.0 / kSampleRate;

/// One tracker tick: hand position (m), velocity (m/s) and optional gaze.
struct TimedSample {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    std::optional<GazeRay> gaze;
};

/// Central differences of position (one-sided at the ends).
void fill_velocity_by_differences(std::span<TimedSample> samples);

} // namespace gpintent
