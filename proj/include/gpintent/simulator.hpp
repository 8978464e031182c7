#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpintent/strategies.hpp"
#include "gpintent/trajectory.hpp"

namespace gpintent {

struct SimConfig {
    double dt = kSamplePeriod;
    double v_free = 0.4;       // V_m, m/s
    double v_interior = 0.25;  // V_r, m/s
    double timeout = 60.0;     // s of frozen-hand ticking after the stream ends
    /// T_d from the first tick naming the endpoint instead of the start of the
    /// final uninterrupted run of such ticks.
    bool first_detection = false;
    StrategyParams strategy;
    PredictorConfig predictor = PredictorConfig::for_algorithm(Algorithm::Egp);

    void validate() const;
};

struct RobotSegment {
    Vec3 from;
    Vec3 to;
    double speed = 0.0;

    double length() const { return (to - from).norm(); }
    double duration() const { return length() / speed; }
};

/// Straight path between two scene points, split where it crosses the
/// partition plane.
struct RobotTrajectory {
    int from_id = 0;
    int to_id = 0;
    std::vector<RobotSegment> segments;

    double duration() const;
    double length() const;
    Vec3 position_at(double elapsed) const;
    /// Path length covered after `elapsed` seconds.
    double distance_at(double elapsed) const;
    double speed_at(double elapsed) const;
};

/// A segment runs at V_m when neither endpoint is strictly inside the
/// workspace (signed distance >= -1e-9), else at V_r.
RobotTrajectory build_trajectory(int a, int b, const SceneConfig& scene, const SimConfig& cfg);

enum class RobotPhase { Idle, Moving, Arrived };

struct RobotState {
    Vec3 position = Vec3::Zero();
    int at_id = 0;  // resting point (Idle) or last endpoint reached
    std::optional<RobotTrajectory> current;
    double elapsed = 0.0;
    std::optional<int> pending;
    RobotPhase phase = RobotPhase::Idle;
    std::optional<int> arrived;  // endpoint reached during the latest step
    double travelled = 0.0;      // D_r so far

    static RobotState idle_at(int id, const SceneConfig& scene);
};

/// One tick: absorb the decision, then advance by cfg.dt. A running
/// trajectory is never abandoned; the latest decision made during it becomes
/// the next target, started on the tick of arrival.
RobotState robot_step(const RobotState& robot, const Decision& decision, const SceneConfig& scene,
                      const SimConfig& cfg);

struct RunLogRow {
    double t = 0.0;
    Decision decision;
    Vec3 hand = Vec3::Zero();
    std::optional<Vec3> predicted;
    Vec3 robot = Vec3::Zero();
    RobotPhase phase = RobotPhase::Idle;
    int robot_at = 0;                 // resting / arrival point
    std::optional<int> robot_to;      // destination while moving
    std::optional<int> arrived;       // arrival on this tick
    double robot_speed = 0.0;         // m/s over this tick
    double d_h = 0.0;
};

struct RunLog {
    StrategyKind strategy = StrategyKind::STA;
    int start_id = 0;
    int end_id = 0;
    std::vector<RunLogRow> rows;
    std::size_t stream_ticks = 0;  // rows driven by recorded samples
};

struct RunMetrics {
    double t_detect = 0.0;  // T_d (s); run length when undetected
    double t_reach = 0.0;   // T_r (s); run length when unreached
    double d_robot = 0.0;   // D_r (m)
    int sp_detected = 0;    // SP_d
    int sp_reached = 0;     // SP_r
    double d_human = 0.0;   // D_h (m)
    bool detected = false;
    bool reached = false;
};

/// Metrics of a finished run. Times are relative to the first row.
RunMetrics compute_metrics(const RunLog& log, int true_end, const SceneConfig& scene, bool first_detection = false);

struct RunResult {
    RunMetrics metrics;
    RunLog log;
};

/// Replays the stream against a strategy with the robot starting idle at the
/// record's start point, then keeps ticking with the hand frozen until the
/// robot rests at the true endpoint or cfg.timeout elapses.
RunResult run(const TrajectoryRecord& rec, StrategyKind kind, const SceneConfig& scene, const SimConfig& cfg);

std::string robot_state_label(const RunLogRow& row);

inline constexpr std::string_view kRunLogHeader =
    "t_s,decision_target,decision_source,robot_x_m,robot_y_m,robot_z_m,robot_state,d_h_m";
inline constexpr std::string_view kMetricsHeader =
    "trajectory_id,strategy,T_d_s,T_r_s,D_r_m,SP_d,SP_r,D_h_m,detected_flag,reached_flag";

void write_run_log(std::ostream& os, const RunLog& log);
void write_metrics_row(std::ostream& os, const std::string& trajectory_id, StrategyKind k, const RunMetrics& m);

/// Checks the speed law, distance accounting, non-preemption and metric
/// consistency of a finished run. Returns a description of the first
/// violation, or nothing.
std::optional<std::string> check_run_invariants(const RunResult& r, const SceneConfig& scene, const SimConfig& cfg);

} // namespace gpintent
