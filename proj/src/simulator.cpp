#include "gpintent/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gpintent/error.hpp"

namespace gpintent {

namespace {

constexpr double kPlaneEps = 1e-9;
constexpr double kTimeEps = 1e-12;

} // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("tick length must be positive");
    if (!(v_free > v_interior && v_interior > 0.0)) throw InvalidArgument("speeds must satisfy V_m > V_r > 0");
    if (!(timeout >= 0.0)) throw InvalidArgument("timeout must be >= 0");
    strategy.validate();
}

// ---- trajectories ----------------------------------------------------------

double RobotTrajectory::duration() const {
    double d = 0.0;
    for (const auto& s : segments) d += s.duration();
    return d;
}

double RobotTrajectory::length() const {
    double d = 0.0;
    for (const auto& s : segments) d += s.length();
    return d;
}

Vec3 RobotTrajectory::position_at(double elapsed) const {
    for (const auto& s : segments) {
        const double T = s.duration();
        if (elapsed < T) return s.from + (s.to - s.from) * (elapsed / T);
        elapsed -= T;
    }
    return segments.back().to;
}

double RobotTrajectory::distance_at(double elapsed) const {
    double d = 0.0;
    for (const auto& s : segments) {
        const double T = s.duration();
        if (elapsed < T) return d + s.speed * elapsed;
        d += s.length();
        elapsed -= T;
    }
    return d;
}

double RobotTrajectory::speed_at(double elapsed) const {
    for (const auto& s : segments) {
        const double T = s.duration();
        if (elapsed < T) return s.speed;
        elapsed -= T;
    }
    return 0.0;
}

RobotTrajectory build_trajectory(int a, int b, const SceneConfig& scene, const SimConfig& cfg) {
    if (a == b) throw InvalidArgument(fmt::format("trajectory from point {} to itself", a));
    const Vec3& pa = scene.position(a);
    const Vec3& pb = scene.position(b);
    RobotTrajectory tr;
    tr.from_id = a;
    tr.to_id = b;
    const double da = scene.plane.signed_distance(pa);
    const double db = scene.plane.signed_distance(pb);
    std::vector<Vec3> pts{pa};
    if ((da < -kPlaneEps && db > kPlaneEps) || (da > kPlaneEps && db < -kPlaneEps))
        pts.push_back(pa + (pb - pa) * (da / (da - db)));
    pts.push_back(pb);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const bool free = scene.plane.signed_distance(pts[i]) >= -kPlaneEps &&
                          scene.plane.signed_distance(pts[i + 1]) >= -kPlaneEps;
        if ((pts[i + 1] - pts[i]).norm() > 0.0)
            tr.segments.push_back({pts[i], pts[i + 1], free ? cfg.v_free : cfg.v_interior});
    }
    if (tr.segments.empty()) tr.segments.push_back({pa, pb, cfg.v_interior});
    return tr;
}

// ---- robot -----------------------------------------------------------------

RobotState RobotState::idle_at(int id, const SceneConfig& scene) {
    RobotState r;
    r.position = scene.position(id);
    r.at_id = id;
    return r;
}

RobotState robot_step(const RobotState& robot, const Decision& decision, const SceneConfig& scene,
                      const SimConfig& cfg) {
    RobotState next = robot;
    next.arrived.reset();
    if (next.current) {
        next.pending = decision.target;
    } else if (decision.target != next.at_id) {
        next.current = build_trajectory(next.at_id, decision.target, scene, cfg);
        next.elapsed = 0.0;
        next.pending.reset();
    }
    if (!next.current) {
        next.phase = RobotPhase::Idle;
        return next;
    }
    const RobotTrajectory& tr = *next.current;
    const double before = tr.distance_at(next.elapsed);
    next.elapsed += cfg.dt;
    if (next.elapsed >= tr.duration() - kTimeEps) {
        next.travelled += tr.length() - before;
        next.at_id = tr.to_id;
        next.position = scene.position(tr.to_id);
        next.arrived = tr.to_id;
        next.phase = RobotPhase::Arrived;
        next.current.reset();
        next.elapsed = 0.0;
        if (next.pending && *next.pending != next.at_id) {
            next.current = build_trajectory(next.at_id, *next.pending, scene, cfg);
        }
        next.pending.reset();
    } else {
        next.travelled += tr.distance_at(next.elapsed) - before;
        next.position = tr.position_at(next.elapsed);
        next.phase = RobotPhase::Moving;
    }
    return next;
}

// ---- run -------------------------------------------------------------------

RunResult run(const TrajectoryRecord& rec, StrategyKind kind, const SceneConfig& scene, const SimConfig& cfg) {
    cfg.validate();
    if (rec.samples.empty()) throw InvalidArgument("empty trajectory");
    if (!scene.has_point(rec.start_id) || !scene.has_point(rec.end_id))
        throw InvalidArgument("trajectory start/end points are not in the scene");

    StrategyState state(kind, cfg.strategy, cfg.predictor);
    RobotState robot = RobotState::idle_at(rec.start_id, scene);
    RunResult out;
    out.log.strategy = kind;
    out.log.start_id = rec.start_id;
    out.log.end_id = rec.end_id;

    const auto tick = [&](const TimedSample& s) {
        const Decision d = state.step(s, scene);
        const Vec3 before = robot.position;
        robot = robot_step(robot, d, scene, cfg);
        RunLogRow row;
        row.t = s.t;
        row.decision = d;
        row.hand = s.position;
        row.predicted = state.last_prediction();
        row.robot = robot.position;
        row.phase = robot.phase;
        row.robot_at = robot.at_id;
        if (robot.current) row.robot_to = robot.current->to_id;
        row.arrived = robot.arrived;
        row.robot_speed = (robot.position - before).norm() / cfg.dt;
        row.d_h = distance_to_sphere(robot.position, scene.human);
        out.log.rows.push_back(row);
    };

    for (const auto& s : rec.samples) tick(s);
    out.log.stream_ticks = rec.samples.size();

    TimedSample frozen = rec.samples.back();
    frozen.velocity.setZero();
    const auto extra = static_cast<long>(std::ceil(cfg.timeout / cfg.dt));
    const double t_end = frozen.t;
    for (long k = 1; k <= extra; ++k) {
        if (!robot.current && robot.at_id == rec.end_id) break;
        frozen.t = t_end + static_cast<double>(k) * cfg.dt;
        tick(frozen);
    }
    out.metrics = compute_metrics(out.log, rec.end_id, scene, cfg.first_detection);
    return out;
}

// ---- metrics ---------------------------------------------------------------

RunMetrics compute_metrics(const RunLog& log, int true_end, const SceneConfig& scene, bool first_detection) {
    if (log.rows.empty()) throw InvalidArgument("empty run log");
    const auto& rows = log.rows;
    const double t0 = rows.front().t;
    const double span = rows.back().t - t0 + (rows.size() > 1 ? (rows.back().t - rows.front().t) /
                                                                    static_cast<double>(rows.size() - 1)
                                                              : 0.0);
    RunMetrics m;

    if (first_detection) {
        for (const auto& r : rows)
            if (r.decision.target == true_end) {
                m.detected = true;
                m.t_detect = r.t - t0;
                break;
            }
    } else if (rows.back().decision.target == true_end) {
        std::size_t i = rows.size() - 1;
        while (i > 0 && rows[i - 1].decision.target == true_end) --i;
        m.detected = true;
        m.t_detect = rows[i].t - t0;
    }
    if (!m.detected) m.t_detect = span;

    for (const auto& r : rows)
        if ((r.arrived && *r.arrived == true_end) || (r.phase == RobotPhase::Idle && r.robot_at == true_end)) {
            m.reached = true;
            m.t_reach = r.t - t0;
            break;
        }
    if (!m.reached) m.t_reach = span;

    Vec3 prev = log.start_id != 0 && scene.has_point(log.start_id) ? scene.position(log.start_id) : rows.front().robot;
    std::set<int> sp_d, sp_r;
    double dh = 0.0;
    for (const auto& r : rows) {
        m.d_robot += (r.robot - prev).norm();
        prev = r.robot;
        if (scene.is_safe_point(r.decision.target)) sp_d.insert(r.decision.target);
        if (r.arrived && scene.is_safe_point(*r.arrived)) sp_r.insert(*r.arrived);
        dh += r.d_h;
    }
    m.sp_detected = static_cast<int>(sp_d.size());
    m.sp_reached = static_cast<int>(sp_r.size());
    m.d_human = dh / static_cast<double>(rows.size());
    return m;
}

// ---- output ----------------------------------------------------------------

std::string robot_state_label(const RunLogRow& row) {
    switch (row.phase) {
    case RobotPhase::Idle: return fmt::format("idle@{}", row.robot_at);
    case RobotPhase::Moving: return fmt::format("moving@{}>{}", row.robot_at, row.robot_to.value_or(0));
    case RobotPhase::Arrived:
        return row.robot_to ? fmt::format("arrived@{}>{}", row.robot_at, *row.robot_to)
                            : fmt::format("arrived@{}", row.robot_at);
    }
    return "?";
}

void write_run_log(std::ostream& os, const RunLog& log) {
    os << kRunLogHeader << '\n';
    for (const auto& r : log.rows)
        fmt::print(os, "{:.17g},{},{},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", r.t, r.decision.target,
                   to_string(r.decision.source), r.robot.x(), r.robot.y(), r.robot.z(), robot_state_label(r), r.d_h);
}

void write_metrics_row(std::ostream& os, const std::string& trajectory_id, StrategyKind k, const RunMetrics& m) {
    fmt::print(os, "{},{},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{},{}\n", trajectory_id, to_string(k), m.t_detect,
               m.t_reach, m.d_robot, m.sp_detected, m.sp_reached, m.d_human, m.detected ? 1 : 0, m.reached ? 1 : 0);
}

// ---- invariants ------------------------------------------------------------

std::optional<std::string> check_run_invariants(const RunResult& r, const SceneConfig& scene, const SimConfig& cfg) {
    const auto& rows = r.log.rows;
    if (rows.empty()) return "empty log";
    const auto interior = [&](const Vec3& p) { return scene.plane.signed_distance(p) < -kPlaneEps; };
    const double tol = 1e-9;

    // Speed law, per tick: a tick that starts and ends strictly inside moves at V_r at most.
    Vec3 prev = scene.position(r.log.start_id);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double v = (rows[i].robot - prev).norm() / cfg.dt;
        if (v > cfg.v_free + tol) return fmt::format("tick {}: speed {} exceeds V_m", i, v);
        if (interior(prev) && interior(rows[i].robot) && v > cfg.v_interior + tol)
            return fmt::format("tick {}: interior speed {} exceeds V_r", i, v);
        prev = rows[i].robot;
    }

    // Distance accounting against completed legs plus the partial last leg.
    double legs = 0.0;
    int at = r.log.start_id;
    for (const auto& row : rows)
        if (row.arrived) {
            legs += (scene.position(*row.arrived) - scene.position(at)).norm();
            at = *row.arrived;
        }
    legs += (rows.back().robot - scene.position(at)).norm();
    if (std::abs(legs - r.metrics.d_robot) > tol) return fmt::format("D_r {} != legs {}", r.metrics.d_robot, legs);

    // Non-preemption: a destination only changes on arrival or from rest, and
    // the endpoints reached form a subsequence of the decisions.
    std::optional<int> dest;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const bool was_idle = i == 0 || rows[i - 1].phase != RobotPhase::Moving;
        if (dest && row.robot_to != dest && !row.arrived && !was_idle)
            return fmt::format("tick {}: trajectory to {} abandoned", i, *dest);
        if (row.arrived && dest && *row.arrived != *dest)
            return fmt::format("tick {}: arrived at {} while heading to {}", i, *row.arrived, *dest);
        dest = row.robot_to;
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].arrived) continue;
        while (k <= i && rows[k].decision.target != *rows[i].arrived) ++k;
        if (k > i) return fmt::format("endpoint {} is not in the decision sequence", *rows[i].arrived);
        ++k;
    }

    const auto& m = r.metrics;
    if (m.sp_reached > m.sp_detected) return "SP_r > SP_d";
    if (m.d_human < 0 || m.t_detect < 0 || m.t_reach < 0 || m.d_robot < 0) return "negative metric";
    return std::nullopt;
}

} // namespace gpintent
