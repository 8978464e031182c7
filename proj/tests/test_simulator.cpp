#include <doctest.h>

#include <sstream>

#include "gpintent/error.hpp"
#include "gpintent/simulator.hpp"

using namespace gpintent;

namespace {

SceneConfig line_scene() {
    SceneConfig s;
    s.points = {{1, Vec3(0.5, 0, 0)}, {2, Vec3(1.0, 0, 0)}, {3, Vec3(1.5, 0, 0)}, {4, Vec3(2.3, 0, 0)}};
    s.safe_points = {{20, Vec3(1.25, 0.5, 0)}};
    s.plane = {Vec3(1.25, 0, 0), Vec3::UnitX()};
    s.human = {Vec3(-0.5, 0, 0), 0.3};
    return s;
}

Decision to(int id) { return {id, DecisionSource::RealHand, 0.0}; }

RunLogRow row(double t, int target, const Vec3& robot, RobotPhase ph, int at, std::optional<int> dest,
              std::optional<int> arrived, const SceneConfig& s) {
    RunLogRow r;
    r.t = t;
    r.decision = to(target);
    r.robot = robot;
    r.phase = ph;
    r.robot_at = at;
    r.robot_to = dest;
    r.arrived = arrived;
    r.d_h = distance_to_sphere(robot, s.human);
    return r;
}

TrajectoryRecord hold_at(const Vec3& p, int start, int end, int n) {
    TrajectoryRecord rec;
    rec.start_id = start;
    rec.end_id = end;
    for (int i = 0; i < n; ++i) {
        TimedSample smp;
        smp.t = i * kSamplePeriod;
        smp.position = p;
        rec.samples.push_back(smp);
    }
    return rec;
}

} // namespace

TEST_CASE("trajectory durations under velocity modulation") {
    const auto s = line_scene();
    const SimConfig cfg;
    const auto free = build_trajectory(3, 4, s, cfg);
    CHECK(free.length() == doctest::Approx(0.8));
    CHECK(free.duration() == doctest::Approx(2.0));
    const auto inside = build_trajectory(1, 2, s, cfg);
    CHECK(inside.duration() == doctest::Approx(2.0));
    const auto cross = build_trajectory(2, 3, s, cfg);
    REQUIRE(cross.segments.size() == 2);
    CHECK(cross.duration() == doctest::Approx(1.625));
    CHECK(cross.position_at(1.0).x() == doctest::Approx(1.25));
    CHECK(cross.speed_at(0.5) == cfg.v_interior);
    CHECK(cross.speed_at(1.2) == cfg.v_free);
    CHECK_THROWS_AS(build_trajectory(1, 99, s, cfg), InvalidArgument);
    CHECK_THROWS_AS(build_trajectory(1, 1, s, cfg), InvalidArgument);

    // between two on-plane safe points: free-space speed
    const auto d = default_scene();
    CHECK(build_trajectory(20, 21, d, cfg).segments.front().speed == cfg.v_free);
    CHECK(build_trajectory(5, 21, d, cfg).segments.front().speed == cfg.v_interior);
}

TEST_CASE("non-preemptive robot") {
    const auto s = default_scene();
    const SimConfig cfg;
    auto r = RobotState::idle_at(2, s);
    r = robot_step(r, to(12), s, cfg);
    REQUIRE(r.current);
    CHECK(r.current->to_id == 12);
    CHECK(r.phase == RobotPhase::Moving);
    for (int id : {6, 8, 9}) r = robot_step(r, to(id), s, cfg);
    CHECK(r.current->to_id == 12);
    CHECK(r.pending == 9);

    r.pending = 11;
    r.elapsed = r.current->duration() - 0.5 * cfg.dt;
    r = robot_step(r, to(11), s, cfg);
    CHECK(r.arrived == 12);
    REQUIRE(r.current);
    CHECK(r.current->from_id == 12);
    CHECK(r.current->to_id == 11);
    CHECK(r.position == s.position(12));

    auto idle = RobotState::idle_at(5, s);
    idle = robot_step(idle, to(5), s, cfg);
    CHECK(idle.phase == RobotPhase::Idle);
    CHECK(idle.travelled == 0.0);
}

TEST_CASE("metric definitions") {
    const auto s = default_scene();
    RunLog single;
    single.start_id = 11;
    single.rows.push_back(row(0.0, 11, s.position(11), RobotPhase::Idle, 11, {}, {}, s));
    const auto m0 = compute_metrics(single, 11, s);
    CHECK(m0.detected);
    CHECK(m0.t_detect == 0.0);
    CHECK(m0.reached);
    CHECK(m0.t_reach == 0.0);

    // 2 -> 24 -> 11 by hand, five ticks
    const Vec3 p2 = s.position(2), sp = s.position(24), p11 = s.position(11);
    const Vec3 mid1 = 0.5 * (p2 + sp), mid2 = 0.5 * (sp + p11);
    RunLog log;
    log.start_id = 2;
    const double dt = 0.5;
    log.rows = {
        row(0 * dt, 24, mid1, RobotPhase::Moving, 2, 24, {}, s),
        row(1 * dt, 11, sp, RobotPhase::Arrived, 24, 11, 24, s),
        row(2 * dt, 5, mid2, RobotPhase::Moving, 24, 11, {}, s),
        row(3 * dt, 11, p11, RobotPhase::Arrived, 11, {}, 11, s),
        row(4 * dt, 11, p11, RobotPhase::Idle, 11, {}, {}, s),
    };
    const auto m = compute_metrics(log, 11, s);
    CHECK(m.detected);
    CHECK(m.t_detect == doctest::Approx(1.5));
    CHECK(m.reached);
    CHECK(m.t_reach == doctest::Approx(1.5));
    CHECK(m.d_robot == doctest::Approx((sp - p2).norm() + (p11 - sp).norm()).epsilon(1e-12));
    CHECK(m.sp_detected == 1);
    CHECK(m.sp_reached == 1);
    const double dh = (distance_to_sphere(mid1, s.human) + distance_to_sphere(sp, s.human) +
                       distance_to_sphere(mid2, s.human) + 2 * distance_to_sphere(p11, s.human)) / 5;
    CHECK(m.d_human == doctest::Approx(dh).epsilon(1e-12));
    const auto first = compute_metrics(log, 11, s, true);
    CHECK(first.t_detect == doctest::Approx(0.5));

    RunLog never = log;
    for (auto& r : never.rows) r.decision.target = 5;
    const auto mn = compute_metrics(never, 3, s);
    CHECK_FALSE(mn.detected);
    CHECK_FALSE(mn.reached);
    CHECK(mn.t_detect == doctest::Approx(2.5));
    CHECK_THROWS_AS(compute_metrics(RunLog{}, 11, s), InvalidArgument);
}

TEST_CASE("stationary hand at the endpoint") {
    const auto s = default_scene();
    const SimConfig cfg;
    const auto r = run(hold_at(s.position(5), 2, 5, 10), StrategyKind::STA, s, cfg);
    CHECK(r.metrics.t_detect == 0.0);
    CHECK(r.metrics.detected);
    CHECK(r.metrics.reached);
    CHECK(r.metrics.d_robot == doctest::Approx((s.position(5) - s.position(2)).norm()).epsilon(1e-12));
    int legs = 0;
    for (const auto& row : r.log.rows) legs += row.arrived.has_value();
    CHECK(legs == 1);
    CHECK_FALSE(check_run_invariants(r, s, cfg).has_value());
    const double expect = build_trajectory(2, 5, s, cfg).duration();
    CHECK(r.metrics.t_reach >= expect - cfg.dt);
    CHECK(r.metrics.t_reach <= expect + cfg.dt);
}

TEST_CASE("threshold strategy routes a long reach through a safe point") {
    const auto s = default_scene();
    const auto rec = generate_record(s, {2, 11, DistanceClass::Long}, GenParams{}, 0);
    const auto r = run(rec, StrategyKind::STC, s, SimConfig{});
    bool safe_before_end = false;
    for (const auto& row : r.log.rows) {
        if (row.decision.target == 11) break;
        safe_before_end |= s.is_safe_point(row.decision.target);
    }
    CHECK(safe_before_end);
    CHECK(r.metrics.sp_detected >= 1);
}

TEST_CASE("runs are deterministic and keep their invariants") {
    const auto s = default_scene();
    const SimConfig cfg;
    const auto rec = generate_record(s, {3, 4, DistanceClass::Short}, GenParams{}, 5);
    std::ostringstream a, b;
    write_run_log(a, run(rec, StrategyKind::STD, s, cfg).log);
    write_run_log(b, run(rec, StrategyKind::STD, s, cfg).log);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind(std::string(kRunLogHeader), 0) == 0);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        GenParams gp;
        gp.seed = seed;
        for (const auto& r : gen_corpus(s, default_pairs(), gp))
            for (auto k : {StrategyKind::STA, StrategyKind::STC, StrategyKind::STE}) {
                const auto res = run(r, k, s, cfg);
                const auto bad = check_run_invariants(res, s, cfg);
                INFO(to_string(k), " seed ", seed, " ", r.start_id, "-", r.end_id, ": ", bad.value_or(""));
                REQUIRE_FALSE(bad.has_value());
            }
    }
}

TEST_CASE("metrics row format") {
    RunMetrics m;
    m.t_detect = 1.5;
    m.detected = true;
    std::ostringstream os;
    write_metrics_row(os, "2-11", StrategyKind::STB, m);
    CHECK(os.str() == "2-11,STB,1.5,0,0,0,0,0,1,0\n");
}
