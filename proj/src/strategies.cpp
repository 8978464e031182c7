#include "gpintent/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gpintent/error.hpp"

namespace gpintent {

std::string_view to_string(StrategyKind k) {
    switch (k) {
    case StrategyKind::STA: return "STA";
    case StrategyKind::STB: return "STB";
    case StrategyKind::STC: return "STC";
    case StrategyKind::STD: return "STD";
    case StrategyKind::STE: return "STE";
    case StrategyKind::STF: return "STF";
    }
    return "?";
}

StrategyKind parse_strategy(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (auto k : {StrategyKind::STA, StrategyKind::STB, StrategyKind::STC, StrategyKind::STD, StrategyKind::STE,
                   StrategyKind::STF})
        if (up == to_string(k)) return k;
    throw InvalidArgument(fmt::format("unknown strategy '{}'", name));
}

bool uses_gp(StrategyKind k) {
    return k == StrategyKind::STB || k == StrategyKind::STD || k == StrategyKind::STF;
}

bool uses_gaze(StrategyKind k) { return k == StrategyKind::STE || k == StrategyKind::STF; }

std::string_view to_string(DecisionSource s) {
    switch (s) {
    case DecisionSource::RealHand: return "real_hand";
    case DecisionSource::GpPrediction: return "gp_prediction";
    case DecisionSource::Gaze: return "gaze";
    case DecisionSource::SafePointFallback: return "safe_point";
    }
    return "?";
}

DecisionSource parse_source(std::string_view s) {
    for (auto v : {DecisionSource::RealHand, DecisionSource::GpPrediction, DecisionSource::Gaze,
                   DecisionSource::SafePointFallback})
        if (s == to_string(v)) return v;
    throw InvalidArgument(fmt::format("unknown decision source '{}'", s));
}

std::size_t StrategyParams::window_samples() const {
    return static_cast<std::size_t>(std::max(1L, std::lround(window_s * kSampleRate)));
}

Horizon StrategyParams::horizon() const { return Horizon::from_percent(horizon_pct, window_samples()); }

void StrategyParams::validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("hand threshold r must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
    if (!(window_s > 0.0) || !std::isfinite(window_s)) throw InvalidArgument("window must be positive");
    if (!(horizon_pct > 0.0 && horizon_pct <= 50.0)) throw InvalidArgument("horizon must lie in (0, 50] percent");
}

// ---- pure selection rules --------------------------------------------------

Decision sta_nn(const Vec3& hand, const SceneConfig& scene, double t) {
    return {nearest_point(hand, scene.points).id, DecisionSource::RealHand, t};
}

Decision stb_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted, const SceneConfig& scene, double t) {
    if (!predicted) return sta_nn(hand, scene, t);
    return {nearest_point(*predicted, scene.points).id, DecisionSource::GpPrediction, t};
}

Decision stc_safe_nn(const Vec3& hand, const SceneConfig& scene, const StrategyParams& p, double t) {
    const auto& nn = nearest_point(hand, scene.points);
    if ((nn.pos - hand).norm() < p.r) return {nn.id, DecisionSource::RealHand, t};
    const Vec3& ref = p.safe_from_nn_point ? nn.pos : hand;
    return {nearest_safe_point(ref, scene.safe_points).id, DecisionSource::SafePointFallback, t};
}

Decision std_safe_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted, const SceneConfig& scene,
                        const StrategyParams& p, double t) {
    if (!predicted) return stc_safe_nn(hand, scene, p, t);
    const auto& nn = nearest_point(hand, scene.points);
    const auto& gp = nearest_point(*predicted, scene.points);
    const double r1 = (hand - nn.pos).norm() * p.alpha;
    const double r2 = (*predicted - (p.r2_to_predicted_point ? gp.pos : nn.pos)).norm() * p.alpha;
    if (r1 < p.r) return {nn.id, DecisionSource::RealHand, t};
    if (r2 < p.r) return {gp.id, DecisionSource::GpPrediction, t};
    return {nearest_safe_point(gp.pos, scene.safe_points).id, DecisionSource::SafePointFallback, t};
}

namespace {

std::optional<InteractionPoint> gaze_candidate(const std::optional<GazeRay>& ray, const SceneConfig& scene) {
    if (!ray) return std::nullopt;
    try {
        return gaze_select(*ray, scene.points);
    } catch (const NoCandidate&) {
        return std::nullopt;
    }
}

} // namespace

Decision ste_gaze_safe_nn(const Vec3& hand, const std::optional<GazeRay>& ray, const SceneConfig& scene,
                          const StrategyParams& p, double t) {
    const auto gz = gaze_candidate(ray, scene);
    if (!gz) return stc_safe_nn(hand, scene, p, t);
    if ((hand - gz->pos).norm() * p.alpha < p.r) return {gz->id, DecisionSource::Gaze, t};
    return {nearest_safe_point(gz->pos, scene.safe_points).id, DecisionSource::SafePointFallback, t};
}

Decision stf_gaze_safe_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted,
                             const std::optional<GazeRay>& ray, const SceneConfig& scene, const StrategyParams& p,
                             double t) {
    if (!predicted) return ste_gaze_safe_nn(hand, ray, scene, p, t);
    const auto gz = gaze_candidate(ray, scene);
    if (!gz) return std_safe_gp_nn(hand, predicted, scene, p, t);
    if ((hand - gz->pos).norm() * p.alpha < p.r) return {gz->id, DecisionSource::Gaze, t};
    const auto& gp = nearest_point(*predicted, scene.points);
    if ((*predicted - gp.pos).norm() * p.alpha < p.r) return {gp.id, DecisionSource::GpPrediction, t};
    return {nearest_safe_point(gp.pos, scene.safe_points).id, DecisionSource::SafePointFallback, t};
}

// ---- per-stream state ------------------------------------------------------

StrategyState::StrategyState(StrategyKind kind, StrategyParams params, PredictorConfig predictor)
    : kind_(kind), params_(params) {
    params_.validate();
    if (uses_gp(kind)) predictor_.emplace(std::move(predictor), params_.window_samples(), params_.horizon());
}

Decision StrategyState::step(const TimedSample& s, const SceneConfig& scene) {
    if (last_t_ && !(s.t > *last_t_))
        throw OutOfOrder(fmt::format("sample at t={} does not follow t={}", s.t, *last_t_));
    if (uses_gaze(kind_) && !s.gaze) throw InvalidArgument("gaze strategy needs gaze on every sample");
    if (predictor_) {
        const auto pred = predictor_->push(s);
        last_pred_ = pred ? std::optional<Vec3>(pred->position) : std::nullopt;
    }
    last_t_ = s.t;
    switch (kind_) {
    case StrategyKind::STA: return sta_nn(s.position, scene, s.t);
    case StrategyKind::STB: return stb_gp_nn(s.position, last_pred_, scene, s.t);
    case StrategyKind::STC: return stc_safe_nn(s.position, scene, params_, s.t);
    case StrategyKind::STD: return std_safe_gp_nn(s.position, last_pred_, scene, params_, s.t);
    case StrategyKind::STE: return ste_gaze_safe_nn(s.position, s.gaze, scene, params_, s.t);
    case StrategyKind::STF: return stf_gaze_safe_gp_nn(s.position, last_pred_, s.gaze, scene, params_, s.t);
    }
    throw StateError("unreachable strategy kind");
}

Decision step(StrategyState& state, const TimedSample& s, const SceneConfig& scene) { return state.step(s, scene); }

void write_decision_row(std::ostream& os, StrategyKind k, const Decision& d, const Vec3& hand,
                        const std::optional<Vec3>& pred) {
    fmt::print(os, "{:.17g},{},{},{},{:.17g},{:.17g},{:.17g},", d.t, to_string(k), d.target, to_string(d.source),
               hand.x(), hand.y(), hand.z());
    if (pred)
        fmt::print(os, "{:.17g},{:.17g},{:.17g}\n", pred->x(), pred->y(), pred->z());
    else
        os << ",,\n";
}

} // namespace gpintent
