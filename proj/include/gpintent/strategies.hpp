#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "gpintent/predictor.hpp"
#include "gpintent/scene.hpp"

namespace gpintent {

enum class StrategyKind { STA, STB, STC, STD, STE, STF };
std::string_view to_string(StrategyKind k);
StrategyKind parse_strategy(std::string_view name);  // case-insensitive "STA".."STF"
bool uses_gp(StrategyKind k);
bool uses_gaze(StrategyKind k);

enum class DecisionSource { RealHand, GpPrediction, Gaze, SafePointFallback };
std::string_view to_string(DecisionSource s);
DecisionSource parse_source(std::string_view s);

struct StrategyParams {
    double r = 0.2;             // hand threshold (m)
    double alpha = 0.8;         // distance scaling
    double window_s = 2.0;      // predictor window (s)
    double horizon_pct = 15.0;  // look-ahead, % of the window
    /// Safe-point fallback of the threshold strategy: nearest to the hand
    /// (default) or nearest to the hand's nearest interaction point.
    bool safe_from_nn_point = false;
    /// Second threshold of the safe GP strategy: predicted hand to the real
    /// hand's nearest point (default) or to the predicted hand's nearest point.
    bool r2_to_predicted_point = false;

    std::size_t window_samples() const;
    Horizon horizon() const;
    void validate() const;
};

struct Decision {
    int target = 0;
    DecisionSource source = DecisionSource::RealHand;
    double t = 0.0;
};

/// Nearest interaction point to the hand.
Decision sta_nn(const Vec3& hand, const SceneConfig& scene, double t = 0.0);

/// Nearest point to the predicted hand; sta_nn when no prediction is available.
Decision stb_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted, const SceneConfig& scene,
                   double t = 0.0);

/// Nearest point if strictly closer than r, else a safe point.
Decision stc_safe_nn(const Vec3& hand, const SceneConfig& scene, const StrategyParams& p, double t = 0.0);

/// Real hand first, then the predicted hand, then a safe point near the
/// predicted point. Falls back to stc_safe_nn without a prediction.
Decision std_safe_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted, const SceneConfig& scene,
                        const StrategyParams& p, double t = 0.0);

/// Gaze preselects a point, kept when the hand is near it; otherwise the safe
/// point nearest to it. Falls back to stc_safe_nn without a gaze candidate.
Decision ste_gaze_safe_nn(const Vec3& hand, const std::optional<GazeRay>& ray, const SceneConfig& scene,
                          const StrategyParams& p, double t = 0.0);

/// ste with an extra predicted-hand stage before the safe-point fallback.
/// Falls back to ste_gaze_safe_nn without a prediction.
Decision stf_gaze_safe_gp_nn(const Vec3& hand, const std::optional<Vec3>& predicted,
                             const std::optional<GazeRay>& ray, const SceneConfig& scene, const StrategyParams& p,
                             double t = 0.0);

/// Per-stream strategy state: owns the online predictor of GP strategies.
class StrategyState {
public:
    StrategyState(StrategyKind kind, StrategyParams params, PredictorConfig predictor = {});

    /// Feeds one sample and returns this tick's decision. Throws OutOfOrder
    /// for non-increasing timestamps and InvalidArgument when a gaze strategy
    /// gets a sample without gaze.
    Decision step(const TimedSample& s, const SceneConfig& scene);

    StrategyKind kind() const { return kind_; }
    const StrategyParams& params() const { return params_; }
    /// Predicted hand of the latest tick (empty while the window fills).
    const std::optional<Vec3>& last_prediction() const { return last_pred_; }
    const OnlinePredictor* predictor() const { return predictor_ ? &*predictor_ : nullptr; }

private:
    StrategyKind kind_;
    StrategyParams params_;
    std::optional<OnlinePredictor> predictor_;
    std::optional<Vec3> last_pred_;
    std::optional<double> last_t_;
};

Decision step(StrategyState& state, const TimedSample& s, const SceneConfig& scene);

inline constexpr std::string_view kDecisionLogHeader =
    "t_s,strategy,target_id,source,hand_x_m,hand_y_m,hand_z_m,pred_x_m,pred_y_m,pred_z_m";

void write_decision_row(std::ostream& os, StrategyKind k, const Decision& d, const Vec3& hand,
                        const std::optional<Vec3>& pred);

} // namespace gpintent
