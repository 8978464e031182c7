#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gpintent/gp.hpp"
#include "gpintent/sample.hpp"

namespace gpintent {

enum class WindowStatus { Filling, Full };

/// FIFO of the most recent `capacity` samples.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity, double dt = kSamplePeriod);

    /// Appends s, evicting the oldest sample once full. Throws OutOfOrder for
    /// a non-increasing timestamp and InvalidArgument when the spacing is more
    /// than 10% away from dt.
    WindowStatus push(const TimedSample& s);

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return buf_.size() == capacity_; }
    double dt() const { return dt_; }
    const std::deque<TimedSample>& samples() const { return buf_; }
    const TimedSample& front() const { return buf_.front(); }
    const TimedSample& back() const { return buf_.back(); }

private:
    std::size_t capacity_;
    double dt_;
    std::deque<TimedSample> buf_;
};

/// Look-ahead as a percentage of the window; steps = max(1, round(p/100 * w)).
struct Horizon {
    double percent = 15.0;
    int steps = 1;

    static Horizon from_percent(double percent, std::size_t window);
};

/// How the shared hyperparameters of an axis are chosen.
enum class ChannelCoupling { Joint, PerChannel };

enum class Algorithm { Basic, Holrd, Egp };
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct PredictorConfig {
    Algorithm algorithm = Algorithm::Egp;
    BackendConfig backend = BackendConfig::hodlr();
    KernelParams init{1.0, 0.5, 0.003};
    HyperBounds bounds;
    OptimizerOptions optimizer;
    ChannelCoupling coupling = ChannelCoupling::Joint;
    bool warm_start = true;

    /// The three benchmarked configurations: Basic is a dense GP refit from
    /// the initial parameters every tick; Holrd and EGP use the hierarchical
    /// backend and warm-start from the previous optimum.
    static PredictorConfig for_algorithm(Algorithm a);
};

struct AxisModel {
    KernelParams position_params;
    KernelParams velocity_params;
    FittedChannel position;
    std::optional<FittedChannel> velocity;  // EGP only
    double log_likelihood = 0.0;  // joint (EGP) or position-only
    bool converged = true;
    CurvatureMemory memory;  // position (or joint) fit
};

struct EgpModel {
    std::array<AxisModel, 3> axes;
    double t_origin = 0.0;  // timestamp mapped to input 0
    double t_last = 0.0;
    bool two_channel = true;

    double log_likelihood() const;
    bool converged() const;
};

struct Prediction {
    double t_pred = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 variance = Vec3::Zero();
};

/// Per-axis optimizer seed: starting hyperparameters plus curvature pairs.
struct AxisWarmStart {
    KernelParams params;
    CurvatureMemory memory;
};
using WarmStart = std::array<AxisWarmStart, 3>;

/// Seed taken from a trained model's optimum.
WarmStart warm_start_from(const EgpModel& model);

/// Trains the three per-axis models on a full window. `warm` seeds the
/// optimizer (per axis); otherwise cfg.init is used.
EgpModel train(const SlidingWindow& win, const PredictorConfig& cfg, const std::optional<WarmStart>& warm = std::nullopt);

/// Two-channel train: cfg.algorithm is forced to Egp.
EgpModel egp_train(const SlidingWindow& win, const PredictorConfig& cfg = {},
                   const std::optional<WarmStart>& warm = std::nullopt);

/// Position from the position channel at the newest sample plus the velocity
/// channel's mean at the horizon times h * dt.
Prediction egp_predict(const EgpModel& model, const SlidingWindow& win, const Horizon& h);

/// Position-only GP evaluated directly at t_now + h * dt.
Prediction baseline_predict(const SlidingWindow& win, const Horizon& h, const BackendConfig& backend,
                            const PredictorConfig& cfg = PredictorConfig::for_algorithm(Algorithm::Holrd));

/// Predicts from a model of either kind.
Prediction predict(const EgpModel& model, const SlidingWindow& win, const Horizon& h);

/// Sliding-window online predictor: one train + predict per sample once the
/// window is full.
class OnlinePredictor {
public:
    OnlinePredictor(PredictorConfig cfg, std::size_t window, Horizon horizon);

    /// Returns nullopt while the window is filling.
    std::optional<Prediction> push(const TimedSample& s);

    bool ready() const { return model_.has_value(); }
    const std::optional<EgpModel>& model() const { return model_; }
    const SlidingWindow& window() const { return window_; }
    const Horizon& horizon() const { return horizon_; }
    const PredictorConfig& config() const { return cfg_; }
    /// Ticks where training failed numerically and the previous hyperparameters
    /// were reused, plus ticks where the optimizer hit its iteration cap.
    int warnings() const { return warnings_; }
    int cycles() const { return cycles_; }

private:
    PredictorConfig cfg_;
    SlidingWindow window_;
    Horizon horizon_;
    std::optional<EgpModel> model_;
    int warnings_ = 0;
    int cycles_ = 0;
};

enum class SmoothMode { Centered, Causal };

/// Moving average of odd length k with windows shrinking at the boundaries.
std::vector<double> smooth(std::span<const double> series, int k, SmoothMode mode = SmoothMode::Centered);
std::vector<Vec3> smooth(std::span<const Vec3> series, int k, SmoothMode mode = SmoothMode::Centered);

} // namespace gpintent
