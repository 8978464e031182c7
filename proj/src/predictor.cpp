#include "gpintent/predictor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gpintent/error.hpp"

namespace gpintent {

void fill_velocity_by_differences(std::span<TimedSample> s) {
    const std::size_t n = s.size();
    if (n < 2) {
        for (auto& x : s) x.velocity.setZero();
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        s[i].velocity = (s[hi].position - s[lo].position) / (s[hi].t - s[lo].t);
    }
}

// ---- window ----------------------------------------------------------------

SlidingWindow::SlidingWindow(std::size_t capacity, double dt) : capacity_(capacity), dt_(dt) {
    if (capacity == 0) throw InvalidArgument("window capacity must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("sample period must be positive");
}

WindowStatus SlidingWindow::push(const TimedSample& s) {
    if (!std::isfinite(s.t)) throw InvalidArgument("sample timestamp is not finite");
    if (!buf_.empty()) {
        const double gap = s.t - buf_.back().t;
        if (!(gap > 0.0)) throw OutOfOrder(fmt::format("sample at t={} does not follow t={}", s.t, buf_.back().t));
        if (std::abs(gap - dt_) > 0.1 * dt_)
            throw InvalidArgument(fmt::format("sample spacing {} s is not within 10% of {} s", gap, dt_));
    }
    buf_.push_back(s);
    if (buf_.size() > capacity_) buf_.pop_front();
    return full() ? WindowStatus::Full : WindowStatus::Filling;
}

Horizon Horizon::from_percent(double percent, std::size_t window) {
    if (!(percent > 0.0) || !std::isfinite(percent)) throw InvalidArgument("horizon percentage must be positive");
    const auto steps = static_cast<int>(std::lround(percent / 100.0 * static_cast<double>(window)));
    return {percent, std::max(1, steps)};
}

// ---- configuration ---------------------------------------------------------

std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Basic: return "basic";
    case Algorithm::Holrd: return "holrd";
    case Algorithm::Egp: return "egp";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "basic") return Algorithm::Basic;
    if (name == "holrd") return Algorithm::Holrd;
    if (name == "egp") return Algorithm::Egp;
    throw InvalidArgument(fmt::format("unknown algorithm '{}'", name));
}

PredictorConfig PredictorConfig::for_algorithm(Algorithm a) {
    PredictorConfig c;
    c.algorithm = a;
    if (a == Algorithm::Basic) {
        c.backend = BackendConfig::dense();
        c.warm_start = false;
    }
    return c;
}

double EgpModel::log_likelihood() const {
    double s = 0.0;
    for (const auto& a : axes) s += a.log_likelihood;
    return s;
}

bool EgpModel::converged() const {
    return std::all_of(axes.begin(), axes.end(), [](const AxisModel& a) { return a.converged; });
}

// ---- training --------------------------------------------------------------

namespace {

KernelParams clamp_into(KernelParams p, const HyperBounds& b) {
    p.sigma_f = std::clamp(p.sigma_f, b.sigma_f_lo, b.sigma_f_hi);
    p.length_scale = std::clamp(p.length_scale, b.length_lo, b.length_hi);
    return p;
}

} // namespace

WarmStart warm_start_from(const EgpModel& model) {
    WarmStart w;
    for (std::size_t a = 0; a < 3; ++a) w[a] = {model.axes[a].position_params, model.axes[a].memory};
    return w;
}

EgpModel train(const SlidingWindow& win, const PredictorConfig& cfg, const std::optional<WarmStart>& warm) {
    if (!win.full()) throw StateError("cannot train before the window is full");
    const auto& buf = win.samples();
    const std::size_t m = buf.size();
    const double t0 = buf.front().t;
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = buf[i].t - t0;

    EgpModel model;
    model.t_origin = t0;
    model.t_last = buf.back().t;
    model.two_channel = cfg.algorithm == Algorithm::Egp;

    for (int a = 0; a < 3; ++a) {
        std::vector<double> pos(m), vel(m);
        for (std::size_t i = 0; i < m; ++i) {
            pos[i] = buf[i].position[a];
            vel[i] = buf[i].velocity[a];
        }
        KernelParams init = cfg.init;
        const CurvatureMemory* seed = nullptr;
        if (warm) {
            const AxisWarmStart& w = (*warm)[static_cast<std::size_t>(a)];
            init.sigma_f = w.params.sigma_f;
            init.length_scale = w.params.length_scale;
            if (!w.memory.empty()) seed = &w.memory;
        }
        init = clamp_into(init, cfg.bounds);
        AxisModel& axis = model.axes[static_cast<std::size_t>(a)];
        const auto col = [m](const std::vector<double>& v) {
            return Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(m)));
        };

        if (!model.two_channel) {
            const HyperResult r = optimize_hyperparams(x, col(pos), init, cfg.bounds, cfg.backend, cfg.optimizer, seed);
            axis.position_params = axis.velocity_params = r.params;
            axis.position = fit(TrainingSet(x, pos), r.params, cfg.backend);
            axis.log_likelihood = r.log_likelihood;
            axis.converged = r.converged;
            axis.memory = r.memory;
        } else if (cfg.coupling == ChannelCoupling::Joint) {
            Eigen::MatrixXd ys(static_cast<Eigen::Index>(m), 2);
            ys.col(0) = col(pos);
            ys.col(1) = col(vel);
            const HyperResult r = optimize_hyperparams(x, ys, init, cfg.bounds, cfg.backend, cfg.optimizer, seed);
            auto chs = fit_shared(x, {pos, vel}, r.params, cfg.backend);
            axis.position_params = axis.velocity_params = r.params;
            axis.position = std::move(chs[0]);
            axis.velocity = std::move(chs[1]);
            axis.log_likelihood = r.log_likelihood;
            axis.converged = r.converged;
            axis.memory = r.memory;
        } else {
            const HyperResult rp = optimize_hyperparams(x, col(pos), init, cfg.bounds, cfg.backend, cfg.optimizer, seed);
            const HyperResult rv = optimize_hyperparams(x, col(vel), init, cfg.bounds, cfg.backend, cfg.optimizer);
            axis.position_params = rp.params;
            axis.velocity_params = rv.params;
            axis.position = fit(TrainingSet(x, pos), rp.params, cfg.backend);
            axis.velocity = fit(TrainingSet(x, vel), rv.params, cfg.backend);
            axis.log_likelihood = rp.log_likelihood + rv.log_likelihood;
            axis.converged = rp.converged && rv.converged;
            axis.memory = rp.memory;
        }
    }
    return model;
}

EgpModel egp_train(const SlidingWindow& win, const PredictorConfig& cfg,
                   const std::optional<WarmStart>& warm) {
    PredictorConfig c = cfg;
    c.algorithm = Algorithm::Egp;
    return train(win, c, warm);
}

// ---- prediction ------------------------------------------------------------

namespace {

void check_model(const EgpModel& model, const SlidingWindow& win) {
    if (!model.axes[0].position.factor) throw StateError("model is untrained");
    if (win.size() == 0 || model.t_last != win.back().t) throw StateError("model was not trained on this window");
}

} // namespace

Prediction egp_predict(const EgpModel& model, const SlidingWindow& win, const Horizon& h) {
    check_model(model, win);
    if (!model.two_channel) throw StateError("model has no velocity channel");
    const double ahead = h.steps * win.dt();
    const double now = model.t_last - model.t_origin;
    Prediction out;
    out.t_pred = model.t_last + ahead;
    for (int a = 0; a < 3; ++a) {
        const AxisModel& axis = model.axes[static_cast<std::size_t>(a)];
        const double current = posterior_mean(axis.position, now);
        const double vel = posterior_mean(*axis.velocity, now + ahead);
        out.position[a] = current + vel * ahead;
        out.velocity[a] = vel;
        out.variance[a] =
            posterior_var(axis.position, now) + ahead * ahead * posterior_var(*axis.velocity, now + ahead);
    }
    return out;
}

Prediction predict(const EgpModel& model, const SlidingWindow& win, const Horizon& h) {
    if (model.two_channel) return egp_predict(model, win, h);
    check_model(model, win);
    const double ahead = h.steps * win.dt();
    const double now = model.t_last - model.t_origin;
    Prediction out;
    out.t_pred = model.t_last + ahead;
    for (int a = 0; a < 3; ++a) {
        const FittedChannel& ch = model.axes[static_cast<std::size_t>(a)].position;
        const double future = posterior_mean(ch, now + ahead);
        out.position[a] = future;
        out.velocity[a] = (future - posterior_mean(ch, now)) / ahead;
        out.variance[a] = posterior_var(ch, now + ahead);
    }
    return out;
}

Prediction baseline_predict(const SlidingWindow& win, const Horizon& h, const BackendConfig& backend,
                            const PredictorConfig& cfg) {
    PredictorConfig c = cfg;
    c.backend = backend;
    if (c.algorithm == Algorithm::Egp) c.algorithm = Algorithm::Holrd;
    return predict(train(win, c), win, h);
}

// ---- online ----------------------------------------------------------------

OnlinePredictor::OnlinePredictor(PredictorConfig cfg, std::size_t window, Horizon horizon)
    : cfg_(std::move(cfg)), window_(window), horizon_(horizon) {}

std::optional<Prediction> OnlinePredictor::push(const TimedSample& s) {
    if (window_.push(s) != WindowStatus::Full) return std::nullopt;
    std::optional<WarmStart> warm;
    if (cfg_.warm_start && model_) warm = warm_start_from(*model_);
    EgpModel next;
    try {
        next = train(window_, cfg_, warm);
        if (!next.converged()) ++warnings_;
    } catch (const NumericalFailure&) {
        if (!model_) throw;
        // Refit on the new window with the last good hyperparameters.
        ++warnings_;
        PredictorConfig keep = cfg_;
        keep.optimizer.max_iterations = 0;
        WarmStart last = warm_start_from(*model_);
        for (auto& w : last) w.memory = {};
        next = train(window_, keep, last);
    }
    model_ = std::move(next);
    ++cycles_;
    return predict(*model_, window_, horizon_);
}

// ---- smoothing -------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> moving_average(std::span<const T> s, int k, SmoothMode mode, T zero) {
    if (k < 1 || k % 2 == 0) throw InvalidArgument("moving-average length must be odd and >= 1");
    const auto n = static_cast<std::ptrdiff_t>(s.size());
    std::vector<T> out(s.size(), zero);
    const std::ptrdiff_t half = k / 2;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::ptrdiff_t lo, hi;
        if (mode == SmoothMode::Centered) {
            const std::ptrdiff_t r = std::min({half, i, n - 1 - i});
            lo = i - r;
            hi = i + r;
        } else {
            lo = std::max<std::ptrdiff_t>(0, i - (k - 1));
            hi = i;
        }
        T acc = zero;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += s[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

} // namespace

std::vector<double> smooth(std::span<const double> series, int k, SmoothMode mode) {
    return moving_average<double>(series, k, mode, 0.0);
}

std::vector<Vec3> smooth(std::span<const Vec3> series, int k, SmoothMode mode) {
    return moving_average<Vec3>(series, k, mode, Vec3::Zero());
}

} // namespace gpintent
