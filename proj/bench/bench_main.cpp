#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include <omp.h>

#include "gpintent/report.hpp"

using namespace gpintent;
using clk = std::chrono::steady_clock;

namespace {

double median_us(int reps, const std::function<void()>& body) {
    body();
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clk::now();
        body();
        t.push_back(std::chrono::duration<double, std::micro>(clk::now() - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

std::vector<double> grid(std::size_t m) {
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = static_cast<double>(i) * kSamplePeriod;
    return x;
}

double sink = 0.0;

} // namespace

int main() {
    std::printf("# threads=%d\n", omp_get_max_threads());
    std::printf("kernel,variant,m,median_us\n");
    const KernelParams p{0.6, 2.0, 0.003};

    for (std::size_t m : {68, 256, 1024, 2048}) {
        const auto x = grid(m);
        const int reps = m > 1000 ? 5 : 30;
        std::printf("gram,serial,%zu,%.1f\n", m, median_us(reps, [&] { sink += reference::gram(x, p)(0, 1); }));
        std::printf("gram,openmp,%zu,%.1f\n", m, median_us(reps, [&] { sink += gram(x, p)(0, 1); }));
    }

    for (std::size_t m : {68, 256, 1024}) {
        const auto x = grid(m);
        std::vector<double> y(m);
        std::mt19937_64 rng(7);
        std::normal_distribution<double> n(0.0, 0.1);
        for (std::size_t i = 0; i < m; ++i) y[i] = std::sin(x[i]) + n(rng);
        const FittedChannel ch = fit(TrainingSet(x, y), p, BackendConfig::dense());
        std::vector<double> q(2000);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = x.back() * static_cast<double>(i) / 1999.0;
        std::printf("posterior_batch,serial,%zu,%.1f\n", m,
                    median_us(10, [&] { sink += reference::posterior_batch(ch, q).mean[0]; }));
        std::printf("posterior_batch,openmp,%zu,%.1f\n", m, median_us(10, [&] { sink += posterior_batch(ch, q).mean[0]; }));
    }

    for (std::size_t m : {68, 128, 256, 512, 1024}) {
        const Eigen::MatrixXd k = gram(grid(m), p);
        const int reps = m > 500 ? 5 : 20;
        std::printf("factor,dense,%zu,%.1f\n", m,
                    median_us(reps, [&] { sink += factor(k, p.sigma_n, BackendConfig::dense()).logdet(); }));
        std::printf("factor,hodlr,%zu,%.1f\n", m,
                    median_us(reps, [&] { sink += factor(k, p.sigma_n, BackendConfig::hodlr()).logdet(); }));
    }

    // One train+predict cycle per tick over the motion of the first trajectory.
    const SceneConfig scene = default_scene();
    const auto corpus = gen_corpus(scene, default_pairs(), GenParams{});
    const auto& rec = corpus.front();
    const auto [ms, me] = motion_span(rec);
    for (Algorithm a : {Algorithm::Basic, Algorithm::Holrd, Algorithm::Egp}) {
        OnlinePredictor pred(PredictorConfig::for_algorithm(a), 68, Horizon::from_percent(15.0, 68));
        std::vector<double> t;
        for (std::size_t i = ms - 67; i <= me; ++i) {
            const auto t0 = clk::now();
            const auto out = pred.push(rec.samples[i]);
            const double us = std::chrono::duration<double, std::micro>(clk::now() - t0).count();
            if (out && i > ms) t.push_back(us);
        }
        std::sort(t.begin(), t.end());
        std::printf("predictor_cycle,%s,68,%.1f\n", std::string(to_string(a)).c_str(), t[t.size() / 2]);
    }
    std::fprintf(stderr, "%g\n", sink);
}
