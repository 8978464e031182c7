#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpintent/predictor.hpp"
#include "gpintent/simulator.hpp"
#include "gpintent/trajectory.hpp"

namespace gpintent {

inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// "# gpintent <version> seed=<seed> config=<16 hex digits>"
std::string report_banner(std::uint64_t seed, std::string_view canonical_config);

// ---- corpus ----------------------------------------------------------------

struct CorpusEntry {
    std::string file;
    TrajectoryRecord record;
};

std::string trajectory_id(const TrajectoryRecord& rec);  // "<start>-<end>"

/// Writes one CSV per record plus manifest.csv; returns the file names.
std::vector<std::string> write_corpus(const std::filesystem::path& dir, const std::vector<TrajectoryRecord>& corpus);
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

/// Indices of the first and last samples that are clearly off the resting
/// poses at both ends (more than `threshold` m away).
std::pair<std::size_t, std::size_t> motion_span(const TrajectoryRecord& rec, double threshold = 0.03);

// ---- benchmark reports -----------------------------------------------------

enum class BenchKind { Window, Horizon };

struct BenchRow {
    double key = 0.0;  // window seconds or horizon percent
    Algorithm algorithm = Algorithm::Egp;
    std::size_t samples = 0;  // windows/predictions contributing
    double time_ms = 0.0;         // mean over repetitions
    double time_median_ms = 0.0;
    double log_likelihood = 0.0;
    double mape = 0.0;
    double rmse = 0.0;
};

struct BenchReport {
    BenchKind kind = BenchKind::Window;
    int reps = 1;
    std::uint64_t seed = 0;
    std::vector<BenchRow> rows;

    const BenchRow* find(double key, Algorithm a) const;
};

void write_report(std::ostream& os, const BenchReport& r, std::string_view banner);
BenchReport read_report(std::istream& is);

struct WindowBenchOptions {
    std::vector<Algorithm> algorithms{Algorithm::Basic, Algorithm::Holrd, Algorithm::Egp};
    std::vector<double> windows{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    int reps = 3;
    int warmup = 1;
    int ends_per_record = 3;  // windows per trajectory, spread over the motion
    std::uint64_t seed = 0;
};

/// Mean train+predict wall time and LL per (window, algorithm). Holrd and
/// EGP are timed warm-started from the preceding tick's optimum.
BenchReport bench_window(const std::vector<TrajectoryRecord>& corpus, const WindowBenchOptions& opt);

struct HorizonBenchOptions {
    std::vector<Algorithm> algorithms{Algorithm::Holrd, Algorithm::Egp};
    std::vector<double> horizons{5, 7.5, 10, 12.5, 15, 17.5, 20};
    double window_s = 2.0;
    double exclude_below = 0.01;  // m of displacement; smaller references are not scored by MAPE
    std::uint64_t seed = 0;
};

/// Online prediction over every motion-phase tick; MAPE on per-axis
/// displacement from the window start, RMSE on raw coordinates.
BenchReport bench_horizon(const std::vector<TrajectoryRecord>& corpus, const HorizonBenchOptions& opt);

// ---- strategy comparison ---------------------------------------------------

struct RunSummary {
    std::string trajectory;
    StrategyKind strategy;
    RunMetrics metrics;
};

/// Throws InvalidArgument naming the gaze columns when k needs gaze and rec lacks it.
void require_gaze(StrategyKind k, const TrajectoryRecord& rec);

/// Every (trajectory, strategy) run, ordered trajectory-major.
std::vector<RunSummary> compare_strategies(const std::vector<TrajectoryRecord>& corpus,
                                           const std::vector<StrategyKind>& strategies, const SceneConfig& scene,
                                           const SimConfig& cfg);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
};

MeanSd mean_sd(const std::vector<double>& v);

enum class Metric { TDetect, TReach, DRobot, SpDetected, SpReached, DHuman };
inline constexpr Metric kAllMetrics[] = {Metric::TDetect, Metric::TReach, Metric::DRobot,
                                         Metric::SpDetected, Metric::SpReached, Metric::DHuman};
std::string_view metric_name(Metric m);
double metric_value(const RunMetrics& r, Metric m);

MeanSd summarize(const std::vector<RunSummary>& runs, StrategyKind k, Metric m);

void write_runs_csv(std::ostream& os, const std::vector<RunSummary>& runs);
/// strategy,metric,mean,sd,formatted ("mean(sd)")
void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& runs, const std::vector<StrategyKind>& ks);
/// trajectory_id followed by one column per strategy.
void write_plot_csv(std::ostream& os, const std::vector<RunSummary>& runs, const std::vector<StrategyKind>& ks,
                    Metric m);

} // namespace gpintent
