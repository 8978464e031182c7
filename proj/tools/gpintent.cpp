#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "gpintent/error.hpp"
#include "gpintent/report.hpp"
#include "gpintent/run_params.hpp"

namespace fs = std::filesystem;
using namespace gpintent;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

void apply_thread_cap() {
    const char* v = std::getenv("GPINTENT_THREADS");
    if (!v || !*v) return;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) throw InvalidArgument(fmt::format("GPINTENT_THREADS='{}' is not a positive integer", v));
    omp_set_num_threads(static_cast<int>(n));
}

SceneConfig scene_or_default(const std::string& path) { return path.empty() ? default_scene() : load_scene(path); }

SimConfig params_or_default(const std::string& path) { return path.empty() ? SimConfig{} : load_sim_config(path); }

std::vector<TrajectoryRecord> records_of(const std::vector<CorpusEntry>& entries) {
    std::vector<TrajectoryRecord> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.record);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + fmt::format("{}", x);
    return s;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", p.string()));
    return out;
}

// Writes to `path`, or stdout when empty.
template <class F>
void emit(const std::string& path, F&& body) {
    if (path.empty()) {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out = open_out(path);
    body(out);
    if (!out) throw IoError(fmt::format("write to {} failed", path));
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
    std::vector<Algorithm> out;
    for (const auto& n : names)
        if (!n.empty()) out.push_back(parse_algorithm(n));
    if (out.empty()) throw InvalidArgument("no algorithms given");
    return out;
}

std::vector<StrategyKind> parse_strategies(const std::vector<std::string>& names) {
    std::vector<StrategyKind> out;
    for (const auto& n : names)
        if (!n.empty()) out.push_back(parse_strategy(n));
    if (out.empty()) throw InvalidArgument("no strategies given");
    return out;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    std::string scene;
    std::uint64_t seed = 42;
    std::string out_dir;
    GenParams params;
};

int cmd_gen(const GenArgs& a) {
    const SceneConfig scene = scene_or_default(a.scene);
    GenParams p = a.params;
    p.seed = a.seed;
    const auto corpus = gen_corpus(scene, default_pairs(), p);
    const auto files = write_corpus(a.out_dir, corpus);
    for (const auto& f : files) std::cout << (fs::path(a.out_dir) / f).string() << '\n';
    return kOk;
}

// ---- bench -----------------------------------------------------------------

struct BenchWindowArgs {
    std::vector<std::string> algos{"basic", "holrd", "egp"};
    std::vector<double> windows{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    int reps = 3;
    int warmup = 1;
    int ends = 3;
    std::uint64_t seed = 0;
    std::string corpus;
    std::string out;
};

int cmd_bench_window(const BenchWindowArgs& a) {
    WindowBenchOptions o;
    o.algorithms = parse_algorithms(a.algos);
    o.windows = a.windows;
    o.reps = a.reps;
    o.warmup = a.warmup;
    o.ends_per_record = a.ends;
    o.seed = a.seed;
    for (double w : o.windows)
        if (!(w > 0.0)) throw InvalidArgument(fmt::format("window {} s must be positive", w));
    if (o.reps < 1) throw InvalidArgument("--reps must be at least 1");
    const auto corpus = records_of(load_corpus(a.corpus));
    const BenchReport rep = bench_window(corpus, o);
    const std::string cfg = fmt::format("bench-window algos={} windows={} reps={} warmup={} ends={}", join(a.algos),
                                        join(a.windows), a.reps, a.warmup, a.ends);
    emit(a.out, [&](std::ostream& os) { write_report(os, rep, report_banner(a.seed, cfg)); });
    return kOk;
}

struct BenchHorizonArgs {
    std::vector<std::string> algos{"holrd", "egp"};
    std::vector<double> horizons{5, 7.5, 10, 12.5, 15, 17.5, 20};
    double window = 2.0;
    std::uint64_t seed = 0;
    std::string corpus;
    std::string out;
};

int cmd_bench_horizon(const BenchHorizonArgs& a) {
    HorizonBenchOptions o;
    o.algorithms = parse_algorithms(a.algos);
    o.horizons = a.horizons;
    o.window_s = a.window;
    o.seed = a.seed;
    for (double h : o.horizons)
        if (!(h > 0.0 && h <= 50.0)) throw InvalidArgument(fmt::format("horizon {}% is outside (0, 50]", h));
    if (!(o.window_s > 0.0)) throw InvalidArgument("--window must be positive");
    const auto corpus = records_of(load_corpus(a.corpus));
    const BenchReport rep = bench_horizon(corpus, o);
    const std::string cfg =
        fmt::format("bench-horizon algos={} horizons={} window={}", join(a.algos), join(a.horizons), a.window);
    emit(a.out, [&](std::ostream& os) { write_report(os, rep, report_banner(a.seed, cfg)); });
    return kOk;
}

// ---- simulate / compare ----------------------------------------------------

struct SimulateArgs {
    std::string strategy;
    std::string trajectory;
    std::string scene;
    std::string params;
    std::uint64_t seed = 0;
    std::string metrics_out;
    std::string log_out;
};

int cmd_simulate(const SimulateArgs& a) {
    const StrategyKind k = parse_strategy(a.strategy);
    const SceneConfig scene = scene_or_default(a.scene);
    const SimConfig cfg = params_or_default(a.params);
    const TrajectoryRecord rec = read_csv(a.trajectory);
    require_gaze(k, rec);
    const RunResult res = run(rec, k, scene, cfg);
    const std::string banner = report_banner(
        a.seed, fmt::format("simulate strategy={} params={} scene={}", to_string(k), sim_config_to_json(cfg),
                            scene_to_json(scene)));
    emit(a.metrics_out, [&](std::ostream& os) {
        os << banner << '\n' << kMetricsHeader << '\n';
        write_metrics_row(os, trajectory_id(rec), k, res.metrics);
    });
    if (!a.log_out.empty())
        emit(a.log_out, [&](std::ostream& os) {
            os << banner << '\n';
            write_run_log(os, res.log);
        });
    return kOk;
}

struct CompareArgs {
    std::vector<std::string> strategies;
    std::string corpus;
    std::string scene;
    std::string params;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_compare(const CompareArgs& a) {
    const auto kinds = parse_strategies(a.strategies);
    const SceneConfig scene = scene_or_default(a.scene);
    const SimConfig cfg = params_or_default(a.params);
    const auto corpus = records_of(load_corpus(a.corpus));
    const auto runs = compare_strategies(corpus, kinds, scene, cfg);

    std::vector<std::string> names;
    for (auto k : kinds) names.emplace_back(to_string(k));
    const std::string banner = report_banner(
        a.seed, fmt::format("compare strategies={} params={} scene={}", join(names), sim_config_to_json(cfg),
                            scene_to_json(scene)));

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", a.out_dir, ec.message()));
    const fs::path dir(a.out_dir);
    const auto write = [&](const fs::path& p, auto&& body) {
        emit(p.string(), [&](std::ostream& os) {
            os << banner << '\n';
            body(os);
        });
    };
    write(dir / "runs.csv", [&](std::ostream& os) { write_runs_csv(os, runs); });
    write(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, runs, kinds); });
    for (Metric m : kAllMetrics)
        write(dir / fmt::format("plot_{}.csv", metric_name(m)), [&](std::ostream& os) { write_plot_csv(os, runs, kinds, m); });

    // Console table: mean(sd) per strategy and metric.
    std::cout << "strategy";
    for (Metric m : kAllMetrics) std::cout << ',' << metric_name(m);
    std::cout << '\n';
    for (auto k : kinds) {
        std::cout << to_string(k);
        for (Metric m : kAllMetrics) {
            const MeanSd s = summarize(runs, k, m);
            std::cout << fmt::format(",{:.2f}({:.2f})", s.mean, s.sd);
        }
        std::cout << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hand-intention prediction and robot target selection experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate the seven-trajectory synthetic corpus (CSV per trajectory + manifest.csv)");
    g->add_option("--scene", gen.scene, "Scene JSON (default: built-in layout)")->check(CLI::ExistingFile);
    g->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
    g->add_option("--out-dir", gen.out_dir, "Output directory")->required();
    g->add_option("--noise", gen.params.noise_std, "Tracker noise std (m, m/s)")->capture_default_str();
    g->add_option("--idle", gen.params.idle_prefix, "Rest before each reach (s)")->capture_default_str();

    BenchWindowArgs bw;
    auto* w = app.add_subcommand(
        "bench-window",
        "Time and LL per window and algorithm.\n"
        "Columns: key,algorithm,samples,time_ms,time_median_ms,log_likelihood,mape,rmse (key = window s)");
    w->add_option("--algos", bw.algos, "basic,holrd,egp")->delimiter(',')->capture_default_str();
    w->add_option("--windows", bw.windows, "Window lengths (s)")->delimiter(',')->capture_default_str();
    w->add_option("--reps", bw.reps, "Timed repetitions per window")->capture_default_str();
    w->add_option("--warmup", bw.warmup, "Discarded repetitions")->capture_default_str();
    w->add_option("--ends", bw.ends, "Window positions per trajectory")->capture_default_str();
    w->add_option("--seed", bw.seed, "Seed recorded in the report")->capture_default_str();
    w->add_option("--corpus", bw.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    w->add_option("--out", bw.out, "Report CSV (default: stdout)");

    BenchHorizonArgs bh;
    auto* h = app.add_subcommand(
        "bench-horizon",
        "MAPE and RMSE per horizon and algorithm.\n"
        "Columns: key,algorithm,samples,time_ms,time_median_ms,log_likelihood,mape,rmse (key = horizon %)");
    h->add_option("--algos", bh.algos, "holrd,egp (basic allowed)")->delimiter(',')->capture_default_str();
    h->add_option("--horizons", bh.horizons, "Horizons in % of the window, each in (0, 50]")->delimiter(',')->capture_default_str();
    h->add_option("--window", bh.window, "Window length (s)")->capture_default_str();
    h->add_option("--seed", bh.seed, "Seed recorded in the report")->capture_default_str();
    h->add_option("--corpus", bh.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    h->add_option("--out", bh.out, "Report CSV (default: stdout)");

    SimulateArgs sa;
    auto* s = app.add_subcommand(
        "simulate",
        fmt::format("Run one strategy on one trajectory.\nMetrics columns: {}\nLog columns: {}", kMetricsHeader, kRunLogHeader));
    s->add_option("--strategy", sa.strategy, "STA..STF")->required();
    s->add_option("--trajectory", sa.trajectory, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    s->add_option("--scene", sa.scene, "Scene JSON (default: built-in layout)")->check(CLI::ExistingFile);
    s->add_option("--params", sa.params, "Strategy/robot params JSON")->check(CLI::ExistingFile);
    s->add_option("--seed", sa.seed, "Seed recorded in the report")->capture_default_str();
    s->add_option("--metrics-out", sa.metrics_out, "Metrics CSV (default: stdout)");
    s->add_option("--log-out", sa.log_out, "Per-tick log CSV");

    CompareArgs ca;
    auto* c = app.add_subcommand(
        "compare",
        "Run strategies over a corpus; writes runs.csv, summary.csv (strategy,metric,mean,sd,formatted) and "
        "plot_<metric>.csv (trajectory,<strategy>...)");
    c->add_option("--strategies", ca.strategies, "Comma-separated STA..STF")->required()->delimiter(',');
    c->add_option("--corpus", ca.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--scene", ca.scene, "Scene JSON (default: built-in layout)")->check(CLI::ExistingFile);
    c->add_option("--params", ca.params, "Strategy/robot params JSON")->check(CLI::ExistingFile);
    c->add_option("--seed", ca.seed, "Seed recorded in the reports")->capture_default_str();
    c->add_option("--out-dir", ca.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        apply_thread_cap();
        if (*g) return cmd_gen(gen);
        if (*w) return cmd_bench_window(bw);
        if (*h) return cmd_bench_horizon(bh);
        if (*s) return cmd_simulate(sa);
        if (*c) return cmd_compare(ca);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const NumericalFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
