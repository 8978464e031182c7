#include "gpintent/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gpintent/error.hpp"

namespace gpintent {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string report_banner(std::uint64_t seed, std::string_view canonical_config) {
    return fmt::format("# gpintent {} seed={} config={:016x}", kVersion, seed, fnv1a(canonical_config));
}

// ---- corpus ----------------------------------------------------------------

std::string trajectory_id(const TrajectoryRecord& rec) { return fmt::format("{}-{}", rec.start_id, rec.end_id); }

std::vector<std::string> write_corpus(const std::filesystem::path& dir, const std::vector<TrajectoryRecord>& corpus) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    std::vector<std::string> names;
    std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
    if (!manifest) throw IoError(fmt::format("cannot write {}", (dir / "manifest.csv").string()));
    manifest << "index,file,start_id,end_id,label,seed,samples\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& rec = corpus[i];
        const std::string name = fmt::format("traj_{}_{}.csv", i, trajectory_id(rec));
        write_csv(dir / name, rec);
        fmt::print(manifest, "{},{},{},{},{},{},{}\n", i, name, rec.start_id, rec.end_id, to_string(rec.label),
                   rec.seed, rec.samples.size());
        names.push_back(name);
    }
    if (!manifest) throw IoError("manifest write failed");
    return names;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.csv", std::ios::binary);
    if (!in) throw IoError(fmt::format("no manifest.csv in {}", dir.string()));
    std::string line;
    std::getline(in, line);
    std::vector<CorpusEntry> out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string idx, file;
        std::getline(ss, idx, ',');
        std::getline(ss, file, ',');
        if (file.empty()) throw ParseError("manifest line has no file name", n);
        out.push_back({file, read_csv(dir / file)});
    }
    if (out.empty()) throw IoError(fmt::format("corpus in {} is empty", dir.string()));
    return out;
}

std::pair<std::size_t, std::size_t> motion_span(const TrajectoryRecord& rec, double threshold) {
    const auto& s = rec.samples;
    if (s.empty()) throw InvalidArgument("empty trajectory");
    std::size_t first = 0, last = s.size() - 1;
    while (first + 1 < s.size() && (s[first].position - s.front().position).norm() <= threshold) ++first;
    while (last > first && (s[last].position - s.back().position).norm() <= threshold) --last;
    return {first, last};
}

// ---- reports ---------------------------------------------------------------

const BenchRow* BenchReport::find(double key, Algorithm a) const {
    for (const auto& r : rows)
        if (r.key == key && r.algorithm == a) return &r;
    return nullptr;
}

void write_report(std::ostream& os, const BenchReport& r, std::string_view banner) {
    os << banner << '\n';
    fmt::print(os, "# kind={} reps={} seed={}\n", r.kind == BenchKind::Window ? "window" : "horizon", r.reps, r.seed);
    os << "key,algorithm,samples,time_ms,time_median_ms,log_likelihood,mape,rmse\n";
    for (const auto& row : r.rows)
        fmt::print(os, "{:.17g},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", row.key, to_string(row.algorithm),
                   row.samples, row.time_ms, row.time_median_ms, row.log_likelihood, row.mape, row.rmse);
}

BenchReport read_report(std::istream& is) {
    BenchReport r;
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                try {
                    if (k == "kind") {
                        if (v != "window" && v != "horizon") throw ParseError("unknown report kind", n);
                        r.kind = v == "window" ? BenchKind::Window : BenchKind::Horizon;
                    } else if (k == "reps") {
                        r.reps = std::stoi(v);
                    } else if (k == "seed") {
                        r.seed = std::stoull(v);
                    }
                } catch (const ParseError&) {
                    throw;
                } catch (const std::exception&) {
                    throw ParseError(fmt::format("bad value for {}", k), n);
                }
            }
            continue;
        }
        if (!header) {
            if (line != "key,algorithm,samples,time_ms,time_median_ms,log_likelihood,mape,rmse")
                throw ParseError("unexpected report header", n);
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != 8) throw ParseError(fmt::format("expected 8 fields, got {}", f.size()), n);
        try {
            BenchRow row;
            row.key = std::stod(f[0]);
            row.algorithm = parse_algorithm(f[1]);
            row.samples = std::stoull(f[2]);
            row.time_ms = std::stod(f[3]);
            row.time_median_ms = std::stod(f[4]);
            row.log_likelihood = std::stod(f[5]);
            row.mape = std::stod(f[6]);
            row.rmse = std::stod(f[7]);
            r.rows.push_back(row);
        } catch (const std::exception& e) {
            throw ParseError(fmt::format("bad report row: {}", e.what()), n);
        }
    }
    if (!header) throw ParseError("missing report header", n);
    return r;
}

// ---- window benchmark ------------------------------------------------------

namespace {

SlidingWindow window_ending(const TrajectoryRecord& rec, std::size_t end, std::size_t w) {
    SlidingWindow win(w);
    for (std::size_t i = end + 1 - w; i <= end; ++i) win.push(rec.samples[i]);
    return win;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

BenchReport bench_window(const std::vector<TrajectoryRecord>& corpus, const WindowBenchOptions& opt) {
    if (opt.reps < 1) throw InvalidArgument("reps must be >= 1");
    if (opt.ends_per_record < 1) throw InvalidArgument("need at least one window per trajectory");
    BenchReport rep;
    rep.kind = BenchKind::Window;
    rep.reps = opt.reps;
    rep.seed = opt.seed;
    using clock = std::chrono::steady_clock;

    for (double ws : opt.windows) {
        if (!(ws > 0.0)) throw InvalidArgument("window lengths must be positive");
        const auto w = static_cast<std::size_t>(std::max(2L, std::lround(ws * kSampleRate)));
        const Horizon h = Horizon::from_percent(15.0, w);
        const std::size_t na = opt.algorithms.size();
        std::vector<PredictorConfig> cfgs;
        for (Algorithm alg : opt.algorithms) cfgs.push_back(PredictorConfig::for_algorithm(alg));
        std::vector<std::vector<double>> times(na);
        std::vector<double> ll(na, 0.0);
        std::size_t windows = 0;
        // Timed serially with the algorithms interleaved per repetition, so
        // load drift on the host hits every algorithm alike.
        for (const auto& rec : corpus) {
            const auto [ms, me] = motion_span(rec);
            for (int k = 0; k < opt.ends_per_record; ++k) {
                std::size_t end = ms + (me - ms) * static_cast<std::size_t>(k + 1) /
                                           static_cast<std::size_t>(opt.ends_per_record + 1);
                end = std::clamp(end, w, rec.samples.size() - 1);
                if (end < w) continue;
                const SlidingWindow prev = window_ending(rec, end - 1, w);
                const SlidingWindow win = window_ending(rec, end, w);
                std::vector<std::optional<WarmStart>> warm(na);
                for (std::size_t a = 0; a < na; ++a)
                    if (cfgs[a].warm_start) warm[a] = warm_start_from(train(prev, cfgs[a]));
                std::vector<EgpModel> models(na);
                for (int r = 0; r < opt.warmup + opt.reps; ++r) {
                    for (std::size_t a = 0; a < na; ++a) {
                        const auto t0 = clock::now();
                        models[a] = train(win, cfgs[a], warm[a]);
                        const Prediction p = predict(models[a], win, h);
                        const auto t1 = clock::now();
                        if (!p.position.allFinite()) throw NumericalFailure("non-finite prediction", 0.0);
                        if (r >= opt.warmup) times[a].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                    }
                }
                for (std::size_t a = 0; a < na; ++a) ll[a] += models[a].log_likelihood();
                ++windows;
            }
        }
        if (windows == 0) throw InvalidArgument(fmt::format("no trajectory is long enough for a {} s window", ws));
        for (std::size_t a = 0; a < na; ++a) {
            BenchRow row;
            row.key = ws;
            row.algorithm = opt.algorithms[a];
            row.samples = windows;
            row.time_ms = std::accumulate(times[a].begin(), times[a].end(), 0.0) / static_cast<double>(times[a].size());
            row.time_median_ms = median(times[a]);
            row.log_likelihood = ll[a] / static_cast<double>(windows);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

// ---- horizon benchmark -----------------------------------------------------

namespace {

struct HorizonAcc {
    double abs_rel = 0.0;
    std::size_t used = 0;
    double sq = 0.0;
    std::size_t n = 0;
    double time_ms = 0.0;
    std::size_t cycles = 0;
};

} // namespace

BenchReport bench_horizon(const std::vector<TrajectoryRecord>& corpus, const HorizonBenchOptions& opt) {
    const auto w = static_cast<std::size_t>(std::max(2L, std::lround(opt.window_s * kSampleRate)));
    std::vector<Horizon> hs;
    for (double pct : opt.horizons) {
        if (!(pct > 0.0 && pct <= 50.0)) throw InvalidArgument("horizons must lie in (0, 50] percent");
        hs.push_back(Horizon::from_percent(pct, w));
    }
    const std::size_t na = opt.algorithms.size(), nh = hs.size(), nr = corpus.size();
    int max_steps = 0;
    for (const auto& h : hs) max_steps = std::max(max_steps, h.steps);

    // acc[record][algorithm][horizon]
    std::vector<HorizonAcc> acc(nr * na * nh);
    const auto at = [&](std::size_t r, std::size_t a, std::size_t h) -> HorizonAcc& { return acc[(r * na + a) * nh + h]; };

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(nr); ++ri) {
        const auto r = static_cast<std::size_t>(ri);
        const auto& rec = corpus[r];
        const auto [ms, me] = motion_span(rec);
        const std::size_t first_end = std::max(w - 1, ms > static_cast<std::size_t>(max_steps) ? ms - static_cast<std::size_t>(max_steps) : 0);
        for (std::size_t a = 0; a < na; ++a) {
            const PredictorConfig cfg = PredictorConfig::for_algorithm(opt.algorithms[a]);
            std::optional<WarmStart> warm;
            for (std::size_t end = first_end; end < me && end < rec.samples.size(); ++end) {
                const SlidingWindow win = window_ending(rec, end, w);
                const auto t0 = std::chrono::steady_clock::now();
                const EgpModel model = train(win, cfg, cfg.warm_start ? warm : std::nullopt);
                const auto t1 = std::chrono::steady_clock::now();
                warm = warm_start_from(model);
                const Vec3 origin = win.front().position;
                for (std::size_t hi = 0; hi < nh; ++hi) {
                    const std::size_t target = end + static_cast<std::size_t>(hs[hi].steps);
                    if (target < ms || target > me || target >= rec.samples.size()) continue;
                    const Prediction p = predict(model, win, hs[hi]);
                    const Vec3& actual = rec.samples[target].position;
                    HorizonAcc& c = at(r, a, hi);
                    for (int k = 0; k < 3; ++k) {
                        const double ad = actual[k] - origin[k];
                        const double pd = p.position[k] - origin[k];
                        if (std::abs(ad) > opt.exclude_below) {
                            c.abs_rel += std::abs(pd - ad) / std::abs(ad);
                            ++c.used;
                        }
                        c.sq += (p.position[k] - actual[k]) * (p.position[k] - actual[k]);
                        ++c.n;
                    }
                    c.time_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
                    ++c.cycles;
                }
            }
        }
    }

    BenchReport rep;
    rep.kind = BenchKind::Horizon;
    rep.seed = opt.seed;
    for (std::size_t hi = 0; hi < nh; ++hi)
        for (std::size_t a = 0; a < na; ++a) {
            HorizonAcc tot;
            for (std::size_t r = 0; r < nr; ++r) {
                const auto& c = at(r, a, hi);
                tot.abs_rel += c.abs_rel;
                tot.used += c.used;
                tot.sq += c.sq;
                tot.n += c.n;
                tot.time_ms += c.time_ms;
                tot.cycles += c.cycles;
            }
            if (tot.used == 0) throw InvalidArgument("no motion-phase predictions to score");
            BenchRow row;
            row.key = opt.horizons[hi];
            row.algorithm = opt.algorithms[a];
            row.samples = tot.cycles;
            row.mape = 100.0 * tot.abs_rel / static_cast<double>(tot.used);
            row.rmse = std::sqrt(tot.sq / static_cast<double>(tot.n));
            row.time_ms = tot.time_ms / static_cast<double>(tot.cycles);
            rep.rows.push_back(row);
        }
    return rep;
}

// ---- strategy comparison ---------------------------------------------------

void require_gaze(StrategyKind k, const TrajectoryRecord& rec) {
    if (!uses_gaze(k) || rec.has_gaze()) return;
    const std::string_view cols = kTrajectoryHeader.substr(kTrajectoryHeader.find("gaze_ox_m"));
    throw InvalidArgument(fmt::format("{} needs gaze on every sample; trajectory {} is missing columns {}",
                                      to_string(k), trajectory_id(rec), cols));
}

std::vector<RunSummary> compare_strategies(const std::vector<TrajectoryRecord>& corpus,
                                           const std::vector<StrategyKind>& strategies, const SceneConfig& scene,
                                           const SimConfig& cfg) {
    if (strategies.empty()) throw InvalidArgument("no strategies to compare");
    for (auto k : strategies)
        for (const auto& rec : corpus) require_gaze(k, rec);
    const std::size_t ns = strategies.size();
    std::vector<RunSummary> out(corpus.size() * ns);
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto& rec = corpus[idx / ns];
        const StrategyKind k = strategies[idx % ns];
        out[idx] = {trajectory_id(rec), k, run(rec, k, scene, cfg).metrics};
    }
    return out;
}

MeanSd mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string_view metric_name(Metric m) {
    switch (m) {
    case Metric::TDetect: return "T_d_s";
    case Metric::TReach: return "T_r_s";
    case Metric::DRobot: return "D_r_m";
    case Metric::SpDetected: return "SP_d";
    case Metric::SpReached: return "SP_r";
    case Metric::DHuman: return "D_h_m";
    }
    return "?";
}

double metric_value(const RunMetrics& r, Metric m) {
    switch (m) {
    case Metric::TDetect: return r.t_detect;
    case Metric::TReach: return r.t_reach;
    case Metric::DRobot: return r.d_robot;
    case Metric::SpDetected: return r.sp_detected;
    case Metric::SpReached: return r.sp_reached;
    case Metric::DHuman: return r.d_human;
    }
    return 0.0;
}

MeanSd summarize(const std::vector<RunSummary>& runs, StrategyKind k, Metric m) {
    std::vector<double> v;
    for (const auto& r : runs)
        if (r.strategy == k) v.push_back(metric_value(r.metrics, m));
    return mean_sd(v);
}

void write_runs_csv(std::ostream& os, const std::vector<RunSummary>& runs) {
    os << kMetricsHeader << '\n';
    for (const auto& r : runs) write_metrics_row(os, r.trajectory, r.strategy, r.metrics);
}

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& runs, const std::vector<StrategyKind>& ks) {
    os << "strategy,metric,mean,sd,formatted\n";
    for (auto k : ks)
        for (Metric m : kAllMetrics) {
            const MeanSd s = summarize(runs, k, m);
            fmt::print(os, "{},{},{:.17g},{:.17g},{:.2f}({:.2f})\n", to_string(k), metric_name(m), s.mean, s.sd, s.mean,
                       s.sd);
        }
}

void write_plot_csv(std::ostream& os, const std::vector<RunSummary>& runs, const std::vector<StrategyKind>& ks,
                    Metric m) {
    os << "trajectory_id";
    for (auto k : ks) os << ',' << to_string(k);
    os << '\n';
    std::vector<std::string> ids;
    for (const auto& r : runs)
        if (std::find(ids.begin(), ids.end(), r.trajectory) == ids.end()) ids.push_back(r.trajectory);
    for (const auto& id : ids) {
        os << id;
        for (auto k : ks) {
            const auto it = std::find_if(runs.begin(), runs.end(),
                                         [&](const RunSummary& r) { return r.trajectory == id && r.strategy == k; });
            if (it != runs.end())
                fmt::print(os, ",{:.17g}", metric_value(it->metrics, m));
            else
                os << ',';
        }
        os << '\n';
    }
}

} // namespace gpintent
