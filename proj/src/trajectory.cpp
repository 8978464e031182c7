#include "gpintent/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gpintent/error.hpp"

namespace gpintent {

std::string_view to_string(DistanceClass c) {
    switch (c) {
    case DistanceClass::Long: return "long";
    case DistanceClass::Medium: return "medium";
    case DistanceClass::Short: return "short";
    }
    return "?";
}

DistanceClass parse_distance_class(std::string_view s) {
    if (s == "long") return DistanceClass::Long;
    if (s == "medium") return DistanceClass::Medium;
    if (s == "short") return DistanceClass::Short;
    throw InvalidArgument(fmt::format("unknown distance class '{}'", s));
}

bool TrajectoryRecord::has_gaze() const {
    return !samples.empty() &&
           std::all_of(samples.begin(), samples.end(), [](const TimedSample& s) { return s.gaze.has_value(); });
}

std::vector<PointPair> default_pairs() {
    return {
        {2, 11, DistanceClass::Long},   {5, 18, DistanceClass::Long},   {5, 11, DistanceClass::Medium},
        {5, 15, DistanceClass::Medium}, {12, 15, DistanceClass::Medium}, {3, 4, DistanceClass::Short},
        {17, 16, DistanceClass::Short},
    };
}

double GenParams::duration(DistanceClass c) const {
    switch (c) {
    case DistanceClass::Long: return long_duration;
    case DistanceClass::Medium: return medium_duration;
    case DistanceClass::Short: return short_duration;
    }
    return medium_duration;
}

void GenParams::validate() const {
    for (double d : {long_duration, medium_duration, short_duration})
        if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("reach durations must be positive");
    if (!(idle_prefix >= 0.0) || !(hold_suffix >= 0.0)) throw InvalidArgument("idle and hold times must be >= 0");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidArgument("noise std must be >= 0");
    if (!(gaze_lead >= 0.0) || !std::isfinite(gaze_lead)) throw InvalidArgument("gaze lead must be >= 0");
}

// ---- generation ------------------------------------------------------------

KinematicSample min_jerk_at(const Vec3& a, const Vec3& b, double duration, double t) {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("minimum-jerk duration must be positive");
    const double s = std::clamp(t / duration, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double shape = s3 * (10.0 - 15.0 * s + 6.0 * s2);
    const double rate = 30.0 * s2 * (1.0 - 2.0 * s + s2) / duration;
    return {a + (b - a) * shape, (b - a) * rate};
}

std::vector<KinematicSample> min_jerk(const Vec3& a, const Vec3& b, double duration, double rate) {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("minimum-jerk duration must be positive");
    if (!(rate > 0.0)) throw InvalidArgument("sample rate must be positive");
    const long n = std::max(1L, std::lround(duration * rate));
    const double snapped = static_cast<double>(n) / rate;
    std::vector<KinematicSample> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k < n; ++k) out.push_back(min_jerk_at(a, b, snapped, static_cast<double>(k) / rate));
    out.push_back({b, Vec3::Zero()});
    return out;
}

void synth_gaze(std::span<TimedSample> samples, const Vec3& head, const Vec3& start, const Vec3& target,
                double motion_start, double lead) {
    if (!(lead >= 0.0)) throw InvalidArgument("gaze lead must be >= 0");
    const GazeRay at_start = GazeRay::toward(head, start - head);
    const GazeRay at_target = GazeRay::toward(head, target - head);
    const double switch_time = motion_start - lead;
    for (auto& s : samples) s.gaze = (lead == 0.0 || s.t >= switch_time) ? at_target : at_start;
}

TrajectoryRecord generate_record(const SceneConfig& scene, const PointPair& pair, const GenParams& params,
                                 std::uint64_t stream) {
    params.validate();
    const auto find = [&](int id) -> const Vec3& {
        for (const auto& p : scene.points)
            if (p.id == id) return p.pos;
        throw InvalidArgument(fmt::format("interaction point {} is not in the scene", id));
    };
    const Vec3 a = find(pair.start);
    const Vec3 b = find(pair.end);

    const auto idle = static_cast<std::size_t>(std::lround(params.idle_prefix * kSampleRate));
    const auto hold = static_cast<std::size_t>(std::lround(params.hold_suffix * kSampleRate));
    const auto reach = min_jerk(a, b, params.duration(pair.label));

    TrajectoryRecord rec;
    rec.start_id = pair.start;
    rec.end_id = pair.end;
    rec.label = pair.label;
    rec.seed = params.seed;
    rec.samples.reserve(idle + reach.size() + hold);
    const auto tick = [&](const Vec3& p, const Vec3& v) {
        TimedSample s;
        s.t = static_cast<double>(rec.samples.size()) / kSampleRate;
        s.position = p;
        s.velocity = v;
        rec.samples.push_back(s);
    };
    for (std::size_t k = 0; k < idle; ++k) tick(a, Vec3::Zero());
    for (const auto& r : reach) tick(r.position, r.velocity);
    for (std::size_t k = 0; k < hold; ++k) tick(b, Vec3::Zero());

    if (params.noise_std > 0.0) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, params.noise_std);
        for (auto& s : rec.samples) {
            for (int i = 0; i < 3; ++i) s.position[i] += noise(rng);
            for (int i = 0; i < 3; ++i) s.velocity[i] += noise(rng);
        }
    }
    synth_gaze(rec.samples, scene.head, a, b, static_cast<double>(idle) / kSampleRate, params.gaze_lead);
    return rec;
}

std::vector<TrajectoryRecord> gen_corpus(const SceneConfig& scene, const std::vector<PointPair>& pairs,
                                         const GenParams& params) {
    params.validate();
    for (const auto& p : pairs) {
        if (!scene.has_point(p.start) || !scene.has_point(p.end) || scene.is_safe_point(p.start) ||
            scene.is_safe_point(p.end))
            throw InvalidArgument(fmt::format("pair {}-{} is not between scene interaction points", p.start, p.end));
    }
    std::vector<TrajectoryRecord> out(pairs.size());
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            generate_record(scene, pairs[static_cast<std::size_t>(i)], params, static_cast<std::uint64_t>(i));
    return out;
}

double endpoint_error(const TrajectoryRecord& rec, const SceneConfig& scene) {
    if (rec.samples.empty()) throw InvalidArgument("empty trajectory");
    return std::max((rec.samples.front().position - scene.position(rec.start_id)).norm(),
                    (rec.samples.back().position - scene.position(rec.end_id)).norm());
}

// ---- CSV -------------------------------------------------------------------

void write_csv(std::ostream& os, const TrajectoryRecord& rec) {
    fmt::print(os, "# start_id={}\n# end_id={}\n# seed={}\n# label={}\n{}\n", rec.start_id, rec.end_id, rec.seed,
               to_string(rec.label), kTrajectoryHeader);
    for (const auto& s : rec.samples) {
        fmt::print(os, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", s.t, s.position.x(), s.position.y(),
                   s.position.z(), s.velocity.x(), s.velocity.y(), s.velocity.z());
        if (s.gaze) {
            fmt::print(os, ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.gaze->origin.x(),
                       s.gaze->origin.y(), s.gaze->origin.z(), s.gaze->direction.x(), s.gaze->direction.y(),
                       s.gaze->direction.z());
        } else {
            os << ",,,,,,\n";
        }
    }
}

void write_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    write_csv(out, rec);
    if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

double parse_double(std::string_view f, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw ParseError(fmt::format("bad number '{}'", f), line);
    return v;
}

// Returns true when all three fields are present, false when all empty.
bool parse_triple(const std::vector<std::string_view>& f, std::size_t first, Vec3& out, std::size_t line) {
    const int empty = static_cast<int>(f[first].empty()) + static_cast<int>(f[first + 1].empty()) +
                      static_cast<int>(f[first + 2].empty());
    if (empty == 3) return false;
    if (empty != 0) throw ParseError("partially empty vector field", line);
    for (int i = 0; i < 3; ++i) out[i] = parse_double(f[first + static_cast<std::size_t>(i)], line);
    return true;
}

} // namespace

TrajectoryRecord read_csv(std::istream& is) {
    TrajectoryRecord rec;
    bool have_start = false, have_end = false, header_seen = false, need_velocity = false;
    std::size_t columns = 0;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string_view l(raw);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        if (l.empty()) continue;
        if (l.front() == '#') {
            l.remove_prefix(1);
            while (!l.empty() && l.front() == ' ') l.remove_prefix(1);
            const std::size_t eq = l.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string_view key = l.substr(0, eq), val = l.substr(eq + 1);
            try {
                if (key == "start_id") {
                    rec.start_id = std::stoi(std::string(val));
                    have_start = true;
                } else if (key == "end_id") {
                    rec.end_id = std::stoi(std::string(val));
                    have_end = true;
                } else if (key == "seed") {
                    rec.seed = std::stoull(std::string(val));
                } else if (key == "label") {
                    rec.label = parse_distance_class(val);
                }
            } catch (const std::exception&) {
                throw ParseError(fmt::format("bad header value for {}", key), line);
            }
            continue;
        }
        if (!header_seen) {
            const std::string_view full = kTrajectoryHeader;
            const std::string_view kinematic = full.substr(0, full.find(",gaze_ox_m"));
            if (l == full) {
                columns = 13;
            } else if (l == kinematic) {
                columns = 7;
            } else {
                throw ParseError("unexpected column header", line);
            }
            header_seen = true;
            continue;
        }
        const auto f = split(l);
        if (f.size() != columns) throw ParseError(fmt::format("expected {} fields, got {}", columns, f.size()), line);
        TimedSample s;
        s.t = parse_double(f[0], line);
        if (!parse_triple(f, 1, s.position, line)) throw ParseError("missing hand position", line);
        if (!parse_triple(f, 4, s.velocity, line)) need_velocity = true;
        if (columns == 13) {
            Vec3 o, d;
            const bool ho = parse_triple(f, 7, o, line);
            const bool hd = parse_triple(f, 10, d, line);
            if (ho != hd) throw ParseError("gaze origin and direction must both be present", line);
            if (ho) {
                if (std::abs(d.norm() - 1.0) > 1e-6) throw ParseError("gaze direction is not unit length", line);
                s.gaze = GazeRay{o, d};
            }
        }
        if (!rec.samples.empty()) {
            const double gap = s.t - rec.samples.back().t;
            if (!(gap > 0.0)) throw ParseError("timestamps must be strictly increasing", line);
            if (std::abs(gap - kSamplePeriod) > 0.1 * kSamplePeriod)
                throw ParseError(fmt::format("sample spacing {} s is not 1/34 s", gap), line);
        }
        rec.samples.push_back(s);
    }
    if (!header_seen) throw ParseError("missing column header", line);
    if (!have_start || !have_end) throw ParseError("missing '# start_id=' or '# end_id=' comment", line);
    if (rec.samples.empty()) throw ParseError("no samples", line);
    if (need_velocity) fill_velocity_by_differences(rec.samples);
    return rec;
}

TrajectoryRecord read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    return read_csv(in);
}

// ---- accuracy --------------------------------------------------------------

MapeResult mape(std::span<const double> pred, std::span<const double> actual, double exclude_below) {
    if (pred.size() != actual.size()) throw InvalidArgument("mape inputs differ in length");
    MapeResult r;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (std::abs(actual[i]) <= exclude_below) {
            ++r.excluded;
            continue;
        }
        acc += std::abs(pred[i] - actual[i]) / std::abs(actual[i]);
        ++r.used;
    }
    if (r.used == 0) throw InvalidArgument("mape has no usable (non-zero) reference values");
    r.percent = 100.0 * acc / static_cast<double>(r.used);
    return r;
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) throw InvalidArgument("rmse inputs differ in length");
    if (pred.empty()) throw InvalidArgument("rmse of an empty sequence");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - actual[i]) * (pred[i] - actual[i]);
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

} // namespace gpintent
