#include "fpcomp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <nlohmann/json.hpp>

namespace fpc {

namespace {

using nlohmann::json;

// --------------------------------------------------------------- formatting

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --------------------------------------------------------------- law json

json law_json(const PassageLaw& law) {
    if (!law.tag.empty()) {
        // Echo the exact strings the config supplied.
        return json::parse(law.tag);
    }
    json j;
    switch (law.family) {
        case LawFamily::Exponential:
            j["family"] = "exponential";
            j["rate"] = fmt(law.p0);
            break;
        case LawFamily::Uniform:
            j["family"] = "uniform";
            j["a"] = fmt(law.p0);
            j["b"] = fmt(law.p1);
            break;
        case LawFamily::ShiftedExponential:
            j["family"] = "shifted_exponential";
            j["shift"] = fmt(law.p0);
            j["rate"] = fmt(law.p1);
            break;
        case LawFamily::Deterministic:
            j["family"] = "deterministic";
            j["value"] = fmt(law.p0);
            break;
    }
    return j;
}

PassageLaw law_from(const json& j) {
    auto num = [&](const char* key) {
        const auto& v = j.at(key);
        return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
    };
    const std::string family = j.at("family").get<std::string>();
    PassageLaw law;
    if (family == "exponential") {
        law = PassageLaw::exponential(num("rate"));
    } else if (family == "uniform") {
        law = PassageLaw::uniform(num("a"), num("b"));
    } else if (family == "shifted_exponential") {
        law = PassageLaw::shifted_exponential(num("shift"), num("rate"));
    } else if (family == "deterministic") {
        law = PassageLaw::deterministic(num("value"));
    } else {
        throw std::invalid_argument("unknown law family: " + family);
    }
    law.tag = j.dump();
    return law;
}

// --------------------------------------------------------------- workers

void parallel_tasks(int64_t count, int workers, const std::function<void(int64_t)>& task) {
    if (workers <= 1 || count <= 1) {
        for (int64_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int64_t> next{0};
    auto loop = [&]() {
        while (true) {
            const int64_t i = next.fetch_add(1);
            if (i >= count) break;
            task(i);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int64_t>(workers, count);
    pool.reserve(n);
    for (int w = 0; w < n; ++w) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
}

// --------------------------------------------------------------- artifacts

struct ArtifactSink {
    explicit ArtifactSink(std::string dir) : out_dir(std::move(dir)) {}

    std::string out_dir;
    json manifest_entries = json::array();
    std::vector<std::string> names;

    void write(const std::string& name, const std::string& bytes) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.close();
        json e;
        e["name"] = name;
        e["bytes"] = bytes.size();
        e["fnv1a64"] = hex64(fnv1a64(bytes));
        manifest_entries.push_back(e);
        names.push_back(name);
    }
};

std::string site_str(const Site& s) {
    std::string out = "(";
    for (int i = 0; i < s.dim; ++i) {
        out += std::to_string(s.c[i]);
        if (i + 1 < s.dim) out += ",";
    }
    return out + ")";
}

}  // namespace

// --------------------------------------------------------------- spec json

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SingleRun: return "single-run";
        case ExperimentKind::CoexistenceSweep: return "coexistence-sweep";
        case ExperimentKind::DensityStudy: return "density-study";
        case ExperimentKind::ShadeStudy: return "shade-study";
        case ExperimentKind::ShapeStudy: return "shape-study";
        case ExperimentKind::FluctuationStudy: return "fluctuation-study";
        case ExperimentKind::Validate: return "validate";
    }
    return "single-run";
}

ExperimentKind kind_from_name(const std::string& name) {
    for (const auto k : {ExperimentKind::SingleRun, ExperimentKind::CoexistenceSweep,
                         ExperimentKind::DensityStudy, ExperimentKind::ShadeStudy,
                         ExperimentKind::ShapeStudy, ExperimentKind::FluctuationStudy,
                         ExperimentKind::Validate}) {
        if (name == kind_name(k)) return k;
    }
    throw std::invalid_argument("unknown experiment kind: " + name);
}

std::string ExperimentSpec::to_json() const {
    json j;
    j["schema"] = "fpcomp.spec.v1";
    j["kind"] = kind_name(kind);
    j["d"] = d;
    j["box"] = box_radius;
    j["seed"] = base_seed;
    j["replicas"] = replicas;
    j["workers"] = workers;
    j["condition"] = conditioning == Conditioning::None
                         ? "none"
                         : (conditioning == Conditioning::G1Proxy ? "g1" : "coex");
    j["out"] = out_dir;
    j["law1"] = law_json(law1);
    j["law2"] = law_json(law2);
    j["mode"] = mode == CouplingMode::SharedUniform ? "shared" : "independent";
    if (!s1.empty()) j["s1"] = s1;
    if (!s2.empty()) j["s2"] = s2;
    j["stop"] = stop == StopRule::BoxExhausted
                    ? "box-exhausted"
                    : (stop == StopRule::TMax ? "t-max" : "either-reaches-frame");
    if (stop == StopRule::TMax) j["t_max"] = t_max;
    j["keep_event_log"] = keep_event_log;
    if (min_survivors > 0) j["min_survivors"] = min_survivors;
    if (max_attempts > 0) j["max_attempts"] = max_attempts;
    if (!sweep_values.empty()) {
        j["sweep_values"] = sweep_values;
        j["sweep_common_seeds"] = sweep_common_seeds;
    }
    if (!density_t_grid.empty()) j["t_grid"] = density_t_grid;
    j["density_norm"] = density_norm;
    if (!shade_times.empty()) j["shade_times"] = shade_times;
    if (!shade_r_grid.empty()) j["r_grid"] = shade_r_grid;
    if (shade_cover_epsilon > 0) j["cover_epsilon"] = shade_cover_epsilon;
    j["shape_ladder"] = shape_ladder;
    j["shape_replicas"] = shape_replicas;
    j["shape_cover_epsilon"] = shape_cover_epsilon;
    if (shape_both_laws) j["shape_both_laws"] = true;
    if (!fluct_times.empty()) j["fluct_times"] = fluct_times;
    if (!shape_file.empty()) j["shape_file"] = shape_file;
    return j.dump(2);
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentSpec s;
    s.kind = kind_from_name(j.value("kind", "single-run"));
    s.d = j.value("d", 2);
    s.box_radius = j.value("box", 100);
    s.base_seed = j.value("seed", uint64_t{1});
    s.replicas = j.value("replicas", 100);
    s.workers = j.value("workers", 1);
    const std::string cond = j.value("condition", "none");
    s.conditioning = cond == "none" ? Conditioning::None
                                    : (cond == "g1" ? Conditioning::G1Proxy
                                                    : Conditioning::CoexProxy);
    if (cond != "none" && cond != "g1" && cond != "coex")
        throw std::invalid_argument("unknown condition: " + cond);
    s.out_dir = j.value("out", "out");
    if (j.contains("law1")) s.law1 = law_from(j.at("law1"));
    if (j.contains("law2")) s.law2 = law_from(j.at("law2"));
    const std::string mode = j.value("mode", "shared");
    if (mode != "shared" && mode != "independent")
        throw std::invalid_argument("unknown mode: " + mode);
    s.mode = mode == "shared" ? CouplingMode::SharedUniform : CouplingMode::Independent;
    if (j.contains("s1")) s.s1 = j.at("s1").get<std::vector<int32_t>>();
    if (j.contains("s2")) s.s2 = j.at("s2").get<std::vector<int32_t>>();
    const std::string stop = j.value("stop", "box-exhausted");
    if (stop == "box-exhausted") {
        s.stop = StopRule::BoxExhausted;
    } else if (stop == "t-max") {
        s.stop = StopRule::TMax;
    } else if (stop == "either-reaches-frame") {
        s.stop = StopRule::EitherReachesFrame;
    } else {
        throw std::invalid_argument("unknown stop rule: " + stop);
    }
    s.t_max = j.value("t_max", 0.0);
    s.keep_event_log = j.value("keep_event_log", s.kind == ExperimentKind::SingleRun);
    s.min_survivors = j.value("min_survivors", 0);
    s.max_attempts = j.value("max_attempts", 0);
    if (j.contains("sweep_values")) s.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    s.sweep_common_seeds = j.value("sweep_common_seeds", true);
    if (j.contains("t_grid")) s.density_t_grid = j.at("t_grid").get<std::vector<double>>();
    s.density_norm = j.value("density_norm", "l2");
    if (j.contains("shade_times")) s.shade_times = j.at("shade_times").get<std::vector<double>>();
    if (j.contains("r_grid")) s.shade_r_grid = j.at("r_grid").get<std::vector<double>>();
    s.shade_cover_epsilon = j.value("cover_epsilon", 0.0);
    if (j.contains("shape_ladder")) s.shape_ladder = j.at("shape_ladder").get<std::vector<int>>();
    s.shape_replicas = j.value("shape_replicas", 16);
    s.shape_cover_epsilon = j.value("shape_cover_epsilon", 0.5);
    s.shape_both_laws = j.value("shape_both_laws", false);
    if (j.contains("fluct_times")) s.fluct_times = j.at("fluct_times").get<std::vector<double>>();
    s.shape_file = j.value("shape_file", "");
    return s;
}

CompetitionConfig ExperimentSpec::competition_config(uint64_t seed) const {
    CompetitionConfig cfg = CompetitionConfig::two_sources(d, box_radius);
    cfg.law1 = law1;
    cfg.law2 = law2;
    cfg.mode = mode;
    cfg.master_seed = seed;
    cfg.stop = stop;
    cfg.t_max = t_max;
    cfg.keep_event_log = keep_event_log;
    auto to_site = [&](const std::vector<int32_t>& v) {
        Site s = Site::zero(d);
        for (size_t i = 0; i < v.size() && i < static_cast<size_t>(d); ++i)
            s.c[i] = v[i];
        return s;
    };
    if (!s1.empty()) cfg.s1 = to_site(s1);
    if (!s2.empty()) cfg.s2 = to_site(s2);
    return cfg;
}

void ExperimentSpec::validate() const {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("spec: d out of range");
    if (box_radius < 1) throw std::invalid_argument("spec: box must be >= 1");
    if (replicas < 1) throw std::invalid_argument("spec: replicas must be >= 1");
    if (workers < 1) throw std::invalid_argument("spec: workers must be >= 1");
    competition_config(base_seed).validate();
    if (kind == ExperimentKind::CoexistenceSweep && sweep_values.empty())
        throw std::invalid_argument("spec: coexistence-sweep needs sweep_values");
    if (density_norm != "l1" && density_norm != "l2" && density_norm != "linf" &&
        density_norm != "shape")
        throw std::invalid_argument("spec: unknown density_norm " + density_norm);
}

WilsonInterval wilson95(int64_t successes, int64_t trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

MonotonicityReport sweep_monotonicity_report(const SweepResult& result) {
    MonotonicityReport rep;
    rep.exact = result.common_seeds;
    if (!rep.exact) rep.detail = "statistical only (independent seeds per cell)";
    if (result.cells.size() < 2) return rep;
    const size_t replicas = result.cells.front().g1_by_replica.size();
    for (size_t r = 0; r < replicas; ++r) {
        for (size_t c = 1; c < result.cells.size(); ++c) {
            if (result.cells[c - 1].g1_by_replica[r] > result.cells[c].g1_by_replica[r]) {
                rep.monotone = false;
                ++rep.violations;
                if (rep.detail.empty()) {
                    rep.detail = "replica " + std::to_string(r) + " G1 drops between cells " +
                                 std::to_string(c - 1) + " and " + std::to_string(c);
                }
            }
        }
    }
    return rep;
}

// --------------------------------------------------------------- studies

namespace {

Norm norm_by_name(const std::string& name) {
    if (name == "l1") return make_norm_l1();
    if (name == "linf") return make_norm_linf();
    return make_norm_l2();
}

std::vector<double> auto_density_grid(int32_t L) {
    std::vector<double> grid;
    const double lo = 10.0;
    const double hi = 0.95 * L;
    const int count = 32;
    for (int i = 0; i < count; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return grid;
}

std::vector<double> auto_r_grid(int32_t L) {
    std::vector<double> grid;
    for (const double r : {1.0,  2.0,  3.0,  4.0,   6.0,   8.0,   11.0,  16.0,
                           23.0, 32.0, 45.0, 64.0,  91.0,  128.0, 181.0, 256.0}) {
        if (r < L / 2.0) grid.push_back(r);
    }
    return grid;
}

double auto_cover_epsilon(const OccupancySnapshot& snap, double r_max, double configured) {
    if (configured > 0.0) return configured;
    double t_outer = 1.0;
    const Box& box = snap.box;
    for (int64_t idx = 0; idx < box.site_count(); ++idx) {
        if (!snap.occupied_index(idx)) continue;
        t_outer = std::max(t_outer, norm_l2(to_vec(box.site_at(idx))));
    }
    const double eps = (r_max / (2.0 * t_outer)) * (r_max / (2.0 * t_outer));
    return std::clamp(eps, 0.01, 2.0);
}

struct AttemptResult {
    uint64_t seed = 0;
    bool survivor = false;
    bool early_stopped = false;
    GrowthOutcome outcome;
    int64_t ties = 0;
    // Measures (survivors only).
    std::string density_rows;
    std::string fit_row;
    double fit_slope = std::numeric_limits<double>::quiet_NaN();
    std::string shade_rows;
    std::vector<std::pair<double, double>> shade_ratios;  // (t, R_t / t^{3/4})
    std::string fluct_rows;
    std::vector<std::pair<double, double>> fluct_ratios;  // (t, max gap / t)
};

struct StudyMeasures {
    bool density = false;
    bool shade = false;
    bool fluct = false;
};

bool qualifies(const ExperimentSpec& spec, const GrowthOutcome& o) {
    switch (spec.conditioning) {
        case Conditioning::None: return true;
        case Conditioning::G1Proxy: return o.g1_proxy;
        case Conditioning::CoexProxy: return o.coex_proxy;
    }
    return true;
}

ExperimentResult run_conditioned_study(const ExperimentSpec& spec, const StudyMeasures& want) {
    ExperimentResult result;
    ArtifactSink sink{spec.out_dir};

    const std::vector<double> t_grid =
        spec.density_t_grid.empty() ? auto_density_grid(spec.box_radius) : spec.density_t_grid;
    const std::vector<double> r_grid =
        spec.shade_r_grid.empty() ? auto_r_grid(spec.box_radius) : spec.shade_r_grid;

    // Shape norm for fluctuation gaps (and density_norm == "shape").
    std::optional<ShapeEstimate> shape;
    if ((want.fluct && !spec.fluct_times.empty()) || spec.density_norm == "shape") {
        if (!spec.shape_file.empty()) {
            std::ifstream f(spec.shape_file);
            if (!f) throw std::invalid_argument("cannot read shape_file " + spec.shape_file);
            std::string text((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
            shape = shape_from_json(text);
        } else {
            shape = estimate_shape(spec.law1, spec.shape_cover_epsilon, spec.shape_ladder,
                                   spec.shape_replicas,
                                   ReplicaSeedPolicy{spec.base_seed ^ 0x5A5A5A5Aull}, spec.d,
                                   spec.workers);
        }
    }
    const Norm measure_norm =
        spec.density_norm == "shape" ? shape->norm() : norm_by_name(spec.density_norm);
    const Norm shape_norm = shape ? shape->norm() : measure_norm;

    const int64_t target = spec.min_survivors > 0 ? spec.min_survivors : -1;
    const int64_t cap = spec.max_attempts > 0
                            ? spec.max_attempts
                            : (target > 0 ? 50 * std::max<int64_t>(spec.replicas, target)
                                          : spec.replicas);
    const int64_t block = std::max<int64_t>(2 * spec.workers, 8);

    std::vector<AttemptResult> attempts;
    int64_t survivors = 0;
    int64_t processed = 0;
    while (processed < cap) {
        const int64_t batch = (target < 0) ? std::min(cap - processed, cap) /* all at once */
                                           : std::min(block, cap - processed);
        const int64_t base = processed;
        attempts.resize(static_cast<size_t>(base + batch));
        parallel_tasks(batch, spec.workers, [&](int64_t k) {
            const int64_t i = base + k;
            AttemptResult& ar = attempts[static_cast<size_t>(i)];
            ar.seed = spec.base_seed + static_cast<uint64_t>(i);

            // Cheap discard pass for conditioned studies.
            if (spec.conditioning != Conditioning::None) {
                CompetitionConfig probe = spec.competition_config(ar.seed);
                probe.keep_event_log = false;
                probe.stop_when_species1_decided = true;
                const CompetitionTrace t = run_competition(probe);
                if (!t.outcome().g1_proxy) {
                    ar.outcome = t.outcome();
                    ar.ties = t.tie_count();
                    ar.early_stopped = true;
                    ar.survivor = false;
                    return;
                }
            }

            CompetitionConfig cfg = spec.competition_config(ar.seed);
            cfg.keep_event_log = false;
            const CompetitionTrace trace = run_competition(cfg);
            ar.outcome = trace.outcome();
            ar.ties = trace.tie_count();
            ar.survivor = qualifies(spec, trace.outcome());
            if (!ar.survivor) return;

            char buf[256];
            if (want.density) {
                const DensityCurve curve = density_curve(trace, measure_norm, t_grid);
                for (size_t k2 = 0; k2 < curve.t.size(); ++k2) {
                    std::snprintf(buf, sizeof buf, "%lld,%llu,%s,%lld,%lld,%s,%d\n",
                                  static_cast<long long>(i),
                                  static_cast<unsigned long long>(ar.seed),
                                  fmt(curve.t[k2]).c_str(),
                                  static_cast<long long>(curve.strong[k2]),
                                  static_cast<long long>(curve.ball[k2]),
                                  fmt(curve.rho[k2]).c_str(), curve.clipped[k2] ? 1 : 0);
                    ar.density_rows += buf;
                }
                try {
                    const ExponentFit fit = fit_exponent(curve);
                    ar.fit_slope = fit.slope;
                    std::snprintf(buf, sizeof buf, "%lld,%llu,%s,%s,%d,%d\n",
                                  static_cast<long long>(i),
                                  static_cast<unsigned long long>(ar.seed),
                                  fmt(fit.slope).c_str(), fmt(fit.stderr_slope).c_str(), fit.used,
                                  fit.dropped);
                    ar.fit_row = buf;
                } catch (const std::exception&) {
                    std::snprintf(buf, sizeof buf, "%lld,%llu,nan,nan,0,0\n",
                                  static_cast<long long>(i),
                                  static_cast<unsigned long long>(ar.seed));
                    ar.fit_row = buf;
                }
            }
            if (want.shade) {
                for (const double t : spec.shade_times) {
                    const OccupancySnapshot snap = snapshot_at(trace, t);
                    const double eps =
                        auto_cover_epsilon(snap, r_grid.back(), spec.shade_cover_epsilon);
                    const ShadeReport rep = shade_radius(snap, eps, r_grid);
                    const bool valid = rep.answered > 0;
                    std::snprintf(buf, sizeof buf, "%lld,%llu,%s,%s,%d,%lld,%lld,%s,%d\n",
                                  static_cast<long long>(i),
                                  static_cast<unsigned long long>(ar.seed), fmt(t).c_str(),
                                  fmt(rep.shade_radius).c_str(), rep.directions_tested,
                                  static_cast<long long>(rep.answered),
                                  static_cast<long long>(rep.unanswerable),
                                  fmt(rep.cover_epsilon).c_str(), valid ? 1 : 0);
                    ar.shade_rows += buf;
                    if (valid)
                        ar.shade_ratios.emplace_back(t, rep.shade_radius / std::pow(t, 0.75));
                }
            }
            if (want.fluct) {
                for (const double t : spec.fluct_times) {
                    const OccupancySnapshot snap = snapshot_at(trace, t);
                    const FluctuationGap gap = fluctuation_gap(snap, shape_norm);
                    std::snprintf(buf, sizeof buf, "%lld,%llu,%s,%s,%s,%d\n",
                                  static_cast<long long>(i),
                                  static_cast<unsigned long long>(ar.seed), fmt(t).c_str(),
                                  fmt(gap.inner_defect).c_str(), fmt(gap.outer_excess).c_str(),
                                  gap.valid ? 1 : 0);
                    ar.fluct_rows += buf;
                    if (gap.valid)
                        ar.fluct_ratios.emplace_back(
                            t, std::max(gap.inner_defect, gap.outer_excess) / t);
                }
            }
        });
        processed += batch;
        survivors = 0;
        for (int64_t i = 0; i < processed; ++i)
            if (attempts[static_cast<size_t>(i)].survivor) ++survivors;
        if (target < 0) break;           // fixed attempt count
        if (survivors >= target) break;  // enough conditioned runs
    }

    // Assemble artifacts in attempt order: byte-stable across schedules.
    std::string runs_csv =
        "# fpcomp csv v1 runs\nattempt,seed,g1,g2,coex,count1,count2,ties,clipped,survivor,"
        "early_stopped\n";
    {
        char buf[256];
        for (int64_t i = 0; i < processed; ++i) {
            const AttemptResult& ar = attempts[static_cast<size_t>(i)];
            std::snprintf(
                buf, sizeof buf, "%lld,%llu,%d,%d,%d,%lld,%lld,%lld,%d,%d,%d\n",
                static_cast<long long>(i), static_cast<unsigned long long>(ar.seed),
                ar.outcome.g1_proxy ? 1 : 0, ar.outcome.g2_proxy ? 1 : 0,
                ar.outcome.coex_proxy ? 1 : 0, static_cast<long long>(ar.outcome.final_count1),
                static_cast<long long>(ar.outcome.final_count2), static_cast<long long>(ar.ties),
                ar.outcome.boundary_clipped ? 1 : 0, ar.survivor ? 1 : 0,
                ar.early_stopped ? 1 : 0);
            runs_csv += buf;
        }
    }
    sink.write("runs.csv", runs_csv);

    json summary;
    summary["kind"] = kind_name(spec.kind);
    summary["attempts"] = processed;
    summary["survivors"] = survivors;
    summary["discarded"] = processed - survivors;

    if (want.density) {
        std::string csv =
            "# fpcomp csv v1 density\nattempt,seed,t,strong,ball,rho,clipped\n";
        std::string fits = "# fpcomp csv v1 density_fits\nattempt,seed,slope,stderr,used,dropped\n";
        std::vector<double> slopes;
        for (int64_t i = 0; i < processed; ++i) {
            const AttemptResult& ar = attempts[static_cast<size_t>(i)];
            csv += ar.density_rows;
            fits += ar.fit_row;
            if (ar.survivor && std::isfinite(ar.fit_slope)) slopes.push_back(ar.fit_slope);
        }
        sink.write("density.csv", csv);
        sink.write("density_fits.csv", fits);
        summary["density_median_slope"] = median(slopes);
        summary["density_fitted_runs"] = slopes.size();
    }
    if (want.shade) {
        std::string csv =
            "# fpcomp csv v1 shade\nattempt,seed,t,shade_radius,directions,answered,"
            "unanswerable,cover_epsilon,valid\n";
        std::map<double, std::vector<double>> by_t;
        for (int64_t i = 0; i < processed; ++i) {
            const AttemptResult& ar = attempts[static_cast<size_t>(i)];
            csv += ar.shade_rows;
            for (const auto& [t, ratio] : ar.shade_ratios) by_t[t].push_back(ratio);
        }
        sink.write("shade.csv", csv);
        json med = json::object();
        for (auto& [t, ratios] : by_t) med[fmt(t)] = median(ratios);
        summary["shade_ratio_medians"] = med;  // median of R_t / t^{3/4} per t
    }
    if (want.fluct) {
        std::string csv =
            "# fpcomp csv v1 fluct\nattempt,seed,t,inner_defect,outer_excess,valid\n";
        std::map<double, std::vector<double>> by_t;
        for (int64_t i = 0; i < processed; ++i) {
            const AttemptResult& ar = attempts[static_cast<size_t>(i)];
            csv += ar.fluct_rows;
            for (const auto& [t, ratio] : ar.fluct_ratios) by_t[t].push_back(ratio);
        }
        sink.write("fluct.csv", csv);
        json med = json::object();
        for (auto& [t, ratios] : by_t) med[fmt(t)] = median(ratios);
        summary["fluct_ratio_medians"] = med;  // median of max-gap / t per t
    }
    if (shape) sink.write("shape_law1.json", shape_to_json(*shape));

    result.survivors = survivors;
    result.discarded = processed - survivors;
    if (spec.conditioning != Conditioning::None && survivors == 0) {
        result.exit_code = 3;
        summary["outcome"] = "insufficient survivors";
    }

    json manifest;
    manifest["schema"] = "fpcomp.manifest.v1";
    manifest["tool"] = kToolVersion;
    manifest["config"] = json::parse(spec.to_json());
    manifest["summary"] = summary;
    manifest["artifacts"] = sink.manifest_entries;
    sink.write("manifest.json", manifest.dump(2));

    result.artifacts = sink.names;
    result.summary = summary.dump(2);
    return result;
}

ExperimentResult run_single(const ExperimentSpec& spec) {
    ExperimentResult result;
    ArtifactSink sink{spec.out_dir};
    CompetitionConfig cfg = spec.competition_config(spec.base_seed);
    cfg.keep_event_log = true;
    const CompetitionTrace trace = run_competition(cfg);
    sink.write("trace.jsonl", trace.export_jsonl());

    const auto [n1, n2] = trace.counts_at(std::numeric_limits<double>::infinity());
    json summary;
    summary["kind"] = "single-run";
    summary["seed"] = spec.base_seed;
    summary["g1"] = trace.outcome().g1_proxy;
    summary["g2"] = trace.outcome().g2_proxy;
    summary["coex"] = trace.outcome().coex_proxy;
    summary["count1"] = n1;
    summary["count2"] = n2;
    summary["ties"] = trace.tie_count();
    summary["events"] = trace.events().size();
    summary["s1"] = site_str(cfg.s1);
    summary["s2"] = site_str(cfg.s2);
    sink.write("summary.json", summary.dump(2));

    json manifest;
    manifest["schema"] = "fpcomp.manifest.v1";
    manifest["tool"] = kToolVersion;
    manifest["config"] = json::parse(spec.to_json());
    manifest["summary"] = summary;
    manifest["artifacts"] = sink.manifest_entries;
    sink.write("manifest.json", manifest.dump(2));

    result.artifacts = sink.names;
    result.summary = summary.dump(2);
    result.survivors = 1;
    return result;
}

ExperimentResult run_sweep(const ExperimentSpec& spec) {
    ExperimentResult result;
    ArtifactSink sink{spec.out_dir};

    SweepResult sweep;
    sweep.common_seeds = spec.sweep_common_seeds && spec.mode == CouplingMode::SharedUniform;
    sweep.cells.resize(spec.sweep_values.size());

    const int64_t cells = static_cast<int64_t>(spec.sweep_values.size());
    const int64_t total = cells * spec.replicas;
    std::vector<GrowthOutcome> outcomes(static_cast<size_t>(total));
    std::vector<int64_t> ties(static_cast<size_t>(total), 0);
    std::vector<uint64_t> seeds(static_cast<size_t>(total), 0);

    parallel_tasks(total, spec.workers, [&](int64_t task) {
        const int64_t c = task / spec.replicas;
        const int64_t r = task % spec.replicas;
        const uint64_t seed = sweep.common_seeds
                                  ? spec.base_seed + static_cast<uint64_t>(r)
                                  : spec.base_seed + 0x100000ull * static_cast<uint64_t>(c) +
                                        static_cast<uint64_t>(r);
        PassageLaw weak = spec.law1;
        weak.p0 = spec.sweep_values[static_cast<size_t>(c)];
        weak.tag.clear();
        CompetitionConfig cfg = spec.competition_config(seed);
        cfg.law1 = weak;
        cfg.keep_event_log = false;
        const CompetitionTrace trace = run_competition(cfg);
        outcomes[static_cast<size_t>(task)] = trace.outcome();
        ties[static_cast<size_t>(task)] = trace.tie_count();
        seeds[static_cast<size_t>(task)] = seed;
    });

    std::string csv = "# fpcomp csv v1 sweep\ncell,p,replica,seed,g1,g2,coex,count1,count2,ties\n";
    char buf[256];
    for (int64_t c = 0; c < cells; ++c) {
        SweepCell& cell = sweep.cells[static_cast<size_t>(c)];
        cell.value = spec.sweep_values[static_cast<size_t>(c)];
        cell.replicas = spec.replicas;
        cell.g1_by_replica.resize(static_cast<size_t>(spec.replicas), 0);
        for (int64_t r = 0; r < spec.replicas; ++r) {
            const auto& o = outcomes[static_cast<size_t>(c * spec.replicas + r)];
            cell.g1 += o.g1_proxy;
            cell.g2 += o.g2_proxy;
            cell.coex += o.coex_proxy;
            cell.g1_by_replica[static_cast<size_t>(r)] = o.g1_proxy ? 1 : 0;
            std::snprintf(buf, sizeof buf, "%lld,%s,%lld,%llu,%d,%d,%d,%lld,%lld,%lld\n",
                          static_cast<long long>(c), fmt(cell.value).c_str(),
                          static_cast<long long>(r),
                          static_cast<unsigned long long>(
                              seeds[static_cast<size_t>(c * spec.replicas + r)]),
                          o.g1_proxy ? 1 : 0, o.g2_proxy ? 1 : 0, o.coex_proxy ? 1 : 0,
                          static_cast<long long>(o.final_count1),
                          static_cast<long long>(o.final_count2),
                          static_cast<long long>(ties[static_cast<size_t>(c * spec.replicas + r)]));
            csv += buf;
        }
        cell.g1_ci = wilson95(cell.g1, cell.replicas);
        cell.g2_ci = wilson95(cell.g2, cell.replicas);
        cell.coex_ci = wilson95(cell.coex, cell.replicas);
    }
    sink.write("sweep.csv", csv);

    const MonotonicityReport mono = sweep_monotonicity_report(sweep);
    json summary;
    summary["kind"] = "coexistence-sweep";
    json jcells = json::array();
    for (const SweepCell& cell : sweep.cells) {
        json jc;
        jc["p"] = cell.value;
        jc["replicas"] = cell.replicas;
        jc["g1_hat"] = static_cast<double>(cell.g1) / cell.replicas;
        jc["g2_hat"] = static_cast<double>(cell.g2) / cell.replicas;
        jc["coex_hat"] = static_cast<double>(cell.coex) / cell.replicas;
        jc["g1_wilson95"] = {cell.g1_ci.lo, cell.g1_ci.hi};
        jc["g2_wilson95"] = {cell.g2_ci.lo, cell.g2_ci.hi};
        jc["coex_wilson95"] = {cell.coex_ci.lo, cell.coex_ci.hi};
        jcells.push_back(jc);
    }
    summary["cells"] = jcells;
    summary["monotonicity"] = {{"exact", mono.exact},
                               {"monotone", mono.monotone},
                               {"violations", mono.violations},
                               {"detail", mono.detail}};
    json manifest;
    manifest["schema"] = "fpcomp.manifest.v1";
    manifest["tool"] = kToolVersion;
    manifest["config"] = json::parse(spec.to_json());
    manifest["summary"] = summary;
    manifest["artifacts"] = sink.manifest_entries;
    sink.write("manifest.json", manifest.dump(2));

    result.artifacts = sink.names;
    result.summary = summary.dump(2);
    result.survivors = total;
    return result;
}

ExperimentResult run_shape_study(const ExperimentSpec& spec) {
    ExperimentResult result;
    ArtifactSink sink{spec.out_dir};
    const ShapeEstimate s1 =
        estimate_shape(spec.law1, spec.shape_cover_epsilon, spec.shape_ladder, spec.shape_replicas,
                       ReplicaSeedPolicy{spec.base_seed}, spec.d, spec.workers);
    sink.write("shape_law1.json", shape_to_json(s1));
    json summary;
    summary["kind"] = "shape-study";
    summary["law1_directions"] = s1.directions.size();
    if (spec.shape_both_laws) {
        const ShapeEstimate s2 = estimate_shape(spec.law2, spec.shape_cover_epsilon,
                                                spec.shape_ladder, spec.shape_replicas,
                                                ReplicaSeedPolicy{spec.base_seed}, spec.d,
                                                spec.workers);
        sink.write("shape_law2.json", shape_to_json(s2));
        summary["law2_directions"] = s2.directions.size();
    }
    json manifest;
    manifest["schema"] = "fpcomp.manifest.v1";
    manifest["tool"] = kToolVersion;
    manifest["config"] = json::parse(spec.to_json());
    manifest["summary"] = summary;
    manifest["artifacts"] = sink.manifest_entries;
    sink.write("manifest.json", manifest.dump(2));
    result.artifacts = sink.names;
    result.summary = summary.dump(2);
    return result;
}

ExperimentResult run_validate(const ExperimentSpec& spec) {
    ExperimentResult result;
    ArtifactSink sink{spec.out_dir};
    const AssumptionReport rep = validate_assumptions(spec.law1, spec.law2, spec.d);
    json j;
    j["kind"] = "validate";
    j["law1"] = law_json(spec.law1);
    j["law2"] = law_json(spec.law2);
    j["h1_ordered"] = rep.h1_ordered;
    j["h2_no_ties"] = tri_name(rep.h2_no_ties);
    j["h3_atom_below_pc"] = rep.h3_atom_below_pc;
    j["h4_support_atom_below_dirpc"] = rep.h4_support_atom_below_dirpc;
    j["h5_exp_moment"] = rep.h5_exp_moment;
    j["pc_value_used"] = rep.pc_value_used;
    j["dirpc_value_used"] = rep.dirpc_value_used;
    j["all_pass"] = rep.all_pass();
    sink.write("assumptions.json", j.dump(2));

    json manifest;
    manifest["schema"] = "fpcomp.manifest.v1";
    manifest["tool"] = kToolVersion;
    manifest["config"] = json::parse(spec.to_json());
    manifest["summary"] = j;
    manifest["artifacts"] = sink.manifest_entries;
    sink.write("manifest.json", manifest.dump(2));
    result.artifacts = sink.names;
    result.summary = j.dump(2);
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ExperimentKind::SingleRun:
            return run_single(spec);
        case ExperimentKind::CoexistenceSweep:
            return run_sweep(spec);
        case ExperimentKind::DensityStudy:
            return run_conditioned_study(spec, StudyMeasures{true, false, false});
        case ExperimentKind::ShadeStudy:
            return run_conditioned_study(spec, StudyMeasures{false, true, false});
        case ExperimentKind::FluctuationStudy:
            return run_conditioned_study(spec, StudyMeasures{false, false, true});
        case ExperimentKind::ShapeStudy:
            return run_shape_study(spec);
        case ExperimentKind::Validate:
            return run_validate(spec);
    }
    throw std::logic_error("unhandled experiment kind");
}

}  // namespace fpc
