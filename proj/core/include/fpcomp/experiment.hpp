#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpcomp/analysis.hpp"
#include "fpcomp/competition.hpp"

namespace fpc {

inline constexpr const char* kToolVersion = "fpcomp 1.0.0";

enum class ExperimentKind {
    SingleRun,
    CoexistenceSweep,
    DensityStudy,
    ShadeStudy,
    ShapeStudy,
    FluctuationStudy,
    Validate,
};

enum class Conditioning { None, G1Proxy, CoexProxy };

/// Fully resolved experiment description. Serializes to/from the JSON
/// config format; CLI flags override individual fields.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::SingleRun;
    int d = 2;
    int32_t box_radius = 100;
    uint64_t base_seed = 1;
    int replicas = 100;
    int workers = 1;
    Conditioning conditioning = Conditioning::None;
    std::string out_dir = "out";

    PassageLaw law1 = PassageLaw::exponential(1.0);
    PassageLaw law2 = PassageLaw::exponential(1.5);
    CouplingMode mode = CouplingMode::SharedUniform;
    std::vector<int32_t> s1{};  // defaults to 0 and e1 when empty
    std::vector<int32_t> s2{};
    StopRule stop = StopRule::BoxExhausted;
    double t_max = 0.0;
    bool keep_event_log = false;

    // Conditioned studies: keep running replica blocks until this many
    // survivors (bounded by max_attempts); 0 means replicas attempts total.
    int min_survivors = 0;
    int max_attempts = 0;  // 0: 50x replicas

    // coexistence-sweep
    std::vector<double> sweep_values;      // applied to law1's leading parameter
    bool sweep_common_seeds = true;        // same replica seeds in every cell

    // density-study
    std::vector<double> density_t_grid;    // ball radii; empty: auto
    std::string density_norm = "l2";       // l1 | l2 | linf

    // shade-study
    std::vector<double> shade_times;
    std::vector<double> shade_r_grid;      // empty: auto ladder
    double shade_cover_epsilon = 0.0;      // 0: auto from r/t_outer

    // shape-study
    std::vector<int> shape_ladder{50, 100, 200, 300};
    int shape_replicas = 16;
    double shape_cover_epsilon = 0.5;
    bool shape_both_laws = false;

    // fluctuation-study
    std::vector<double> fluct_times;
    std::string shape_file;  // optional precomputed shape for the weak law

    std::string to_json() const;
    static ExperimentSpec from_json(const std::string& text);

    CompetitionConfig competition_config(uint64_t seed) const;
    void validate() const;
};

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};
WilsonInterval wilson95(int64_t successes, int64_t trials);

struct SweepCell {
    double value = 0.0;
    int64_t replicas = 0;
    int64_t g1 = 0, g2 = 0, coex = 0;
    WilsonInterval g1_ci, g2_ci, coex_ci;
    std::vector<uint8_t> g1_by_replica;  // for replica-wise monotonicity
};

struct SweepResult {
    std::vector<SweepCell> cells;
    bool common_seeds = false;
};

struct MonotonicityReport {
    bool exact = false;        // shared seeds: replica-wise assertion applies
    bool monotone = true;      // every replica's G1 indicator non-decreasing
    int violations = 0;
    std::string detail;
};

MonotonicityReport sweep_monotonicity_report(const SweepResult& result);

/// Outcome of run_experiment: exit code semantics follow the CLI contract
/// (0 ok, 2 validation failure, 3 insufficient survivors).
struct ExperimentResult {
    int exit_code = 0;
    std::string summary;                  // human-readable, printed by the CLI
    std::vector<std::string> artifacts;   // paths written, relative to out_dir
    int64_t survivors = 0;
    int64_t discarded = 0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace fpc
