// fpcomp command line: seeded experiments over the two-species
// first-passage competition engine, with replayable artifacts.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fpcomp/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct Overrides {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> replicas;
    std::optional<int> box;
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::string> condition;
    std::optional<std::string> law1;
    std::optional<std::string> law2;
    std::optional<int> min_survivors;
};

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON experiment spec");
    cmd->add_option("--seed", ov.seed, "base seed (u64)");
    cmd->add_option("--replicas", ov.replicas, "replica count");
    cmd->add_option("--box", ov.box, "box radius L");
    cmd->add_option("--out", ov.out, "output directory");
    cmd->add_option("--workers", ov.workers, "worker threads");
    cmd->add_option("--condition", ov.condition, "none | g1 | coex");
    cmd->add_option("--law1", ov.law1, "weak-species law as JSON");
    cmd->add_option("--law2", ov.law2, "strong-species law as JSON");
    cmd->add_option("--min-survivors", ov.min_survivors,
                    "run replica blocks until this many conditioned survivors");
}

fpc::ExperimentSpec build_spec(fpc::ExperimentKind kind, const Overrides& ov) {
    fpc::ExperimentSpec spec;
    if (!ov.config_path.empty()) spec = fpc::ExperimentSpec::from_json(read_file(ov.config_path));
    spec.kind = kind;
    if (ov.seed) spec.base_seed = *ov.seed;
    if (ov.replicas) spec.replicas = *ov.replicas;
    if (ov.box) spec.box_radius = *ov.box;
    if (ov.out) spec.out_dir = *ov.out;
    if (ov.workers) spec.workers = *ov.workers;
    if (ov.min_survivors) spec.min_survivors = *ov.min_survivors;
    if (ov.condition) {
        if (*ov.condition == "none") {
            spec.conditioning = fpc::Conditioning::None;
        } else if (*ov.condition == "g1") {
            spec.conditioning = fpc::Conditioning::G1Proxy;
        } else if (*ov.condition == "coex") {
            spec.conditioning = fpc::Conditioning::CoexProxy;
        } else {
            throw std::invalid_argument("unknown condition: " + *ov.condition);
        }
    }
    return spec;
}

int dispatch(fpc::ExperimentKind kind, const Overrides& ov) {
    fpc::ExperimentSpec spec = build_spec(kind, ov);
    // Inline law overrides.
    if (ov.law1 || ov.law2) {
        nlohmann::json patch = nlohmann::json::parse(spec.to_json());
        if (ov.law1) patch["law1"] = nlohmann::json::parse(*ov.law1);
        if (ov.law2) patch["law2"] = nlohmann::json::parse(*ov.law2);
        spec = fpc::ExperimentSpec::from_json(patch.dump());
    }
    const fpc::ExperimentResult res = fpc::run_experiment(spec);
    std::cout << res.summary << "\n";
    std::cout << "artifacts in " << spec.out_dir << ":";
    for (const auto& a : res.artifacts) std::cout << " " << a;
    std::cout << "\nreplay with: fpcomp replay --manifest " << spec.out_dir
              << "/manifest.json --out <dir>\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-passage competition simulator and analysis toolkit"};
    app.require_subcommand(1);

    Overrides ov;
    std::string manifest_path;

    auto* simulate = app.add_subcommand("simulate", "single competition run with event log");
    auto* sweep = app.add_subcommand("sweep", "parameter sweep of escape/coexistence proxies");
    auto* density = app.add_subcommand("density", "strong-species density curves");
    auto* shade = app.add_subcommand("shade", "shade radius R_t estimates");
    auto* shape = app.add_subcommand("shape", "empirical shape / time-constant estimation");
    auto* fluct = app.add_subcommand("fluct", "shape-sandwich fluctuation gaps");
    auto* validate = app.add_subcommand("validate", "analytic assumption report for a law pair");
    auto* replay = app.add_subcommand("replay", "re-run an experiment from its manifest");
    for (auto* cmd : {simulate, sweep, density, shade, shape, fluct, validate})
        add_common(cmd, ov);
    replay->add_option("--manifest", manifest_path, "manifest.json of a previous run")
        ->required();
    replay->add_option("--out", ov.out, "output directory")->required();
    replay->add_option("--workers", ov.workers, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay->parsed()) {
            const nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
            fpc::ExperimentSpec spec =
                fpc::ExperimentSpec::from_json(manifest.at("config").dump());
            spec.out_dir = *ov.out;
            if (ov.workers) spec.workers = *ov.workers;
            const fpc::ExperimentResult res = fpc::run_experiment(spec);
            std::cout << res.summary << "\n";
            return res.exit_code;
        }
        if (simulate->parsed()) return dispatch(fpc::ExperimentKind::SingleRun, ov);
        if (sweep->parsed()) return dispatch(fpc::ExperimentKind::CoexistenceSweep, ov);
        if (density->parsed()) return dispatch(fpc::ExperimentKind::DensityStudy, ov);
        if (shade->parsed()) return dispatch(fpc::ExperimentKind::ShadeStudy, ov);
        if (shape->parsed()) return dispatch(fpc::ExperimentKind::ShapeStudy, ov);
        if (fluct->parsed()) return dispatch(fpc::ExperimentKind::FluctuationStudy, ov);
        if (validate->parsed()) return dispatch(fpc::ExperimentKind::Validate, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
