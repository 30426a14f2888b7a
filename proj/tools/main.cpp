#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptrack/config.hpp"
#include "ptrack/io.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/overlay.hpp"
#include "ptrack/synth.hpp"
#include "ptrack/tracker.hpp"

namespace {

using nlohmann::json;

ptrack::ScenarioConfig scenario_from_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ptrack::ParseError(path.string() + ": cannot open scenario file");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ptrack::ParseError(path.string() + ": " + e.what());
    }
    const std::string ctx = path.string() + ": ";
    ptrack::ScenarioConfig cfg;
    auto number = [&](const char* key, double fallback) {
        if (!root.contains(key)) return fallback;
        if (!root[key].is_number()) throw ptrack::ParseError(ctx + std::string(key) + " must be a number");
        return root[key].get<double>();
    };
    cfg.frames = static_cast<std::int64_t>(number("frames", 30));
    cfg.width = static_cast<int>(number("width", 960));
    cfg.height = static_cast<int>(number("height", 540));
    cfg.noise_sigma = number("noise_sigma", 0.5);
    cfg.feature_separation = number("feature_separation", 500.0);
    cfg.feature_dim = static_cast<int>(number("feature_dim", 32));
    cfg.seed = static_cast<std::uint64_t>(number("seed", 1));

    if (!root.contains("agents") || !root["agents"].is_array() || root["agents"].empty()) {
        throw ptrack::ParseError(ctx + "'agents' must be a non-empty array");
    }
    for (const auto& a : root["agents"]) {
        ptrack::AgentSpec agent;
        agent.scale = a.value("scale", 120.0);
        if (a.contains("path")) {
            const auto& p = a["path"];
            const std::string kind = p.value("kind", std::string("linear"));
            if (kind == "linear") {
                agent.path.kind = ptrack::MotionPath::Kind::linear;
            } else if (kind == "sinusoidal") {
                agent.path.kind = ptrack::MotionPath::Kind::sinusoidal;
            } else {
                throw ptrack::ParseError(ctx + "path kind must be linear or sinusoidal");
            }
            if (p.contains("start")) {
                agent.path.start = {p["start"][0].get<double>(), p["start"][1].get<double>()};
            }
            if (p.contains("velocity")) {
                agent.path.velocity = {p["velocity"][0].get<double>(),
                                       p["velocity"][1].get<double>()};
            }
            agent.path.amplitude = p.value("amplitude", 0.0);
            agent.path.period = p.value("period", 60.0);
            agent.path.phase = p.value("phase", 0.0);
        }
        cfg.agents.push_back(agent);
    }
    auto read_events = [&](const char* key, auto& target, bool with_joints) {
        if (!root.contains(key)) return;
        if (!root[key].is_array()) throw ptrack::ParseError(ctx + std::string(key) + " must be an array");
        for (const auto& e : root[key]) {
            auto& ev = target.emplace_back();
            ev.agent = e.value("agent", 0);
            ev.from = e.value("from", std::int64_t{0});
            ev.to = e.value("to", std::int64_t{0});
            if (with_joints) {
                if constexpr (requires { ev.joints; }) {
                    if (e.contains("joints")) {
                        for (const auto& j : e["joints"]) ev.joints.push_back(j.get<int>());
                    }
                }
            }
        }
    };
    read_events("dropouts", cfg.dropouts, false);
    read_events("absences", cfg.absences, false);
    read_events("occlusions", cfg.occlusions, true);
    read_events("blurs", cfg.blurs, true);
    cfg.validate();
    return cfg;
}

struct TrackArgs {
    std::string detections;
    std::string config_path;
    std::string flow_dir;
    std::string features_path;
    std::string out;
    bool disable_revision = false;
    bool disable_reid = false;
    bool ignore_availability = false;
};

int run_track(const TrackArgs& args) {
    ptrack::RunConfig cfg;
    if (!args.config_path.empty()) cfg = ptrack::load_run_config(args.config_path);
    if (args.disable_revision) cfg.tracker.enable_revision = false;
    if (args.disable_reid) cfg.tracker.enable_reid = false;
    if (args.ignore_availability) cfg.ignore_availability = true;

    const auto doc = ptrack::load_annotations(args.detections);
    auto obs = ptrack::observations_from_document(doc, cfg.ignore_availability);
    if (!args.features_path.empty()) {
        ptrack::attach_features(obs, ptrack::load_features(args.features_path));
    }

    std::shared_ptr<const ptrack::FlowProvider> provider;
    if (!args.flow_dir.empty()) {
        provider = std::make_shared<ptrack::DenseFileFlowProvider>(args.flow_dir);
    } else if (cfg.flow_provider == "constant_velocity") {
        provider = std::make_shared<ptrack::ConstantVelocityFlowProvider>();
    } else if (cfg.flow_provider == "file") {
        throw ptrack::ParseError("config selects the file flow provider but no --flow-dir given");
    } else {
        provider = std::make_shared<ptrack::IdentityFlowProvider>();
    }

    const auto spec = doc.skeleton();
    const auto result = ptrack::run(obs, spec, cfg.tracker, provider);
    ptrack::save_annotations(ptrack::document_from_tracks(result, doc.images, spec), args.out);
    return 0;
}

struct EvalArgs {
    std::string predictions;
    std::string gt;
    std::string config_path;
    std::string out_prefix;
    double tau = -1.0;
};

int run_eval(const EvalArgs& args) {
    ptrack::RunConfig cfg;
    if (!args.config_path.empty()) cfg = ptrack::load_run_config(args.config_path);
    const double tau = args.tau > 0.0 ? args.tau : cfg.tau_factor;

    const auto gt_doc = ptrack::load_annotations(args.gt);
    const auto pred_doc = ptrack::load_annotations(args.predictions);
    if (pred_doc.joint_count() != gt_doc.joint_count()) {
        throw ptrack::ParseError("predictions and ground truth use different joint counts");
    }
    const auto spec = gt_doc.skeleton();
    const auto gts = ptrack::ground_truth_from_document(gt_doc);
    const auto preds = ptrack::predictions_from_document(pred_doc);

    const auto mota_report = ptrack::mota(preds, gts, spec, tau);
    const auto ap_report = ptrack::map_eval(preds, gts, spec, tau);
    const std::string text = ptrack::report_text(mota_report, ap_report, spec);
    std::cout << text;
    if (!args.out_prefix.empty()) {
        {
            std::ofstream out(args.out_prefix + ".txt", std::ios::binary);
            if (!out) throw ptrack::ParseError(args.out_prefix + ".txt: cannot open for writing");
            out << text;
        }
        std::ofstream out(args.out_prefix + ".json", std::ios::binary);
        if (!out) throw ptrack::ParseError(args.out_prefix + ".json: cannot open for writing");
        out << ptrack::report_json(mota_report, ap_report, spec);
    }
    return 0;
}

struct SynthArgs {
    std::string preset;
    std::string scenario_path;
    std::string out;
    std::uint64_t seed = 1;
    bool seed_given = false;
};

int run_synth(const SynthArgs& args) {
    ptrack::ScenarioConfig cfg;
    if (!args.scenario_path.empty()) {
        cfg = scenario_from_json(args.scenario_path);
        if (args.seed_given) cfg.seed = args.seed;
    } else {
        const std::uint64_t seed = args.seed;
        if (args.preset == "clean") {
            cfg = ptrack::clean_scenario(seed);
        } else if (args.preset == "dropout") {
            cfg = ptrack::dropout_scenario(seed);
        } else if (args.preset == "reentry") {
            cfg = ptrack::reentry_scenario(seed);
        } else if (args.preset == "occlusion") {
            cfg = ptrack::occlusion_scenario(seed);
        } else if (args.preset == "crossing") {
            cfg = ptrack::crossing_scenario(seed);
        } else {
            throw ptrack::ParseError("unknown preset '" + args.preset +
                                     "' (clean, dropout, reentry, occlusion, crossing)");
        }
    }
    ptrack::write_bundle(ptrack::generate(cfg), args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-person pose tracking engine"};
    app.require_subcommand(1);

    TrackArgs track_args;
    auto* track_cmd = app.add_subcommand("track", "run the tracking pipeline over detections");
    track_cmd->add_option("detections", track_args.detections, "detections annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    track_cmd->add_option("--config", track_args.config_path, "run config file")
        ->check(CLI::ExistingFile);
    track_cmd->add_option("--flow-dir", track_args.flow_dir, "directory of flow_*.bin files")
        ->check(CLI::ExistingDirectory);
    track_cmd->add_option("--features", track_args.features_path, "appearance feature file")
        ->check(CLI::ExistingFile);
    track_cmd->add_option("--out", track_args.out, "output annotation file")->required();
    track_cmd->add_flag("--disable-revision", track_args.disable_revision,
                        "skip the box revision stage");
    track_cmd->add_flag("--disable-reid", track_args.disable_reid,
                        "skip identity retrieval");
    track_cmd->add_flag("--ignore-availability", track_args.ignore_availability,
                        "treat availability as 1 (location-only confidence)");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval_cmd->add_option("predictions", eval_args.predictions, "prediction annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("gt", eval_args.gt, "ground truth annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--config", eval_args.config_path, "run config file")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--tau", eval_args.tau,
                         "acceptance radius as a fraction of head length");
    eval_cmd->add_option("--out", eval_args.out_prefix,
                         "write <prefix>.txt and <prefix>.json reports");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario bundle");
    auto* preset_opt =
        synth_cmd->add_option("--preset", synth_args.preset,
                              "clean, dropout, reentry, occlusion or crossing");
    synth_cmd->add_option("--scenario", synth_args.scenario_path, "scenario JSON file")
        ->excludes(preset_opt)
        ->check(CLI::ExistingFile);
    auto* seed_opt = synth_cmd->add_option("--seed", synth_args.seed, "random seed");
    synth_cmd->add_option("--out", synth_args.out, "output directory")->required();

    std::string overlay_annotations, overlay_out;
    auto* overlay_cmd = app.add_subcommand("overlay", "render per-frame skeleton overlays");
    overlay_cmd->add_option("annotations", overlay_annotations, "annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    overlay_cmd->add_option("--out", overlay_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*track_cmd) return run_track(track_args);
        if (*eval_cmd) return run_eval(eval_args);
        if (*synth_cmd) {
            if (synth_args.preset.empty() && synth_args.scenario_path.empty()) {
                std::cerr << "error: synth needs --preset or --scenario\n";
                return 1;
            }
            synth_args.seed_given = seed_opt->count() > 0;
            return run_synth(synth_args);
        }
        if (*overlay_cmd) {
            ptrack::write_overlays(ptrack::load_annotations(overlay_annotations), overlay_out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
