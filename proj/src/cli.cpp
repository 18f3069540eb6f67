#include "mgpi/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <json.hpp>

#include "mgpi/batch.hpp"
#include "mgpi/geometry.hpp"
#include "mgpi/gradcheck.hpp"
#include "mgpi/groups.hpp"
#include "mgpi/io.hpp"
#include "mgpi/model.hpp"
#include "mgpi/rng.hpp"
#include "mgpi/sim.hpp"
#include "mgpi/svg.hpp"
#include "mgpi/train.hpp"

namespace mgpi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

/// Default output location honors MGPI_OUT_DIR when the flag is left unset.
fs::path resolve_out(const std::string& flag_value, const std::string& default_name) {
    if (!flag_value.empty()) return flag_value;
    if (const char* dir = std::getenv("MGPI_OUT_DIR")) return fs::path(dir) / default_name;
    return default_name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

Vec2 parse_vec2(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("expected 'x,y' pair, got " + s);
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("expected 'x,y' pair, got " + s);
    }
}

void add_rule_flags(CLI::App* cmd, sim::RuleParams& r, sim::LayoutGenParams& g) {
    cmd->add_option("--p-distract", r.p_distract, "Listener distraction probability per step");
    cmd->add_option("--distract-trigger-steps", r.distract_trigger_steps,
                    "Distracted steps before strong addressing may trigger");
    cmd->add_option("--p-strong-address", r.p_strong_address,
                    "Strong-address trigger probability per step once eligible");
    cmd->add_option("--p-return-addressed", r.p_return_addressed,
                    "Return probability per step while strongly addressed");
    cmd->add_option("--p-return-spontaneous", r.p_return_spontaneous,
                    "Spontaneous return probability per step");
    cmd->add_option("--speak-min", r.speak_duration_min, "Minimum speaking turn length");
    cmd->add_option("--speak-max", r.speak_duration_max, "Maximum speaking turn length");
    cmd->add_option("--p-weak-address", r.p_weak_address, "Weak-address probability per step");
    cmd->add_option("--weak-min", r.weak_address_min, "Minimum weak-address length");
    cmd->add_option("--weak-max", r.weak_address_max, "Maximum weak-address length");
    cmd->add_option("--respond-duration", r.respond_duration, "Responding duration in steps");
    cmd->add_option("--p-move", r.p_move, "Move probability per step (dynamic scenario)");
    cmd->add_option("--move-speed", r.move_speed, "Movement speed, scene units per step");
    cmd->add_option("--arrive-epsilon", r.arrive_epsilon, "Arrival distance threshold");
    cmd->add_option("--join-radius", r.join_radius, "Join circle radius around the target group");
    cmd->add_option("--n-groups-min", g.n_groups_min, "Minimum generated group count");
    cmd->add_option("--n-groups-max", g.n_groups_max, "Maximum generated group count");
    cmd->add_option("--group-size-min", g.group_size_min, "Minimum generated group size");
    cmd->add_option("--group-size-max", g.group_size_max, "Maximum generated group size");
    cmd->add_option("--group-radius", g.group_radius, "Generated group circle radius");
    cmd->add_option("--center-spacing", g.center_spacing, "Spacing between generated group centers");
    cmd->add_option("--jitter", g.jitter, "Positional jitter for generated layouts");
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    int generate = 0;
    std::string layouts_dir;
    std::string scenario = "static";
    int steps = 600;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 1;
    sim::RuleParams rules;
    sim::LayoutGenParams gen;
};

int cmd_simulate(const SimulateArgs& args) {
    const Scenario scenario = scenario_from_name(args.scenario);
    const fs::path out_dir = resolve_out(args.out, "demos");
    fs::create_directories(out_dir);

    std::vector<Layout> layouts;
    std::vector<std::string> layout_files;
    const Rng base(args.seed);
    if (args.generate > 0) {
        for (int i = 0; i < args.generate; ++i) {
            Rng gen_rng = base.fork(2 * static_cast<std::uint64_t>(i));
            layouts.push_back(sim::generate_layout(args.gen, gen_rng));
            char name[32];
            std::snprintf(name, sizeof(name), "layout_%04d.csv", i);
            save_layout(layouts.back(), out_dir / name);
            layout_files.emplace_back(name);
        }
    } else {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(args.layouts_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw std::runtime_error("no *.csv layouts in " + args.layouts_dir);
        for (const auto& f : files) {
            layouts.push_back(load_layout(f));
            layout_files.push_back(f.filename().string());
        }
    }

    const int n = static_cast<int>(layouts.size());
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) seeds[static_cast<std::size_t>(i)] = base.fork(2 * static_cast<std::uint64_t>(i) + 1).seed();

    auto run_one = [&](int i) {
        const Demonstration demo =
            sim::rollout(layouts[static_cast<std::size_t>(i)], scenario, args.steps, args.rules,
                         seeds[static_cast<std::size_t>(i)]);
        char name[32];
        std::snprintf(name, sizeof(name), "demo_%04d.jsonl", i);
        save_demonstration(demo, out_dir / name);
        return std::string(name);
    };

    std::vector<std::string> demo_files(static_cast<std::size_t>(n));
    if (args.jobs <= 1) {
        for (int i = 0; i < n; ++i) demo_files[static_cast<std::size_t>(i)] = run_one(i);
    } else {
        std::vector<std::future<std::string>> futures;
        futures.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            futures.push_back(std::async(std::launch::async, run_one, i));
        for (int i = 0; i < n; ++i) demo_files[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
    }

    json manifest;
    manifest["format_version"] = 1;
    manifest["scenario"] = args.scenario;
    manifest["steps"] = args.steps;
    manifest["seed"] = args.seed;
    json episodes = json::array();
    for (int i = 0; i < n; ++i) {
        episodes.push_back({{"demo", demo_files[static_cast<std::size_t>(i)]},
                            {"layout", layout_files[static_cast<std::size_t>(i)]},
                            {"seed", seeds[static_cast<std::size_t>(i)]}});
    }
    manifest["episodes"] = episodes;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(out_dir / "rules.cfg", sim::params_to_kv(args.rules, args.gen));
    std::printf("wrote %d episodes to %s\n", n, out_dir.string().c_str());
    return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
    std::string demos_dir;
    std::string variant = "mgpi";
    train::TrainConfig config;
    std::string out;
};

int cmd_train(const TrainArgs& args) {
    std::vector<Demonstration> demos = load_demonstration_dir(args.demos_dir);
    if (demos.empty()) throw std::runtime_error("no demonstrations in " + args.demos_dir);
    train::TrainConfig tc = args.config;
    tc.variant = model::variant_from_name(args.variant);

    const train::TrainResult result = train::behavior_clone(demos, tc);

    const fs::path out_path = resolve_out(args.out, "model.json");
    model::Checkpoint ckpt{result.net, tc.neighbors, demos.front().scenario};
    model::save_checkpoint(ckpt, out_path);

    fs::path loss_path = out_path;
    loss_path.replace_extension();
    loss_path += ".loss.csv";
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        csv += std::to_string(e + 1) + "," + format_double(result.epoch_loss[e]) + "\n";
    write_text(loss_path, csv);
    std::printf("checkpoint %s  final train loss %.6f\n", out_path.string().c_str(),
                result.epoch_loss.back());
    return kExitOk;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string demos_dir;
    std::string out;
    int neighbors = 0;  // 0 = use checkpoint value
    bool crossval = false;
    train::TrainConfig config;  // used with --crossval
};

json report_to_json_value(const train::EvalReport& r) { return json::parse(r.to_json()); }

int cmd_eval(const EvalArgs& args) {
    const std::vector<Demonstration> demos = load_demonstration_dir(args.demos_dir);
    if (demos.empty()) throw std::runtime_error("no demonstrations in " + args.demos_dir);
    const fs::path out_path = resolve_out(args.out, "report.json");

    if (args.crossval) {
        train::TrainConfig tc = args.config;
        tc.variant = model::variant_from_name(args.model.empty() ? "mgpi" : args.model);
        const train::CrossValReport cv = train::cross_validate(demos, tc);
        json doc;
        doc["fold_a"] = report_to_json_value(cv.fold_a);
        doc["fold_b"] = report_to_json_value(cv.fold_b);
        doc["mean"] = report_to_json_value(cv.mean);
        write_text(out_path, doc.dump(2) + "\n");
        std::printf("crossval mean: ce %.4f acc %.4f mAP %.4f\n", cv.mean.cross_entropy,
                    cv.mean.accuracy, cv.mean.map);
        return kExitOk;
    }

    const model::Checkpoint ckpt = model::load_checkpoint(args.model);
    const int J = args.neighbors > 0 ? args.neighbors : ckpt.neighbors;
    const train::EvalReport report = train::evaluate(ckpt.net, demos, ckpt.net.config.horizon, J);
    write_text(out_path, report.to_json() + "\n");
    fs::path conf_path = out_path;
    conf_path.replace_extension();
    conf_path += ".confusion.csv";
    write_text(conf_path, report.confusion_csv());
    std::printf("ce %.4f acc %.4f mAP %.4f over %lld samples\n", report.cross_entropy,
                report.accuracy, report.map, report.num_samples);
    return kExitOk;
}

// ---- detect / eval-groups ------------------------------------------------------

struct DetectArgs {
    std::string model;
    std::string layout;
    groups::DbscanParams dbscan;
    std::string out;
};

int cmd_detect(const DetectArgs& args) {
    const model::Checkpoint ckpt = model::load_checkpoint(args.model);
    const Layout layout = load_layout(args.layout);
    const groups::GroupPartition partition =
        groups::detect_groups(ckpt.net, layout, args.dbscan, ckpt.net.config.position_scale);
    const fs::path out_path = resolve_out(args.out, "groups.json");
    write_text(out_path, groups::partition_to_json(partition) + "\n");
    std::printf("%zu groups -> %s\n", partition.groups.size(), out_path.string().c_str());
    return kExitOk;
}

struct EvalGroupsArgs {
    std::string pred;
    std::string truth;
    bool include_singletons = false;
};

int cmd_eval_groups(const EvalGroupsArgs& args) {
    const groups::GroupPartition pred = groups::partition_from_json_file(args.pred);
    const groups::GroupPartition truth = groups::partition_from_layout(load_layout(args.truth));
    const groups::GroupScore s = groups::score_groups(pred, truth, args.include_singletons);
    std::printf("%.6f %.6f %.6f\n", s.precision, s.recall, s.f1);
    return kExitOk;
}

// ---- render / attention ---------------------------------------------------------

struct RenderArgs {
    std::string demo;
    int frame = 1;
    std::string out;
};

int cmd_render(const RenderArgs& args) {
    const Demonstration demo = load_demonstration(args.demo);
    if (args.frame < 1 || args.frame > demo.length())
        throw std::runtime_error("frame " + std::to_string(args.frame) + " out of range 1.." +
                                 std::to_string(demo.length()));
    const fs::path out_path = resolve_out(args.out, "frame.svg");
    write_text(out_path, render_frame_svg(demo.frames[static_cast<std::size_t>(args.frame - 1)]));
    std::printf("wrote %s\n", out_path.string().c_str());
    return kExitOk;
}

struct AttentionArgs {
    std::string model;
    int grid = 101;
    double extent = 3.0;  // in multiples of the checkpoint's position scale
    std::string observer_gaze = "-1,0";
    std::string neighbor_gaze = "1,0";
    std::string out;
};

int cmd_attention(const AttentionArgs& args) {
    const model::Checkpoint ckpt = model::load_checkpoint(args.model);
    const double scale = ckpt.net.config.position_scale;
    const double raw_extent = args.extent * scale;
    const nn::MatrixXd map =
        groups::attention_map(ckpt.net, parse_vec2(args.observer_gaze), parse_vec2(args.neighbor_gaze),
                              args.grid, raw_extent, scale);
    const fs::path out_path = resolve_out(args.out, "map.csv");
    write_text(out_path, groups::attention_map_csv(map, raw_extent));
    std::printf("wrote %s (mean gate %.4f)\n", out_path.string().c_str(), map.mean());
    return kExitOk;
}

// ---- gradcheck --------------------------------------------------------------------

int cmd_gradcheck(std::uint64_t seed) {
    bool ok = true;
    for (const model::Variant v :
         {model::Variant::Mgpi, model::Variant::Nso, model::Variant::Sso, model::Variant::Eqpool,
          model::Variant::Socpool}) {
        const model::GradCheckReport report = model::gradient_check(v, seed);
        std::printf("%-8s max rel err %.3e %s\n", model::variant_name(v).c_str(), report.max_rel_err,
                    report.pass ? "ok" : "FAIL");
        for (const auto& [module, err] : report.per_module)
            std::printf("  %-8s %.3e\n", module.c_str(), err);
        ok = ok && report.pass;
    }
    return ok ? kExitOk : kExitCheck;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Multigroup conversation lab: simulate episodes, clone behavior, "
                 "evaluate policies and detect conversational groups"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    // simulate
    SimulateArgs sim_args;
    CLI::App* c_sim = app.add_subcommand("simulate", "Generate demonstration episodes");
    c_sim->add_option("--generate", sim_args.generate, "Generate N synthetic layouts");
    c_sim->add_option("--layouts", sim_args.layouts_dir, "Directory of layout CSVs to simulate from");
    c_sim->add_option("--scenario", sim_args.scenario, "static or dynamic")
        ->check(CLI::IsMember({"static", "dynamic"}));
    c_sim->add_option("--steps", sim_args.steps, "Episode length T")->check(CLI::PositiveNumber);
    c_sim->add_option("--seed", sim_args.seed, "Global seed")->required();
    c_sim->add_option("--out", sim_args.out, "Output directory");
    c_sim->add_option("--jobs", sim_args.jobs, "Parallel episode workers");
    add_rule_flags(c_sim, sim_args.rules, sim_args.gen);

    // train
    TrainArgs train_args;
    CLI::App* c_train = app.add_subcommand("train", "Behavior-clone a policy from demonstrations");
    c_train->add_option("--demos", train_args.demos_dir, "Demonstration directory")->required();
    c_train->add_option("--model", train_args.variant, "mgpi|nso|sso|eqpool|socpool")
        ->check(CLI::IsMember({"mgpi", "nso", "sso", "eqpool", "socpool"}));
    c_train->add_option("--horizon", train_args.config.horizon, "History window H");
    c_train->add_option("--neighbors", train_args.config.neighbors, "Neighbor count J");
    c_train->add_option("--epochs", train_args.config.epochs, "Training epochs");
    c_train->add_option("--batch", train_args.config.batch_size, "Minibatch size");
    c_train->add_option("--lr", train_args.config.learning_rate, "Adam learning rate");
    c_train->add_option("--seed", train_args.config.seed, "Training seed")->required();
    c_train->add_option("--position-scale", train_args.config.position_scale,
                        "Divisor applied to relative positions");
    c_train->add_option("--socpool-grid", train_args.config.socpool_grid, "SOCPOOL grid side");
    c_train->add_option("--socpool-cell", train_args.config.socpool_cell,
                        "SOCPOOL cell size in raw scene units");
    c_train->add_option("--threads", train_args.config.threads,
                        "Within-batch gradient workers (deterministic per count)");
    c_train->add_option("--out", train_args.out, "Checkpoint path");

    // eval
    EvalArgs eval_args;
    CLI::App* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint (or run two-fold CV)");
    c_eval->add_option("--model", eval_args.model,
                       "Checkpoint path, or variant name with --crossval");
    c_eval->add_option("--demos", eval_args.demos_dir, "Demonstration directory")->required();
    c_eval->add_option("--out", eval_args.out, "Report path");
    c_eval->add_option("--neighbors", eval_args.neighbors, "Override evaluation neighbor count");
    c_eval->add_flag("--crossval", eval_args.crossval, "Two-fold cross-validation end to end");
    c_eval->add_option("--horizon", eval_args.config.horizon, "History window H (crossval)");
    c_eval->add_option("--epochs", eval_args.config.epochs, "Epochs (crossval)");
    c_eval->add_option("--batch", eval_args.config.batch_size, "Minibatch size (crossval)");
    c_eval->add_option("--lr", eval_args.config.learning_rate, "Learning rate (crossval)");
    c_eval->add_option("--seed", eval_args.config.seed, "Seed (crossval)");
    c_eval->add_option("--crossval-neighbors", eval_args.config.neighbors,
                       "Neighbor count J (crossval)");
    c_eval->add_option("--position-scale", eval_args.config.position_scale,
                       "Position scale (crossval)");
    c_eval->add_option("--threads", eval_args.config.threads,
                       "Within-batch gradient workers (crossval)");

    // detect
    DetectArgs detect_args;
    CLI::App* c_detect = app.add_subcommand("detect", "Detect conversational groups in a layout");
    c_detect->add_option("--model", detect_args.model, "Checkpoint path")->required();
    c_detect->add_option("--layout", detect_args.layout, "Layout CSV")->required();
    c_detect->add_option("--eps", detect_args.dbscan.eps, "DBSCAN eps");
    c_detect->add_option("--min-pts", detect_args.dbscan.min_pts, "DBSCAN min_pts");
    c_detect->add_option("--out", detect_args.out, "Groups JSON path");

    // eval-groups
    EvalGroupsArgs eg_args;
    CLI::App* c_eg = app.add_subcommand("eval-groups", "Score detected groups against a layout's labels");
    c_eg->add_option("--pred", eg_args.pred, "Predicted groups JSON")->required();
    c_eg->add_option("--truth", eg_args.truth, "Layout CSV with ground-truth group ids")->required();
    c_eg->add_flag("--include-singletons", eg_args.include_singletons,
                   "Score singleton groups too");

    // render
    RenderArgs render_args;
    CLI::App* c_render = app.add_subcommand("render", "Render one frame of a demonstration as SVG");
    c_render->add_option("--demo", render_args.demo, "Demonstration JSONL")->required();
    c_render->add_option("--frame", render_args.frame, "Frame index t (1-based)");
    c_render->add_option("--out", render_args.out, "SVG path");

    // attention
    AttentionArgs att_args;
    CLI::App* c_att = app.add_subcommand("attention", "Export a KPM-gate response map");
    c_att->add_option("--model", att_args.model, "Checkpoint path")->required();
    c_att->add_option("--grid", att_args.grid, "Lattice side length");
    c_att->add_option("--extent", att_args.extent,
                      "Half-width of the probed square, in multiples of position scale");
    c_att->add_option("--observer-gaze", att_args.observer_gaze, "Observer gaze 'x,y'");
    c_att->add_option("--neighbor-gaze", att_args.neighbor_gaze, "Neighbor gaze 'x,y'");
    c_att->add_option("--out", att_args.out, "CSV path");

    // gradcheck
    std::uint64_t gc_seed = 0;
    CLI::App* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of every variant");
    c_gc->add_option("--seed", gc_seed, "Seed for the toy instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_sim->parsed()) {
            if ((sim_args.generate > 0) == !sim_args.layouts_dir.empty()) {
                std::fprintf(stderr, "simulate: pass exactly one of --generate or --layouts\n");
                return kExitUsage;
            }
            return cmd_simulate(sim_args);
        }
        if (c_train->parsed()) return cmd_train(train_args);
        if (c_eval->parsed()) {
            if (!eval_args.crossval && eval_args.model.empty()) {
                std::fprintf(stderr, "eval: --model is required without --crossval\n");
                return kExitUsage;
            }
            return cmd_eval(eval_args);
        }
        if (c_detect->parsed()) return cmd_detect(detect_args);
        if (c_eg->parsed()) return cmd_eval_groups(eg_args);
        if (c_render->parsed()) return cmd_render(render_args);
        if (c_att->parsed()) return cmd_attention(att_args);
        if (c_gc->parsed()) return cmd_gradcheck(gc_seed);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace mgpi::cli
