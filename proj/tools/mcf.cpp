// Command-line front end: training suites, Table-style evaluation, traced
// demo episodes, tidy plot-data export, and arena validation. Exit codes:
// 0 success, 2 configuration problem, 3 training divergence.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcf/config.hpp"
#include "mcf/deploy.hpp"
#include "mcf/errors.hpp"
#include "mcf/evalkit.hpp"
#include "mcf/log.hpp"
#include "mcf/trainer.hpp"
#include "mcf/world.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef MCF_GIT_REV
#define MCF_GIT_REV "unknown"
#endif

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct CommonArgs {
    std::string config_path;
    std::string out;
    int workers = 1;
};

// Load the config file if given, then apply MCF-flag overrides elsewhere.
mcf::RunConfig base_config(const CommonArgs& c) {
    mcf::RunConfig cfg;
    if (!c.config_path.empty()) cfg = mcf::load_run_config(c.config_path);
    if (!cfg.log_level.empty() && std::getenv("MCF_LOG") == nullptr) {
        setenv("MCF_LOG", cfg.log_level.c_str(), 0);
    }
    if (!c.out.empty()) cfg.out = c.out;
    if (cfg.out.empty()) cfg.out = ".";
    return cfg;
}

// Stamp written JSON artifacts with the configuration hash and tool version.
json artifact_stamp(const mcf::RunConfig& cfg) {
    return json{{"config_hash", mcf::config_hash(cfg)}, {"version", MCF_GIT_REV}};
}

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw mcf::ConfigError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw mcf::ConfigError("write failed: " + path.string());
}

// CLI-side controller names additionally accept the short forms used in the
// comparison tables: prior -> prior_only, policy -> policy_only.
mcf::Controller controller_alias(const std::string& name) {
    if (name == "prior") return mcf::Controller::prior_only;
    if (name == "policy") return mcf::Controller::policy_only;
    return mcf::controller_from_string(name);
}

bool needs_bundle(const std::vector<mcf::Controller>& methods) {
    for (mcf::Controller c : methods) {
        if (c == mcf::Controller::mcf || c == mcf::Controller::policy_only) return true;
    }
    return false;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// ---------------------------------------------------------------- train ----

int cmd_train(const CommonArgs& common, const std::string& modes_csv,
              const std::string& seeds_csv, const std::string& arenas_csv, long total_steps) {
    mcf::RunConfig cfg = base_config(common);
    if (!seeds_csv.empty()) cfg.train.seeds = mcf::parse_seed_list(seeds_csv);
    if (!arenas_csv.empty()) cfg.train.arenas = mcf::parse_name_list(arenas_csv);
    if (total_steps > 0) {
        cfg.train.total_steps = total_steps;
        if (cfg.train.gating) cfg.train.gating->total_steps = total_steps;
    }

    mcf::SuiteConfig suite;
    suite.base = cfg.train;
    suite.out_dir = cfg.out;
    suite.workers = common.workers;
    suite.modes.clear();
    for (const std::string& m : mcf::parse_name_list(modes_csv)) {
        suite.modes.push_back(mcf::train_mode_from_string(m));
    }

    const mcf::SuiteResult res = mcf::train_suite(suite);

    json runs = json::array();
    bool any_failed = false, any_diverged = false;
    for (const mcf::RunSummary& r : res.runs) {
        std::cout << (r.ok ? "done " : "FAIL ") << r.dir;
        if (!r.ok) std::cout << ": " << r.error;
        std::cout << "\n";
        any_failed |= !r.ok;
        any_diverged |= r.diverged;
        runs.push_back({{"mode", to_string(r.mode)},
                        {"seed", r.seed},
                        {"ok", r.ok},
                        {"diverged", r.diverged},
                        {"error", r.error},
                        {"episodes", r.episodes},
                        {"dir", r.dir}});
    }
    json doc = artifact_stamp(cfg);
    doc["command"] = "train";
    doc["effective_config"] = json::parse(mcf::run_config_json(cfg));
    doc["runs"] = std::move(runs);
    write_json(doc, fs::path(cfg.out) / "suite.json");
    std::cout << "suite summary: " << (fs::path(cfg.out) / "suite.json").string() << "\n";

    if (any_diverged) return kExitDiverged;
    return any_failed ? 1 : kExitOk;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const CommonArgs& common, const std::string& bundle_dir,
             const std::string& bundle_mode, const std::string& methods_csv,
             const std::string& envs_csv, int episodes, long seed_base, bool sample_actions) {
    mcf::RunConfig cfg = base_config(common);
    if (episodes > 0) cfg.eval.episodes_per = episodes;
    if (seed_base >= 0) cfg.eval.seed_base = static_cast<uint64_t>(seed_base);
    if (sample_actions) cfg.deploy.deterministic = false;
    cfg.eval.deploy = cfg.deploy;
    cfg.eval.workers = common.workers;

    std::vector<mcf::Controller> methods;
    for (const std::string& m : mcf::parse_name_list(methods_csv)) {
        methods.push_back(controller_alias(m));
    }
    const std::vector<std::string> arenas = mcf::parse_name_list(envs_csv);

    std::optional<mcf::EnsembleBundle> bundle;
    if (needs_bundle(methods)) {
        if (bundle_dir.empty()) {
            throw mcf::ConfigError("--bundle is required for mcf/policy_only methods");
        }
        bundle = mcf::EnsembleBundle::load_dir(bundle_dir, bundle_mode);
    }

    const mcf::EvalReport report = mcf::evaluate_methods(
        methods, arenas, bundle ? &*bundle : nullptr, cfg.train.apf, cfg.eval);

    fs::create_directories(cfg.out);
    const fs::path jpath = fs::path(cfg.out) / "report.json";
    mcf::write_report_json(report, jpath.string());
    // Re-stamp the JSON with the config hash and tool version.
    {
        std::ifstream in(jpath);
        json doc = json::parse(in);
        in.close();
        const json stamp = artifact_stamp(cfg);
        doc["config_hash"] = stamp["config_hash"];
        doc["version"] = stamp["version"];
        write_json(doc, jpath);
    }
    mcf::write_report_md(report, (fs::path(cfg.out) / "report.md").string());
    std::cout << mcf::report_table(report);
    return kExitOk;
}

// ----------------------------------------------------------------- demo ----

int cmd_demo(const CommonArgs& common, const std::string& controller_name,
             const std::string& arena, long seed, const std::string& bundle_dir,
             const std::string& bundle_mode, bool sample_actions) {
    mcf::RunConfig cfg = base_config(common);
    if (sample_actions) cfg.deploy.deterministic = false;
    const mcf::Controller controller = controller_alias(controller_name);

    std::optional<mcf::EnsembleBundle> bundle;
    if (controller == mcf::Controller::mcf || controller == mcf::Controller::policy_only) {
        if (bundle_dir.empty()) {
            throw mcf::ConfigError("--bundle is required for mcf/policy_only demos");
        }
        bundle = mcf::EnsembleBundle::load_dir(bundle_dir, bundle_mode);
    }

    mcf::NavEnv env(mcf::find_arena(arena), {});
    const mcf::EpisodeRecord rec =
        mcf::run_episode(controller, env, static_cast<uint64_t>(seed),
                         bundle ? &*bundle : nullptr, cfg.train.apf, cfg.deploy);

    fs::create_directories(cfg.out);
    const std::string stem =
        std::string("demo_") + to_string(controller) + "_seed" + std::to_string(seed);
    const fs::path jsonl = fs::path(cfg.out) / (stem + ".jsonl");
    mcf::write_episode_jsonl(rec, jsonl.string());

    // Trajectory CSV for uncertainty-colored path plots. sigma2_star is the
    // mean of the two ensemble variance components; controllers without an
    // ensemble write nan.
    const fs::path csv = fs::path(cfg.out) / (stem + ".csv");
    {
        std::ofstream out(csv, std::ios::trunc);
        if (!out) throw mcf::ConfigError("cannot open for writing: " + csv.string());
        out << "x,y,sigma2_star\n";
        for (size_t i = 0; i < rec.positions.size(); ++i) {
            out << fmt(rec.positions[i].x) << "," << fmt(rec.positions[i].y) << ",";
            if (i < rec.trace.steps.size()) {
                const mcf::DiagGaussian2& e = rec.trace.steps[i].ensemble;
                out << fmt(0.5 * (e.v.var + e.w.var));
            } else {
                out << "nan";
            }
            out << "\n";
        }
        if (!out) throw mcf::ConfigError("write failed: " + csv.string());
    }

    json doc = artifact_stamp(cfg);
    doc["command"] = "demo";
    doc["controller"] = to_string(controller);
    doc["arena"] = arena;
    doc["seed"] = seed;
    doc["success"] = rec.success;
    doc["reason"] = to_string(rec.reason);
    doc["steps"] = rec.steps;
    doc["traveled"] = rec.traveled;
    doc["trace"] = jsonl.filename().string();
    doc["trajectory"] = csv.filename().string();
    write_json(doc, fs::path(cfg.out) / (stem + ".meta.json"));

    std::cout << "episode: " << to_string(rec.reason) << " after " << rec.steps << " steps, "
              << fmt(rec.traveled) << " m traveled\n"
              << "trace:   " << jsonl.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ plot-data ----

int cmd_plot_data(const CommonArgs& common, const std::string& runs_dir) {
    const mcf::RunConfig cfg = base_config(common);
    if (!fs::is_directory(runs_dir)) {
        throw mcf::ConfigError("run directory not found: " + runs_dir);
    }

    struct Run {
        std::string mode;
        uint64_t seed = 0;
        fs::path dir;
        json manifest;
    };
    std::vector<Run> found;
    for (const fs::directory_entry& e : fs::directory_iterator(runs_dir)) {
        if (!e.is_directory()) continue;
        const fs::path mpath = e.path() / "manifest.json";
        const fs::path cpath = e.path() / "curve.csv";
        if (!fs::exists(mpath) || !fs::exists(cpath)) continue;
        std::ifstream in(mpath);
        json manifest;
        try {
            manifest = json::parse(in);
        } catch (const json::parse_error& err) {
            throw mcf::ConfigError(mpath.string() + ": " + err.what());
        }
        found.push_back({manifest.at("mode").get<std::string>(),
                         manifest.at("seed").get<uint64_t>(), e.path(), std::move(manifest)});
    }
    if (found.empty()) {
        throw mcf::ConfigError("no run directories with curve.csv under " + runs_dir);
    }
    std::sort(found.begin(), found.end(), [](const Run& a, const Run& b) {
        return a.mode != b.mode ? a.mode < b.mode : a.seed < b.seed;
    });

    fs::create_directories(cfg.out);

    // Tidy learning curves: one evaluation point per row, keyed by run.
    {
        std::ofstream out(fs::path(cfg.out) / "curves.csv", std::ios::trunc);
        out << "mode,seed,step,mean_path_len,min_path_len,max_path_len,success_rate,alpha\n";
        for (const Run& r : found) {
            std::ifstream in(r.dir / "curve.csv");
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line)) {
                if (!line.empty()) out << r.mode << "," << r.seed << "," << line << "\n";
            }
        }
        if (!out) throw mcf::ConfigError("write failed: curves.csv");
    }

    // Visitation heatmaps, one cell per row.
    long heatmaps = 0;
    {
        std::ofstream out(fs::path(cfg.out) / "heatmaps.csv", std::ios::trunc);
        out << "mode,seed,arena,i,j,count\n";
        for (const Run& r : found) {
            for (const fs::directory_entry& e : fs::directory_iterator(r.dir)) {
                const std::string fname = e.path().filename().string();
                if (fname.rfind("heatmap_", 0) != 0 || e.path().extension() != ".csv") continue;
                const std::string arena =
                    fname.substr(8, fname.size() - 8 - 4);  // heatmap_<arena>.csv
                std::ifstream in(e.path());
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    if (!line.empty()) {
                        out << r.mode << "," << r.seed << "," << arena << "," << line << "\n";
                    }
                }
                ++heatmaps;
            }
        }
        if (!out) throw mcf::ConfigError("write failed: heatmaps.csv");
    }

    // Gating schedule samples straight from each manifest.
    {
        std::ofstream out(fs::path(cfg.out) / "alpha_schedule.csv", std::ios::trunc);
        out << "mode,seed,step,alpha\n";
        for (const Run& r : found) {
            if (!r.manifest.contains("gating") || r.manifest["gating"].is_null()) continue;
            const json& g = r.manifest["gating"];
            mcf::GatingSchedule sched{g.at("midpoint_step").get<long>(),
                                      g.at("steepness").get<double>(),
                                      g.at("total_steps").get<long>()};
            const long total = sched.total_steps;
            const int samples = 200;
            for (int i = 0; i <= samples; ++i) {
                const long step = total * i / samples;
                out << r.mode << "," << r.seed << "," << step << ","
                    << fmt(mcf::alpha_at(sched, step)) << "\n";
            }
        }
        if (!out) throw mcf::ConfigError("write failed: alpha_schedule.csv");
    }

    json doc = artifact_stamp(cfg);
    doc["command"] = "plot-data";
    doc["source"] = runs_dir;
    doc["runs"] = json::array();
    for (const Run& r : found) {
        doc["runs"].push_back({{"mode", r.mode}, {"seed", r.seed}});
    }
    doc["heatmap_files"] = heatmaps;
    write_json(doc, fs::path(cfg.out) / "plot_manifest.json");

    std::cout << "consolidated " << found.size() << " runs into " << cfg.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------- arena-check ----

int cmd_arena_check(const std::string& file) {
    std::vector<mcf::WorldSpec> worlds;
    if (!file.empty()) {
        worlds.push_back(mcf::load_world_json(file));
    } else {
        worlds = mcf::builtin_arenas();
        worlds.push_back(mcf::unseen_arena());
    }
    for (const mcf::WorldSpec& w : worlds) {
        w.validate();
        // Reachability between the region centers; snapping absorbs the cell
        // rounding at the borders.
        const mcf::GridPlan plan =
            mcf::astar_shortest(w, w.start_region.center(), w.goal_region.center());
        std::cout << "arena '" << w.name << "': ok (shortest " << fmt(plan.path_length)
                  << " m)\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplicative controller fusion: training, evaluation, demos"};
    app.require_subcommand(1);

    CommonArgs common;

    // --- train ---
    auto* train = app.add_subcommand("train", "Run a training suite (one run per mode x seed)");
    std::string tr_modes = "mcf";
    std::string tr_seeds, tr_arenas;
    long tr_steps = 0;
    train->add_option("--config", common.config_path, "JSON run configuration");
    train->add_option("--out", common.out, "output directory (required)")->required();
    train->add_option("--mode,--modes", tr_modes, "comma list: mcf,e2e,demo_buffer,no_gating");
    train->add_option("--seeds", tr_seeds, "comma list of seeds (overrides config)");
    train->add_option("--arenas", tr_arenas, "comma list of training arenas (overrides config)");
    train->add_option("--steps", tr_steps, "total environment steps (overrides config)");
    train->add_option("--workers", common.workers, "parallel runs (default 1, bit-reproducible)");

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "Evaluate methods across arenas (SPL report)");
    std::string ev_bundle, ev_bundle_mode = "mcf";
    std::string ev_methods = "mcf,policy_only,prior_only,random";
    std::string ev_envs = "unseen";
    int ev_episodes = 0;
    long ev_seed_base = -1;
    bool ev_sample = false;
    eval->add_option("--config", common.config_path, "JSON run configuration");
    eval->add_option("--out", common.out, "output directory (default .)");
    eval->add_option("--bundle", ev_bundle, "training suite dir holding <mode>_seed*/actor.mcfn");
    eval->add_option("--bundle-mode", ev_bundle_mode, "which mode's runs form the ensemble");
    eval->add_option("--methods", ev_methods, "comma list: mcf,policy[_only],prior[_only],random");
    eval->add_option("--env,--envs", ev_envs, "comma list of arenas");
    eval->add_option("--episodes", ev_episodes, "episodes per (method, arena) cell");
    eval->add_option("--seed-base", ev_seed_base, "root of the shared episode seed list");
    eval->add_flag("--sample", ev_sample, "sample fused actions instead of the mean");
    eval->add_option("--workers", common.workers, "parallel (method, arena) cells");

    // --- demo ---
    auto* demo = app.add_subcommand("demo", "Run one traced episode and export its trajectory");
    std::string dm_controller = "mcf", dm_arena = "open", dm_bundle, dm_bundle_mode = "mcf";
    long dm_seed = 0;
    bool dm_sample = false;
    demo->add_option("--config", common.config_path, "JSON run configuration");
    demo->add_option("--out", common.out, "output directory (default .)");
    demo->add_option("--controller", dm_controller, "mcf | policy_only | prior_only | random");
    demo->add_option("--arena", dm_arena, "arena name");
    demo->add_option("--seed", dm_seed, "episode seed");
    demo->add_option("--bundle", dm_bundle, "training suite dir (mcf/policy_only only)");
    demo->add_option("--bundle-mode", dm_bundle_mode, "which mode's runs form the ensemble");
    demo->add_flag("--sample", dm_sample, "sample fused actions instead of the mean");

    // --- plot-data ---
    auto* plot = app.add_subcommand("plot-data",
                                    "Consolidate a suite's curves/heatmaps/gating into tidy CSVs");
    std::string pd_runs;
    plot->add_option("--config", common.config_path, "JSON run configuration");
    plot->add_option("--runs", pd_runs, "training suite output directory")->required();
    plot->add_option("--out", common.out, "output directory (default .)");

    // --- arena-check ---
    auto* arena = app.add_subcommand("arena-check",
                                     "Validate arenas (geometry + planned reachability)");
    std::string ac_file;
    arena->add_option("--file", ac_file, "arena JSON (default: all shipped arenas)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(common, tr_modes, tr_seeds, tr_arenas, tr_steps);
        if (eval->parsed()) {
            return cmd_eval(common, ev_bundle, ev_bundle_mode, ev_methods, ev_envs, ev_episodes,
                            ev_seed_base, ev_sample);
        }
        if (demo->parsed()) {
            return cmd_demo(common, dm_controller, dm_arena, dm_seed, dm_bundle, dm_bundle_mode,
                            dm_sample);
        }
        if (plot->parsed()) return cmd_plot_data(common, pd_runs);
        if (arena->parsed()) return cmd_arena_check(ac_file);
    } catch (const mcf::DivergenceError& e) {
        std::cerr << "error: training diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::logic_error& e) {  // ParamError, UsageError, dimension/metric misuse
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {  // ConfigError, ArenaError, UnreachableError
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
