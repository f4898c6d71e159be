#include "mcf/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "mcf/errors.hpp"
#include "mcf/geom.hpp"

namespace mcf {

namespace {

constexpr double kHeatmapCell = 0.25;  // meters per visitation cell

// Root of the fixed evaluation-task stream. Every run and mode derives its
// evaluation episodes from this constant, never from the training seed, so
// curves from different runs are measured on identical tasks.
constexpr std::uint64_t kEvalTaskRoot = 0x4d43462d4556414cull;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    return f;
}

void require_distinct(const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) {
        throw ParamError(std::string("TrainConfig: duplicate ") + what);
    }
}

// The gate value governing action selection at step t for this mode.
double acting_alpha(const TrainConfig& cfg, const GatingSchedule& g, long t) {
    if (cfg.alpha_override) return *cfg.alpha_override;
    switch (cfg.mode) {
        case TrainMode::mcf: return alpha_at(g, t);
        case TrainMode::no_gating: return 0.5;
        case TrainMode::e2e:
        case TrainMode::demo_buffer: return 0.0;
    }
    throw ParamError("acting_alpha: unknown training mode");
}

// The mode's behavior distribution: the policy alone at alpha = 0, otherwise
// the gated product with the fixed-spread prior built from the env's scan.
DiagGaussian2 acting_distribution(const SacAgent& agent, const NavEnv& env,
                                  std::span<const double> obs, const ApfConfig& apf,
                                  double alpha) {
    DiagGaussian2 policy = agent.policy_distribution(obs);
    if (alpha == 0.0) return policy;
    const DiagGaussian2 prior =
        prior_distribution_train(env.last_scan(), env.bearing_error(), apf);
    return fuse_gated(policy, prior, alpha);
}

// One evaluation point: eval_episodes deterministic-mean episodes on the
// fixed task set, cycling through the arena list. Failures record the
// episode cap distance max_steps * dt * v_max.
EvalPoint run_eval(const TrainConfig& cfg, const SacAgent& agent, const GatingSchedule& g,
                   long step, long episode, Backend backend,
                   const std::vector<WorldSpec>& specs) {
    const double alpha = acting_alpha(cfg, g, step);
    EnvOptions opts = cfg.env;
    opts.backend = backend;

    EvalPoint pt;
    pt.step = step;
    pt.episode = episode;
    pt.alpha = alpha;

    int successes = 0;
    for (int j = 0; j < cfg.eval_episodes; ++j) {
        const WorldSpec& spec = specs[static_cast<size_t>(j) % specs.size()];
        NavEnv env(spec, opts);
        std::array<double, Observation::kDim> obs = env.reset(eval_task_seed(j)).flat();
        const double cap = opts.max_steps * spec.dt * spec.v_max;

        double traveled = 0.0;
        bool success = false;
        while (!env.done()) {
            const DiagGaussian2 dist = acting_distribution(agent, env, obs, cfg.apf, alpha);
            const Action act{std::clamp(dist.v.mean, -1.0, 1.0),
                             std::clamp(dist.w.mean, -1.0, 1.0)};
            const Vec2 before{env.state().x, env.state().y};
            const StepResult r = env.step(act);
            traveled += std::hypot(env.state().x - before.x, env.state().y - before.y);
            obs = r.obs.flat();
            if (r.done && r.reason == DoneReason::goal) success = true;
        }
        if (success) ++successes;
        pt.path_lengths.push_back(success ? traveled : cap);
    }

    pt.min_path_len = *std::min_element(pt.path_lengths.begin(), pt.path_lengths.end());
    pt.max_path_len = *std::max_element(pt.path_lengths.begin(), pt.path_lengths.end());
    double sum = 0.0;
    for (double v : pt.path_lengths) sum += v;
    pt.mean_path_len = sum / static_cast<double>(pt.path_lengths.size());
    pt.success_rate = static_cast<double>(successes) / static_cast<double>(cfg.eval_episodes);
    return pt;
}

Transition make_transition(std::span<const double, Observation::kDim> obs, const Action& act,
                           const StepResult& r) {
    Transition tr;
    std::copy(obs.begin(), obs.end(), tr.obs.begin());
    tr.action = act;
    tr.reward = r.reward;
    tr.next_obs = r.obs.flat();
    tr.terminal = r.reason == DoneReason::goal || r.reason == DoneReason::collision;
    tr.source = Transition::Source::Agent;
    return tr;
}

nlohmann::json manifest_json(const TrainConfig& cfg, uint64_t seed, const TrainResult& res) {
    const GatingSchedule g = cfg.effective_gating();
    nlohmann::json j;
    j["mode"] = to_string(cfg.mode);
    j["seed"] = seed;
    j["total_steps"] = cfg.total_steps;
    j["episodes_completed"] = res.episodes;
    j["eval_every_episodes"] = cfg.eval_every_episodes;
    j["eval_episodes"] = cfg.eval_episodes;
    j["arenas"] = cfg.arenas;
    j["gating"] = {{"midpoint_step", g.midpoint_step},
                   {"steepness", g.steepness},
                   {"total_steps", g.total_steps}};
    if (cfg.alpha_override) {
        j["alpha_override"] = *cfg.alpha_override;
    } else {
        j["alpha_override"] = nullptr;
    }
    j["sac"] = {{"gamma", cfg.sac.gamma},
                {"polyak", cfg.sac.polyak},
                {"alpha_entropy", cfg.sac.alpha_entropy},
                {"lr", cfg.sac.lr},
                {"batch_size", cfg.sac.batch_size},
                {"buffer_capacity", cfg.sac.buffer_capacity},
                {"warmup_steps", cfg.sac.warmup_steps},
                {"hidden", cfg.sac.hidden},
                {"stratified_demo_sampling",
                 cfg.sac.stratified_demo_sampling || cfg.mode == TrainMode::demo_buffer}};
    j["apf"] = {{"k_att", cfg.apf.k_att},
                {"k_rep", cfg.apf.k_rep},
                {"influence_radius", cfg.apf.influence_radius},
                {"k_heading", cfg.apf.k_heading},
                {"slowdown_radius", cfg.apf.slowdown_radius},
                {"mc_samples", cfg.apf.mc_samples},
                {"sensor_sigma", cfg.apf.sensor_sigma},
                {"variance_floor_c", cfg.apf.variance_floor_c},
                {"train_sigma", cfg.apf.train_sigma}};
    j["env"] = {{"d_threshold", cfg.env.d_threshold},
                {"max_steps", cfg.env.max_steps},
                {"collision_terminates", cfg.env.collision_terminates},
                {"lidar_noise_sigma", cfg.env.lidar_noise_sigma}};
    j["demo_episodes_per_arena"] = cfg.demo_episodes_per_arena;
    j["demo_transitions"] = res.demo_transitions;
    j["heatmap_window_steps"] = cfg.heatmap_window_steps;

    // Both x-axis units for every evaluation point; curve.csv carries steps.
    nlohmann::json pts = nlohmann::json::array();
    for (const EvalPoint& p : res.curve.points) {
        pts.push_back({{"step", p.step}, {"episode", p.episode}});
    }
    j["eval_points"] = std::move(pts);

    nlohmann::json heatmaps = nlohmann::json::object();
    for (const auto& [name, grid] : res.heatmaps) {
        (void)grid;
        heatmaps[name] = "heatmap_" + name + ".csv";
    }
    j["artifacts"] = {{"curve", "curve.csv"}, {"actor", "actor.mcfn"},
                      {"heatmaps", std::move(heatmaps)}};
    return j;
}

}  // namespace

const char* to_string(TrainMode m) {
    switch (m) {
        case TrainMode::mcf: return "mcf";
        case TrainMode::e2e: return "e2e";
        case TrainMode::demo_buffer: return "demo_buffer";
        case TrainMode::no_gating: return "no_gating";
    }
    throw ParamError("to_string: unknown TrainMode");
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "mcf") return TrainMode::mcf;
    if (s == "e2e") return TrainMode::e2e;
    if (s == "demo_buffer") return TrainMode::demo_buffer;
    if (s == "no_gating") return TrainMode::no_gating;
    throw ParamError("unknown training mode: " + s);
}

EnvOptions TrainConfig::training_env_defaults() {
    EnvOptions o;
    o.collision_terminates = false;
    return o;
}

GatingSchedule TrainConfig::effective_gating() const {
    if (gating) return *gating;
    return GatingSchedule::reverse_logistic(total_steps);
}

void TrainConfig::validate() const {
    if (total_steps <= 0) throw ParamError("TrainConfig: total_steps must be positive");
    if (eval_every_episodes < 1) {
        throw ParamError("TrainConfig: eval_every_episodes must be >= 1");
    }
    if (eval_episodes < 1) throw ParamError("TrainConfig: eval_episodes must be >= 1");
    if (seeds.empty()) throw ParamError("TrainConfig: at least one seed is required");
    std::set<uint64_t> sset(seeds.begin(), seeds.end());
    if (sset.size() != seeds.size()) throw ParamError("TrainConfig: duplicate seeds");
    if (arenas.empty()) throw ParamError("TrainConfig: at least one arena is required");
    require_distinct(arenas, "arenas");
    for (const std::string& name : arenas) find_arena(name);  // ArenaError if unknown
    if (demo_episodes_per_arena < 0) {
        throw ParamError("TrainConfig: demo_episodes_per_arena must be >= 0");
    }
    if (heatmap_window_steps < 0) {
        throw ParamError("TrainConfig: heatmap_window_steps must be >= 0");
    }
    if (alpha_override && !(*alpha_override >= 0.0 && *alpha_override <= 1.0)) {
        throw ParamError("TrainConfig: alpha_override must lie in [0, 1]");
    }
    if (env.d_threshold <= 0.0 || env.max_steps <= 0) {
        throw ParamError("TrainConfig: env.d_threshold and env.max_steps must be positive");
    }
    effective_gating().validate();
    sac.validate();
    apf.validate();
}

VisitGrid::VisitGrid(const Rect& bounds, double cell) {
    if (!std::isfinite(cell) || cell <= 0.0) {
        throw ParamError("VisitGrid: cell size must be positive");
    }
    if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
        throw ParamError("VisitGrid: degenerate bounds");
    }
    xmin_ = bounds.xmin;
    ymin_ = bounds.ymin;
    cell_ = cell;
    nx_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / cell)));
    ny_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / cell)));
    counts_.assign(static_cast<size_t>(nx_) * static_cast<size_t>(ny_), 0);
}

void VisitGrid::record(double x, double y) {
    if (counts_.empty()) throw UsageError("VisitGrid: record() on an unconfigured grid");
    int ix = static_cast<int>(std::floor((x - xmin_) / cell_));
    int iy = static_cast<int>(std::floor((y - ymin_) / cell_));
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    ++counts_[static_cast<size_t>(ix) + static_cast<size_t>(iy) * static_cast<size_t>(nx_)];
    ++total_;
}

long VisitGrid::at(int ix, int iy) const {
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) {
        throw UsageError("VisitGrid: cell index out of range");
    }
    return counts_[static_cast<size_t>(ix) + static_cast<size_t>(iy) * static_cast<size_t>(nx_)];
}

Vec2 VisitGrid::cell_center(int ix, int iy) const {
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) {
        throw UsageError("VisitGrid: cell index out of range");
    }
    return {xmin_ + (ix + 0.5) * cell_, ymin_ + (iy + 0.5) * cell_};
}

double VisitGrid::fraction_within(const std::vector<Vec2>& path, double radius) const {
    return fraction_within(std::vector<std::vector<Vec2>>{path}, radius);
}

double VisitGrid::fraction_within(const std::vector<std::vector<Vec2>>& paths,
                                  double radius) const {
    if (paths.empty()) throw ParamError("VisitGrid: no reference paths");
    for (const auto& path : paths) {
        if (path.empty()) throw ParamError("VisitGrid: reference path is empty");
    }
    if (!std::isfinite(radius) || radius < 0.0) {
        throw ParamError("VisitGrid: radius must be non-negative");
    }
    if (total_ == 0) throw UndefinedMetric("VisitGrid: no visits recorded");

    long within = 0;
    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            const long c = at(ix, iy);
            if (c == 0) continue;
            const Vec2 p = cell_center(ix, iy);
            double d = kInf;
            for (const auto& path : paths) {
                if (path.size() == 1) {
                    d = std::min(d, std::hypot(p.x - path[0].x, p.y - path[0].y));
                    continue;
                }
                for (size_t k = 0; k + 1 < path.size(); ++k) {
                    d = std::min(d, point_segment_distance(p, Segment{path[k], path[k + 1]}));
                }
            }
            if (d <= radius) within += c;
        }
    }
    return static_cast<double>(within) / static_cast<double>(total_);
}

uint64_t eval_task_seed(int j) {
    if (j < 0) throw ParamError("eval_task_seed: index must be >= 0");
    Rng rng = Rng::derive(kEvalTaskRoot, "eval-tasks");
    uint64_t s = 0;
    for (int i = 0; i <= j; ++i) s = rng.raw();
    return s;
}

TrainResult train_one(const TrainConfig& cfg, uint64_t seed, Backend backend) {
    cfg.validate();

    SacConfig sac_cfg = cfg.sac;
    if (cfg.mode == TrainMode::demo_buffer) sac_cfg.stratified_demo_sampling = true;
    SacAgent agent(sac_cfg, seed);
    ReplayBuffer buffer(sac_cfg.buffer_capacity);
    const GatingSchedule gating = cfg.effective_gating();

    EnvOptions opts = cfg.env;
    opts.backend = backend;
    std::vector<WorldSpec> specs;
    specs.reserve(cfg.arenas.size());
    for (const std::string& name : cfg.arenas) specs.push_back(find_arena(name));
    std::vector<NavEnv> envs;
    envs.reserve(specs.size());
    for (const WorldSpec& s : specs) envs.emplace_back(s, opts);

    std::map<std::string, VisitGrid> heatmaps;
    for (size_t i = 0; i < specs.size(); ++i) {
        heatmaps.emplace(cfg.arenas[i], VisitGrid(specs[i].bounds, kHeatmapCell));
    }

    if (cfg.mode == TrainMode::demo_buffer) {
        for (size_t i = 0; i < envs.size(); ++i) {
            fill_demos(buffer, envs[i], cfg.apf, cfg.demo_episodes_per_arena,
                       Rng::mix(seed, "demos-" + cfg.arenas[i]));
        }
    }
    const long demo_transitions = static_cast<long>(buffer.count(Transition::Source::Demo));

    Rng ep_rng = Rng::derive(seed, "episodes");
    Rng act_rng = Rng::derive(seed, "actions");
    Rng upd_rng = Rng::derive(seed, "updates");

    LearningCurve curve;
    long episodes_done = 0;
    size_t arena_idx = 0;
    NavEnv* env = &envs[arena_idx];
    std::array<double, Observation::kDim> obs = env->reset(ep_rng.raw()).flat();

    for (long t = 1; t <= cfg.total_steps; ++t) {
        const double alpha = acting_alpha(cfg, gating, t);
        const DiagGaussian2 dist = acting_distribution(agent, *env, obs, cfg.apf, alpha);
        const Action act = sample_clamped(dist, act_rng);
        const StepResult r = env->step(act);
        buffer.push(make_transition(obs, act, r));

        if (cfg.heatmap_window_steps == 0 || t <= cfg.heatmap_window_steps) {
            heatmaps.at(cfg.arenas[arena_idx]).record(env->state().x, env->state().y);
        }

        if (t > sac_cfg.warmup_steps && buffer.size() >= static_cast<size_t>(sac_cfg.batch_size)) {
            try {
                agent.update(buffer, upd_rng, backend);
            } catch (const DivergenceError& e) {
                throw DivergenceError("step " + std::to_string(t) + ": " + e.what());
            }
        }

        if (r.done) {
            ++episodes_done;
            if (episodes_done % cfg.eval_every_episodes == 0) {
                curve.points.push_back(
                    run_eval(cfg, agent, gating, t, episodes_done, backend, specs));
            }
            arena_idx = static_cast<size_t>(episodes_done) % envs.size();
            env = &envs[arena_idx];
            obs = env->reset(ep_rng.raw()).flat();
        } else {
            obs = r.obs.flat();
        }
    }

    // Every run closes with an evaluation at exactly total_steps so final
    // values are compared at identical step counts across runs.
    if (curve.points.empty() || curve.points.back().step < cfg.total_steps) {
        curve.points.push_back(
            run_eval(cfg, agent, gating, cfg.total_steps, episodes_done, backend, specs));
    }

    return TrainResult{std::move(agent), std::move(curve), episodes_done, demo_transitions,
                       cfg.mode,         seed,             std::move(heatmaps)};
}

VisitGrid exploration_heatmap(const TrainConfig& cfg, uint64_t seed, const std::string& arena,
                              int episodes, Backend backend) {
    cfg.validate();
    if (episodes < 0) throw ParamError("exploration_heatmap: episodes must be >= 0");
    const WorldSpec spec = find_arena(arena);
    VisitGrid grid(spec.bounds, kHeatmapCell);
    if (episodes == 0) return grid;

    SacConfig sac_cfg = cfg.sac;
    if (cfg.mode == TrainMode::demo_buffer) sac_cfg.stratified_demo_sampling = true;
    SacAgent agent(sac_cfg, seed);
    ReplayBuffer buffer(sac_cfg.buffer_capacity);
    const GatingSchedule gating = cfg.effective_gating();

    EnvOptions opts = cfg.env;
    opts.backend = backend;
    NavEnv env(spec, opts);
    if (cfg.mode == TrainMode::demo_buffer) {
        fill_demos(buffer, env, cfg.apf, cfg.demo_episodes_per_arena,
                   Rng::mix(seed, "demos-" + arena));
    }

    Rng ep_rng = Rng::derive(seed, "episodes");
    Rng act_rng = Rng::derive(seed, "actions");
    Rng upd_rng = Rng::derive(seed, "updates");

    std::array<double, Observation::kDim> obs = env.reset(ep_rng.raw()).flat();
    int finished = 0;
    long t = 0;
    while (finished < episodes) {
        ++t;
        const double alpha = acting_alpha(cfg, gating, t);
        const DiagGaussian2 dist = acting_distribution(agent, env, obs, cfg.apf, alpha);
        const Action act = sample_clamped(dist, act_rng);
        const StepResult r = env.step(act);
        buffer.push(make_transition(obs, act, r));
        grid.record(env.state().x, env.state().y);

        if (t > sac_cfg.warmup_steps && buffer.size() >= static_cast<size_t>(sac_cfg.batch_size)) {
            try {
                agent.update(buffer, upd_rng, backend);
            } catch (const DivergenceError& e) {
                throw DivergenceError("step " + std::to_string(t) + ": " + e.what());
            }
        }

        if (r.done) {
            ++finished;
            if (finished < episodes) obs = env.reset(ep_rng.raw()).flat();
        } else {
            obs = r.obs.flat();
        }
    }
    return grid;
}

SuiteResult train_suite(const SuiteConfig& cfg) {
    cfg.base.validate();
    if (cfg.modes.empty()) throw ParamError("train_suite: at least one mode is required");
    {
        std::set<TrainMode> mset(cfg.modes.begin(), cfg.modes.end());
        if (mset.size() != cfg.modes.size()) throw ParamError("train_suite: duplicate modes");
    }
    if (cfg.out_dir.empty()) throw ParamError("train_suite: out_dir is empty");
    if (cfg.workers < 1) throw ParamError("train_suite: workers must be >= 1");

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    struct Task {
        TrainMode mode;
        uint64_t seed;
    };
    std::vector<Task> tasks;
    for (TrainMode m : cfg.modes) {
        for (uint64_t s : cfg.base.seeds) tasks.push_back({m, s});
    }

    SuiteResult out;
    out.runs.resize(tasks.size());

    auto run_task = [&](size_t i) {
        const Task& task = tasks[i];
        RunSummary& rs = out.runs[i];
        rs.mode = task.mode;
        rs.seed = task.seed;
        rs.dir = std::string(to_string(task.mode)) + "_seed" + std::to_string(task.seed);
        const fs::path dir = fs::path(cfg.out_dir) / rs.dir;
        try {
            TrainConfig run_cfg = cfg.base;
            run_cfg.mode = task.mode;
            TrainResult res = train_one(run_cfg, task.seed);

            fs::create_directories(dir);
            write_curve_csv(res.curve, (dir / "curve.csv").string());
            for (const auto& [name, grid] : res.heatmaps) {
                write_heatmap_csv(grid, (dir / ("heatmap_" + name + ".csv")).string());
            }
            save_mlp(res.agent.actor(), (dir / "actor.mcfn").string());
            {
                std::ofstream f = open_out((dir / "manifest.json").string());
                f << manifest_json(run_cfg, task.seed, res).dump(2) << '\n';
                if (!f) throw ConfigError("write failed: " + (dir / "manifest.json").string());
            }

            rs.curve = std::move(res.curve);
            rs.episodes = res.episodes;
            rs.ok = true;
        } catch (const DivergenceError& e) {
            rs.ok = false;
            rs.diverged = true;
            rs.error = e.what();
        } catch (const std::exception& e) {
            rs.ok = false;
            rs.error = e.what();
        }
    };

    const size_t workers = std::min<size_t>(static_cast<size_t>(cfg.workers), tasks.size());
    if (workers <= 1) {
        for (size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t i; (i = next.fetch_add(1)) < tasks.size();) run_task(i);
            });
        }
        for (std::thread& th : pool) th.join();
    }

    std::vector<AggregateGroup> groups;
    for (TrainMode m : cfg.modes) {
        AggregateGroup g;
        g.label = to_string(m);
        for (const RunSummary& rs : out.runs) {
            if (rs.ok && rs.mode == m) g.curves.push_back(&rs.curve);
        }
        groups.push_back(std::move(g));
    }
    write_aggregate_csv(groups, (fs::path(cfg.out_dir) / "aggregate.csv").string());
    return out;
}

void write_curve_csv(const LearningCurve& curve, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "step,mean_path_len,min_path_len,max_path_len,success_rate,alpha\n";
    for (const EvalPoint& p : curve.points) {
        f << p.step << ',' << fmt(p.mean_path_len) << ',' << fmt(p.min_path_len) << ','
          << fmt(p.max_path_len) << ',' << fmt(p.success_rate) << ',' << fmt(p.alpha) << '\n';
    }
    if (!f) throw ConfigError("write failed: " + path);
}

void write_heatmap_csv(const VisitGrid& grid, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "i,j,count\n";
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            f << ix << ',' << iy << ',' << grid.at(ix, iy) << '\n';
        }
    }
    if (!f) throw ConfigError("write failed: " + path);
}

void write_aggregate_csv(const std::vector<AggregateGroup>& groups, const std::string& path) {
    std::ofstream f = open_out(path);
    f << "mode,point_index,mean_step,path_len_mean,path_len_min,path_len_max,"
         "success_mean,success_min,success_max,alpha_mean\n";
    for (const AggregateGroup& g : groups) {
        if (g.curves.empty()) continue;
        size_t n_points = g.curves.front()->points.size();
        for (const LearningCurve* c : g.curves) n_points = std::min(n_points, c->points.size());
        for (size_t k = 0; k < n_points; ++k) {
            double step_sum = 0.0, len_sum = 0.0, succ_sum = 0.0, alpha_sum = 0.0;
            double len_min = kInf, len_max = -kInf, succ_min = kInf, succ_max = -kInf;
            for (const LearningCurve* c : g.curves) {
                const EvalPoint& p = c->points[k];
                step_sum += static_cast<double>(p.step);
                len_sum += p.mean_path_len;
                len_min = std::min(len_min, p.mean_path_len);
                len_max = std::max(len_max, p.mean_path_len);
                succ_sum += p.success_rate;
                succ_min = std::min(succ_min, p.success_rate);
                succ_max = std::max(succ_max, p.success_rate);
                alpha_sum += p.alpha;
            }
            const double n = static_cast<double>(g.curves.size());
            f << g.label << ',' << k << ',' << fmt(step_sum / n) << ',' << fmt(len_sum / n) << ','
              << fmt(len_min) << ',' << fmt(len_max) << ',' << fmt(succ_sum / n) << ','
              << fmt(succ_min) << ',' << fmt(succ_max) << ',' << fmt(alpha_sum / n) << '\n';
        }
    }
    if (!f) throw ConfigError("write failed: " + path);
}

}  // namespace mcf
