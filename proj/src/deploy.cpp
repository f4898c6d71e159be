#include "mcf/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "mcf/errors.hpp"
#include "mcf/log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mcf {

namespace {

constexpr const char* kEpisodeSchema = "mcf-episode-v1";

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

json gauss_json(const DiagGaussian2& g) {
    return json{{"mean", {g.v.mean, g.w.mean}}, {"var", {g.v.var, g.w.var}}};
}

DiagGaussian2 gauss_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("mean") || !j.contains("var") || j["mean"].size() != 2 ||
        j["var"].size() != 2) {
        throw ConfigError(where + ": expected {mean:[2], var:[2]}");
    }
    DiagGaussian2 g;
    g.v = {j["mean"][0].get<double>(), j["var"][0].get<double>()};
    g.w = {j["mean"][1].get<double>(), j["var"][1].get<double>()};
    return g;
}

DoneReason done_reason_from_string(const std::string& s, const std::string& where) {
    for (DoneReason r :
         {DoneReason::running, DoneReason::goal, DoneReason::collision, DoneReason::timeout}) {
        if (s == to_string(r)) return r;
    }
    throw ConfigError(where + ": unknown episode outcome '" + s + "'");
}

}  // namespace

EnsembleBundle::EnsembleBundle(std::vector<Mlp> members, std::vector<uint64_t> seeds)
    : members_(std::move(members)), seeds_(std::move(seeds)) {
    if (members_.size() < 2) {
        throw InsufficientEnsemble("ensemble needs at least 2 members, got " +
                                   std::to_string(members_.size()));
    }
    if (!seeds_.empty() && seeds_.size() != members_.size()) {
        throw ParamError("ensemble got " + std::to_string(seeds_.size()) + " seeds for " +
                         std::to_string(members_.size()) + " members");
    }
    const std::vector<int>& ref = members_.front().layer_sizes();
    for (size_t i = 0; i < members_.size(); ++i) {
        const Mlp& m = members_[i];
        if (m.input_dim() != Observation::kDim || m.output_dim() != 4 ||
            m.head() != Head::Gaussian) {
            throw DimensionError("ensemble member " + std::to_string(i) +
                                 " is not a navigation actor (need " +
                                 std::to_string(Observation::kDim) +
                                 " inputs, 4 Gaussian-head outputs)");
        }
        if (m.layer_sizes() != ref) {
            throw DimensionError("ensemble member " + std::to_string(i) +
                                 " architecture differs from member 0");
        }
    }
}

EnsembleBundle EnsembleBundle::load(const std::vector<std::string>& paths) {
    std::string missing;
    for (const std::string& p : paths) {
        if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p;
    }
    if (!missing.empty()) throw ConfigError("missing actor checkpoints: " + missing);
    std::vector<Mlp> members;
    members.reserve(paths.size());
    for (const std::string& p : paths) members.push_back(load_mlp(p));
    return EnsembleBundle(std::move(members));
}

EnsembleBundle EnsembleBundle::load_dir(const std::string& dir, const std::string& mode) {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    const std::string prefix = mode + "_seed";
    std::vector<std::pair<uint64_t, std::string>> found;  // (seed, checkpoint path)
    for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
        if (!e.is_directory()) continue;
        const std::string name = e.path().filename().string();
        if (name.rfind(prefix, 0) != 0) continue;
        const std::string tail = name.substr(prefix.size());
        if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos) continue;
        const fs::path ckpt = e.path() / "actor.mcfn";
        if (!fs::exists(ckpt)) {
            throw ConfigError("run directory " + e.path().string() + " has no actor.mcfn");
        }
        found.emplace_back(std::stoull(tail), ckpt.string());
    }
    if (found.size() < 2) {
        throw ConfigError("found " + std::to_string(found.size()) + " '" + prefix +
                          "*' run(s) under " + dir + "; an ensemble needs at least 2");
    }
    std::sort(found.begin(), found.end());
    std::vector<Mlp> members;
    std::vector<uint64_t> seeds;
    members.reserve(found.size());
    for (const auto& [seed, path] : found) {
        members.push_back(load_mlp(path));
        seeds.push_back(seed);
    }
    return EnsembleBundle(std::move(members), std::move(seeds));
}

const Mlp& EnsembleBundle::member(size_t i) const {
    if (i >= members_.size()) {
        throw ParamError("ensemble member index " + std::to_string(i) + " out of range (size " +
                         std::to_string(members_.size()) + ")");
    }
    return members_[i];
}

Action EnsembleBundle::member_mean(size_t i, std::span<const double> obs) const {
    const Mlp& m = member(i);
    if (obs.size() != static_cast<size_t>(m.input_dim())) {
        throw DimensionError("observation has " + std::to_string(obs.size()) +
                             " components, actor expects " + std::to_string(m.input_dim()));
    }
    MlpWorkspace ws;
    const std::vector<double> out = m.forward(obs, ws);
    return {std::tanh(out[0]), std::tanh(out[1])};
}

DiagGaussian2 ensemble_distribution(const EnsembleBundle& bundle, std::span<const double> obs,
                                    double var_floor, Backend backend) {
    if (obs.size() != static_cast<size_t>(Observation::kDim)) {
        throw DimensionError("observation has " + std::to_string(obs.size()) +
                             " components, expected " + std::to_string(Observation::kDim));
    }
    const long n = static_cast<long>(bundle.size());
    std::vector<Action> means(static_cast<size_t>(n));
    if (backend == Backend::OpenMP) {
#pragma omp parallel
        {
            MlpWorkspace ws;
#pragma omp for schedule(static)
            for (long i = 0; i < n; ++i) {
                const std::vector<double> out =
                    bundle.member(static_cast<size_t>(i)).forward(obs, ws);
                means[static_cast<size_t>(i)] = {std::tanh(out[0]), std::tanh(out[1])};
            }
        }
    } else {
        MlpWorkspace ws;
        for (long i = 0; i < n; ++i) {
            const std::vector<double> out = bundle.member(static_cast<size_t>(i)).forward(obs, ws);
            means[static_cast<size_t>(i)] = {std::tanh(out[0]), std::tanh(out[1])};
        }
    }
    // Aggregation stays serial and index-ordered: results are bit-identical
    // across backends and thread counts.
    return aggregate_ensemble(means, var_floor);
}

Action reconstruct_action(const FusionStep& step) {
    if (step.sampled) return sample_clamped(step.fused, step.z_v, step.z_w);
    return {clamp_unit(step.fused.v.mean), clamp_unit(step.fused.w.mean)};
}

FusionStep mcf_act(const EnsembleBundle& bundle, const ApfConfig& apf,
                   std::span<const double> obs, std::span<const double> scan,
                   double angle_to_goal, Rng& rng, const DeployOptions& opts, double max_range) {
    FusionStep st;
    st.ensemble = ensemble_distribution(bundle, obs, opts.ensemble_var_floor, opts.backend);
    st.prior = prior_distribution_mc(scan, angle_to_goal, apf, rng, max_range, opts.backend);
    st.fused = fuse_product(st.ensemble, st.prior);
    st.disagreement_v = std::fabs(st.ensemble.v.mean - st.prior.v.mean);
    st.disagreement_w = std::fabs(st.ensemble.w.mean - st.prior.w.mean);
    const auto confident_conflict = [&](double gap, const Gaussian1& a, const Gaussian1& b) {
        return gap > opts.stagnation_mean_gap && a.var < opts.stagnation_var_cap &&
               b.var < opts.stagnation_var_cap;
    };
    st.stagnation_warning = confident_conflict(st.disagreement_v, st.ensemble.v, st.prior.v) ||
                            confident_conflict(st.disagreement_w, st.ensemble.w, st.prior.w);
    if (st.stagnation_warning) {
        log::warn("fusion stagnation: ensemble and prior disagree confidently "
                  "(|dv|=%.3f |dw|=%.3f); the product may stall between them",
                  st.disagreement_v, st.disagreement_w);
    }
    if (opts.deterministic) {
        st.sampled = false;
        st.action = {clamp_unit(st.fused.v.mean), clamp_unit(st.fused.w.mean)};
    } else {
        st.sampled = true;
        st.z_v = rng.normal();
        st.z_w = rng.normal();
        st.action = sample_clamped(st.fused, st.z_v, st.z_w);
    }
    return st;
}

const char* to_string(Controller c) {
    switch (c) {
        case Controller::mcf: return "mcf";
        case Controller::policy_only: return "policy_only";
        case Controller::prior_only: return "prior_only";
        case Controller::random: return "random";
    }
    return "?";
}

Controller controller_from_string(const std::string& s) {
    for (Controller c : {Controller::mcf, Controller::policy_only, Controller::prior_only,
                         Controller::random}) {
        if (s == to_string(c)) return c;
    }
    throw ParamError("unknown controller '" + s +
                     "' (expected mcf, policy_only, prior_only, or random)");
}

EpisodeRecord run_episode(Controller controller, NavEnv& env, uint64_t seed,
                          const EnsembleBundle* bundle, const ApfConfig& apf,
                          const DeployOptions& opts) {
    const bool learned = controller == Controller::mcf || controller == Controller::policy_only;
    if (learned && bundle == nullptr) {
        throw UsageError(std::string("controller '") + to_string(controller) +
                         "' needs an actor ensemble");
    }
    Rng rng = Rng::derive(seed, "deploy");
    Observation obs = env.reset(seed);
    EpisodeRecord rec;
    rec.controller = controller;
    rec.seed = seed;
    rec.start = {env.state().x, env.state().y};
    rec.goal = env.goal();
    DoneReason reason = DoneReason::running;
    while (!env.done()) {
        Action act;
        switch (controller) {
            case Controller::mcf: {
                FusionStep st = mcf_act(*bundle, apf, obs.flat(), env.last_scan(),
                                        env.bearing_error(), rng, opts,
                                        env.world().lidar.max_range);
                act = st.action;
                rec.trace.steps.push_back(std::move(st));
                break;
            }
            case Controller::policy_only: {
                FusionStep st;
                st.ensemble = ensemble_distribution(*bundle, obs.flat(),
                                                    opts.ensemble_var_floor, opts.backend);
                st.prior = st.ensemble;
                st.fused = st.ensemble;
                st.action = {clamp_unit(st.fused.v.mean), clamp_unit(st.fused.w.mean)};
                act = st.action;
                rec.trace.steps.push_back(std::move(st));
                break;
            }
            case Controller::prior_only:
                act = apf_action(env.last_scan(), env.bearing_error(), apf).action;
                break;
            case Controller::random:
                act = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
                break;
        }
        const Vec2 before{env.state().x, env.state().y};
        const StepResult r = env.step(act);
        const Vec2 after{env.state().x, env.state().y};
        rec.traveled += std::hypot(after.x - before.x, after.y - before.y);
        rec.positions.push_back(after);
        rec.actions.push_back(act);
        obs = r.obs;
        reason = r.reason;
    }
    rec.steps = env.step_count();
    rec.reason = reason;
    rec.success = reason == DoneReason::goal;
    return rec;
}

void write_episode_jsonl(const EpisodeRecord& rec, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    json header{{"type", "header"},
                {"schema", kEpisodeSchema},
                {"controller", to_string(rec.controller)},
                {"seed", rec.seed},
                {"success", rec.success},
                {"reason", to_string(rec.reason)},
                {"steps", rec.steps},
                {"traveled", rec.traveled},
                {"start", {rec.start.x, rec.start.y}},
                {"goal", {rec.goal.x, rec.goal.y}},
                {"traced", !rec.trace.steps.empty()}};
    out << header.dump() << "\n";
    for (size_t i = 0; i < rec.positions.size(); ++i) {
        json line{{"type", "step"},
                  {"i", i},
                  {"pos", {rec.positions[i].x, rec.positions[i].y}},
                  {"action", {rec.actions[i].v, rec.actions[i].w}}};
        if (i < rec.trace.steps.size()) {
            const FusionStep& st = rec.trace.steps[i];
            line["ensemble"] = gauss_json(st.ensemble);
            line["prior"] = gauss_json(st.prior);
            line["fused"] = gauss_json(st.fused);
            line["sampled"] = st.sampled;
            line["z"] = {st.z_v, st.z_w};
            line["disagreement"] = {st.disagreement_v, st.disagreement_w};
            line["stagnation"] = st.stagnation_warning;
        }
        out << line.dump() << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

EpisodeRecord read_episode_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string text;
    if (!std::getline(in, text)) throw ConfigError(path + ": empty episode file");
    json header;
    try {
        header = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": bad header line: " + e.what());
    }
    if (!header.is_object() || header.value("type", "") != "header" ||
        header.value("schema", "") != kEpisodeSchema) {
        throw ConfigError(path + ": not an episode trace (missing '" + kEpisodeSchema +
                          "' header)");
    }
    EpisodeRecord rec;
    try {
        rec.controller = controller_from_string(header.at("controller").get<std::string>());
        rec.seed = header.at("seed").get<uint64_t>();
        rec.success = header.at("success").get<bool>();
        rec.reason = done_reason_from_string(header.at("reason").get<std::string>(), path);
        rec.steps = header.at("steps").get<int>();
        rec.traveled = header.at("traveled").get<double>();
        rec.start = {header.at("start")[0].get<double>(), header.at("start")[1].get<double>()};
        rec.goal = {header.at("goal")[0].get<double>(), header.at("goal")[1].get<double>()};
    } catch (const json::exception& e) {
        throw ConfigError(path + ": malformed header: " + e.what());
    }
    size_t i = 0;
    while (std::getline(in, text)) {
        if (text.empty()) continue;
        json line;
        try {
            line = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(path + ": bad step line " + std::to_string(i) + ": " + e.what());
        }
        const std::string where = path + ": step " + std::to_string(i);
        try {
            if (line.value("type", "") != "step" || line.at("i").get<size_t>() != i) {
                throw ConfigError(where + ": out-of-order or mistyped line");
            }
            rec.positions.push_back(
                {line.at("pos")[0].get<double>(), line.at("pos")[1].get<double>()});
            rec.actions.push_back(
                {line.at("action")[0].get<double>(), line.at("action")[1].get<double>()});
            if (line.contains("fused")) {
                FusionStep st;
                st.ensemble = gauss_from_json(line.at("ensemble"), where);
                st.prior = gauss_from_json(line.at("prior"), where);
                st.fused = gauss_from_json(line.at("fused"), where);
                st.sampled = line.at("sampled").get<bool>();
                st.z_v = line.at("z")[0].get<double>();
                st.z_w = line.at("z")[1].get<double>();
                st.disagreement_v = line.at("disagreement")[0].get<double>();
                st.disagreement_w = line.at("disagreement")[1].get<double>();
                st.stagnation_warning = line.at("stagnation").get<bool>();
                st.action = rec.actions.back();
                rec.trace.steps.push_back(std::move(st));
            }
        } catch (const json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        ++i;
    }
    if (static_cast<int>(rec.positions.size()) != rec.steps) {
        throw ConfigError(path + ": header says " + std::to_string(rec.steps) + " steps, found " +
                          std::to_string(rec.positions.size()) + " step lines");
    }
    return rec;
}

}  // namespace mcf
