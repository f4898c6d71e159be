#include "mcf/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcf/errors.hpp"

using nlohmann::json;

namespace mcf {

namespace {

[[noreturn]] void bad_key(const std::string& path) {
    throw ConfigError("unknown key \"" + path + "\"");
}

// Typed readers that turn json type surprises into located ConfigErrors.
double want_num(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError("\"" + path + "\": expected a number");
    return v.get<double>();
}

long want_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError("\"" + path + "\": expected an integer");
    return v.get<long>();
}

bool want_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError("\"" + path + "\": expected true/false");
    return v.get<bool>();
}

std::string want_str(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError("\"" + path + "\": expected a string");
    return v.get<std::string>();
}

const json& want_obj(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError("\"" + path + "\": expected an object");
    return v;
}

void read_train(const json& sec, RunConfig& cfg) {
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "train." + key;
        if (key == "mode") {
            try {
                cfg.train.mode = train_mode_from_string(want_str(val, path));
            } catch (const ParamError& e) {
                throw ConfigError("\"" + path + "\": " + e.what());
            }
        } else if (key == "total_steps") {
            cfg.train.total_steps = want_int(val, path);
        } else if (key == "eval_every_episodes") {
            cfg.train.eval_every_episodes = want_int(val, path);
        } else if (key == "eval_episodes") {
            cfg.train.eval_episodes = static_cast<int>(want_int(val, path));
        } else if (key == "seeds") {
            if (!val.is_array()) throw ConfigError("\"" + path + "\": expected an array");
            cfg.train.seeds.clear();
            for (size_t i = 0; i < val.size(); ++i) {
                cfg.train.seeds.push_back(static_cast<uint64_t>(
                    want_int(val[i], path + "[" + std::to_string(i) + "]")));
            }
        } else if (key == "arenas") {
            if (!val.is_array()) throw ConfigError("\"" + path + "\": expected an array");
            cfg.train.arenas.clear();
            for (size_t i = 0; i < val.size(); ++i) {
                cfg.train.arenas.push_back(
                    want_str(val[i], path + "[" + std::to_string(i) + "]"));
            }
        } else if (key == "demo_episodes_per_arena") {
            cfg.train.demo_episodes_per_arena = static_cast<int>(want_int(val, path));
        } else if (key == "heatmap_window_steps") {
            cfg.train.heatmap_window_steps = want_int(val, path);
        } else if (key == "alpha_override") {
            if (val.is_null()) cfg.train.alpha_override.reset();
            else cfg.train.alpha_override = want_num(val, path);
        } else {
            bad_key(path);
        }
    }
}

void read_gating(const json& sec, RunConfig& cfg) {
    GatingSchedule g = cfg.train.effective_gating();
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "gating." + key;
        if (key == "midpoint_step") g.midpoint_step = want_int(val, path);
        else if (key == "steepness") g.steepness = want_num(val, path);
        else bad_key(path);
    }
    g.total_steps = cfg.train.total_steps;  // the schedule tracks the run length
    cfg.train.gating = g;
}

void read_sac(const json& sec, RunConfig& cfg) {
    SacConfig& s = cfg.train.sac;
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "sac." + key;
        if (key == "gamma") s.gamma = want_num(val, path);
        else if (key == "polyak") s.polyak = want_num(val, path);
        else if (key == "alpha_entropy") s.alpha_entropy = want_num(val, path);
        else if (key == "lr") s.lr = want_num(val, path);
        else if (key == "batch_size") s.batch_size = static_cast<int>(want_int(val, path));
        else if (key == "buffer_capacity")
            s.buffer_capacity = static_cast<size_t>(want_int(val, path));
        else if (key == "warmup_steps") s.warmup_steps = static_cast<int>(want_int(val, path));
        else if (key == "hidden") {
            if (!val.is_array()) throw ConfigError("\"" + path + "\": expected an array");
            s.hidden.clear();
            for (size_t i = 0; i < val.size(); ++i) {
                s.hidden.push_back(static_cast<int>(
                    want_int(val[i], path + "[" + std::to_string(i) + "]")));
            }
        } else {
            bad_key(path);
        }
    }
}

void read_apf(const json& sec, RunConfig& cfg) {
    ApfConfig& a = cfg.train.apf;
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "apf." + key;
        if (key == "k_att") a.k_att = want_num(val, path);
        else if (key == "k_rep") a.k_rep = want_num(val, path);
        else if (key == "influence_radius") a.influence_radius = want_num(val, path);
        else if (key == "k_heading") a.k_heading = want_num(val, path);
        else if (key == "slowdown_radius") a.slowdown_radius = want_num(val, path);
        else if (key == "mc_samples") a.mc_samples = static_cast<int>(want_int(val, path));
        else if (key == "sensor_sigma") a.sensor_sigma = want_num(val, path);
        else if (key == "variance_floor_c") a.variance_floor_c = want_num(val, path);
        else if (key == "train_sigma") a.train_sigma = want_num(val, path);
        else bad_key(path);
    }
}

void read_env(const json& sec, RunConfig& cfg) {
    EnvOptions& e = cfg.train.env;
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "env." + key;
        if (key == "d_threshold") e.d_threshold = want_num(val, path);
        else if (key == "max_steps") e.max_steps = static_cast<int>(want_int(val, path));
        else if (key == "collision_terminates") e.collision_terminates = want_bool(val, path);
        else if (key == "lidar_noise_sigma") e.lidar_noise_sigma = want_num(val, path);
        else bad_key(path);
    }
}

void read_deploy(const json& sec, RunConfig& cfg) {
    DeployOptions& d = cfg.deploy;
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "deploy." + key;
        if (key == "deterministic") d.deterministic = want_bool(val, path);
        else if (key == "ensemble_var_floor") d.ensemble_var_floor = want_num(val, path);
        else if (key == "stagnation_mean_gap") d.stagnation_mean_gap = want_num(val, path);
        else if (key == "stagnation_var_cap") d.stagnation_var_cap = want_num(val, path);
        else bad_key(path);
    }
}

void read_eval(const json& sec, RunConfig& cfg) {
    EvalSuiteOptions& e = cfg.eval;
    for (const auto& [key, val] : sec.items()) {
        const std::string path = "eval." + key;
        if (key == "episodes_per") e.episodes_per = static_cast<int>(want_int(val, path));
        else if (key == "seed_base") e.seed_base = static_cast<uint64_t>(want_int(val, path));
        else if (key == "resolution") e.resolution = want_num(val, path);
        else bad_key(path);
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");

    RunConfig cfg;
    // train first: the gating section's total tracks train.total_steps.
    if (doc.contains("train")) read_train(want_obj(doc["train"], "train"), cfg);
    for (const auto& [key, val] : doc.items()) {
        if (key == "train") continue;
        if (key == "gating") read_gating(want_obj(val, key), cfg);
        else if (key == "sac") read_sac(want_obj(val, key), cfg);
        else if (key == "apf") read_apf(want_obj(val, key), cfg);
        else if (key == "env") read_env(want_obj(val, key), cfg);
        else if (key == "deploy") read_deploy(want_obj(val, key), cfg);
        else if (key == "eval") read_eval(want_obj(val, key), cfg);
        else if (key == "out") cfg.out = want_str(val, key);
        else if (key == "log_level") cfg.log_level = want_str(val, key);
        else bad_key(key);
    }
    return cfg;
}

std::string run_config_json(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    const GatingSchedule g = t.effective_gating();
    json doc;
    doc["train"] = {{"mode", to_string(t.mode)},
                    {"total_steps", t.total_steps},
                    {"eval_every_episodes", t.eval_every_episodes},
                    {"eval_episodes", t.eval_episodes},
                    {"seeds", t.seeds},
                    {"arenas", t.arenas},
                    {"demo_episodes_per_arena", t.demo_episodes_per_arena},
                    {"heatmap_window_steps", t.heatmap_window_steps},
                    {"alpha_override",
                     t.alpha_override ? json(*t.alpha_override) : json(nullptr)}};
    doc["gating"] = {{"midpoint_step", g.midpoint_step},
                     {"steepness", g.steepness},
                     {"total_steps", g.total_steps}};
    doc["sac"] = {{"gamma", t.sac.gamma},
                  {"polyak", t.sac.polyak},
                  {"alpha_entropy", t.sac.alpha_entropy},
                  {"lr", t.sac.lr},
                  {"batch_size", t.sac.batch_size},
                  {"buffer_capacity", t.sac.buffer_capacity},
                  {"warmup_steps", t.sac.warmup_steps},
                  {"hidden", t.sac.hidden}};
    doc["apf"] = {{"k_att", t.apf.k_att},
                  {"k_rep", t.apf.k_rep},
                  {"influence_radius", t.apf.influence_radius},
                  {"k_heading", t.apf.k_heading},
                  {"slowdown_radius", t.apf.slowdown_radius},
                  {"mc_samples", t.apf.mc_samples},
                  {"sensor_sigma", t.apf.sensor_sigma},
                  {"variance_floor_c", t.apf.variance_floor_c},
                  {"train_sigma", t.apf.train_sigma}};
    doc["env"] = {{"d_threshold", t.env.d_threshold},
                  {"max_steps", t.env.max_steps},
                  {"collision_terminates", t.env.collision_terminates},
                  {"lidar_noise_sigma", t.env.lidar_noise_sigma}};
    doc["deploy"] = {{"deterministic", cfg.deploy.deterministic},
                     {"ensemble_var_floor", cfg.deploy.ensemble_var_floor},
                     {"stagnation_mean_gap", cfg.deploy.stagnation_mean_gap},
                     {"stagnation_var_cap", cfg.deploy.stagnation_var_cap}};
    doc["eval"] = {{"episodes_per", cfg.eval.episodes_per},
                   {"seed_base", cfg.eval.seed_base},
                   {"resolution", cfg.eval.resolution}};
    doc["out"] = cfg.out;
    doc["log_level"] = cfg.log_level;
    return doc.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = run_config_json(cfg);
    uint64_t h = 14695981039346656037ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw ParamError("bad seed list \"" + csv + "\": item \"" + item +
                             "\" is not a non-negative integer");
        }
        out.push_back(std::stoull(item));
    }
    if (out.empty()) throw ParamError("empty seed list");
    return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ParamError("empty item in list \"" + csv + "\"");
        out.push_back(item);
    }
    if (out.empty()) throw ParamError("empty list");
    return out;
}

}  // namespace mcf
