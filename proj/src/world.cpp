#include "mcf/world.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "mcf/errors.hpp"

namespace mcf {

using nlohmann::json;

namespace {

void check_region(const WorldSpec& w, const Rect& region, const char* which) {
    if (region.width() <= 0.0 || region.height() <= 0.0) {
        throw ArenaError(w.name + ": " + which + " region is degenerate");
    }
    if (!w.bounds.contains_rect(region)) {
        throw ArenaError(w.name + ": " + which + " region is not inside bounds");
    }
    for (size_t i = 0; i < w.walls.size(); ++i) {
        if (rect_segment_distance(region, w.walls[i]) <= w.robot_radius) {
            throw ArenaError(w.name + ": " + which + " region touches inflated wall #" +
                             std::to_string(i));
        }
    }
    for (size_t i = 0; i < w.obstacles.size(); ++i) {
        if (rect_circle_clearance(region, w.obstacles[i]) <= w.robot_radius) {
            throw ArenaError(w.name + ": " + which + " region touches inflated obstacle #" +
                             std::to_string(i));
        }
    }
}

std::vector<Segment> boundary_walls(const Rect& b) {
    return {
        {{b.xmin, b.ymin}, {b.xmax, b.ymin}},
        {{b.xmax, b.ymin}, {b.xmax, b.ymax}},
        {{b.xmax, b.ymax}, {b.xmin, b.ymax}},
        {{b.xmin, b.ymax}, {b.xmin, b.ymin}},
    };
}

WorldSpec base_arena(std::string name, Rect bounds) {
    WorldSpec w;
    w.name = std::move(name);
    w.bounds = bounds;
    w.walls = boundary_walls(bounds);
    return w;
}

}  // namespace

void WorldSpec::validate() const {
    if (name.empty()) throw ArenaError("arena has no name");
    if (bounds.width() <= 0.0 || bounds.height() <= 0.0) {
        throw ArenaError(name + ": bounds are degenerate");
    }
    if (!(robot_radius > 0.0) || !std::isfinite(robot_radius)) {
        throw ArenaError(name + ": robot_radius must be positive");
    }
    if (!(dt > 0.0) || !(v_max > 0.0) || !(w_max > 0.0)) {
        throw ArenaError(name + ": dt, v_max, w_max must all be positive");
    }
    if (lidar.beams != 180) {
        throw ArenaError(name + ": lidar.beams must be 180 (got " + std::to_string(lidar.beams) + ")");
    }
    if (std::abs(lidar.fov - kPi) > 1e-9) {
        throw ArenaError(name + ": lidar.fov must be pi radians");
    }
    if (!(lidar.max_range > 0.0)) {
        throw ArenaError(name + ": lidar.max_range must be positive");
    }
    for (size_t i = 0; i < walls.size(); ++i) {
        const Segment& s = walls[i];
        if (!std::isfinite(s.a.x) || !std::isfinite(s.a.y) || !std::isfinite(s.b.x) ||
            !std::isfinite(s.b.y)) {
            throw ArenaError(name + ": wall #" + std::to_string(i) + " has non-finite endpoint");
        }
        if ((s.b - s.a).norm() <= 0.0) {
            throw ArenaError(name + ": wall #" + std::to_string(i) + " has zero length");
        }
    }
    for (size_t i = 0; i < obstacles.size(); ++i) {
        const Circle& c = obstacles[i];
        if (!std::isfinite(c.center.x) || !std::isfinite(c.center.y) || !(c.radius > 0.0)) {
            throw ArenaError(name + ": obstacle #" + std::to_string(i) + " malformed");
        }
    }
    check_region(*this, start_region, "start");
    check_region(*this, goal_region, "goal");
}

std::vector<WorldSpec> builtin_arenas() {
    std::vector<WorldSpec> out;

    {  // open room: boundary walls only
        WorldSpec w = base_arena("open", {0, 0, 10, 10});
        w.start_region = {0.6, 1.0, 1.1, 9.0};
        w.goal_region = {8.9, 1.0, 9.4, 9.0};
        out.push_back(std::move(w));
    }
    {  // scattered circular obstacles mid-field
        WorldSpec w = base_arena("scatter", {0, 0, 10, 10});
        w.obstacles = {
            {{3.0, 2.5}, 0.40}, {{3.2, 7.0}, 0.45}, {{5.0, 4.8}, 0.50}, {{5.2, 1.5}, 0.35},
            {{6.8, 7.5}, 0.40}, {{7.0, 3.0}, 0.45}, {{4.5, 8.6}, 0.30},
        };
        w.start_region = {0.6, 1.0, 1.1, 9.0};
        w.goal_region = {8.9, 1.0, 9.4, 9.0};
        out.push_back(std::move(w));
    }
    {  // two cross walls with offset doorways: forces an S-shaped route
        WorldSpec w = base_arena("gaps", {0, 0, 10, 10});
        w.walls.push_back({{3.5, 0.0}, {3.5, 6.5}});
        w.walls.push_back({{3.5, 8.0}, {3.5, 10.0}});
        w.walls.push_back({{6.5, 0.0}, {6.5, 2.0}});
        w.walls.push_back({{6.5, 3.5}, {6.5, 10.0}});
        w.start_region = {0.6, 1.0, 1.1, 9.0};
        w.goal_region = {8.9, 1.0, 9.4, 9.0};
        out.push_back(std::move(w));
    }
    {  // U-shaped pocket opening toward the start: a classic reactive trap
        WorldSpec w = base_arena("deadend", {0, 0, 10, 10});
        w.walls.push_back({{4.2, 6.2}, {6.2, 6.2}});
        w.walls.push_back({{6.2, 3.8}, {6.2, 6.2}});
        w.walls.push_back({{4.2, 3.8}, {6.2, 3.8}});
        w.start_region = {0.6, 4.2, 1.1, 5.8};
        w.goal_region = {8.9, 4.2, 9.4, 5.8};
        out.push_back(std::move(w));
    }
    {  // long room with two offset baffles
        WorldSpec w = base_arena("corridor", {0, 0, 12, 6});
        w.walls.push_back({{4.0, 0.0}, {4.0, 3.8}});
        w.walls.push_back({{8.0, 2.2}, {8.0, 6.0}});
        w.start_region = {0.6, 2.4, 1.1, 3.6};
        w.goal_region = {10.9, 2.4, 11.4, 3.6};
        out.push_back(std::move(w));
    }

    for (const WorldSpec& w : out) w.validate();
    return out;
}

WorldSpec unseen_arena() {
    // Mix of a diagonal wall and circles: geometry unlike any training arena.
    WorldSpec w = base_arena("unseen", {0, 0, 10, 10});
    w.walls.push_back({{2.8, 2.0}, {5.2, 4.4}});
    w.obstacles = {{{6.8, 6.8}, 0.45}, {{4.2, 7.6}, 0.40}, {{7.4, 2.6}, 0.35}};
    w.start_region = {0.6, 1.0, 1.1, 9.0};
    w.goal_region = {8.9, 1.0, 9.4, 9.0};
    w.validate();
    return w;
}

WorldSpec find_arena(const std::string& name) {
    if (name == "unseen") return unseen_arena();
    for (WorldSpec& w : builtin_arenas()) {
        if (w.name == name) return std::move(w);
    }
    std::string known;
    for (const std::string& n : arena_names()) known += (known.empty() ? "" : ", ") + n;
    throw ArenaError("unknown arena '" + name + "' (known: " + known + ")");
}

std::vector<std::string> arena_names() {
    std::vector<std::string> names;
    for (const WorldSpec& w : builtin_arenas()) names.push_back(w.name);
    names.push_back("unseen");
    return names;
}

namespace {

[[noreturn]] void fail_at(const std::string& path, const std::string& where, const std::string& what) {
    throw ArenaError(path + ": " + where + ": " + what);
}

double num_at(const json& j, const std::string& path, const std::string& where) {
    if (!j.is_number()) fail_at(path, where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail_at(path, where, "must be finite");
    return v;
}

Rect rect_at(const json& j, const std::string& path, const std::string& where) {
    if (!j.is_array() || j.size() != 4) fail_at(path, where, "expected [xmin, ymin, xmax, ymax]");
    Rect r;
    r.xmin = num_at(j[0], path, where + "/0");
    r.ymin = num_at(j[1], path, where + "/1");
    r.xmax = num_at(j[2], path, where + "/2");
    r.ymax = num_at(j[3], path, where + "/3");
    return r;
}

void reject_unknown(const json& j, const std::string& path, const std::string& where,
                    const std::set<std::string>& known) {
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) fail_at(path, where + "/" + key, "unknown key");
    }
}

}  // namespace

WorldSpec load_world_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArenaError(path + ": cannot open file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArenaError(path + ": " + e.what());
    }
    if (!j.is_object()) fail_at(path, "", "top level must be an object");
    reject_unknown(j, path, "", {"name", "bounds", "walls", "circles", "start_region",
                                 "goal_region", "robot_radius", "lidar", "dt", "v_max", "w_max"});
    for (const char* key : {"bounds", "walls", "circles", "start_region", "goal_region",
                            "robot_radius", "lidar", "dt", "v_max", "w_max"}) {
        if (!j.contains(key)) fail_at(path, "", std::string("missing key '") + key + "'");
    }

    WorldSpec w;
    w.name = j.value("name", std::string());
    if (w.name.empty()) {
        const size_t slash = path.find_last_of('/');
        std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
        const size_t dot = base.find_last_of('.');
        w.name = (dot == std::string::npos) ? base : base.substr(0, dot);
    }
    w.bounds = rect_at(j["bounds"], path, "/bounds");
    if (!j["walls"].is_array()) fail_at(path, "/walls", "expected an array");
    for (size_t i = 0; i < j["walls"].size(); ++i) {
        const json& e = j["walls"][i];
        const std::string where = "/walls/" + std::to_string(i);
        if (!e.is_array() || e.size() != 4) fail_at(path, where, "expected [x1, y1, x2, y2]");
        Segment s;
        s.a = {num_at(e[0], path, where + "/0"), num_at(e[1], path, where + "/1")};
        s.b = {num_at(e[2], path, where + "/2"), num_at(e[3], path, where + "/3")};
        w.walls.push_back(s);
    }
    if (!j["circles"].is_array()) fail_at(path, "/circles", "expected an array");
    for (size_t i = 0; i < j["circles"].size(); ++i) {
        const json& e = j["circles"][i];
        const std::string where = "/circles/" + std::to_string(i);
        if (!e.is_array() || e.size() != 3) fail_at(path, where, "expected [cx, cy, r]");
        Circle c;
        c.center = {num_at(e[0], path, where + "/0"), num_at(e[1], path, where + "/1")};
        c.radius = num_at(e[2], path, where + "/2");
        w.obstacles.push_back(c);
    }
    w.start_region = rect_at(j["start_region"], path, "/start_region");
    w.goal_region = rect_at(j["goal_region"], path, "/goal_region");
    w.robot_radius = num_at(j["robot_radius"], path, "/robot_radius");
    const json& lj = j["lidar"];
    if (!lj.is_object()) fail_at(path, "/lidar", "expected an object");
    reject_unknown(lj, path, "/lidar", {"beams", "fov", "max_range"});
    for (const char* key : {"beams", "fov", "max_range"}) {
        if (!lj.contains(key)) fail_at(path, "/lidar", std::string("missing key '") + key + "'");
    }
    if (!lj["beams"].is_number_integer()) fail_at(path, "/lidar/beams", "expected an integer");
    w.lidar.beams = lj["beams"].get<int>();
    w.lidar.fov = num_at(lj["fov"], path, "/lidar/fov");
    w.lidar.max_range = num_at(lj["max_range"], path, "/lidar/max_range");
    w.dt = num_at(j["dt"], path, "/dt");
    w.v_max = num_at(j["v_max"], path, "/v_max");
    w.w_max = num_at(j["w_max"], path, "/w_max");

    try {
        w.validate();
    } catch (const ArenaError& e) {
        throw ArenaError(path + ": " + e.what());
    }
    return w;
}

void save_world_json(const WorldSpec& world, const std::string& path) {
    json j;
    j["name"] = world.name;
    j["bounds"] = {world.bounds.xmin, world.bounds.ymin, world.bounds.xmax, world.bounds.ymax};
    j["walls"] = json::array();
    for (const Segment& s : world.walls) j["walls"].push_back({s.a.x, s.a.y, s.b.x, s.b.y});
    j["circles"] = json::array();
    for (const Circle& c : world.obstacles) j["circles"].push_back({c.center.x, c.center.y, c.radius});
    j["start_region"] = {world.start_region.xmin, world.start_region.ymin, world.start_region.xmax,
                         world.start_region.ymax};
    j["goal_region"] = {world.goal_region.xmin, world.goal_region.ymin, world.goal_region.xmax,
                        world.goal_region.ymax};
    j["robot_radius"] = world.robot_radius;
    j["lidar"] = {{"beams", world.lidar.beams}, {"fov", world.lidar.fov},
                  {"max_range", world.lidar.max_range}};
    j["dt"] = world.dt;
    j["v_max"] = world.v_max;
    j["w_max"] = world.w_max;
    std::ofstream out(path);
    if (!out) throw ArenaError(path + ": cannot open file for writing");
    out << j.dump(2) << "\n";
}

}  // namespace mcf
