#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "mcf/errors.hpp"
#include "mcf/world.hpp"

using namespace mcf;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
    return fs::temp_directory_path() / ("mcf_world_test_" + name);
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// A minimal valid arena document for loader error mutations.
const char* kValidJson = R"({
  "name": "tiny",
  "bounds": [0, 0, 10, 10],
  "walls": [[0,0,10,0],[10,0,10,10],[10,10,0,10],[0,10,0,0]],
  "circles": [[5.0, 5.0, 0.5]],
  "start_region": [0.6, 1.0, 1.1, 9.0],
  "goal_region": [8.9, 1.0, 9.4, 9.0],
  "robot_radius": 0.15,
  "lidar": {"beams": 180, "fov": 3.141592653589793, "max_range": 5.0},
  "dt": 0.1,
  "v_max": 0.5,
  "w_max": 1.0
})";

}  // namespace

TEST_CASE("builtin arenas: five of them, all valid, expected names") {
    auto arenas = builtin_arenas();
    REQUIRE(arenas.size() == 5);
    CHECK(arenas[0].name == "open");
    CHECK(arenas[1].name == "scatter");
    CHECK(arenas[2].name == "gaps");
    CHECK(arenas[3].name == "deadend");
    CHECK(arenas[4].name == "corridor");
    for (const auto& w : arenas) CHECK_NOTHROW(w.validate());
    CHECK_NOTHROW(unseen_arena().validate());
    CHECK(arena_names().size() == 6);
}

TEST_CASE("find_arena: lookup by name, unknown rejected") {
    CHECK(find_arena("deadend").name == "deadend");
    CHECK(find_arena("unseen").name == "unseen");
    CHECK_THROWS_AS(find_arena("atlantis"), ArenaError);
    try {
        find_arena("atlantis");
    } catch (const ArenaError& e) {
        CHECK(std::string(e.what()).find("open") != std::string::npos);  // lists known names
    }
}

TEST_CASE("validate: rejects structural defects") {
    WorldSpec good = find_arena("open");

    WorldSpec w = good;
    w.lidar.beams = 90;
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.lidar.fov = 2.0;
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.dt = 0.0;
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.start_region = {-1.0, 1.0, 0.5, 2.0};  // pokes outside bounds
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.obstacles.push_back({{0.85, 5.0}, 0.3});  // sits inside the start region
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.walls.push_back({{2.0, 2.0}, {2.0, 2.0}});  // zero length
    CHECK_THROWS_AS(w.validate(), ArenaError);

    w = good;
    w.start_region = {0.6, 9.0, 1.1, 1.0};  // inverted
    CHECK_THROWS_AS(w.validate(), ArenaError);
}

TEST_CASE("json round-trip preserves every field") {
    const WorldSpec orig = find_arena("scatter");
    const fs::path p = tmp_file("roundtrip.json");
    save_world_json(orig, p.string());
    const WorldSpec back = load_world_json(p.string());
    CHECK(back.name == orig.name);
    CHECK(back.bounds.xmin == orig.bounds.xmin);
    CHECK(back.bounds.ymax == orig.bounds.ymax);
    REQUIRE(back.walls.size() == orig.walls.size());
    for (size_t i = 0; i < orig.walls.size(); ++i) {
        CHECK(back.walls[i].a.x == orig.walls[i].a.x);
        CHECK(back.walls[i].b.y == orig.walls[i].b.y);
    }
    REQUIRE(back.obstacles.size() == orig.obstacles.size());
    for (size_t i = 0; i < orig.obstacles.size(); ++i) {
        CHECK(back.obstacles[i].center.x == orig.obstacles[i].center.x);
        CHECK(back.obstacles[i].radius == orig.obstacles[i].radius);
    }
    CHECK(back.start_region.xmin == orig.start_region.xmin);
    CHECK(back.goal_region.xmax == orig.goal_region.xmax);
    CHECK(back.robot_radius == orig.robot_radius);
    CHECK(back.lidar.beams == orig.lidar.beams);
    CHECK(back.lidar.max_range == orig.lidar.max_range);
    CHECK(back.dt == orig.dt);
    CHECK(back.v_max == orig.v_max);
    CHECK(back.w_max == orig.w_max);
    fs::remove(p);
}

TEST_CASE("loader: reports the JSON path of semantic errors") {
    const fs::path p = tmp_file("bad.json");

    SUBCASE("missing key") {
        std::string doc = kValidJson;
        doc.replace(doc.find("\"dt\""), 4, "\"dd\"");  // dt gone, dd unknown
        write_file(p, doc);
        CHECK_THROWS_AS(load_world_json(p.string()), ArenaError);
        try {
            load_world_json(p.string());
        } catch (const ArenaError& e) {
            CHECK(std::string(e.what()).find("dd") != std::string::npos);
        }
    }
    SUBCASE("unknown top-level key") {
        std::string doc = kValidJson;
        doc.insert(doc.rfind('}'), ", \"extra\": 1\n");
        write_file(p, doc);
        try {
            load_world_json(p.string());
            FAIL("expected ArenaError");
        } catch (const ArenaError& e) {
            CHECK(std::string(e.what()).find("/extra") != std::string::npos);
        }
    }
    SUBCASE("short wall entry names its index") {
        std::string doc = kValidJson;
        doc.replace(doc.find("[10,0,10,10]"), 12, "[10,0,10]");
        write_file(p, doc);
        try {
            load_world_json(p.string());
            FAIL("expected ArenaError");
        } catch (const ArenaError& e) {
            CHECK(std::string(e.what()).find("/walls/1") != std::string::npos);
        }
    }
    SUBCASE("non-numeric circle field") {
        std::string doc = kValidJson;
        doc.replace(doc.find("[5.0, 5.0, 0.5]"), 15, "[5.0, \"mid\", 0.5]");
        write_file(p, doc);
        try {
            load_world_json(p.string());
            FAIL("expected ArenaError");
        } catch (const ArenaError& e) {
            CHECK(std::string(e.what()).find("/circles/0/1") != std::string::npos);
        }
    }
    SUBCASE("syntax error carries parser position") {
        write_file(p, "{\"bounds\": [0, 0, 10,,\n");
        CHECK_THROWS_AS(load_world_json(p.string()), ArenaError);
    }
    SUBCASE("unknown lidar key") {
        std::string doc = kValidJson;
        doc.replace(doc.find("\"max_range\": 5.0"), 16, "\"range\": 5.0");
        write_file(p, doc);
        try {
            load_world_json(p.string());
            FAIL("expected ArenaError");
        } catch (const ArenaError& e) {
            CHECK(std::string(e.what()).find("/lidar") != std::string::npos);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_world_json("/nonexistent/nowhere.json"), ArenaError);
    }
    fs::remove(p);
}
