#pragma once

#include <string>
#include <vector>

#include "mcf/geom.hpp"

namespace mcf {

struct LidarSpec {
    int beams = 180;
    double fov = kPi;  // radians
    double max_range = 5.0;  // meters
};

// Immutable description of an arena: geometry, sampling regions, robot and
// sensor parameters. Safe to share across threads.
struct WorldSpec {
    std::string name;
    Rect bounds;
    std::vector<Segment> walls;
    std::vector<Circle> obstacles;
    Rect start_region;
    Rect goal_region;
    double robot_radius = 0.15;  // meters
    LidarSpec lidar;
    double dt = 0.1;    // seconds per step
    double v_max = 0.5;  // m/s at action v = 1
    double w_max = 1.0;  // rad/s at action w = 1

    // Throws ArenaError when any structural invariant fails: degenerate bounds,
    // regions outside bounds or touching inflated obstacles, non-positive
    // kinematic limits, malformed lidar block (beams must be 180, fov pi).
    void validate() const;

    double diag() const { return bounds.diag(); }
};

// The five training arenas, in increasing order of clutter:
// open, scatter, gaps, deadend, corridor.
std::vector<WorldSpec> builtin_arenas();

// Held-out arena used only for generalization runs, never for training.
WorldSpec unseen_arena();

// Lookup by name across the five built-ins plus "unseen".
// Throws ArenaError for unknown names.
WorldSpec find_arena(const std::string& name);

std::vector<std::string> arena_names();  // builtin names + "unseen"

// Strict JSON arena I/O. Unknown keys are rejected; semantic errors name the
// offending JSON path. Throws ArenaError.
WorldSpec load_world_json(const std::string& path);
void save_world_json(const WorldSpec& world, const std::string& path);

}  // namespace mcf
