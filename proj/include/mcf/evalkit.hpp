#pragma once
// Navigation metrics: inflated-occupancy grid A* shortest paths, success
// weighted by path length (SPL), actuation time, and paired multi-method
// evaluation reports.

#include <cstdint>
#include <string>
#include <vector>

#include "mcf/deploy.hpp"
#include "mcf/geom.hpp"
#include "mcf/world.hpp"

namespace mcf {

// Occupancy-grid shortest path. Cells are square with side 1/resolution;
// a cell is blocked when a robot centered at the cell midpoint would collide
// (so the grid carries the robot-radius inflation).
struct GridPlan {
    double resolution = 20.0;       // cells per meter
    int nx = 0, ny = 0;             // grid extent; linear index ix + iy*nx
    std::vector<uint8_t> occupied;  // 1 = blocked
    std::vector<int> path;          // cell indices, start..goal inclusive
    double path_length = 0.0;       // meters

    Vec2 cell_center(int idx, const Rect& bounds) const;
    bool cell_blocked(int ix, int iy) const;
};

// 8-connected A* with the octile heuristic; straight moves cost one cell,
// diagonal moves sqrt(2), and a diagonal is allowed only when both adjacent
// straight cells are free (no corner cutting). Equal-cost pops break ties on
// the lowest cell index, so the result is deterministic. Start and goal snap
// to the nearest free cell within a 3-cell window (rounding a pose near an
// obstacle boundary into the grid can land its cell center inside the
// inflation); beyond that window, UnreachableError — as when no path exists.
// ParamError for a non-positive resolution or a point outside the bounds.
GridPlan astar_shortest(const WorldSpec& world, Vec2 start, Vec2 goal,
                        double resolution = 20.0);

struct EpisodeOutcome {
    bool success = false;
    double traveled = 0.0;  // executed path length, meters
    double shortest = 0.0;  // planner shortest path, meters (> 0)
};

// (1/N) * sum_i S_i * p_i / max(p_i, l_i), the success rate weighted by how
// close each successful run came to the shortest path. UndefinedMetric on
// no episodes; ParamError on a non-positive shortest or negative traveled
// length.
double spl(const std::vector<EpisodeOutcome>& episodes);

struct MethodRow {
    Controller method = Controller::mcf;
    std::string env;      // arena name
    double spl = 0.0;
    double actuation_steps = 0.0;  // mean control steps over all episodes
    int successes = 0;
    int episodes = 0;
    std::vector<EpisodeOutcome> outcomes;  // per-episode detail, episode order
};

struct EvalReport {
    std::vector<MethodRow> rows;  // method-major, then arena order as given
};

struct EvalSuiteOptions {
    int episodes_per = 50;
    uint64_t seed_base = 0;    // the shared episode seed list derives from this
    double resolution = 20.0;  // planner cells per meter
    EnvOptions env;            // deployment default: collisions terminate
    DeployOptions deploy;
    int workers = 1;  // (method, arena) cells run in parallel; output identical
};

// Runs every (method, arena) cell over one shared episode seed list, so the
// comparison is paired: method k's episode j faces the same start/goal draw
// in every arena. Learned methods need `bundle` (ConfigError otherwise);
// ParamError for empty method/arena lists or non-positive counts.
EvalReport evaluate_methods(const std::vector<Controller>& methods,
                            const std::vector<std::string>& arenas,
                            const EnsembleBundle* bundle, const ApfConfig& apf,
                            const EvalSuiteOptions& opts = {});

void write_report_json(const EvalReport& report, const std::string& path);
void write_report_md(const EvalReport& report, const std::string& path);
std::string report_table(const EvalReport& report);  // the markdown table text

}  // namespace mcf
