#pragma once
// Training orchestration: the gated-fusion exploration loop, the comparison
// modes (pure RL, demonstration replay, ungated fusion), periodic
// deterministic evaluation, and multi-seed suite production with CSV output.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcf/apf.hpp"
#include "mcf/gauss.hpp"
#include "mcf/sac.hpp"
#include "mcf/sim.hpp"
#include "mcf/world.hpp"

namespace mcf {

enum class TrainMode { mcf, e2e, demo_buffer, no_gating };
const char* to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);  // throws ParamError

struct TrainConfig {
    TrainMode mode = TrainMode::mcf;
    long total_steps = 50000;
    int eval_every_episodes = 5;   // evaluation cadence, in completed episodes
    int eval_episodes = 10;        // deterministic-mean episodes per eval point
    std::vector<uint64_t> seeds = {0, 1, 2};  // used by train_suite
    std::vector<std::string> arenas = {"open", "scatter", "gaps", "deadend", "corridor"};
    std::optional<GatingSchedule> gating;  // default: reverse_logistic(total_steps)
    SacConfig sac;
    ApfConfig apf;
    int demo_episodes_per_arena = 5;  // demonstration volume for demo_buffer mode
    EnvOptions env = training_env_defaults();
    long heatmap_window_steps = 0;    // visit recording horizon; 0 = whole run
    std::optional<double> alpha_override;  // pins the gate (diagnostics/tests)

    // Training keeps episodes alive through contact: colliding moves are
    // reverted in place instead of ending the episode, so even an undirected
    // policy accumulates full-length trajectories.
    static EnvOptions training_env_defaults();

    GatingSchedule effective_gating() const;
    void validate() const;  // throws ParamError / ArenaError
};

struct EvalPoint {
    long step = 0;     // environment steps completed when evaluated
    long episode = 0;  // training episodes completed when evaluated
    double mean_path_len = 0.0;  // meters; failures count the cap value
    double min_path_len = 0.0;
    double max_path_len = 0.0;
    double success_rate = 0.0;
    double alpha = 0.0;  // gate value in effect at this point
    std::vector<double> path_lengths;  // raw per-episode values
};

struct LearningCurve {
    std::vector<EvalPoint> points;
};

// Visitation counts over a world's bounding box, fixed cell size.
class VisitGrid {
  public:
    VisitGrid() = default;
    VisitGrid(const Rect& bounds, double cell);  // ParamError if cell <= 0

    void record(double x, double y);  // out-of-bounds points are clamped
    long at(int ix, int iy) const;
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double cell() const { return cell_; }
    long total() const { return total_; }
    Vec2 cell_center(int ix, int iy) const;

    // Fraction of all recorded visits whose cell center lies within `radius`
    // of the polyline `path` (or of the nearest of several polylines).
    // A single point is a valid degenerate polyline. UndefinedMetric when
    // nothing was recorded.
    double fraction_within(const std::vector<Vec2>& path, double radius) const;
    double fraction_within(const std::vector<std::vector<Vec2>>& paths, double radius) const;

  private:
    double xmin_ = 0.0, ymin_ = 0.0, cell_ = 0.0;
    int nx_ = 0, ny_ = 0;
    std::vector<long> counts_;
    long total_ = 0;
};

struct TrainResult {
    SacAgent agent;
    LearningCurve curve;
    long episodes = 0;
    long demo_transitions = 0;  // buffer demo count after prefill, before step 1
    TrainMode mode = TrainMode::mcf;
    uint64_t seed = 0;
    std::map<std::string, VisitGrid> heatmaps;  // per-arena visitation
};

// One full training run. Deterministic for a given (config, seed, backend).
// DivergenceError is rethrown with the environment step index attached.
TrainResult train_one(const TrainConfig& cfg, uint64_t seed,
                      Backend backend = Backend::OpenMP);

// Exploration coverage probe: runs the mode's acting loop (updates included)
// on one arena until `episodes` episodes finish, recording every post-step
// position. Zero episodes produce an empty grid.
VisitGrid exploration_heatmap(const TrainConfig& cfg, uint64_t seed, const std::string& arena,
                              int episodes, Backend backend = Backend::OpenMP);

struct RunSummary {
    TrainMode mode = TrainMode::mcf;
    uint64_t seed = 0;
    bool ok = false;
    bool diverged = false;  // the failure was a training divergence
    std::string error;      // failure description when !ok
    LearningCurve curve;
    long episodes = 0;
    std::string dir;  // run directory (relative to the suite output dir)
};

struct SuiteConfig {
    TrainConfig base;
    std::vector<TrainMode> modes = {TrainMode::mcf, TrainMode::e2e, TrainMode::demo_buffer};
    std::string out_dir;
    int workers = 1;
};

struct SuiteResult {
    std::vector<RunSummary> runs;  // one per (mode, seed), in launch order
};

// Runs every (mode, seed) pair, each into its own directory under out_dir:
// curve.csv, per-arena heatmap CSVs, the trained actor checkpoint, and a
// manifest. A failed run is recorded and the suite continues. One aggregate
// CSV holds each mode's across-seed mean and min/max band by eval index.
SuiteResult train_suite(const SuiteConfig& cfg);

// Curves to aggregate under one label (one label per mode, one curve per seed).
struct AggregateGroup {
    std::string label;
    std::vector<const LearningCurve*> curves;
};

// CSV writers (schemas consumed by the plot-data tool).
void write_curve_csv(const LearningCurve& curve, const std::string& path);
void write_heatmap_csv(const VisitGrid& grid, const std::string& path);
void write_aggregate_csv(const std::vector<AggregateGroup>& groups, const std::string& path);

// The fixed evaluation tasks: the j-th evaluation episode's reset seed.
// Shared by every run and mode so curves are comparable.
uint64_t eval_task_seed(int j);

}  // namespace mcf
