#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcf/gauss.hpp"
#include "mcf/kernels.hpp"
#include "mcf/rng.hpp"
#include "mcf/world.hpp"

namespace mcf {

struct RobotState {
    double x = 0.0;       // meters
    double y = 0.0;       // meters
    double theta = 0.0;   // radians, wrapped to (-pi, pi]
    Action prev_action;   // previously commanded (v, w) in [-1,1]^2
};

// 19-component state input: 15 min-pooled normalized lidar bins, bearing
// error to goal / pi, distance to goal / arena diagonal, previous action.
struct Observation {
    static constexpr int kBins = 15;
    static constexpr int kDim = 19;

    std::array<double, kBins> lidar_bins{};
    double angle_to_goal = 0.0;  // in [-1, 1]
    double dist_to_goal = 0.0;   // in [0, 1]
    double prev_v = 0.0;
    double prev_w = 0.0;

    std::array<double, kDim> flat() const;
};

enum class DoneReason { running, goal, collision, timeout };
const char* to_string(DoneReason r);

struct StepResult {
    Observation obs;
    double reward = 0.0;  // sparse: 1 on goal arrival, else 0
    bool done = false;
    DoneReason reason = DoneReason::running;
};

struct EnvOptions {
    double d_threshold = 0.2;          // meters to count as arrived
    int max_steps = 500;               // episode cap
    bool collision_terminates = true;  // false: colliding moves are reverted in place
    double lidar_noise_sigma = 0.0;    // additive range noise std, 0 disables
    Backend backend = Backend::OpenMP;
};

// Pure kinematics: unicycle integration over one dt, theta wrapped.
RobotState integrate(const RobotState& s, const Action& a, const WorldSpec& w);

// True when a robot centered at p overlaps any wall, obstacle, or leaves bounds.
bool collides(const Vec2& p, const WorldSpec& w);

// Noiseless scan from the given pose.
std::vector<double> lidar_scan(const RobotState& s, const WorldSpec& w,
                               Backend backend = Backend::OpenMP);

Observation make_observation(const RobotState& s, const Vec2& goal,
                             std::span<const double> scan, const WorldSpec& w);

// Single-owner mutable episode state. Distinct instances are independent.
class NavEnv {
  public:
    explicit NavEnv(WorldSpec world, EnvOptions opts = {});

    // Samples start in start_region, goal in goal_region (collision-free,
    // rejection with 1000 attempts), heading uniform in (-pi, pi]. Throws
    // ArenaError if a region is blocked.
    Observation reset(uint64_t seed);

    // Pins the episode to an explicit pose and goal (tests, scripted demos).
    Observation reset_to(const RobotState& state, const Vec2& goal);

    // Advances one step; throws UsageError once the episode is done.
    StepResult step(const Action& a);

    const WorldSpec& world() const { return world_; }
    const EnvOptions& options() const { return opts_; }
    const RobotState& state() const { return state_; }
    const Vec2& goal() const { return goal_; }
    int step_count() const { return steps_; }
    bool done() const { return done_; }

    // Most recent scan (the one the last observation was built from).
    const std::vector<double>& last_scan() const { return scan_; }
    // Bearing error to the goal in radians (what the prior controller consumes).
    double bearing_error() const;
    double dist_to_goal() const;

  private:
    Observation observe();

    WorldSpec world_;
    EnvOptions opts_;
    RobotState state_;
    Vec2 goal_;
    std::vector<double> scan_;
    Rng noise_rng_;
    int steps_ = 0;
    bool done_ = false;
};

}  // namespace mcf
