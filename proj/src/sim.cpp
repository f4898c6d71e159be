#include "mcf/sim.hpp"

#include <algorithm>
#include <cmath>

#include "mcf/errors.hpp"

namespace mcf {

std::array<double, Observation::kDim> Observation::flat() const {
    std::array<double, kDim> out{};
    for (int i = 0; i < kBins; ++i) out[i] = lidar_bins[i];
    out[15] = angle_to_goal;
    out[16] = dist_to_goal;
    out[17] = prev_v;
    out[18] = prev_w;
    return out;
}

const char* to_string(DoneReason r) {
    switch (r) {
        case DoneReason::running: return "running";
        case DoneReason::goal: return "goal";
        case DoneReason::collision: return "collision";
        case DoneReason::timeout: return "timeout";
    }
    return "?";
}

RobotState integrate(const RobotState& s, const Action& a, const WorldSpec& w) {
    RobotState out = s;
    out.x += a.v * w.v_max * std::cos(s.theta) * w.dt;
    out.y += a.v * w.v_max * std::sin(s.theta) * w.dt;
    out.theta = wrap_angle(s.theta + a.w * w.w_max * w.dt);
    out.prev_action = a;
    return out;
}

bool collides(const Vec2& p, const WorldSpec& w) {
    if (!w.bounds.contains(p)) return true;
    for (const Segment& s : w.walls) {
        if (point_segment_distance(p, s) < w.robot_radius) return true;
    }
    for (const Circle& c : w.obstacles) {
        if ((p - c.center).norm() < c.radius + w.robot_radius) return true;
    }
    return false;
}

std::vector<double> lidar_scan(const RobotState& s, const WorldSpec& w, Backend backend) {
    std::vector<double> out(static_cast<size_t>(w.lidar.beams));
    raycast_scan(w, s.x, s.y, s.theta, out, backend);
    return out;
}

Observation make_observation(const RobotState& s, const Vec2& goal,
                             std::span<const double> scan, const WorldSpec& w) {
    if (scan.size() != static_cast<size_t>(w.lidar.beams)) {
        throw DimensionError("make_observation: scan size " + std::to_string(scan.size()) +
                             " != " + std::to_string(w.lidar.beams));
    }
    Observation obs;
    const size_t per_bin = scan.size() / Observation::kBins;
    for (int j = 0; j < Observation::kBins; ++j) {
        double m = kInf;
        for (size_t i = per_bin * j; i < per_bin * (j + 1); ++i) m = std::min(m, scan[i]);
        obs.lidar_bins[j] = std::clamp(m / w.lidar.max_range, 0.0, 1.0);
    }
    const Vec2 d = goal - Vec2{s.x, s.y};
    obs.angle_to_goal = wrap_angle(std::atan2(d.y, d.x) - s.theta) / kPi;
    obs.dist_to_goal = std::clamp(d.norm() / w.diag(), 0.0, 1.0);
    obs.prev_v = s.prev_action.v;
    obs.prev_w = s.prev_action.w;
    return obs;
}

NavEnv::NavEnv(WorldSpec world, EnvOptions opts)
    : world_(std::move(world)), opts_(opts), noise_rng_(0) {
    world_.validate();
    if (opts_.d_threshold <= 0.0 || opts_.max_steps <= 0) {
        throw ParamError("NavEnv: d_threshold and max_steps must be positive");
    }
}

Observation NavEnv::reset(uint64_t seed) {
    Rng rng = Rng::derive(seed, "episode");
    auto sample_free = [&](const Rect& region, const char* which) -> Vec2 {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Vec2 p{rng.uniform(region.xmin, region.xmax), rng.uniform(region.ymin, region.ymax)};
            if (!collides(p, world_)) return p;
        }
        throw ArenaError(world_.name + ": could not sample a free " + std::string(which) +
                         " pose in 1000 attempts");
    };
    const Vec2 start = sample_free(world_.start_region, "start");
    goal_ = sample_free(world_.goal_region, "goal");
    state_ = RobotState{};
    state_.x = start.x;
    state_.y = start.y;
    state_.theta = kPi - rng.uniform() * 2.0 * kPi;  // uniform in (-pi, pi]
    noise_rng_ = Rng::derive(seed, "scan-noise");
    steps_ = 0;
    done_ = false;
    return observe();
}

Observation NavEnv::reset_to(const RobotState& state, const Vec2& goal) {
    state_ = state;
    state_.theta = wrap_angle(state.theta);
    goal_ = goal;
    noise_rng_ = Rng::derive(0, "scan-noise");
    steps_ = 0;
    done_ = false;
    return observe();
}

StepResult NavEnv::step(const Action& a) {
    if (done_) throw UsageError("NavEnv::step called after the episode finished");
    if (!std::isfinite(a.v) || !std::isfinite(a.w)) {
        throw ParamError("NavEnv::step: action components must be finite");
    }
    const RobotState candidate = integrate(state_, a, world_);
    const bool hit = collides({candidate.x, candidate.y}, world_);
    ++steps_;

    StepResult res;
    if (hit && opts_.collision_terminates) {
        state_ = candidate;
        res.done = true;
        res.reason = DoneReason::collision;
    } else {
        if (hit) {
            // Bump-and-stay: the move is refused but the episode continues.
            state_.prev_action = a;
        } else {
            state_ = candidate;
        }
        if (dist_to_goal() < opts_.d_threshold) {
            res.done = true;
            res.reason = DoneReason::goal;
            res.reward = 1.0;
        } else if (steps_ >= opts_.max_steps) {
            res.done = true;
            res.reason = DoneReason::timeout;
        }
    }
    done_ = res.done;
    res.obs = observe();
    return res;
}

double NavEnv::bearing_error() const {
    const Vec2 d = goal_ - Vec2{state_.x, state_.y};
    return wrap_angle(std::atan2(d.y, d.x) - state_.theta);
}

double NavEnv::dist_to_goal() const {
    return (goal_ - Vec2{state_.x, state_.y}).norm();
}

Observation NavEnv::observe() {
    scan_ = lidar_scan(state_, world_, opts_.backend);
    if (opts_.lidar_noise_sigma > 0.0) {
        for (double& r : scan_) {
            r = std::clamp(r + noise_rng_.normal(0.0, opts_.lidar_noise_sigma), 1e-6,
                           world_.lidar.max_range);
        }
    }
    return make_observation(state_, goal_, scan_, world_);
}

}  // namespace mcf
