#pragma once

// Artificial-potential-field reactive controller: the hand-crafted prior.
// Attraction pulls toward the goal bearing, each lidar beam inside the
// influence radius pushes back along its own direction, and the net force
// steers the robot. A Monte-Carlo wrapper propagates sensor noise through
// the controller to produce an action distribution with a variance floor.

#include <span>

#include "mcf/gauss.hpp"
#include "mcf/kernels.hpp"
#include "mcf/rng.hpp"

namespace mcf {

struct ApfConfig {
    double k_att = 1.0;             // attractive gain
    double k_rep = 0.25;            // repulsive gain
    double influence_radius = 1.0;  // meters; beams beyond it do not repel
    double k_heading = 2.0;         // heading error -> angular velocity gain
    double slowdown_radius = 0.5;   // meters; closer obstacles scale speed down
    int mc_samples = 32;            // Monte-Carlo draws for the sensor-noise pushforward
    double sensor_sigma = 0.01;     // meters of additive range noise per beam
    double variance_floor_c = 0.2;  // lower bound on each action variance
    double train_sigma = 0.3;       // fixed exploration std during training

    void validate() const;  // throws ParamError
};

struct ApfResult {
    Action action;
    bool degenerate = false;  // net force vanished; action is (0, 0)
};

// Deterministic controller step. scan holds strictly positive ranges over a
// pi field of view (beam i in robot frame at -pi/2 + i*pi/(n-1));
// angle_to_goal is the bearing error in radians (0 = dead ahead).
ApfResult apf_action(std::span<const double> scan, double angle_to_goal, const ApfConfig& cfg);

// Pushes N(0, sensor_sigma^2) range noise through the controller mc_samples
// times: mean of the resulting actions, per-dimension population variance
// floored at variance_floor_c. Noisy ranges are clamped to (0, max_range].
DiagGaussian2 prior_distribution_mc(std::span<const double> scan, double angle_to_goal,
                                    const ApfConfig& cfg, Rng& rng, double max_range = kInf,
                                    Backend backend = Backend::OpenMP);

// Fixed-spread training distribution: mean = apf_action, std = train_sigma.
DiagGaussian2 prior_distribution_train(std::span<const double> scan, double angle_to_goal,
                                       const ApfConfig& cfg);

}  // namespace mcf
