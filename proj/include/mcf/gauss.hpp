#pragma once

#include <cstdint>
#include <span>

#include "mcf/rng.hpp"

namespace mcf {

// Action pair in the normalized box [-1,1]^2: linear velocity v, angular w.
struct Action {
    double v = 0.0;
    double w = 0.0;
};

// One-dimensional Gaussian over a normalized action component.
struct Gaussian1 {
    double mean = 0.0;
    double var = 1.0;

    // Throws InvalidDistribution unless mean is finite and var is finite and > 0.
    void validate(const char* who) const;
};

// Independent Gaussians over (v, w).
struct DiagGaussian2 {
    Gaussian1 v;
    Gaussian1 w;

    void validate(const char* who) const;
};

// Reverse-logistic gating schedule: alpha(t) = 1 / (1 + exp(k * (t - t0))).
// Sweeps from ~1 at the start of training to ~0 at the end.
struct GatingSchedule {
    long midpoint_step = 0;  // t0
    double steepness = 1.0;  // k
    long total_steps = 1;

    // Defaults: t0 = 40% of total, k = 10/total. alpha(0) ~ 0.982, alpha(T) ~ 0.0025.
    static GatingSchedule reverse_logistic(long total_steps, double midpoint_frac = 0.4,
                                           double steepness_scale = 10.0);

    // Enforces alpha(0) > 0.5 and alpha(total_steps) < 0.5.
    void validate() const;
};

double alpha_at(const GatingSchedule& s, long step);

// Normalized product of two Gaussians. Per dimension:
//   mu'  = (mu_a * var_b + mu_b * var_a) / (var_a + var_b)
//   var' = var_a * var_b / (var_a + var_b)
Gaussian1 fuse_product(const Gaussian1& policy, const Gaussian1& prior);
DiagGaussian2 fuse_product(const DiagGaussian2& policy, const DiagGaussian2& prior);

// Gated powered product policy^(1-alpha) * prior^alpha, renormalized:
//   mu'  = (mu_t * var_p * (1-a) + mu_p * var_t * a) / (var_p * (1-a) + var_t * a)
//   var' = var_t * var_p / (var_p * (1-a) + var_t * a)
// alpha = 0 returns the policy exactly, alpha = 1 the prior exactly.
Gaussian1 fuse_gated(const Gaussian1& policy, const Gaussian1& prior, double alpha);
DiagGaussian2 fuse_gated(const DiagGaussian2& policy, const DiagGaussian2& prior, double alpha);

// Unimodal Gaussian approximation of an ensemble: mean of member means,
// population variance of member means floored at var_floor.
DiagGaussian2 aggregate_ensemble(std::span<const Action> member_means,
                                 double var_floor = 1e-6);

// Draw from the distribution, truncated to [-1,1] by clamping.
Action sample_clamped(const DiagGaussian2& dist, Rng& rng);

// Same draw from explicit standard-normal values (used to replay logged traces).
Action sample_clamped(const DiagGaussian2& dist, double z_v, double z_w);

}  // namespace mcf
