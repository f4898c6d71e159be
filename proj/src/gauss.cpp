#include "mcf/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

void Gaussian1::validate(const char* who) const {
    if (!std::isfinite(mean) || !std::isfinite(var) || var <= 0.0) {
        throw InvalidDistribution(std::string(who) + ": mean must be finite and var > 0 (got mean=" +
                                  std::to_string(mean) + ", var=" + std::to_string(var) + ")");
    }
}

void DiagGaussian2::validate(const char* who) const {
    v.validate(who);
    w.validate(who);
}

GatingSchedule GatingSchedule::reverse_logistic(long total_steps, double midpoint_frac,
                                                double steepness_scale) {
    if (total_steps <= 0) {
        throw ParamError("GatingSchedule: total_steps must be positive");
    }
    GatingSchedule s;
    s.total_steps = total_steps;
    s.midpoint_step = static_cast<long>(midpoint_frac * static_cast<double>(total_steps));
    s.steepness = steepness_scale / static_cast<double>(total_steps);
    return s;
}

void GatingSchedule::validate() const {
    if (total_steps <= 0) {
        throw ParamError("GatingSchedule: total_steps must be positive");
    }
    if (!std::isfinite(steepness) || steepness <= 0.0) {
        throw ParamError("GatingSchedule: steepness must be finite and positive");
    }
    if (alpha_at(*this, 0) <= 0.5) {
        throw ParamError("GatingSchedule: alpha(0) must exceed 0.5 (prior-dominant start)");
    }
    if (alpha_at(*this, total_steps) >= 0.5) {
        throw ParamError("GatingSchedule: alpha(total_steps) must fall below 0.5 (policy-dominant end)");
    }
}

double alpha_at(const GatingSchedule& s, long step) {
    const double t = static_cast<double>(step);
    const double t0 = static_cast<double>(s.midpoint_step);
    return 1.0 / (1.0 + std::exp(s.steepness * (t - t0)));
}

Gaussian1 fuse_product(const Gaussian1& policy, const Gaussian1& prior) {
    policy.validate("fuse_product(policy)");
    prior.validate("fuse_product(prior)");
    const double denom = policy.var + prior.var;
    Gaussian1 out;
    out.mean = (policy.mean * prior.var + prior.mean * policy.var) / denom;
    out.var = policy.var * prior.var / denom;
    return out;
}

DiagGaussian2 fuse_product(const DiagGaussian2& policy, const DiagGaussian2& prior) {
    return {fuse_product(policy.v, prior.v), fuse_product(policy.w, prior.w)};
}

Gaussian1 fuse_gated(const Gaussian1& policy, const Gaussian1& prior, double alpha) {
    policy.validate("fuse_gated(policy)");
    prior.validate("fuse_gated(prior)");
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
        throw ParamError("fuse_gated: alpha must lie in [0,1] (got " + std::to_string(alpha) + ")");
    }
    // Exact endpoint identities: the weighted formulas reproduce these only up to
    // rounding, but alpha = 0 must return the policy bit-for-bit (and alpha = 1
    // the prior) so a gated run with a pinned endpoint matches an ungated one.
    if (alpha == 0.0) return policy;
    if (alpha == 1.0) return prior;
    const double denom = prior.var * (1.0 - alpha) + policy.var * alpha;
    Gaussian1 out;
    out.mean = (policy.mean * prior.var * (1.0 - alpha) + prior.mean * policy.var * alpha) / denom;
    out.var = policy.var * prior.var / denom;
    return out;
}

DiagGaussian2 fuse_gated(const DiagGaussian2& policy, const DiagGaussian2& prior, double alpha) {
    return {fuse_gated(policy.v, prior.v, alpha), fuse_gated(policy.w, prior.w, alpha)};
}

DiagGaussian2 aggregate_ensemble(std::span<const Action> member_means, double var_floor) {
    if (member_means.size() < 2) {
        throw InsufficientEnsemble("aggregate_ensemble: need at least 2 members (got " +
                                   std::to_string(member_means.size()) + ")");
    }
    const double n = static_cast<double>(member_means.size());
    double mv = 0.0, mw = 0.0;
    for (const Action& a : member_means) {
        mv += a.v;
        mw += a.w;
    }
    mv /= n;
    mw /= n;
    double sv = 0.0, sw = 0.0;
    for (const Action& a : member_means) {
        sv += (a.v - mv) * (a.v - mv);
        sw += (a.w - mw) * (a.w - mw);
    }
    DiagGaussian2 out;
    out.v = {mv, std::max(sv / n, var_floor)};
    out.w = {mw, std::max(sw / n, var_floor)};
    return out;
}

Action sample_clamped(const DiagGaussian2& dist, Rng& rng) {
    const double zv = rng.normal();
    const double zw = rng.normal();
    return sample_clamped(dist, zv, zw);
}

Action sample_clamped(const DiagGaussian2& dist, double z_v, double z_w) {
    dist.validate("sample_clamped");
    Action a;
    a.v = std::clamp(dist.v.mean + std::sqrt(dist.v.var) * z_v, -1.0, 1.0);
    a.w = std::clamp(dist.w.mean + std::sqrt(dist.w.var) * z_w, -1.0, 1.0);
    return a;
}

}  // namespace mcf
