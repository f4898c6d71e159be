#include "mcf/apf.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/geom.hpp"

namespace mcf {

void ApfConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ParamError(std::string("ApfConfig: ") + name + " must be positive");
        }
    };
    positive(k_att, "k_att");
    positive(k_rep, "k_rep");
    positive(influence_radius, "influence_radius");
    positive(k_heading, "k_heading");
    positive(slowdown_radius, "slowdown_radius");
    positive(train_sigma, "train_sigma");
    if (mc_samples < 2) throw ParamError("ApfConfig: mc_samples must be >= 2");
    if (!std::isfinite(sensor_sigma) || sensor_sigma < 0.0) {
        throw ParamError("ApfConfig: sensor_sigma must be >= 0");
    }
    if (!std::isfinite(variance_floor_c) || variance_floor_c < 0.0) {
        throw ParamError("ApfConfig: variance_floor_c must be >= 0");
    }
}

ApfResult apf_action(std::span<const double> scan, double angle_to_goal, const ApfConfig& cfg) {
    cfg.validate();
    if (scan.size() < 2) {
        throw DimensionError("apf_action: scan needs at least 2 beams (got " +
                             std::to_string(scan.size()) + ")");
    }
    const int n = static_cast<int>(scan.size());
    double fx = cfg.k_att * std::cos(angle_to_goal);
    double fy = cfg.k_att * std::sin(angle_to_goal);
    double nearest = kInf;
    for (int i = 0; i < n; ++i) {
        const double r = scan[i];
        if (!std::isfinite(r) || r <= 0.0) {
            throw ParamError("apf_action: scan ranges must be positive (beam " +
                             std::to_string(i) + " = " + std::to_string(r) + ")");
        }
        nearest = std::min(nearest, r);
        if (r < cfg.influence_radius) {
            const double mag = cfg.k_rep * (1.0 / r - 1.0 / cfg.influence_radius) *
                               (1.0 / r - 1.0 / cfg.influence_radius);
            const double phi = -kPi / 2.0 + i * kPi / (n - 1);  // beam direction, robot frame
            fx -= mag * std::cos(phi);
            fy -= mag * std::sin(phi);
        }
    }
    if (std::hypot(fx, fy) < 1e-9) {
        return {{0.0, 0.0}, true};  // attraction and repulsion cancelled out
    }
    const double heading_error = std::atan2(fy, fx);
    ApfResult out;
    out.action.w = std::clamp(cfg.k_heading * heading_error, -1.0, 1.0);
    const double caution = std::min(1.0, nearest / cfg.slowdown_radius);
    out.action.v = std::max(0.0, std::clamp(std::cos(heading_error) * caution, -1.0, 1.0));
    return out;
}

DiagGaussian2 prior_distribution_mc(std::span<const double> scan, double angle_to_goal,
                                    const ApfConfig& cfg, Rng& rng, double max_range,
                                    Backend backend) {
    cfg.validate();
    const int samples = cfg.mc_samples;
    const size_t n = scan.size();

    // Draw all noise up front, serially: backends then share one sample set.
    std::vector<double> noisy(static_cast<size_t>(samples) * n);
    for (int s = 0; s < samples; ++s) {
        for (size_t i = 0; i < n; ++i) {
            const double r = scan[i] + rng.normal(0.0, cfg.sensor_sigma);
            noisy[static_cast<size_t>(s) * n + i] = std::clamp(r, 1e-6, max_range);
        }
    }

    std::vector<Action> acts(static_cast<size_t>(samples));
    if (backend == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
        for (int s = 0; s < samples; ++s) {
            acts[s] = apf_action({&noisy[static_cast<size_t>(s) * n], n}, angle_to_goal, cfg)
                          .action;  // disjoint write per sample
        }
    } else {
        for (int s = 0; s < samples; ++s) {
            acts[s] = apf_action({&noisy[static_cast<size_t>(s) * n], n}, angle_to_goal, cfg).action;
        }
    }

    // Fixed-order serial reduction keeps the result backend-independent.
    double mv = 0.0, mw = 0.0;
    for (const Action& a : acts) {
        mv += a.v;
        mw += a.w;
    }
    mv /= samples;
    mw /= samples;
    double vv = 0.0, vw = 0.0;
    for (const Action& a : acts) {
        vv += (a.v - mv) * (a.v - mv);
        vw += (a.w - mw) * (a.w - mw);
    }
    vv /= samples;
    vw /= samples;

    // The 1e-12 guard only matters when the floor is configured to 0 and the
    // samples collapse; it keeps the output a valid distribution.
    DiagGaussian2 out;
    out.v = {mv, std::max({vv, cfg.variance_floor_c, 1e-12})};
    out.w = {mw, std::max({vw, cfg.variance_floor_c, 1e-12})};
    return out;
}

DiagGaussian2 prior_distribution_train(std::span<const double> scan, double angle_to_goal,
                                       const ApfConfig& cfg) {
    const ApfResult r = apf_action(scan, angle_to_goal, cfg);
    const double var = cfg.train_sigma * cfg.train_sigma;
    DiagGaussian2 out;
    out.v = {r.action.v, var};
    out.w = {r.action.w, var};
    return out;
}

}  // namespace mcf
