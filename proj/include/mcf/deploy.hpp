#pragma once
// Deployment-time control: aggregate a trained actor ensemble into one
// Gaussian whose variance reflects member disagreement, build the
// sensor-noise prior, multiply the two densities, and act — with a complete
// per-step trace from which every emitted action reconstructs.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcf/apf.hpp"
#include "mcf/gauss.hpp"
#include "mcf/geom.hpp"
#include "mcf/kernels.hpp"
#include "mcf/mlp.hpp"
#include "mcf/rng.hpp"
#include "mcf/sim.hpp"

namespace mcf {

// Actor checkpoints with identical navigation-policy architectures.
class EnsembleBundle {
  public:
    // InsufficientEnsemble for fewer than two members; DimensionError when a
    // member's shape differs from the first or does not map the navigation
    // observation to a Gaussian action head. `seeds`, when given, must pair
    // one training seed with each member (ParamError otherwise).
    explicit EnsembleBundle(std::vector<Mlp> members, std::vector<uint64_t> seeds = {});

    // Loads every checkpoint; ConfigError naming all absent files at once.
    static EnsembleBundle load(const std::vector<std::string>& paths);

    // Collects <dir>/<mode>_seed<k>/actor.mcfn members, ordered by seed.
    static EnsembleBundle load_dir(const std::string& dir, const std::string& mode = "mcf");

    size_t size() const { return members_.size(); }
    const Mlp& member(size_t i) const;
    const std::vector<uint64_t>& seeds() const { return seeds_; }  // empty if unknown

    // Member i's mean action tanh(mu_i(obs)).
    Action member_mean(size_t i, std::span<const double> obs) const;

  private:
    std::vector<Mlp> members_;
    std::vector<uint64_t> seeds_;
};

struct DeployOptions {
    bool deterministic = true;  // emit the fused mean; false samples the fused density
    double ensemble_var_floor = 1e-6;
    double stagnation_mean_gap = 1.0;  // |ensemble mean - prior mean| alarm threshold
    double stagnation_var_cap = 0.05;  // both variances below this to trigger the alarm
    Backend backend = Backend::OpenMP;
};

// Mean of the member mean actions; population variance of those means,
// floored at var_floor. Member variances are intentionally discarded: the
// spread across members is the uncertainty signal.
DiagGaussian2 ensemble_distribution(const EnsembleBundle& bundle, std::span<const double> obs,
                                    double var_floor = 1e-6,
                                    Backend backend = Backend::OpenMP);

// One deployment decision, fully logged.
struct FusionStep {
    DiagGaussian2 ensemble;
    DiagGaussian2 prior;
    DiagGaussian2 fused;
    Action action;
    bool sampled = false;  // true: drawn with (z_v, z_w); false: clamped fused mean
    double z_v = 0.0, z_w = 0.0;
    double disagreement_v = 0.0, disagreement_w = 0.0;  // |ensemble mean - prior mean|
    bool stagnation_warning = false;
};

struct FusionTrace {
    std::vector<FusionStep> steps;
};

// Recomputes the executed action from the logged distribution and draws.
Action reconstruct_action(const FusionStep& step);

// The fused controller for one step: ensemble aggregate times MC prior.
// Draws the prior's sensor noise from `rng` first, then (only when sampling)
// the two action normals — one fixed order, so a seeded stream reproduces a
// run exactly. `max_range` bounds the prior's noisy ranges (the sensor cap).
FusionStep mcf_act(const EnsembleBundle& bundle, const ApfConfig& apf,
                   std::span<const double> obs, std::span<const double> scan,
                   double angle_to_goal, Rng& rng, const DeployOptions& opts = {},
                   double max_range = kInf);

enum class Controller { mcf, policy_only, prior_only, random };
const char* to_string(Controller c);
Controller controller_from_string(const std::string& s);  // ParamError

struct EpisodeRecord {
    Controller controller = Controller::mcf;
    uint64_t seed = 0;
    bool success = false;
    DoneReason reason = DoneReason::running;
    int steps = 0;
    double traveled = 0.0;  // integrated path length, meters
    Vec2 start{};
    Vec2 goal{};
    std::vector<Vec2> positions;  // post-step robot positions, one per step
    std::vector<Action> actions;  // executed actions, one per step
    // Fusion rows for mcf; for policy_only the ensemble distribution fills
    // all three slots (it is the whole controller). Empty for the others.
    FusionTrace trace;
};

// Runs one episode to termination (goal, collision, or step cap — a timeout
// is an outcome, not an error). The bundle is required for mcf and
// policy_only (UsageError otherwise). policy_only drives the ensemble mean
// deterministically; prior_only the deterministic reactive controller;
// random draws each action uniformly from the box.
EpisodeRecord run_episode(Controller controller, NavEnv& env, uint64_t seed,
                          const EnsembleBundle* bundle, const ApfConfig& apf,
                          const DeployOptions& opts = {});

// JSON-lines round trip: one header line, then one line per step.
void write_episode_jsonl(const EpisodeRecord& rec, const std::string& path);
EpisodeRecord read_episode_jsonl(const std::string& path);  // ConfigError on malformed input

}  // namespace mcf
