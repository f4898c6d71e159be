#pragma once
// Soft actor-critic over the 19-dim navigation observation and 2-dim action.
//
// The actor is a tanh-squashed diagonal Gaussian: a 19->64->64->4 network
// emits per-dimension means and log-stds, actions are tanh(mu + sigma * z).
// Twin critics (21->64->64->1, state concatenated with action) and their
// polyak-averaged target copies provide the clipped double-Q backup with a
// fixed entropy temperature.
//
// Updates are deterministic for a given RNG stream and replay contents: all
// per-sample noise is drawn serially up front, per-sample gradients are
// accumulated into fixed chunks that threads write disjointly, and chunks are
// reduced in index order — so the OpenMP path is bit-identical to the serial
// one.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcf/apf.hpp"
#include "mcf/gauss.hpp"
#include "mcf/kernels.hpp"
#include "mcf/mlp.hpp"
#include "mcf/rng.hpp"
#include "mcf/sim.hpp"

namespace mcf {

struct SacConfig {
    double gamma = 0.99;           // discount
    double polyak = 0.995;         // target <- polyak * target + (1 - polyak) * online
    double alpha_entropy = 0.2;    // fixed entropy temperature
    double lr = 3e-4;              // Adam step size for actor and critics
    int batch_size = 128;
    size_t buffer_capacity = 100000;
    int warmup_steps = 1000;       // environment steps before updates begin
    std::vector<int> hidden = {64, 64};
    bool stratified_demo_sampling = false;  // half demo / half agent minibatches

    void validate() const;  // throws ParamError
};

// One environment transition. `timeout` marks episode ends that truncated an
// otherwise-live trajectory (step cap); those bootstrap as if non-terminal.
struct Transition {
    enum class Source { Agent, Demo };
    std::array<double, Observation::kDim> obs{};
    Action action{};
    double reward = 0.0;
    std::array<double, Observation::kDim> next_obs{};
    bool terminal = false;  // true only for goal/collision ends, not timeouts
    Source source = Source::Agent;
};

// Fixed-capacity ring buffer with per-source bookkeeping so minibatches can be
// stratified between demonstration and agent experience.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity);  // ParamError if capacity == 0

    void push(const Transition& t);
    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    size_t count(Transition::Source s) const;
    const Transition& at(size_t i) const { return data_[i]; }

    // `size` indices drawn uniformly with replacement. UsageError when empty.
    std::vector<size_t> sample_indices(size_t size, Rng& rng) const;

    // Half the indices from demo transitions, half from agent transitions
    // (extra index from the agent pool when `size` is odd). A missing pool
    // falls back to the other, so this never returns fewer than `size`.
    std::vector<size_t> sample_stratified(size_t size, Rng& rng) const;

  private:
    size_t capacity_;
    size_t next_ = 0;
    std::vector<Transition> data_;
    std::vector<size_t> demo_idx_;   // current indices holding demo transitions
    std::vector<size_t> agent_idx_;  // current indices holding agent transitions
    std::vector<size_t> pool_pos_;   // data_ index -> position in its pool
};

struct LossReport {
    double q1_loss = 0.0;
    double q2_loss = 0.0;
    double actor_loss = 0.0;
    double entropy = 0.0;  // mean of -log pi over the minibatch
};

// Optional capture of one update's internals, for gradient verification.
struct UpdateDiagnostics {
    std::vector<size_t> indices;          // minibatch replay indices
    std::vector<double> z_next, z_actor;  // 2 normals per sample each, sample-major
    std::vector<double> g_actor, g_q1, g_q2;  // gradients handed to the optimizers
};

class SacAgent {
  public:
    SacAgent(const SacConfig& cfg, uint64_t seed);

    // Current policy over actions, as an uncorrelated Gaussian in action
    // space: mean tanh(mu(s)), variance exp(log_std(s))^2 per dimension.
    DiagGaussian2 policy_distribution(std::span<const double> obs) const;

    // Deterministic greedy action tanh(mu(s)).
    Action actor_mean(std::span<const double> obs) const;

    // Tanh-squashed sample from the current policy.
    Action sample_action(std::span<const double> obs, Rng& rng) const;

    // One gradient step on both critics and the actor from a single
    // minibatch, then a polyak update of the target critics. Throws
    // UsageError if the buffer holds fewer than batch_size transitions and
    // DivergenceError if any loss or gradient goes non-finite.
    LossReport update(const ReplayBuffer& buffer, Rng& rng, Backend backend = Backend::OpenMP,
                      UpdateDiagnostics* diag = nullptr);

    const SacConfig& config() const { return cfg_; }
    const Mlp& actor() const { return actor_; }
    Mlp& actor() { return actor_; }
    const Mlp& q1() const { return q1_; }
    const Mlp& q2() const { return q2_; }
    const Mlp& q1_target() const { return q1t_; }
    const Mlp& q2_target() const { return q2t_; }
    long updates_done() const { return updates_; }

  private:
    SacConfig cfg_;
    Mlp actor_, q1_, q2_, q1t_, q2t_;
    Adam actor_opt_, q1_opt_, q2_opt_;
    long updates_ = 0;
};

// Drives the analytic controller `prior` through `env` for `episodes`
// episodes (seeded seed_base, seed_base+1, ...) and pushes every transition
// into `buffer` tagged Source::Demo. Returns the number of successful
// episodes. `prior` maps (scan, bearing error) to an Action.
size_t fill_demos(ReplayBuffer& buffer, NavEnv& env, const ApfConfig& prior, int episodes,
                  uint64_t seed_base);

}  // namespace mcf
