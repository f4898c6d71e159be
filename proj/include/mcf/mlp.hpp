#pragma once

// Dense feed-forward network with ReLU hidden layers, exact reverse-mode
// gradients (parameters and input), an adaptive-moment optimizer, and a
// binary checkpoint format. Parameters live in one flat vector so the
// optimizer and serializer treat every network uniformly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcf/rng.hpp"

namespace mcf {

enum class Head {
    Linear,    // raw affine outputs
    Gaussian,  // outputs = [means..., log_stds...]; log_stds clamped to [-20, 2]
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Activation storage for one forward pass. Owning it externally lets several
// threads evaluate the same (const) network at once, each with its own state.
struct MlpWorkspace {
    std::vector<std::vector<double>> acts;  // acts[0] = input, then post-activation
    std::vector<std::vector<double>> zs;    // pre-activation per layer
    bool ready = false;
};

class Mlp {
  public:
    // sizes = {input, hidden..., output}; at least one affine layer.
    // Parameters start at zero; call init_params for the trainable initializer.
    Mlp(std::vector<int> sizes, Head head);

    // Fan-in-scaled uniform weights U(-1/sqrt(fan_in), +1/sqrt(fan_in)), zero
    // biases; a Gaussian head gets its log_std biases set to -0.5.
    void init_params(Rng& rng);

    // Runs the network and caches activations for backward.
    std::vector<double> forward(std::span<const double> input);

    // Same computation, but activations live in the caller's workspace so a
    // const network can be shared across threads. Reusing one workspace across
    // calls avoids reallocation.
    std::vector<double> forward(std::span<const double> input, MlpWorkspace& ws) const;

    struct Gradients {
        std::vector<double> params;  // same layout as params()
        std::vector<double> input;   // d(loss)/d(input)
    };

    // Exact gradients of the last forward pass, given d(loss)/d(output).
    // Clamped log_std outputs gate their upstream gradient to zero.
    // Throws UsageError without a cached forward.
    Gradients backward(std::span<const double> upstream) const;

    // Convenience: accumulate backward() into flat buffers (same layout).
    void backward_into(std::span<const double> upstream, std::span<double> grad_params,
                       std::span<double> grad_input) const;

    // Workspace variant of backward_into; pairs with the workspace forward.
    void backward_into(const MlpWorkspace& ws, std::span<const double> upstream,
                       std::span<double> grad_params, std::span<double> grad_input) const;

    const std::vector<double>& params() const { return params_; }
    std::vector<double>& params() { return params_; }
    size_t param_count() const { return params_.size(); }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    Head head() const { return head_; }

  private:
    std::vector<int> sizes_;
    Head head_;
    std::vector<double> params_;          // [W0 row-major | b0 | W1 | b1 | ...]
    std::vector<size_t> w_off_, b_off_;   // per-layer offsets into params_

    mutable MlpWorkspace cache_;  // backs the workspace-free forward/backward
};

// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
  public:
    explicit Adam(size_t n, double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    // One update in place. Non-finite gradients raise DivergenceError.
    void step(std::span<double> params, std::span<const double> grads);

    long steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }

  private:
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

// Checkpoint layout: "MCFN" magic, uint32 little-endian header length, JSON
// header {format_version, layer_sizes, activation, head, param_count, dtype},
// then param_count float64 little-endian values.
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);  // throws ConfigError on malformed files

}  // namespace mcf
