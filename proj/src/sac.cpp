#include "mcf/sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2 * pi)

// log(1 - tanh(u)^2) without catastrophic cancellation for large |u|.
double log_one_minus_tanh_sq(double u) {
    return 2.0 * (std::log(2.0) - u - std::log1p(std::exp(-2.0 * u)));
}

// Log-density of the tanh-squashed Gaussian sample with pre-squash value u,
// standard normal draw z and log-std ls, summed over one dimension.
double squashed_logp_dim(double z, double ls, double u) {
    return -0.5 * z * z - kHalfLog2Pi - ls - log_one_minus_tanh_sq(u);
}

std::vector<int> critic_sizes(const SacConfig& cfg) {
    std::vector<int> sizes{Observation::kDim + 2};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(1);
    return sizes;
}

std::vector<int> actor_sizes(const SacConfig& cfg) {
    std::vector<int> sizes{Observation::kDim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(4);
    return sizes;
}

Mlp make_net(const std::vector<int>& sizes, Head head, Rng rng) {
    Mlp net(sizes, head);
    net.init_params(rng);
    return net;
}

}  // namespace

void SacConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ParamError(std::string("SacConfig: ") + name + " must be finite and > 0");
        }
    };
    if (!(gamma > 0.0 && gamma < 1.0)) throw ParamError("SacConfig: gamma must be in (0, 1)");
    if (!(polyak > 0.0 && polyak <= 1.0)) {
        throw ParamError("SacConfig: polyak must be in (0, 1]");
    }
    positive(alpha_entropy, "alpha_entropy");
    positive(lr, "lr");
    if (batch_size < 1) throw ParamError("SacConfig: batch_size must be >= 1");
    if (buffer_capacity == 0) throw ParamError("SacConfig: buffer_capacity must be > 0");
    if (warmup_steps < 0) throw ParamError("SacConfig: warmup_steps must be >= 0");
    if (hidden.empty()) throw ParamError("SacConfig: at least one hidden layer required");
    for (int h : hidden) {
        if (h < 1) throw ParamError("SacConfig: hidden layer widths must be >= 1");
    }
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ParamError("ReplayBuffer: capacity must be > 0");
    data_.reserve(std::min(capacity, size_t{4096}));
}

size_t ReplayBuffer::count(Transition::Source s) const {
    return s == Transition::Source::Demo ? demo_idx_.size() : agent_idx_.size();
}

void ReplayBuffer::push(const Transition& t) {
    auto pool_of = [this](Transition::Source s) -> std::vector<size_t>& {
        return s == Transition::Source::Demo ? demo_idx_ : agent_idx_;
    };
    if (data_.size() < capacity_) {
        data_.push_back(t);
        pool_pos_.push_back(0);
        const size_t slot = data_.size() - 1;
        auto& pool = pool_of(t.source);
        pool_pos_[slot] = pool.size();
        pool.push_back(slot);
        next_ = data_.size() % capacity_;
        return;
    }
    // Overwrite the oldest slot: remove it from its source pool (swap with the
    // pool's last entry to stay O(1)), then re-register under the new source.
    const size_t slot = next_;
    auto& old_pool = pool_of(data_[slot].source);
    const size_t pos = pool_pos_[slot];
    old_pool[pos] = old_pool.back();
    pool_pos_[old_pool[pos]] = pos;
    old_pool.pop_back();

    data_[slot] = t;
    auto& pool = pool_of(t.source);
    pool_pos_[slot] = pool.size();
    pool.push_back(slot);
    next_ = (next_ + 1) % capacity_;
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t size, Rng& rng) const {
    if (data_.empty()) throw UsageError("ReplayBuffer::sample_indices on an empty buffer");
    std::vector<size_t> out(size);
    for (size_t i = 0; i < size; ++i) {
        out[i] = static_cast<size_t>(rng.uniform_int(static_cast<uint64_t>(data_.size())));
    }
    return out;
}

std::vector<size_t> ReplayBuffer::sample_stratified(size_t size, Rng& rng) const {
    if (data_.empty()) throw UsageError("ReplayBuffer::sample_stratified on an empty buffer");
    if (demo_idx_.empty() || agent_idx_.empty()) return sample_indices(size, rng);
    std::vector<size_t> out(size);
    const size_t n_demo = size / 2;
    for (size_t i = 0; i < size; ++i) {
        const auto& pool = i < n_demo ? demo_idx_ : agent_idx_;
        out[i] = pool[rng.uniform_int(static_cast<uint64_t>(pool.size()))];
    }
    return out;
}

SacAgent::SacAgent(const SacConfig& cfg, uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      actor_(make_net(actor_sizes(cfg), Head::Gaussian, Rng::derive(seed, "actor"))),
      q1_(make_net(critic_sizes(cfg), Head::Linear, Rng::derive(seed, "q1"))),
      q2_(make_net(critic_sizes(cfg), Head::Linear, Rng::derive(seed, "q2"))),
      q1t_(q1_),
      q2t_(q2_),
      actor_opt_(actor_.param_count(), cfg.lr),
      q1_opt_(q1_.param_count(), cfg.lr),
      q2_opt_(q2_.param_count(), cfg.lr) {}

DiagGaussian2 SacAgent::policy_distribution(std::span<const double> obs) const {
    MlpWorkspace ws;
    const auto out = actor_.forward(obs, ws);
    DiagGaussian2 d;
    d.v = Gaussian1{std::tanh(out[0]), std::exp(2.0 * out[2])};
    d.w = Gaussian1{std::tanh(out[1]), std::exp(2.0 * out[3])};
    return d;
}

Action SacAgent::actor_mean(std::span<const double> obs) const {
    MlpWorkspace ws;
    const auto out = actor_.forward(obs, ws);
    return Action{std::tanh(out[0]), std::tanh(out[1])};
}

Action SacAgent::sample_action(std::span<const double> obs, Rng& rng) const {
    return sample_clamped(policy_distribution(obs), rng);
}

LossReport SacAgent::update(const ReplayBuffer& buffer, Rng& rng, Backend backend,
                            UpdateDiagnostics* diag) {
    const int B = cfg_.batch_size;
    if (buffer.size() < static_cast<size_t>(B)) {
        throw UsageError("SacAgent::update: buffer holds " + std::to_string(buffer.size()) +
                         " transitions, batch needs " + std::to_string(B));
    }
    const std::vector<size_t> idx = cfg_.stratified_demo_sampling
                                        ? buffer.sample_stratified(static_cast<size_t>(B), rng)
                                        : buffer.sample_indices(static_cast<size_t>(B), rng);

    // All randomness is drawn serially up front (4 standard normals per
    // sample, in sample order) so the parallel path consumes no RNG.
    std::vector<double> z2(2 * B), za(2 * B);
    for (int i = 0; i < B; ++i) {
        z2[2 * i] = rng.normal();
        z2[2 * i + 1] = rng.normal();
        za[2 * i] = rng.normal();
        za[2 * i + 1] = rng.normal();
    }

    constexpr int kChunk = 16;
    const int nchunks = (B + kChunk - 1) / kChunk;
    const size_t np_actor = actor_.param_count();
    const size_t np_q = q1_.param_count();

    struct ChunkAccum {
        std::vector<double> g_actor, g_q1, g_q2;
        double q1_loss = 0.0, q2_loss = 0.0, actor_loss = 0.0, entropy = 0.0;
    };
    std::vector<ChunkAccum> acc(static_cast<size_t>(nchunks));
    for (auto& a : acc) {
        a.g_actor.assign(np_actor, 0.0);
        a.g_q1.assign(np_q, 0.0);
        a.g_q2.assign(np_q, 0.0);
    }

    const double alpha = cfg_.alpha_entropy;
    const double gamma = cfg_.gamma;
    const double inv_b = 1.0 / static_cast<double>(B);

    auto process_chunk = [&](int c) {
        ChunkAccum& A = acc[static_cast<size_t>(c)];
        MlpWorkspace ws_actor, ws_q, ws_qa1, ws_qa2;
        std::vector<double> x(Observation::kDim + 2);
        std::vector<double> scratch_qp(np_q), scratch_gi_q(Observation::kDim + 2);
        std::vector<double> scratch_gi_a(Observation::kDim);
        const int lo = c * kChunk;
        const int hi = std::min(B, lo + kChunk);
        for (int i = lo; i < hi; ++i) {
            const Transition& t = buffer.at(idx[static_cast<size_t>(i)]);

            // Bellman target from the target critics and a fresh next action.
            const auto out2 = actor_.forward(t.next_obs, ws_actor);
            double a2[2], logp2 = 0.0;
            for (int d = 0; d < 2; ++d) {
                const double ls = out2[2 + d];
                const double u = out2[d] + std::exp(ls) * z2[2 * i + d];
                a2[d] = std::tanh(u);
                logp2 += squashed_logp_dim(z2[2 * i + d], ls, u);
            }
            std::copy(t.next_obs.begin(), t.next_obs.end(), x.begin());
            x[Observation::kDim] = a2[0];
            x[Observation::kDim + 1] = a2[1];
            const double y1 = q1t_.forward(x, ws_q)[0];
            const double y2 = q2t_.forward(x, ws_q)[0];
            const double not_done = t.terminal ? 0.0 : 1.0;
            const double target =
                t.reward + gamma * not_done * (std::min(y1, y2) - alpha * logp2);

            // Critic regression toward the target.
            std::copy(t.obs.begin(), t.obs.end(), x.begin());
            x[Observation::kDim] = t.action.v;
            x[Observation::kDim + 1] = t.action.w;
            for (Mlp* q : {&q1_, &q2_}) {
                const double qv = q->forward(x, ws_q)[0];
                const double err = qv - target;
                const double up = 2.0 * err * inv_b;
                auto& gq = q == &q1_ ? A.g_q1 : A.g_q2;
                std::fill(scratch_gi_q.begin(), scratch_gi_q.end(), 0.0);
                q->backward_into(ws_q, std::span<const double>(&up, 1), gq, scratch_gi_q);
                (q == &q1_ ? A.q1_loss : A.q2_loss) += err * err * inv_b;
            }

            // Actor ascent on min-Q of a reparameterized action.
            const auto out = actor_.forward(t.obs, ws_actor);
            double tnh[2], sz[2], logp = 0.0;
            for (int d = 0; d < 2; ++d) {
                const double ls = out[2 + d];
                sz[d] = std::exp(ls) * za[2 * i + d];
                const double u = out[d] + sz[d];
                tnh[d] = std::tanh(u);
                logp += squashed_logp_dim(za[2 * i + d], ls, u);
            }
            std::copy(t.obs.begin(), t.obs.end(), x.begin());
            x[Observation::kDim] = tnh[0];
            x[Observation::kDim + 1] = tnh[1];
            const double qa1 = q1_.forward(x, ws_qa1)[0];
            const double qa2 = q2_.forward(x, ws_qa2)[0];
            const bool use_q1 = qa1 <= qa2;
            const double qmin = use_q1 ? qa1 : qa2;

            // d(min Q)/d(action): critic input gradient, parameters discarded.
            const double one = 1.0;
            std::fill(scratch_qp.begin(), scratch_qp.end(), 0.0);
            std::fill(scratch_gi_q.begin(), scratch_gi_q.end(), 0.0);
            (use_q1 ? q1_ : q2_)
                .backward_into(use_q1 ? ws_qa1 : ws_qa2, std::span<const double>(&one, 1),
                               scratch_qp, scratch_gi_q);
            const double dq_da[2] = {scratch_gi_q[Observation::kDim],
                                     scratch_gi_q[Observation::kDim + 1]};

            double up4[4];
            for (int d = 0; d < 2; ++d) {
                const double dsq = 1.0 - tnh[d] * tnh[d];
                const double dl_du = (alpha * 2.0 * tnh[d] - dq_da[d] * dsq) * inv_b;
                up4[d] = dl_du;
                up4[2 + d] = dl_du * sz[d] - alpha * inv_b;
            }
            std::fill(scratch_gi_a.begin(), scratch_gi_a.end(), 0.0);
            actor_.backward_into(ws_actor, up4, A.g_actor, scratch_gi_a);

            A.actor_loss += (alpha * logp - qmin) * inv_b;
            A.entropy += -logp * inv_b;
        }
    };

    if (backend == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < nchunks; ++c) process_chunk(c);
    } else {
        for (int c = 0; c < nchunks; ++c) process_chunk(c);
    }

    // Fixed-order reduction keeps results identical across backends.
    std::vector<double> g_actor(np_actor, 0.0), g_q1(np_q, 0.0), g_q2(np_q, 0.0);
    LossReport report;
    for (const auto& A : acc) {
        for (size_t k = 0; k < np_actor; ++k) g_actor[k] += A.g_actor[k];
        for (size_t k = 0; k < np_q; ++k) g_q1[k] += A.g_q1[k];
        for (size_t k = 0; k < np_q; ++k) g_q2[k] += A.g_q2[k];
        report.q1_loss += A.q1_loss;
        report.q2_loss += A.q2_loss;
        report.actor_loss += A.actor_loss;
        report.entropy += A.entropy;
    }
    if (!std::isfinite(report.q1_loss) || !std::isfinite(report.q2_loss) ||
        !std::isfinite(report.actor_loss)) {
        throw DivergenceError("SacAgent::update: non-finite loss (q1=" +
                              std::to_string(report.q1_loss) + ", q2=" +
                              std::to_string(report.q2_loss) + ", actor=" +
                              std::to_string(report.actor_loss) + ")");
    }

    if (diag != nullptr) {
        diag->indices = idx;
        diag->z_next = z2;
        diag->z_actor = za;
        diag->g_actor = g_actor;
        diag->g_q1 = g_q1;
        diag->g_q2 = g_q2;
    }

    q1_opt_.step(q1_.params(), g_q1);
    q2_opt_.step(q2_.params(), g_q2);
    actor_opt_.step(actor_.params(), g_actor);

    const double rho = cfg_.polyak;
    auto blend = [rho](std::vector<double>& tp, const std::vector<double>& p) {
        for (size_t k = 0; k < tp.size(); ++k) tp[k] = rho * tp[k] + (1.0 - rho) * p[k];
    };
    blend(q1t_.params(), q1_.params());
    blend(q2t_.params(), q2_.params());
    ++updates_;
    return report;
}

size_t fill_demos(ReplayBuffer& buffer, NavEnv& env, const ApfConfig& prior, int episodes,
                  uint64_t seed_base) {
    if (episodes < 0) throw ParamError("fill_demos: episodes must be >= 0");
    prior.validate();
    size_t successes = 0;
    for (int e = 0; e < episodes; ++e) {
        Observation obs = env.reset(seed_base + static_cast<uint64_t>(e));
        while (!env.done()) {
            const Action a = apf_action(env.last_scan(), env.bearing_error(), prior).action;
            Transition t;
            t.obs = obs.flat();
            t.action = a;
            t.source = Transition::Source::Demo;
            const StepResult r = env.step(a);
            t.reward = r.reward;
            t.next_obs = r.obs.flat();
            t.terminal = r.reason == DoneReason::goal || r.reason == DoneReason::collision;
            buffer.push(t);
            obs = r.obs;
            if (r.done && r.reason == DoneReason::goal) ++successes;
        }
    }
    return successes;
}

}  // namespace mcf
