#include "mcf/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "mcf/errors.hpp"

namespace mcf {

using nlohmann::json;

Mlp::Mlp(std::vector<int> sizes, Head head) : sizes_(std::move(sizes)), head_(head) {
    if (sizes_.size() < 2) throw DimensionError("Mlp: need at least input and output sizes");
    for (int s : sizes_) {
        if (s <= 0) throw DimensionError("Mlp: layer sizes must be positive");
    }
    if (head_ == Head::Gaussian && sizes_.back() % 2 != 0) {
        throw DimensionError("Mlp: a Gaussian head needs an even output size");
    }
    size_t total = 0;
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
        w_off_.push_back(total);
        total += static_cast<size_t>(sizes_[l + 1]) * sizes_[l];
        b_off_.push_back(total);
        total += static_cast<size_t>(sizes_[l + 1]);
    }
    params_.assign(total, 0.0);
}

void Mlp::init_params(Rng& rng) {
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const int fan_in = sizes_[l];
        const int fan_out = sizes_[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int i = 0; i < fan_out * fan_in; ++i) {
            params_[w_off_[l] + i] = rng.uniform(-bound, bound);
        }
        for (int i = 0; i < fan_out; ++i) params_[b_off_[l] + i] = 0.0;
    }
    if (head_ == Head::Gaussian) {
        // Moderate initial exploration noise: log_std biases start at -0.5.
        const int out = sizes_.back();
        const size_t last = sizes_.size() - 2;
        for (int i = out / 2; i < out; ++i) params_[b_off_[last] + i] = -0.5;
    }
    cache_.ready = false;
}

std::vector<double> Mlp::forward(std::span<const double> input) {
    return forward(input, cache_);
}

std::vector<double> Mlp::forward(std::span<const double> input, MlpWorkspace& ws) const {
    if (input.size() != static_cast<size_t>(sizes_.front())) {
        throw DimensionError("Mlp::forward: input size " + std::to_string(input.size()) +
                             " != " + std::to_string(sizes_.front()));
    }
    const size_t layers = sizes_.size() - 1;
    ws.acts.resize(layers + 1);
    ws.zs.resize(layers);
    ws.acts[0].assign(input.begin(), input.end());

    for (size_t l = 0; l < layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        const double* W = params_.data() + w_off_[l];
        const double* b = params_.data() + b_off_[l];
        const std::vector<double>& x = ws.acts[l];
        std::vector<double>& z = ws.zs[l];
        z.assign(out, 0.0);
        for (int i = 0; i < out; ++i) {
            double s = b[i];
            const double* row = W + static_cast<size_t>(i) * in;
            for (int j = 0; j < in; ++j) s += row[j] * x[j];
            z[i] = s;
        }
        if (l + 1 < layers) {  // hidden layer: ReLU
            ws.acts[l + 1].assign(out, 0.0);
            for (int i = 0; i < out; ++i) ws.acts[l + 1][i] = z[i] > 0.0 ? z[i] : 0.0;
        } else {
            ws.acts[l + 1] = z;
            if (head_ == Head::Gaussian) {
                for (int i = out / 2; i < out; ++i) {
                    ws.acts[l + 1][i] = std::clamp(z[i], kLogStdMin, kLogStdMax);
                }
            }
        }
    }
    ws.ready = true;
    return ws.acts.back();
}

Mlp::Gradients Mlp::backward(std::span<const double> upstream) const {
    Gradients g;
    g.params.assign(params_.size(), 0.0);
    g.input.assign(static_cast<size_t>(sizes_.front()), 0.0);
    backward_into(upstream, g.params, g.input);
    return g;
}

void Mlp::backward_into(std::span<const double> upstream, std::span<double> grad_params,
                        std::span<double> grad_input) const {
    backward_into(cache_, upstream, grad_params, grad_input);
}

void Mlp::backward_into(const MlpWorkspace& ws, std::span<const double> upstream,
                        std::span<double> grad_params, std::span<double> grad_input) const {
    if (!ws.ready) throw UsageError("Mlp::backward called before forward");
    const size_t layers = sizes_.size() - 1;
    if (ws.acts.size() != layers + 1 ||
        ws.acts[0].size() != static_cast<size_t>(sizes_.front())) {
        throw UsageError("Mlp::backward: workspace does not match this network");
    }
    if (upstream.size() != static_cast<size_t>(sizes_.back())) {
        throw DimensionError("Mlp::backward: upstream size mismatch");
    }
    if (grad_params.size() != params_.size() ||
        grad_input.size() != static_cast<size_t>(sizes_.front())) {
        throw DimensionError("Mlp::backward: gradient buffer shape mismatch");
    }
    std::vector<double> dz(upstream.begin(), upstream.end());

    // Output head: clamped log_std components pass no gradient when saturated.
    if (head_ == Head::Gaussian) {
        const int out = sizes_.back();
        const std::vector<double>& z = ws.zs[layers - 1];
        for (int i = out / 2; i < out; ++i) {
            if (z[i] <= kLogStdMin || z[i] >= kLogStdMax) dz[i] = 0.0;
        }
    }

    for (size_t l = layers; l-- > 0;) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        const double* W = params_.data() + w_off_[l];
        const std::vector<double>& x = ws.acts[l];
        double* gW = grad_params.data() + w_off_[l];
        double* gb = grad_params.data() + b_off_[l];
        std::vector<double> dx(static_cast<size_t>(in), 0.0);
        for (int i = 0; i < out; ++i) {
            const double d = dz[i];
            gb[i] += d;
            const double* row = W + static_cast<size_t>(i) * in;
            double* grow = gW + static_cast<size_t>(i) * in;
            for (int j = 0; j < in; ++j) {
                grow[j] += d * x[j];
                dx[j] += d * row[j];
            }
        }
        if (l > 0) {  // through the ReLU of the previous hidden layer
            const std::vector<double>& z = ws.zs[l - 1];
            dz.assign(static_cast<size_t>(in), 0.0);
            for (int j = 0; j < in; ++j) dz[j] = z[j] > 0.0 ? dx[j] : 0.0;
        } else {
            for (int j = 0; j < in; ++j) grad_input[j] += dx[j];
        }
    }
}

Adam::Adam(size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
    if (lr <= 0.0 || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || eps <= 0.0) {
        throw ParamError("Adam: invalid hyperparameters");
    }
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw DimensionError("Adam::step: size mismatch");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw DivergenceError("Adam::step: non-finite gradient encountered");
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (size_t i = 0; i < m_.size(); ++i) {
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * grads[i];
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * grads[i] * grads[i];
        const double mhat = m_[i] / c1;
        const double vhat = v_[i] / c2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

namespace {

const char* head_name(Head h) { return h == Head::Linear ? "linear" : "gaussian"; }

Head head_from_name(const std::string& s) {
    if (s == "linear") return Head::Linear;
    if (s == "gaussian") return Head::Gaussian;
    throw ConfigError("checkpoint: unknown head type '" + s + "'");
}

}  // namespace

void save_mlp(const Mlp& net, const std::string& path) {
    json header;
    header["format_version"] = 1;
    header["layer_sizes"] = net.layer_sizes();
    header["activation"] = "relu";
    header["head"] = head_name(net.head());
    header["param_count"] = net.param_count();
    header["dtype"] = "f64le";
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("checkpoint: cannot open '" + path + "' for writing");
    out.write("MCFN", 4);
    const uint32_t hlen = static_cast<uint32_t>(hs.size());
    uint8_t lenbuf[4] = {static_cast<uint8_t>(hlen & 0xff), static_cast<uint8_t>((hlen >> 8) & 0xff),
                         static_cast<uint8_t>((hlen >> 16) & 0xff),
                         static_cast<uint8_t>((hlen >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(lenbuf), 4);
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(net.param_count() * sizeof(double)));
    if (!out) throw ConfigError("checkpoint: short write to '" + path + "'");
}

Mlp load_mlp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MCFN", 4) != 0) {
        throw ConfigError("checkpoint: '" + path + "' has a bad magic number");
    }
    uint8_t lenbuf[4];
    in.read(reinterpret_cast<char*>(lenbuf), 4);
    if (!in) throw ConfigError("checkpoint: '" + path + "' truncated header length");
    const uint32_t hlen = static_cast<uint32_t>(lenbuf[0]) | (static_cast<uint32_t>(lenbuf[1]) << 8) |
                          (static_cast<uint32_t>(lenbuf[2]) << 16) |
                          (static_cast<uint32_t>(lenbuf[3]) << 24);
    if (hlen > (1u << 20)) throw ConfigError("checkpoint: '" + path + "' header length implausible");
    std::string hs(hlen, '\0');
    in.read(hs.data(), hlen);
    if (!in) throw ConfigError("checkpoint: '" + path + "' truncated header");
    json header;
    try {
        header = json::parse(hs);
    } catch (const json::parse_error& e) {
        throw ConfigError("checkpoint: '" + path + "' header is not valid JSON: " + e.what());
    }
    if (header.value("format_version", -1) != 1) {
        throw ConfigError("checkpoint: '" + path + "' unsupported format_version");
    }
    if (header.value("dtype", "") != "f64le") {
        throw ConfigError("checkpoint: '" + path + "' unsupported dtype");
    }
    if (!header.contains("layer_sizes") || !header["layer_sizes"].is_array()) {
        throw ConfigError("checkpoint: '" + path + "' missing layer_sizes");
    }
    std::vector<int> sizes = header["layer_sizes"].get<std::vector<int>>();
    Mlp net(sizes, head_from_name(header.value("head", "")));
    const size_t expect = header.value("param_count", size_t{0});
    if (expect != net.param_count()) {
        throw ConfigError("checkpoint: '" + path + "' param_count " + std::to_string(expect) +
                          " does not match layer sizes (need " +
                          std::to_string(net.param_count()) + ")");
    }
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(net.param_count() * sizeof(double)));
    if (!in) throw ConfigError("checkpoint: '" + path + "' truncated parameters");
    char extra;
    if (in.read(&extra, 1)) {
        throw ConfigError("checkpoint: '" + path + "' has trailing bytes");
    }
    for (double p : net.params()) {
        if (!std::isfinite(p)) {
            throw ConfigError("checkpoint: '" + path + "' contains non-finite parameters");
        }
    }
    return net;
}

}  // namespace mcf
