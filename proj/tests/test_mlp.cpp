#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/mlp.hpp"
#include "mcf/rng.hpp"

using namespace mcf;
namespace fs = std::filesystem;

namespace {

// Independent forward pass: textbook matrix arithmetic, no shared code.
std::vector<double> oracle_forward(const Mlp& net, const std::vector<double>& in) {
    const auto& sizes = net.layer_sizes();
    const auto& p = net.params();
    size_t off = 0;
    std::vector<double> x = in;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int ni = sizes[l], no = sizes[l + 1];
        std::vector<double> y(no, 0.0);
        for (int i = 0; i < no; ++i) {
            for (int j = 0; j < ni; ++j) y[i] += p[off + i * ni + j] * x[j];
        }
        off += static_cast<size_t>(no) * ni;
        for (int i = 0; i < no; ++i) y[i] += p[off + i];
        off += no;
        if (l + 2 < sizes.size()) {
            for (double& v : y) v = std::max(0.0, v);
        } else if (net.head() == Head::Gaussian) {
            for (int i = no / 2; i < no; ++i) y[i] = std::clamp(y[i], kLogStdMin, kLogStdMax);
        }
        x = y;
    }
    return x;
}

double loss_of(Mlp& net, const std::vector<double>& in, const std::vector<double>& c) {
    auto out = net.forward(in);
    double L = 0.0;
    for (size_t i = 0; i < out.size(); ++i) L += c[i] * out[i];
    return L;
}

}  // namespace

TEST_CASE("forward: zero parameters give zero output") {
    Mlp net({5, 8, 3}, Head::Linear);
    std::vector<double> in = {1.0, -2.0, 0.5, 3.0, -0.1};
    for (double v : net.forward(in)) CHECK(v == 0.0);
}

TEST_CASE("forward: identity single layer reproduces the input") {
    Mlp net({4, 4}, Head::Linear);
    for (int i = 0; i < 4; ++i) net.params()[i * 4 + i] = 1.0;
    std::vector<double> in = {0.3, -1.2, 4.5, 0.0};
    auto out = net.forward(in);
    for (int i = 0; i < 4; ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("forward: matches the independent matrix-arithmetic oracle") {
    Rng rng(2468u);
    for (int trial = 0; trial < 20; ++trial) {
        Mlp net({19, 64, 64, 4}, trial % 2 ? Head::Gaussian : Head::Linear);
        net.init_params(rng);
        std::vector<double> in(19);
        for (double& v : in) v = rng.uniform(-2.0, 2.0);
        auto a = net.forward(in);
        auto b = oracle_forward(net, in);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward: shape mismatch raises") {
    Mlp net({5, 3}, Head::Linear);
    std::vector<double> in(4, 0.0);
    CHECK_THROWS_AS(net.forward(in), DimensionError);
    CHECK_THROWS_AS(Mlp({7}, Head::Linear), DimensionError);
    CHECK_THROWS_AS(Mlp({4, 3}, Head::Gaussian), DimensionError);  // odd output
}

TEST_CASE("gaussian head: log_std outputs clamped to [-20, 2]") {
    Mlp net({3, 4}, Head::Gaussian);
    // Huge biases on the log_std half.
    net.params()[3 * 4 + 2] = 100.0;
    net.params()[3 * 4 + 3] = -100.0;
    auto out = net.forward(std::vector<double>{0.0, 0.0, 0.0});
    CHECK(out[2] == kLogStdMax);
    CHECK(out[3] == kLogStdMin);
}

TEST_CASE("backward: finite differences across every parameter of the SAC shapes") {
    Rng rng(1357u);
    for (const auto& shape : {std::vector<int>{19, 64, 64, 4}, std::vector<int>{21, 64, 64, 1}}) {
        for (Head head : {shape.back() % 2 == 0 ? Head::Gaussian : Head::Linear}) {
            Mlp net(shape, head);
            net.init_params(rng);
            std::vector<double> in(shape.front());
            for (double& v : in) v = rng.uniform(-1.5, 1.5);
            std::vector<double> c(shape.back());
            for (double& v : c) v = rng.uniform(-1.0, 1.0);

            net.forward(in);
            auto g = net.backward(c);

            const double h = 1e-5;
            int checked = 0;
            for (size_t i = 0; i < net.param_count(); ++i) {
                const double keep = net.params()[i];
                net.params()[i] = keep + h;
                const double up = loss_of(net, in, c);
                net.params()[i] = keep - h;
                const double dn = loss_of(net, in, c);
                net.params()[i] = keep;
                const double fd = (up - dn) / (2.0 * h);
                const double scale = std::max({std::abs(fd), std::abs(g.params[i]), 1e-3});
                CHECK(std::abs(fd - g.params[i]) / scale < 1e-4);
                ++checked;
            }
            CHECK(checked == static_cast<int>(net.param_count()));

            // Input gradient against finite differences too.
            for (size_t i = 0; i < in.size(); ++i) {
                const double keep = in[i];
                in[i] = keep + h;
                const double up = loss_of(net, in, c);
                in[i] = keep - h;
                const double dn = loss_of(net, in, c);
                in[i] = keep;
                const double fd = (up - dn) / (2.0 * h);
                const double scale = std::max({std::abs(fd), std::abs(g.input[i]), 1e-3});
                CHECK(std::abs(fd - g.input[i]) / scale < 1e-4);
            }
        }
    }
}

TEST_CASE("backward: linear net weight gradient is outer(upstream, input)") {
    Mlp net({3, 2}, Head::Linear);
    Rng rng(5u);
    net.init_params(rng);
    std::vector<double> in = {0.5, -1.0, 2.0};
    std::vector<double> up = {2.0, -3.0};
    net.forward(in);
    auto g = net.backward(up);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(g.params[i * 3 + j] == doctest::Approx(up[i] * in[j]).epsilon(1e-12));
        }
        CHECK(g.params[6 + i] == doctest::Approx(up[i]).epsilon(1e-12));
    }
}

TEST_CASE("backward: zero upstream gives zero gradients; no cache raises") {
    Mlp net({4, 6, 2}, Head::Linear);
    Rng rng(6u);
    net.init_params(rng);
    CHECK_THROWS_AS(net.backward(std::vector<double>{0.0, 0.0}), UsageError);
    net.forward(std::vector<double>{1.0, 2.0, 3.0, 4.0});
    auto g = net.backward(std::vector<double>{0.0, 0.0});
    for (double v : g.params) CHECK(v == 0.0);
    for (double v : g.input) CHECK(v == 0.0);
}

TEST_CASE("numerical hygiene: finite outputs and gradients across the input box") {
    Rng rng(8642u);
    Mlp net({19, 64, 64, 4}, Head::Gaussian);
    net.init_params(rng);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> in(19);
        for (double& v : in) v = rng.uniform(-10.0, 10.0);
        auto out = net.forward(in);
        for (double v : out) CHECK(std::isfinite(v));
        std::vector<double> up(4);
        for (double& v : up) v = rng.uniform(-1.0, 1.0);
        auto g = net.backward(up);
        for (double v : g.params) CHECK(std::isfinite(v));
        for (double v : g.input) CHECK(std::isfinite(v));
    }
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
    std::vector<double> p = {1.0, -2.0, 0.5};
    std::vector<double> g(3, 0.0);
    Adam opt(3, 0.01);
    opt.step(p, g);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(p[2] == 0.5);
}

TEST_CASE("adam: first step moves by ~lr in the negative gradient direction") {
    std::vector<double> p = {0.0, 0.0};
    std::vector<double> g = {2.5, -0.3};
    Adam opt(2, 1e-3);
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("adam: quadratic bowl converges to the known minimizer") {
    const std::vector<double> target = {0.7, -0.3, 1.2, 0.0, -0.9};
    std::vector<double> p(5, 0.0);
    Adam opt(5, 0.01);
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> g(5);
        for (int i = 0; i < 5; ++i) g[i] = 2.0 * (p[i] - target[i]);
        opt.step(p, g);
    }
    for (int i = 0; i < 5; ++i) CHECK(std::abs(p[i] - target[i]) < 1e-3);
}

TEST_CASE("adam: non-finite gradient raises a divergence error") {
    std::vector<double> p = {0.0};
    std::vector<double> g = {std::nan("")};
    Adam opt(1);
    CHECK_THROWS_AS(opt.step(p, g), DivergenceError);
    g[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(opt.step(p, g), DivergenceError);
}

TEST_CASE("checkpoint: round-trip preserves forward outputs bit-for-bit") {
    Rng rng(11223u);
    Mlp net({19, 64, 64, 4}, Head::Gaussian);
    net.init_params(rng);
    const fs::path p = fs::temp_directory_path() / "mcf_mlp_roundtrip.mcfn";
    save_mlp(net, p.string());
    Mlp back = load_mlp(p.string());
    CHECK(back.layer_sizes() == net.layer_sizes());
    CHECK(back.head() == net.head());
    std::vector<double> in(19);
    for (double& v : in) v = rng.uniform(-3.0, 3.0);
    auto a = net.forward(in);
    auto b = back.forward(in);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    fs::remove(p);
}

TEST_CASE("checkpoint: malformed files are rejected with clear errors") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path good = dir / "mcf_mlp_good.mcfn";
    Mlp net({3, 2}, Head::Linear);
    save_mlp(net, good.string());

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_mlp((dir / "mcf_absent.mcfn").string()), ConfigError);
    }
    SUBCASE("bad magic") {
        auto bytes = [&] {
            std::ifstream in(good, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        }();
        bytes[0] = 'X';
        const fs::path bad = dir / "mcf_mlp_badmagic.mcfn";
        std::ofstream(bad, std::ios::binary) << bytes;
        CHECK_THROWS_AS(load_mlp(bad.string()), ConfigError);
        fs::remove(bad);
    }
    SUBCASE("truncated parameters") {
        auto bytes = [&] {
            std::ifstream in(good, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        }();
        bytes.resize(bytes.size() - 5);
        const fs::path bad = dir / "mcf_mlp_trunc.mcfn";
        std::ofstream(bad, std::ios::binary) << bytes;
        CHECK_THROWS_AS(load_mlp(bad.string()), ConfigError);
        fs::remove(bad);
    }
    SUBCASE("trailing junk") {
        auto bytes = [&] {
            std::ifstream in(good, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        }();
        bytes += "junk";
        const fs::path bad = dir / "mcf_mlp_trail.mcfn";
        std::ofstream(bad, std::ios::binary) << bytes;
        CHECK_THROWS_AS(load_mlp(bad.string()), ConfigError);
        fs::remove(bad);
    }
    fs::remove(good);
}

TEST_CASE("init: deterministic under the rng and fan-in bounded") {
    Rng r1(9u), r2(9u);
    Mlp a({19, 64, 4}, Head::Gaussian), b({19, 64, 4}, Head::Gaussian);
    a.init_params(r1);
    b.init_params(r2);
    for (size_t i = 0; i < a.param_count(); ++i) CHECK(a.params()[i] == b.params()[i]);
    // Weight magnitudes bounded by 1/sqrt(fan_in) of the wider layer.
    for (size_t i = 0; i < 19u * 64u; ++i) CHECK(std::abs(a.params()[i]) <= 1.0 / std::sqrt(19.0));
}
