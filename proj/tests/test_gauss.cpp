#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/gauss.hpp"
#include "mcf/rng.hpp"
#include "oracles.hpp"

using namespace mcf;

TEST_CASE("fuse_product: worked example") {
    // N(0.5, 0.04) x N(0.2, 0.2) -> mean (0.5*0.2 + 0.2*0.04)/0.24 = 0.45,
    // var 0.04*0.2/0.24 = 1/30.
    Gaussian1 out = fuse_product(Gaussian1{0.5, 0.04}, Gaussian1{0.2, 0.2});
    CHECK(out.mean == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(out.var == doctest::Approx(0.2 / 6.0).epsilon(1e-12));
}

TEST_CASE("fuse_product: identical factors halve the variance, keep the mean") {
    Gaussian1 g{-0.3, 0.5};
    Gaussian1 out = fuse_product(g, g);
    CHECK(out.mean == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(out.var == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fuse_product: near-flat prior barely moves the policy") {
    Gaussian1 policy{0.7, 0.01};
    Gaussian1 prior{-0.9, 1e6};
    Gaussian1 out = fuse_product(policy, prior);
    CHECK(std::abs(out.mean - 0.7) < 1e-4);
    CHECK(out.var == doctest::Approx(0.01).epsilon(1e-4));
}

TEST_CASE("fuse_product: matches grid-normalized density product") {
    // Densities multiplied numerically on a grid and renormalized must give the
    // same mean/variance as the closed form, across a sweep of shapes.
    Rng rng(20240811u);
    for (int trial = 0; trial < 1000; ++trial) {
        const double ma = rng.uniform(-1.0, 1.0);
        const double mb = rng.uniform(-1.0, 1.0);
        const double va = std::exp(rng.uniform(std::log(1e-3), std::log(4.0)));
        const double vb = std::exp(rng.uniform(std::log(1e-3), std::log(4.0)));
        Gaussian1 out = fuse_product(Gaussian1{ma, va}, Gaussian1{mb, vb});
        oracle::Moments ref = oracle::grid_product(ma, va, mb, vb, 40001);
        CHECK(out.mean == doctest::Approx(ref.mean).epsilon(1e-4));
        CHECK(out.var == doctest::Approx(ref.var).epsilon(1e-4));
    }
}

TEST_CASE("fuse_product: commutative and rejects invalid inputs") {
    Gaussian1 a{0.1, 0.3}, b{-0.4, 0.7};
    Gaussian1 ab = fuse_product(a, b), ba = fuse_product(b, a);
    CHECK(ab.mean == doctest::Approx(ba.mean).epsilon(1e-15));
    CHECK(ab.var == doctest::Approx(ba.var).epsilon(1e-15));

    CHECK_THROWS_AS(fuse_product(Gaussian1{0.0, 0.0}, b), InvalidDistribution);
    CHECK_THROWS_AS(fuse_product(Gaussian1{0.0, -1.0}, b), InvalidDistribution);
    CHECK_THROWS_AS(fuse_product(a, Gaussian1{std::nan(""), 1.0}), InvalidDistribution);
    CHECK_THROWS_AS(fuse_product(a, Gaussian1{0.0, std::numeric_limits<double>::infinity()}),
                    InvalidDistribution);
}

TEST_CASE("fuse_gated: worked example at alpha = 0.5") {
    // Equal-weight blend of N(0.2, 0.09) and N(0.8, 0.09):
    // denom = 0.09*0.5 + 0.09*0.5 = 0.09; mean = (0.2+0.8)*0.09*0.5/0.09 = 0.5;
    // var = 0.09*0.09/0.09 = 0.09.
    Gaussian1 out = fuse_gated(Gaussian1{0.2, 0.09}, Gaussian1{0.8, 0.09}, 0.5);
    CHECK(out.mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.var == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("fuse_gated: endpoints are exact identities") {
    Gaussian1 policy{0.123456789, 0.0371}, prior{-0.7, 0.9};
    Gaussian1 a0 = fuse_gated(policy, prior, 0.0);
    CHECK(a0.mean == policy.mean);  // bitwise
    CHECK(a0.var == policy.var);
    Gaussian1 a1 = fuse_gated(policy, prior, 1.0);
    CHECK(a1.mean == prior.mean);
    CHECK(a1.var == prior.var);
}

TEST_CASE("fuse_gated: alpha = 0.5 has exactly twice the product variance") {
    Rng rng(77u);
    for (int trial = 0; trial < 200; ++trial) {
        Gaussian1 a{rng.uniform(-1.0, 1.0), std::exp(rng.uniform(std::log(1e-3), std::log(2.0)))};
        Gaussian1 b{rng.uniform(-1.0, 1.0), std::exp(rng.uniform(std::log(1e-3), std::log(2.0)))};
        Gaussian1 g = fuse_gated(a, b, 0.5);
        Gaussian1 p = fuse_product(a, b);
        CHECK(g.mean == doctest::Approx(p.mean).epsilon(1e-12));
        CHECK(g.var == doctest::Approx(2.0 * p.var).epsilon(1e-12));
    }
}

TEST_CASE("fuse_gated: matches grid-normalized powered product") {
    Rng rng(424242u);
    for (int trial = 0; trial < 1000; ++trial) {
        const double ma = rng.uniform(-1.0, 1.0);
        const double mb = rng.uniform(-1.0, 1.0);
        const double va = std::exp(rng.uniform(std::log(1e-3), std::log(4.0)));
        const double vb = std::exp(rng.uniform(std::log(1e-3), std::log(4.0)));
        const double alpha = rng.uniform(0.02, 0.98);
        Gaussian1 out = fuse_gated(Gaussian1{ma, va}, Gaussian1{mb, vb}, alpha);
        oracle::Moments ref = oracle::grid_power_product(ma, va, mb, vb, alpha, 40001);
        CHECK(out.mean == doctest::Approx(ref.mean).epsilon(1e-4));
        CHECK(out.var == doctest::Approx(ref.var).epsilon(1e-4));
    }
}

TEST_CASE("fuse_gated: fused mean lies between inputs, variance below the dominant side") {
    Rng rng(5150u);
    for (int trial = 0; trial < 500; ++trial) {
        Gaussian1 a{rng.uniform(-1.0, 1.0), std::exp(rng.uniform(std::log(1e-2), std::log(1.0)))};
        Gaussian1 b{rng.uniform(-1.0, 1.0), std::exp(rng.uniform(std::log(1e-2), std::log(1.0)))};
        const double alpha = rng.uniform(0.0, 1.0);
        Gaussian1 g = fuse_gated(a, b, alpha);
        const double lo = std::min(a.mean, b.mean), hi = std::max(a.mean, b.mean);
        CHECK(g.mean >= lo - 1e-12);
        CHECK(g.mean <= hi + 1e-12);
        CHECK(g.var <= std::max(a.var, b.var) + 1e-12);
    }
}

TEST_CASE("fuse_gated: larger alpha pulls the blend toward the prior") {
    Gaussian1 policy{-0.6, 0.05}, prior{0.8, 0.3};
    double prev = std::abs(fuse_gated(policy, prior, 0.0).mean - prior.mean);
    for (double alpha = 0.1; alpha <= 1.0001; alpha += 0.1) {
        const double d = std::abs(fuse_gated(policy, prior, alpha).mean - prior.mean);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
}

TEST_CASE("fuse_gated: rejects alpha outside [0,1]") {
    Gaussian1 a{0.0, 1.0}, b{0.0, 1.0};
    CHECK_THROWS_AS(fuse_gated(a, b, -0.01), ParamError);
    CHECK_THROWS_AS(fuse_gated(a, b, 1.01), ParamError);
    CHECK_THROWS_AS(fuse_gated(a, b, std::nan("")), ParamError);
}

TEST_CASE("fuse_gated: two-dimensional overload fuses per component") {
    DiagGaussian2 policy{{0.2, 0.09}, {-0.5, 0.04}};
    DiagGaussian2 prior{{0.8, 0.09}, {0.5, 0.16}};
    DiagGaussian2 out = fuse_gated(policy, prior, 0.5);
    Gaussian1 v = fuse_gated(policy.v, prior.v, 0.5);
    Gaussian1 w = fuse_gated(policy.w, prior.w, 0.5);
    CHECK(out.v.mean == v.mean);
    CHECK(out.v.var == v.var);
    CHECK(out.w.mean == w.mean);
    CHECK(out.w.var == w.var);
}

TEST_CASE("alpha_at: default schedule endpoints") {
    GatingSchedule s = GatingSchedule::reverse_logistic(100000);
    s.validate();
    // 1/(1+exp(-4)) = 0.98201..., 1/(1+exp(6)) = 0.00247...
    CHECK(alpha_at(s, 0) == doctest::Approx(0.9820137900).epsilon(1e-9));
    CHECK(alpha_at(s, 100000) == doctest::Approx(0.0024726232).epsilon(1e-6));
    CHECK(alpha_at(s, 40000) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("alpha_at: strictly decreasing, bounded in (0,1)") {
    GatingSchedule s = GatingSchedule::reverse_logistic(5000);
    double prev = 1.0;
    for (long t = 0; t <= 5000; t += 50) {
        const double a = alpha_at(s, t);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("GatingSchedule: validation rejects degenerate shapes") {
    CHECK_THROWS_AS(GatingSchedule::reverse_logistic(0), ParamError);
    CHECK_THROWS_AS(GatingSchedule::reverse_logistic(-5), ParamError);

    GatingSchedule bad;  // alpha(0) = 0.5 exactly -> not prior-dominant
    bad.total_steps = 100;
    bad.midpoint_step = 0;
    bad.steepness = 0.1;
    CHECK_THROWS_AS(bad.validate(), ParamError);

    GatingSchedule neg = GatingSchedule::reverse_logistic(100);
    neg.steepness = -1.0;
    CHECK_THROWS_AS(neg.validate(), ParamError);
}

TEST_CASE("aggregate_ensemble: worked examples") {
    {
        std::vector<Action> means = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
        DiagGaussian2 out = aggregate_ensemble(means);
        CHECK(out.v.mean == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(out.v.var == doctest::Approx(0.02 / 3.0).epsilon(1e-9));  // population variance
        CHECK(out.w.mean == doctest::Approx(0.2).epsilon(1e-12));
    }
    {
        std::vector<Action> means = {{-1.0, 0.0}, {1.0, 0.0}};
        DiagGaussian2 out = aggregate_ensemble(means);
        CHECK(out.v.mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(out.v.var == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_ensemble: matches direct summation on random ensembles") {
    Rng rng(31337u);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 2 + rng.uniform_int(9);
        std::vector<Action> means(n);
        for (auto& a : means) {
            a.v = rng.uniform(-1.0, 1.0);
            a.w = rng.uniform(-1.0, 1.0);
        }
        DiagGaussian2 out = aggregate_ensemble(means);
        double mv = 0, mw = 0;
        for (auto& a : means) { mv += a.v; mw += a.w; }
        mv /= n; mw /= n;
        double vv = 0, vw = 0;
        for (auto& a : means) { vv += (a.v - mv) * (a.v - mv); vw += (a.w - mw) * (a.w - mw); }
        vv /= n; vw /= n;
        CHECK(out.v.mean == doctest::Approx(mv).epsilon(1e-12));
        CHECK(out.w.mean == doctest::Approx(mw).epsilon(1e-12));
        CHECK(out.v.var == doctest::Approx(std::max(vv, 1e-6)).epsilon(1e-12));
        CHECK(out.w.var == doctest::Approx(std::max(vw, 1e-6)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_ensemble: identical members hit the variance floor") {
    std::vector<Action> means(5, Action{0.4, -0.2});
    DiagGaussian2 out = aggregate_ensemble(means);
    CHECK(out.v.mean == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(out.v.var == 1e-6);
    CHECK(out.w.var == 1e-6);
}

TEST_CASE("aggregate_ensemble: fewer than two members rejected") {
    std::vector<Action> one = {{0.0, 0.0}};
    CHECK_THROWS_AS(aggregate_ensemble(one), InsufficientEnsemble);
    std::vector<Action> none;
    CHECK_THROWS_AS(aggregate_ensemble(none), InsufficientEnsemble);
}

TEST_CASE("sample_clamped: deterministic under the same stream, clamped to the box") {
    DiagGaussian2 wide{{0.9, 4.0}, {-0.9, 4.0}};
    Rng r1(123u), r2(123u);
    bool hit_low = false, hit_high = false;
    for (int i = 0; i < 2000; ++i) {
        Action a = sample_clamped(wide, r1);
        Action b = sample_clamped(wide, r2);
        CHECK(a.v == b.v);
        CHECK(a.w == b.w);
        CHECK(a.v >= -1.0);
        CHECK(a.v <= 1.0);
        CHECK(a.w >= -1.0);
        CHECK(a.w <= 1.0);
        if (a.v == 1.0) hit_high = true;
        if (a.w == -1.0) hit_low = true;
    }
    // Wide distributions centered near the edges must actually clamp sometimes.
    CHECK(hit_high);
    CHECK(hit_low);
}

TEST_CASE("sample_clamped: explicit-z overload reproduces the rng draw") {
    DiagGaussian2 d{{0.1, 0.25}, {-0.3, 0.04}};
    Rng r1(9001u), r2(9001u);
    for (int i = 0; i < 100; ++i) {
        Action a = sample_clamped(d, r1);
        const double zv = r2.normal();
        const double zw = r2.normal();
        Action b = sample_clamped(d, zv, zw);
        CHECK(a.v == b.v);
        CHECK(a.w == b.w);
    }
}

TEST_CASE("sample_clamped: empirical moments track the distribution") {
    DiagGaussian2 d{{0.2, 0.0025}, {-0.1, 0.01}};  // narrow: clamping negligible
    Rng rng(5u);
    double sv = 0, sw = 0, qv = 0, qw = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        Action a = sample_clamped(d, rng);
        sv += a.v; sw += a.w;
        qv += a.v * a.v; qw += a.w * a.w;
    }
    const double mv = sv / N, mw = sw / N;
    CHECK(mv == doctest::Approx(0.2).epsilon(0.01));
    CHECK(mw == doctest::Approx(-0.1).epsilon(0.05));
    CHECK(qv / N - mv * mv == doctest::Approx(0.0025).epsilon(0.05));
    CHECK(qw / N - mw * mw == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("rng: label-derived substreams are independent and reproducible") {
    Rng a = Rng::derive(42u, "actor");
    Rng b = Rng::derive(42u, "critic");
    Rng a2 = Rng::derive(42u, "actor");
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        const double y = b.uniform();
        const double x2 = a2.uniform();
        CHECK(x == x2);
        if (x != y) all_equal = false;
    }
    CHECK_FALSE(all_equal);
}
