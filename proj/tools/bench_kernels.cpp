// Times each data-parallel hot loop in both flavors — the serial reference
// and the OpenMP version — and checks on the way that their outputs match
// bit-for-bit. Run from the build tree: tools/bench_kernels [reps].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "mcf/apf.hpp"
#include "mcf/deploy.hpp"
#include "mcf/kernels.hpp"
#include "mcf/rng.hpp"
#include "mcf/sac.hpp"
#include "mcf/sim.hpp"
#include "mcf/world.hpp"

using namespace mcf;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Row {
    const char* name;
    double serial_ms;
    double openmp_ms;
    bool identical;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("\n%-22s %12s %12s %9s %10s\n", "kernel", "serial ms", "openmp ms", "speedup",
                "identical");
    for (const Row& r : rows) {
        std::printf("%-22s %12.2f %12.2f %8.2fx %10s\n", r.name, r.serial_ms, r.openmp_ms,
                    r.serial_ms / r.openmp_ms, r.identical ? "yes" : "NO");
    }
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 200;
    if (reps < 1) {
        std::fprintf(stderr, "usage: bench_kernels [reps >= 1]\n");
        return 2;
    }
    std::printf("reps per kernel: %d\n", reps);
    std::vector<Row> rows;
    const WorldSpec world = find_arena("scatter");

    // Lidar raycast: 180 beams against the scatter arena's clutter.
    {
        std::vector<double> a(static_cast<size_t>(world.lidar.beams));
        std::vector<double> b(a.size());
        Clock::time_point t0 = Clock::now();
        for (int i = 0; i < reps; ++i) {
            raycast_scan(world, 2.0 + 0.01 * (i % 100), 5.0, 0.3, a, Backend::Serial);
        }
        const double serial = ms_since(t0);
        t0 = Clock::now();
        for (int i = 0; i < reps; ++i) {
            raycast_scan(world, 2.0 + 0.01 * (i % 100), 5.0, 0.3, b, Backend::OpenMP);
        }
        const double openmp = ms_since(t0);
        raycast_scan(world, 2.5, 5.0, 0.3, a, Backend::Serial);
        raycast_scan(world, 2.5, 5.0, 0.3, b, Backend::OpenMP);
        rows.push_back({"lidar_raycast", serial, openmp, a == b});
    }

    // Monte-Carlo prior: sensor-noise pushforward through the reactive
    // controller. Identical draws need identical RNG streams per backend.
    {
        ApfConfig apf;
        std::vector<double> scan(static_cast<size_t>(world.lidar.beams));
        raycast_scan(world, 2.0, 5.0, 0.0, scan, Backend::Serial);
        DiagGaussian2 da{}, db{};
        Clock::time_point t0 = Clock::now();
        {
            Rng rng(7);
            for (int i = 0; i < reps; ++i) {
                da = prior_distribution_mc(scan, 0.2, apf, rng, world.lidar.max_range,
                                           Backend::Serial);
            }
        }
        const double serial = ms_since(t0);
        t0 = Clock::now();
        {
            Rng rng(7);
            for (int i = 0; i < reps; ++i) {
                db = prior_distribution_mc(scan, 0.2, apf, rng, world.lidar.max_range,
                                           Backend::OpenMP);
            }
        }
        const double openmp = ms_since(t0);
        const bool same = da.v.mean == db.v.mean && da.v.var == db.v.var &&
                          da.w.mean == db.w.mean && da.w.var == db.w.var;
        rows.push_back({"prior_mc", serial, openmp, same});
    }

    // SAC minibatch update: two agents from the same seed walk the same RNG
    // stream, one per backend; parameters must stay equal throughout.
    {
        SacConfig cfg;
        ReplayBuffer buffer(10000);
        Rng fill(3);
        for (int i = 0; i < 2048; ++i) {
            Transition t;
            for (double& v : t.obs) v = fill.uniform(-1.0, 1.0);
            for (double& v : t.next_obs) v = fill.uniform(-1.0, 1.0);
            t.action = {fill.uniform(-1.0, 1.0), fill.uniform(-1.0, 1.0)};
            t.reward = fill.uniform(0.0, 1.0) < 0.05 ? 1.0 : 0.0;
            t.terminal = fill.uniform(0.0, 1.0) < 0.02;
            buffer.push(t);
        }
        SacAgent sa(cfg, 11), sb(cfg, 11);
        Rng ra(5), rb(5);
        Clock::time_point t0 = Clock::now();
        for (int i = 0; i < reps; ++i) sa.update(buffer, ra, Backend::Serial);
        const double serial = ms_since(t0);
        t0 = Clock::now();
        for (int i = 0; i < reps; ++i) sb.update(buffer, rb, Backend::OpenMP);
        const double openmp = ms_since(t0);
        const bool same = sa.actor().params() == sb.actor().params() &&
                          sa.q1().params() == sb.q1().params() &&
                          sa.q2().params() == sb.q2().params();
        rows.push_back({"sac_update", serial, openmp, same});
    }

    // Ensemble forward passes: five actors evaluated per decision.
    {
        std::vector<Mlp> members;
        for (uint64_t s = 0; s < 5; ++s) {
            Mlp m({Observation::kDim, 64, 64, 4}, Head::Gaussian);
            Rng rng(100 + s);
            m.init_params(rng);
            members.push_back(std::move(m));
        }
        const EnsembleBundle bundle(std::move(members));
        std::vector<double> obs(static_cast<size_t>(Observation::kDim));
        Rng orng(9);
        for (double& v : obs) v = orng.uniform(-1.0, 1.0);
        DiagGaussian2 da{}, db{};
        Clock::time_point t0 = Clock::now();
        for (int i = 0; i < reps; ++i) {
            da = ensemble_distribution(bundle, obs, 1e-6, Backend::Serial);
        }
        const double serial = ms_since(t0);
        t0 = Clock::now();
        for (int i = 0; i < reps; ++i) {
            db = ensemble_distribution(bundle, obs, 1e-6, Backend::OpenMP);
        }
        const double openmp = ms_since(t0);
        const bool same = da.v.mean == db.v.mean && da.v.var == db.v.var &&
                          da.w.mean == db.w.mean && da.w.var == db.w.var;
        rows.push_back({"ensemble_forward", serial, openmp, same});
    }

    print_rows(rows);
    for (const Row& r : rows) {
        if (!r.identical) {
            std::fprintf(stderr, "backend mismatch in %s\n", r.name);
            return 1;
        }
    }
    return 0;
}
