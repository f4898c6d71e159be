#include "mcf/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "mcf/errors.hpp"
#include "mcf/sim.hpp"

using nlohmann::json;

namespace mcf {

namespace {

constexpr double kSq2 = 1.4142135623730951;

struct Cell {
    int ix = 0;
    int iy = 0;
};

int grid_extent(double span, double res) {
    return std::max(1, static_cast<int>(std::ceil(span * res - 1e-9)));
}

Cell cell_of(const Vec2& p, const Rect& b, double res, int nx, int ny) {
    const int ix = std::clamp(static_cast<int>(std::floor((p.x - b.xmin) * res)), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((p.y - b.ymin) * res)), 0, ny - 1);
    return {ix, iy};
}

// Nearest free cell within a Chebyshev window of 3 cells, scanning rings of
// growing radius row-major — deterministic, and small enough that it only
// absorbs boundary rounding, never tunnels through a real obstacle.
Cell snap_free(const Cell& c, const GridPlan& g, const char* who) {
    for (int r = 0; r <= 3; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const int ix = c.ix + dx, iy = c.iy + dy;
                if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) continue;
                if (!g.occupied[static_cast<size_t>(iy) * g.nx + ix]) return {ix, iy};
            }
        }
    }
    throw UnreachableError(std::string(who) + " cell is inside an inflated obstacle");
}

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

}  // namespace

Vec2 GridPlan::cell_center(int idx, const Rect& bounds) const {
    if (nx <= 0 || ny <= 0) throw UsageError("grid plan is empty");
    if (idx < 0 || idx >= nx * ny) {
        throw ParamError("cell index " + std::to_string(idx) + " out of range");
    }
    const int ix = idx % nx, iy = idx / nx;
    return {bounds.xmin + (ix + 0.5) / resolution, bounds.ymin + (iy + 0.5) / resolution};
}

bool GridPlan::cell_blocked(int ix, int iy) const {
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) {
        throw ParamError("cell (" + std::to_string(ix) + "," + std::to_string(iy) +
                         ") out of range");
    }
    return occupied[static_cast<size_t>(iy) * nx + ix] != 0;
}

GridPlan astar_shortest(const WorldSpec& world, Vec2 start, Vec2 goal, double resolution) {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw ParamError("resolution must be positive, got " + fmt(resolution));
    }
    const Rect& b = world.bounds;
    for (const auto& [who, p] : {std::pair<const char*, Vec2>{"start", start}, {"goal", goal}}) {
        if (!b.contains(p)) {
            throw ParamError(std::string(who) + " (" + fmt(p.x) + "," + fmt(p.y) +
                             ") is outside the arena bounds");
        }
    }

    GridPlan g;
    g.resolution = resolution;
    g.nx = grid_extent(b.width(), resolution);
    g.ny = grid_extent(b.height(), resolution);
    g.occupied.assign(static_cast<size_t>(g.nx) * g.ny, 0);
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Vec2 c{b.xmin + (ix + 0.5) / resolution, b.ymin + (iy + 0.5) / resolution};
            // collides() already accounts for the robot radius, so the grid
            // is inflated and any grid path is achievable by the disc robot.
            if (collides(c, world)) g.occupied[static_cast<size_t>(iy) * g.nx + ix] = 1;
        }
    }

    const Cell sc = snap_free(cell_of(start, b, resolution, g.nx, g.ny), g, "start");
    const Cell gc = snap_free(cell_of(goal, b, resolution, g.nx, g.ny), g, "goal");
    const int s_idx = sc.iy * g.nx + sc.ix;
    const int g_idx = gc.iy * g.nx + gc.ix;

    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.occupied.size(), INF);
    std::vector<int> parent(g.occupied.size(), -1);
    const auto heur = [&](int idx) {
        const int dx = std::abs(idx % g.nx - gc.ix);
        const int dy = std::abs(idx / g.nx - gc.iy);
        return std::max(dx, dy) + (kSq2 - 1.0) * std::min(dx, dy);
    };
    // (f, cell index) min-queue; the index breaks f ties, so expansion order
    // is fully deterministic.
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    dist[static_cast<size_t>(s_idx)] = 0.0;
    pq.push({heur(s_idx), s_idx});
    const int dyk[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    const int dxk[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    const double cost[8] = {1, 1, 1, 1, kSq2, kSq2, kSq2, kSq2};
    bool reached = false;
    while (!pq.empty()) {
        const auto [f, idx] = pq.top();
        pq.pop();
        if (f > dist[static_cast<size_t>(idx)] + heur(idx) + 1e-12) continue;  // stale entry
        if (idx == g_idx) {
            reached = true;
            break;
        }
        const int ix = idx % g.nx, iy = idx / g.nx;
        for (int k = 0; k < 8; ++k) {
            const int nixx = ix + dxk[k], niy = iy + dyk[k];
            if (nixx < 0 || nixx >= g.nx || niy < 0 || niy >= g.ny) continue;
            const int nidx = niy * g.nx + nixx;
            if (g.occupied[static_cast<size_t>(nidx)]) continue;
            if (k >= 4) {
                // no corner cutting: both orthogonal neighbors must be free
                if (g.occupied[static_cast<size_t>(iy) * g.nx + nixx] ||
                    g.occupied[static_cast<size_t>(niy) * g.nx + ix])
                    continue;
            }
            const double nd = dist[static_cast<size_t>(idx)] + cost[k];
            if (nd < dist[static_cast<size_t>(nidx)]) {
                dist[static_cast<size_t>(nidx)] = nd;
                parent[static_cast<size_t>(nidx)] = idx;
                pq.push({nd + heur(nidx), nidx});
            }
        }
    }
    if (!reached) {
        throw UnreachableError("no grid path from (" + fmt(start.x) + "," + fmt(start.y) +
                               ") to (" + fmt(goal.x) + "," + fmt(goal.y) + ") in arena '" +
                               world.name + "'");
    }
    for (int idx = g_idx; idx != -1; idx = parent[static_cast<size_t>(idx)]) g.path.push_back(idx);
    std::reverse(g.path.begin(), g.path.end());
    g.path_length = dist[static_cast<size_t>(g_idx)] / resolution;
    return g;
}

double spl(const std::vector<EpisodeOutcome>& episodes) {
    if (episodes.empty()) throw UndefinedMetric("SPL of zero episodes");
    double sum = 0.0;
    for (size_t i = 0; i < episodes.size(); ++i) {
        const EpisodeOutcome& e = episodes[i];
        if (!(e.shortest > 0.0) || !std::isfinite(e.shortest)) {
            throw ParamError("episode " + std::to_string(i) + ": shortest length must be > 0, got " +
                             fmt(e.shortest));
        }
        if (e.traveled < 0.0 || !std::isfinite(e.traveled)) {
            throw ParamError("episode " + std::to_string(i) + ": traveled length must be >= 0, got " +
                             fmt(e.traveled));
        }
        if (e.success) sum += e.shortest / std::max(e.shortest, e.traveled);
    }
    return sum / static_cast<double>(episodes.size());
}

EvalReport evaluate_methods(const std::vector<Controller>& methods,
                            const std::vector<std::string>& arenas,
                            const EnsembleBundle* bundle, const ApfConfig& apf,
                            const EvalSuiteOptions& opts) {
    if (methods.empty()) throw ParamError("no methods to evaluate");
    if (arenas.empty()) throw ParamError("no arenas to evaluate in");
    for (size_t i = 0; i < methods.size(); ++i) {
        for (size_t j = i + 1; j < methods.size(); ++j) {
            if (methods[i] == methods[j]) {
                throw ParamError(std::string("duplicate method '") + to_string(methods[i]) + "'");
            }
        }
    }
    for (size_t i = 0; i < arenas.size(); ++i) {
        for (size_t j = i + 1; j < arenas.size(); ++j) {
            if (arenas[i] == arenas[j]) throw ParamError("duplicate arena '" + arenas[i] + "'");
        }
    }
    if (opts.episodes_per < 1) {
        throw ParamError("episodes_per must be >= 1, got " + std::to_string(opts.episodes_per));
    }
    if (opts.workers < 1) {
        throw ParamError("workers must be >= 1, got " + std::to_string(opts.workers));
    }
    if (!(opts.resolution > 0.0)) {
        throw ParamError("resolution must be positive, got " + fmt(opts.resolution));
    }
    std::vector<WorldSpec> specs;
    specs.reserve(arenas.size());
    for (const std::string& name : arenas) specs.push_back(find_arena(name));
    const bool learned =
        std::any_of(methods.begin(), methods.end(), [](Controller c) {
            return c == Controller::mcf || c == Controller::policy_only;
        });
    if (learned && bundle == nullptr) {
        throw ConfigError("evaluating mcf/policy_only needs a trained actor ensemble");
    }

    // One seed list shared by every (method, arena) cell: episode j faces the
    // same start/goal draw under every method, making the comparison paired.
    Rng sr = Rng::derive(opts.seed_base, "eval-episodes");
    std::vector<uint64_t> seeds(static_cast<size_t>(opts.episodes_per));
    for (uint64_t& s : seeds) s = sr.raw();

    EvalReport report;
    report.rows.resize(methods.size() * arenas.size());
    const auto run_cell = [&](size_t cell) {
        const size_t mi = cell / arenas.size();
        const size_t ai = cell % arenas.size();
        MethodRow row;
        row.method = methods[mi];
        row.env = arenas[ai];
        row.episodes = opts.episodes_per;
        double steps_sum = 0.0;
        for (uint64_t seed : seeds) {
            NavEnv env(specs[ai], opts.env);
            const EpisodeRecord rec =
                run_episode(row.method, env, seed, bundle, apf, opts.deploy);
            const GridPlan plan = astar_shortest(specs[ai], rec.start, rec.goal, opts.resolution);
            row.outcomes.push_back({rec.success, rec.traveled, plan.path_length});
            row.successes += rec.success ? 1 : 0;
            steps_sum += rec.steps;
        }
        row.spl = spl(row.outcomes);
        row.actuation_steps = steps_sum / static_cast<double>(opts.episodes_per);
        report.rows[cell] = std::move(row);
    };

    const size_t cells = report.rows.size();
    if (opts.workers == 1 || cells == 1) {
        for (size_t c = 0; c < cells; ++c) run_cell(c);
    } else {
        std::atomic<size_t> next{0};
        const size_t nthreads = std::min<size_t>(static_cast<size_t>(opts.workers), cells);
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (size_t c = next.fetch_add(1); c < cells; c = next.fetch_add(1)) run_cell(c);
            });
        }
        for (std::thread& th : pool) th.join();
    }
    return report;
}

void write_report_json(const EvalReport& report, const std::string& path) {
    json rows = json::array();
    for (const MethodRow& r : report.rows) {
        json outcomes = json::array();
        for (const EpisodeOutcome& e : r.outcomes) {
            outcomes.push_back(
                {{"success", e.success}, {"traveled", e.traveled}, {"shortest", e.shortest}});
        }
        rows.push_back({{"method", to_string(r.method)},
                        {"env", r.env},
                        {"SPL", r.spl},
                        {"actuation_steps", r.actuation_steps},
                        {"successes", r.successes},
                        {"episodes", r.episodes},
                        {"outcomes", std::move(outcomes)}});
    }
    json doc{{"schema", "mcf-eval-v1"}, {"rows", std::move(rows)}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

std::string report_table(const EvalReport& report) {
    std::ostringstream os;
    os << "| method | env | SPL | actuation_steps | successes | episodes |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const MethodRow& r : report.rows) {
        os << "| " << to_string(r.method) << " | " << r.env << " | " << fmt(r.spl, "%.3f")
           << " | " << fmt(r.actuation_steps, "%.1f") << " | " << r.successes << " | "
           << r.episodes << " |\n";
    }
    return os.str();
}

void write_report_md(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << report_table(report);
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace mcf
