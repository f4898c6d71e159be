#include "mcf/kernels.hpp"

#include <cmath>

#include "mcf/errors.hpp"

namespace mcf {

const char* to_string(Backend b) {
    return b == Backend::Serial ? "serial" : "openmp";
}

Backend backend_from_string(const std::string& s) {
    if (s == "serial") return Backend::Serial;
    if (s == "openmp") return Backend::OpenMP;
    throw ParamError("unknown backend '" + s + "' (serial|openmp)");
}

double cast_beam(const WorldSpec& world, const Vec2& origin, double bearing) {
    const Vec2 dir{std::cos(bearing), std::sin(bearing)};
    double best = world.lidar.max_range;
    for (const Segment& s : world.walls) {
        const double t = ray_segment(origin, dir, s);
        if (t < best) best = t;
    }
    for (const Circle& c : world.obstacles) {
        const double t = ray_circle(origin, dir, c);
        if (t < best) best = t;
    }
    return best;
}

void raycast_scan(const WorldSpec& world, double x, double y, double theta,
                  std::span<double> out, Backend backend) {
    const int n = world.lidar.beams;
    if (out.size() != static_cast<size_t>(n)) {
        throw DimensionError("raycast_scan: output span size " + std::to_string(out.size()) +
                             " != beam count " + std::to_string(n));
    }
    const Vec2 origin{x, y};
    const double fov = world.lidar.fov;
    const double step = fov / static_cast<double>(n - 1);
    const double start = theta - 0.5 * fov;
    if (backend == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            out[i] = cast_beam(world, origin, start + step * i);  // disjoint write per beam
        }
    } else {
        for (int i = 0; i < n; ++i) {
            out[i] = cast_beam(world, origin, start + step * i);
        }
    }
}

}  // namespace mcf
