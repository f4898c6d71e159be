#pragma once

// Data-parallel hot loops, each available in two interchangeable flavors:
// a plain serial loop kept as the reference, and an OpenMP version. The two
// are bit-identical by construction — parallel work either writes disjoint
// slots (raycast beams, Monte-Carlo samples, ensemble members) or reduces
// fixed-size chunks in a fixed order (minibatch gradients). Tests compare
// the backends element-for-element; tools/bench_kernels times them.

#include <span>
#include <string>

#include "mcf/world.hpp"

namespace mcf {

enum class Backend { Serial, OpenMP };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);  // throws ParamError

// Casts all lidar beams from pose (x, y, theta). Beam i leaves at bearing
// theta - fov/2 + i * fov / (beams - 1); each range is the nearest wall or
// obstacle hit, capped at lidar.max_range. out.size() must equal lidar.beams.
void raycast_scan(const WorldSpec& world, double x, double y, double theta,
                  std::span<double> out, Backend backend);

// Single-beam reference used by both backends and by tests.
double cast_beam(const WorldSpec& world, const Vec2& origin, double bearing);

}  // namespace mcf
