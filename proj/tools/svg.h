#pragma once

#include <string>
#include <vector>

#include "containment/sim.h"

namespace containment::cli {

/// Two panels: agent trajectories in the plane of the first two coordinates
/// with the leader hull drawn at each snapshot time, and the containment
/// error norm on a log scale. One-dimensional runs plot position against time.
std::string trajectory_svg(const Trace& trace, const std::vector<double>& snapshot_times);

/// Single semilog panel of `values` against `times`.
std::string error_svg(const std::string& title, const std::vector<double>& times,
                      const std::vector<double>& values);

}  // namespace containment::cli
