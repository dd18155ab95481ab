#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace containment {

// Position dimension is capped so per-agent vectors live on the stack.
inline constexpr int kMaxDimension = 4;
inline constexpr int kMaxPayload = 2 * kMaxDimension;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxPayload, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                               kMaxPayload, kMaxPayload>;

/// Directed edge j -> i: agent `to` receives information from agent `from`.
/// Indices are zero-based; agent ids in files are one-based.
struct Edge {
  int from = 0;
  int to = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchedulerError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time, int agent)
      : std::runtime_error(what), time_(time), agent_(agent) {}
  double time() const { return time_; }
  int agent() const { return agent_; }

 private:
  double time_;
  int agent_;
};

}  // namespace containment
