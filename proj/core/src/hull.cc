#include "containment/hull.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace containment {
namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

}  // namespace

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;
  std::vector<Eigen::Vector2d> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& pt : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pt) <= 0.0) --k;
    hull[k++] = pt;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double hull_distance_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& points) {
  if (points.empty()) throw std::invalid_argument("hull_distance: no points");
  const auto hull = convex_hull_2d(points);
  if (hull.size() == 1) return (p - hull[0]).norm();
  if (hull.size() == 2) return segment_distance(p, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const auto& a = hull[k];
    const auto& b = hull[(k + 1) % hull.size()];
    if (cross(a, b, p) < 0.0) inside = false;
    best = std::min(best, segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

double hull_distance_iterative(const Vec& p, const std::vector<Vec>& points, double tol,
                               int max_iterations) {
  if (points.empty()) throw std::invalid_argument("hull_distance: no points");
  const auto k = static_cast<Eigen::Index>(points.size());
  const auto dim = p.size();
  Eigen::MatrixXd x(dim, k);
  for (Eigen::Index j = 0; j < k; ++j) x.col(j) = points[static_cast<std::size_t>(j)];

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
  Eigen::Index start = 0;
  (x.colwise() - p.cast<double>()).colwise().squaredNorm().minCoeff(&start);
  alpha[start] = 1.0;
  Eigen::VectorXd y = x.col(start);

  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd r = y - p;
    const double dist = r.norm();
    if (dist == 0.0) return 0.0;
    const Eigen::VectorXd grad = x.transpose() * r;
    const double current = alpha.dot(grad);

    Eigen::Index s = 0;
    grad.minCoeff(&s);
    const double gap_fw = current - grad[s];
    // f = |r|^2 / 2 and the gap bounds f - f*, so the optimal distance is at
    // least sqrt(dist^2 - 2 gap).
    const double lower = std::sqrt(std::max(0.0, dist * dist - 2.0 * gap_fw));
    if (dist - lower <= tol) return dist;

    Eigen::Index v = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (alpha[j] > 0.0 && (v < 0 || grad[j] > grad[v])) v = j;
    }
    const double gap_away = grad[v] - current;

    Eigen::VectorXd dir;
    double step_max;
    const bool forward = gap_fw >= gap_away || alpha[v] >= 1.0;
    if (forward) {
      dir = x.col(s) - y;
      step_max = 1.0;
    } else {
      dir = y - x.col(v);
      step_max = alpha[v] / (1.0 - alpha[v]);
    }
    const double dd = dir.squaredNorm();
    if (dd == 0.0) return dist;
    const double step = std::clamp(-r.dot(dir) / dd, 0.0, step_max);
    if (forward) {
      alpha *= (1.0 - step);
      alpha[s] += step;
    } else {
      alpha *= (1.0 + step);
      alpha[v] -= step;
      if (step == step_max) alpha[v] = 0.0;
    }
    alpha = alpha.cwiseMax(0.0);
    alpha /= alpha.sum();
    y = x * alpha;
  }
  return (y - p).norm();
}

double hull_distance(const Vec& p, const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("hull_distance: no points");
  if (p.size() == 2) {
    std::vector<Eigen::Vector2d> planar;
    planar.reserve(points.size());
    for (const auto& q : points) planar.emplace_back(q[0], q[1]);
    return hull_distance_2d(Eigen::Vector2d(p[0], p[1]), planar);
  }
  return hull_distance_iterative(p, points);
}

}  // namespace containment
