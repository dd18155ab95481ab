#pragma once

#include <vector>

#include <Eigen/Dense>

#include "containment/types.h"

namespace containment {

inline constexpr double kHullTolerance = 1e-8;
inline constexpr int kHullMaxIterations = 500;

/// Distance from `p` to the convex hull of `points`. Uses the exact planar
/// routine when the dimension is 2, otherwise hull_distance_iterative.
double hull_distance(const Vec& p, const std::vector<Vec>& points);

/// Away-step Frank-Wolfe on the simplex weights, minimizing
/// |p - sum_j alpha_j x_j|. Stops when the duality gap drops below `tol`.
double hull_distance_iterative(const Vec& p, const std::vector<Vec>& points,
                               double tol = kHullTolerance,
                               int max_iterations = kHullMaxIterations);

/// Exact planar distance via the hull polygon.
double hull_distance_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& points);

/// Counter-clockwise hull vertices without repeats (monotone chain).
/// Collinear inputs yield the two extreme points.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points);

}  // namespace containment
