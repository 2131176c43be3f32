#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "geohmm/model.hpp"

namespace geohmm {

/// Soft constraint x_j - x_i ~= value with the given (positive) weight.
struct PositionTarget {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;
  double weight = 1.0;
};

/// Weighted least-squares embedding: minimizes sum w (value - (x_j - x_i))^2.
/// Each connected component of the target graph is solved separately; the
/// anchor (or, for components without it, the lowest-index node) sits at 0.
std::vector<double> solve_positions(std::span<const PositionTarget> targets, std::size_t n,
                                    std::size_t anchor = 0);

/// Planar version with a 2x2 information matrix per target:
/// minimizes sum (g - (p_j - p_i))^T Lambda (g - (p_j - p_i)).
struct PlanarTarget {
  std::size_t i = 0;
  std::size_t j = 0;
  Point2 value;
  Eigen::Matrix2d information = Eigen::Matrix2d::Identity();
};

std::vector<Point2> solve_planar_positions(std::span<const PlanarTarget> targets, std::size_t n,
                                           std::size_t anchor = 0);

/// Component label per node for the undirected graph on `edges`.
std::vector<std::size_t> connected_components(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

}  // namespace geohmm
