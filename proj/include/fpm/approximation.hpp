#pragma once

// Generalized finite difference gradient operator and point-based shape
// functions on Voronoi first-neighbour supports.

#include "fpm/geometry.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fpm {

struct GradientOperator {
    std::vector<int> support;  // [P0, P1, ..., Pm], P0 the generating point
    Eigen::MatrixXd B;         // dim x (m + 1)

    std::size_t size() const { return support.size(); }
};

/// Least-squares gradient operator of `cell_id` from its Voronoi neighbours.
/// Throws InsufficientSupport if fewer than dim neighbours exist and
/// SingularSupport if the normal matrix has condition number above 1e12.
GradientOperator gfd_operator(int cell_id, const Partition& partition, const PointCloud& points);

/// Same construction from an explicit neighbour list.
GradientOperator gfd_operator(int center, const std::vector<int>& neighbors, const PointCloud& points);

/// Shape row N(x) = (x - x0)^T B + e1^T.
Eigen::RowVectorXd shape_row(const Point& x, int cell_id, const GradientOperator& op, const PointCloud& points);

/// Operators for every cell. Cells without neighbours get a zero gradient
/// (N == [1]) when `allow_isolated` is set and raise InsufficientSupport
/// otherwise.
std::vector<GradientOperator> build_operators(const Partition& partition, const PointCloud& points,
                                              bool allow_isolated = true);

}  // namespace fpm
