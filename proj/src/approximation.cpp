#include "fpm/approximation.hpp"

#include "fpm/errors.hpp"
#include "fpm/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace fpm {

GradientOperator gfd_operator(int center, const std::vector<int>& neighbors, const PointCloud& points) {
    const int d = points.dim;
    const int m = static_cast<int>(neighbors.size());
    if (m < d)
        throw InsufficientSupport("point " + std::to_string(center) + " has " + std::to_string(m) +
                                  " neighbours, needs at least " + std::to_string(d));
    const Point& x0 = points.coords[static_cast<std::size_t>(center)];
    Eigen::MatrixXd A(m, d);
    for (int i = 0; i < m; ++i)
        A.row(i) = (points.coords[static_cast<std::size_t>(neighbors[static_cast<std::size_t>(i)])] - x0)
                       .head(d)
                       .transpose();
    const Eigen::MatrixXd AtA = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(AtA, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw SingularSupport("support of point " + std::to_string(center) + " is degenerate");

    // [I1 I2]: column of -1 followed by the m x m identity.
    Eigen::MatrixXd I12 = Eigen::MatrixXd::Zero(m, m + 1);
    I12.col(0).setConstant(-1.0);
    I12.rightCols(m).setIdentity();

    GradientOperator op;
    op.support.reserve(static_cast<std::size_t>(m) + 1);
    op.support.push_back(center);
    op.support.insert(op.support.end(), neighbors.begin(), neighbors.end());
    op.B = AtA.ldlt().solve(A.transpose() * I12);
    return op;
}

GradientOperator gfd_operator(int cell_id, const Partition& partition, const PointCloud& points) {
    return gfd_operator(cell_id, partition.adjacency.at(static_cast<std::size_t>(cell_id)), points);
}

Eigen::RowVectorXd shape_row(const Point& x, int cell_id, const GradientOperator& op, const PointCloud& points) {
    const int d = points.dim;
    const Point off = x - points.coords[static_cast<std::size_t>(cell_id)];
    Eigen::RowVectorXd row = off.head(d).transpose() * op.B;
    row(0) += 1.0;
    return row;
}

std::vector<GradientOperator> build_operators(const Partition& partition, const PointCloud& points,
                                              bool allow_isolated) {
    const std::size_t n = partition.cells.size();
    std::vector<GradientOperator> ops(n);
    parallel_for(n, [&](std::size_t i) {
        const int id = static_cast<int>(i);
        if (allow_isolated && partition.adjacency[i].empty()) {
            ops[i].support = {id};
            ops[i].B = Eigen::MatrixXd::Zero(points.dim, 1);
            return;
        }
        ops[i] = gfd_operator(id, partition, points);
    });
    return ops;
}

}  // namespace fpm
