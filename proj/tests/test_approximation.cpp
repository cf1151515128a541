#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpm/approximation.hpp"
#include "fpm/errors.hpp"

#include <cmath>
#include <random>

using namespace fpm;

namespace {

PointCloud cloud(std::initializer_list<Point> pts, int dim = 2) {
    PointCloud pc;
    pc.dim = dim;
    for (const auto& p : pts) pc.add(p, false);
    return pc;
}

std::vector<int> range_from(int first, int last) {
    std::vector<int> v;
    for (int i = first; i <= last; ++i) v.push_back(i);
    return v;
}

// Random support of m neighbours around a random centre.
PointCloud random_support(std::mt19937& gen, int dim, int m) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud pc;
    pc.dim = dim;
    for (int i = 0; i <= m; ++i) pc.add(Point(u(gen), u(gen), dim == 3 ? u(gen) : 0.0), false);
    return pc;
}

}  // namespace

TEST_CASE("orthogonal unit offsets give forward differences") {
    const auto pc = cloud({Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)});
    const auto op = gfd_operator(0, {1, 2}, pc);
    Eigen::MatrixXd expected(2, 3);
    expected << -1, 1, 0, -1, 0, 1;
    CHECK((op.B - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("collinear support is singular") {
    const auto pc = cloud({Point(0, 0, 0), Point(1, 0, 0), Point(2, 0, 0)});
    CHECK_THROWS_AS(gfd_operator(0, {1, 2}, pc), SingularSupport);
}

TEST_CASE("too few neighbours") {
    const auto pc = cloud({Point(0, 0, 0), Point(1, 0, 0)});
    CHECK_THROWS_AS(gfd_operator(0, std::vector<int>{1}, pc), InsufficientSupport);
}

TEST_CASE("symmetric cross stencil") {
    const auto pc = cloud({Point(0, 0, 0), Point(1, 0, 0), Point(-1, 0, 0), Point(0, 1, 0), Point(0, -1, 0)});
    const auto op = gfd_operator(0, {1, 2, 3, 4}, pc);
    // Oracle: A rows are the offsets, A^T A = 2 I, so B = (A^T A)^-1 A^T [-1 | I].
    Eigen::MatrixXd A(4, 2);
    A << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::MatrixXd rhs(4, 5);
    rhs.setZero();
    rhs.col(0).setConstant(-1.0);
    rhs.rightCols(4).setIdentity();
    const Eigen::MatrixXd oracle = 0.5 * A.transpose() * rhs;
    Eigen::MatrixXd expected(2, 5);
    expected << 0, 0.5, -0.5, 0, 0, 0, 0, 0, 0.5, -0.5;
    CHECK((oracle - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((op.B - expected).cwiseAbs().maxCoeff() < 1e-14);

    const auto row = shape_row(Point(0.5, 0, 0), 0, op, pc);
    Eigen::RowVectorXd n(5);
    n << 1, 0.25, -0.25, 0, 0;
    CHECK((row - n).cwiseAbs().maxCoeff() < 1e-14);
    const auto at_center = shape_row(Point::Zero(), 0, op, pc);
    CHECK(at_center(0) == 1.0);
    CHECK(at_center.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear exactness and partition of unity on random supports") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = trial % 2 == 0 ? 2 : 3;
        const int m = dim + static_cast<int>(gen() % 6);
        const auto pc = random_support(gen, dim, m);
        GradientOperator op;
        try {
            op = gfd_operator(0, range_from(1, m), pc);
        } catch (const SingularSupport&) {
            continue;
        }
        const double a = u(gen);
        const Point g(u(gen), u(gen), dim == 3 ? u(gen) : 0.0);
        Eigen::VectorXd vals(m + 1);
        for (int i = 0; i <= m; ++i) vals(i) = a + g.dot(pc.coords[static_cast<std::size_t>(i)]);
        CHECK((op.B * vals - g.head(dim)).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + g.norm()));
        for (int s = 0; s < 100; ++s) {
            const Point x(u(gen), u(gen), dim == 3 ? u(gen) : 0.0);
            const auto row = shape_row(x, 0, op, pc);
            CHECK(std::abs(row.sum() - 1.0) <= 1e-10);
            if (s == 0) CHECK(std::abs(row.dot(vals) - (a + g.dot(x))) <= 1e-10 * (1.0 + std::abs(a) + g.norm()));
        }
    }
}

TEST_CASE("translation invariance and rotation equivariance") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int dim : {2, 3}) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto pc = random_support(gen, dim, dim + 3);
            const auto op = gfd_operator(0, range_from(1, dim + 3), pc);

            const Point shift(u(gen), u(gen), dim == 3 ? u(gen) : 0.0);
            PointCloud moved = pc;
            for (auto& p : moved.coords) p += shift;
            const auto op_t = gfd_operator(0, range_from(1, dim + 3), moved);
            CHECK((op_t.B - op.B).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + op.B.cwiseAbs().maxCoeff()));
            const Point x(u(gen), u(gen), dim == 3 ? u(gen) : 0.0);
            const auto n0 = shape_row(x, 0, op, pc);
            const auto n1 = shape_row(x + shift, 0, op_t, moved);
            CHECK((n0 - n1).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + n0.cwiseAbs().maxCoeff()));

            Eigen::Matrix3d R;
            if (dim == 2) {
                const double th = u(gen) * 3.0;
                R << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
            } else {
                R = Eigen::Quaterniond(Eigen::Vector4d(u(gen), u(gen), u(gen), u(gen)).normalized()).toRotationMatrix();
            }
            PointCloud rotated = pc;
            for (auto& p : rotated.coords) p = R * p;
            const auto op_r = gfd_operator(0, range_from(1, dim + 3), rotated);
            const Eigen::MatrixXd expected = R.topLeftCorner(dim, dim) * op.B;
            CHECK((op_r.B - expected).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + op.B.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("operators from a partition use Voronoi neighbours") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud({Point(0.25, 0.25, 0), Point(0.75, 0.25, 0), Point(0.25, 0.75, 0), Point(0.75, 0.75, 0)});
    const auto part = build_partition(pc, domain);
    const auto ops = build_operators(part, pc);
    REQUIRE(ops.size() == 4);
    CHECK(ops[0].support == std::vector<int>{0, 1, 2});
    CHECK(ops[3].support == std::vector<int>{3, 1, 2});

    PointCloud lone = cloud({Point(0.5, 0.5, 0)});
    const auto single = build_partition(lone, domain);
    const auto iso = build_operators(single, lone);
    CHECK(iso[0].support == std::vector<int>{0});
    CHECK(iso[0].B.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(build_operators(single, lone, false), InsufficientSupport);
}
