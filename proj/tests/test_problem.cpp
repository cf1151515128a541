#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpm/errors.hpp"
#include "fpm/problem.hpp"

#include <cmath>

using namespace fpm;

namespace {

PointCloud cloud(std::initializer_list<std::pair<Point, bool>> pts) {
    PointCloud pc;
    pc.dim = 2;
    for (const auto& [p, b] : pts) pc.add(p, b);
    return pc;
}

SpaceTimeField constant(double v) {
    return [v](const Point&, double) { return v; };
}

}  // namespace

TEST_CASE("gradation profiles") {
    CHECK(gradation_value(Gradation::Exponential, 0.0, 1.0, 0.37) == 1.0);
    CHECK(gradation_value(Gradation::ExpSquare, 2.0, 1.0, 0.0) == doctest::Approx(4.0));
    CHECK(gradation_value(Gradation::PowerLaw, 3.0, 1.0, 1.0) == doctest::Approx(16.0));
    CHECK(gradation_value(Gradation::Exponential, 3.0, 2.0, 2.0) == doctest::Approx(std::exp(3.0)));
    for (auto kind : {Gradation::Exponential, Gradation::ExpSquare, Gradation::Trigonometric, Gradation::PowerLaw})
        for (double y : {0.0, 0.3, 0.7, 1.0}) CHECK(gradation_value(kind, 2.0, 1.0, y) > 0.0);

    const Eigen::Matrix3d k_hat = Eigen::Vector3d(2, 3, 1).asDiagonal();
    const auto m = graded_material(Gradation::PowerLaw, 3.0, 1.0, k_hat);
    const Point x(0.2, 0.5, 0);
    const double f = gradation_value(Gradation::PowerLaw, 3.0, 1.0, 0.5);
    CHECK(m.rho(x) == 1.0);
    CHECK(m.c(x) == doctest::Approx(f));
    CHECK((m.k(x) - f * k_hat).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(gradation_profile(Gradation::Exponential, 1.0, 0.0), InvalidProblem);
}

TEST_CASE("material validation") {
    const std::vector<Point> samples = {Point(0.5, 0.5, 0)};
    CHECK_NOTHROW(validate_material(MaterialField::isotropic(1, 1, 2), 2, samples));
    Eigen::Matrix3d k;
    k << 1, 2, 0, 2, 1, 0, 0, 0, 1;  // indefinite
    CHECK_THROWS_AS(validate_material(MaterialField::constant(1, 1, k), 2, samples), InvalidProblem);
    k << 1, 0.5, 0, 0.4, 1, 0, 0, 0, 1;  // asymmetric
    CHECK_THROWS_AS(validate_material(MaterialField::constant(1, 1, k), 2, samples), InvalidProblem);
    CHECK_THROWS_AS(validate_material(MaterialField::isotropic(-1, 1, 1), 2, samples), InvalidProblem);
}

TEST_CASE("piecewise material evaluates per side") {
    MaterialField m = MaterialField::isotropic(1, 1, 1);
    m.k = [](const Point& x) -> Eigen::Matrix3d { return (x.y() > 50.0 ? 2.0 : 1.0) * Eigen::Matrix3d::Identity(); };
    CHECK(m.k(Point(10, 50.0 + 1e-9, 0))(0, 0) == 2.0);
    CHECK(m.k(Point(10, 50.0 - 1e-9, 0))(0, 0) == 1.0);
    CHECK(m.k(Point(10, 50.0, 0))(0, 0) == m.k(Point(10, 50.0, 0))(0, 0));
}

TEST_CASE("boundary classification") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud({{Point(0.25, 0.5, 0), false}, {Point(0.75, 0.5, 0), false}});
    const Partition base = build_partition(pc, domain);

    SUBCASE("selector plus fallback") {
        Partition p = base;
        ProblemSpec prob;
        prob.regions = {{"right", BcKind::Dirichlet, plane_selector(0, 1.0), constant(1.0), {}},
                        {"rest", BcKind::Neumann, {}, constant(0.0), {}}};
        classify_boundary(p, prob);
        for (const auto& f : p.faces) {
            if (f.is_internal()) continue;
            const bool right = std::abs(f.centroid.x() - 1.0) < 1e-12;
            CHECK(f.kind == (right ? FaceKind::Dirichlet : FaceKind::Neumann));
            CHECK(f.region == (right ? 0 : 1));
        }
    }
    SUBCASE("unclaimed face without fallback") {
        Partition p = base;
        ProblemSpec prob;
        prob.regions = {{"right", BcKind::Dirichlet, plane_selector(0, 1.0), constant(1.0), {}}};
        CHECK_THROWS_AS(classify_boundary(p, prob), InvalidProblem);
    }
    SUBCASE("face claimed twice") {
        Partition p = base;
        ProblemSpec prob;
        prob.regions = {{"a", BcKind::Dirichlet, plane_selector(0, 1.0), constant(1.0), {}},
                        {"b", BcKind::Neumann, plane_selector(0, 1.0), constant(0.0), {}},
                        {"rest", BcKind::Neumann, {}, constant(0.0), {}}};
        CHECK_THROWS_AS(classify_boundary(p, prob), InvalidProblem);
    }
    SUBCASE("plane selector ignores faces with a different normal") {
        const auto sel = plane_selector(1, 0.0);
        CHECK(sel(Point(0.3, 0.0, 0), Point(0, -1, 0)));
        CHECK_FALSE(sel(Point(0.0, 0.0, 0), Point(-1, 0, 0)));
        CHECK_FALSE(sel(Point(0.3, 0.5, 0), Point(0, -1, 0)));
    }
}

TEST_CASE("strong constraints pick boundary points on Dirichlet faces") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud({{Point(0.0, 0.5, 0), true}, {Point(0.5, 0.5, 0), false}, {Point(1.0, 0.5, 0), true}});
    Partition p = build_partition(pc, domain);
    ProblemSpec prob;
    prob.regions = {{"left", BcKind::Dirichlet, plane_selector(0, 0.0), constant(1.0), {}},
                    {"rest", BcKind::Neumann, {}, constant(0.0), {}}};
    classify_boundary(p, prob);
    const auto cons = strong_constraints(p, pc, prob);
    REQUIRE(cons.size() == 1);
    CHECK(cons[0].point == 0);
    CHECK(cons[0].region == 0);

    PointCloud interior = cloud({{Point(0.25, 0.5, 0), false}, {Point(0.75, 0.5, 0), false}});
    Partition q = build_partition(interior, domain);
    classify_boundary(q, prob);
    CHECK_THROWS_AS(strong_constraints(q, interior, prob), InvalidProblem);
}

TEST_CASE("heaviside step") {
    CHECK(heaviside(0.0) == 1.0);
    CHECK(heaviside(1e-300) == 1.0);
    CHECK(heaviside(-1e-12) == 0.0);
}

TEST_CASE("robin roots") {
    // Oracle: Newton iteration on beta tan(beta) - 1 from the bracket midpoint.
    double b = 0.8;
    for (int k = 0; k < 50; ++k) {
        const double g = b * std::tan(b) - 1.0;
        const double dg = std::tan(b) + b / (std::cos(b) * std::cos(b));
        b -= g / dg;
    }
    const auto roots = robin_roots(1.0, 5);
    CHECK(roots[0] == doctest::Approx(b).epsilon(1e-12));
    CHECK(roots[0] == doctest::Approx(0.8603).epsilon(1e-4));
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        CHECK(roots[i] > static_cast<double>(i) * pi);
        CHECK(roots[i] < (static_cast<double>(i) + 0.5) * pi);
        CHECK(std::abs(roots[i] * std::sin(roots[i]) - std::cos(roots[i])) < 1e-10);
    }
    CHECK_THROWS_AS(robin_roots(0.0, 3), InvalidProblem);
}

TEST_CASE("robin series limits") {
    const double L = 10.0, m = 10.0;
    for (double z : {0.0, 2.5, 5.0, 7.5}) {
        CHECK(std::abs(robin_series_solution(z, 0.0, L, m, 1.0, 1.0, 50)) <= 1e-3);
        CHECK(robin_series_solution(z, 1e5, L, m, 1.0, 1.0, 50) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Monotone heating at the insulated face.
    double prev = -1.0;
    for (double t : {1.0, 5.0, 20.0, 50.0}) {
        const double v = robin_series_solution(0.0, t, L, m, 1.0, 1.0, 50);
        CHECK(v > prev);
        prev = v;
    }
}
