#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpm/bench.hpp"
#include "fpm/errors.hpp"
#include "fpm/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fpm;

namespace {

PointCloud cloud(int dim, std::initializer_list<Point> pts) {
    PointCloud pc;
    pc.dim = dim;
    for (const auto& p : pts) pc.add(p, false);
    return pc;
}

PointCloud uniform_random(int dim, int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud pc;
    pc.dim = dim;
    for (int i = 0; i < n; ++i) pc.add(Point(u(gen), u(gen), dim == 3 ? u(gen) : 0.0), false);
    return pc;
}

double total_volume(const Partition& p) {
    double v = 0.0;
    for (const auto& c : p.cells) v += c.volume;
    return v;
}

double total_face_measure(const Partition& p) {
    double m = 0.0;
    for (const auto& f : p.faces) m += f.kind == FaceKind::Crack ? 0.5 * f.measure : f.measure;
    return m;
}

}  // namespace

TEST_CASE("quadrant points give four congruent cells") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud(2, {Point(0.25, 0.25, 0), Point(0.75, 0.25, 0), Point(0.25, 0.75, 0), Point(0.75, 0.75, 0)});
    const Partition p = build_partition(pc, domain);
    for (const auto& c : p.cells) CHECK(c.volume == doctest::Approx(0.25).epsilon(1e-14));
    int internal = 0;
    for (const auto& f : p.faces)
        if (f.is_internal()) {
            ++internal;
            CHECK(f.measure == doctest::Approx(0.5).epsilon(1e-14));
            CHECK(f.h_e == doctest::Approx(0.5).epsilon(1e-14));
        }
    CHECK(internal == 4);
}

TEST_CASE("two points share the perpendicular bisector") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud(2, {Point(0.25, 0.5, 0), Point(0.75, 0.5, 0)});
    const Partition p = build_partition(pc, domain);
    int internal = 0;
    for (const auto& f : p.faces) {
        if (!f.is_internal()) continue;
        ++internal;
        CHECK(f.cell == 0);
        CHECK(f.neighbor == 1);
        CHECK(f.measure == doctest::Approx(1.0));
        CHECK(f.normal.x() == doctest::Approx(1.0));
        CHECK(std::abs(f.normal.y()) < 1e-14);
        CHECK(f.centroid.x() == doctest::Approx(0.5));
    }
    CHECK(internal == 1);
    CHECK(p.adjacency[0] == std::vector<int>{1});
    CHECK(p.adjacency[1] == std::vector<int>{0});
}

TEST_CASE("random 2D cells match Monte-Carlo point location") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = uniform_random(2, 100, 11);
    const Partition p = build_partition(pc, domain);
    CHECK(std::abs(total_volume(p) - 1.0) <= 1e-8);

    const int samples = 200000;
    std::vector<int> hits(pc.size(), 0);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        const Point x(u(gen), u(gen), 0.0);
        std::size_t best = 0;
        double bd = (pc.coords[0] - x).squaredNorm();
        for (std::size_t i = 1; i < pc.size(); ++i) {
            const double d = (pc.coords[i] - x).squaredNorm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        ++hits[best];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < pc.size(); ++i)
        worst = std::max(worst, std::abs(p.cells[i].volume - static_cast<double>(hits[i]) / samples));
    // Binomial standard deviation is below 2.3e-4 for cells of area <= 0.01.
    CHECK(worst < 2e-3);
}

TEST_CASE("partition invariants hold on random clouds") {
    for (int dim : {2, 3}) {
        for (unsigned seed : {1u, 2u, 3u}) {
            CAPTURE(dim);
            CAPTURE(seed);
            const Point upper = dim == 2 ? Point(1, 1, 0) : Point(1, 1, 1);
            const auto domain = ConvexDomain::box(dim, Point::Zero(), upper);
            const auto pc = uniform_random(dim, dim == 2 ? 200 : 150, seed);
            const Partition p = build_partition(pc, domain);
            CHECK(std::abs(total_volume(p) - 1.0) <= 1e-8);
            double boundary = 0.0;
            for (const auto& f : p.faces) {
                CHECK(f.measure > 0.0);
                if (!f.is_internal()) {
                    boundary += f.measure;
                    continue;
                }
                const Point& xi = pc.coords[static_cast<std::size_t>(f.cell)];
                const Point& xj = pc.coords[static_cast<std::size_t>(f.neighbor)];
                // Stored normal points from E1 to E2; the outward normal of E2 is its negative.
                const Point n2 = (xi - xj).normalized();
                CHECK((f.normal + n2).norm() <= 1e-14);
                CHECK(std::abs((f.centroid - xi).norm() - (f.centroid - xj).norm()) <= 1e-10);
            }
            CHECK(boundary == doctest::Approx(dim == 2 ? 4.0 : 6.0).epsilon(1e-10));
            for (std::size_t i = 0; i < pc.size(); ++i)
                for (int j : p.adjacency[i]) {
                    const auto& back = p.adjacency[static_cast<std::size_t>(j)];
                    CHECK(std::find(back.begin(), back.end(), static_cast<int>(i)) != back.end());
                }
        }
    }
}

TEST_CASE("partitions are deterministic") {
    const auto domain = ConvexDomain::box(3, Point::Zero(), Point(1, 1, 1));
    const auto pc = uniform_random(3, 120, 9);
    const Partition a = build_partition(pc, domain);
    const Partition b = build_partition(pc, domain);
    REQUIRE(a.faces.size() == b.faces.size());
    for (std::size_t k = 0; k < a.faces.size(); ++k) {
        CHECK(a.faces[k].cell == b.faces[k].cell);
        CHECK(a.faces[k].neighbor == b.faces[k].neighbor);
        CHECK(a.faces[k].measure == b.faces[k].measure);
        CHECK(a.faces[k].normal == b.faces[k].normal);
    }
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].volume == b.cells[i].volume);
}

TEST_CASE("regular polygon and tetrahedron volumes") {
    const auto gon = ConvexDomain::regular_polygon(Point::Zero(), 1.0, 30);
    CHECK(gon.volume() == doctest::Approx(15.0 * std::sin(2.0 * std::numbers::pi / 30.0)).epsilon(1e-13));
    const auto tet = ConvexDomain::polyhedron({Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0), Point(0, 0, 1)});
    CHECK(tet.volume() == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("face length scale policies") {
    SUBCASE("3D face of area 0.25 under the face measure") {
        const auto domain = ConvexDomain::box(3, Point::Zero(), Point(1, 0.5, 0.5));
        const auto pc = cloud(3, {Point(0.25, 0.25, 0.25), Point(0.75, 0.25, 0.25)});
        const Partition p = build_partition(pc, domain);
        for (const auto& f : p.faces)
            if (f.is_internal()) {
                CHECK(f.measure == doctest::Approx(0.25));
                CHECK(face_length_scale(f, LengthScale::FaceMeasure, 3) == doctest::Approx(0.5));
            }
    }
    SUBCASE("point distance on internal and boundary faces") {
        const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
        const auto pc = cloud(2, {Point(0.35, 0.5, 0), Point(0.65, 0.5, 0)});
        const Partition p = build_partition(pc, domain, LengthScale::PointDistance);
        for (const auto& f : p.faces) {
            if (f.is_internal()) CHECK(f.h_e == doctest::Approx(0.3));
            else if (f.boundary_id == 0) CHECK(f.h_e == doctest::Approx(0.7));  // x = 0 plane, point at 0.35
        }
    }
    SUBCASE("2D segment of length 0.7") {
        const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 0.7, 0));
        const auto pc = cloud(2, {Point(0.25, 0.35, 0), Point(0.75, 0.35, 0)});
        const Partition p = build_partition(pc, domain);
        for (const auto& f : p.faces)
            if (f.is_internal()) CHECK(face_length_scale(f, LengthScale::FaceMeasure, 2) == doctest::Approx(0.7));
    }
}

TEST_CASE("degenerate inputs are rejected") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    CHECK_THROWS_AS(build_partition(cloud(2, {Point(0.5, 0.5, 0), Point(0.5, 0.5, 0)}), domain), DegenerateInput);
    CHECK_THROWS_AS(build_partition(cloud(2, {Point(0.5, 0.5, 0), Point(1.5, 0.5, 0)}), domain), EmptyCell);
    CHECK_THROWS_AS(ConvexDomain::box(2, Point::Zero(), Point(0, 1, 0)), DegenerateInput);
    CHECK_THROWS_AS(ConvexDomain::from_half_spaces(2, {{Point(1, 0, 0), 1.0}, {Point(-1, 0, 0), 0.0}}),
                    DegenerateInput);
}

TEST_CASE("crack between two stacked points") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = cloud(2, {Point(0.5, 0.25, 0), Point(0.5, 0.75, 0)});
    const Partition p = build_partition(pc, domain);
    const Partition cut = apply_crack(p, pc, CrackSpec{{{Point(0.2, 0.5, 0), Point(0.8, 0.5, 0)}}});
    CHECK(cut.adjacency[0].empty());
    CHECK(cut.adjacency[1].empty());
    int crack[2] = {0, 0};
    for (const auto& f : cut.faces) {
        CHECK(!f.is_internal());
        if (f.kind == FaceKind::Crack) {
            ++crack[f.cell];
            CHECK(std::abs(std::abs(f.normal.y()) - 1.0) < 1e-14);
        }
    }
    CHECK(crack[0] == 1);
    CHECK(crack[1] == 1);
    CHECK(total_face_measure(cut) == doctest::Approx(total_face_measure(p)).epsilon(1e-15));
}

TEST_CASE("crack outside the domain leaves the partition unchanged") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    const auto pc = uniform_random(2, 30, 4);
    const Partition p = build_partition(pc, domain);
    const Partition cut = apply_crack(p, pc, CrackSpec{{{Point(2, 2, 0), Point(3, 2, 0)}}});
    CHECK(cut.faces.size() == p.faces.size());
    CHECK(cut.adjacency == p.adjacency);
}

TEST_CASE("midline crack on the 10x10 cell-centred grid") {
    const auto domain = ConvexDomain::box(2, Point::Zero(), Point(100, 100, 0));
    const auto pc = cell_centered_points(2, Point::Zero(), Point(100, 100, 0), 10);
    const Partition p = build_partition(pc, domain);
    const Partition cut = apply_crack(p, pc, CrackSpec{{{Point(25, 50, 0), Point(75, 50, 0)}}});

    // Oracle: vertically adjacent pairs straddling y = 50 whose connecting
    // segment meets the crack segment (endpoints included).
    int expected = 0;
    for (int i = 0; i < 10; ++i) {
        const double x = 5.0 + 10.0 * i;
        if (x >= 25.0 && x <= 75.0) ++expected;
    }
    int crack = 0;
    for (const auto& f : cut.faces) crack += f.kind == FaceKind::Crack;
    CHECK(expected == 6);
    CHECK(crack == 2 * expected);
    CHECK(total_face_measure(cut) == doctest::Approx(total_face_measure(p)).epsilon(1e-15));
    CHECK(total_volume(cut) == total_volume(p));
}

TEST_CASE("locate_cell returns the nearest generator") {
    const auto pc = cloud(2, {Point(0.1, 0.1, 0), Point(0.9, 0.9, 0), Point(0.1, 0.9, 0)});
    CHECK(locate_cell(pc, Point(0.2, 0.8, 0)) == 2);
    CHECK(locate_cell(pc, Point(0.7, 0.6, 0)) == 1);
}
