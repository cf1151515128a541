#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpm/assembly.hpp"
#include "fpm/bench.hpp"
#include "fpm/errors.hpp"

#include <cmath>
#include <set>

using namespace fpm;

namespace {

SpaceTimeField constant(double v) {
    return [v](const Point&, double) { return v; };
}

ProblemSpec neumann_problem(int dim = 2) {
    ProblemSpec p;
    p.dim = dim;
    p.material = MaterialField::isotropic(1, 1, 1);
    p.regions = {{"all", BcKind::Neumann, {}, constant(0.0), {}}};
    return p;
}

PointCloud quadrants() {
    PointCloud pc;
    pc.dim = 2;
    for (const Point& p : {Point(0.25, 0.25, 0), Point(0.75, 0.25, 0), Point(0.25, 0.75, 0), Point(0.75, 0.75, 0)})
        pc.add(p, false);
    return pc;
}

const ConvexDomain kUnitSquare = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));

Eigen::MatrixXd dense(const SparseMatrix& A) { return Eigen::MatrixXd(A); }

// Gauss-Legendre nodes/weights on [0, 1].
const double kGx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
const double kGw[4] = {0.1739274225831124, 0.3260725774168876, 0.3260725774168876, 0.1739274225831124};

// Oracle for the quadrant layout: each cell is the 0.5 x 0.5 square around
// its point; supports are the point plus its horizontal and vertical
// neighbours, and the GFD gradient reduces to forward differences.
struct QuadrantOracle {
    PointCloud pc = quadrants();
    int hn[4] = {1, 0, 3, 2};  // horizontal neighbour
    int vn[4] = {2, 3, 0, 1};  // vertical neighbour

    Eigen::Vector2d grad(int c, const Eigen::Vector4d& u) const {
        const Point& x0 = pc.coords[static_cast<std::size_t>(c)];
        const Point& xh = pc.coords[static_cast<std::size_t>(hn[c])];
        const Point& xv = pc.coords[static_cast<std::size_t>(vn[c])];
        return {(u(hn[c]) - u(c)) / (xh.x() - x0.x()), (u(vn[c]) - u(c)) / (xv.y() - x0.y())};
    }
    double value(int c, const Point& x, const Eigen::Vector4d& u) const {
        return u(c) + grad(c, u).dot((x - pc.coords[static_cast<std::size_t>(c)]).head<2>());
    }
    Eigen::Matrix4d capacity() const {
        Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) {
                    const Point lo = pc.coords[static_cast<std::size_t>(c)] - Point(0.25, 0.25, 0);
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j) {
                            const Point x = lo + 0.5 * Point(kGx[i], kGx[j], 0);
                            C(a, b) += 0.25 * kGw[i] * kGw[j] * value(c, x, Eigen::Vector4d::Unit(a)) *
                                       value(c, x, Eigen::Vector4d::Unit(b));
                        }
                }
        return C;
    }
    // Interior-penalty bilinear form with k = I over the four internal faces.
    double form(const Eigen::Vector4d& v, const Eigen::Vector4d& u, double eta) const {
        double s = 0.0;
        for (int c = 0; c < 4; ++c) s += 0.25 * grad(c, v).dot(grad(c, u));
        struct F {
            int a, b;
            Point from, to, n;
        };
        const F faces[4] = {{0, 1, Point(0.5, 0, 0), Point(0.5, 0.5, 0), Point(1, 0, 0)},
                            {2, 3, Point(0.5, 0.5, 0), Point(0.5, 1, 0), Point(1, 0, 0)},
                            {0, 2, Point(0, 0.5, 0), Point(0.5, 0.5, 0), Point(0, 1, 0)},
                            {1, 3, Point(0.5, 0.5, 0), Point(1, 0.5, 0), Point(0, 1, 0)}};
        for (const auto& f : faces) {
            const Eigen::Vector2d n = f.n.head<2>();
            for (int q = 0; q < 4; ++q) {
                const Point x = f.from + kGx[q] * (f.to - f.from);
                const double w = 0.5 * kGw[q];
                const double ju = value(f.a, x, u) - value(f.b, x, u);
                const double jv = value(f.a, x, v) - value(f.b, x, v);
                const double au = 0.5 * (grad(f.a, u) + grad(f.b, u)).dot(n);
                const double av = 0.5 * (grad(f.a, v) + grad(f.b, v)).dot(n);
                s += w * (-av * ju - au * jv + eta / 0.5 * ju * jv);
            }
        }
        return s;
    }
};

}  // namespace

TEST_CASE("single cell capacity") {
    PointCloud pc;
    pc.dim = 2;
    pc.add(Point(0.3, 0.6, 0), false);
    const auto disc = discretize(pc, kUnitSquare, neumann_problem());
    const auto C = dense(assemble_capacity(disc, MaterialField::isotropic(1, 1, 1)));
    REQUIRE(C.rows() == 1);
    CHECK(C(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadrant capacity and conductivity match the dense oracle") {
    const QuadrantOracle oracle;
    const auto problem = neumann_problem();
    const auto disc = discretize(oracle.pc, kUnitSquare, problem);
    const Eigen::MatrixXd C = dense(assemble_capacity(disc, problem.material));
    CHECK((C - oracle.capacity()).cwiseAbs().maxCoeff() < 1e-10);

    AssemblyOptions opts;
    opts.eta1 = 1.0;
    const Eigen::MatrixXd K = dense(assemble_conductivity(disc, problem, opts));
    Eigen::Matrix4d Ko;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) Ko(a, b) = oracle.form(Eigen::Vector4d::Unit(a), Eigen::Vector4d::Unit(b), 1.0);
    CHECK((K - Ko).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("capacity conserves the integral of rho c") {
    const auto pc = random_points(kUnitSquare, 80, 8, 21);
    MaterialField m = MaterialField::isotropic(1, 1, 1);
    m.c = [](const Point& x) { return 1.0 + x.x() + x.y() * x.y(); };
    const auto disc = discretize(pc, kUnitSquare, neumann_problem());
    const SparseMatrix C = assemble_capacity(disc, m);
    CHECK(C.sum() == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0).epsilon(1e-12));
    const auto C1 = assemble_capacity(disc, MaterialField::isotropic(1, 1, 1));
    CHECK(C1.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("3x3 patch test with strong Dirichlet data") {
    const auto pc = grid_points(2, Point::Zero(), Point(1, 1, 0), 3);
    ProblemSpec p;
    p.dim = 2;
    p.material = MaterialField::isotropic(1, 1, 1);
    p.regions = {{"all", BcKind::Dirichlet, {}, [](const Point& x, double) { return x.x(); }, {}}};
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    opts.eta1 = 1.0;
    const auto sys = assemble_system(disc, p, opts);
    const StrongDirichletView view(sys);
    CHECK(view.n_free() == 1);
    const Vector u = solve_steady(sys);
    CHECK(std::abs(u(4) - 0.5) <= 1e-10);
}

TEST_CASE("load vector examples") {
    PointCloud pc;
    pc.dim = 2;
    pc.add(Point(0.5, 0.5, 0), false);
    AssemblyOptions opts;

    SUBCASE("zero data gives zero load") {
        const auto p = neumann_problem();
        const auto disc = discretize(pc, kUnitSquare, p);
        CHECK(assemble_load(disc, p, opts, 0.0).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("unit Neumann flux on one face") {
        ProblemSpec p = neumann_problem();
        p.regions.insert(p.regions.begin(), {"right", BcKind::Neumann, plane_selector(0, 1.0), constant(1.0), {}});
        const auto disc = discretize(pc, kUnitSquare, p);
        CHECK(assemble_load(disc, p, opts, 0.0)(0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("robin face") {
        ProblemSpec p = neumann_problem();
        p.regions.insert(p.regions.begin(), {"right", BcKind::Robin, plane_selector(0, 1.0), constant(3.0),
                                             [](const Point&) { return 2.0; }});
        const auto disc = discretize(pc, kUnitSquare, p);
        CHECK(assemble_load(disc, p, opts, 0.0)(0) == doctest::Approx(6.0).epsilon(1e-14));
        CHECK(dense(assemble_conductivity(disc, p, opts))(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("strong Dirichlet views") {
    ProblemSpec p;
    p.dim = 2;
    p.material = MaterialField::isotropic(1, 1, 1);
    p.regions = {{"all", BcKind::Dirichlet, {}, [](const Point& x, double) { return 1.0 + x.x() * x.y(); }, {}}};
    AssemblyOptions opts;
    opts.eta2 = 10.0;

    SUBCASE("all points constrained") {
        const auto pc = grid_points(2, Point::Zero(), Point(1, 1, 0), 2);
        const auto disc = discretize(pc, kUnitSquare, p);
        const auto sys = assemble_system(disc, p, opts);
        const StrongDirichletView view(sys);
        CHECK(view.n_free() == 0);
        const Vector u = solve_steady(sys);
        for (std::size_t i = 0; i < pc.size(); ++i)
            CHECK(u(static_cast<Eigen::Index>(i)) == 1.0 + pc.coords[i].x() * pc.coords[i].y());
    }
    SUBCASE("no points constrained") {
        p.dirichlet_mode = DirichletMode::Penalty;
        const auto pc = cell_centered_points(2, Point::Zero(), Point(1, 1, 0), 3);
        const auto disc = discretize(pc, kUnitSquare, p);
        const auto sys = assemble_system(disc, p, opts);
        const StrongDirichletView view(sys);
        CHECK(view.n_free() == pc.size());
        CHECK(view.constrained().empty());
        CHECK((dense(view.Kff()) - dense(sys.K)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("penalty validation") {
    const auto pc = cell_centered_points(2, Point::Zero(), Point(1, 1, 0), 3);
    ProblemSpec p;
    p.dim = 2;
    p.material = MaterialField::isotropic(1, 1, 1);
    p.regions = {{"all", BcKind::Dirichlet, {}, constant(0.0), {}}};
    p.dirichlet_mode = DirichletMode::Penalty;
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    opts.eta1 = 0.0;
    opts.eta2 = 1.0;
    CHECK_THROWS_AS(assemble_system(disc, p, opts), InvalidPenalty);
    opts.eta1 = -1.0;
    CHECK_THROWS_AS(assemble_system(disc, p, opts), InvalidPenalty);
    opts.eta1 = 1.0;
    opts.eta2 = 0.0;
    CHECK_THROWS_AS(assemble_system(disc, p, opts), InvalidPenalty);
}

TEST_CASE("zero conductivity leaves only the penalty on jumps") {
    const auto pc = random_points(kUnitSquare, 40, 4, 8);
    ProblemSpec p = neumann_problem();
    p.material = MaterialField::constant(1, 1, Eigen::Matrix3d::Zero());
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    opts.eta1 = 1.0;
    const SparseMatrix K = assemble_conductivity(disc, p, opts);
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(pc.size()));
    CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((dense(K) - dense(K).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact symmetry and flux consistency for linear fields") {
    Eigen::Matrix3d k;
    k << 2.0, 0.5, 0, 0.5, 1.5, 0, 0, 0, 1;
    const Eigen::Vector2d grad(2.0, -3.0);
    const auto exact = [grad](const Point& x) { return 1.0 + grad.dot(x.head<2>()); };
    const Eigen::Vector2d flux = k.topLeftCorner<2, 2>() * grad;
    const double h = 2.0;

    ProblemSpec p;
    p.dim = 2;
    p.material = MaterialField::constant(1, 1, k);
    p.dirichlet_mode = DirichletMode::Penalty;
    p.regions = {
        {"left", BcKind::Dirichlet, plane_selector(0, 0.0), [=](const Point& x, double) { return exact(x); }, {}},
        {"bottom", BcKind::Dirichlet, plane_selector(1, 0.0), [=](const Point& x, double) { return exact(x); }, {}},
        {"right", BcKind::Neumann, plane_selector(0, 1.0), constant(flux.x()), {}},
        {"top", BcKind::Robin, plane_selector(1, 1.0), [=](const Point& x, double) { return exact(x) + flux.y() / h; },
         [=](const Point&) { return h; }}};
    const auto pc = random_points(kUnitSquare, 120, 0, 5);
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    opts.eta1 = 3.0;
    opts.eta2 = 30.0;
    const auto sys = assemble_system(disc, p, opts);
    CHECK(sys.k_symmetric);
    CHECK((dense(sys.K) - dense(sys.K).transpose()).cwiseAbs().maxCoeff() == 0.0);

    Vector u(static_cast<Eigen::Index>(pc.size()));
    for (std::size_t i = 0; i < pc.size(); ++i) u(static_cast<Eigen::Index>(i)) = exact(pc.coords[i]);
    const Vector r = sys.K * u - sys.q(0.0);
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-10 * sys.q(0.0).cwiseAbs().maxCoeff());
}

TEST_CASE("joint scaling of k and penalties") {
    const auto pc = random_points(kUnitSquare, 60, 0, 17);
    ProblemSpec p;
    p.dim = 2;
    p.material = MaterialField::isotropic(1, 1, 1.0);
    p.dirichlet_mode = DirichletMode::Penalty;
    p.regions = {{"all", BcKind::Dirichlet, {}, [](const Point& x, double) { return std::sin(3 * x.x()) + x.y(); }, {}}};
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    opts.eta1 = 2.0;
    opts.eta2 = 20.0;
    const auto base = assemble_system(disc, p, opts);

    const double s = 7.5;
    ProblemSpec ps = p;
    ps.material = MaterialField::isotropic(1, 1, s);
    AssemblyOptions os = opts;
    os.eta1 *= s;
    os.eta2 *= s;
    const auto scaled = assemble_system(disc, ps, os);
    const double kmax = dense(base.K).cwiseAbs().maxCoeff();
    CHECK((dense(scaled.K) - s * dense(base.K)).cwiseAbs().maxCoeff() <= 1e-13 * s * kmax);
    CHECK((scaled.q(0.0) - s * base.q(0.0)).cwiseAbs().maxCoeff() <= 1e-13 * s * base.q(0.0).cwiseAbs().maxCoeff());
    const Vector u0 = solve_steady(base);
    const Vector u1 = solve_steady(scaled);
    CHECK((u0 - u1).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("conductivity sparsity follows supports and face pairs") {
    const auto pc = random_points(kUnitSquare, 70, 0, 2);
    const auto p = neumann_problem();
    const auto disc = discretize(pc, kUnitSquare, p);
    AssemblyOptions opts;
    const SparseMatrix K = assemble_conductivity(disc, p, opts);
    const std::size_t n = pc.size();
    std::vector<std::set<int>> allowed(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::set<int> reach(disc.ops[c].support.begin(), disc.ops[c].support.end());
        for (int nb : disc.partition.adjacency[c])
            reach.insert(disc.ops[static_cast<std::size_t>(nb)].support.begin(),
                         disc.ops[static_cast<std::size_t>(nb)].support.end());
        for (int i : disc.ops[c].support) allowed[static_cast<std::size_t>(i)].insert(reach.begin(), reach.end());
    }
    bool ok = true;
    for (Eigen::Index c = 0; c < K.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(K, c); it; ++it)
            if (!allowed[static_cast<std::size_t>(it.row())].count(static_cast<int>(it.col()))) ok = false;
    CHECK(ok);
}
