#include "fpm/bench.hpp"

#include "fpm/errors.hpp"
#include "fpm/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace fpm {

// ---------------------------------------------------------------------------
// Error norms

namespace {

template <class Integrand>
double integrate_cells(const Discretization& disc, Integrand&& f) {
    std::vector<double> part(disc.size(), 0.0);
    parallel_for(disc.size(), [&](std::size_t i) {
        const auto& rule = disc.cell_rules[i];
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(static_cast<int>(i), rule.points[q]);
        part[i] = s;
    });
    return std::accumulate(part.begin(), part.end(), 0.0);
}

}  // namespace

double l2_error(const Discretization& disc, const Vector& u, const SpaceTimeField& exact, double t) {
    const double s = integrate_cells(disc, [&](int cell, const Point& x) {
        const auto& op = disc.ops[static_cast<std::size_t>(cell)];
        const double uh = shape_row(x, cell, op, disc.points).dot(disc.gather(cell, u));
        const double e = uh - exact(x, t);
        return e * e;
    });
    return std::sqrt(s);
}

double l2_gradient_error(const Discretization& disc, const Vector& u, const GradientField& exact, double t) {
    const int d = disc.dim();
    std::vector<Eigen::VectorXd> grads(disc.size());
    for (std::size_t i = 0; i < disc.size(); ++i) grads[i] = disc.ops[i].B * disc.gather(static_cast<int>(i), u);
    const double s = integrate_cells(disc, [&](int cell, const Point& x) {
        return (grads[static_cast<std::size_t>(cell)] - exact(x, t).head(d)).squaredNorm();
    });
    return std::sqrt(s);
}

double l2_norm(const Discretization& disc, const SpaceTimeField& exact, double t) {
    const double s = integrate_cells(disc, [&](int, const Point& x) {
        const double v = exact(x, t);
        return v * v;
    });
    if (!(s > 0.0)) throw ZeroNormReference("reference temperature has zero L2 norm");
    return std::sqrt(s);
}

double l2_gradient_norm(const Discretization& disc, const GradientField& exact, double t) {
    const int d = disc.dim();
    const double s = integrate_cells(disc, [&](int, const Point& x) { return exact(x, t).head(d).squaredNorm(); });
    if (!(s > 0.0)) throw ZeroNormReference("reference gradient has zero L2 norm");
    return std::sqrt(s);
}

double relative_l2_error(const Discretization& disc, const Vector& u, const SpaceTimeField& exact, double t) {
    return l2_error(disc, u, exact, t) / l2_norm(disc, exact, t);
}

ErrorNorms error_norms(const Discretization& disc, const Vector& u, const ExactSolution& exact, double t) {
    if (!exact.gradient) throw ZeroNormReference("no reference gradient available for r1");
    ErrorNorms e;
    e.r0 = l2_error(disc, u, exact.value, t) / l2_norm(disc, exact.value, t);
    e.r1 = l2_gradient_error(disc, u, exact.gradient, t) / l2_gradient_norm(disc, exact.gradient, t);
    return e;
}

// ---------------------------------------------------------------------------
// Reference solutions

namespace {

// Solves a tridiagonal system in place (Thomas algorithm).
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c, std::vector<double>& d) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace

FiniteDifference1D::FiniteDifference1D(std::function<double(double)> capacity,
                                       std::function<double(double)> conductivity, double L, double u0, double uL,
                                       const std::vector<double>& times, int nodes, double dt)
    : L_(L) {
    if (nodes < 3) throw InvalidProblem("finite difference reference needs at least 3 nodes");
    const auto n = static_cast<std::size_t>(nodes);
    const double h = L / (nodes - 1);
    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) y_[i] = L * static_cast<double>(i) / (nodes - 1);
    std::vector<double> cap(n), kw(n), ke(n);
    for (std::size_t i = 0; i < n; ++i) {
        cap[i] = capacity(y_[i]);
        kw[i] = i > 0 ? conductivity(y_[i] - 0.5 * h) / (h * h) : 0.0;
        ke[i] = i + 1 < n ? conductivity(y_[i] + 0.5 * h) / (h * h) : 0.0;
    }
    std::vector<double> u(n, u0);
    u[n - 1] = uL;

    // theta-step of length tau: cap (u' - u)/tau = theta A u' + (1 - theta) A u.
    auto step = [&](double tau, double theta) {
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n);
        d[0] = u0;
        d[n - 1] = uL;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double Au = kw[i] * (u[i - 1] - u[i]) + ke[i] * (u[i + 1] - u[i]);
            a[i] = -theta * tau * kw[i];
            c[i] = -theta * tau * ke[i];
            b[i] = cap[i] + theta * tau * (kw[i] + ke[i]);
            d[i] = cap[i] * u[i] + (1.0 - theta) * tau * Au;
        }
        thomas(a, b, c, d);
        u = std::move(d);
    };

    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    long done = 0;
    bool started = false;
    for (double t : sorted) {
        const long target = std::lround(t / dt);
        while (done < target) {
            if (!started) {
                // Two backward Euler half steps damp the initial jump.
                for (int k = 0; k < 2; ++k) step(0.5 * dt, 1.0);
                started = true;
            } else {
                step(dt, 0.5);
            }
            ++done;
        }
        times_.push_back(t);
        states_.push_back(u);
    }
}

const std::vector<double>& FiniteDifference1D::snapshot(double t) const {
    for (std::size_t k = 0; k < times_.size(); ++k)
        if (std::abs(times_[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return states_[k];
    std::ostringstream msg;
    msg << "finite difference reference has no snapshot at t = " << t;
    throw InvalidProblem(msg.str());
}

double FiniteDifference1D::value(double y, double t) const {
    const auto& u = snapshot(t);
    const double s = std::clamp(y / L_, 0.0, 1.0) * static_cast<double>(y_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(s), y_.size() - 2);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * u[i] + w * u[i + 1];
}

double FiniteDifference1D::derivative(double y, double t) const {
    const auto& u = snapshot(t);
    const double h = y_[1] - y_[0];
    const double s = std::clamp(y / L_, 0.0, 1.0) * static_cast<double>(y_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(s), y_.size() - 2);
    // Second-order nodal slopes, interpolated linearly.
    const auto slope = [&](std::size_t j) {
        const std::size_t n = u.size();
        if (j == 0) return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        if (j == n - 1) return (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        return (u[j + 1] - u[j - 1]) / (2.0 * h);
    };
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * slope(i) + w * slope(i + 1);
}

double exponential_steady_profile(double y, double L, double delta, double u0, double uL) {
    if (delta == 0.0) return u0 + (uL - u0) * y / L;
    return u0 + (uL - u0) * (1.0 - std::exp(-delta * y / L)) / (1.0 - std::exp(-delta));
}

double slab_step_series(double z, double t, double L, double diffusivity, int terms) {
    double s = z / L;
    for (int n = 1; n <= terms; ++n) {
        const double a = n * std::numbers::pi;
        s += (2.0 / a) * (n % 2 == 0 ? 1.0 : -1.0) * std::sin(a * z / L) * std::exp(-a * a * diffusivity * t / (L * L));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Structural checks

StructureCheck check_structure(const Discretization& disc, const SemiDiscreteSystem& system,
                               const MaterialField& material) {
    StructureCheck s;
    s.k_symmetry_expected = system.k_symmetric;
    const SparseMatrix Kt = system.K.transpose();
    const SparseMatrix diff = system.K - Kt;
    s.k_symmetric = true;
    for (Eigen::Index c = 0; c < diff.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(diff, c); it; ++it)
            if (it.value() != 0.0) s.k_symmetric = false;
    Eigen::SimplicialLLT<SparseMatrix> llt(system.C);
    s.c_positive_definite = llt.info() == Eigen::Success;
    const double total = system.C.sum();
    const double exact = integrate_cells(disc, [&](int, const Point& x) { return material.rho_c(x); });
    s.capacity_error = std::abs(total - exact) / exact;
    return s;
}

// ---------------------------------------------------------------------------
// Point layouts

PointCloud grid_points(int dim, const Point& lower, const Point& upper, int n) {
    PointCloud pc;
    pc.dim = dim;
    const int nz = dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int idx[3] = {i, j, k};
                Point p = Point::Zero();
                bool on_boundary = false;
                for (int a = 0; a < dim; ++a) {
                    p[a] = lower[a] + (upper[a] - lower[a]) * idx[a] / (n - 1);
                    on_boundary = on_boundary || idx[a] == 0 || idx[a] == n - 1;
                }
                pc.add(p, on_boundary);
            }
    return pc;
}

PointCloud cell_centered_points(int dim, const Point& lower, const Point& upper, int n) {
    PointCloud pc;
    pc.dim = dim;
    const int nz = dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int idx[3] = {i, j, k};
                Point p = Point::Zero();
                for (int a = 0; a < dim; ++a) p[a] = lower[a] + (upper[a] - lower[a]) * (idx[a] + 0.5) / n;
                pc.add(p, false);
            }
    return pc;
}

PointCloud disk_points(int boundary, int total, double radius) {
    PointCloud pc;
    pc.dim = 2;
    for (int k = 0; k < boundary; ++k) {
        const double a = 2.0 * std::numbers::pi * k / boundary;
        pc.add(Point(radius * std::cos(a), radius * std::sin(a), 0.0), true);
    }
    const int interior = total - boundary;
    // Concentric rings at radii k / (R + 1/2) with about 2 pi k points each.
    int rings = 0;
    int count = 1;
    while (count < interior) {
        ++rings;
        count += static_cast<int>(std::lround(2.0 * std::numbers::pi * rings));
    }
    std::vector<int> per_ring(static_cast<std::size_t>(rings) + 1, 0);
    for (int k = 1; k <= rings; ++k) per_ring[static_cast<std::size_t>(k)] = static_cast<int>(std::lround(2.0 * std::numbers::pi * k));
    for (int excess = count - interior, k = rings; excess > 0; --excess, k = k > 1 ? k - 1 : rings)
        --per_ring[static_cast<std::size_t>(k)];
    if (interior >= 1) pc.add(Point::Zero(), false);
    for (int k = 1; k <= rings; ++k) {
        const int nk = per_ring[static_cast<std::size_t>(k)];
        const double r = radius * k / (rings + 0.5);
        const double phase = k % 2 == 1 ? std::numbers::pi / nk : 0.0;
        for (int j = 0; j < nk; ++j) {
            const double a = phase + 2.0 * std::numbers::pi * j / nk;
            pc.add(Point(r * std::cos(a), r * std::sin(a), 0.0), false);
        }
    }
    return pc;
}

PointCloud random_points(const ConvexDomain& domain, int total, int boundary, std::uint64_t seed) {
    if (total < 1 || boundary < 0 || boundary > total) throw DegenerateInput("invalid random point counts");
    const int dim = domain.dim();
    Point lo = Point::Zero(), hi = Point::Zero();
    for (int a = 0; a < dim; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
        for (const auto& v : domain.vertices()) {
            lo[a] = std::min(lo[a], v[a]);
            hi[a] = std::max(hi[a], v[a]);
        }
    }
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto sample = [&] {
        Point p = Point::Zero();
        for (int a = 0; a < dim; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * unit(gen);
        return p;
    };
    const double tol = 1e-9 * domain.diameter();
    const auto& hs = domain.half_spaces();
    const auto draw = [&] {
        PointCloud pc;
        pc.dim = dim;
        for (std::size_t k = 0; k < domain.vertices().size() && pc.size() < static_cast<std::size_t>(boundary); ++k)
            pc.add(domain.vertices()[k], true);
        std::uniform_int_distribution<std::size_t> pick(0, hs.size() - 1);
        while (pc.size() < static_cast<std::size_t>(boundary)) {
            const auto& h = hs[pick(gen)];
            Point p = sample();
            p -= (h.normal.dot(p) - h.offset) * h.normal;
            if (domain.contains(p, 1e-12)) pc.add(p, true);
        }
        while (pc.size() < static_cast<std::size_t>(total)) {
            const Point p = sample();
            const bool inside = std::all_of(hs.begin(), hs.end(), [&](const HalfSpace& h) {
                return h.normal.dot(p) - h.offset < -tol;
            });
            if (inside) pc.add(p, false);
        }
        return pc;
    };
    // Redraw until every cell has enough Voronoi neighbours for a gradient.
    for (int attempt = 0; attempt < 200; ++attempt) {
        PointCloud pc = draw();
        if (total <= dim) return pc;
        try {
            const Partition part = build_partition(pc, domain);
            build_operators(part, pc, false);
            return pc;
        } catch (const Error&) {
        }
    }
    throw DegenerateInput("no admissible random layout found after 200 draws");
}

// ---------------------------------------------------------------------------
// Case registry

namespace {

BoundaryRegion region(std::string name, BcKind kind, FaceSelector sel, SpaceTimeField value, ScalarField h = {}) {
    return {std::move(name), kind, std::move(sel), std::move(value), std::move(h)};
}

SpaceTimeField constant_field(double v) {
    return [v](const Point&, double) { return v; };
}

Eigen::Matrix3d tensor(double k11, double k22, double k33, double k12, double k13, double k23) {
    Eigen::Matrix3d k;
    k << k11, k12, k13, k12, k22, k23, k13, k23, k33;
    return k;
}

// Largest spread of nodal values over points sharing a y coordinate, relative
// to the global temperature range.
double x_variation(const PointCloud& points, const Vector& u) {
    std::map<long, std::pair<double, double>> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const long key = std::lround(points.coords[i].y() * 1e9);
        auto [it, inserted] = rows.try_emplace(key, u(static_cast<Eigen::Index>(i)), u(static_cast<Eigen::Index>(i)));
        if (!inserted) {
            it->second.first = std::min(it->second.first, u(static_cast<Eigen::Index>(i)));
            it->second.second = std::max(it->second.second, u(static_cast<Eigen::Index>(i)));
        }
    }
    double spread = 0.0;
    for (const auto& [k, mm] : rows) spread = std::max(spread, mm.second - mm.first);
    const double range = u.maxCoeff() - u.minCoeff();
    return range > 0.0 ? spread / range : 0.0;
}

std::vector<double> interval_ends(double dt, double T) {
    std::vector<double> out;
    const long n = std::lround(T / dt);
    for (long k = 1; k <= n; ++k) out.push_back(k == n ? T : static_cast<double>(k) * dt);
    return out;
}

void apply_overrides(BenchmarkCase& bc, const CaseOverrides& ov) {
    if (ov.eta1) bc.assembly.eta1 = *ov.eta1;
    if (ov.eta2) bc.assembly.eta2 = *ov.eta2;
    if (ov.dt) bc.dt = *ov.dt;
    if (ov.T) bc.T = *ov.T;
    if (auto* cfg = std::get_if<LvimConfig>(&bc.scheme)) {
        if (ov.M) cfg->M = *ov.M;
        if (ov.tol) cfg->tol = *ov.tol;
    }
}

LvimConfig lvim(int M, double tol) {
    LvimConfig c;
    c.M = M;
    c.tol = tol;
    return c;
}

BenchmarkCase ex1_1() {
    BenchmarkCase bc;
    bc.id = "Ex1_1";
    bc.title = "disk, postulated transient solution, strong Dirichlet";
    bc.domain = ConvexDomain::regular_polygon(Point::Zero(), 1.0, 30);
    bc.points = disk_points(30, 601, 1.0);
    const SpaceTimeField u = [](const Point& x, double t) {
        const double s = x.x() + x.y();
        return std::exp(s) * std::cos(s + 4.0 * t);
    };
    const GradientField g = [](const Point& x, double t) {
        const double s = x.x() + x.y();
        const double v = std::exp(s) * (std::cos(s + 4.0 * t) - std::sin(s + 4.0 * t));
        return Point(v, v, 0.0);
    };
    bc.problem.dim = 2;
    bc.problem.material = MaterialField::isotropic(1.0, 1.0, 1.0);
    bc.problem.regions = {region("circumference", BcKind::Dirichlet, {}, u)};
    bc.problem.initial = [u](const Point& x) { return u(x, 0.0); };
    bc.problem.dirichlet_mode = DirichletMode::Strong;
    bc.assembly.eta1 = 2.0;
    bc.assembly.eta2 = 20.0;
    bc.scheme = lvim(5, 1e-8);
    bc.dt = 0.4;
    bc.T = 0.8;
    bc.exact = ExactSolution{u, g};
    return bc;
}

BenchmarkCase ex1_2() {
    BenchmarkCase bc;
    bc.id = "Ex1_2";
    bc.title = "unit square, Neumann on x = 1, Dirichlet elsewhere";
    bc.domain = ConvexDomain::box(2, Point::Zero(), Point(1, 1, 0));
    bc.points = grid_points(2, Point::Zero(), Point(1, 1, 0), 12);
    const double pi = std::numbers::pi;
    const SpaceTimeField u = [pi](const Point& x, double t) {
        return std::sqrt(2.0) * std::exp(-pi * pi * t / 4.0) *
               (std::cos(pi * x.x() / 2.0 - pi / 4.0) + std::cos(pi * x.y() / 2.0 - pi / 4.0));
    };
    const GradientField g = [pi](const Point& x, double t) {
        const double a = -std::sqrt(2.0) * std::exp(-pi * pi * t / 4.0) * pi / 2.0;
        return Point(a * std::sin(pi * x.x() / 2.0 - pi / 4.0), a * std::sin(pi * x.y() / 2.0 - pi / 4.0), 0.0);
    };
    const SpaceTimeField flux = [g](const Point& x, double t) { return g(x, t).x(); };
    bc.problem.dim = 2;
    bc.problem.material = MaterialField::isotropic(1.0, 1.0, 1.0);
    bc.problem.regions = {region("right", BcKind::Neumann, plane_selector(0, 1.0), flux),
                          region("others", BcKind::Dirichlet, {}, u)};
    bc.problem.initial = [u](const Point& x) { return u(x, 0.0); };
    bc.assembly.eta1 = 2.0;
    bc.scheme = lvim(5, 1e-8);
    bc.dt = 0.5;
    bc.T = 1.0;
    bc.exact = ExactSolution{u, g};
    return bc;
}

struct FgmVariant {
    Gradation kind;
    double delta;
    double u0;
    double uL;
    bool anisotropic;
    bool neumann_sides;
};

BenchmarkCase fgm_square(const std::string& id, const std::string& title, const FgmVariant& v, int n) {
    BenchmarkCase bc;
    bc.id = id;
    bc.title = title;
    const double L = 1.0;
    bc.domain = ConvexDomain::box(2, Point::Zero(), Point(L, L, 0));
    bc.points = grid_points(2, Point::Zero(), Point(L, L, 0), n);
    const Eigen::Matrix3d k_hat = v.anisotropic ? tensor(2, 2, 1, 1, 0, 0) : Eigen::Matrix3d::Identity();
    bc.problem.dim = 2;
    bc.problem.material = graded_material(v.kind, v.delta, L, k_hat);
    bc.problem.regions = {region("bottom", BcKind::Dirichlet, plane_selector(1, 0.0), constant_field(v.u0)),
                          region("top", BcKind::Dirichlet, plane_selector(1, L), constant_field(v.uL)),
                          region("sides", v.neumann_sides ? BcKind::Neumann : BcKind::Symmetric, {},
                                 constant_field(0.0))};
    const double u0 = v.u0;
    bc.problem.initial = [u0](const Point&) { return u0; };
    bc.assembly.eta1 = 10.0;
    bc.scheme = lvim(5, 1e-8);
    bc.dt = 0.1;
    bc.T = 0.8;
    bc.error_times = interval_ends(bc.dt, bc.T);
    const auto f = gradation_profile(v.kind, v.delta, L);
    const double k22 = k_hat(1, 1);
    auto fd = std::make_shared<FiniteDifference1D>([f](double y) { return f(y); },
                                                   [f, k22](double y) { return k22 * f(y); }, L, v.u0, v.uL,
                                                   bc.error_times);
    const SpaceTimeField value = [fd](const Point& x, double t) { return fd->value(x.y(), t); };
    const GradientField grad = [fd](const Point& x, double t) { return Point(0.0, fd->derivative(x.y(), t), 0.0); };
    bc.exact = ExactSolution{value, grad};
    bc.probe = [](const Discretization& disc, const Trajectory& traj, std::map<std::string, double>& m) {
        double worst = 0.0;
        for (std::size_t k = 1; k < traj.states.size(); ++k)
            if (traj.interval_end[k]) worst = std::max(worst, x_variation(disc.points, traj.states[k]));
        m["x_variation"] = worst;
    };
    return bc;
}

BenchmarkCase ex1_7() {
    BenchmarkCase bc;
    bc.id = "Ex1_7";
    bc.title = "bimaterial square with adiabatic crack, steady";
    bc.domain = ConvexDomain::box(2, Point::Zero(), Point(100, 100, 0));
    bc.points = cell_centered_points(2, Point::Zero(), Point(100, 100, 0), 10);
    bc.problem.dim = 2;
    MaterialField m = MaterialField::isotropic(1.0, 1.0, 1.0);
    m.k = [](const Point& x) -> Eigen::Matrix3d { return (x.y() > 50.0 ? 2.0 : 1.0) * Eigen::Matrix3d::Identity(); };
    bc.problem.material = m;
    bc.problem.regions = {region("top", BcKind::Dirichlet, plane_selector(1, 100.0), constant_field(100.0)),
                          region("others", BcKind::Dirichlet, {}, constant_field(0.0))};
    bc.problem.dirichlet_mode = DirichletMode::Penalty;
    bc.problem.crack = CrackSpec{{{Point(25, 50, 0), Point(75, 50, 0)}}};
    bc.assembly.eta1 = 10.0;
    bc.assembly.eta2 = 40.0;
    bc.scheme = BackwardEuler{};
    bc.probe = [](const Discretization& disc, const Trajectory& traj, std::map<std::string, double>& metrics) {
        const Vector& u = traj.states.back();
        int crack_faces = 0;
        for (const auto& f : disc.partition.faces) crack_faces += f.kind == FaceKind::Crack;
        metrics["crack_faces"] = crack_faces;
        const auto at = [&](double x, double y) { return u(locate_cell(disc.points, Point(x, y, 0))); };
        metrics["midpoint_jump"] = 0.5 * (at(45, 55) - at(45, 45) + at(55, 55) - at(55, 45));
        // Columns clear of the crack: temperature must not decrease with y.
        int violations = 0;
        for (double x = 5.0; x < 100.0; x += 10.0) {
            if (x > 25.0 && x < 75.0) continue;
            for (double y = 5.0; y + 10.0 < 100.0; y += 10.0)
                violations += at(x, y + 10.0) < at(x, y) - 1e-12;
        }
        metrics["monotonicity_violations"] = violations;
    };
    return bc;
}

BenchmarkCase ex2_1() {
    BenchmarkCase bc;
    bc.id = "Ex2_1";
    bc.title = "anisotropic cube, postulated steady solution";
    const double L = 1.0;
    bc.domain = ConvexDomain::box(3, Point::Zero(), Point(L, L, L));
    bc.points = grid_points(3, Point::Zero(), Point(L, L, L), 10);
    const SpaceTimeField u = [](const Point& x, double) {
        return x.y() * x.y() + x.y() - 5.0 * x.y() * x.z() + x.x() * x.z();
    };
    const GradientField g = [](const Point& x, double) {
        return Point(x.z(), 2.0 * x.y() + 1.0 - 5.0 * x.z(), -5.0 * x.y() + x.x());
    };
    bc.problem.dim = 3;
    bc.problem.material = MaterialField::constant(1.0, 1.0, tensor(1e-4, 1e-4, 1e-4, 0, 0, 0.2e-4));
    bc.problem.regions = {region("all", BcKind::Dirichlet, {}, u)};
    bc.assembly.eta1 = 5e-4;
    bc.scheme = BackwardEuler{};
    bc.exact = ExactSolution{u, g};
    return bc;
}

// Cube of side 10 heated by a unit step on z = L, held at 0 on z = 0.
BenchmarkCase step_cube(const std::string& id, const std::string& title, const TensorField& k, bool symmetric_x,
                        int n) {
    BenchmarkCase bc;
    bc.id = id;
    bc.title = title;
    const double L = 10.0;
    bc.domain = ConvexDomain::box(3, Point::Zero(), Point(L, L, L));
    bc.points = cell_centered_points(3, Point::Zero(), Point(L, L, L), n);
    bc.problem.dim = 3;
    MaterialField m = MaterialField::isotropic(1.0, 1.0, 1.0);
    m.k = k;
    bc.problem.material = m;
    bc.problem.regions = {
        region("top", BcKind::Dirichlet, plane_selector(2, L), [](const Point&, double t) { return heaviside(t); }),
        region("bottom", BcKind::Dirichlet, plane_selector(2, 0.0), constant_field(0.0))};
    if (symmetric_x) {
        bc.problem.regions.push_back(region("x0", BcKind::Symmetric, plane_selector(0, 0.0), {}));
        bc.problem.regions.push_back(region("xL", BcKind::Symmetric, plane_selector(0, L), {}));
    }
    bc.problem.regions.push_back(region("lateral", BcKind::Neumann, {}, constant_field(0.0)));
    bc.problem.dirichlet_mode = DirichletMode::Penalty;
    bc.problem.initial = [](const Point&) { return 0.0; };
    bc.probe = [L](const Discretization& disc, const Trajectory& traj, std::map<std::string, double>& metrics) {
        const Vector& u = traj.states.back();
        for (double frac : {0.2, 0.5, 0.8}) {
            const int c = locate_cell(disc.points, Point(0.5 * L, 0.5 * L, frac * L));
            std::ostringstream key;
            key << "u_center_z" << frac;
            metrics[key.str()] = u(c);
        }
    };
    return bc;
}

BenchmarkCase ex2_7() {
    BenchmarkCase bc;
    bc.id = "Ex2_7";
    bc.title = "cube with convective top surface";
    const double L = 10.0;
    bc.domain = ConvexDomain::box(3, Point::Zero(), Point(L, L, L));
    bc.points = grid_points(3, Point::Zero(), Point(L, L, L), 10);
    bc.problem.dim = 3;
    bc.problem.material = MaterialField::isotropic(1.0, 1.0, 1.0);
    const double h = 1.0;
    bc.problem.regions = {
        region("top", BcKind::Robin, plane_selector(2, L), [](const Point&, double t) { return heaviside(t); },
               [h](const Point&) { return h; }),
        region("others", BcKind::Neumann, {}, constant_field(0.0))};
    bc.problem.initial = [](const Point&) { return 0.0; };
    bc.assembly.eta1 = 1.0;
    bc.scheme = lvim(5, 1e-8);
    bc.dt = 5.0;
    bc.T = 50.0;
    bc.error_times = interval_ends(bc.dt, bc.T);
    const double m = h * L / 1.0;
    auto roots = std::make_shared<std::vector<double>>(robin_roots(m, 50));
    const SpaceTimeField value = [=](const Point& x, double t) {
        return robin_series_solution(x.z(), t, L, m, 1.0, 1.0, *roots);
    };
    bc.exact = ExactSolution{value, {}};
    bc.probe = [=](const Discretization& disc, const Trajectory& traj, std::map<std::string, double>& metrics) {
        double worst = 0.0;
        for (std::size_t k = 1; k < traj.states.size(); ++k) {
            if (!traj.interval_end[k]) continue;
            for (std::size_t i = 0; i < disc.size(); ++i) {
                if (std::abs(disc.points.coords[i].z()) > 1e-12) continue;
                const double ref = robin_series_solution(0.0, traj.times[k], L, m, 1.0, 1.0, *roots);
                worst = std::max(worst, std::abs(traj.states[k](static_cast<Eigen::Index>(i)) - ref));
            }
        }
        metrics["max_bottom_error"] = worst;
    };
    return bc;
}

struct Registered {
    std::string id;
    std::function<BenchmarkCase()> build;
};

const std::vector<Registered>& registry() {
    static const std::vector<Registered> cases = [] {
        std::vector<Registered> r;
        r.push_back({"Ex1_1", ex1_1});
        r.push_back({"Ex1_2", ex1_2});
        struct Fgm {
            const char* id;
            Gradation kind;
            double delta;
            double u0, uL;
            const char* name;
        };
        const Fgm fgm[] = {{"Ex1_3", Gradation::Exponential, 3.0, 1.0, 20.0, "exponential"},
                           {"Ex1_4", Gradation::ExpSquare, 2.0, 1.0, 20.0, "squared exponential"},
                           {"Ex1_5", Gradation::Trigonometric, 2.0, 0.0, 100.0, "trigonometric"},
                           {"Ex1_6", Gradation::PowerLaw, 3.0, 1.0, 20.0, "power-law"}};
        for (const auto& f : fgm) {
            const std::string id = f.id;
            const std::string name = f.name;
            r.push_back({id, [=] {
                             return fgm_square(id, name + " graded square, anisotropic",
                                               {f.kind, f.delta, f.u0, f.uL, true, false}, 11);
                         }});
            r.push_back({id + "_isotropic", [=] {
                             return fgm_square(id + "_isotropic", name + " graded square, isotropic",
                                               {f.kind, f.delta, f.u0, f.uL, false, false}, 11);
                         }});
            r.push_back({id + "_homogeneous", [=] {
                             return fgm_square(id + "_homogeneous", "homogeneous isotropic square",
                                               {f.kind, 0.0, f.u0, f.uL, false, false}, 11);
                         }});
        }
        r.push_back({"Ex1_6_neumann", [] {
                         return fgm_square("Ex1_6_neumann", "power-law graded square, anisotropic, adiabatic sides",
                                           {Gradation::PowerLaw, 3.0, 1.0, 20.0, true, true}, 11);
                     }});
        r.push_back({"Ex1_7", ex1_7});
        r.push_back({"Ex2_1", ex2_1});
        r.push_back({"Ex2_2", [] {
                         auto bc = step_cube("Ex2_2", "isotropic cube, thermal shock on top",
                                             [](const Point&) -> Eigen::Matrix3d { return Eigen::Matrix3d::Identity(); },
                                             false, 10);
                         bc.assembly.eta1 = 10.0;
                         bc.assembly.eta2 = 20.0;
                         bc.scheme = lvim(3, 1e-8);
                         bc.dt = 5.5;
                         bc.T = 55.0;
                         bc.error_times = interval_ends(bc.dt, bc.T);
                         const SpaceTimeField u = [](const Point& x, double t) {
                             return t > 0.0 ? slab_step_series(x.z(), t, 10.0, 1.0) : 0.0;
                         };
                         bc.exact = ExactSolution{u, {}};
                         return bc;
                     }});
        r.push_back({"Ex2_3", [] {
                         auto bc = step_cube("Ex2_3", "anisotropic cube, symmetric sides",
                                             [](const Point&) { return tensor(1, 1.5, 1, 0, 0, 0.5); }, true, 10);
                         bc.assembly.eta1 = 10.0;
                         bc.assembly.eta2 = 20.0;
                         bc.scheme = lvim(4, 1e-6);
                         bc.dt = 25.0;
                         bc.T = 100.0;
                         return bc;
                     }});
        r.push_back({"Ex2_4", [] {
                         auto bc = step_cube("Ex2_4", "graded anisotropic cube, symmetric sides",
                                             [](const Point& x) { return tensor(1, 1.5, 1 + x.z() / 10.0, 0, 0, 0.5); },
                                             true, 11);
                         bc.assembly.eta1 = 10.0;
                         bc.assembly.eta2 = 20.0;
                         bc.scheme = lvim(4, 1e-6);
                         bc.dt = 25.0;
                         bc.T = 100.0;
                         return bc;
                     }});
        r.push_back({"Ex2_5", [] {
                         auto bc = step_cube("Ex2_5", "fully anisotropic cube",
                                             [](const Point&) { return tensor(1, 1.5, 1, 0.5, 0.5, 0.5); }, false, 10);
                         bc.assembly.eta1 = 5.0;
                         bc.assembly.eta2 = 10.0;
                         bc.scheme = lvim(5, 1e-6);
                         bc.dt = 25.0;
                         bc.T = 100.0;
                         return bc;
                     }});
        r.push_back({"Ex2_6", [] {
                         auto bc = step_cube("Ex2_6", "graded fully anisotropic cube, steady",
                                             [](const Point& x) { return tensor(1, 1.5, 1 + x.z() / 10.0, 0.5, 0.5, 0.5); },
                                             false, 10);
                         bc.assembly.eta1 = 5.0;
                         bc.assembly.eta2 = 10.0;
                         bc.scheme = BackwardEuler{};
                         bc.T = 0.0;
                         return bc;
                     }});
        r.push_back({"Ex2_7", ex2_7});
        return r;
    }();
    return cases;
}

}  // namespace

void record_parameters(BenchmarkCase& bc) {
    bc.parameters["eta1"] = bc.assembly.eta1;
    bc.parameters["eta2"] = bc.assembly.eta2;
    bc.parameters["points"] = static_cast<double>(bc.points.size());
    if (bc.T > 0.0) {
        bc.parameters["dt"] = bc.dt;
        bc.parameters["T"] = bc.T;
    }
    if (const auto* cfg = std::get_if<LvimConfig>(&bc.scheme)) {
        bc.parameters["M"] = cfg->M;
        bc.parameters["tol"] = cfg->tol;
    }
}

std::vector<std::string> case_ids() {
    std::vector<std::string> ids;
    for (const auto& r : registry()) ids.push_back(r.id);
    return ids;
}

BenchmarkCase make_case(const std::string& id, const CaseOverrides& overrides) {
    for (const auto& r : registry())
        if (r.id == id) {
            BenchmarkCase bc = r.build();
            apply_overrides(bc, overrides);
            record_parameters(bc);
            return bc;
        }
    throw InvalidProblem("unknown benchmark case '" + id + "'");
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string method_name(const BenchmarkCase& bc) {
    if (bc.T <= 0.0) return "FPM steady";
    if (std::holds_alternative<LvimConfig>(bc.scheme)) return "FPM + LVIM";
    if (std::holds_alternative<BackwardEuler>(bc.scheme)) return "FPM + backward Euler";
    return "FPM + forward Euler";
}

}  // namespace

CaseRun run_case(const BenchmarkCase& bc) {
    const auto start = std::chrono::steady_clock::now();
    CaseRun run;
    run.disc = discretize(bc.points, bc.domain, bc.problem, bc.assembly.he_policy);
    run.system = assemble_system(run.disc, bc.problem, bc.assembly);
    if (bc.T > 0.0) {
        run.trajectory = march(run.system, run.system.initial, bc.scheme, bc.dt, bc.T);
    } else {
        run.trajectory.times = {0.0};
        run.trajectory.states = {solve_steady(run.system, 0.0)};
        run.trajectory.interval_end = {1};
        run.trajectory.iterations = {1};
    }
    const auto solved = std::chrono::steady_clock::now();

    ErrorReport& rep = run.report;
    rep.id = bc.id;
    rep.title = bc.title;
    rep.method = method_name(bc);
    rep.points = bc.points.size();
    rep.parameters = bc.parameters;
    rep.iterations = std::accumulate(run.trajectory.iterations.begin(), run.trajectory.iterations.end(), 0);
    rep.wall_time = std::chrono::duration<double>(solved - start).count();
    rep.structure = check_structure(run.disc, run.system, bc.problem.material);

    const double t_final = run.trajectory.times.back();
    const Vector& u_final = run.trajectory.states.back();
    if (bc.exact) {
        rep.r0 = relative_l2_error(run.disc, u_final, bc.exact->value, t_final);
        if (bc.exact->gradient) {
            try {
                rep.r1 = l2_gradient_error(run.disc, u_final, bc.exact->gradient, t_final) /
                         l2_gradient_norm(run.disc, bc.exact->gradient, t_final);
            } catch (const ZeroNormReference&) {
                rep.r1 = std::numeric_limits<double>::quiet_NaN();
            }
        }
        if (!bc.error_times.empty()) {
            double sum = 0.0;
            for (double t : bc.error_times) {
                const double r0 = relative_l2_error(run.disc, run.trajectory.at(t), bc.exact->value, t);
                rep.r0_history.emplace_back(t, r0);
                sum += r0;
            }
            rep.r0_mean = sum / static_cast<double>(bc.error_times.size());
        }
    }
    if (bc.probe) bc.probe(run.disc, run.trajectory, rep.metrics);
    return run;
}

ErrorReport run_benchmark(const std::string& id, const CaseOverrides& overrides) {
    return run_case(make_case(id, overrides)).report;
}

nlohmann::json ErrorReport::to_json() const {
    const auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::json j;
    j["id"] = id;
    j["title"] = title;
    j["method"] = method;
    j["points"] = points;
    j["r0"] = num(r0);
    j["r1"] = num(r1);
    j["r0_mean"] = num(r0_mean);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [t, r] : r0_history) hist.push_back({{"t", t}, {"r0", r}});
    j["r0_history"] = hist;
    j["wall_time_s"] = wall_time;
    j["iterations"] = iterations;
    j["structure"] = {{"k_symmetric", structure.k_symmetric},
                      {"k_symmetry_expected", structure.k_symmetry_expected},
                      {"c_positive_definite", structure.c_positive_definite},
                      {"capacity_error", structure.capacity_error}};
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : metrics) m[k] = num(v);
    j["metrics"] = m;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : parameters) p[k] = num(v);
    j["parameters"] = p;
    return j;
}

std::string format_table(const std::vector<ErrorReport>& reports) {
    std::ostringstream out;
    const auto sci = [](double v) {
        if (!std::isfinite(v)) return std::string("-");
        std::ostringstream s;
        s << std::scientific << std::setprecision(2) << v;
        return s.str();
    };
    out << std::left << std::setw(22) << "case" << std::setw(22) << "method" << std::setw(34) << "parameters"
        << std::setw(10) << "time step" << std::setw(11) << "r0" << std::setw(11) << "r1" << std::setw(11)
        << "mean r0" << "time (s)\n";
    for (const auto& r : reports) {
        std::ostringstream params;
        const auto get = [&](const char* k) {
            auto it = r.parameters.find(k);
            return it == r.parameters.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        };
        params << "eta1=" << get("eta1");
        if (get("eta2") > 0.0) params << " eta2=" << get("eta2");
        if (std::isfinite(get("M"))) params << " M=" << get("M") << " tol=" << get("tol");
        std::ostringstream dt;
        if (std::isfinite(get("dt"))) dt << get("dt");
        else dt << "-";
        out << std::left << std::setw(22) << r.id << std::setw(22) << r.method << std::setw(34) << params.str()
            << std::setw(10) << dt.str() << std::setw(11) << sci(r.r0) << std::setw(11) << sci(r.r1)
            << std::setw(11) << sci(r.r0_mean) << std::fixed << std::setprecision(2) << r.wall_time << "\n";
        out.unsetf(std::ios::fixed);
    }
    return out.str();
}

}  // namespace fpm
