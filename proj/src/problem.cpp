#include "fpm/problem.hpp"

#include "fpm/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

namespace fpm {

MaterialField MaterialField::constant(double rho, double c, const Eigen::Matrix3d& k) {
    MaterialField m;
    m.rho = [rho](const Point&) { return rho; };
    m.c = [c](const Point&) { return c; };
    m.k = [k](const Point&) { return k; };
    return m;
}

MaterialField MaterialField::isotropic(double rho, double c, double k) {
    return constant(rho, c, k * Eigen::Matrix3d::Identity());
}

void validate_material(const MaterialField& material, int dim, const std::vector<Point>& samples) {
    for (const auto& x : samples) {
        const Eigen::MatrixXd k = material.k(x).topLeftCorner(dim, dim);
        if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff())) {
            std::ostringstream msg;
            msg << "conductivity is not symmetric at (" << x.transpose() << ")";
            throw InvalidProblem(msg.str());
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
        if (!(eig.eigenvalues().minCoeff() > 0.0)) {
            std::ostringstream msg;
            msg << "conductivity is not positive definite at (" << x.transpose() << ")";
            throw InvalidProblem(msg.str());
        }
        if (!(material.rho_c(x) > 0.0)) {
            std::ostringstream msg;
            msg << "rho * c must be positive at (" << x.transpose() << ")";
            throw InvalidProblem(msg.str());
        }
    }
}

double gradation_value(Gradation kind, double delta, double L, double y) {
    const double s = delta * y / L;
    switch (kind) {
        case Gradation::Exponential: return std::exp(s);
        case Gradation::ExpSquare: {
            const double v = std::exp(s) + std::exp(-s);
            return v * v;
        }
        case Gradation::Trigonometric: {
            const double v = std::cos(s) + 5.0 * std::sin(s);
            return v * v;
        }
        case Gradation::PowerLaw: return (1.0 + s) * (1.0 + s);
    }
    return 1.0;
}

std::function<double(double)> gradation_profile(Gradation kind, double delta, double L) {
    if (!(L > 0.0)) throw InvalidProblem("gradation length L must be positive");
    return [=](double y) { return gradation_value(kind, delta, L, y); };
}

MaterialField graded_material(Gradation kind, double delta, double L, const Eigen::Matrix3d& k_hat) {
    const auto f = gradation_profile(kind, delta, L);
    MaterialField m;
    m.rho = [](const Point&) { return 1.0; };
    m.c = [f](const Point& x) { return f(x.y()); };
    m.k = [f, k_hat](const Point& x) -> Eigen::Matrix3d { return f(x.y()) * k_hat; };
    return m;
}

std::string to_string(BcKind kind) {
    switch (kind) {
        case BcKind::Dirichlet: return "dirichlet";
        case BcKind::Neumann: return "neumann";
        case BcKind::Robin: return "robin";
        case BcKind::Symmetric: return "symmetric";
    }
    return "unknown";
}

FaceSelector plane_selector(int axis, double value, double tol) {
    return [=](const Point& centroid, const Point& normal) {
        return std::abs(centroid[axis] - value) <= tol * std::max(1.0, std::abs(value)) &&
               std::abs(std::abs(normal[axis]) - 1.0) <= 1e-9;
    };
}

namespace {

FaceKind face_kind(BcKind kind) {
    switch (kind) {
        case BcKind::Dirichlet: return FaceKind::Dirichlet;
        case BcKind::Neumann: return FaceKind::Neumann;
        case BcKind::Robin: return FaceKind::Robin;
        case BcKind::Symmetric: return FaceKind::Symmetric;
    }
    return FaceKind::Neumann;
}

}  // namespace

void classify_boundary(Partition& partition, const ProblemSpec& problem) {
    int fallback = -1;
    for (std::size_t r = 0; r < problem.regions.size(); ++r) {
        const auto& reg = problem.regions[r];
        if (!reg.selector) {
            if (fallback >= 0) throw InvalidProblem("more than one fallback boundary region");
            fallback = static_cast<int>(r);
        }
        if (reg.kind != BcKind::Symmetric && !reg.value)
            throw InvalidProblem("boundary region '" + reg.name + "' has no data");
        if (reg.kind == BcKind::Robin && !reg.h) throw InvalidProblem("robin region '" + reg.name + "' has no h");
    }
    for (auto& f : partition.faces) {
        if (f.is_internal() || f.kind == FaceKind::Crack) continue;
        int match = -1;
        int count = 0;
        for (std::size_t r = 0; r < problem.regions.size(); ++r) {
            const auto& sel = problem.regions[r].selector;
            if (sel && sel(f.centroid, f.normal)) {
                match = static_cast<int>(r);
                ++count;
            }
        }
        if (count == 0) match = fallback;
        if (count > 1 || match < 0) {
            std::ostringstream msg;
            msg << "boundary face at (" << f.centroid.transpose() << ") is claimed by " << count
                << " regions";
            throw InvalidProblem(msg.str());
        }
        const auto& reg = problem.regions[static_cast<std::size_t>(match)];
        if (reg.kind == BcKind::Robin && !(reg.h(f.centroid) >= 0.0))
            throw InvalidProblem("robin region '" + reg.name + "' has negative h");
        f.region = match;
        f.kind = face_kind(reg.kind);
    }
}

std::vector<StrongConstraint> strong_constraints(const Partition& partition, const PointCloud& points,
                                                 const ProblemSpec& problem) {
    std::vector<StrongConstraint> out;
    std::vector<int> region_of(points.size(), -1);
    std::vector<char> region_has_faces(problem.regions.size(), 0);
    const double tol = 1e-9 * partition.diameter;
    for (const auto& f : partition.faces) {
        if (f.kind != FaceKind::Dirichlet) continue;
        region_has_faces[static_cast<std::size_t>(f.region)] = 1;
        const auto p = static_cast<std::size_t>(f.cell);
        if (!points.boundary[p] || region_of[p] >= 0) continue;
        if (std::abs(f.normal.dot(points.coords[p] - f.centroid)) <= tol) region_of[p] = f.region;
    }
    std::vector<char> region_has_points(problem.regions.size(), 0);
    for (std::size_t p = 0; p < points.size(); ++p)
        if (region_of[p] >= 0) {
            out.push_back({static_cast<int>(p), region_of[p]});
            region_has_points[static_cast<std::size_t>(region_of[p])] = 1;
        }
    for (std::size_t r = 0; r < problem.regions.size(); ++r)
        if (region_has_faces[r] && !region_has_points[r])
            throw InvalidProblem("dirichlet region '" + problem.regions[r].name +
                                 "' has no boundary points for strong imposition");
    return out;
}

double heaviside(double t) { return t >= 0.0 ? 1.0 : 0.0; }

std::vector<double> robin_roots(double m, int n_roots) {
    if (n_roots < 1) throw InvalidProblem("robin series needs at least one root");
    if (!(m > 0.0)) throw InvalidProblem("robin series needs m > 0");
    const auto g = [m](double b) { return b * std::sin(b) - m * std::cos(b); };
    std::vector<double> roots;
    roots.reserve(static_cast<std::size_t>(n_roots));
    for (int i = 1; i <= n_roots; ++i) {
        double lo = (i - 1) * std::numbers::pi;
        double hi = (i - 0.5) * std::numbers::pi;
        double glo = g(lo);
        const double ghi = g(hi);
        if (glo * ghi > 0.0) throw RootNotConverged("robin root " + std::to_string(i) + " is not bracketed");
        int iter = 0;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g(mid);
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
            if (++iter > 200) throw RootNotConverged("robin root " + std::to_string(i) + " did not converge");
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

double robin_series_solution(double z, double t, double L, double m, double k33, double rho_c, int n_roots) {
    return robin_series_solution(z, t, L, m, k33, rho_c, robin_roots(m, n_roots));
}

double robin_series_solution(double z, double t, double L, double m, double k33, double rho_c,
                             const std::vector<double>& roots) {
    double sum = 0.0;
    for (double b : roots) {
        const double s = std::sin(b);
        sum += s * std::cos(b * z / L) * std::exp(-b * b * k33 * t / (rho_c * L * L)) / (b * (m + s * s));
    }
    return 1.0 - 2.0 * m * sum;
}

}  // namespace fpm
