#pragma once

// Physical problem description: material fields, boundary regions, sources,
// initial state, and closed-form reference solutions.

#include "fpm/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fpm {

using ScalarField = std::function<double(const Point&)>;
using TensorField = std::function<Eigen::Matrix3d(const Point&)>;
using SpaceTimeField = std::function<double(const Point&, double)>;

struct MaterialField {
    ScalarField rho;
    ScalarField c;
    TensorField k;  // only the leading dim x dim block is used

    static MaterialField constant(double rho, double c, const Eigen::Matrix3d& k);
    static MaterialField isotropic(double rho, double c, double k);

    double rho_c(const Point& x) const { return rho(x) * c(x); }
};

/// Checks symmetry (1e-12) and positive definiteness of k and rho*c > 0 at
/// the given sample points. Throws InvalidProblem.
void validate_material(const MaterialField& material, int dim, const std::vector<Point>& samples);

enum class Gradation { Exponential, ExpSquare, Trigonometric, PowerLaw };

/// f(y) for the functionally graded material profiles.
double gradation_value(Gradation kind, double delta, double L, double y);
std::function<double(double)> gradation_profile(Gradation kind, double delta, double L);

/// rho = 1, c = f(y), k = f(y) * k_hat.
MaterialField graded_material(Gradation kind, double delta, double L, const Eigen::Matrix3d& k_hat);

enum class BcKind { Dirichlet, Neumann, Robin, Symmetric };

std::string to_string(BcKind kind);

struct BoundaryRegion {
    std::string name;
    BcKind kind = BcKind::Neumann;
    /// Faces claimed by this region. An empty selector marks the fallback
    /// region that receives every face no other region claims.
    FaceSelector selector;
    /// u_D for Dirichlet, q_N for Neumann, u_R for Robin; unused for Symmetric.
    SpaceTimeField value;
    /// Heat transfer coefficient (Robin only).
    ScalarField h;
};

/// Selects boundary faces lying on the plane x[axis] = value.
FaceSelector plane_selector(int axis, double value, double tol = 1e-9);

enum class DirichletMode { Strong, Penalty };

struct ProblemSpec {
    int dim = 2;
    MaterialField material;
    std::vector<BoundaryRegion> regions;
    SpaceTimeField source;  // may be empty (Q = 0)
    ScalarField initial;    // may be empty (u = 0)
    DirichletMode dirichlet_mode = DirichletMode::Strong;
    std::optional<CrackSpec> crack;
};

/// Assigns kind and region to every non-crack boundary face. Throws
/// InvalidProblem if a face is claimed by no region or by more than one.
void classify_boundary(Partition& partition, const ProblemSpec& problem);

struct StrongConstraint {
    int point = -1;
    int region = -1;
};

/// Boundary-flagged points sitting on a Dirichlet face of their own cell.
/// Throws InvalidProblem if some Dirichlet region with faces ends up without
/// a constrained point.
std::vector<StrongConstraint> strong_constraints(const Partition& partition, const PointCloud& points,
                                                 const ProblemSpec& problem);

/// Unit step with H(0) = 1.
double heaviside(double t);

/// Roots of beta * sin(beta) - m * cos(beta) = 0, one per bracket
/// ((i - 1) pi, (i - 1/2) pi), refined by bisection.
std::vector<double> robin_roots(double m, int n_roots);

/// 1D slab of thickness L, insulated at z = 0, convection (Biot number m)
/// to unit ambient temperature at z = L, zero initial temperature.
double robin_series_solution(double z, double t, double L, double m, double k33, double rho_c, int n_roots);
double robin_series_solution(double z, double t, double L, double m, double k33, double rho_c,
                             const std::vector<double>& roots);

}  // namespace fpm
