#pragma once

// Benchmark registry, error norms and reference solutions.

#include "fpm/assembly.hpp"
#include "fpm/problem.hpp"
#include "fpm/timeint.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fpm {

using GradientField = std::function<Point(const Point&, double)>;

struct ExactSolution {
    SpaceTimeField value;
    GradientField gradient;  // may be empty
};

struct ErrorNorms {
    double r0 = 0.0;
    double r1 = 0.0;
};

/// || u_h - u ||_L2 and || grad u_h - grad u ||_L2 over the domain, with u_h
/// from shape rows and grad u_h = B u_E.
double l2_error(const Discretization& disc, const Vector& u, const SpaceTimeField& exact, double t);
double l2_gradient_error(const Discretization& disc, const Vector& u, const GradientField& exact, double t);
/// Throw ZeroNormReference if the reference norm vanishes.
double l2_norm(const Discretization& disc, const SpaceTimeField& exact, double t);
double l2_gradient_norm(const Discretization& disc, const GradientField& exact, double t);

/// Relative errors r0 and r1; throws ZeroNormReference if either reference
/// norm is zero.
ErrorNorms error_norms(const Discretization& disc, const Vector& u, const ExactSolution& exact, double t);
double relative_l2_error(const Discretization& disc, const Vector& u, const SpaceTimeField& exact, double t);

/// Dense 1D reference for c(y) u_t = (k(y) u_y)_y on [0, L], u(y, 0) = u0,
/// u(0, t) = u0, u(L, t) = uL for t > 0. Crank-Nicolson on a uniform grid,
/// started with backward Euler half steps.
class FiniteDifference1D {
public:
    FiniteDifference1D(std::function<double(double)> capacity, std::function<double(double)> conductivity, double L,
                       double u0, double uL, const std::vector<double>& times, int nodes = 401, double dt = 1e-5);
    double value(double y, double t) const;
    double derivative(double y, double t) const;
    const std::vector<double>& grid() const { return y_; }

private:
    const std::vector<double>& snapshot(double t) const;
    double L_;
    std::vector<double> y_;
    std::vector<double> times_;
    std::vector<std::vector<double>> states_;
};

/// Closed-form 1D steady profile of (f(y) u_y)_y = 0 with f = exp(delta y / L).
double exponential_steady_profile(double y, double L, double delta, double u0, double uL);

/// Heat-up of a slab 0 <= z <= L with u(0) = 0, u(L) = 1 for t > 0, u = 0 initially.
double slab_step_series(double z, double t, double L, double diffusivity, int terms = 200);

struct StructureCheck {
    bool k_symmetric = false;         // exact, only meaningful without K_S
    bool k_symmetry_expected = true;
    bool c_positive_definite = false; // Cholesky succeeded
    double capacity_error = 0.0;      // |1^T C 1 - int rho c| / int rho c
};

StructureCheck check_structure(const Discretization& disc, const SemiDiscreteSystem& system,
                               const MaterialField& material);

struct BenchmarkCase {
    std::string id;
    std::string title;
    ProblemSpec problem;
    ConvexDomain domain;
    PointCloud points;
    AssemblyOptions assembly;
    Scheme scheme = LvimConfig{};
    double dt = 0.0;
    double T = 0.0;  // 0 means steady
    std::optional<ExactSolution> exact;
    /// Times at which r0 is averaged (empty: the final time only).
    std::vector<double> error_times;
    /// Case-specific post-processing adding named metrics to the report.
    std::function<void(const Discretization&, const Trajectory&, std::map<std::string, double>&)> probe;
    std::map<std::string, double> parameters;
};

struct CaseOverrides {
    std::optional<double> eta1;
    std::optional<double> eta2;
    std::optional<double> dt;
    std::optional<double> T;
    std::optional<int> M;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
};

std::vector<std::string> case_ids();
/// Fills bench.parameters from the assembly options, scheme and time settings.
void record_parameters(BenchmarkCase& bench);
/// Throws InvalidProblem for unknown ids.
BenchmarkCase make_case(const std::string& id, const CaseOverrides& overrides = {});

struct ErrorReport {
    std::string id;
    std::string title;
    std::string method;
    std::size_t points = 0;
    double r0 = std::numeric_limits<double>::quiet_NaN();
    double r1 = std::numeric_limits<double>::quiet_NaN();
    double r0_mean = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> r0_history;
    double wall_time = 0.0;
    int iterations = 0;
    StructureCheck structure;
    std::map<std::string, double> metrics;
    std::map<std::string, double> parameters;

    nlohmann::json to_json() const;
};

struct CaseRun {
    Discretization disc;
    SemiDiscreteSystem system;
    Trajectory trajectory;  // steady cases hold a single record at t = 0
    ErrorReport report;
};

/// Runs a case end to end and evaluates its reference.
CaseRun run_case(const BenchmarkCase& bench);
ErrorReport run_benchmark(const std::string& id, const CaseOverrides& overrides = {});

/// Aligned text table of reports.
std::string format_table(const std::vector<ErrorReport>& reports);

/// Point layouts used by the cases.
PointCloud grid_points(int dim, const Point& lower, const Point& upper, int n);
PointCloud cell_centered_points(int dim, const Point& lower, const Point& upper, int n);
PointCloud disk_points(int boundary, int total, double radius);
/// `total` seeded-random points in `domain`, of which `boundary` lie on its
/// boundary (domain vertices first, then random boundary points). Layouts in
/// which some cell has too few Voronoi neighbours for a gradient are redrawn.
PointCloud random_points(const ConvexDomain& domain, int total, int boundary, std::uint64_t seed);

}  // namespace fpm
