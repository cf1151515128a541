#pragma once

// Assembly of the semi-discrete system C du/dt + K u = q.

#include "fpm/approximation.hpp"
#include "fpm/geometry.hpp"
#include "fpm/problem.hpp"
#include "fpm/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace fpm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Which Dirichlet face terms are kept on faces whose generating point is
/// strongly constrained.
enum class StrongFaceTerms {
    Skip,         // drop K_D and q_D entirely
    Consistency,  // keep the symmetric flux pair, drop the eta2 penalty
    Full,         // keep everything
};

struct AssemblyOptions {
    double eta1 = 1.0;
    double eta2 = 0.0;
    LengthScale he_policy = LengthScale::FaceMeasure;
    StrongFaceTerms strong_face_terms = StrongFaceTerms::Consistency;
};

/// Spatial discretization shared by assembly and post-processing.
struct Discretization {
    PointCloud points;
    Partition partition;
    std::vector<GradientOperator> ops;
    std::vector<QuadratureRule> cell_rules;
    std::vector<QuadratureRule> face_rules;

    int dim() const { return points.dim; }
    std::size_t size() const { return points.size(); }
    /// Nodal temperatures of cell `cell` gathered over its support.
    Vector gather(int cell, const Vector& u) const;
};

/// Builds the partition, applies the crack, classifies the boundary and
/// builds gradient operators and quadrature rules.
Discretization discretize(PointCloud points, const ConvexDomain& domain, const ProblemSpec& problem,
                          LengthScale he_policy = LengthScale::FaceMeasure);

class LoadEvaluator;

struct SemiDiscreteSystem {
    std::size_t n = 0;
    SparseMatrix C;
    SparseMatrix K;
    bool k_symmetric = true;  // false when anisotropic symmetric faces add K_S
    std::function<Vector(double)> load;  // empty means q = 0
    std::vector<StrongConstraint> constraints;  // sorted by point id
    std::vector<Point> constraint_coords;
    std::vector<SpaceTimeField> constraint_data;
    Vector initial;

    Vector q(double t) const;
    /// Prescribed values at the constrained points.
    Vector g(double t) const;
};

SparseMatrix assemble_capacity(const Discretization& disc, const MaterialField& material);

/// K assembled from cell, internal-face, Dirichlet, Robin and symmetric terms.
/// `k_symmetric` is set to false when K_S terms are present.
SparseMatrix assemble_conductivity(const Discretization& disc, const ProblemSpec& problem,
                                   const AssemblyOptions& options, bool* k_symmetric = nullptr);

/// Precomputed integration data for the time-dependent load vector.
class LoadEvaluator {
public:
    LoadEvaluator(const Discretization& disc, const ProblemSpec& problem, const AssemblyOptions& options);
    Vector operator()(double t) const;

private:
    struct Entry {
        std::vector<int> support;
        Eigen::VectorXd coeff;  // weight-scaled row integrand
        Point x;
        int region;  // -1 for the volumetric source
        double scale;  // extra factor multiplying the data value
    };
    std::size_t n_;
    std::vector<Entry> entries_;
    std::vector<BoundaryRegion> regions_;
    SpaceTimeField source_;
};

Vector assemble_load(const Discretization& disc, const ProblemSpec& problem, const AssemblyOptions& options,
                     double t);

/// Full system. Throws InvalidPenalty if eta1 <= 0, or if eta2 <= 0 while
/// Dirichlet faces are imposed by penalty.
SemiDiscreteSystem assemble_system(const Discretization& disc, const ProblemSpec& problem,
                                   const AssemblyOptions& options);

/// Free/constrained split of a system under strong Dirichlet constraints.
class StrongDirichletView {
public:
    explicit StrongDirichletView(const SemiDiscreteSystem& system);

    const SemiDiscreteSystem& system() const { return *system_; }
    const std::vector<int>& free() const { return free_; }
    const std::vector<int>& constrained() const { return constrained_; }
    std::size_t n_free() const { return free_.size(); }

    const SparseMatrix& Cff() const { return Cff_; }
    const SparseMatrix& Cfc() const { return Cfc_; }
    const SparseMatrix& Kff() const { return Kff_; }
    const SparseMatrix& Kfc() const { return Kfc_; }

    Vector g(double t) const { return system_->g(t); }
    Vector q_free(double t) const;
    Vector restrict_free(const Vector& full) const;
    /// Full-length vector from free values and the prescribed data at t.
    Vector expand(const Vector& free_values, double t) const;
    Vector expand(const Vector& free_values, const Vector& constrained_values) const;
    /// Right-hand side of the steady reduced system at time t.
    Vector steady_rhs(double t) const;

private:
    const SemiDiscreteSystem* system_;
    std::vector<int> free_;
    std::vector<int> constrained_;
    SparseMatrix Cff_, Cfc_, Kff_, Kfc_;
};

/// Steady solution of K u = q(t) with strong constraints substituted.
Vector solve_steady(const SemiDiscreteSystem& system, double t = 0.0);

/// Extracts rows/columns `rows` x `cols` of a sparse matrix.
SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace fpm
