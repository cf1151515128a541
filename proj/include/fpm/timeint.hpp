#pragma once

// Time integration of C du/dt + K u = q: forward/backward Euler and the
// local variational iteration method with Chebyshev collocation.

#include "fpm/assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <variant>
#include <vector>

namespace fpm {

/// Chebyshev-Gauss-Lobatto nodes on [ta, tb], ascending.
std::vector<double> cgl_nodes(int M, double ta, double tb);

struct ChebOperator {
    int M = 0;
    double ta = 0.0;
    double tb = 0.0;
    std::vector<double> nodes;
    Eigen::MatrixXd D;  // differentiation matrix (LQ) Q^-1
};

/// Throws IllConditionedBasis if the Chebyshev basis matrix has condition
/// number above 1e6.
ChebOperator cheb_diff(int M, double ta, double tb);

struct LvimConfig {
    int M = 5;
    double tol = 1e-8;
    int max_iter = 50;
    double dt = 0.1;
};

struct IntervalResult {
    std::vector<double> times;       // the M collocation nodes
    std::vector<Vector> states;      // full-length state at each node
    int iterations = 0;              // corrections computed
    std::vector<double> corrections; // max-norm of each correction
};

/// Collocation solver for intervals of a fixed length; the interval matrix
/// C_ff (x) D + K_ff (x) I is factored once and reused.
class LvimSolver {
public:
    LvimSolver(const StrongDirichletView& view, const LvimConfig& cfg);
    /// `u_start` is the full state at ta; its constrained entries are ignored.
    IntervalResult solve(const Vector& u_start, double ta) const;

private:
    const StrongDirichletView* view_;
    LvimConfig cfg_;
    ChebOperator ref_;  // on [0, dt]
    SparseMatrix A_;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

IntervalResult lvim_interval(const SemiDiscreteSystem& system, const Vector& u_start, double ta,
                             const LvimConfig& cfg);

struct ForwardEuler {};
struct BackwardEuler {};
using Scheme = std::variant<ForwardEuler, BackwardEuler, LvimConfig>;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<int> iterations;                    // per step / interval
    std::vector<std::vector<double>> corrections;   // per interval (LVIM)
    std::vector<char> interval_end;                 // 1 if the record closes a step/interval

    /// State at the record whose time is closest to t.
    const Vector& at(double t) const;
};

/// Marches from u0 at t = 0 to T with step dt (the LVIM interval length is
/// taken from dt as well). Throws InvalidProblem if dt does not divide T,
/// Diverged if the state norm exceeds 1e12 times its reference.
Trajectory march(const SemiDiscreteSystem& system, const Vector& u0, const Scheme& scheme, double dt, double T);

}  // namespace fpm
