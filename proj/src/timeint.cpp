#include "fpm/timeint.hpp"

#include "fpm/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace fpm {

std::vector<double> cgl_nodes(int M, double ta, double tb) {
    if (M < 2) throw InvalidProblem("collocation needs at least 2 nodes");
    if (!(tb > ta)) throw InvalidProblem("collocation interval must have tb > ta");
    std::vector<double> nodes(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        const double xi = -std::cos(j * std::numbers::pi / (M - 1));
        nodes[static_cast<std::size_t>(j)] = 0.5 * (ta + tb) + 0.5 * (tb - ta) * xi;
    }
    nodes.front() = ta;
    nodes.back() = tb;
    // cos(pi/2) is not exactly zero; keep the symmetric midpoint exact.
    if (M % 2 == 1) nodes[static_cast<std::size_t>(M / 2)] = 0.5 * (ta + tb);
    return nodes;
}

ChebOperator cheb_diff(int M, double ta, double tb) {
    ChebOperator op;
    op.M = M;
    op.ta = ta;
    op.tb = tb;
    op.nodes = cgl_nodes(M, ta, tb);
    const double scale = 2.0 / (tb - ta);
    Eigen::MatrixXd Q(M, M), LQ(M, M);
    for (int i = 0; i < M; ++i) {
        const double x = (2.0 * op.nodes[static_cast<std::size_t>(i)] - ta - tb) / (tb - ta);
        // T_n and U_n by recurrence; T_n' = n U_{n-1}.
        std::vector<double> T(static_cast<std::size_t>(M) + 1), U(static_cast<std::size_t>(M) + 1);
        T[0] = 1.0;
        T[1] = x;
        U[0] = 1.0;
        U[1] = 2.0 * x;
        for (std::size_t n = 2; n <= static_cast<std::size_t>(M); ++n) {
            T[n] = 2.0 * x * T[n - 1] - T[n - 2];
            U[n] = 2.0 * x * U[n - 1] - U[n - 2];
        }
        for (int n = 0; n < M; ++n) {
            Q(i, n) = T[static_cast<std::size_t>(n)];
            LQ(i, n) = n == 0 ? 0.0 : n * U[static_cast<std::size_t>(n) - 1] * scale;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
    const auto& sv = svd.singularValues();
    if (!(sv(M - 1) > 0.0) || sv(0) / sv(M - 1) > 1e6)
        throw IllConditionedBasis("Chebyshev basis matrix is ill-conditioned for M = " + std::to_string(M));
    op.D = Q.transpose().partialPivLu().solve(LQ.transpose()).transpose();
    return op;
}

namespace {

// Point-major index of free point p at collocation node m (m >= 1).
inline Eigen::Index slot(Eigen::Index p, int m, int M) { return p * (M - 1) + (m - 1); }

}  // namespace

LvimSolver::LvimSolver(const StrongDirichletView& view, const LvimConfig& cfg) : view_(&view), cfg_(cfg) {
    if (cfg.M < 2) throw InvalidProblem("LVIM needs M >= 2");
    if (!(cfg.tol > 0.0)) throw InvalidProblem("LVIM tolerance must be positive");
    if (!(cfg.dt > 0.0)) throw InvalidProblem("LVIM interval length must be positive");
    if (cfg.max_iter < 1) throw InvalidProblem("LVIM needs max_iter >= 1");
    ref_ = cheb_diff(cfg.M, 0.0, cfg.dt);
    const int M = cfg.M;
    const int R = M - 1;
    const auto nf = static_cast<Eigen::Index>(view.n_free());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(view.Cff().nonZeros() * R * R + view.Kff().nonZeros() * R));
    const auto& C = view.Cff();
    const auto& K = view.Kff();
    for (Eigen::Index c = 0; c < C.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(C, c); it; ++it)
            for (int a = 1; a < M; ++a)
                for (int b = 1; b < M; ++b) {
                    const double v = it.value() * ref_.D(a, b);
                    if (v != 0.0) trip.emplace_back(slot(it.row(), a, M), slot(it.col(), b, M), v);
                }
    for (Eigen::Index c = 0; c < K.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(K, c); it; ++it)
            for (int a = 1; a < M; ++a) trip.emplace_back(slot(it.row(), a, M), slot(it.col(), a, M), it.value());
    A_.resize(nf * R, nf * R);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    if (nf > 0) {
        lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
        lu_->compute(A_);
        if (lu_->info() != Eigen::Success) throw SingularIteration("LVIM interval matrix is singular");
    }
}

IntervalResult LvimSolver::solve(const Vector& u_start, double ta) const {
    const auto& view = *view_;
    const int M = cfg_.M;
    const int R = M - 1;
    const auto nf = static_cast<Eigen::Index>(view.n_free());
    const auto nc = static_cast<Eigen::Index>(view.constrained().size());

    IntervalResult res;
    res.times.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) res.times[static_cast<std::size_t>(m)] = ta + ref_.nodes[static_cast<std::size_t>(m)];
    res.times.back() = ta + cfg_.dt;

    const Vector u0f = view.restrict_free(u_start);
    std::vector<Vector> g(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) g[static_cast<std::size_t>(m)] = view.g(res.times[static_cast<std::size_t>(m)]);

    // Right-hand side of the collocation equations at nodes 2..M.
    Vector b(nf * R);
    for (int a = 1; a < M; ++a) {
        Vector rhs = view.q_free(res.times[static_cast<std::size_t>(a)]);
        rhs -= ref_.D(a, 0) * (view.Cff() * u0f);
        if (nc > 0) {
            Vector dg = Vector::Zero(nc);
            for (int j = 0; j < M; ++j) dg += ref_.D(a, j) * g[static_cast<std::size_t>(j)];
            rhs -= view.Cfc() * dg + view.Kfc() * g[static_cast<std::size_t>(a)];
        }
        for (Eigen::Index p = 0; p < nf; ++p) b(slot(p, a, M)) = rhs(p);
    }

    // Constant initial guess, then corrections U <- U - A^-1 (A U - b).
    Vector U(nf * R);
    for (Eigen::Index p = 0; p < nf; ++p)
        for (int a = 1; a < M; ++a) U(slot(p, a, M)) = u0f(p);
    bool converged = nf == 0;
    while (!converged) {
        if (res.iterations >= cfg_.max_iter) {
            std::ostringstream msg;
            msg << "LVIM did not converge on [" << ta << ", " << ta + cfg_.dt << "] after " << cfg_.max_iter
                << " iterations";
            throw NotConverged(msg.str(), res.corrections.empty() ? 0.0 : res.corrections.back());
        }
        const Vector residual = A_ * U - b;
        const Vector delta = lu_->solve(residual);
        if (lu_->info() != Eigen::Success || !delta.allFinite()) throw SingularIteration("LVIM correction solve failed");
        U -= delta;
        ++res.iterations;
        const double dn = delta.lpNorm<Eigen::Infinity>();
        res.corrections.push_back(dn);
        converged = dn <= cfg_.tol * (1.0 + U.lpNorm<Eigen::Infinity>());
    }

    res.states.resize(static_cast<std::size_t>(M));
    res.states[0] = view.expand(u0f, g[0]);
    for (int a = 1; a < M; ++a) {
        Vector uf(nf);
        for (Eigen::Index p = 0; p < nf; ++p) uf(p) = U(slot(p, a, M));
        res.states[static_cast<std::size_t>(a)] = view.expand(uf, g[static_cast<std::size_t>(a)]);
    }
    return res;
}

IntervalResult lvim_interval(const SemiDiscreteSystem& system, const Vector& u_start, double ta,
                             const LvimConfig& cfg) {
    StrongDirichletView view(system);
    LvimSolver solver(view, cfg);
    return solver.solve(u_start, ta);
}

const Vector& Trajectory::at(double t) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    return states.at(best);
}

namespace {

int step_count(double dt, double T) {
    if (!(dt > 0.0) || !(T > 0.0)) throw InvalidProblem("time step and end time must be positive");
    const double r = T / dt;
    const long n = std::lround(r);
    if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r))
        throw InvalidProblem("time step does not divide the end time");
    return static_cast<int>(n);
}

class DivergenceGuard {
public:
    explicit DivergenceGuard(const Vector& u0) : ref_(u0.lpNorm<Eigen::Infinity>()) {}
    void check(const Vector& u, double t) {
        const double nrm = u.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(nrm) || (ref_ > 0.0 && nrm > 1e12 * ref_)) {
            std::ostringstream msg;
            msg << "state norm " << nrm << " exceeded 1e12 times its reference at t = " << t;
            throw Diverged(msg.str());
        }
        if (ref_ == 0.0) ref_ = nrm;
    }

private:
    double ref_;
};

}  // namespace

Trajectory march(const SemiDiscreteSystem& system, const Vector& u0, const Scheme& scheme, double dt, double T) {
    if (u0.size() != static_cast<Eigen::Index>(system.n)) throw InvalidProblem("initial state has wrong length");
    const int steps = step_count(dt, T);
    StrongDirichletView view(system);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    traj.interval_end.push_back(1);
    DivergenceGuard guard(u0);

    const auto time_at = [&](int n) { return n == steps ? T : n * dt; };

    if (const auto* cfg_in = std::get_if<LvimConfig>(&scheme)) {
        LvimConfig cfg = *cfg_in;
        cfg.dt = dt;
        LvimSolver solver(view, cfg);
        Vector u = u0;
        for (int n = 0; n < steps; ++n) {
            IntervalResult r = solver.solve(u, time_at(n));
            for (int m = 1; m < cfg.M; ++m) {
                traj.times.push_back(m == cfg.M - 1 ? time_at(n + 1) : r.times[static_cast<std::size_t>(m)]);
                traj.states.push_back(r.states[static_cast<std::size_t>(m)]);
                traj.interval_end.push_back(m == cfg.M - 1 ? 1 : 0);
            }
            traj.iterations.push_back(r.iterations);
            traj.corrections.push_back(std::move(r.corrections));
            u = traj.states.back();
            guard.check(u, traj.times.back());
        }
        return traj;
    }

    const bool implicit = std::holds_alternative<BackwardEuler>(scheme);
    const auto nf = static_cast<Eigen::Index>(view.n_free());
    const bool has_c = !view.constrained().empty();
    Vector uf = view.restrict_free(u0);
    Vector g_prev = view.g(0.0);

    Eigen::SparseLU<SparseMatrix> be;
    Eigen::SimplicialLLT<SparseMatrix> fe;
    if (nf > 0) {
        if (implicit) {
            SparseMatrix A = view.Cff() + dt * view.Kff();
            be.compute(A);
            if (be.info() != Eigen::Success) throw SingularIteration("backward Euler matrix is singular");
        } else {
            fe.compute(view.Cff());
            if (fe.info() != Eigen::Success) throw SingularIteration("capacity matrix is not positive definite");
        }
    }
    for (int n = 0; n < steps; ++n) {
        const double t0 = time_at(n);
        const double t1 = time_at(n + 1);
        const Vector g_next = view.g(t1);
        if (nf > 0) {
            Vector rhs = view.Cff() * uf;
            if (implicit) {
                rhs += dt * view.q_free(t1);
                if (has_c) rhs -= view.Cfc() * (g_next - g_prev) + dt * (view.Kfc() * g_next);
                uf = be.solve(rhs);
            } else {
                rhs += dt * (view.q_free(t0) - view.Kff() * uf);
                if (has_c) rhs -= view.Cfc() * (g_next - g_prev) + dt * (view.Kfc() * g_prev);
                uf = fe.solve(rhs);
            }
        }
        g_prev = g_next;
        traj.times.push_back(t1);
        traj.states.push_back(view.expand(uf, g_next));
        traj.interval_end.push_back(1);
        traj.iterations.push_back(1);
        guard.check(traj.states.back(), t1);
    }
    return traj;
}

}  // namespace fpm
