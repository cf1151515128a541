#include "fpm/assembly.hpp"

#include "fpm/errors.hpp"
#include "fpm/parallel.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>

namespace fpm {

Vector Discretization::gather(int cell, const Vector& u) const {
    const auto& sup = ops[static_cast<std::size_t>(cell)].support;
    Vector out(static_cast<Eigen::Index>(sup.size()));
    for (std::size_t k = 0; k < sup.size(); ++k) out(static_cast<Eigen::Index>(k)) = u(sup[k]);
    return out;
}

Discretization discretize(PointCloud points, const ConvexDomain& domain, const ProblemSpec& problem,
                          LengthScale he_policy) {
    if (points.dim != problem.dim || domain.dim() != problem.dim)
        throw InvalidProblem("problem, domain and points disagree on dimension");
    Discretization disc;
    disc.partition = build_partition(points, domain, he_policy);
    if (problem.crack) disc.partition = apply_crack(disc.partition, points, *problem.crack);
    classify_boundary(disc.partition, problem);
    disc.ops = build_operators(disc.partition, points);
    const int dim = points.dim;
    disc.cell_rules.resize(disc.partition.cells.size());
    parallel_for(disc.cell_rules.size(), [&](std::size_t i) {
        disc.cell_rules[i] = cell_quadrature(disc.partition.cells[i], dim);
    });
    disc.face_rules.resize(disc.partition.faces.size());
    parallel_for(disc.face_rules.size(), [&](std::size_t f) {
        disc.face_rules[f] = face_quadrature(disc.partition.faces[f], dim);
    });
    disc.points = std::move(points);
    return disc;
}

namespace {

using Triplet = Eigen::Triplet<double>;

struct LocalMatrix {
    std::vector<int> dofs;
    Eigen::MatrixXd M;
};

// Point slightly inside `cell`, used to sample materials on faces so that
// interfaces resolve to the owning side.
Point inside(const Discretization& disc, int cell, const Point& x) {
    const Point& c = disc.partition.cells[static_cast<std::size_t>(cell)].centroid;
    return x + 1e-9 * (c - x);
}

Eigen::MatrixXd k_of(const MaterialField& m, const Point& x, int dim) { return m.k(x).topLeftCorner(dim, dim); }

// Union of two supports with index maps into it.
std::vector<int> merge_supports(const std::vector<int>& a, const std::vector<int>& b, std::vector<int>& ia,
                                std::vector<int>& ib) {
    std::vector<int> u = a;
    for (int x : b)
        if (std::find(u.begin(), u.end(), x) == u.end()) u.push_back(x);
    ia.resize(a.size());
    ib.resize(b.size());
    for (std::size_t k = 0; k < a.size(); ++k) ia[k] = static_cast<int>(k);
    for (std::size_t k = 0; k < b.size(); ++k)
        ib[k] = static_cast<int>(std::find(u.begin(), u.end(), b[k]) - u.begin());
    return u;
}

// Symmetric local matrices contribute their upper triangle; asymmetric ones
// are scattered in full.
SparseMatrix finalize(std::size_t n, const std::vector<LocalMatrix>& sym, const std::vector<LocalMatrix>& asym) {
    std::vector<Triplet> upper;
    for (const auto& lm : sym) {
        const Eigen::MatrixXd S = 0.5 * (lm.M + lm.M.transpose());
        for (std::size_t a = 0; a < lm.dofs.size(); ++a)
            for (std::size_t b = 0; b < lm.dofs.size(); ++b) {
                const int i = lm.dofs[a];
                const int j = lm.dofs[b];
                if (i <= j) upper.emplace_back(i, j, S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            }
    }
    const auto N = static_cast<Eigen::Index>(n);
    SparseMatrix U(N, N);
    U.setFromTriplets(upper.begin(), upper.end());
    SparseMatrix strict = U.triangularView<Eigen::StrictlyUpper>();
    SparseMatrix A = U + SparseMatrix(strict.transpose());
    if (!asym.empty()) {
        std::vector<Triplet> full;
        for (const auto& lm : asym)
            for (std::size_t a = 0; a < lm.dofs.size(); ++a)
                for (std::size_t b = 0; b < lm.dofs.size(); ++b)
                    full.emplace_back(lm.dofs[a], lm.dofs[b],
                                      lm.M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        SparseMatrix S(N, N);
        S.setFromTriplets(full.begin(), full.end());
        A += S;
    }
    A.makeCompressed();
    return A;
}

// Dirichlet face handling for the given options.
struct DirichletPolicy {
    bool active = false;       // any K_D/q_D contribution
    bool consistency = false;  // flux pair
    bool penalty = false;      // eta2 term
};

std::vector<char> constrained_mask(const Discretization& disc, const ProblemSpec& problem) {
    std::vector<char> mask(disc.size(), 0);
    if (problem.dirichlet_mode == DirichletMode::Strong)
        for (const auto& sc : strong_constraints(disc.partition, disc.points, problem))
            mask[static_cast<std::size_t>(sc.point)] = 1;
    return mask;
}

DirichletPolicy dirichlet_policy(const Face& f, const std::vector<char>& mask, const AssemblyOptions& opt) {
    DirichletPolicy p;
    if (f.kind != FaceKind::Dirichlet) return p;
    if (!mask[static_cast<std::size_t>(f.cell)]) return {true, true, true};
    switch (opt.strong_face_terms) {
        case StrongFaceTerms::Skip: return p;
        case StrongFaceTerms::Consistency: return {true, true, false};
        case StrongFaceTerms::Full: return {true, true, true};
    }
    return p;
}

}  // namespace

SparseMatrix assemble_capacity(const Discretization& disc, const MaterialField& material) {
    const std::size_t n = disc.size();
    std::vector<LocalMatrix> local(n);
    parallel_for(n, [&](std::size_t i) {
        const int id = static_cast<int>(i);
        const auto& op = disc.ops[i];
        const auto& rule = disc.cell_rules[i];
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op.size()), static_cast<Eigen::Index>(op.size()));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::RowVectorXd N = shape_row(rule.points[q], id, op, disc.points);
            M.noalias() += rule.weights[q] * material.rho_c(rule.points[q]) * N.transpose() * N;
        }
        local[i] = {op.support, std::move(M)};
    });
    return finalize(n, local, {});
}

SparseMatrix assemble_conductivity(const Discretization& disc, const ProblemSpec& problem,
                                   const AssemblyOptions& options, bool* k_symmetric) {
    if (!(options.eta1 > 0.0)) throw InvalidPenalty("eta1 must be positive");
    const int d = disc.dim();
    const std::size_t n = disc.size();
    const auto& part = disc.partition;
    const auto& mat = problem.material;
    const auto mask = constrained_mask(disc, problem);

    // Cell terms: K_E = B^T (int k) B.
    std::vector<LocalMatrix> cell_terms(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& op = disc.ops[i];
        const auto& rule = disc.cell_rules[i];
        Eigen::MatrixXd kint = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t q = 0; q < rule.size(); ++q) kint += rule.weights[q] * k_of(mat, rule.points[q], d);
        cell_terms[i] = {op.support, op.B.transpose() * kint * op.B};
    });

    const std::size_t nf = part.faces.size();
    std::vector<LocalMatrix> face_terms(nf);
    std::vector<LocalMatrix> sym_faces(nf);
    std::vector<char> has_sym_face(nf, 0);
    parallel_for(nf, [&](std::size_t fi) {
        const Face& f = part.faces[fi];
        const auto& rule = disc.face_rules[fi];
        const Eigen::VectorXd n1 = f.normal.head(d);
        if (f.is_internal()) {
            const int e1 = f.cell;
            const int e2 = f.neighbor;
            const auto& op1 = disc.ops[static_cast<std::size_t>(e1)];
            const auto& op2 = disc.ops[static_cast<std::size_t>(e2)];
            std::vector<int> i1, i2;
            std::vector<int> dofs = merge_supports(op1.support, op2.support, i1, i2);
            const auto m = static_cast<Eigen::Index>(dofs.size());
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
            const double pen = options.eta1 / f.h_e;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point& x = rule.points[q];
                const double w = rule.weights[q];
                const Eigen::RowVectorXd Nl[2] = {shape_row(x, e1, op1, disc.points), shape_row(x, e2, op2, disc.points)};
                const Eigen::MatrixXd k[2] = {k_of(mat, inside(disc, e1, x), d), k_of(mat, inside(disc, e2, x), d)};
                const Eigen::MatrixXd* B[2] = {&op1.B, &op2.B};
                const std::vector<int>* idx[2] = {&i1, &i2};
                const Eigen::VectorXd nv[2] = {n1, -n1};
                // Flux rows n_a^T k_b B_b for every pair (a, b).
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const Eigen::RowVectorXd flux_ab = nv[a].transpose() * k[b] * *B[b];   // n_a^T k_b B_b
                        const Eigen::RowVectorXd flux_ba = nv[b].transpose() * k[a] * *B[a];   // n_b^T k_a B_a
                        const double s = (a == b ? 1.0 : -1.0) * pen;
                        const Eigen::MatrixXd blk = -0.5 * w * (Nl[a].transpose() * flux_ab + flux_ba.transpose() * Nl[b]) +
                                                    s * w * Nl[a].transpose() * Nl[b];
                        for (Eigen::Index r = 0; r < blk.rows(); ++r)
                            for (Eigen::Index c = 0; c < blk.cols(); ++c)
                                M((*idx[a])[static_cast<std::size_t>(r)], (*idx[b])[static_cast<std::size_t>(c)]) += blk(r, c);
                    }
            }
            face_terms[fi] = {std::move(dofs), std::move(M)};
            return;
        }

        const int e = f.cell;
        const auto& op = disc.ops[static_cast<std::size_t>(e)];
        const auto m = static_cast<Eigen::Index>(op.size());
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
        bool any = false;
        if (f.kind == FaceKind::Dirichlet) {
            const DirichletPolicy pol = dirichlet_policy(f, mask, options);
            if (pol.active) {
                any = true;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const Point& x = rule.points[q];
                    const double w = rule.weights[q];
                    const Eigen::RowVectorXd N = shape_row(x, e, op, disc.points);
                    if (pol.consistency) {
                        const Eigen::RowVectorXd flux = n1.transpose() * k_of(mat, inside(disc, e, x), d) * op.B;
                        M.noalias() -= w * (N.transpose() * flux + flux.transpose() * N);
                    }
                    if (pol.penalty) M.noalias() += (options.eta2 / f.h_e) * w * N.transpose() * N;
                }
            }
        } else if (f.kind == FaceKind::Robin) {
            any = true;
            const auto& reg = problem.regions[static_cast<std::size_t>(f.region)];
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Eigen::RowVectorXd N = shape_row(rule.points[q], e, op, disc.points);
                M.noalias() += rule.weights[q] * reg.h(rule.points[q]) * N.transpose() * N;
            }
        } else if (f.kind == FaceKind::Symmetric) {
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point& x = rule.points[q];
                Eigen::MatrixXd k = k_of(mat, inside(disc, e, x), d);
                k.diagonal().array() -= k(0, 0);
                const Eigen::RowVectorXd N = shape_row(x, e, op, disc.points);
                S.noalias() -= rule.weights[q] * N.transpose() * (n1.transpose() * k * op.B);
            }
            if (S.cwiseAbs().maxCoeff() > 0.0) {
                sym_faces[fi] = {op.support, std::move(S)};
                has_sym_face[fi] = 1;
            }
        }
        if (any) face_terms[fi] = {op.support, std::move(M)};
    });

    std::vector<LocalMatrix> sym = std::move(cell_terms);
    for (auto& lm : face_terms)
        if (!lm.dofs.empty()) sym.push_back(std::move(lm));
    std::vector<LocalMatrix> asym;
    for (std::size_t fi = 0; fi < nf; ++fi)
        if (has_sym_face[fi]) asym.push_back(std::move(sym_faces[fi]));
    if (k_symmetric) *k_symmetric = asym.empty();
    return finalize(n, sym, asym);
}

LoadEvaluator::LoadEvaluator(const Discretization& disc, const ProblemSpec& problem, const AssemblyOptions& options)
    : n_(disc.size()), regions_(problem.regions), source_(problem.source) {
    const int d = disc.dim();
    const auto& part = disc.partition;
    const auto& mat = problem.material;
    const auto mask = constrained_mask(disc, problem);

    if (source_)
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& op = disc.ops[i];
            const auto& rule = disc.cell_rules[i];
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Eigen::RowVectorXd N = shape_row(rule.points[q], static_cast<int>(i), op, disc.points);
                entries_.push_back({op.support, rule.weights[q] * N.transpose(), rule.points[q], -1, 1.0});
            }
        }
    for (std::size_t fi = 0; fi < part.faces.size(); ++fi) {
        const Face& f = part.faces[fi];
        if (f.is_internal() || f.kind == FaceKind::Crack || f.kind == FaceKind::Symmetric) continue;
        const DirichletPolicy pol = dirichlet_policy(f, mask, options);
        if (f.kind == FaceKind::Dirichlet && !pol.active) continue;
        const auto& op = disc.ops[static_cast<std::size_t>(f.cell)];
        const auto& rule = disc.face_rules[fi];
        const auto& reg = regions_[static_cast<std::size_t>(f.region)];
        const Eigen::VectorXd n1 = f.normal.head(d);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point& x = rule.points[q];
            const double w = rule.weights[q];
            const Eigen::RowVectorXd N = shape_row(x, f.cell, op, disc.points);
            Eigen::VectorXd coeff;
            double scale = 1.0;
            switch (f.kind) {
                case FaceKind::Dirichlet: {
                    coeff = Eigen::VectorXd::Zero(N.size());
                    if (pol.consistency)
                        coeff -= w * (n1.transpose() * k_of(mat, inside(disc, f.cell, x), d) * op.B).transpose();
                    if (pol.penalty) coeff += (options.eta2 / f.h_e) * w * N.transpose();
                    break;
                }
                case FaceKind::Neumann: coeff = w * N.transpose(); break;
                case FaceKind::Robin:
                    coeff = w * N.transpose();
                    scale = reg.h(x);
                    break;
                default: continue;
            }
            entries_.push_back({op.support, std::move(coeff), x, f.region, scale});
        }
    }
}

Vector LoadEvaluator::operator()(double t) const {
    Vector q = Vector::Zero(static_cast<Eigen::Index>(n_));
    for (const auto& e : entries_) {
        const SpaceTimeField& data = e.region < 0 ? source_ : regions_[static_cast<std::size_t>(e.region)].value;
        const double v = e.scale * data(e.x, t);
        if (v == 0.0) continue;
        for (std::size_t k = 0; k < e.support.size(); ++k) q(e.support[k]) += v * e.coeff(static_cast<Eigen::Index>(k));
    }
    return q;
}

Vector assemble_load(const Discretization& disc, const ProblemSpec& problem, const AssemblyOptions& options,
                     double t) {
    return LoadEvaluator(disc, problem, options)(t);
}

Vector SemiDiscreteSystem::q(double t) const {
    return load ? load(t) : Vector(Vector::Zero(static_cast<Eigen::Index>(n)));
}

Vector SemiDiscreteSystem::g(double t) const {
    Vector out(static_cast<Eigen::Index>(constraints.size()));
    for (std::size_t k = 0; k < constraints.size(); ++k)
        out(static_cast<Eigen::Index>(k)) = constraint_data[k](constraint_coords[k], t);
    return out;
}

SemiDiscreteSystem assemble_system(const Discretization& disc, const ProblemSpec& problem,
                                   const AssemblyOptions& options) {
    if (!(options.eta1 > 0.0)) throw InvalidPenalty("eta1 must be positive");
    const auto mask = constrained_mask(disc, problem);
    for (const auto& f : disc.partition.faces) {
        const DirichletPolicy pol = dirichlet_policy(f, mask, options);
        if (pol.penalty && !(options.eta2 > 0.0))
            throw InvalidPenalty("eta2 must be positive when Dirichlet faces are imposed by penalty");
    }
    std::vector<Point> samples;
    for (const auto& c : disc.partition.cells) samples.push_back(c.centroid);
    validate_material(problem.material, disc.dim(), samples);

    SemiDiscreteSystem sys;
    sys.n = disc.size();
    sys.C = assemble_capacity(disc, problem.material);
    sys.K = assemble_conductivity(disc, problem, options, &sys.k_symmetric);
    auto evaluator = std::make_shared<const LoadEvaluator>(disc, problem, options);
    sys.load = [evaluator](double t) { return (*evaluator)(t); };
    if (problem.dirichlet_mode == DirichletMode::Strong) {
        sys.constraints = strong_constraints(disc.partition, disc.points, problem);
        for (const auto& sc : sys.constraints) {
            sys.constraint_coords.push_back(disc.points.coords[static_cast<std::size_t>(sc.point)]);
            sys.constraint_data.push_back(problem.regions[static_cast<std::size_t>(sc.region)].value);
        }
    }
    sys.initial = Vector::Zero(static_cast<Eigen::Index>(sys.n));
    if (problem.initial)
        for (std::size_t i = 0; i < sys.n; ++i) sys.initial(static_cast<Eigen::Index>(i)) = problem.initial(disc.points.coords[i]);
    return sys;
}

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
    std::vector<int> rmap(static_cast<std::size_t>(A.rows()), -1);
    std::vector<int> cmap(static_cast<std::size_t>(A.cols()), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) rmap[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < cols.size(); ++k) cmap[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
        const int cc = cmap[static_cast<std::size_t>(c)];
        if (cc < 0) continue;
        for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
            const int rr = rmap[static_cast<std::size_t>(it.row())];
            if (rr >= 0) t.emplace_back(rr, cc, it.value());
        }
    }
    SparseMatrix S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    S.setFromTriplets(t.begin(), t.end());
    S.makeCompressed();
    return S;
}

StrongDirichletView::StrongDirichletView(const SemiDiscreteSystem& system) : system_(&system) {
    std::vector<char> is_c(system.n, 0);
    for (const auto& sc : system.constraints) {
        is_c[static_cast<std::size_t>(sc.point)] = 1;
        constrained_.push_back(sc.point);
    }
    for (std::size_t i = 0; i < system.n; ++i)
        if (!is_c[i]) free_.push_back(static_cast<int>(i));
    Cff_ = submatrix(system.C, free_, free_);
    Cfc_ = submatrix(system.C, free_, constrained_);
    Kff_ = submatrix(system.K, free_, free_);
    Kfc_ = submatrix(system.K, free_, constrained_);
}

Vector StrongDirichletView::restrict_free(const Vector& full) const {
    Vector out(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) out(static_cast<Eigen::Index>(k)) = full(free_[k]);
    return out;
}

Vector StrongDirichletView::q_free(double t) const { return restrict_free(system_->q(t)); }

Vector StrongDirichletView::expand(const Vector& free_values, const Vector& constrained_values) const {
    Vector out(static_cast<Eigen::Index>(system_->n));
    for (std::size_t k = 0; k < free_.size(); ++k) out(free_[k]) = free_values(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < constrained_.size(); ++k)
        out(constrained_[k]) = constrained_values(static_cast<Eigen::Index>(k));
    return out;
}

Vector StrongDirichletView::expand(const Vector& free_values, double t) const {
    return expand(free_values, g(t));
}

Vector StrongDirichletView::steady_rhs(double t) const {
    Vector rhs = q_free(t);
    if (!constrained_.empty()) rhs -= Kfc_ * g(t);
    return rhs;
}

Vector solve_steady(const SemiDiscreteSystem& system, double t) {
    StrongDirichletView view(system);
    if (view.n_free() == 0) return view.expand(Vector(0), t);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(view.Kff());
    if (lu.info() != Eigen::Success) throw SingularIteration("steady conductivity matrix is singular");
    const Vector uf = lu.solve(view.steady_rhs(t));
    return view.expand(uf, t);
}

}  // namespace fpm
