#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef POROFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "porofem/assembly.hpp"
#include "porofem/error.hpp"
#include "porofem/fespace.hpp"
#include "porofem/problem.hpp"

namespace porofem {

struct SystemMatrices {
    SparseMatrix A;
    SparseMatrix M;
    SparseMatrix B;
    SparseMatrix Q;
    SparseMatrix J;
};

[[nodiscard]] inline SystemMatrices assemble_system(const Mesh& mesh, const MaterialParams& params)
{
    params.validate(mesh.dim());
    return {assemble_elasticity(mesh, params), assemble_darcy_mass(mesh, params), assemble_divergence(mesh),
            assemble_pressure_mass(mesh), assemble_jump_stabilization(mesh, params.delta)};
}

struct State {
    double t = 0.0;
    Vector u;
    Vector z;
    Vector p;

    [[nodiscard]] static State zero(const DofLayout& layout, double t = 0.0)
    {
        return {t, Vector::Zero(layout.n_u()), Vector::Zero(layout.n_z()), Vector::Zero(layout.n_p())};
    }
};

using Trajectory = std::vector<State>;

/// Called after every step with (n, t_n, state); n = 0 is the initial state.
using StepObserver = std::function<void(int, double, const State&)>;

/// Unconstrained monolithic step system.
struct BlockSystem {
    SparseMatrix K;
    Vector rhs;
    DofLayout layout;
    double dt = 0.0;
};

// ---------------------------------------------------------------------------
// Direct solver.

/// Sparse LU (UMFPACK when available, Eigen SparseLU otherwise) with a
/// residual check and a few steps of iterative refinement.
class DirectSolver {
public:
    static constexpr double residual_tolerance = 1e-10;
    static constexpr int max_refinements = 3;

    DirectSolver() = default;
    explicit DirectSolver(const SparseMatrix& K) { factorize(K); }

    [[nodiscard]] static const char* backend_name() noexcept
    {
#ifdef POROFEM_HAVE_UMFPACK
        return "umfpack";
#else
        return "eigen-sparselu";
#endif
    }

    /// Throws SingularSystem for an empty row/column or a failed factorization.
    void factorize(const SparseMatrix& K)
    {
        if (K.rows() != K.cols()) throw InvalidArgument("DirectSolver: matrix must be square");
        check_structure(K);
        K_ = K;
        K_.makeCompressed();
        lu_ = std::make_unique<Backend>();
        lu_->compute(K_);
        if (lu_->info() != Eigen::Success) {
            lu_.reset();
            throw SingularSystem("sparse factorization failed: matrix is numerically singular");
        }
    }

    [[nodiscard]] bool factorized() const noexcept { return static_cast<bool>(lu_); }
    [[nodiscard]] const SparseMatrix& matrix() const noexcept { return K_; }
    [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

    [[nodiscard]] Vector solve(const Vector& rhs)
    {
        if (!lu_) throw InvalidArgument("DirectSolver: not factorized");
        if (rhs.size() != K_.rows()) throw InvalidArgument("DirectSolver: rhs size mismatch");
        if (!rhs.allFinite()) throw InvalidArgument("DirectSolver: rhs is not finite");
        const double bnorm = rhs.norm();
        if (bnorm == 0.0) {
            last_residual_ = 0.0;
            return Vector::Zero(rhs.size());
        }
        Vector x = lu_->solve(rhs);
        Vector r = rhs - K_ * x;
        last_residual_ = r.norm() / bnorm;
        for (int it = 0; it < max_refinements && !(last_residual_ <= 0.01 * residual_tolerance); ++it) {
            const Vector dx = lu_->solve(r);
            const Vector x_new = x + dx;
            const Vector r_new = rhs - K_ * x_new;
            const double res_new = r_new.norm() / bnorm;
            if (!(res_new < last_residual_)) break;
            x = x_new;
            r = r_new;
            last_residual_ = res_new;
        }
        if (!(last_residual_ <= residual_tolerance) || !x.allFinite()) {
            Eigen::Index worst = 0;
            r.cwiseAbs().maxCoeff(&worst);
            throw SingularSystem("relative residual " + std::to_string(last_residual_) + " exceeds tolerance",
                                 static_cast<std::ptrdiff_t>(worst));
        }
        return x;
    }

private:
#ifdef POROFEM_HAVE_UMFPACK
    using Backend = Eigen::UmfPackLU<SparseMatrix>;
#else
    using Backend = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
#endif

    static void check_structure(const SparseMatrix& K)
    {
        std::vector<char> row_hit(static_cast<std::size_t>(K.rows()), 0);
        for (Eigen::Index j = 0; j < K.outerSize(); ++j) {
            bool col_hit = false;
            for (SparseMatrix::InnerIterator it(K, j); it; ++it) {
                if (!std::isfinite(it.value()))
                    throw InvalidArgument("DirectSolver: non-finite entry at (" + std::to_string(it.row()) + ", " +
                                          std::to_string(j) + ")");
                if (it.value() != 0.0) {
                    col_hit = true;
                    row_hit[static_cast<std::size_t>(it.row())] = 1;
                }
            }
            if (!col_hit) throw SingularSystem("structurally singular: empty column " + std::to_string(j), j);
        }
        for (std::size_t i = 0; i < row_hit.size(); ++i)
            if (!row_hit[i])
                throw SingularSystem("structurally singular: empty row " + std::to_string(i),
                                     static_cast<std::ptrdiff_t>(i));
    }

    SparseMatrix K_;
    std::unique_ptr<Backend> lu_;
    double last_residual_ = 0.0;
};

/// One-shot factorize and solve.
[[nodiscard]] inline Vector sparse_solve(const SparseMatrix& K, const Vector& rhs)
{
    DirectSolver solver(K);
    return solver.solve(rhs);
}

[[nodiscard]] inline Vector sparse_solve(const BlockSystem& system) { return sparse_solve(system.K, system.rhs); }

// ---------------------------------------------------------------------------
// Block system.

namespace detail {

inline void add_block(std::vector<Triplet>& trips, const SparseMatrix& m, Index row0, Index col0, double scale,
                      bool transpose = false)
{
    if (scale == 0.0) return;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            const auto r = static_cast<Index>(it.row());
            const auto c = static_cast<Index>(j);
            if (transpose)
                trips.emplace_back(row0 + c, col0 + r, scale * it.value());
            else
                trips.emplace_back(row0 + r, col0 + c, scale * it.value());
        }
    }
}

inline void check_layout(const SystemMatrices& m, const DofLayout& layout)
{
    if (m.A.rows() != layout.n_u() || m.M.rows() != layout.n_z() || m.B.rows() != layout.n_p() ||
        m.B.cols() != layout.n_u() || m.Q.rows() != layout.n_p() || m.J.rows() != layout.n_p())
        throw InvalidArgument("block system: matrix sizes do not match the dof layout");
}

}  // namespace detail

/// Symmetric step matrix
///   [ A    0      αBᵀ        ]
///   [ 0    Δt M   Δt Bᵀ      ]
///   [ αB   Δt B   -(c0Q + J) ]
/// plus a mean-pressure multiplier row/column of cell volumes when the
/// layout requests it. With `undrained` the flux block is replaced by the
/// identity and decoupled, which forces z = 0.
[[nodiscard]] inline SparseMatrix step_matrix(const SystemMatrices& m, const MaterialParams& params,
                                              const DofLayout& layout, double dt, bool undrained = false)
{
    if (!(dt > 0.0)) throw InvalidArgument("step_matrix: dt must be positive");
    detail::check_layout(m, layout);
    const Index ou = layout.u_offset();
    const Index oz = layout.z_offset();
    const Index op = layout.p_offset();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(m.A.nonZeros() + m.M.nonZeros() + 4 * m.B.nonZeros() + m.J.nonZeros() +
                                           m.Q.nonZeros() + 2 * layout.n_p()));
    detail::add_block(trips, m.A, ou, ou, 1.0);
    detail::add_block(trips, m.B, ou, op, params.alpha, true);
    detail::add_block(trips, m.B, op, ou, params.alpha);
    if (undrained) {
        for (Index i = 0; i < layout.n_z(); ++i) trips.emplace_back(oz + i, oz + i, 1.0);
    } else {
        detail::add_block(trips, m.M, oz, oz, dt);
        detail::add_block(trips, m.B, oz, op, dt, true);
        detail::add_block(trips, m.B, op, oz, dt);
    }
    detail::add_block(trips, m.Q, op, op, -params.c0);
    detail::add_block(trips, m.J, op, op, -1.0);
    if (layout.pressure_mean_constraint) {
        const Index mu = layout.multiplier();
        for (Index c = 0; c < layout.n_p(); ++c) {
            const double vol = m.Q.coeff(c, c);
            trips.emplace_back(mu, op + c, vol);
            trips.emplace_back(op + c, mu, vol);
        }
    }
    return detail::from_triplets(layout.size(), layout.size(), trips);
}

/// Right-hand side matching step_matrix:
///   r_u = F_u,  r_z = Δt F_z,  r_p = -Δt G + αB u⁻ - (c0Q + J) p⁻,  r_λ = 0.
[[nodiscard]] inline Vector step_rhs(const SystemMatrices& m, const MaterialParams& params, const DofLayout& layout,
                                     const LoadVectors& loads, const State& prev, double dt, bool undrained = false)
{
    if (!(dt > 0.0)) throw InvalidArgument("step_rhs: dt must be positive");
    detail::check_layout(m, layout);
    if (prev.u.size() != layout.n_u() || prev.z.size() != layout.n_z() || prev.p.size() != layout.n_p())
        throw InvalidArgument("step_rhs: previous state does not match the layout");
    Vector rhs = Vector::Zero(layout.size());
    rhs.segment(layout.u_offset(), layout.n_u()) = loads.u;
    if (!undrained) rhs.segment(layout.z_offset(), layout.n_z()) = dt * loads.z;
    Vector rp = params.alpha * (m.B * prev.u) - m.J * prev.p - params.c0 * (m.Q * prev.p);
    if (!undrained) rp -= dt * loads.p;
    rhs.segment(layout.p_offset(), layout.n_p()) = rp;
    return rhs;
}

[[nodiscard]] inline BlockSystem build_block_system(const SystemMatrices& m, const LoadVectors& loads,
                                                    const State& prev, double dt, const MaterialParams& params,
                                                    const DofLayout& layout)
{
    return {step_matrix(m, params, layout, dt), step_rhs(m, params, layout, loads, prev, dt), layout, dt};
}

/// Orthonormal frame whose first row is n.
[[nodiscard]] inline Mat3 normal_frame(const Vec3& n, int dim)
{
    Mat3 R = Mat3::Zero();
    R.row(0) = n.transpose();
    if (dim == 2) {
        R.row(1) = Vec3(-n.y(), n.x(), 0.0).transpose();
        return R;
    }
    Eigen::Index axis = 0;
    n.cwiseAbs().minCoeff(&axis);
    Vec3 e = Vec3::Zero();
    e[axis] = 1.0;
    const Vec3 t1 = (e - e.dot(n) * n).normalized();
    R.row(1) = t1.transpose();
    R.row(2) = n.cross(t1).transpose();
    return R;
}

/// Global change of basis x = T x̂ rotating the flux unknowns of each
/// constrained vertex into its normal frame, so that x̂ at z_dof(v, 0) is z·n.
[[nodiscard]] inline SparseMatrix flux_rotation(const DofLayout& layout,
                                                const std::vector<NormalFluxConstraint>& constraints)
{
    const int d = layout.dim;
    std::vector<char> rotated(static_cast<std::size_t>(layout.n_vertices), 0);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(layout.size()) + constraints.size() * d * d);
    for (const auto& c : constraints) {
        if (rotated.at(static_cast<std::size_t>(c.vertex)))
            throw InvalidArgument("flux_rotation: vertex " + std::to_string(c.vertex) + " constrained twice");
        rotated[static_cast<std::size_t>(c.vertex)] = 1;
        const Mat3 R = normal_frame(c.normal, d);
        // z_k = Σ_j R(j, k) ẑ_j
        for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j)
                if (R(j, k) != 0.0) trips.emplace_back(layout.z_dof(c.vertex, k), layout.z_dof(c.vertex, j), R(j, k));
    }
    for (Index i = 0; i < layout.size(); ++i) {
        const bool in_z = i >= layout.z_offset() && i < layout.p_offset();
        if (in_z && rotated[static_cast<std::size_t>((i - layout.z_offset()) / d)]) continue;
        trips.emplace_back(i, i, 1.0);
    }
    return detail::from_triplets(layout.size(), layout.size(), trips);
}

/// Exactly symmetric part (K + Kᵀ)/2.
[[nodiscard]] inline SparseMatrix symmetrized(const SparseMatrix& K)
{
    const SparseMatrix Kt = K.transpose();
    SparseMatrix S = 0.5 * (K + Kt);
    S.prune(0.0);
    S.makeCompressed();
    return S;
}

/// u^T A u + p^T J p.
[[nodiscard]] inline double discrete_energy(const SystemMatrices& m, const State& s)
{
    return s.u.dot(m.A * s.u) + s.p.dot(m.J * s.p);
}

// ---------------------------------------------------------------------------
// Constrained time stepping.

/// Factorized step operator for a fixed problem and time step. Essential
/// conditions (displacement components and rotated normal fluxes) are
/// eliminated once; each step only rebuilds the right-hand side.
class TimeStepper {
public:
    TimeStepper(const ProblemDefinition& problem, double dt, bool undrained = false)
        : problem_(problem), layout_(problem.layout()), dt_(dt), undrained_(undrained)
    {
        validate_boundary_partition(problem);
        mats_ = assemble_system(problem.mesh, problem.params);
        data_ = load_data(problem);
        K_ = porofem::step_matrix(mats_, problem.params, layout_, dt, undrained);

        const double t_ref = dt;
        u_dofs_.clear();
        for (const auto& c : displacement_constraints(problem, t_ref)) u_dofs_.push_back(c.dof);
        if (!undrained) flux_ = flux_constraints(problem, t_ref);
        T_ = flux_rotation(layout_, flux_);
        const SparseMatrix Tt = T_.transpose();
        const SparseMatrix rotated = Tt * K_ * T_;
        Kr_ = symmetrized(rotated);

        std::vector<Index> dofs;
        for (Index dof : u_dofs_) dofs.push_back(layout_.u_offset() + dof);
        for (const auto& c : flux_) dofs.push_back(layout_.z_dof(c.vertex, 0));
        elim_ = DirichletElimination(Kr_, dofs);
        solver_.factorize(elim_.matrix());
    }

    [[nodiscard]] const SystemMatrices& matrices() const noexcept { return mats_; }
    [[nodiscard]] const DofLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    /// Unconstrained symmetric step matrix.
    [[nodiscard]] const SparseMatrix& step_matrix() const noexcept { return K_; }
    /// Rotated, eliminated matrix handed to the factorization.
    [[nodiscard]] const SparseMatrix& constrained_matrix() const noexcept { return elim_.matrix(); }
    [[nodiscard]] double last_residual() const noexcept { return solver_.last_residual(); }

    /// Advance from `prev` to time t (data evaluated at t).
    [[nodiscard]] State step(const State& prev, double t)
    {
        const LoadVectors loads = assemble_loads(problem_.mesh, data_, t);
        const Vector rhs = step_rhs(mats_, problem_.params, layout_, loads, prev, dt_, undrained_);
        const Vector rhs_rot = T_.transpose() * rhs;

        std::vector<double> values;
        values.reserve(u_dofs_.size() + flux_.size());
        const auto uc = displacement_constraints(problem_, t);
        if (uc.size() != u_dofs_.size()) throw InvalidArgument("displacement constraint set changed over time");
        for (std::size_t i = 0; i < uc.size(); ++i) {
            if (uc[i].dof != u_dofs_[i]) throw InvalidArgument("displacement constraint set changed over time");
            values.push_back(uc[i].value);
        }
        if (!flux_.empty()) {
            const auto fc = flux_constraints(problem_, t);
            for (const auto& c : fc) values.push_back(c.value);
        }
        const Vector x_rot = solver_.solve(elim_.adjust_rhs(rhs_rot, values));
        const Vector x = T_ * x_rot;
        State s;
        s.t = t;
        s.u = x.segment(layout_.u_offset(), layout_.n_u());
        s.z = x.segment(layout_.z_offset(), layout_.n_z());
        s.p = x.segment(layout_.p_offset(), layout_.n_p());
        return s;
    }

private:
    const ProblemDefinition& problem_;
    DofLayout layout_;
    double dt_;
    bool undrained_;
    SystemMatrices mats_;
    LoadData data_;
    SparseMatrix K_;
    SparseMatrix Kr_;
    SparseMatrix T_;
    std::vector<Index> u_dofs_;
    std::vector<NormalFluxConstraint> flux_;
    DirichletElimination elim_;
    DirectSolver solver_;
};

/// Initial state: u⁰ is the a-projection of the initial displacement with
/// the Dirichlet data at t = 0, p⁰ the cell averages of the initial
/// pressure, z⁰ the nodal interpolant of the initial flux.
[[nodiscard]] inline State project_initial(const ProblemDefinition& problem)
{
    const Mesh& mesh = problem.mesh;
    const DofLayout layout = problem.layout();
    const int d = mesh.dim();
    if (!problem.u0.has_gradient()) throw InvalidArgument("project_initial: initial displacement needs a gradient");
    const MaterialParams& prm = problem.params;
    prm.validate(d);

    State s;
    s.t = 0.0;
    s.p = project_p0(mesh, problem.p0, 0.0);
    s.z = interpolate_p1(mesh, problem.z0, 0.0);

    Vector rhs = Vector::Zero(layout.n_u());
    const QuadRule q = simplex_rule(d, 4);
    const double ref = d == 2 ? 0.5 : 1.0 / 6.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const SimplexGeometry geo = mesh.cell_geometry(c);
        const Cell& cell = mesh.cell(c);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Mat3 G = problem.u0.gradient(geo.map(q.points[i]), 0.0);
            Mat3 sigma = G;
            if (prm.operator_mode == OperatorMode::full_biot) {
                double tr = 0.0;
                for (int k = 0; k < d; ++k) tr += G(k, k);
                sigma = prm.mu_s * (G + G.transpose());
                for (int k = 0; k < d; ++k) sigma(k, k) += prm.lambda * tr;
            }
            const double w = q.weights[i] * geo.volume / ref;
            for (int a = 0; a <= d; ++a)
                for (int k = 0; k < d; ++k) rhs[d * cell[a] + k] += w * dot_d(sigma.row(k).transpose(), geo.gradients[a], d);
        }
    }

    const auto cs = displacement_constraints(problem, 0.0);
    if (cs.empty())
        throw SingularSystem("project_initial: no displacement constraint; the projection has rigid-body modes. "
                             "Prescribe a displacement on part of the boundary or pin rigid motions");
    SparseMatrix A = assemble_elasticity(mesh, prm);
    apply_dirichlet(A, rhs, cs);
    s.u = sparse_solve(A, rhs);
    return s;
}

/// March backward Euler from `initial` for problem.num_steps() steps.
/// Solver failures are rethrown as SolverError carrying the step index.
[[nodiscard]] inline Trajectory backward_euler_run(const ProblemDefinition& problem, const State& initial,
                                                   const StepObserver& observer = {}, bool keep_states = true)
{
    const int n_steps = problem.num_steps();
    const DofLayout layout = problem.layout();
    if (initial.u.size() != layout.n_u() || initial.z.size() != layout.n_z() || initial.p.size() != layout.n_p())
        throw InvalidArgument("backward_euler_run: initial state does not match the layout");
    std::unique_ptr<TimeStepper> stepper;
    try {
        stepper = std::make_unique<TimeStepper>(problem, problem.dt);
    } catch (const SingularSystem& e) {
        throw SolverError(e.what(), 0);
    }
    Trajectory traj;
    if (keep_states) traj.reserve(static_cast<std::size_t>(n_steps) + 1);
    State current = initial;
    if (observer) observer(0, current.t, current);
    if (keep_states) traj.push_back(current);
    for (int n = 1; n <= n_steps; ++n) {
        const double t = initial.t + n * problem.dt;
        try {
            current = stepper->step(current, t);
        } catch (const SingularSystem& e) {
            throw SolverError(e.what(), n);
        }
        if (observer) observer(n, t, current);
        if (keep_states) traj.push_back(current);
    }
    if (!keep_states) traj.push_back(current);
    return traj;
}

[[nodiscard]] inline Trajectory backward_euler_run(const ProblemDefinition& problem, const StepObserver& observer = {},
                                                   bool keep_states = true)
{
    return backward_euler_run(problem, project_initial(problem), observer, keep_states);
}

/// Instantaneous (undrained) response at time t: z = 0 and
///   [A αBᵀ; αB -(c0Q + J)] [u; p] = [F_u(t); αB u⁻ - (c0Q + J) p⁻].
[[nodiscard]] inline State undrained_response(const ProblemDefinition& problem, const State& prev, double t)
{
    TimeStepper stepper(problem, problem.dt, true);
    State s = stepper.step(prev, t);
    s.z.setZero();
    return s;
}

}  // namespace porofem
