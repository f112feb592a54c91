#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "porofem/error.hpp"
#include "porofem/fespace.hpp"
#include "porofem/mesh.hpp"
#include "porofem/quadrature.hpp"

namespace porofem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Displacement operator: full_biot uses 2μ_s ε(u):ε(v) + λ div u div v,
/// vector_laplacian uses ∇u:∇v (the simplified momentum equation of the
/// manufactured benchmarks).
enum class OperatorMode { full_biot, vector_laplacian };

struct MaterialParams {
    double lambda = 0.0;
    double mu_s = 1.0;
    Mat3 kappa = Mat3::Identity();  ///< permeability; only the leading dim×dim block is used
    double alpha = 1.0;
    double c0 = 0.0;
    double delta = 1.0;
    OperatorMode operator_mode = OperatorMode::full_biot;

    [[nodiscard]] static MaterialParams from_young_poisson(double young, double poisson)
    {
        if (!(young > 0.0) || !(poisson > -1.0 && poisson < 0.5))
            throw InvalidArgument("from_young_poisson: need E > 0 and -1 < nu < 0.5");
        MaterialParams p;
        p.mu_s = young / (2.0 * (1.0 + poisson));
        p.lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        return p;
    }

    void set_scalar_kappa(double k) { kappa = k * Mat3::Identity(); }

    [[nodiscard]] double aggregate_modulus() const noexcept { return lambda + 2.0 * mu_s; }

    /// Throws InvalidArgument unless μ_s > 0, λ >= 0, κ SPD, α ∈ (0, 1], c0 >= 0, δ >= 0.
    void validate(int dim) const
    {
        if (!(mu_s > 0.0)) throw InvalidArgument("MaterialParams: mu_s must be positive");
        if (!(lambda >= 0.0)) throw InvalidArgument("MaterialParams: lambda must be non-negative");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("MaterialParams: alpha must lie in (0, 1]");
        if (!(c0 >= 0.0)) throw InvalidArgument("MaterialParams: c0 must be non-negative");
        if (!(delta >= 0.0)) throw InvalidArgument("MaterialParams: delta must be non-negative");
        (void)kappa_inverse(dim);
    }

    /// Inverse of the dim×dim permeability block, exactly symmetric.
    [[nodiscard]] Mat3 kappa_inverse(int dim) const
    {
        const Eigen::MatrixXd k = kappa.topLeftCorner(dim, dim);
        if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-14 * k.cwiseAbs().maxCoeff())
            throw InvalidArgument("MaterialParams: kappa must be symmetric");
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
        if (!(eig.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("MaterialParams: kappa must be positive definite");
        const Eigen::MatrixXd inv = k.inverse();
        Mat3 out = Mat3::Zero();
        out.topLeftCorner(dim, dim) = 0.5 * (inv + inv.transpose());
        return out;
    }
};

// ---------------------------------------------------------------------------
// Element kernels. Local vector dofs are vertex-interleaved: a·d + k.

[[nodiscard]] inline double dot_d(const Vec3& a, const Vec3& b, int d)
{
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += a[k] * b[k];
    return s;
}

[[nodiscard]] inline Eigen::MatrixXd elasticity_element(const SimplexGeometry& g, const MaterialParams& p)
{
    const int d = g.dim;
    const int n = d * (d + 1);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a <= d; ++a) {
        const Vec3& ga = g.gradients[a];
        for (int b = 0; b <= d; ++b) {
            const Vec3& gb = g.gradients[b];
            const double gab = dot_d(ga, gb, d);
            for (int k = 0; k < d; ++k) {
                for (int l = 0; l < d; ++l) {
                    double v = 0.0;
                    if (p.operator_mode == OperatorMode::vector_laplacian) {
                        v = k == l ? gab : 0.0;
                    } else {
                        v = p.mu_s * ((k == l ? gab : 0.0) + ga[l] * gb[k]) + p.lambda * (ga[k] * gb[l]);
                    }
                    K(a * d + k, b * d + l) = g.volume * v;
                }
            }
        }
    }
    return K;
}

/// ∫ κ⁻¹ φ_i · φ_j on one cell, using ∫ λ_a λ_b = vol (1 + δ_ab) / ((d+1)(d+2)).
[[nodiscard]] inline Eigen::MatrixXd darcy_mass_element(const SimplexGeometry& g, const Mat3& kappa_inv)
{
    const int d = g.dim;
    const int n = d * (d + 1);
    const double scale = g.volume / ((d + 1) * (d + 2));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= d; ++b)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) M(a * d + k, b * d + l) = scale * (a == b ? 2.0 : 1.0) * kappa_inv(k, l);
    return M;
}

/// Row of B for one cell: b_(a,k) = -∫_cell ∂_k λ_a.
[[nodiscard]] inline Eigen::RowVectorXd divergence_element(const SimplexGeometry& g)
{
    const int d = g.dim;
    Eigen::RowVectorXd b(d * (d + 1));
    for (int a = 0; a <= d; ++a)
        for (int k = 0; k < d; ++k) b[a * d + k] = -g.volume * g.gradients[a][k];
    return b;
}

/// Weight of the 2×2 jump block δ h_∂K |f| [[1,-1],[-1,1]] of an interior facet.
[[nodiscard]] inline double jump_weight(const FacetRecord& f, double delta)
{
    return delta * f.size * f.measure;
}

// ---------------------------------------------------------------------------
// Global assembly.

namespace detail {

inline SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& trips)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

inline void scatter_vector_block(std::vector<Triplet>& trips, const Cell& cell, int d, const Eigen::MatrixXd& K)
{
    for (int a = 0; a <= d; ++a)
        for (int k = 0; k < d; ++k)
            for (int b = 0; b <= d; ++b)
                for (int l = 0; l < d; ++l)
                    trips.emplace_back(d * cell[a] + k, d * cell[b] + l, K(a * d + k, b * d + l));
}

}  // namespace detail

[[nodiscard]] inline SparseMatrix assemble_elasticity(const Mesh& mesh, const MaterialParams& params)
{
    const int d = mesh.dim();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_cells()) * d * d * (d + 1) * (d + 1));
    for (Index c = 0; c < mesh.num_cells(); ++c)
        detail::scatter_vector_block(trips, mesh.cell(c), d, elasticity_element(mesh.cell_geometry(c), params));
    return detail::from_triplets(d * mesh.num_vertices(), d * mesh.num_vertices(), trips);
}

/// Throws InvalidArgument for a singular or indefinite κ.
[[nodiscard]] inline SparseMatrix assemble_darcy_mass(const Mesh& mesh, const MaterialParams& params)
{
    const int d = mesh.dim();
    const Mat3 kinv = params.kappa_inverse(d);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_cells()) * d * d * (d + 1) * (d + 1));
    for (Index c = 0; c < mesh.num_cells(); ++c)
        detail::scatter_vector_block(trips, mesh.cell(c), d, darcy_mass_element(mesh.cell_geometry(c), kinv));
    return detail::from_triplets(d * mesh.num_vertices(), d * mesh.num_vertices(), trips);
}

/// B: cells × vector-P1 dofs, b_ij = -∫ ψ_i ∇·φ_j.
[[nodiscard]] inline SparseMatrix assemble_divergence(const Mesh& mesh)
{
    const int d = mesh.dim();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_cells()) * d * (d + 1));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cell(c);
        const Eigen::RowVectorXd b = divergence_element(mesh.cell_geometry(c));
        for (int a = 0; a <= d; ++a)
            for (int k = 0; k < d; ++k) trips.emplace_back(c, d * cell[a] + k, b[a * d + k]);
    }
    return detail::from_triplets(mesh.num_cells(), d * mesh.num_vertices(), trips);
}

/// Q = diag(cell volumes).
[[nodiscard]] inline SparseMatrix assemble_pressure_mass(const Mesh& mesh)
{
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_cells()));
    for (Index c = 0; c < mesh.num_cells(); ++c) trips.emplace_back(c, c, mesh.cell_geometry(c).volume);
    return detail::from_triplets(mesh.num_cells(), mesh.num_cells(), trips);
}

/// J(p, q) = δ Σ_interior facets h_f |f| [p][q]. Boundary facets contribute nothing.
///
/// Facet weights are rounded to a common binary grid (2^-48 of the largest
/// weight), so every row sum is exact in floating point and J·1 = 0 holds
/// bitwise.
[[nodiscard]] inline SparseMatrix assemble_jump_stabilization(const Mesh& mesh, double delta)
{
    if (!(delta >= 0.0)) throw InvalidArgument("assemble_jump_stabilization: delta must be non-negative");
    if (!mesh.has_facets()) throw InvalidArgument("assemble_jump_stabilization: facets not built");
    double w_max = 0.0;
    for (const FacetRecord& f : mesh.facets())
        if (f.interior) w_max = std::max(w_max, jump_weight(f, delta));
    const double quantum = w_max > 0.0 ? std::ldexp(1.0, std::ilogb(w_max) - 48) : 0.0;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_facets()) * 4);
    for (const FacetRecord& f : mesh.facets()) {
        if (!f.interior || w_max == 0.0) continue;
        const double w = std::round(jump_weight(f, delta) / quantum) * quantum;
        const Index t = f.cells[0];
        const Index s = f.cells[1];
        trips.emplace_back(t, t, w);
        trips.emplace_back(s, s, w);
        trips.emplace_back(t, s, -w);
        trips.emplace_back(s, t, -w);
    }
    return detail::from_triplets(mesh.num_cells(), mesh.num_cells(), trips);
}

// ---------------------------------------------------------------------------
// Load vectors.

struct TractionLoad {
    int marker = 0;
    VectorField traction;
};

struct PressureLoad {
    int marker = 0;
    ScalarField pressure;
};

/// Source and boundary data entering the right-hand sides.
struct LoadData {
    VectorField f = VectorField::zero();  ///< body force on the mixture
    VectorField b = VectorField::zero();  ///< body force on the fluid
    ScalarField g = ScalarField::constant(0.0);  ///< fluid source
    std::vector<TractionLoad> tractions;   ///< Γ_t
    std::vector<PressureLoad> pressures;   ///< Γ_p
};

struct LoadVectors {
    Vector u;  ///< (f, v) + (t_N, v)_Γt
    Vector z;  ///< (b, w) - (p_D, w·n)_Γp
    Vector p;  ///< (g, q)
};

namespace detail {

/// Calls fn(x, lam, weight) at the facet quadrature points; lam[a] is the
/// barycentric weight of facet vertex a and weights sum to the facet measure.
template <class Fn>
void for_each_facet_point(const Mesh& mesh, const FacetRecord& rec, const QuadRule& q, Fn&& fn)
{
    const int nf = mesh.dim();
    const double ref = nf == 2 ? 1.0 : 0.5;
    std::array<Point, 3> pts{};
    for (int a = 0; a < nf; ++a) pts[a] = mesh.vertex(rec.vertices[a]);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec3& s = q.points[i];
        std::array<double, 3> lam{};
        lam[0] = 1.0;
        for (int k = 0; k + 1 < nf; ++k) {
            lam[k + 1] = s[k];
            lam[0] -= s[k];
        }
        Point x = Point::Zero();
        for (int a = 0; a < nf; ++a) x += lam[a] * pts[a];
        fn(x, lam, q.weights[i] * rec.measure / ref);
    }
}

}  // namespace detail

/// Throws InvalidArgument when a boundary load names a marker absent from the mesh.
[[nodiscard]] inline LoadVectors assemble_loads(const Mesh& mesh, const LoadData& data, double t, int degree = 4)
{
    const int d = mesh.dim();
    LoadVectors out{Vector::Zero(d * mesh.num_vertices()), Vector::Zero(d * mesh.num_vertices()),
                    Vector::Zero(mesh.num_cells())};
    const QuadRule q = simplex_rule(d, degree);
    const double ref = d == 2 ? 0.5 : 1.0 / 6.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const SimplexGeometry geo = mesh.cell_geometry(c);
        const Cell& cell = mesh.cell(c);
        const double jac = geo.volume / ref;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Point x = geo.map(q.points[i]);
            const auto lam = geo.barycentric(q.points[i]);
            const double w = q.weights[i] * jac;
            const Vec3 fv = data.f(x, t);
            const Vec3 bv = data.b(x, t);
            for (int a = 0; a <= d; ++a) {
                for (int k = 0; k < d; ++k) {
                    out.u[d * cell[a] + k] += w * lam[a] * fv[k];
                    out.z[d * cell[a] + k] += w * lam[a] * bv[k];
                }
            }
            out.p[c] += w * data.g(x, t);
        }
    }

    const QuadRule fq = facet_rule(d, degree);
    for (const TractionLoad& load : data.tractions) {
        if (!mesh.has_marker(load.marker))
            throw InvalidArgument("assemble_loads: traction on unknown marker " + std::to_string(load.marker));
        for (Index f : mesh.facets_with_marker(load.marker)) {
            const FacetRecord& rec = mesh.facet(f);
            detail::for_each_facet_point(mesh, rec, fq, [&](const Point& x, const std::array<double, 3>& lam, double w) {
                const Vec3 tn = load.traction(x, t);
                for (int a = 0; a < d; ++a)
                    for (int k = 0; k < d; ++k) out.u[d * rec.vertices[a] + k] += w * lam[a] * tn[k];
            });
        }
    }
    for (const PressureLoad& load : data.pressures) {
        if (!mesh.has_marker(load.marker))
            throw InvalidArgument("assemble_loads: pressure on unknown marker " + std::to_string(load.marker));
        for (Index f : mesh.facets_with_marker(load.marker)) {
            const FacetRecord& rec = mesh.facet(f);
            const Vec3& n = rec.normals[0];
            detail::for_each_facet_point(mesh, rec, fq, [&](const Point& x, const std::array<double, 3>& lam, double w) {
                const double pd = load.pressure(x, t);
                for (int a = 0; a < d; ++a)
                    for (int k = 0; k < d; ++k) out.z[d * rec.vertices[a] + k] -= w * lam[a] * pd * n[k];
            });
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Essential conditions by symmetric elimination.

/// Sort by dof and drop exact repeats. Throws InvalidArgument on a dof
/// prescribed twice with different values or outside [0, size).
[[nodiscard]] inline std::vector<DofConstraint> merge_constraints(std::vector<DofConstraint> cs, Index size)
{
    std::sort(cs.begin(), cs.end(), [](const auto& a, const auto& b) { return a.dof < b.dof; });
    std::vector<DofConstraint> out;
    out.reserve(cs.size());
    for (const DofConstraint& c : cs) {
        if (c.dof < 0 || c.dof >= size) throw InvalidArgument("constraint dof " + std::to_string(c.dof) + " out of range");
        if (!out.empty() && out.back().dof == c.dof) {
            const double scale = std::max({1.0, std::abs(c.value), std::abs(out.back().value)});
            if (std::abs(out.back().value - c.value) > 1e-12 * scale)
                throw InvalidArgument("conflicting constraints on dof " + std::to_string(c.dof));
            continue;
        }
        out.push_back(c);
    }
    return out;
}

/// A matrix with a fixed set of dofs eliminated symmetrically.
///
/// `matrix` has the constrained rows and columns replaced by unit diagonal
/// entries. `coupling` keeps the removed columns (free rows only) so a
/// right-hand side can be adjusted for new constraint values without
/// refactorizing.
class DirichletElimination {
public:
    DirichletElimination() = default;

    DirichletElimination(const SparseMatrix& K, std::vector<Index> dofs) : dofs_(std::move(dofs))
    {
        const Index n = static_cast<Index>(K.rows());
        if (K.rows() != K.cols()) throw InvalidArgument("DirichletElimination: matrix must be square");
        std::sort(dofs_.begin(), dofs_.end());
        if (std::adjacent_find(dofs_.begin(), dofs_.end()) != dofs_.end())
            throw InvalidArgument("DirichletElimination: duplicate constrained dof");
        is_fixed_.assign(static_cast<std::size_t>(n), false);
        for (Index dof : dofs_) {
            if (dof < 0 || dof >= n) throw InvalidArgument("DirichletElimination: dof out of range");
            is_fixed_[static_cast<std::size_t>(dof)] = true;
        }

        std::vector<Triplet> kept;
        std::vector<Triplet> moved;
        kept.reserve(static_cast<std::size_t>(K.nonZeros()));
        for (Eigen::Index j = 0; j < K.outerSize(); ++j) {
            const bool col_fixed = is_fixed_[static_cast<std::size_t>(j)];
            for (SparseMatrix::InnerIterator it(K, j); it; ++it) {
                const bool row_fixed = is_fixed_[static_cast<std::size_t>(it.row())];
                if (row_fixed) continue;
                if (col_fixed)
                    moved.emplace_back(static_cast<Index>(it.row()), static_cast<Index>(j), it.value());
                else
                    kept.emplace_back(static_cast<Index>(it.row()), static_cast<Index>(j), it.value());
            }
        }
        for (Index dof : dofs_) kept.emplace_back(dof, dof, 1.0);
        matrix_ = detail::from_triplets(n, n, kept);
        coupling_ = detail::from_triplets(n, n, moved);
    }

    [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }
    [[nodiscard]] const std::vector<Index>& dofs() const noexcept { return dofs_; }
    [[nodiscard]] bool is_fixed(Index dof) const { return is_fixed_.at(static_cast<std::size_t>(dof)); }

    /// rhs - K[:, fixed] c on free rows, c on fixed rows. `values` lists the
    /// prescribed values in the order of dofs().
    [[nodiscard]] Vector adjust_rhs(const Vector& rhs, std::span<const double> values) const
    {
        if (values.size() != dofs_.size()) throw InvalidArgument("adjust_rhs: value count mismatch");
        Vector c = Vector::Zero(rhs.size());
        for (std::size_t i = 0; i < dofs_.size(); ++i) c[dofs_[i]] = values[i];
        Vector out = rhs - coupling_ * c;
        for (std::size_t i = 0; i < dofs_.size(); ++i) out[dofs_[i]] = values[i];
        return out;
    }

private:
    std::vector<Index> dofs_;
    std::vector<bool> is_fixed_;
    SparseMatrix matrix_;
    SparseMatrix coupling_;
};

/// Symmetric elimination in place: constrained rows/columns zeroed with unit
/// diagonal, known columns moved to the right-hand side.
inline void apply_dirichlet(SparseMatrix& K, Vector& rhs, const std::vector<DofConstraint>& constraints)
{
    const auto merged = merge_constraints(constraints, static_cast<Index>(K.rows()));
    std::vector<Index> dofs;
    std::vector<double> values;
    for (const auto& c : merged) {
        dofs.push_back(c.dof);
        values.push_back(c.value);
    }
    const DirichletElimination elim(K, dofs);
    rhs = elim.adjust_rhs(rhs, values);
    K = elim.matrix();
}

// ---------------------------------------------------------------------------
// Matrix utilities.

/// max |K_ij - K_ji|.
[[nodiscard]] inline double symmetry_defect(const SparseMatrix& K)
{
    const SparseMatrix Kt = K.transpose();
    const SparseMatrix diff = K - Kt;
    double m = 0.0;
    for (Eigen::Index j = 0; j < diff.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(diff, j); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

/// Coordinate text dump: one `i j value` line per stored entry, zero-based.
inline void write_coordinate(const SparseMatrix& K, std::ostream& os)
{
    os << std::setprecision(17);
    for (Eigen::Index j = 0; j < K.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(K, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

inline void write_coordinate(const SparseMatrix& K, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_coordinate: cannot open " + path);
    write_coordinate(K, os);
}

}  // namespace porofem
