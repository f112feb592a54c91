#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "porofem/error.hpp"
#include "porofem/geometry.hpp"
#include "porofem/mesh.hpp"
#include "porofem/quadrature.hpp"

namespace porofem {

using Vector = Eigen::VectorXd;

/// Scalar field p(x, t) with optional gradient.
struct ScalarField {
    std::function<double(const Point&, double)> value;
    std::function<Vec3(const Point&, double)> gradient;

    [[nodiscard]] double operator()(const Point& x, double t) const { return value(x, t); }
    [[nodiscard]] bool has_gradient() const noexcept { return static_cast<bool>(gradient); }

    [[nodiscard]] static ScalarField constant(double c)
    {
        return {[c](const Point&, double) { return c; }, [](const Point&, double) { return Vec3::Zero().eval(); }};
    }
};

/// Vector field v(x, t) with optional Jacobian (row i = ∇v_i).
/// Components beyond the mesh dimension are ignored.
struct VectorField {
    std::function<Vec3(const Point&, double)> value;
    std::function<Mat3(const Point&, double)> gradient;

    [[nodiscard]] Vec3 operator()(const Point& x, double t) const { return value(x, t); }
    [[nodiscard]] bool has_gradient() const noexcept { return static_cast<bool>(gradient); }

    [[nodiscard]] static VectorField constant(const Vec3& c)
    {
        return {[c](const Point&, double) { return c; }, [](const Point&, double) { return Mat3::Zero().eval(); }};
    }
    [[nodiscard]] static VectorField zero() { return constant(Vec3::Zero()); }
};

/// Prescribed normal flux q_D(x, n, t) on Γ_f.
using FluxData = std::function<double(const Point&, const Vec3&, double)>;

/// Barycentric basis gradients of a P1 cell; Σ_a ∇λ_a = 0.
[[nodiscard]] inline std::array<Vec3, 4> p1_reference_gradients(std::span<const Point> pts, int dim)
{
    return simplex_geometry(pts, dim).gradients;
}

/// Nodal interpolant of a vector field; entry d·v + k is component k at vertex v.
[[nodiscard]] inline Vector interpolate_p1(const Mesh& mesh, const VectorField& field, double t)
{
    const int d = mesh.dim();
    Vector out(static_cast<Eigen::Index>(d) * mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3 val = field(mesh.vertex(v), t);
        for (int k = 0; k < d; ++k) out[d * v + k] = val[k];
    }
    return out;
}

[[nodiscard]] inline Vector interpolate_p1(const Mesh& mesh, const ScalarField& field, double t)
{
    Vector out(mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v) out[v] = field(mesh.vertex(v), t);
    return out;
}

/// Value of a vector P1 function at barycentric coordinates `lam` of cell c.
[[nodiscard]] inline Vec3 evaluate_p1(const Mesh& mesh, const Vector& coeffs, Index c,
                                      const std::array<double, 4>& lam)
{
    const int d = mesh.dim();
    const Cell& cell = mesh.cell(c);
    Vec3 out = Vec3::Zero();
    for (int a = 0; a <= d; ++a)
        for (int k = 0; k < d; ++k) out[k] += lam[a] * coeffs[d * cell[a] + k];
    return out;
}

/// Cellwise (constant) Jacobian of a vector P1 function; row k = ∇(component k).
[[nodiscard]] inline Mat3 gradient_p1(const Mesh& mesh, const Vector& coeffs, const SimplexGeometry& geo, Index c)
{
    const int d = mesh.dim();
    const Cell& cell = mesh.cell(c);
    Mat3 grad = Mat3::Zero();
    for (int a = 0; a <= d; ++a)
        for (int k = 0; k < d; ++k) grad.row(k) += coeffs[d * cell[a] + k] * geo.gradients[a].transpose();
    return grad;
}

/// L2 projection onto piecewise constants: the cell average, by quadrature.
[[nodiscard]] inline Vector project_p0(const Mesh& mesh, const ScalarField& field, double t, int degree = 4)
{
    const QuadRule q = simplex_rule(mesh.dim(), degree);
    const double ref_measure = mesh.dim() == 2 ? 0.5 : 1.0 / 6.0;
    Vector out(mesh.num_cells());
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const SimplexGeometry geo = mesh.cell_geometry(c);
        double sum = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * field(geo.map(q.points[i]), t);
        out[c] = sum / ref_measure;
    }
    return out;
}

/// Numbering of the monolithic unknown vector [u | z | p | mean multiplier].
///
/// Vector unknowns are vertex-interleaved: dof d·v + k of a block is
/// component k at vertex v.
struct DofLayout {
    int dim = 0;
    Index n_vertices = 0;
    Index n_cells = 0;
    bool pressure_mean_constraint = false;

    DofLayout() = default;
    DofLayout(const Mesh& mesh, bool mean_constraint)
        : dim(mesh.dim()), n_vertices(mesh.num_vertices()), n_cells(mesh.num_cells()),
          pressure_mean_constraint(mean_constraint)
    {
    }

    [[nodiscard]] Index n_u() const noexcept { return dim * n_vertices; }
    [[nodiscard]] Index n_z() const noexcept { return dim * n_vertices; }
    [[nodiscard]] Index n_p() const noexcept { return n_cells; }
    [[nodiscard]] Index u_offset() const noexcept { return 0; }
    [[nodiscard]] Index z_offset() const noexcept { return n_u(); }
    [[nodiscard]] Index p_offset() const noexcept { return n_u() + n_z(); }
    [[nodiscard]] Index multiplier() const noexcept { return n_u() + n_z() + n_p(); }
    [[nodiscard]] Index size() const noexcept { return multiplier() + (pressure_mean_constraint ? 1 : 0); }

    [[nodiscard]] Index u_dof(Index v, int k) const noexcept { return u_offset() + dim * v + k; }
    [[nodiscard]] Index z_dof(Index v, int k) const noexcept { return z_offset() + dim * v + k; }
    [[nodiscard]] Index p_dof(Index c) const noexcept { return p_offset() + c; }
};

/// Essential condition on one vector-P1 dof (block-local numbering d·v + k).
struct DofConstraint {
    Index dof = -1;
    double value = 0.0;

    friend bool operator==(const DofConstraint&, const DofConstraint&) = default;
};

/// Essential condition z(v)·n = value at a vertex, n the unit
/// vertex-averaged outward normal of the adjacent Γ_f facets.
struct NormalFluxConstraint {
    Index vertex = -1;
    Vec3 normal = Vec3::Zero();
    double value = 0.0;
};

namespace detail {

inline void require_markers(const Mesh& mesh, const std::set<int>& tags, const char* who)
{
    for (int tag : tags)
        if (!mesh.has_marker(tag)) throw InvalidArgument(std::string(who) + ": unknown boundary marker " + std::to_string(tag));
}

inline std::set<Index> vertices_on(const Mesh& mesh, const std::set<int>& tags)
{
    std::set<Index> out;
    for (const auto& [f, tag] : mesh.boundary_markers()) {
        if (!tags.contains(tag)) continue;
        const FacetRecord& rec = mesh.facet(f);
        for (int a = 0; a < mesh.dim(); ++a) out.insert(rec.vertices[a]);
    }
    return out;
}

}  // namespace detail

/// Dirichlet constraints for every vertex on facets carrying one of `tags`,
/// sorted by dof. `components[k]` selects which displacement components are
/// prescribed (all by default). Throws InvalidArgument for unknown markers.
[[nodiscard]] inline std::vector<DofConstraint> collect_dirichlet(const Mesh& mesh, const std::set<int>& tags,
                                                                  const VectorField& field, double t,
                                                                  std::array<bool, 3> components = {true, true, true})
{
    detail::require_markers(mesh, tags, "collect_dirichlet");
    const int d = mesh.dim();
    std::vector<DofConstraint> out;
    for (Index v : detail::vertices_on(mesh, tags)) {
        const Vec3 val = field(mesh.vertex(v), t);
        for (int k = 0; k < d; ++k)
            if (components[k]) out.push_back({d * v + k, val[k]});
    }
    return out;
}

/// Normal-flux constraints z·n̄ = q_D(x, n̄, t) at every vertex of the tagged
/// facets, n̄ the measure-weighted average of the adjacent tagged facet normals.
[[nodiscard]] inline std::vector<NormalFluxConstraint> collect_normal_flux(const Mesh& mesh, const std::set<int>& tags,
                                                                           const FluxData& flux, double t)
{
    detail::require_markers(mesh, tags, "collect_normal_flux");
    std::map<Index, Vec3> normal_sum;
    for (const auto& [f, tag] : mesh.boundary_markers()) {
        if (!tags.contains(tag)) continue;
        const FacetRecord& rec = mesh.facet(f);
        for (int a = 0; a < mesh.dim(); ++a) {
            auto [it, inserted] = normal_sum.try_emplace(rec.vertices[a], Vec3::Zero());
            it->second += rec.measure * rec.normals[0];
        }
    }
    std::vector<NormalFluxConstraint> out;
    out.reserve(normal_sum.size());
    for (const auto& [v, sum] : normal_sum) {
        const double len = sum.norm();
        if (!(len > 1e-12 * sum.cwiseAbs().sum() + 1e-300))
            throw InvalidArgument("collect_normal_flux: vertex " + std::to_string(v) + " has no well-defined normal");
        const Vec3 n = sum / len;
        out.push_back({v, n, flux(mesh.vertex(v), n, t)});
    }
    return out;
}

}  // namespace porofem
