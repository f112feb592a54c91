#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "porofem/assembly.hpp"
#include "porofem/error.hpp"
#include "porofem/fespace.hpp"
#include "porofem/mesh.hpp"

namespace porofem {

/// Mixture condition on one marker: prescribed displacement (Γ_d) or
/// traction (Γ_t). A displacement with some components unselected leaves
/// those components traction-free.
struct MixtureCondition {
    enum class Kind { displacement, traction };
    Kind kind = Kind::traction;
    VectorField field = VectorField::zero();
    std::array<bool, 3> components{true, true, true};

    [[nodiscard]] static MixtureCondition displacement(VectorField f, std::array<bool, 3> comps = {true, true, true})
    {
        return {Kind::displacement, std::move(f), comps};
    }
    [[nodiscard]] static MixtureCondition traction(VectorField f) { return {Kind::traction, std::move(f), {true, true, true}}; }
};

/// Fluid condition on one marker: prescribed pressure (Γ_p) or normal flux (Γ_f).
struct FluidCondition {
    enum class Kind { pressure, flux };
    Kind kind = Kind::flux;
    ScalarField pressure = ScalarField::constant(0.0);
    FluxData flux = [](const Point&, const Vec3&, double) { return 0.0; };

    [[nodiscard]] static FluidCondition pressure_bc(ScalarField p)
    {
        FluidCondition c;
        c.kind = Kind::pressure;
        c.pressure = std::move(p);
        return c;
    }
    [[nodiscard]] static FluidCondition flux_bc(FluxData q)
    {
        FluidCondition c;
        c.kind = Kind::flux;
        c.flux = std::move(q);
        return c;
    }
    [[nodiscard]] static FluidCondition no_flow() { return flux_bc([](const Point&, const Vec3&, double) { return 0.0; }); }
};

struct BoundaryAssignment {
    int marker = 0;
    MixtureCondition mixture;
    FluidCondition fluid;
};

/// Analytic reference solution; every member is optional.
struct AnalyticFields {
    std::optional<VectorField> u;
    std::optional<VectorField> z;
    std::optional<ScalarField> p;
    std::optional<ScalarField> div_z;
};

/// Everything needed to run one Biot simulation.
struct ProblemDefinition {
    std::string name;
    Mesh mesh;
    MaterialParams params;
    std::vector<BoundaryAssignment> boundary;
    std::vector<DofConstraint> extra_u_constraints;  ///< pins, block-local u dofs, constant in time
    VectorField f = VectorField::zero();
    VectorField b = VectorField::zero();
    ScalarField g = ScalarField::constant(0.0);
    VectorField u0 = VectorField::zero();
    VectorField z0 = VectorField::zero();
    ScalarField p0 = ScalarField::constant(0.0);
    double T = 1.0;
    double dt = 0.1;
    bool pressure_mean_constraint = false;
    std::optional<AnalyticFields> exact;

    [[nodiscard]] int num_steps() const
    {
        if (!(dt > 0.0) || !(T > 0.0)) throw InvalidArgument("time step and final time must be positive");
        const double n = std::round(T / dt);
        if (n < 1.0 || std::abs(n * dt - T) > 1e-9 * T)
            throw InvalidArgument("final time " + std::to_string(T) + " is not a multiple of dt " + std::to_string(dt));
        return static_cast<int>(n);
    }

    [[nodiscard]] DofLayout layout() const { return {mesh, pressure_mean_constraint}; }
};

/// Pressure is fixed only up to a constant when no facet carries a pressure
/// or traction condition.
[[nodiscard]] inline bool needs_mean_constraint(const std::vector<BoundaryAssignment>& boundary)
{
    return std::none_of(boundary.begin(), boundary.end(), [](const BoundaryAssignment& b) {
        return b.fluid.kind == FluidCondition::Kind::pressure || b.mixture.kind == MixtureCondition::Kind::traction;
    });
}

/// Throws InvalidArgument unless every boundary facet carries a marker with
/// exactly one assignment, and every assignment names a marker of the mesh.
inline void validate_boundary_partition(const ProblemDefinition& problem)
{
    const Mesh& mesh = problem.mesh;
    if (!mesh.has_facets()) throw InvalidArgument("problem mesh has no facets");
    std::map<int, int> count;
    for (const auto& b : problem.boundary) {
        if (!mesh.has_marker(b.marker))
            throw InvalidArgument("boundary condition on unknown marker " + std::to_string(b.marker));
        ++count[b.marker];
    }
    for (const auto& [tag, n] : count)
        if (n != 1) throw InvalidArgument("marker " + std::to_string(tag) + " has " + std::to_string(n) + " boundary assignments");
    for (Index f = 0; f < mesh.num_facets(); ++f) {
        if (mesh.facet(f).interior) continue;
        const auto tag = mesh.marker_of(f);
        if (!tag) throw InvalidArgument("boundary facet " + std::to_string(f) + " has no marker");
        if (!count.contains(*tag)) throw InvalidArgument("marker " + std::to_string(*tag) + " has no boundary assignment");
    }
}

[[nodiscard]] inline LoadData load_data(const ProblemDefinition& problem)
{
    LoadData data;
    data.f = problem.f;
    data.b = problem.b;
    data.g = problem.g;
    for (const auto& bc : problem.boundary) {
        if (bc.mixture.kind == MixtureCondition::Kind::traction) data.tractions.push_back({bc.marker, bc.mixture.field});
        if (bc.fluid.kind == FluidCondition::Kind::pressure) data.pressures.push_back({bc.marker, bc.fluid.pressure});
    }
    return data;
}

/// Merged displacement constraints at time t, block-local u numbering.
[[nodiscard]] inline std::vector<DofConstraint> displacement_constraints(const ProblemDefinition& problem, double t)
{
    std::vector<DofConstraint> all = problem.extra_u_constraints;
    for (const auto& bc : problem.boundary) {
        if (bc.mixture.kind != MixtureCondition::Kind::displacement) continue;
        auto cs = collect_dirichlet(problem.mesh, {bc.marker}, bc.mixture.field, t, bc.mixture.components);
        all.insert(all.end(), cs.begin(), cs.end());
    }
    return merge_constraints(std::move(all), problem.mesh.dim() * problem.mesh.num_vertices());
}

/// Normal-flux constraints at time t, one per vertex of Γ_f, sorted by vertex.
/// Normals are averaged over all flux facets adjacent to the vertex.
[[nodiscard]] inline std::vector<NormalFluxConstraint> flux_constraints(const ProblemDefinition& problem, double t)
{
    std::set<int> tags;
    for (const auto& bc : problem.boundary)
        if (bc.fluid.kind == FluidCondition::Kind::flux) tags.insert(bc.marker);
    if (tags.empty()) return {};
    // the normal is shared across markers; the value comes from the first
    // flux assignment touching the vertex
    auto out = collect_normal_flux(problem.mesh, tags, [](const Point&, const Vec3&, double) { return 0.0; }, t);
    std::map<Index, const FluxData*> owner;
    for (const auto& bc : problem.boundary) {
        if (bc.fluid.kind != FluidCondition::Kind::flux) continue;
        for (Index v : detail::vertices_on(problem.mesh, {bc.marker})) owner.try_emplace(v, &bc.fluid.flux);
    }
    for (auto& c : out) c.value = (*owner.at(c.vertex))(problem.mesh.vertex(c.vertex), c.normal, t);
    return out;
}

}  // namespace porofem
