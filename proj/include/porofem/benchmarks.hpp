#pragma once

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "porofem/analysis.hpp"
#include "porofem/assembly.hpp"
#include "porofem/bessel.hpp"
#include "porofem/error.hpp"
#include "porofem/mesh.hpp"
#include "porofem/problem.hpp"
#include "porofem/solver.hpp"

namespace porofem {

// ---------------------------------------------------------------------------
// Manufactured solutions on the unit square / cube.
//
//   p = sin(2πt) Π_j sin(2πx_j)
//   z = -∇p
//   u = c sin(2πt) (e_i Π_j f_ij),  f_ii = cos(2πx_i), f_ij = sin(2πx_j)
//   c = -1/(2dπ), so that -Δu + ∇p = 0 and ∂_t ∇·u + ∇·z = g.

struct ManufacturedFields {
    AnalyticFields exact;
    ScalarField g;
    double c = 0.0;  ///< displacement prefactor
};

[[nodiscard]] inline ManufacturedFields manufactured_fields(int dim)
{
    if (dim != 2 && dim != 3) throw InvalidArgument("manufactured_fields: dim must be 2 or 3");
    constexpr double k = 2.0 * std::numbers::pi;
    const double c = -1.0 / (2.0 * dim * std::numbers::pi);

    // Π_j f_ij, with f_ii = cos
    const auto term = [dim](const Point& x, int i) {
        double v = 1.0;
        for (int j = 0; j < dim; ++j) v *= j == i ? std::cos(k * x[j]) : std::sin(k * x[j]);
        return v;
    };
    // ∂_l of term(x, i)
    const auto dterm = [dim](const Point& x, int i, int l) {
        double v = 1.0;
        for (int j = 0; j < dim; ++j) {
            if (j == l)
                v *= j == i ? -k * std::sin(k * x[j]) : k * std::cos(k * x[j]);
            else
                v *= j == i ? std::cos(k * x[j]) : std::sin(k * x[j]);
        }
        return v;
    };
    const auto prod_sin = [dim](const Point& x) {
        double v = 1.0;
        for (int j = 0; j < dim; ++j) v *= std::sin(k * x[j]);
        return v;
    };

    ManufacturedFields m;
    m.c = c;
    m.exact.p = ScalarField{[prod_sin](const Point& x, double t) { return std::sin(k * t) * prod_sin(x); },
                            [term, dim](const Point& x, double t) {
                                Vec3 g = Vec3::Zero();
                                for (int l = 0; l < dim; ++l) g[l] = k * std::sin(k * t) * term(x, l);
                                return g;
                            }};
    m.exact.u = VectorField{[term, dim, c](const Point& x, double t) {
                                Vec3 v = Vec3::Zero();
                                for (int i = 0; i < dim; ++i) v[i] = c * std::sin(k * t) * term(x, i);
                                return v;
                            },
                            [dterm, dim, c](const Point& x, double t) {
                                Mat3 G = Mat3::Zero();
                                for (int i = 0; i < dim; ++i)
                                    for (int l = 0; l < dim; ++l) G(i, l) = c * std::sin(k * t) * dterm(x, i, l);
                                return G;
                            }};
    m.exact.z = VectorField{[term, dim](const Point& x, double t) {
                                Vec3 v = Vec3::Zero();
                                for (int i = 0; i < dim; ++i) v[i] = -k * std::sin(k * t) * term(x, i);
                                return v;
                            },
                            [dterm, dim](const Point& x, double t) {
                                Mat3 G = Mat3::Zero();
                                for (int i = 0; i < dim; ++i)
                                    for (int l = 0; l < dim; ++l) G(i, l) = -k * std::sin(k * t) * dterm(x, i, l);
                                return G;
                            }};
    m.exact.div_z = ScalarField{[prod_sin, dim](const Point& x, double t) {
                                    return dim * k * k * std::sin(k * t) * prod_sin(x);
                                },
                                {}};
    m.g = ScalarField{[prod_sin, dim](const Point& x, double t) {
                          return (k * std::cos(k * t) + dim * k * k * std::sin(k * t)) * prod_sin(x);
                      },
                      {}};
    return m;
}

/// Manufactured problem on the unit square (dim 2) or cube (dim 3) with n
/// intervals per side. dt <= 0 selects h/4.
[[nodiscard]] inline ProblemDefinition manufactured_problem(int dim, int n, double delta, double dt = 0.0,
                                                            double T = 0.25)
{
    if (n < 1) throw InvalidArgument("manufactured problem: resolution must be >= 1");
    const ManufacturedFields mf = manufactured_fields(dim);
    ProblemDefinition p;
    p.name = dim == 2 ? "manufactured_2d" : "manufactured_3d";
    p.mesh = dim == 2 ? unit_square_mesh(n) : unit_cube_mesh(n);
    p.params.lambda = 0.0;
    p.params.mu_s = 1.0;
    p.params.set_scalar_kappa(1.0);
    p.params.alpha = 1.0;
    p.params.c0 = 0.0;
    p.params.delta = delta;
    p.params.operator_mode = OperatorMode::vector_laplacian;
    const VectorField z = *mf.exact.z;
    for (int tag : p.mesh.marker_tags()) {
        p.boundary.push_back({tag, MixtureCondition::displacement(*mf.exact.u),
                              FluidCondition::flux_bc([z](const Point& x, const Vec3& nrm, double t) {
                                  return z(x, t).dot(nrm);
                              })});
    }
    p.g = mf.g;
    p.u0 = *mf.exact.u;
    p.z0 = *mf.exact.z;
    p.p0 = *mf.exact.p;
    p.dt = dt > 0.0 ? dt : 0.25 / n;
    p.T = T;
    p.pressure_mean_constraint = true;
    p.exact = mf.exact;
    return p;
}

[[nodiscard]] inline ProblemDefinition manufactured_2d(int n = 8, double delta = 1.0, double dt = 0.0, double T = 0.25)
{
    return manufactured_problem(2, n, delta, dt, T);
}

[[nodiscard]] inline ProblemDefinition manufactured_3d(int n = 4, double delta = 0.01, double dt = 0.0, double T = 0.25)
{
    return manufactured_problem(3, n, delta, dt, T);
}

/// Run a problem with exact fields and collect errors at steps 1..N.
struct ManufacturedRun {
    ErrorReport report;
    State final_state;
    double oscillation = 0.0;  ///< at the final time
};

[[nodiscard]] inline ManufacturedRun run_with_errors(const ProblemDefinition& problem, const StepObserver& extra = {})
{
    if (!problem.exact) throw InvalidArgument("run_with_errors: problem has no exact solution");
    ManufacturedRun out;
    out.report.dt = problem.dt;
    const auto observer = [&](int n, double t, const State& s) {
        if (n > 0) out.report.steps.push_back(error_norms(problem.mesh, s, *problem.exact, t, problem.params.delta));
        if (extra) extra(n, t, s);
    };
    const Trajectory traj = backward_euler_run(problem, observer, false);
    out.final_state = traj.back();
    out.report.aggregate();
    out.oscillation = oscillation_indicator(out.final_state.p, problem.mesh);
    return out;
}

/// One row per resolution (ascending n, i.e. decreasing h = 1/n).
[[nodiscard]] inline ConvergenceTable convergence_study(int dim, const std::vector<int>& resolutions, double delta,
                                                        double T = 0.25)
{
    if (resolutions.empty()) throw InvalidArgument("convergence_study: no resolutions");
    std::vector<int> res = resolutions;
    std::sort(res.begin(), res.end());
    if (std::adjacent_find(res.begin(), res.end()) != res.end() || res.front() < 1)
        throw InvalidArgument("convergence_study: resolutions must be distinct and >= 1");
    ConvergenceTable table;
    for (int n : res) {
        const ProblemDefinition p = manufactured_problem(dim, n, delta, 0.0, T);
        const ManufacturedRun run = run_with_errors(p);
        table.rows.push_back(convergence_row(1.0 / n, run.report, run.oscillation));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Cantilever bracket.

struct CantileverOptions {
    int n = 48;
    double delta = 5e-6;
    double dt = 1e-3;
    double T = 5e-3;
    double traction = 1.0;  ///< downward traction magnitude on the top edge
};

[[nodiscard]] inline ProblemDefinition cantilever_setup(const CantileverOptions& o = {})
{
    ProblemDefinition p;
    p.name = "cantilever";
    p.mesh = unit_square_mesh(o.n);
    const double E = 1e5;
    const double nu = 0.4;
    p.params = MaterialParams::from_young_poisson(E, nu);
    p.params.alpha = 0.93;
    p.params.c0 = 0.0;
    p.params.set_scalar_kappa(1e-7);
    p.params.delta = o.delta;
    p.params.operator_mode = OperatorMode::full_biot;
    const auto noflow = FluidCondition::no_flow();
    p.boundary.push_back({markers::square_left, MixtureCondition::displacement(VectorField::zero()), noflow});
    p.boundary.push_back({markers::square_right, MixtureCondition::traction(VectorField::zero()), noflow});
    p.boundary.push_back({markers::square_bottom, MixtureCondition::traction(VectorField::zero()), noflow});
    p.boundary.push_back(
        {markers::square_top, MixtureCondition::traction(VectorField::constant(Vec3(0.0, -o.traction, 0.0))), noflow});
    p.dt = o.dt;
    p.T = o.T;
    p.pressure_mean_constraint = needs_mean_constraint(p.boundary);
    return p;
}

struct CantileverResult {
    State final_state;
    double oscillation = 0.0;
};

[[nodiscard]] inline CantileverResult run_cantilever(const ProblemDefinition& problem, const StepObserver& observer = {})
{
    const Trajectory traj = backward_euler_run(problem, observer, false);
    return {traj.back(), oscillation_indicator(traj.back().p, problem.mesh)};
}

// ---------------------------------------------------------------------------
// Unconfined compression of a cylinder between frictionless plates.

struct UnconfinedOptions {
    double delta = 1e-3;
    int n_radial = 4;
    int n_axial = 4;
    double radius = 5.0;
    double height = 5.0;
    double E = 1000.0;
    double nu = 0.15;
    double kappa = 0.1;
    double eps0 = 0.01;  ///< axial strain
    double dt = 0.1;
    double T = 10.0;
    double ramp_time = 0.0;  ///< > 0 ramps the plate displacement linearly over this time
};

[[nodiscard]] inline ProblemDefinition unconfined_setup(const UnconfinedOptions& o = {})
{
    ProblemDefinition p;
    p.name = "unconfined";
    p.mesh = cylinder_mesh(o.radius, o.height, o.n_radial, o.n_axial);
    p.params = MaterialParams::from_young_poisson(o.E, o.nu);
    p.params.alpha = 1.0;
    p.params.c0 = 0.0;
    p.params.set_scalar_kappa(o.kappa);
    p.params.delta = o.delta;
    p.params.operator_mode = OperatorMode::full_biot;

    const double w = -o.eps0 * o.height;
    const double ramp = o.ramp_time;
    const VectorField top{[w, ramp](const Point&, double t) {
                              const double s = ramp > 0.0 ? std::min(1.0, t / ramp) : 1.0;
                              return Vec3(0.0, 0.0, s * w);
                          },
                          [](const Point&, double) { return Mat3::Zero().eval(); }};
    const std::array<bool, 3> axial{false, false, true};
    const auto noflow = FluidCondition::no_flow();
    p.boundary.push_back({markers::cylinder_bottom, MixtureCondition::displacement(VectorField::zero(), axial), noflow});
    p.boundary.push_back({markers::cylinder_top, MixtureCondition::displacement(top, axial), noflow});
    p.boundary.push_back({markers::cylinder_lateral, MixtureCondition::traction(VectorField::zero()),
                          FluidCondition::pressure_bc(ScalarField::constant(0.0))});

    // rigid in-plane motions: pin the axis, and the rotation about it on the base
    const double tol = 1e-9 * o.radius;
    for (Index v = 0; v < p.mesh.num_vertices(); ++v) {
        const Point& x = p.mesh.vertex(v);
        if (std::abs(x.x()) < tol && std::abs(x.y()) < tol) {
            p.extra_u_constraints.push_back({3 * v, 0.0});
            p.extra_u_constraints.push_back({3 * v + 1, 0.0});
        } else if (x.z() < 1e-9 * o.height && std::abs(x.y()) < tol && x.x() > 0.0) {
            p.extra_u_constraints.push_back({3 * v + 1, 0.0});
        }
    }
    p.dt = o.dt;
    p.T = o.T;
    p.pressure_mean_constraint = needs_mean_constraint(p.boundary);
    return p;
}

/// Mean of u·r̂ / a over the vertices of the lateral surface.
[[nodiscard]] inline double radial_displacement(const Mesh& mesh, const Vector& u, double radius)
{
    const std::set<Index> verts = detail::vertices_on(mesh, {markers::cylinder_lateral});
    if (verts.empty()) throw InvalidArgument("radial_displacement: mesh has no lateral surface");
    double sum = 0.0;
    for (Index v : verts) {
        const Point& x = mesh.vertex(v);
        const double r = std::hypot(x.x(), x.y());
        sum += (u[3 * v] * x.x() + u[3 * v + 1] * x.y()) / r;
    }
    return sum / static_cast<double>(verts.size()) / radius;
}

struct UnconfinedResult {
    std::vector<double> t;          ///< 0 stands for the instantaneous response 0⁺
    std::vector<double> simulated;  ///< u_r/a
    std::vector<double> analytic;   ///< Armstrong series
    double t_g = 0.0;
    double eps0 = 0.0;
    double rmse = 0.0;
    State final_state;

    [[nodiscard]] double normalized_rmse() const { return rmse / eps0; }
};

/// Undrained response at t = 0⁺ followed by backward Euler up to T, with the
/// radial displacement compared to the Armstrong series at every level.
[[nodiscard]] inline UnconfinedResult run_unconfined(const UnconfinedOptions& o, const StepObserver& observer = {})
{
    const ProblemDefinition p = unconfined_setup(o);
    const ArmstrongModel model = ArmstrongModel::make(o.nu, o.E, o.kappa, o.radius, o.eps0, 200);
    UnconfinedResult out;
    out.t_g = model.t_g();
    out.eps0 = o.eps0;
    const State start = undrained_response(p, State::zero(p.layout()), 0.0);
    const auto record = [&](int n, double t, const State& s) {
        out.t.push_back(t);
        out.simulated.push_back(radial_displacement(p.mesh, s.u, o.radius));
        out.analytic.push_back(armstrong_radial_displacement(t, model).value);
        if (observer) observer(n, t, s);
    };
    const Trajectory traj = backward_euler_run(p, start, record, false);
    out.final_state = traj.back();
    double s2 = 0.0;
    for (std::size_t i = 0; i < out.t.size(); ++i) s2 += std::pow(out.simulated[i] - out.analytic[i], 2);
    out.rmse = std::sqrt(s2 / static_cast<double>(out.t.size()));
    return out;
}

}  // namespace porofem
