#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "porofem/error.hpp"
#include "porofem/fespace.hpp"
#include "porofem/mesh.hpp"
#include "porofem/problem.hpp"
#include "porofem/quadrature.hpp"
#include "porofem/solver.hpp"

namespace porofem {

/// Errors of one discrete state against an analytic solution. Entries whose
/// exact field is missing stay NaN.
struct StepErrors {
    double t = 0.0;
    double u_L2 = std::numeric_limits<double>::quiet_NaN();
    double u_H1 = std::numeric_limits<double>::quiet_NaN();  ///< full norm (L2 + gradient)
    double z_L2 = std::numeric_limits<double>::quiet_NaN();
    double z_div = std::numeric_limits<double>::quiet_NaN();  ///< L2 norm of the divergence error
    double z_Hdiv = std::numeric_limits<double>::quiet_NaN();
    double p_L2 = std::numeric_limits<double>::quiet_NaN();
    double p_J = 0.0;  ///< |p_h|_J; jumps of the continuous exact pressure vanish
};

/// |p|_J = sqrt(J(p, p)).
[[nodiscard]] inline double jump_seminorm(const Vector& p, const Mesh& mesh, double delta)
{
    if (!mesh.has_facets()) throw InvalidArgument("jump_seminorm: facets not built");
    if (p.size() != mesh.num_cells()) throw InvalidArgument("jump_seminorm: one value per cell expected");
    double s = 0.0;
    for (const FacetRecord& f : mesh.facets()) {
        if (!f.interior) continue;
        const double jump = p[f.cells[0]] - p[f.cells[1]];
        s += jump_weight(f, delta) * jump * jump;
    }
    return std::sqrt(s);
}

/// Errors at time t using a degree-4 rule with the exact fields sampled at
/// the quadrature points. Throws InvalidArgument when the H1 or H(div) norm
/// needs a derivative the exact fields do not provide.
[[nodiscard]] inline StepErrors error_norms(const Mesh& mesh, const State& state, const AnalyticFields& exact, double t,
                                            double delta = 0.0)
{
    const int d = mesh.dim();
    if (exact.u && !exact.u->has_gradient()) throw InvalidArgument("error_norms: exact displacement lacks a gradient");
    if (exact.z && !exact.div_z && !exact.z->has_gradient())
        throw InvalidArgument("error_norms: exact flux lacks a divergence");

    const QuadRule q = simplex_rule(d, 4);
    const double ref = d == 2 ? 0.5 : 1.0 / 6.0;
    double u2 = 0.0, gu2 = 0.0, z2 = 0.0, dz2 = 0.0, p2 = 0.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const SimplexGeometry geo = mesh.cell_geometry(c);
        const Cell& cell = mesh.cell(c);
        const double jac = geo.volume / ref;
        Mat3 grad_uh = Mat3::Zero();
        double div_zh = 0.0;
        if (exact.u) grad_uh = gradient_p1(mesh, state.u, geo, c);
        if (exact.z)
            for (int a = 0; a <= d; ++a)
                for (int k = 0; k < d; ++k) div_zh += state.z[d * cell[a] + k] * geo.gradients[a][k];
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Point x = geo.map(q.points[i]);
            const auto lam = geo.barycentric(q.points[i]);
            const double w = q.weights[i] * jac;
            if (exact.u) {
                const Vec3 e = (*exact.u)(x, t) - evaluate_p1(mesh, state.u, c, lam);
                const Mat3 ge = exact.u->gradient(x, t) - grad_uh;
                u2 += w * e.head(d).squaredNorm();
                gu2 += w * ge.topLeftCorner(d, d).squaredNorm();
            }
            if (exact.z) {
                const Vec3 e = (*exact.z)(x, t) - evaluate_p1(mesh, state.z, c, lam);
                z2 += w * e.head(d).squaredNorm();
                double div_exact = 0.0;
                if (exact.div_z) {
                    div_exact = (*exact.div_z)(x, t);
                } else {
                    const Mat3 gz = exact.z->gradient(x, t);
                    for (int k = 0; k < d; ++k) div_exact += gz(k, k);
                }
                dz2 += w * (div_exact - div_zh) * (div_exact - div_zh);
            }
            if (exact.p) {
                const double e = (*exact.p)(x, t) - state.p[c];
                p2 += w * e * e;
            }
        }
    }
    StepErrors out;
    out.t = t;
    if (exact.u) {
        out.u_L2 = std::sqrt(u2);
        out.u_H1 = std::sqrt(u2 + gu2);
    }
    if (exact.z) {
        out.z_L2 = std::sqrt(z2);
        out.z_div = std::sqrt(dz2);
        out.z_Hdiv = std::sqrt(z2 + dz2);
    }
    if (exact.p) out.p_L2 = std::sqrt(p2);
    if (mesh.has_facets() && delta > 0.0) out.p_J = jump_seminorm(state.p, mesh, delta);
    return out;
}

struct TimeAggregate {
    double linf = 0.0;  ///< max over steps
    double l2 = 0.0;    ///< sqrt(Σ Δt v²)
};

/// Throws InvalidArgument on an empty series or non-positive dt.
[[nodiscard]] inline TimeAggregate aggregate_in_time(const std::vector<double>& values, double dt)
{
    if (values.empty()) throw InvalidArgument("aggregate_in_time: empty series");
    if (!(dt > 0.0)) throw InvalidArgument("aggregate_in_time: dt must be positive");
    TimeAggregate a;
    double s = 0.0;
    for (double v : values) {
        a.linf = std::max(a.linf, std::abs(v));
        s += dt * v * v;
    }
    a.l2 = std::sqrt(s);
    return a;
}

/// Per-step errors and the time aggregates used for convergence studies.
struct ErrorReport {
    std::vector<StepErrors> steps;  ///< steps 1..N (the initial state is excluded)
    double dt = 0.0;
    double linf_u_H1 = 0.0;
    double linf_p_L2 = 0.0;
    double linf_p_J = 0.0;
    double l2_z_L2 = 0.0;
    double l2_z_div = 0.0;
    double l2_z_Hdiv = 0.0;
    double l2_p_L2 = 0.0;

    /// Recompute the aggregates from `steps`.
    void aggregate()
    {
        auto series = [this](double StepErrors::*m) {
            std::vector<double> v;
            v.reserve(steps.size());
            for (const auto& s : steps) v.push_back(s.*m);
            return aggregate_in_time(v, dt);
        };
        linf_u_H1 = series(&StepErrors::u_H1).linf;
        linf_p_L2 = series(&StepErrors::p_L2).linf;
        linf_p_J = series(&StepErrors::p_J).linf;
        l2_z_L2 = series(&StepErrors::z_L2).l2;
        l2_z_div = series(&StepErrors::z_div).l2;
        l2_z_Hdiv = series(&StepErrors::z_Hdiv).l2;
        l2_p_L2 = series(&StepErrors::p_L2).l2;
    }
};

/// Error norms of the convergence tables, in CSV column order.
inline const std::vector<std::string>& convergence_norms()
{
    static const std::vector<std::string> names{"err_u_H1", "err_z_L2", "err_z_Hdiv", "err_z_div", "err_p_L2"};
    return names;
}

struct ConvergenceRow {
    double h = 0.0;
    double dt = 0.0;
    std::vector<double> errors;  ///< one per convergence_norms() entry
    double oscillation = 0.0;    ///< pressure oscillation indicator at the final time
};

struct ConvergenceTable {
    std::vector<std::string> norms = convergence_norms();
    std::vector<ConvergenceRow> rows;
};

[[nodiscard]] inline ConvergenceRow convergence_row(double h, const ErrorReport& r, double oscillation = 0.0)
{
    return {h, r.dt, {r.linf_u_H1, r.l2_z_L2, r.l2_z_Hdiv, r.l2_z_div, r.linf_p_L2}, oscillation};
}

/// rates[i][k] = log(e_i/e_{i+1}) / log(h_i/h_{i+1}) for norm k; +inf when
/// e_{i+1} is zero. Throws InvalidArgument for fewer than two rows or h not
/// strictly decreasing.
[[nodiscard]] inline std::vector<std::vector<double>> convergence_rates(const ConvergenceTable& table)
{
    if (table.rows.size() < 2) throw InvalidArgument("convergence_rates: need at least two rows");
    std::vector<std::vector<double>> rates;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        const auto& a = table.rows[i];
        const auto& b = table.rows[i + 1];
        if (!(b.h < a.h) || !(b.h > 0.0)) throw InvalidArgument("convergence_rates: h must be strictly decreasing");
        if (a.errors.size() != table.norms.size() || b.errors.size() != table.norms.size())
            throw InvalidArgument("convergence_rates: error count mismatch");
        std::vector<double> r;
        for (std::size_t k = 0; k < table.norms.size(); ++k) {
            if (b.errors[k] == 0.0)
                r.push_back(std::numeric_limits<double>::infinity());
            else
                r.push_back(std::log(a.errors[k] / b.errors[k]) / std::log(a.h / b.h));
        }
        rates.push_back(std::move(r));
    }
    return rates;
}

/// max over interior facets |[p]| / (max p - min p + DBL_MIN); 0 for constant p.
[[nodiscard]] inline double oscillation_indicator(const Vector& p, const Mesh& mesh)
{
    if (!mesh.has_facets()) throw InvalidArgument("oscillation_indicator: facets not built");
    if (p.size() != mesh.num_cells()) throw InvalidArgument("oscillation_indicator: one value per cell expected");
    if (p.size() == 0) return 0.0;
    double jump = 0.0;
    for (const FacetRecord& f : mesh.facets())
        if (f.interior) jump = std::max(jump, std::abs(p[f.cells[0]] - p[f.cells[1]]));
    return jump / (p.maxCoeff() - p.minCoeff() + DBL_MIN);
}

}  // namespace porofem
