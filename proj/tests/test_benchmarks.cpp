#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "porofem/porofem.hpp"

using namespace porofem;

namespace {

constexpr double fd_step = 1e-4;

// -Δu_i by central differences of the exact gradient
Vec3 minus_laplacian(const VectorField& u, const Point& x, double t, int d)
{
    Vec3 out = Vec3::Zero();
    for (int l = 0; l < d; ++l) {
        Point xp = x, xm = x;
        xp[l] += fd_step;
        xm[l] -= fd_step;
        const Mat3 diff = (u.gradient(xp, t) - u.gradient(xm, t)) / (2.0 * fd_step);
        out -= diff.col(l);
    }
    return out;
}

double divergence_fd(const VectorField& v, const Point& x, double t, int d)
{
    double s = 0.0;
    for (int l = 0; l < d; ++l) {
        Point xp = x, xm = x;
        xp[l] += fd_step;
        xm[l] -= fd_step;
        s += (v(xp, t)[l] - v(xm, t)[l]) / (2.0 * fd_step);
    }
    return s;
}

double root_by_newton(double guess, double nu)
{
    const double r = (1.0 - nu) / (1.0 - 2.0 * nu);
    double x = guess;
    for (int it = 0; it < 50; ++it) {
        const double j0 = std::cyl_bessel_j(0.0, x);
        const double j1 = std::cyl_bessel_j(1.0, x);
        const double f = j1 - r * x * j0;
        // J1' = J0 - J1/x, (x J0)' = -x J1 + J0
        const double df = j0 - j1 / x - r * (j0 - x * j1);
        x -= f / df;
    }
    return x;
}

}  // namespace

class ManufacturedPde : public ::testing::TestWithParam<int> {};

TEST_P(ManufacturedPde, SatisfiesEquations)
{
    const int d = GetParam();
    const ManufacturedFields mf = manufactured_fields(d);
    EXPECT_DOUBLE_EQ(mf.c, -1.0 / (2.0 * d * std::numbers::pi));
    const VectorField& u = *mf.exact.u;
    const VectorField& z = *mf.exact.z;
    const ScalarField& p = *mf.exact.p;
    std::mt19937 rng(d);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        const Point x(U(rng), U(rng), d == 3 ? U(rng) : 0.0);
        const double t = U(rng);
        // momentum: -Δu + ∇p = 0
        const Vec3 residual = minus_laplacian(u, x, t, d) + p.gradient(x, t);
        EXPECT_LT(residual.head(d).norm(), 1e-5);
        // Darcy with κ = 1: z = -∇p
        EXPECT_LT((z(x, t) + p.gradient(x, t)).norm(), 1e-13);
        // mass: ∂t ∇·u + ∇·z = g
        const double dt = 1e-5;
        const double ddiv =
            (divergence_fd(u, x, t + dt, d) - divergence_fd(u, x, t - dt, d)) / (2.0 * dt);
        EXPECT_NEAR(ddiv + (*mf.exact.div_z)(x, t), mf.g(x, t), 1e-3);
        EXPECT_NEAR((*mf.exact.div_z)(x, t), divergence_fd(z, x, t, d), 1e-5);
        // gradients agree with differences of the values
        for (int l = 0; l < d; ++l) {
            Point xp = x, xm = x;
            xp[l] += fd_step;
            xm[l] -= fd_step;
            const Vec3 du = (u(xp, t) - u(xm, t)) / (2.0 * fd_step);
            for (int i = 0; i < d; ++i) EXPECT_NEAR(u.gradient(x, t)(i, l), du[i], 1e-6);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Dims, ManufacturedPde, ::testing::Values(2, 3));

TEST(Manufactured, InitialStateAndBoundaryFlux)
{
    const ManufacturedFields mf = manufactured_fields(2);
    const Point x(0.3, 0.7, 0.0);
    EXPECT_EQ((*mf.exact.u)(x, 0.0).norm(), 0.0);
    EXPECT_EQ((*mf.exact.p)(x, 0.0), 0.0);
    // p vanishes on the boundary of the unit square
    EXPECT_NEAR((*mf.exact.p)(Point(1.0, 0.4, 0.0), 0.2), 0.0, 1e-15);
    EXPECT_NEAR((*mf.exact.p)(Point(0.5, 0.25, 0.0), 0.125),
                std::sin(std::numbers::pi / 4) * std::sin(std::numbers::pi) * std::sin(std::numbers::pi / 2), 1e-15);
}

TEST(Manufactured, ProblemSetup)
{
    const ProblemDefinition p = manufactured_2d(8, 0.5);
    EXPECT_EQ(p.mesh.num_cells(), 128);
    EXPECT_DOUBLE_EQ(p.dt, 0.25 / 8);
    EXPECT_DOUBLE_EQ(p.T, 0.25);
    EXPECT_EQ(p.params.delta, 0.5);
    EXPECT_EQ(p.params.c0, 0.0);
    EXPECT_TRUE(p.pressure_mean_constraint);
    EXPECT_EQ(p.boundary.size(), 4u);
    EXPECT_TRUE(p.exact.has_value());
    EXPECT_NO_THROW(validate_boundary_partition(p));
    EXPECT_EQ(manufactured_3d(2).mesh.num_cells(), 48);
    EXPECT_THROW((void)manufactured_problem(1, 4, 1.0), InvalidArgument);
    EXPECT_THROW((void)manufactured_problem(2, 0, 1.0), InvalidArgument);
}

TEST(Manufactured, TwoDimensionalConvergence)
{
    const ConvergenceTable t = convergence_study(2, {16, 8}, 1.0);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(t.rows[0].h, 1.0 / 8);
    const auto rates = convergence_rates(t);
    for (std::size_t k = 0; k < t.norms.size(); ++k) EXPECT_GT(rates[0][k], 0.8) << t.norms[k];
    EXPECT_THROW((void)convergence_study(2, {4, 4}, 1.0), InvalidArgument);
    EXPECT_THROW((void)convergence_study(2, {}, 1.0), InvalidArgument);
}

TEST(Manufactured, RunWithErrorsNeedsExact)
{
    ProblemDefinition p = manufactured_2d(2);
    p.exact.reset();
    EXPECT_THROW((void)run_with_errors(p), InvalidArgument);
}

TEST(Bessel, MatchesStandardLibrary)
{
    double w0 = 0.0, w1 = 0.0;
    for (double x = 0.0; x <= 60.0; x += 0.01) {
        w0 = std::max(w0, std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)));
        w1 = std::max(w1, std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)));
    }
    EXPECT_LT(w0, 1e-12);
    EXPECT_LT(w1, 1e-12);
    EXPECT_EQ(bessel_j0(0.0), 1.0);
    EXPECT_EQ(bessel_j1(0.0), 0.0);
    EXPECT_EQ(bessel_j1(-2.0), -bessel_j1(2.0));
    EXPECT_EQ(bessel_j0(-2.0), bessel_j0(2.0));
}

TEST(Bessel, CharacteristicRoots)
{
    for (double nu : {0.0, 0.15, 0.3, 0.45}) {
        const auto roots = characteristic_roots(nu, 20);
        ASSERT_EQ(roots.size(), 20u);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            EXPECT_LE(std::abs(characteristic_function(roots[i], nu)), 1e-10);
            EXPECT_NEAR(roots[i], root_by_newton(roots[i], nu), 1e-9);
            if (i > 0) {
                EXPECT_GT(roots[i], roots[i - 1]);
                EXPECT_LT(roots[i] - roots[i - 1], 3.5);
            }
        }
        // asymptotic spacing π
        EXPECT_NEAR(roots[19] - roots[18], std::numbers::pi, 0.05);
    }
    EXPECT_THROW((void)characteristic_roots(0.5, 3), InvalidArgument);
    EXPECT_THROW((void)characteristic_roots(0.2, 0), InvalidArgument);
}

TEST(Armstrong, LimitsAndMonotonicity)
{
    const ArmstrongModel m = ArmstrongModel::make(0.15, 1000.0, 0.1, 5.0, 0.01);
    const double lambda = 1000.0 * 0.15 / (1.15 * 0.7);
    const double mu = 1000.0 / 2.3;
    EXPECT_NEAR(m.H_A, lambda + 2.0 * mu, 1e-10);
    EXPECT_NEAR(m.t_g(), 25.0 / (m.H_A * 0.1), 1e-14);
    // instantaneous response is incompressible: u/a = ε0/2
    EXPECT_NEAR(armstrong_radial_displacement(0.0, m).value / 0.01, 0.5, 1e-3);
    // drained limit: u/a = ν ε0
    const ArmstrongValue late = armstrong_radial_displacement(1e4, m);
    EXPECT_NEAR(late.value / 0.01, 0.15, 1e-12);
    EXPECT_TRUE(late.converged);
    double prev = 1.0;
    for (double t = 0.0; t <= 1.0; t += 0.02) {
        const double v = armstrong_radial_displacement(t, m).value;
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_THROW((void)armstrong_radial_displacement(-1.0, m), InvalidArgument);
}

TEST(Armstrong, PrintedDenominatorOvershoots)
{
    ArmstrongModel m = ArmstrongModel::make(0.15, 1000.0, 0.1, 5.0, 0.01);
    m.form = ArmstrongForm::as_printed;
    EXPECT_NEAR(armstrong_radial_displacement(0.0, m).value / 0.01, 0.5217, 5e-4);
    EXPECT_NEAR(armstrong_radial_displacement(1e4, m).value / 0.01, 0.15, 1e-12);
}

TEST(Unconfined, SetupAndRadialDisplacement)
{
    UnconfinedOptions o;
    o.n_radial = 2;
    o.n_axial = 2;
    const ProblemDefinition p = unconfined_setup(o);
    EXPECT_FALSE(p.pressure_mean_constraint);
    EXPECT_NO_THROW(validate_boundary_partition(p));
    EXPECT_EQ(p.params.operator_mode, OperatorMode::full_biot);
    // u = s (x, y, 0) has u_r/a = s on the lateral surface
    Vector u = Vector::Zero(3 * p.mesh.num_vertices());
    for (Index v = 0; v < p.mesh.num_vertices(); ++v) {
        u[3 * v] = 0.02 * p.mesh.vertex(v).x();
        u[3 * v + 1] = 0.02 * p.mesh.vertex(v).y();
    }
    EXPECT_NEAR(radial_displacement(p.mesh, u, o.radius), 0.02, 1e-14);
}

TEST(Unconfined, CoarseRunTracksSeries)
{
    UnconfinedOptions o;
    o.n_radial = 2;
    o.n_axial = 2;
    o.dt = 0.5;
    o.T = 2.0;
    const UnconfinedResult r = run_unconfined(o);
    ASSERT_EQ(r.t.size(), 5u);
    EXPECT_EQ(r.t.front(), 0.0);
    // undrained start preserves volume
    EXPECT_NEAR(r.simulated.front() / o.eps0, 0.5, 0.02);
    EXPECT_NEAR(r.simulated.back() / o.eps0, 0.15, 0.01);
    for (std::size_t i = 1; i < r.simulated.size(); ++i) EXPECT_LT(r.simulated[i], r.simulated[i - 1]);
    EXPECT_LT(r.normalized_rmse(), 0.05);
    EXPECT_EQ(r.final_state.z.size(), r.final_state.u.size());
}

TEST(Cantilever, SetupAndShortRun)
{
    CantileverOptions o;
    o.n = 8;
    const ProblemDefinition p = cantilever_setup(o);
    EXPECT_FALSE(p.pressure_mean_constraint);
    EXPECT_NEAR(p.params.kappa(0, 0), 1e-7, 0.0);
    EXPECT_EQ(p.params.alpha, 0.93);
    const CantileverResult r = run_cantilever(p);
    EXPECT_TRUE(r.final_state.u.allFinite());
    // the free corner moves down
    Index corner = -1;
    for (Index v = 0; v < p.mesh.num_vertices(); ++v)
        if ((p.mesh.vertex(v) - Point(1.0, 1.0, 0.0)).norm() < 1e-12) corner = v;
    ASSERT_GE(corner, 0);
    EXPECT_LT(r.final_state.u[2 * corner + 1], 0.0);
    EXPECT_GE(r.oscillation, 0.0);
    EXPECT_LE(r.oscillation, 1.0);
}
