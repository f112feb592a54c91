#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "porofem/error.hpp"

namespace porofem {

namespace detail {

/// Σ_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!), summed in extended precision.
[[nodiscard]] inline double bessel_series(int n, double x)
{
    const long double h = 0.5L * static_cast<long double>(x);
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= h / k;
    long double sum = term;
    const long double h2 = h * h;
    for (int m = 1; m < 500; ++m) {
        term *= -h2 / (static_cast<long double>(m) * (m + n));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) && m > 2) break;
    }
    return static_cast<double>(sum);
}

/// Hankel expansion J_n(x) = sqrt(2/(πx)) (P cos χ - Q sin χ), χ = x - (n/2 + 1/4)π,
/// summed until the terms stop decreasing.
[[nodiscard]] inline double bessel_asymptotic(int n, double x)
{
    const double mu = 4.0 * n * n;
    double P = 0.0;
    double Q = 0.0;
    double a = 1.0;  // a_k / x^k
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k) {
        const double mag = std::abs(a);
        if (mag > prev) break;
        switch (k % 4) {
        case 0: P += a; break;
        case 1: Q += a; break;
        case 2: P -= a; break;
        default: Q -= a; break;
        }
        if (mag < 1e-17) break;
        prev = mag;
        const double odd = 2.0 * k + 1.0;
        a *= (mu - odd * odd) / (8.0 * (k + 1) * x);
    }
    const double chi = x - (0.5 * n + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (P * std::cos(chi) - Q * std::sin(chi));
}

inline constexpr double bessel_switch = 20.0;

}  // namespace detail

/// Bessel function of the first kind, order 0, for x >= 0 (even extension below 0).
[[nodiscard]] inline double bessel_j0(double x)
{
    x = std::abs(x);
    return x < detail::bessel_switch ? detail::bessel_series(0, x) : detail::bessel_asymptotic(0, x);
}

/// Bessel function of the first kind, order 1, for x >= 0 (odd extension below 0).
[[nodiscard]] inline double bessel_j1(double x)
{
    const double s = x < 0.0 ? -1.0 : 1.0;
    x = std::abs(x);
    return s * (x < detail::bessel_switch ? detail::bessel_series(1, x) : detail::bessel_asymptotic(1, x));
}

/// f(x) = J1(x) - (1-ν)/(1-2ν) x J0(x).
[[nodiscard]] inline double characteristic_function(double x, double nu)
{
    return bessel_j1(x) - (1.0 - nu) / (1.0 - 2.0 * nu) * x * bessel_j0(x);
}

/// First n positive roots of characteristic_function by a sign scan with
/// step 0.1 from x = 0.1, refined by bisection to |f| <= 1e-10.
[[nodiscard]] inline std::vector<double> characteristic_roots(double nu, int n)
{
    if (!(nu >= 0.0 && nu < 0.5)) throw InvalidArgument("characteristic_roots: need 0 <= nu < 0.5");
    if (n < 1) throw InvalidArgument("characteristic_roots: n must be positive");
    constexpr double step = 0.1;
    constexpr double tol = 1e-10;
    std::vector<double> roots;
    roots.reserve(static_cast<std::size_t>(n));
    double lo = step;
    double f_lo = characteristic_function(lo, nu);
    for (int i = 2; static_cast<int>(roots.size()) < n; ++i) {
        const double hi = i * step;
        const double f_hi = characteristic_function(hi, nu);
        if (f_lo == 0.0) {
            roots.push_back(lo);
        } else if ((f_lo < 0.0) != (f_hi < 0.0) && f_hi != 0.0) {
            double a = lo, b = hi, fa = f_lo;
            double m = 0.5 * (a + b);
            for (int it = 0; it < 200; ++it) {
                m = 0.5 * (a + b);
                const double fm = characteristic_function(m, nu);
                if (std::abs(fm) <= 0.01 * tol || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) break;
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            if (!(std::abs(characteristic_function(m, nu)) <= tol))
                throw std::runtime_error("characteristic_roots: bisection did not reach tolerance near " +
                                         std::to_string(m));
            roots.push_back(m);
        }
        lo = hi;
        f_lo = f_hi;
    }
    return roots;
}

/// Denominator of the series terms. `consistent` uses α²(1-ν)² - (1-2ν),
/// for which the t = 0 sum is exactly ε0/2 (instantaneous incompressibility);
/// `as_printed` uses α²(1-ν)² - (1-ν), whose t = 0 sum exceeds ε0/2 for 0 < ν < 0.5.
enum class ArmstrongForm { consistent, as_printed };

/// Parameters of the frictionless unconfined-compression solution.
struct ArmstrongModel {
    double nu = 0.15;
    double E = 1000.0;
    double k = 0.1;     ///< permeability κ
    double a = 5.0;     ///< cylinder radius
    double eps0 = 0.01; ///< applied axial strain
    double H_A = 0.0;   ///< aggregate modulus λ + 2μ_s
    int n_terms = 200;
    ArmstrongForm form = ArmstrongForm::consistent;
    std::vector<double> roots;

    [[nodiscard]] static ArmstrongModel make(double nu, double E, double k, double a, double eps0, int n_terms = 200)
    {
        if (!(E > 0.0) || !(k > 0.0) || !(a > 0.0)) throw InvalidArgument("ArmstrongModel: E, k and a must be positive");
        ArmstrongModel m;
        m.nu = nu;
        m.E = E;
        m.k = k;
        m.a = a;
        m.eps0 = eps0;
        m.n_terms = n_terms;
        const double mu = E / (2.0 * (1.0 + nu));
        const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        m.H_A = lambda + 2.0 * mu;
        m.roots = characteristic_roots(nu, n_terms);
        return m;
    }

    /// Characteristic diffusion time a² / (H_A k).
    [[nodiscard]] double t_g() const noexcept { return a * a / (H_A * k); }
};

struct ArmstrongValue {
    double value = 0.0;   ///< u_r(a, t) / a
    int terms_used = 0;
    bool converged = false;  ///< false when the series was cut at n_terms
};

/// u_r/a at r = a:
///   ε0 [ν + (1-2ν)(1-ν) Σ exp(-α_n² t/t_g) / (α_n² (1-ν)² - c)],
/// c = 1-2ν (consistent) or 1-ν (as printed), truncated once |term| < 1e-14.
[[nodiscard]] inline ArmstrongValue armstrong_radial_displacement(double t, const ArmstrongModel& m)
{
    if (!(t >= 0.0)) throw InvalidArgument("armstrong_radial_displacement: t must be non-negative");
    const double nu = m.nu;
    const double tg = m.t_g();
    const double shift = m.form == ArmstrongForm::consistent ? 1.0 - 2.0 * nu : 1.0 - nu;
    const auto n = std::min<std::size_t>(m.roots.size(), static_cast<std::size_t>(std::max(m.n_terms, 0)));
    double sum = 0.0;
    ArmstrongValue out;
    for (std::size_t i = 0; i < n; ++i) {
        const double al2 = m.roots[i] * m.roots[i];
        const double term = std::exp(-al2 * t / tg) / (al2 * (1.0 - nu) * (1.0 - nu) - shift);
        sum += term;
        out.terms_used = static_cast<int>(i + 1);
        if (std::abs(term) < 1e-14) {
            out.converged = true;
            break;
        }
    }
    out.value = m.eps0 * (nu + (1.0 - 2.0 * nu) * (1.0 - nu) * sum);
    return out;
}

}  // namespace porofem
