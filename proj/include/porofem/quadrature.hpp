#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "porofem/error.hpp"
#include "porofem/geometry.hpp"

namespace porofem {

/// Quadrature on the reference simplex {x̂_k >= 0, Σ x̂_k <= 1} of dimension
/// 1 (unit interval), 2 or 3. Weights sum to the reference measure
/// (1, 1/2, 1/6).
struct QuadRule {
    int dim = 0;
    int degree = 0;
    std::vector<Vec3> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

namespace detail {

inline void add_orbit_2d(QuadRule& q, double w, double a)
{
    // (a, a, 1-2a) and its permutations, as reference (λ1, λ2) pairs
    const double b = 1.0 - 2.0 * a;
    q.points.emplace_back(a, a, 0.0);
    q.points.emplace_back(b, a, 0.0);
    q.points.emplace_back(a, b, 0.0);
    for (int i = 0; i < 3; ++i) q.weights.push_back(w);
}

inline void add_orbit_3d_4(QuadRule& q, double w, double a)
{
    const double b = 1.0 - 3.0 * a;
    q.points.emplace_back(a, a, a);
    q.points.emplace_back(b, a, a);
    q.points.emplace_back(a, b, a);
    q.points.emplace_back(a, a, b);
    for (int i = 0; i < 4; ++i) q.weights.push_back(w);
}

inline void add_orbit_3d_6(QuadRule& q, double w, double a)
{
    // barycentric (a, a, b, b) with b = 1/2 - a; six distinct placements
    const double b = 0.5 - a;
    const std::array<std::array<double, 4>, 6> bary{{{a, a, b, b}, {a, b, a, b}, {a, b, b, a},
                                                     {b, a, a, b}, {b, a, b, a}, {b, b, a, a}}};
    for (const auto& l : bary) {
        q.points.emplace_back(l[1], l[2], l[3]);
        q.weights.push_back(w);
    }
}

}  // namespace detail

/// Symmetric rule exact for polynomials of total degree <= `degree` (1..4).
[[nodiscard]] inline QuadRule simplex_rule(int dim, int degree)
{
    if (degree < 1 || degree > 4)
        throw InvalidArgument("simplex_rule: unsupported degree " + std::to_string(degree));
    QuadRule q;
    q.dim = dim;
    q.degree = degree;
    switch (dim) {
    case 1: {
        if (degree == 1) {
            q.points.emplace_back(0.5, 0.0, 0.0);
            q.weights.push_back(1.0);
        } else if (degree <= 3) {
            const double s = 0.5 / std::sqrt(3.0);
            q.points.emplace_back(0.5 - s, 0.0, 0.0);
            q.points.emplace_back(0.5 + s, 0.0, 0.0);
            q.weights = {0.5, 0.5};
        } else {
            const double s = 0.5 * std::sqrt(0.6);
            q.points.emplace_back(0.5 - s, 0.0, 0.0);
            q.points.emplace_back(0.5, 0.0, 0.0);
            q.points.emplace_back(0.5 + s, 0.0, 0.0);
            q.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        }
        break;
    }
    case 2: {
        if (degree == 1) {
            q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 0.0);
            q.weights.push_back(0.5);
        } else if (degree == 2) {
            detail::add_orbit_2d(q, 1.0 / 6.0, 1.0 / 6.0);
        } else {
            // 6-point degree-4 rule (Dunavant)
            detail::add_orbit_2d(q, 0.5 * 0.223381589678011466, 0.445948490915964886);
            detail::add_orbit_2d(q, 0.5 * 0.109951743655321868, 0.091576213509770743);
        }
        break;
    }
    case 3: {
        if (degree == 1) {
            q.points.emplace_back(0.25, 0.25, 0.25);
            q.weights.push_back(1.0 / 6.0);
        } else if (degree == 2) {
            detail::add_orbit_3d_4(q, 1.0 / 24.0, (5.0 - std::sqrt(5.0)) / 20.0);
        } else if (degree == 3) {
            q.points.emplace_back(0.25, 0.25, 0.25);
            q.weights.push_back(-2.0 / 15.0);
            detail::add_orbit_3d_4(q, 3.0 / 40.0, 1.0 / 6.0);
        } else {
            // 11-point degree-4 rule (Keast)
            q.points.emplace_back(0.25, 0.25, 0.25);
            q.weights.push_back(-148.0 / 1875.0 / 6.0);
            detail::add_orbit_3d_4(q, 343.0 / 7500.0 / 6.0, 1.0 / 14.0);
            detail::add_orbit_3d_6(q, 56.0 / 375.0 / 6.0, 0.25 * (1.0 - std::sqrt(5.0 / 14.0)));
        }
        break;
    }
    default:
        throw InvalidArgument("simplex_rule: dim must be 1, 2 or 3");
    }
    return q;
}

/// Rule on the reference facet of a d-simplex: the unit interval for d = 2,
/// the reference triangle for d = 3.
[[nodiscard]] inline QuadRule facet_rule(int dim, int degree)
{
    if (dim != 2 && dim != 3) throw InvalidArgument("facet_rule: dim must be 2 or 3");
    return simplex_rule(dim - 1, degree);
}

}  // namespace porofem
