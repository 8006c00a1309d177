#pragma once

#include "afem/mesh.hpp"
#include "afem/problem.hpp"
#include "afem/space.hpp"

#include <Eigen/Core>

#include <memory>
#include <random>
#include <vector>

namespace afem::test {

/// Triangle with the given corners, every edge labelled `label`.
inline Mesh single_triangle(Point a, Point b, Point c, BoundaryLabel label = BoundaryLabel::Dirichlet)
{
    return Mesh({a, b, c}, {{0, 1, 2}}, {{{0, 1}, label}, {{1, 2}, label}, {{2, 0}, label}});
}

inline Mesh unit_right_triangle(BoundaryLabel label = BoundaryLabel::Dirichlet)
{
    return single_triangle({0, 0}, {1, 0}, {0, 1}, label);
}

/// Unit square split along the diagonal (0,0)-(1,1), which is the refinement
/// edge of both triangles.
inline Mesh two_triangle_square(BoundaryLabel label = BoundaryLabel::Dirichlet)
{
    return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 2, 0}, {3, 0, 2}},
                {{{0, 1}, label}, {{1, 2}, label}, {{2, 3}, label}, {{3, 0}, label}});
}

inline std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = d(rng);
    }
    return v;
}

/// Constant-coefficient data with f = 0 and zero boundary data.
inline ProblemSpec constant_problem(double eps, Vec2 alpha, double beta, double gamma)
{
    ProblemSpec p;
    p.name = "constant";
    p.epsilon = eps;
    p.convection = [alpha](Point) { return alpha; };
    p.convection_divergence = [](Point) { return 0.0; };
    p.reaction = [beta](Point) { return beta; };
    p.gamma = gamma;
    p.c_beta = gamma > 0.0 ? beta / gamma : 0.0;
    p.convection_max = norm(alpha);
    p.source = [](Point) { return 0.0; };
    p.dirichlet = [](Point) { return 0.0; };
    p.neumann = [](Point, Vec2) { return 0.0; };
    return p;
}

/// Brute-force conformity oracle: no vertex lies in the relative interior of
/// any element edge, and element areas sum to `domain_area`.
inline bool brute_force_conforming(const Mesh& mesh, double domain_area)
{
    double total = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        total += mesh.area(e);
        const auto& t = mesh.element(e);
        for (int k = 0; k < 3; ++k) {
            const Point a = mesh.vertex(t[static_cast<std::size_t>(k)]);
            const Point b = mesh.vertex(t[static_cast<std::size_t>((k + 1) % 3)]);
            const Vec2 d = b - a;
            const double len2 = dot(d, d);
            for (const auto& p : mesh.vertices()) {
                const double s = dot(p - a, d) / len2;
                if (s <= 1e-12 || s >= 1.0 - 1e-12) {
                    continue;
                }
                if (std::abs(cross(d, p - a)) <= 1e-12 * len2) {
                    return false;
                }
            }
        }
    }
    return std::abs(total - domain_area) <= 1e-12 * domain_area;
}

} // namespace afem::test
