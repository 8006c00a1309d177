#include "afem/problem.hpp"

#include "afem/quadrature.hpp"
#include "detail.hpp"

#include <cmath>
#include <sstream>

namespace afem {

namespace {

std::string where(Point x)
{
    std::ostringstream os;
    os << "(" << x.x << ", " << x.y << ")";
    return os.str();
}

} // namespace

void validate_problem(const ProblemSpec& problem, const Mesh& mesh)
{
    if (!(problem.epsilon > 0.0)) {
        throw ProblemError("diffusion epsilon must be positive");
    }
    if (problem.gamma < 0.0) {
        throw ProblemError("gamma must be non-negative");
    }
    if (!problem.convection || !problem.convection_divergence || !problem.reaction || !problem.source) {
        throw ProblemError("convection, its divergence, reaction and source must all be set");
    }
    if (!mesh.has_dirichlet_boundary()) {
        throw ProblemError("the Dirichlet boundary is empty");
    }

    constexpr double tol = 1e-12;
    const auto& rule = triangle_rule(6);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto c = mesh.corners(e);
        for (const auto& lambda : rule.points) {
            const Point x = detail::barycentric_to_physical(c, lambda);
            const double div = problem.convection_divergence(x);
            const double beta = problem.reaction(x);
            if (-0.5 * div + beta < problem.gamma - tol * std::max(1.0, problem.gamma)) {
                throw ProblemError("-div(alpha)/2 + beta < gamma at " + where(x));
            }
            if (std::abs(beta) > problem.c_beta * problem.gamma + tol) {
                throw ProblemError("|beta| exceeds c_beta * gamma at " + where(x));
            }
            if (problem.gamma == 0.0 && std::abs(div) > tol) {
                throw ProblemError("gamma = 0 requires div(alpha) = 0, violated at " + where(x));
            }
            if (norm(problem.convection(x)) > problem.convection_max * (1.0 + tol) + tol) {
                throw ProblemError("|alpha| exceeds convection_max at " + where(x));
            }
        }
    }

    bool has_neumann = false;
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const auto& edge = mesh.edge(k);
        if (edge.boundary_facet < 0) {
            continue;
        }
        const auto& facet = mesh.boundary_facets()[static_cast<std::size_t>(edge.boundary_facet)];
        const Point mid = 0.5 * (mesh.vertex(edge.vertices[0]) + mesh.vertex(edge.vertices[1]));
        const Vec2 n = edge_normal(mesh, k, edge.elements[0]);
        if (facet.label == BoundaryLabel::Neumann) {
            has_neumann = true;
            if (dot(problem.convection(mid), n) < -tol) {
                throw ProblemError("inflow boundary at " + where(mid) + " is labelled Neumann");
            }
        }
    }
    if (has_neumann && !problem.neumann) {
        throw ProblemError("mesh has Neumann edges but no Neumann datum is set");
    }
    if (!problem.dirichlet) {
        throw ProblemError("no Dirichlet datum is set");
    }
}

} // namespace afem
