#pragma once

#include "afem/geometry.hpp"
#include "afem/mesh.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace afem {

struct ExactSolution {
    std::function<double(Point)> value;
    std::function<Vec2(Point)> gradient;
};

/// Data of  -eps Lap u + alpha . grad u + beta u = f  with u = u_D on Gamma_D
/// and eps du/dn = g on Gamma_N.
struct ProblemSpec {
    std::string name;
    double epsilon = 1.0;
    std::function<Vec2(Point)> convection;
    std::function<double(Point)> convection_divergence;
    std::function<double(Point)> reaction;
    /// Lower bound: -div(alpha)/2 + beta >= gamma.
    double gamma = 0.0;
    /// |beta|_inf <= c_beta * gamma.
    double c_beta = 0.0;
    /// Global sup of |alpha| over the domain.
    double convection_max = 0.0;
    std::function<double(Point)> source;
    /// Neumann datum g(x, outward normal).
    std::function<double(Point, Vec2)> neumann;
    std::function<double(Point)> dirichlet;
    std::optional<ExactSolution> exact;
};

class ProblemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Samples the coefficient assumptions at quadrature points and boundary
/// midpoints of `mesh`; throws ProblemError naming the first violation.
void validate_problem(const ProblemSpec& problem, const Mesh& mesh);

} // namespace afem
