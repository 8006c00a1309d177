#include "afem/assembly.hpp"

#include "afem/quadrature.hpp"
#include "detail.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace afem {

namespace {

using Triplet = Eigen::Triplet<double>;
using LocalMatrix = Eigen::Matrix<double, kMaxLocalDofs, kMaxLocalDofs>;
using LocalVector = Eigen::Matrix<double, kMaxLocalDofs, 1>;

void check_finite(const LocalMatrix& a, const LocalVector& f, int n, int e)
{
    if (!a.topLeftCorner(n, n).allFinite() || !f.head(n).allFinite()) {
        throw AssemblyError("non-finite local contribution on element " + std::to_string(e));
    }
}

void scatter(std::vector<Triplet>& triplets, std::span<const int> dofs, const LocalMatrix& a)
{
    const auto n = dofs.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            triplets.emplace_back(dofs[i], dofs[j], a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
    }
}

/// Element loop shared by the matrices below; `kernel` adds w * integrand
/// at one quadrature point into the local matrix.
template <class Kernel>
SparseMatrix assemble_matrix(const FeSpace& space, int degree, Kernel kernel)
{
    const Mesh& mesh = space.mesh();
    const auto& rule = triangle_rule(degree);
    const int n = space.dofs_per_element();
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * static_cast<std::size_t>(n * n));
    LocalBasis basis;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto corners = mesh.corners(e);
        const AffineMap map(corners);
        const auto gl = map.barycentric_gradients();
        LocalMatrix a = LocalMatrix::Zero();
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            eval_basis(space.degree(), rule.points[q], gl, basis);
            const Point x = detail::barycentric_to_physical(corners, rule.points[q]);
            kernel(e, x, rule.weights[q] * map.det(), basis, a);
        }
        LocalVector zero = LocalVector::Zero();
        check_finite(a, zero, n, e);
        scatter(triplets, space.element_dofs(e), a);
    }
    SparseMatrix m(space.n_dofs(), space.n_dofs());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

} // namespace

int default_load_degree(int p) { return std::max(2 * p + 2, 6); }

double convection_norm(const ProblemSpec& problem, const Mesh& mesh, int e)
{
    const auto corners = mesh.corners(e);
    double sup = 0.0;
    for (const auto& lambda : triangle_rule(6).points) {
        sup = std::max(sup, norm(problem.convection(detail::barycentric_to_physical(corners, lambda))));
    }
    return sup;
}

double peclet(const ProblemSpec& problem, const Mesh& mesh, int e)
{
    return convection_norm(problem, mesh, e) * element_size(mesh, e) / (2.0 * problem.epsilon);
}

double laplacian_inverse_constant(const Mesh& mesh, int e, int degree)
{
    if (degree < 2) {
        return 0.0;
    }
    const auto corners = mesh.corners(e);
    const AffineMap map(corners);
    const auto gl = map.barycentric_gradients();
    const auto& rule = triangle_rule(2 * degree);
    Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(6, 6);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(6, 6);
    LocalBasis basis;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        eval_basis(degree, rule.points[q], gl, basis);
        const double w = rule.weights[q] * map.det();
        for (int i = 0; i < basis.size; ++i) {
            for (int j = 0; j < basis.size; ++j) {
                stiffness(i, j) += w * dot(basis.gradient[i], basis.gradient[j]);
                lap(i, j) += w * basis.laplacian[i] * basis.laplacian[j];
            }
        }
    }
    // Restrict to the orthogonal complement of the kernel of the stiffness
    // matrix (constants) and solve the reduced symmetric eigenproblem.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> k_eig(stiffness);
    const auto& d = k_eig.eigenvalues();
    const double cutoff = 1e-10 * d.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] > cutoff) {
            keep.push_back(i);
        }
    }
    Eigen::MatrixXd w(6, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        w.col(static_cast<Eigen::Index>(c)) = k_eig.eigenvectors().col(keep[c]) / std::sqrt(d[keep[c]]);
    }
    const Eigen::MatrixXd reduced = w.transpose() * lap * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(reduced, Eigen::EigenvaluesOnly);
    const double lambda_max = std::max(0.0, r_eig.eigenvalues().maxCoeff());
    return element_size(mesh, e) * std::sqrt(lambda_max);
}

double stabilization_bound(const ProblemSpec& problem, const Mesh& mesh, int e, int degree)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto corners = mesh.corners(e);
    double beta_max = 0.0;
    for (const auto& lambda : triangle_rule(6).points) {
        beta_max = std::max(beta_max, std::abs(problem.reaction(detail::barycentric_to_physical(corners, lambda))));
    }
    const double reaction_bound = beta_max > 0.0 ? problem.gamma / (beta_max * beta_max) : inf;
    if (degree < 2) {
        return reaction_bound;
    }
    const double c = laplacian_inverse_constant(mesh, e, degree);
    const double h = element_size(mesh, e);
    const double diffusion_bound = c > 0.0 ? h * h / (problem.epsilon * c * c) : inf;
    return 0.5 * std::min(diffusion_bound, reaction_bound);
}

double stabilization_parameter(const ProblemSpec& problem, const Mesh& mesh, int e, int degree,
                               const StabilizationConfig& config)
{
    const double h = element_size(mesh, e);
    const double eps = problem.epsilon;
    const bool convective = peclet(problem, mesh, e) > 1.0;
    double theta = 0.0;
    switch (config.mode) {
    case StabilizationMode::None:
        return 0.0;
    case StabilizationMode::Generic:
        theta = convective ? config.delta0 * h : config.delta1 * h * h / eps;
        break;
    case StabilizationMode::DegreeScaled:
        theta = convective ? h / (degree * problem.convection_max) : h * h / (2.0 * eps * degree * degree);
        break;
    }
    if (config.clamp) {
        theta = std::min(theta, stabilization_bound(problem, mesh, e, degree));
    }
    return theta;
}

std::vector<double> stabilization_parameters(const ProblemSpec& problem, const Mesh& mesh, int degree,
                                             const StabilizationConfig& config)
{
    std::vector<double> theta(static_cast<std::size_t>(mesh.num_elements()));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        theta[static_cast<std::size_t>(e)] = stabilization_parameter(problem, mesh, e, degree, config);
    }
    return theta;
}

Forms assemble_forms(const FeSpace& space, const ProblemSpec& problem, std::span<const double> theta,
                     const AssemblyOptions& options)
{
    const Mesh& mesh = space.mesh();
    if (options.validate) {
        validate_problem(problem, mesh);
    }
    if (theta.size() != static_cast<std::size_t>(mesh.num_elements())) {
        throw AssemblyError("one stabilization parameter per element required");
    }
    const int degree = options.load_degree > 0 ? options.load_degree : default_load_degree(space.degree());
    const auto& rule = triangle_rule(degree);
    const int n = space.dofs_per_element();
    const double eps = problem.epsilon;

    Forms forms;
    forms.load = Eigen::VectorXd::Zero(space.n_dofs());
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * static_cast<std::size_t>(n * n));

    LocalBasis basis;
    std::array<double, kMaxLocalDofs> advect{};
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto corners = mesh.corners(e);
        const AffineMap map(corners);
        const auto gl = map.barycentric_gradients();
        const double th = theta[static_cast<std::size_t>(e)];
        LocalMatrix a = LocalMatrix::Zero();
        LocalVector f = LocalVector::Zero();
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            eval_basis(space.degree(), rule.points[q], gl, basis);
            const Point x = detail::barycentric_to_physical(corners, rule.points[q]);
            const double w = rule.weights[q] * map.det();
            const Vec2 alpha = problem.convection(x);
            const double beta = problem.reaction(x);
            const double src = problem.source(x);
            for (int i = 0; i < n; ++i) {
                advect[i] = dot(alpha, basis.gradient[i]);
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double strong = -eps * basis.laplacian[j] + advect[j] + beta * basis.value[j];
                    a(i, j) += w * (eps * dot(basis.gradient[j], basis.gradient[i]) +
                                    (advect[j] + beta * basis.value[j]) * basis.value[i] + th * strong * advect[i]);
                }
                f(i) += w * src * (basis.value[i] + th * advect[i]);
            }
        }
        check_finite(a, f, n, e);
        const auto dofs = space.element_dofs(e);
        scatter(triplets, dofs, a);
        for (int i = 0; i < n; ++i) {
            forms.load[dofs[static_cast<std::size_t>(i)]] += f(i);
        }
    }

    const auto& erule = edge_rule(std::max(2 * space.degree() + 1, degree));
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const auto& edge = mesh.edge(k);
        if (edge.boundary_facet < 0 ||
            mesh.boundary_facets()[static_cast<std::size_t>(edge.boundary_facet)].label != BoundaryLabel::Neumann) {
            continue;
        }
        if (!problem.neumann) {
            throw AssemblyError("Neumann edge present but no Neumann datum set");
        }
        const int e = edge.elements[0];
        const Vec2 normal = edge_normal(mesh, k, e);
        const double len = edge_length(mesh, k);
        const auto gl = mesh.affine_map(e).barycentric_gradients();
        const Point pa = mesh.vertex(edge.vertices[0]);
        const Point pb = mesh.vertex(edge.vertices[1]);
        const auto dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < erule.weights.size(); ++q) {
            const double t = erule.points[q];
            const auto lambda = detail::edge_barycentric(mesh, e, edge.vertices[0], edge.vertices[1], t);
            eval_basis(space.degree(), lambda, gl, basis);
            const Point x = (1.0 - t) * pa + t * pb;
            const double g = problem.neumann(x, normal);
            if (!std::isfinite(g)) {
                throw AssemblyError("non-finite Neumann datum on edge " + std::to_string(k));
            }
            for (int i = 0; i < n; ++i) {
                forms.load[dofs[static_cast<std::size_t>(i)]] += erule.weights[q] * len * g * basis.value[i];
            }
        }
    }

    forms.matrix.resize(space.n_dofs(), space.n_dofs());
    forms.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return forms;
}

SparseSystem constrain(const Forms& forms, const FeSpace& space, const ProblemSpec& problem)
{
    const int n = space.n_dofs();
    SparseSystem sys;
    sys.constrained.assign(static_cast<std::size_t>(n), 0);
    sys.lifting = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (space.is_dirichlet(i)) {
            sys.constrained[static_cast<std::size_t>(i)] = 1;
            sys.lifting[i] = problem.dirichlet(space.node(i));
        }
    }
    sys.rhs = forms.load;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(forms.matrix.nonZeros()));
    for (int j = 0; j < forms.matrix.outerSize(); ++j) {
        const bool col_fixed = sys.constrained[static_cast<std::size_t>(j)] != 0;
        for (SparseMatrix::InnerIterator it(forms.matrix, j); it; ++it) {
            const auto i = static_cast<int>(it.row());
            if (sys.constrained[static_cast<std::size_t>(i)] != 0) {
                continue;
            }
            if (col_fixed) {
                sys.rhs[i] -= it.value() * sys.lifting[j];
            } else {
                triplets.emplace_back(i, j, it.value());
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (sys.constrained[static_cast<std::size_t>(i)] != 0) {
            triplets.emplace_back(i, i, 1.0);
            sys.rhs[i] = sys.lifting[i];
        }
    }
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

SparseSystem assemble(const FeSpace& space, const ProblemSpec& problem, const StabilizationConfig& config,
                      const AssemblyOptions& options)
{
    auto theta = stabilization_parameters(problem, space.mesh(), space.degree(), config);
    auto sys = constrain(assemble_forms(space, problem, theta, options), space, problem);
    sys.theta = std::move(theta);
    return sys;
}

double residual_check(const FeSpace& space, const ProblemSpec& problem, const StabilizationConfig& config,
                      const DiscreteFunction& u, const AssemblyOptions& options)
{
    const auto theta = stabilization_parameters(problem, space.mesh(), space.degree(), config);
    const auto forms = assemble_forms(space, problem, theta, options);
    const Eigen::VectorXd r = forms.matrix * u.coefficients() - forms.load;
    double worst = 0.0;
    for (int i = 0; i < space.n_dofs(); ++i) {
        if (!space.is_dirichlet(i)) {
            worst = std::max(worst, std::abs(r[i]));
        }
    }
    return worst;
}

SparseMatrix energy_gram(const FeSpace& space, const ProblemSpec& problem)
{
    const double eps = problem.epsilon;
    const double gamma = problem.gamma;
    return assemble_matrix(space, 2 * space.degree(),
                           [&](int, Point, double w, const LocalBasis& b, LocalMatrix& a) {
                               for (int i = 0; i < b.size; ++i) {
                                   for (int j = 0; j < b.size; ++j) {
                                       a(i, j) += w * (eps * dot(b.gradient[i], b.gradient[j]) +
                                                       gamma * b.value[i] * b.value[j]);
                                   }
                               }
                           });
}

SparseMatrix streamline_gram(const FeSpace& space, const ProblemSpec& problem, std::span<const double> theta)
{
    return assemble_matrix(space, default_load_degree(space.degree()),
                           [&](int e, Point x, double w, const LocalBasis& b, LocalMatrix& a) {
                               const Vec2 alpha = problem.convection(x);
                               const double th = theta[static_cast<std::size_t>(e)];
                               for (int i = 0; i < b.size; ++i) {
                                   for (int j = 0; j < b.size; ++j) {
                                       a(i, j) += w * th * dot(alpha, b.gradient[i]) * dot(alpha, b.gradient[j]);
                                   }
                               }
                           });
}

void write_matrix_coordinates(std::ostream& out, const SparseMatrix& matrix)
{
    char buf[96];
    for (int j = 0; j < matrix.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(matrix, j); it; ++it) {
            std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()), static_cast<long>(it.col()),
                          it.value());
            out << buf;
        }
    }
}

} // namespace afem
