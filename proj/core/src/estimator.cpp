#include "afem/estimator.hpp"

#include "afem/assembly.hpp"
#include "afem/quadrature.hpp"
#include "detail.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace afem {

namespace {

struct PointSample {
    double value = 0.0;
    Vec2 gradient;
    double laplacian = 0.0;
};

PointSample sample(const DiscreteFunction& w, std::span<const int> dofs, const LocalBasis& basis)
{
    PointSample s;
    const auto& c = w.coefficients();
    for (int i = 0; i < basis.size; ++i) {
        const double ci = c[dofs[static_cast<std::size_t>(i)]];
        s.value += ci * basis.value[i];
        s.gradient += ci * basis.gradient[i];
        s.laplacian += ci * basis.laplacian[i];
    }
    return s;
}

int volume_rule_degree(const DiscreteFunction& w, int requested)
{
    return requested > 0 ? requested : default_load_degree(w.space().degree());
}

bool is_neumann(const Mesh& mesh, const Edge& edge)
{
    return edge.boundary_facet >= 0 &&
           mesh.boundary_facets()[static_cast<std::size_t>(edge.boundary_facet)].label == BoundaryLabel::Neumann;
}

/// L2 projection onto a small local polynomial basis given samples at
/// quadrature points: basis(q, i) and weights w(q).
Eigen::VectorXd project(const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights, const Eigen::VectorXd& data)
{
    const Eigen::MatrixXd gram = basis.transpose() * weights.asDiagonal() * basis;
    const Eigen::VectorXd rhs = basis.transpose() * weights.asDiagonal() * data;
    return gram.ldlt().solve(rhs);
}

} // namespace

double hbar(const ProblemSpec& problem, double h)
{
    const double diffusion_scale = h / std::sqrt(problem.epsilon);
    if (problem.gamma <= 0.0) {
        return diffusion_scale;
    }
    return std::min(diffusion_scale, 1.0 / std::sqrt(problem.gamma));
}

double EstimatorOutput::total() const
{
    return std::sqrt(std::accumulate(indicators_sq.begin(), indicators_sq.end(), 0.0));
}

double EstimatorOutput::total(std::span<const int> subset) const
{
    double sum = 0.0;
    for (int e : subset) {
        sum += indicators_sq[static_cast<std::size_t>(e)];
    }
    return std::sqrt(sum);
}

double EstimatorOutput::oscillation_total() const
{
    return std::sqrt(std::accumulate(oscillations_sq.begin(), oscillations_sq.end(), 0.0));
}

EstimatorOutput estimate(const DiscreteFunction& w, const ProblemSpec& problem, const EstimatorOptions& options)
{
    const FeSpace& space = w.space();
    const Mesh& mesh = space.mesh();
    const int p = space.degree();
    const double eps = problem.epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(eps);
    const auto ne = static_cast<std::size_t>(mesh.num_elements());
    const int vdeg = volume_rule_degree(w, options.volume_degree);
    const auto& rule = triangle_rule(vdeg);

    EstimatorOutput out;
    out.volume_sq.assign(ne, 0.0);
    out.jump_sq.assign(ne, 0.0);
    out.neumann_sq.assign(ne, 0.0);
    out.hbar.resize(ne);

    std::vector<std::array<Vec2, 3>> grad_lambda(ne);
    LocalBasis basis;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto corners = mesh.corners(e);
        const AffineMap map(corners);
        grad_lambda[static_cast<std::size_t>(e)] = map.barycentric_gradients();
        const double hb = hbar(problem, element_size(mesh, e));
        out.hbar[static_cast<std::size_t>(e)] = hb;
        const auto dofs = space.element_dofs(e);
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            eval_basis(p, rule.points[q], grad_lambda[static_cast<std::size_t>(e)], basis);
            const auto s = sample(w, dofs, basis);
            const Point x = detail::barycentric_to_physical(corners, rule.points[q]);
            const double r = -eps * s.laplacian + dot(problem.convection(x), s.gradient) + problem.reaction(x) * s.value -
                             problem.source(x);
            sum += rule.weights[q] * map.det() * r * r;
        }
        out.volume_sq[static_cast<std::size_t>(e)] = hb * hb * sum;
    }

    const auto& jump_rule = edge_rule(2 * p + 1);
    const auto& neumann_rule = edge_rule(std::max(2 * p + 1, vdeg));
    LocalBasis other;
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const auto& edge = mesh.edge(k);
        const int e1 = edge.elements[0];
        const int e2 = edge.elements[1];
        const double len = edge_length(mesh, k);
        const Vec2 n = edge_normal(mesh, k, e1);
        const auto d1 = space.element_dofs(e1);
        if (e2 >= 0) {
            const auto d2 = space.element_dofs(e2);
            double sum = 0.0;
            for (std::size_t q = 0; q < jump_rule.weights.size(); ++q) {
                const double t = jump_rule.points[q];
                eval_basis(p, detail::edge_barycentric(mesh, e1, edge.vertices[0], edge.vertices[1], t),
                           grad_lambda[static_cast<std::size_t>(e1)], basis);
                eval_basis(p, detail::edge_barycentric(mesh, e2, edge.vertices[0], edge.vertices[1], t),
                           grad_lambda[static_cast<std::size_t>(e2)], other);
                const double jump = eps * dot(sample(w, d1, basis).gradient - sample(w, d2, other).gradient, n);
                sum += jump_rule.weights[q] * len * jump * jump;
            }
            out.jump_sq[static_cast<std::size_t>(e1)] += out.hbar[static_cast<std::size_t>(e1)] * inv_sqrt_eps * sum;
            out.jump_sq[static_cast<std::size_t>(e2)] += out.hbar[static_cast<std::size_t>(e2)] * inv_sqrt_eps * sum;
        } else if (is_neumann(mesh, edge)) {
            const Point pa = mesh.vertex(edge.vertices[0]);
            const Point pb = mesh.vertex(edge.vertices[1]);
            double sum = 0.0;
            for (std::size_t q = 0; q < neumann_rule.weights.size(); ++q) {
                const double t = neumann_rule.points[q];
                eval_basis(p, detail::edge_barycentric(mesh, e1, edge.vertices[0], edge.vertices[1], t),
                           grad_lambda[static_cast<std::size_t>(e1)], basis);
                const Point x = (1.0 - t) * pa + t * pb;
                const double r = problem.neumann(x, n) - eps * dot(sample(w, d1, basis).gradient, n);
                sum += neumann_rule.weights[q] * len * r * r;
            }
            out.neumann_sq[static_cast<std::size_t>(e1)] += out.hbar[static_cast<std::size_t>(e1)] * inv_sqrt_eps * sum;
        }
    }

    out.indicators_sq.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        out.indicators_sq[e] = out.volume_sq[e] + out.jump_sq[e] + out.neumann_sq[e];
    }
    if (options.with_oscillations) {
        out.oscillations_sq = oscillations(w, problem, options.volume_degree);
    }
    return out;
}

std::vector<double> oscillations(const DiscreteFunction& w, const ProblemSpec& problem, int volume_degree)
{
    const FeSpace& space = w.space();
    const Mesh& mesh = space.mesh();
    const int p = space.degree();
    const double inv_sqrt_eps = 1.0 / std::sqrt(problem.epsilon);
    const auto& rule = triangle_rule(volume_rule_degree(w, volume_degree));
    const auto nq = static_cast<Eigen::Index>(rule.weights.size());
    const Eigen::Index nb = p == 1 ? 1 : 3;

    // Basis of P^{p-1}(T) at the quadrature points: {1} or barycentrics.
    Eigen::MatrixXd vbasis(nq, nb);
    for (Eigen::Index q = 0; q < nq; ++q) {
        for (Eigen::Index i = 0; i < nb; ++i) {
            vbasis(q, i) = p == 1 ? 1.0 : rule.points[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)];
        }
    }

    std::vector<double> osc(static_cast<std::size_t>(mesh.num_elements()), 0.0);
    LocalBasis basis;
    Eigen::VectorXd wq(nq), ax(nq), ay(nq), beta(nq), f(nq);
    std::vector<PointSample> samples(static_cast<std::size_t>(nq));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto corners = mesh.corners(e);
        const AffineMap map(corners);
        const auto gl = map.barycentric_gradients();
        const auto dofs = space.element_dofs(e);
        for (Eigen::Index q = 0; q < nq; ++q) {
            const auto& lambda = rule.points[static_cast<std::size_t>(q)];
            const Point x = detail::barycentric_to_physical(corners, lambda);
            wq[q] = rule.weights[static_cast<std::size_t>(q)] * map.det();
            const Vec2 a = problem.convection(x);
            ax[q] = a.x;
            ay[q] = a.y;
            beta[q] = problem.reaction(x);
            f[q] = problem.source(x);
            eval_basis(p, lambda, gl, basis);
            samples[static_cast<std::size_t>(q)] = sample(w, dofs, basis);
        }
        const Eigen::VectorXd ax_h = vbasis * project(vbasis, wq, ax);
        const Eigen::VectorXd ay_h = vbasis * project(vbasis, wq, ay);
        const Eigen::VectorXd beta_h = vbasis * project(vbasis, wq, beta);
        const Eigen::VectorXd f_h = vbasis * project(vbasis, wq, f);
        double sum = 0.0;
        for (Eigen::Index q = 0; q < nq; ++q) {
            const auto& s = samples[static_cast<std::size_t>(q)];
            const double r = (ax[q] - ax_h[q]) * s.gradient.x + (ay[q] - ay_h[q]) * s.gradient.y +
                             (beta[q] - beta_h[q]) * s.value - (f[q] - f_h[q]);
            sum += wq[q] * r * r;
        }
        const double hb = hbar(problem, element_size(mesh, e));
        osc[static_cast<std::size_t>(e)] = hb * hb * sum;
    }

    const auto& erule = edge_rule(std::max(2 * p + 1, volume_rule_degree(w, volume_degree)));
    const auto ne = static_cast<Eigen::Index>(erule.weights.size());
    const Eigen::Index eb = p == 1 ? 1 : 2;
    Eigen::MatrixXd ebasis(ne, eb);
    for (Eigen::Index q = 0; q < ne; ++q) {
        const double t = erule.points[static_cast<std::size_t>(q)];
        ebasis(q, 0) = p == 1 ? 1.0 : 1.0 - t;
        if (eb == 2) {
            ebasis(q, 1) = t;
        }
    }
    Eigen::VectorXd ew(ne), g(ne);
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const auto& edge = mesh.edge(k);
        if (!is_neumann(mesh, edge)) {
            continue;
        }
        const int e = edge.elements[0];
        const Vec2 n = edge_normal(mesh, k, e);
        const double len = edge_length(mesh, k);
        const Point pa = mesh.vertex(edge.vertices[0]);
        const Point pb = mesh.vertex(edge.vertices[1]);
        for (Eigen::Index q = 0; q < ne; ++q) {
            const double t = erule.points[static_cast<std::size_t>(q)];
            ew[q] = erule.weights[static_cast<std::size_t>(q)] * len;
            g[q] = problem.neumann((1.0 - t) * pa + t * pb, n);
        }
        const Eigen::VectorXd g_h = ebasis * project(ebasis, ew, g);
        const double sum = (ew.array() * (g - g_h).array().square()).sum();
        const double hb = hbar(problem, element_size(mesh, e));
        osc[static_cast<std::size_t>(e)] += hb * inv_sqrt_eps * sum;
    }
    return osc;
}

namespace {

double energy_sq(const DiscreteFunction& v, const ProblemSpec& problem, int e, const TriangleQuadrature& rule)
{
    const Mesh& mesh = v.space().mesh();
    const AffineMap map = mesh.affine_map(e);
    const auto gl = map.barycentric_gradients();
    const auto dofs = v.space().element_dofs(e);
    LocalBasis basis;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        eval_basis(v.space().degree(), rule.points[q], gl, basis);
        const auto s = sample(v, dofs, basis);
        sum += rule.weights[q] * map.det() *
               (problem.epsilon * dot(s.gradient, s.gradient) + problem.gamma * s.value * s.value);
    }
    return sum;
}

} // namespace

double energy_norm(const DiscreteFunction& v, const ProblemSpec& problem)
{
    const auto& rule = triangle_rule(2 * v.space().degree());
    double sum = 0.0;
    for (int e = 0; e < v.space().mesh().num_elements(); ++e) {
        sum += energy_sq(v, problem, e, rule);
    }
    return std::sqrt(sum);
}

double energy_norm(const DiscreteFunction& v, const ProblemSpec& problem, std::span<const int> subset)
{
    const auto& rule = triangle_rule(2 * v.space().degree());
    double sum = 0.0;
    for (int e : subset) {
        sum += energy_sq(v, problem, e, rule);
    }
    return std::sqrt(sum);
}

EnergyError energy_error(const DiscreteFunction& uh, const ProblemSpec& problem, std::span<const double> theta,
                         int degree)
{
    if (!problem.exact) {
        throw std::invalid_argument("problem '" + problem.name + "' has no exact solution");
    }
    const FeSpace& space = uh.space();
    const Mesh& mesh = space.mesh();
    const auto& rule = triangle_rule(degree > 0 ? degree : default_load_degree(space.degree()));
    const auto& exact = *problem.exact;
    double err = 0.0;
    double streamline = 0.0;
    double unorm = 0.0;
    LocalBasis basis;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto corners = mesh.corners(e);
        const AffineMap map(corners);
        const auto gl = map.barycentric_gradients();
        const auto dofs = space.element_dofs(e);
        const double th = theta.empty() ? 0.0 : theta[static_cast<std::size_t>(e)];
        double el_stream = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            eval_basis(space.degree(), rule.points[q], gl, basis);
            const auto s = sample(uh, dofs, basis);
            const Point x = detail::barycentric_to_physical(corners, rule.points[q]);
            const double u = exact.value(x);
            const Vec2 gu = exact.gradient(x);
            const double dv = u - s.value;
            const Vec2 dg = gu - s.gradient;
            const double w = rule.weights[q] * map.det();
            err += w * (problem.epsilon * dot(dg, dg) + problem.gamma * dv * dv);
            unorm += w * (problem.epsilon * dot(gu, gu) + problem.gamma * u * u);
            const double ad = dot(problem.convection(x), dg);
            el_stream += w * ad * ad;
        }
        streamline += th * el_stream;
    }
    return {std::sqrt(err), std::sqrt(err + streamline), std::sqrt(unorm)};
}

} // namespace afem
