#include "afem/space.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace afem {

void eval_basis(int degree, const std::array<double, 3>& lambda, const std::array<Vec2, 3>& grad_lambda,
                LocalBasis& out)
{
    if (degree == 1) {
        out.size = 3;
        for (int i = 0; i < 3; ++i) {
            out.value[i] = lambda[i];
            out.gradient[i] = grad_lambda[i];
            out.laplacian[i] = 0.0;
        }
        return;
    }
    out.size = 6;
    for (int i = 0; i < 3; ++i) {
        out.value[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
        out.gradient[i] = (4.0 * lambda[i] - 1.0) * grad_lambda[i];
        out.laplacian[i] = 4.0 * dot(grad_lambda[i], grad_lambda[i]);
    }
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3;
        const int j = (k + 2) % 3;
        out.value[3 + k] = 4.0 * lambda[i] * lambda[j];
        out.gradient[3 + k] = 4.0 * (lambda[j] * grad_lambda[i] + lambda[i] * grad_lambda[j]);
        out.laplacian[3 + k] = 8.0 * dot(grad_lambda[i], grad_lambda[j]);
    }
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh))
    , degree_(degree)
    , local_size_(degree == 2 ? 6 : 3)
{
    if (degree != 1 && degree != 2) {
        throw std::invalid_argument("polynomial degree must be 1 or 2, got " + std::to_string(degree));
    }
    const Mesh& m = *mesh_;
    const int nv = m.num_vertices();
    n_dofs_ = degree == 1 ? nv : nv + m.num_edges();
    dof_map_.resize(static_cast<std::size_t>(m.num_elements()) * static_cast<std::size_t>(local_size_));
    for (int e = 0; e < m.num_elements(); ++e) {
        int* dofs = dof_map_.data() + static_cast<std::ptrdiff_t>(e) * local_size_;
        const auto& t = m.element(e);
        dofs[0] = t[0];
        dofs[1] = t[1];
        dofs[2] = t[2];
        if (degree == 2) {
            const auto& ek = m.element_edges(e);
            for (int k = 0; k < 3; ++k) {
                dofs[3 + k] = nv + ek[static_cast<std::size_t>(k)];
            }
        }
    }

    nodes_.assign(m.vertices().begin(), m.vertices().end());
    if (degree == 2) {
        for (const auto& edge : m.edges()) {
            nodes_.push_back(0.5 * (m.vertex(edge.vertices[0]) + m.vertex(edge.vertices[1])));
        }
    }

    dirichlet_.assign(static_cast<std::size_t>(n_dofs_), 0);
    for (const auto& f : m.boundary_facets()) {
        if (f.label != BoundaryLabel::Dirichlet) {
            continue;
        }
        dirichlet_[static_cast<std::size_t>(f.vertices[0])] = 1;
        dirichlet_[static_cast<std::size_t>(f.vertices[1])] = 1;
        if (degree == 2) {
            dirichlet_[static_cast<std::size_t>(nv + m.find_edge(f.vertices[0], f.vertices[1]))] = 1;
        }
    }
}

std::vector<int> FeSpace::dirichlet_dofs() const
{
    std::vector<int> out;
    for (int i = 0; i < n_dofs_; ++i) {
        if (dirichlet_[static_cast<std::size_t>(i)] != 0) {
            out.push_back(i);
        }
    }
    return out;
}

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree)
{
    return std::make_shared<const FeSpace>(std::move(mesh), degree);
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space))
    , coefficients_(std::move(coefficients))
{
    if (coefficients_.size() != space_->n_dofs()) {
        throw std::invalid_argument("coefficient vector length " + std::to_string(coefficients_.size()) +
                                    " does not match " + std::to_string(space_->n_dofs()) + " dofs");
    }
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space))
    , coefficients_(Eigen::VectorXd::Zero(space_->n_dofs()))
{
}

DiscreteFunction::Sample DiscreteFunction::evaluate(int element, Point ref) const
{
    return evaluate_barycentric(element, {1.0 - ref.x - ref.y, ref.x, ref.y});
}

DiscreteFunction::Sample DiscreteFunction::evaluate_barycentric(int element, const std::array<double, 3>& lambda) const
{
    const auto map = space_->mesh().affine_map(element);
    LocalBasis basis;
    eval_basis(space_->degree(), lambda, map.barycentric_gradients(), basis);
    Sample s;
    const auto dofs = space_->element_dofs(element);
    for (int i = 0; i < basis.size; ++i) {
        const double c = coefficients_[dofs[static_cast<std::size_t>(i)]];
        s.value += c * basis.value[i];
        s.gradient += c * basis.gradient[i];
    }
    return s;
}

DiscreteFunction interpolate(std::shared_ptr<const FeSpace> space, const std::function<double(Point)>& fn)
{
    Eigen::VectorXd c(space->n_dofs());
    for (int i = 0; i < space->n_dofs(); ++i) {
        c[i] = fn(space->node(i));
    }
    return {std::move(space), std::move(c)};
}

DiscreteFunction prolongate(const DiscreteFunction& coarse, std::shared_ptr<const FeSpace> fine)
{
    const Mesh& fm = fine->mesh();
    const Mesh& cm = coarse.space().mesh();
    if (fine->degree() < coarse.space().degree()) {
        throw std::invalid_argument("prolongation into a lower degree space");
    }
    Eigen::VectorXd c(fine->n_dofs());
    std::vector<char> done(static_cast<std::size_t>(fine->n_dofs()), 0);
    for (int e = 0; e < fm.num_elements(); ++e) {
        const int parent = fm.parent(e);
        if (parent < 0 || parent >= cm.num_elements()) {
            throw std::invalid_argument("fine mesh is not a refinement of the coarse mesh");
        }
        const auto map = cm.affine_map(parent);
        const auto dofs = fine->element_dofs(e);
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const int d = dofs[i];
            if (done[static_cast<std::size_t>(d)] != 0) {
                continue;
            }
            c[d] = coarse.evaluate(parent, map.to_reference(fine->node(d))).value;
            done[static_cast<std::size_t>(d)] = 1;
        }
    }
    return {std::move(fine), std::move(c)};
}

void write_coefficients(std::ostream& out, const DiscreteFunction& u)
{
    char buf[64];
    out << "DOFS " << u.coefficients().size() << '\n';
    for (Eigen::Index i = 0; i < u.coefficients().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", u.coefficients()[i]);
        out << buf;
    }
}

Eigen::VectorXd read_coefficients(std::istream& in)
{
    std::string word;
    long n = -1;
    if (!(in >> word >> n) || word != "DOFS" || n < 0) {
        throw std::runtime_error("expected 'DOFS n' header");
    }
    Eigen::VectorXd c(n);
    for (long i = 0; i < n; ++i) {
        if (!(in >> c[i])) {
            throw std::runtime_error("coefficient " + std::to_string(i) + " missing or malformed");
        }
    }
    return c;
}

} // namespace afem
