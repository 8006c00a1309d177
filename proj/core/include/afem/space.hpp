#pragma once

#include "afem/geometry.hpp"
#include "afem/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace afem {

inline constexpr int kMaxLocalDofs = 6;

/// Values, physical gradients and Laplacians of the local Lagrange basis at
/// one point of one element. Local dofs 0..2 sit at the vertices; for p = 2,
/// local dof 3 + k sits at the midpoint of the edge opposite vertex k.
struct LocalBasis {
    int size = 0;
    std::array<double, kMaxLocalDofs> value{};
    std::array<Vec2, kMaxLocalDofs> gradient{};
    std::array<double, kMaxLocalDofs> laplacian{};
};

/// Evaluates the degree-p basis at barycentric point `lambda`, given the
/// physical gradients of the barycentric coordinates.
void eval_basis(int degree, const std::array<double, 3>& lambda, const std::array<Vec2, 3>& grad_lambda,
                LocalBasis& out);

/// Lagrange space of degree 1 or 2 on a mesh, with global dof numbering and
/// the set of dofs on the closure of the Dirichlet boundary.
class FeSpace {
public:
    FeSpace(std::shared_ptr<const Mesh> mesh, int degree);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int n_dofs() const { return n_dofs_; }
    [[nodiscard]] int dofs_per_element() const { return local_size_; }

    [[nodiscard]] std::span<const int> element_dofs(int e) const
    {
        return {dof_map_.data() + static_cast<std::ptrdiff_t>(e) * local_size_, static_cast<std::size_t>(local_size_)};
    }

    [[nodiscard]] bool is_dirichlet(int dof) const { return dirichlet_[static_cast<std::size_t>(dof)] != 0; }
    [[nodiscard]] std::vector<int> dirichlet_dofs() const;

    /// Interpolation node of a global dof.
    [[nodiscard]] const Point& node(int dof) const { return nodes_[static_cast<std::size_t>(dof)]; }

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    int local_size_;
    int n_dofs_ = 0;
    std::vector<int> dof_map_;
    std::vector<char> dirichlet_;
    std::vector<Point> nodes_;
};

[[nodiscard]] std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree);

/// Coefficient vector bound to a space.
class DiscreteFunction {
public:
    struct Sample {
        double value = 0.0;
        Vec2 gradient;
    };

    DiscreteFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients);
    explicit DiscreteFunction(std::shared_ptr<const FeSpace> space);

    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coefficients_; }
    [[nodiscard]] Eigen::VectorXd& coefficients() { return coefficients_; }

    /// Value and gradient at reference point `ref` of element e.
    [[nodiscard]] Sample evaluate(int element, Point ref) const;
    [[nodiscard]] Sample evaluate_barycentric(int element, const std::array<double, 3>& lambda) const;

private:
    std::shared_ptr<const FeSpace> space_;
    Eigen::VectorXd coefficients_;
};

/// Nodal interpolant of a pointwise function.
[[nodiscard]] DiscreteFunction interpolate(std::shared_ptr<const FeSpace> space,
                                           const std::function<double(Point)>& fn);

/// Re-represents `coarse` on `fine`, where fine.mesh() was produced by refining
/// coarse.space().mesh() (so parent() indexes coarse elements). Exact for nested spaces.
[[nodiscard]] DiscreteFunction prolongate(const DiscreteFunction& coarse, std::shared_ptr<const FeSpace> fine);

/// "DOFS n" followed by one coefficient per line.
void write_coefficients(std::ostream& out, const DiscreteFunction& u);
[[nodiscard]] Eigen::VectorXd read_coefficients(std::istream& in);

} // namespace afem
