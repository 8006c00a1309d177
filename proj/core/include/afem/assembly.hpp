#pragma once

#include "afem/mesh.hpp"
#include "afem/problem.hpp"
#include "afem/space.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace afem {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class StabilizationMode {
    None,         // plain Galerkin, theta_T = 0
    Generic,      // delta0 h_T (Pe_T > 1), delta1 h_T^2 / eps (Pe_T <= 1)
    DegreeScaled, // h_T / (p |alpha|_inf) (Pe_T > 1), h_T^2 / (2 eps p^2) (Pe_T <= 1)
};

struct StabilizationConfig {
    StabilizationMode mode = StabilizationMode::DegreeScaled;
    double delta0 = 0.5;
    double delta1 = 0.5;
    /// Cap theta_T at the coercivity bound of stabilization_bound().
    bool clamp = false;
};

struct AssemblyOptions {
    /// Quadrature degree for terms involving data (f, g, non-constant
    /// coefficients); 0 selects max(2p + 2, 6).
    int load_degree = 0;
    /// Run validate_problem() first.
    bool validate = false;
};

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] int default_load_degree(int p);

/// |alpha|_{L^inf(T)} sampled at quadrature points of T.
[[nodiscard]] double convection_norm(const ProblemSpec& problem, const Mesh& mesh, int e);

/// Local Peclet number |alpha|_{L^inf(T)} h_T / (2 eps).
[[nodiscard]] double peclet(const ProblemSpec& problem, const Mesh& mesh, int e);

/// Smallest C with h_T |Lap v|_{L2(T)} <= C |grad v|_{L2(T)} for all v in P^p(T),
/// from the local generalized eigenproblem (0 for p = 1).
[[nodiscard]] double laplacian_inverse_constant(const Mesh& mesh, int e, int degree);

/// Upper bound on theta_T under which b_h stays coercive with constant 1/2:
///   p = 1:  gamma / |beta|^2_{L^inf(T)}
///   p >= 2: min{h_T^2 / (eps C^2), gamma / |beta|^2_{L^inf(T)}} / 2
/// where C = laplacian_inverse_constant(). Infinite entries are dropped
/// (beta = 0, or p = 1 with gamma = 0).
[[nodiscard]] double stabilization_bound(const ProblemSpec& problem, const Mesh& mesh, int e, int degree);

[[nodiscard]] double stabilization_parameter(const ProblemSpec& problem, const Mesh& mesh, int e, int degree,
                                             const StabilizationConfig& config);

[[nodiscard]] std::vector<double> stabilization_parameters(const ProblemSpec& problem, const Mesh& mesh, int degree,
                                                           const StabilizationConfig& config);

/// Unconstrained SUPG operator: matrix(i, j) = b_h(phi_j, phi_i) and
/// load(i) = F_h(phi_i), including the Neumann term.
struct Forms {
    SparseMatrix matrix;
    Eigen::VectorXd load;
};

[[nodiscard]] Forms assemble_forms(const FeSpace& space, const ProblemSpec& problem, std::span<const double> theta,
                                   const AssemblyOptions& options = {});

/// Linear system with Dirichlet rows replaced by identity rows and the
/// Dirichlet columns moved to the right-hand side.
struct SparseSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<char> constrained;
    /// Nodal Dirichlet values on constrained dofs, zero elsewhere.
    Eigen::VectorXd lifting;
    std::vector<double> theta;
};

[[nodiscard]] SparseSystem constrain(const Forms& forms, const FeSpace& space, const ProblemSpec& problem);

[[nodiscard]] SparseSystem assemble(const FeSpace& space, const ProblemSpec& problem,
                                    const StabilizationConfig& config, const AssemblyOptions& options = {});

/// max over free dofs i of |b_h(u, phi_i) - F_h(phi_i)|.
[[nodiscard]] double residual_check(const FeSpace& space, const ProblemSpec& problem,
                                    const StabilizationConfig& config, const DiscreteFunction& u,
                                    const AssemblyOptions& options = {});

/// Gram matrix of the energy inner product eps (grad u, grad v) + gamma (u, v).
[[nodiscard]] SparseMatrix energy_gram(const FeSpace& space, const ProblemSpec& problem);

/// sum_T theta_T (alpha . grad u, alpha . grad v)_T.
[[nodiscard]] SparseMatrix streamline_gram(const FeSpace& space, const ProblemSpec& problem,
                                           std::span<const double> theta);

/// Coordinate text export, one "i j value" line per stored entry.
void write_matrix_coordinates(std::ostream& out, const SparseMatrix& matrix);

} // namespace afem
