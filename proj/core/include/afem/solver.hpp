#pragma once

#include "afem/assembly.hpp"

#include <Eigen/Core>

#include <string>

namespace afem {

enum class SolverMethod {
    Direct, // sparse LU with partial pivoting
    Krylov, // restarted GMRES with incomplete LU preconditioning
};

struct SolverOptions {
    SolverMethod method = SolverMethod::Direct;
    /// Requested relative residual |Ax - b| / |b|.
    double tolerance = 1e-10;
    int max_iterations = 5000;
    int restart = 60;
};

struct SolveReport {
    Eigen::VectorXd solution;
    double relative_residual = 0.0;
    int iterations = 0;
    double seconds = 0.0;
    bool converged = false;
    std::string message;
};

/// Never throws on numerical failure: `converged` is false and `solution`
/// holds the best iterate available.
[[nodiscard]] SolveReport solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                const SolverOptions& options = {});
[[nodiscard]] SolveReport solve(const SparseSystem& system, const SolverOptions& options = {});

} // namespace afem
