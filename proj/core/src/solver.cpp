#include "afem/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <chrono>

namespace afem {

namespace {

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    const double bn = b.norm();
    const double rn = (b - a * x).norm();
    return bn > 0.0 ? rn / bn : rn;
}

void solve_direct(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options, SolveReport& report)
{
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
        report.solution = Eigen::VectorXd::Zero(b.size());
        report.relative_residual = b.norm() > 0.0 ? 1.0 : 0.0;
        report.message = "LU factorization failed: " + lu.lastErrorMessage();
        return;
    }
    report.solution = lu.solve(b);
    report.relative_residual = relative_residual(a, report.solution, b);
    // a few steps of iterative refinement if round-off left us above tolerance
    for (int step = 0; step < 3 && report.relative_residual > options.tolerance; ++step) {
        const Eigen::VectorXd r = b - a * report.solution;
        report.solution += lu.solve(r);
        report.relative_residual = relative_residual(a, report.solution, b);
        ++report.iterations;
    }
    report.converged = report.relative_residual <= options.tolerance;
    if (!report.converged) {
        report.message = "direct solve residual above tolerance";
    }
}

void solve_krylov(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options, SolveReport& report)
{
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
    gmres.setTolerance(options.tolerance);
    gmres.setMaxIterations(options.max_iterations);
    gmres.set_restart(options.restart);
    gmres.compute(a);
    if (gmres.info() != Eigen::Success) {
        report.solution = Eigen::VectorXd::Zero(b.size());
        report.relative_residual = b.norm() > 0.0 ? 1.0 : 0.0;
        report.message = "incomplete LU preconditioner failed";
        return;
    }
    report.solution = gmres.solve(b);
    report.iterations = static_cast<int>(gmres.iterations());
    report.relative_residual = relative_residual(a, report.solution, b);
    report.converged = report.relative_residual <= options.tolerance;
    if (!report.converged) {
        report.message = "GMRES stopped after " + std::to_string(report.iterations) + " iterations";
    }
}

} // namespace

SolveReport solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolverOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size() || matrix.rows() == 0) {
        report.solution = Eigen::VectorXd::Zero(rhs.size());
        report.relative_residual = 1.0;
        report.message = "system must be square, non-empty, and match the right-hand side";
        return report;
    }
    if (options.method == SolverMethod::Direct) {
        solve_direct(matrix, rhs, options, report);
    } else {
        solve_krylov(matrix, rhs, options, report);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

SolveReport solve(const SparseSystem& system, const SolverOptions& options)
{
    return solve(system.matrix, system.rhs, options);
}

} // namespace afem
