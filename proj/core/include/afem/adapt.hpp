#pragma once

#include "afem/assembly.hpp"
#include "afem/estimator.hpp"
#include "afem/mesh.hpp"
#include "afem/problem.hpp"
#include "afem/solver.hpp"
#include "afem/space.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace afem {

/// Smallest set M' with sum_{T in M'} eta_T^2 >= theta sum_T eta_T^2, taken
/// greedily from the largest indicators (ties: ascending index). Returned in
/// ascending index order. All-zero indicators give an empty set.
[[nodiscard]] MarkSet doerfler_mark(std::span<const double> indicators_sq, double theta);

/// M' plus the lowest-index element of maximal h_T if M' lacks one.
[[nodiscard]] MarkSet enlarge_marks(const Mesh& mesh, std::span<const int> marked);

struct AdaptConfig {
    /// Bulk parameter in (0, 1]; 1 refines every element.
    double theta = 0.5;
    int degree = 1;
    /// Stop before solving on a mesh with more dofs; 0 picks 200000 (p = 1) or 400000 (p = 2).
    int max_dofs = 0;
    int max_steps = 60;
    /// Stop once eta drops below this value (0 disables).
    double tolerance = 0.0;
    StabilizationConfig stabilization;
    SolverOptions solver;
    /// Quadrature degree for data terms; 0 selects the default.
    int quad_degree = 0;
    bool validate = true;
};

[[nodiscard]] int effective_max_dofs(const AdaptConfig& config);

struct AdaptRecord {
    int step = 0;
    int n_elem = 0;
    int n_dofs = 0;
    double h_max = 0.0;
    double eta = 0.0;
    double osc = 0.0;
    std::optional<double> err_energy;
    std::optional<double> err_supg;
    /// Zero on the last step, where nothing is marked.
    int n_marked_prime = 0;
    int n_marked = 0;
    /// eta(M')^2 and max h_T over M, for checking the marking contract.
    double eta_marked_sq = 0.0;
    double h_max_marked = 0.0;
    double residual = 0.0;
    double solve_ms = 0.0;
    double estimate_ms = 0.0;
    double refine_ms = 0.0;
};

struct AdaptResult {
    std::vector<AdaptRecord> records;
    DiscreteFunction solution;
};

class AdaptFailure : public std::runtime_error {
public:
    AdaptFailure(const std::string& what, std::vector<AdaptRecord> records)
        : std::runtime_error(what)
        , records_(std::move(records))
    {
    }

    [[nodiscard]] const std::vector<AdaptRecord>& records() const { return records_; }

private:
    std::vector<AdaptRecord> records_;
};

/// Called after each step with the record and the discrete solution of that step.
using AdaptObserver = std::function<void(const AdaptRecord&, const DiscreteFunction&)>;

/// Solve, estimate, mark, enlarge, refine until a stopping bound is hit.
/// Throws AdaptFailure when a linear solve fails, and std::invalid_argument
/// on a bad configuration.
[[nodiscard]] AdaptResult adaptive_solve(const ProblemSpec& problem, const Mesh& initial, const AdaptConfig& config,
                                         const AdaptObserver& observer = {});

} // namespace afem
