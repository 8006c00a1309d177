#include "afem/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace afem {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int count_dofs(const Mesh& mesh, int degree)
{
    return degree == 1 ? mesh.num_vertices() : mesh.num_vertices() + mesh.num_edges();
}

} // namespace

MarkSet doerfler_mark(std::span<const double> indicators_sq, double theta)
{
    std::vector<int> order(indicators_sq.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return indicators_sq[static_cast<std::size_t>(a)] > indicators_sq[static_cast<std::size_t>(b)];
    });
    double total = 0.0;
    for (int e : order) {
        total += indicators_sq[static_cast<std::size_t>(e)];
    }
    MarkSet marked;
    if (!(total > 0.0)) {
        return marked;
    }
    const double target = theta * total;
    double sum = 0.0;
    for (int e : order) {
        const double v = indicators_sq[static_cast<std::size_t>(e)];
        if (sum >= target || v <= 0.0) {
            break;
        }
        marked.push_back(e);
        sum += v;
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

MarkSet enlarge_marks(const Mesh& mesh, std::span<const int> marked)
{
    double h_max = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        h_max = std::max(h_max, element_size(mesh, e));
    }
    const double cutoff = h_max * (1.0 - 1e-10);
    MarkSet out(marked.begin(), marked.end());
    const bool has_largest =
        std::any_of(out.begin(), out.end(), [&](int e) { return element_size(mesh, e) >= cutoff; });
    if (!has_largest) {
        for (int e = 0; e < mesh.num_elements(); ++e) {
            if (element_size(mesh, e) >= cutoff) {
                out.insert(std::lower_bound(out.begin(), out.end(), e), e);
                break;
            }
        }
    }
    return out;
}

int effective_max_dofs(const AdaptConfig& config)
{
    if (config.max_dofs > 0) {
        return config.max_dofs;
    }
    return config.degree == 1 ? 200000 : 400000;
}

AdaptResult adaptive_solve(const ProblemSpec& problem, const Mesh& initial, const AdaptConfig& config,
                           const AdaptObserver& observer)
{
    if (!(config.theta > 0.0 && config.theta <= 1.0)) {
        throw std::invalid_argument("theta must lie in (0, 1]");
    }
    if (config.degree != 1 && config.degree != 2) {
        throw std::invalid_argument("degree must be 1 or 2");
    }
    if (config.max_steps < 1) {
        throw std::invalid_argument("max_steps must be positive");
    }
    if (config.validate) {
        validate_problem(problem, initial);
    }
    const int max_dofs = effective_max_dofs(config);
    AssemblyOptions assembly_options;
    assembly_options.load_degree = config.quad_degree;
    EstimatorOptions estimator_options;
    estimator_options.volume_degree = config.quad_degree;
    estimator_options.with_oscillations = true;

    auto mesh = std::make_shared<const Mesh>(initial);
    std::vector<AdaptRecord> records;
    for (int step = 0;; ++step) {
        AdaptRecord rec;
        rec.step = step;
        rec.n_elem = mesh->num_elements();
        rec.h_max = max_element_size(*mesh);

        auto start = Clock::now();
        auto space = build_space(mesh, config.degree);
        rec.n_dofs = space->n_dofs();
        const SparseSystem system = assemble(*space, problem, config.stabilization, assembly_options);
        SolveReport report = solve(system, config.solver);
        rec.solve_ms = elapsed_ms(start);
        rec.residual = report.relative_residual;
        if (!report.converged) {
            records.push_back(rec);
            throw AdaptFailure("step " + std::to_string(step) + ": " + report.message, std::move(records));
        }
        DiscreteFunction uh(space, std::move(report.solution));

        start = Clock::now();
        const EstimatorOutput est = estimate(uh, problem, estimator_options);
        rec.estimate_ms = elapsed_ms(start);
        rec.eta = est.total();
        rec.osc = est.oscillation_total();
        if (problem.exact) {
            const EnergyError err = energy_error(uh, problem, system.theta, config.quad_degree);
            rec.err_energy = err.energy;
            rec.err_supg = err.supg;
        }

        const bool last = step + 1 >= config.max_steps || (config.tolerance > 0.0 && rec.eta <= config.tolerance);
        std::optional<Mesh> next;
        if (!last) {
            start = Clock::now();
            MarkSet prime;
            if (config.theta >= 1.0) {
                prime.resize(static_cast<std::size_t>(mesh->num_elements()));
                std::iota(prime.begin(), prime.end(), 0);
            } else {
                prime = doerfler_mark(est.indicators_sq, config.theta);
            }
            const MarkSet marked = enlarge_marks(*mesh, prime);
            rec.n_marked_prime = static_cast<int>(prime.size());
            rec.n_marked = static_cast<int>(marked.size());
            for (int e : prime) {
                rec.eta_marked_sq += est.indicators_sq[static_cast<std::size_t>(e)];
            }
            for (int e : marked) {
                rec.h_max_marked = std::max(rec.h_max_marked, element_size(*mesh, e));
            }
            next.emplace(refine(*mesh, marked));
            rec.refine_ms = elapsed_ms(start);
        }

        records.push_back(rec);
        if (observer) {
            observer(rec, uh);
        }
        if (!next || count_dofs(*next, config.degree) > max_dofs) {
            return {std::move(records), std::move(uh)};
        }
        mesh = std::make_shared<const Mesh>(std::move(*next));
    }
}

} // namespace afem
