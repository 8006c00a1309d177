#include "afem/adapt.hpp"
#include "afem/problems.hpp"
#include "afem/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunOptions {
    std::string problem;
    int degree = 1;
    double theta = 0.5;
    int max_dofs = 0;
    int max_steps = 60;
    double solver_tol = 1e-10;
    std::string solver = "direct";
    std::string stabilization = "degree_scaled";
    bool clamp = false;
    int quad_degree = 0;
    std::string out = "out";
    std::string snapshots;
};

std::set<int> parse_steps(const std::string& list)
{
    std::set<int> steps;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 0) {
            throw std::invalid_argument("bad snapshot step '" + item + "'");
        }
        steps.insert(v);
    }
    return steps;
}

std::string step_file(const fs::path& dir, const char* stem, int step)
{
    char name[64];
    std::snprintf(name, sizeof name, "%s_step_%02d.txt", stem, step);
    return (dir / name).string();
}

nlohmann::json meta_json(const RunOptions& o, const afem::AdaptConfig& config)
{
    return {
        {"problem", o.problem},
        {"degree", o.degree},
        {"theta", o.theta},
        {"max_dofs", afem::effective_max_dofs(config)},
        {"max_steps", o.max_steps},
        {"solver", o.solver},
        {"solver_tol", o.solver_tol},
        {"stabilization", o.stabilization},
        {"clamp", o.clamp},
        {"quad_degree", o.quad_degree},
        {"snapshots", o.snapshots},
    };
}

int run(const RunOptions& o)
{
    const afem::Benchmark bench = afem::build_benchmark(afem::parse_benchmark(o.problem));

    afem::AdaptConfig config;
    config.theta = o.theta;
    config.degree = o.degree;
    config.max_dofs = o.max_dofs;
    config.max_steps = o.max_steps;
    config.quad_degree = o.quad_degree;
    config.solver.tolerance = o.solver_tol;
    config.solver.method = o.solver == "krylov" ? afem::SolverMethod::Krylov : afem::SolverMethod::Direct;
    config.stabilization.clamp = o.clamp;
    if (o.stabilization == "generic") {
        config.stabilization.mode = afem::StabilizationMode::Generic;
    } else if (o.stabilization == "none") {
        config.stabilization.mode = afem::StabilizationMode::None;
    }
    const std::set<int> snapshots = parse_steps(o.snapshots);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    nlohmann::json meta = meta_json(o, config);
    auto write_meta = [&] {
        std::ofstream out(dir / "run_meta.json");
        out << meta.dump(2) << '\n';
    };
    write_meta();

    std::ofstream csv(dir / "results.csv");
    afem::write_csv_header(csv);
    csv.flush();

    auto observer = [&](const afem::AdaptRecord& rec, const afem::DiscreteFunction& uh) {
        afem::write_csv_row(csv, rec);
        csv.flush();
        std::cerr << "step " << rec.step << "  elements " << rec.n_elem << "  dofs " << rec.n_dofs << "  eta "
                  << rec.eta;
        if (rec.err_energy) {
            std::cerr << "  err " << *rec.err_energy;
        }
        std::cerr << '\n';
        if (snapshots.count(rec.step) != 0) {
            afem::write_mesh_file(step_file(dir, "mesh", rec.step), uh.space().mesh());
            std::ofstream sol(step_file(dir, "solution", rec.step));
            afem::write_coefficients(sol, uh);
        }
    };

    try {
        const auto result = afem::adaptive_solve(bench.problem, bench.mesh, config, observer);
        meta["steps"] = result.records.size();
        meta["status"] = "ok";
        write_meta();
        return 0;
    } catch (const afem::AdaptFailure& e) {
        meta["steps"] = e.records().size();
        meta["status"] = e.what();
        write_meta();
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

int slope(const std::string& path, const std::string& column, double tail)
{
    const auto table = afem::read_csv_file(path);
    std::printf("%.6f\n", afem::csv_rate(table, column, tail));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive SUPG finite element solver for convection-diffusion problems"};
    app.require_subcommand(0, 1);

    RunOptions o;
    app.add_option("--problem", o.problem,
                   "smooth_layer | lshape_singular | lshape_practical | consistency_linear | consistency_quadratic");
    app.add_option("--degree", o.degree, "Polynomial degree")->check(CLI::IsMember({1, 2}));
    app.add_option("--theta", o.theta, "Marking parameter in (0, 1]; 1 refines uniformly")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--max-dofs", o.max_dofs, "Stop before exceeding this many dofs (0: 2e5 for p=1, 4e5 for p=2)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--max-steps", o.max_steps, "Maximum number of adaptive steps")->check(CLI::PositiveNumber);
    app.add_option("--solver-tol", o.solver_tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
    app.add_option("--solver", o.solver, "direct | krylov")->check(CLI::IsMember({"direct", "krylov"}));
    app.add_option("--stabilization", o.stabilization, "degree_scaled | generic | none")
        ->check(CLI::IsMember({"degree_scaled", "generic", "none"}));
    app.add_flag("--clamp", o.clamp, "Cap theta_T at the coercivity bound");
    app.add_option("--quad-degree", o.quad_degree, "Quadrature degree for data terms (0: default)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--snapshots", o.snapshots, "Comma-separated steps to dump mesh and solution, e.g. 0,5,14");

    std::string csv_path;
    std::string column = "eta";
    double tail = 0.5;
    auto* slope_cmd = app.add_subcommand("slope", "Fit the convergence rate of a results.csv column");
    slope_cmd->add_option("csv", csv_path, "results.csv")->required()->check(CLI::ExistingFile);
    slope_cmd->add_option("--column", column, "Column to fit against n_elem");
    slope_cmd->add_option("--tail", tail, "Trailing fraction of rows to fit")->check(CLI::Range(0.0, 1.0));

    CLI11_PARSE(app, argc, argv);

    try {
        if (slope_cmd->parsed()) {
            return slope(csv_path, column, tail);
        }
        if (o.problem.empty()) {
            std::cerr << "error: --problem is required\n" << app.help();
            return 1;
        }
        if (!(o.theta > 0.0)) {
            std::cerr << "error: --theta must be positive\n";
            return 1;
        }
        return run(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
