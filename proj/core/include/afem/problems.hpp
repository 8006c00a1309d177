#pragma once

#include "afem/mesh.hpp"
#include "afem/problem.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace afem {

enum class BenchmarkId {
    SmoothLayer,          // unit square, interior circular layer, eps = 1e-4
    LShapeSingular,       // L-shape, r^{2/3} sin(2 phi / 3), eps = 1e-3
    LShapePractical,      // L-shape, piecewise constant source, no exact solution
    ConsistencyLinear,    // unit square, u = x + y
    ConsistencyQuadratic, // unit square, u = x y
};

[[nodiscard]] const std::vector<BenchmarkId>& all_benchmarks();
[[nodiscard]] std::string_view benchmark_name(BenchmarkId id);
/// Throws std::invalid_argument on an unknown name.
[[nodiscard]] BenchmarkId parse_benchmark(std::string_view name);

struct Benchmark {
    ProblemSpec problem;
    Mesh mesh;
};

/// Problem data and initial mesh; refinement edges already assigned.
[[nodiscard]] Benchmark build_benchmark(BenchmarkId id);

/// (0,1)^2 as a 2x2 grid of squares, each cut into four by its diagonals.
[[nodiscard]] Mesh unit_square_mesh(BoundaryLabel label = BoundaryLabel::Dirichlet);

/// (-1,1)^2 \ [0,1]x[-1,0] built the same way from three squares; edges on the
/// listed segments are Neumann, the rest Dirichlet.
struct Segment {
    Point a;
    Point b;
};
[[nodiscard]] Mesh lshape_mesh(const std::vector<Segment>& neumann = {});

struct DataReport {
    double gradient_mismatch = 0.0; // max relative |grad u - FD|
    double source_mismatch = 0.0;   // max relative |f - FD(-eps Lap u + alpha.grad u + beta u)|
    Point worst;
    bool ok = false;
};

/// Compares the closed-form gradient and source against central finite
/// differences of the exact solution at random interior points.
/// Throws std::invalid_argument when the problem has no exact solution.
[[nodiscard]] DataReport verify_data(const ProblemSpec& problem, const Mesh& mesh, int samples = 100,
                                     std::uint64_t seed = 1, double tolerance = 1e-4);

} // namespace afem
