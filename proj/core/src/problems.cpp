#include "afem/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

namespace afem {

namespace {

struct Square {
    double x0;
    double y0;
    double size;
};

bool on_segment(const Segment& s, Point p)
{
    const Vec2 d = s.b - s.a;
    const double len = norm(d);
    if (std::abs(cross(d, p - s.a)) > 1e-12 * len) {
        return false;
    }
    const double t = dot(p - s.a, d) / (len * len);
    return t >= -1e-12 && t <= 1.0 + 1e-12;
}

/// Each square split into four triangles by its diagonals; every triangle is
/// written as (center, a, b) counter-clockwise so the square side is the
/// refinement edge.
Mesh crossed_squares(const std::vector<Square>& squares, const std::vector<Segment>& neumann)
{
    std::vector<Point> vertices;
    std::map<std::pair<long long, long long>, int> index;
    auto vertex = [&](Point p) {
        const std::pair<long long, long long> key{std::llround(p.x * 1e9), std::llround(p.y * 1e9)};
        const auto [it, inserted] = index.try_emplace(key, static_cast<int>(vertices.size()));
        if (inserted) {
            vertices.push_back(p);
        }
        return it->second;
    };

    std::vector<Triangle> elements;
    std::map<std::pair<int, int>, int> side_count;
    for (const auto& sq : squares) {
        const double s = sq.size;
        const std::array<int, 4> c{vertex({sq.x0, sq.y0}), vertex({sq.x0 + s, sq.y0}), vertex({sq.x0 + s, sq.y0 + s}),
                                   vertex({sq.x0, sq.y0 + s})};
        const int mid = vertex({sq.x0 + 0.5 * s, sq.y0 + 0.5 * s});
        for (std::size_t k = 0; k < 4; ++k) {
            const int a = c[k];
            const int b = c[(k + 1) % 4];
            elements.push_back({mid, a, b});
            ++side_count[{std::min(a, b), std::max(a, b)}];
        }
    }

    std::vector<BoundaryFacet> boundary;
    for (const auto& [side, count] : side_count) {
        if (count != 1) {
            continue;
        }
        const Point m = 0.5 * (vertices[static_cast<std::size_t>(side.first)] +
                               vertices[static_cast<std::size_t>(side.second)]);
        const bool is_neumann = std::any_of(neumann.begin(), neumann.end(), [&](const Segment& seg) {
            return on_segment(seg, vertices[static_cast<std::size_t>(side.first)]) &&
                   on_segment(seg, vertices[static_cast<std::size_t>(side.second)]) && on_segment(seg, m);
        });
        boundary.push_back({{side.first, side.second}, is_neumann ? BoundaryLabel::Neumann : BoundaryLabel::Dirichlet});
    }
    return with_longest_edge_refinement(Mesh(std::move(vertices), std::move(elements), std::move(boundary)));
}

ProblemSpec constant_coefficients(std::string name, double eps, Vec2 alpha, double beta, double gamma)
{
    ProblemSpec p;
    p.name = std::move(name);
    p.epsilon = eps;
    p.convection = [alpha](Point) { return alpha; };
    p.convection_divergence = [](Point) { return 0.0; };
    p.reaction = [beta](Point) { return beta; };
    p.gamma = gamma;
    p.c_beta = gamma > 0.0 ? std::abs(beta) / gamma : 0.0;
    p.convection_max = norm(alpha);
    return p;
}

Benchmark smooth_layer()
{
    const double eps = 1e-4;
    const Vec2 alpha{2.0, 3.0};
    const double beta = 2.0;
    ProblemSpec p = constant_coefficients("smooth_layer", eps, alpha, beta, 2.0);
    const double s = 1.0 / std::sqrt(eps);
    const double pi = std::numbers::pi;

    struct Parts {
        double u;
        Vec2 grad;
        double lap;
    };
    auto parts = [s, pi](Point x) {
        const double bx = x.x * (1.0 - x.x);
        const double by = x.y * (1.0 - x.y);
        const double P = 16.0 * bx * by;
        const Vec2 gP{16.0 * (1.0 - 2.0 * x.x) * by, 16.0 * bx * (1.0 - 2.0 * x.y)};
        const double lapP = -32.0 * (by + bx);

        const double dx = x.x - 0.5;
        const double dy = x.y - 0.5;
        const double A = 2.0 * s * (0.0625 - dx * dx - dy * dy);
        const Vec2 gA{-4.0 * s * dx, -4.0 * s * dy};
        const double Axx = -4.0 * s;
        const double q = 1.0 + A * A;
        const double Q = 0.5 + std::atan(A) / pi;
        const Vec2 gQ = (1.0 / (pi * q)) * gA;
        const double lapQ = (2.0 * Axx * q - 2.0 * A * dot(gA, gA)) / (pi * q * q);
        return Parts{P * Q, Q * gP + P * gQ, lapP * Q + 2.0 * dot(gP, gQ) + P * lapQ};
    };

    ExactSolution exact;
    exact.value = [parts](Point x) { return parts(x).u; };
    exact.gradient = [parts](Point x) { return parts(x).grad; };
    p.exact = exact;
    p.source = [parts, eps, alpha, beta](Point x) {
        const auto v = parts(x);
        return -eps * v.lap + dot(alpha, v.grad) + beta * v.u;
    };
    p.dirichlet = [](Point) { return 0.0; };
    p.neumann = [](Point, Vec2) { return 0.0; };
    return {std::move(p), unit_square_mesh()};
}

double polar_angle(Point x)
{
    double phi = std::atan2(x.y, x.x);
    if (phi < 0.0) {
        phi += 2.0 * std::numbers::pi;
    }
    return phi;
}

Benchmark lshape_singular()
{
    const double eps = 1e-3;
    const Vec2 alpha{2.0, 3.0};
    const double beta = 2.0;
    ProblemSpec p = constant_coefficients("lshape_singular", eps, alpha, beta, 2.0);
    auto u = [](Point x) {
        const double r = std::hypot(x.x, x.y);
        return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * polar_angle(x) / 3.0);
    };
    auto grad = [](Point x) {
        const double r = std::hypot(x.x, x.y);
        if (r == 0.0) {
            return Vec2{0.0, 0.0};
        }
        const double phi = polar_angle(x);
        const double c = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
        return Vec2{-c * std::sin(phi / 3.0), c * std::cos(phi / 3.0)};
    };
    p.exact = ExactSolution{u, grad};
    p.source = [u, grad, alpha, beta](Point x) { return dot(alpha, grad(x)) + beta * u(x); };
    p.dirichlet = u;
    p.neumann = [grad, eps](Point x, Vec2 n) { return eps * dot(grad(x), n); };
    return {std::move(p), lshape_mesh({{{-1.0, 1.0}, {1.0, 1.0}}, {{1.0, 0.0}, {1.0, 1.0}}})};
}

Benchmark lshape_practical()
{
    ProblemSpec p = constant_coefficients("lshape_practical", 1e-3, {3.0, 2.0}, 1.0, 1.0);
    p.source = [](Point x) {
        return (x.x >= -0.7 && x.x <= -0.3 && x.y >= -0.7 && x.y <= -0.3) ? 5.0 : 0.0;
    };
    p.dirichlet = [](Point) { return 0.0; };
    p.neumann = [](Point, Vec2) { return 1e-3; };
    return {std::move(p),
            lshape_mesh({{{0.0, -1.0}, {0.0, 0.0}}, {{1.0, 0.0}, {1.0, 1.0}}, {{0.0, 1.0}, {1.0, 1.0}}})};
}

Benchmark consistency(bool quadratic)
{
    ProblemSpec p = constant_coefficients(quadratic ? "consistency_quadratic" : "consistency_linear", 1.0, {1.0, 1.0},
                                          1.0, 1.0);
    ExactSolution exact;
    if (quadratic) {
        exact.value = [](Point x) { return x.x * x.y; };
        exact.gradient = [](Point x) { return Vec2{x.y, x.x}; };
        p.source = [](Point x) { return x.x + x.y + x.x * x.y; };
    } else {
        exact.value = [](Point x) { return x.x + x.y; };
        exact.gradient = [](Point) { return Vec2{1.0, 1.0}; };
        p.source = [](Point x) { return 2.0 + x.x + x.y; };
    }
    p.dirichlet = exact.value;
    p.neumann = [](Point, Vec2) { return 0.0; };
    p.exact = exact;
    return {std::move(p), unit_square_mesh()};
}

constexpr std::array<std::pair<BenchmarkId, std::string_view>, 5> kNames{{
    {BenchmarkId::SmoothLayer, "smooth_layer"},
    {BenchmarkId::LShapeSingular, "lshape_singular"},
    {BenchmarkId::LShapePractical, "lshape_practical"},
    {BenchmarkId::ConsistencyLinear, "consistency_linear"},
    {BenchmarkId::ConsistencyQuadratic, "consistency_quadratic"},
}};

} // namespace

const std::vector<BenchmarkId>& all_benchmarks()
{
    static const std::vector<BenchmarkId> ids{BenchmarkId::SmoothLayer, BenchmarkId::LShapeSingular,
                                              BenchmarkId::LShapePractical, BenchmarkId::ConsistencyLinear,
                                              BenchmarkId::ConsistencyQuadratic};
    return ids;
}

std::string_view benchmark_name(BenchmarkId id)
{
    for (const auto& [key, name] : kNames) {
        if (key == id) {
            return name;
        }
    }
    return "unknown";
}

BenchmarkId parse_benchmark(std::string_view name)
{
    for (const auto& [key, n] : kNames) {
        if (n == name) {
            return key;
        }
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

Benchmark build_benchmark(BenchmarkId id)
{
    switch (id) {
    case BenchmarkId::SmoothLayer:
        return smooth_layer();
    case BenchmarkId::LShapeSingular:
        return lshape_singular();
    case BenchmarkId::LShapePractical:
        return lshape_practical();
    case BenchmarkId::ConsistencyLinear:
        return consistency(false);
    case BenchmarkId::ConsistencyQuadratic:
        return consistency(true);
    }
    throw std::invalid_argument("unknown benchmark id");
}

Mesh unit_square_mesh(BoundaryLabel label)
{
    std::vector<Segment> neumann;
    if (label == BoundaryLabel::Neumann) {
        neumann = {{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {0, 0}}};
    }
    return crossed_squares({{0.0, 0.0, 0.5}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}, {0.5, 0.5, 0.5}}, neumann);
}

Mesh lshape_mesh(const std::vector<Segment>& neumann)
{
    return crossed_squares({{-1.0, -1.0, 1.0}, {-1.0, 0.0, 1.0}, {0.0, 0.0, 1.0}}, neumann);
}

DataReport verify_data(const ProblemSpec& problem, const Mesh& mesh, int samples, std::uint64_t seed,
                       double tolerance)
{
    if (!problem.exact) {
        throw std::invalid_argument("problem '" + problem.name + "' has no exact solution");
    }
    const auto& u = problem.exact->value;
    const auto& grad = problem.exact->gradient;
    const double h = 1e-5;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, mesh.num_elements() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DataReport report;
    auto relative = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    int taken = 0;
    while (taken < samples) {
        const auto c = mesh.corners(pick(rng));
        double l1 = unit(rng);
        double l2 = unit(rng);
        if (l1 + l2 > 1.0) {
            l1 = 1.0 - l1;
            l2 = 1.0 - l2;
        }
        const double l0 = 1.0 - l1 - l2;
        if (std::min({l0, l1, l2}) < 0.05) {
            continue;
        }
        const Point x = l0 * c[0] + l1 * c[1] + l2 * c[2];
        if (norm(x) < 1e-2) {
            continue;
        }
        ++taken;
        const Point ex{h, 0.0};
        const Point ey{0.0, h};
        const double u0 = u(x);
        const double uxp = u(x + ex);
        const double uxm = u(x - ex);
        const double uyp = u(x + ey);
        const double uym = u(x - ey);
        const Vec2 fd_grad{(uxp - uxm) / (2.0 * h), (uyp - uym) / (2.0 * h)};
        const double fd_lap = (uxp + uxm + uyp + uym - 4.0 * u0) / (h * h);
        const Vec2 g = grad(x);
        const double gm = std::max(relative(g.x, fd_grad.x), relative(g.y, fd_grad.y));
        const double fd_f = -problem.epsilon * fd_lap + dot(problem.convection(x), fd_grad) + problem.reaction(x) * u0;
        const double fm = relative(problem.source(x), fd_f);
        if (std::max(gm, fm) > std::max(report.gradient_mismatch, report.source_mismatch)) {
            report.worst = x;
        }
        report.gradient_mismatch = std::max(report.gradient_mismatch, gm);
        report.source_mismatch = std::max(report.source_mismatch, fm);
    }
    report.ok = report.gradient_mismatch <= tolerance && report.source_mismatch <= tolerance;
    return report;
}

} // namespace afem
