#include "afem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace afem {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
}

namespace {

void check_degree(int degree)
{
    if (degree < 0 || degree > kMaxQuadratureDegree) {
        throw std::invalid_argument("quadrature degree " + std::to_string(degree) + " not available");
    }
}

TriangleQuadrature make_triangle_rule(int degree)
{
    // (s,t) in [0,1]^2 -> xi = s, eta = t (1 - s); Jacobian (1 - s) raises the
    // degree in s by one.
    const int n = (degree + 3) / 2;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(n, x, w);
    TriangleQuadrature rule;
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
        const double s = 0.5 * (x[static_cast<std::size_t>(i)] + 1.0);
        const double ws = 0.5 * w[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double t = 0.5 * (x[static_cast<std::size_t>(j)] + 1.0);
            const double wt = 0.5 * w[static_cast<std::size_t>(j)];
            const double xi = s;
            const double eta = t * (1.0 - s);
            rule.points.push_back({1.0 - xi - eta, xi, eta});
            rule.weights.push_back(ws * wt * (1.0 - s));
        }
    }
    return rule;
}

EdgeQuadrature make_edge_rule(int degree)
{
    const int n = degree / 2 + 1;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(n, x, w);
    EdgeQuadrature rule;
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
        rule.points.push_back(0.5 * (x[static_cast<std::size_t>(i)] + 1.0));
        rule.weights.push_back(0.5 * w[static_cast<std::size_t>(i)]);
    }
    return rule;
}

template <class Rule, class Make>
const Rule& cached(int degree, Make make)
{
    static const std::vector<Rule> rules = [&] {
        std::vector<Rule> all;
        for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
            all.push_back(make(d));
        }
        return all;
    }();
    return rules[static_cast<std::size_t>(degree)];
}

} // namespace

const TriangleQuadrature& triangle_rule(int degree)
{
    check_degree(degree);
    return cached<TriangleQuadrature>(degree, make_triangle_rule);
}

const EdgeQuadrature& edge_rule(int degree)
{
    check_degree(degree);
    return cached<EdgeQuadrature>(degree, make_edge_rule);
}

} // namespace afem
