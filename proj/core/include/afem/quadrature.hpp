#pragma once

#include <array>
#include <vector>

namespace afem {

/// Rule on the reference triangle. Points are barycentric (lambda_0, lambda_1,
/// lambda_2); weights sum to the reference area 1/2.
struct TriangleQuadrature {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Rule on the reference edge [0,1]; weights sum to 1.
struct EdgeQuadrature {
    std::vector<double> points;
    std::vector<double> weights;
    int degree = 0;
};

inline constexpr int kMaxQuadratureDegree = 40;

/// Collapsed Gauss rule exact for polynomials of total degree <= `degree`.
/// All weights are positive. Rules are built once and shared.
[[nodiscard]] const TriangleQuadrature& triangle_rule(int degree);

/// Gauss-Legendre rule exact for polynomials of degree <= `degree`.
[[nodiscard]] const EdgeQuadrature& edge_rule(int degree);

/// Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace afem
