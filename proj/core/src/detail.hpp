#pragma once

#include "afem/mesh.hpp"

#include <array>
#include <stdexcept>

namespace afem::detail {

inline Point barycentric_to_physical(const std::array<Point, 3>& c, const std::array<double, 3>& lambda)
{
    return {lambda[0] * c[0].x + lambda[1] * c[1].x + lambda[2] * c[2].x,
            lambda[0] * c[0].y + lambda[1] * c[1].y + lambda[2] * c[2].y};
}

/// Barycentric coordinates in element e of the point (1 - t) v_a + t v_b.
inline std::array<double, 3> edge_barycentric(const Mesh& mesh, int e, int va, int vb, double t)
{
    std::array<double, 3> lambda{0.0, 0.0, 0.0};
    const auto& tri = mesh.element(e);
    int found = 0;
    for (int i = 0; i < 3; ++i) {
        if (tri[static_cast<std::size_t>(i)] == va) {
            lambda[static_cast<std::size_t>(i)] = 1.0 - t;
            ++found;
        } else if (tri[static_cast<std::size_t>(i)] == vb) {
            lambda[static_cast<std::size_t>(i)] = t;
            ++found;
        }
    }
    if (found != 2) {
        throw std::logic_error("edge is not part of the element");
    }
    return lambda;
}

} // namespace afem::detail
