#pragma once

#include <array>
#include <cmath>

namespace afem {

/// Point (or vector) in the plane.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

using Point = Vec2;

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr Vec2& operator+=(Vec2& a, Vec2 b)
{
    a.x += b.x;
    a.y += b.y;
    return a;
}
constexpr bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Affine map from the reference triangle (0,0),(1,0),(0,1) onto a physical
/// triangle with corners p0,p1,p2: x = p0 + J xi.
class AffineMap {
public:
    explicit AffineMap(const std::array<Point, 3>& corners)
        : origin_(corners[0])
    {
        const Vec2 e1 = corners[1] - corners[0];
        const Vec2 e2 = corners[2] - corners[0];
        j_ = {e1.x, e2.x, e1.y, e2.y};
        det_ = cross(e1, e2);
        inv_ = {e2.y / det_, -e2.x / det_, -e1.y / det_, e1.x / det_};
    }

    [[nodiscard]] double det() const { return det_; }

    [[nodiscard]] Point to_physical(Point ref) const
    {
        return {origin_.x + j_[0] * ref.x + j_[1] * ref.y, origin_.y + j_[2] * ref.x + j_[3] * ref.y};
    }

    [[nodiscard]] Point to_reference(Point x) const
    {
        const Vec2 d = x - origin_;
        return {inv_[0] * d.x + inv_[1] * d.y, inv_[2] * d.x + inv_[3] * d.y};
    }

    /// Physical gradients of the barycentric coordinates lambda_0..lambda_2.
    [[nodiscard]] std::array<Vec2, 3> barycentric_gradients() const
    {
        // grad lambda_1 = J^{-T} (1,0), grad lambda_2 = J^{-T} (0,1)
        const Vec2 g1{inv_[0], inv_[1]};
        const Vec2 g2{inv_[2], inv_[3]};
        return {Vec2{-g1.x - g2.x, -g1.y - g2.y}, g1, g2};
    }

private:
    Point origin_;
    std::array<double, 4> j_{};   // row-major
    std::array<double, 4> inv_{}; // row-major
    double det_ = 0.0;
};

} // namespace afem
