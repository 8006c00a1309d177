#include "helpers.hpp"

#include "afem/assembly.hpp"
#include "afem/estimator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

using namespace afem;
using afem::test::constant_problem;
using afem::test::share;

namespace {

std::shared_ptr<const Mesh> refined_square(int levels)
{
    Mesh m = test::two_triangle_square();
    for (int i = 0; i < levels; ++i) {
        m = uniform_refine(m);
    }
    return share(std::move(m));
}

ProblemSpec smooth_data_problem(double eps, double gamma)
{
    auto p = constant_problem(eps, {2, 3}, gamma, gamma);
    p.source = [](Point x) { return std::sin(2 * x.x) * std::exp(x.y); };
    return p;
}

std::vector<int> iota(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Marks a fixed pseudo-random third of the elements.
std::vector<int> some_elements(const Mesh& m, unsigned seed)
{
    std::mt19937 rng(seed);
    std::vector<int> out;
    for (int e = 0; e < m.num_elements(); ++e) {
        if (rng() % 3 == 0) {
            out.push_back(e);
        }
    }
    if (out.empty()) {
        out.push_back(0);
    }
    return out;
}

double sum_of(const std::vector<double>& sq, const std::vector<int>& subset)
{
    double s = 0.0;
    for (int e : subset) {
        s += sq[static_cast<std::size_t>(e)];
    }
    return s;
}

} // namespace

TEST(Hbar, Examples)
{
    auto p = constant_problem(1e-4, {0, 0}, 2, 2);
    EXPECT_NEAR(hbar(p, 0.25), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(hbar(p, 1e-3), 0.1, 1e-15);
    p.gamma = 0.0;
    EXPECT_NEAR(hbar(p, 0.25), 25.0, 1e-12);
}

TEST(Estimator, ConstantResidualOnSingleElement)
{
    const double eps = 0.37;
    auto problem = constant_problem(eps, {0, 0}, 0, 0);
    problem.source = [](Point) { return 1.0; };
    auto space = build_space(share(test::single_triangle({0, 0}, {2, 0}, {0.5, 1})), 1);
    const auto out = estimate(DiscreteFunction(space), problem);
    const double area = 1.0;
    const double hb = std::sqrt(area) / std::sqrt(eps);
    EXPECT_NEAR(std::sqrt(out.indicators_sq[0]), hb * std::sqrt(area), 1e-13);
    EXPECT_NEAR(out.hbar[0], hb, 1e-15);
    EXPECT_EQ(out.jump_sq[0], 0.0);
    EXPECT_EQ(out.neumann_sq[0], 0.0);
}

TEST(Estimator, ExactPolynomialSolutionGivesZero)
{
    // u = x + y solves -Lap u + (1,1).grad u + u = 2 + x + y.
    auto problem = constant_problem(1.0, {1, 1}, 1, 1);
    problem.source = [](Point x) { return 2.0 + x.x + x.y; };
    problem.neumann = [](Point, Vec2 n) { return n.x + n.y; };
    auto space = build_space(share(test::unit_right_triangle(BoundaryLabel::Neumann)), 1);
    const auto w = interpolate(space, [](Point x) { return x.x + x.y; });
    EXPECT_LE(estimate(w, problem).total(), 1e-13);
}

TEST(Estimator, JumpAcrossDiagonal)
{
    // Interpolant of xy is y below the diagonal and x above it: the normal
    // jump is sqrt(2) on an edge of length sqrt(2), so each side gets
    // hbar * (sqrt(2))^2 * sqrt(2) = sqrt(1/2) * 2 sqrt(2) = 2.
    auto problem = constant_problem(1.0, {0, 0}, 0, 0);
    auto space = build_space(share(test::two_triangle_square()), 1);
    const auto w = interpolate(space, [](Point x) { return x.x * x.y; });
    const auto out = estimate(w, problem);
    for (int e = 0; e < 2; ++e) {
        EXPECT_NEAR(out.jump_sq[static_cast<std::size_t>(e)], 2.0, 1e-13);
        EXPECT_NEAR(out.volume_sq[static_cast<std::size_t>(e)], 0.0, 1e-28);
        EXPECT_NEAR(out.indicators_sq[static_cast<std::size_t>(e)], 2.0, 1e-13);
    }
    EXPECT_NEAR(out.total(), 2.0, 1e-13);
}

TEST(Estimator, TotalsAreConsistent)
{
    const auto problem = smooth_data_problem(1e-2, 2);
    auto space = build_space(refined_square(3), 2);
    std::mt19937_64 rng(2);
    const DiscreteFunction w(space, test::random_vector(space->n_dofs(), rng));
    EstimatorOptions opts;
    opts.with_oscillations = true;
    const auto out = estimate(w, problem, opts);
    double s = 0.0;
    for (std::size_t e = 0; e < out.indicators_sq.size(); ++e) {
        EXPECT_GE(out.volume_sq[e], 0.0);
        EXPECT_GE(out.jump_sq[e], 0.0);
        EXPECT_GE(out.neumann_sq[e], 0.0);
        EXPECT_GE(out.oscillations_sq[e], 0.0);
        EXPECT_NEAR(out.indicators_sq[e], out.volume_sq[e] + out.jump_sq[e] + out.neumann_sq[e],
                    1e-14 * out.indicators_sq[e]);
        s += out.indicators_sq[e];
    }
    EXPECT_NEAR(out.total() * out.total(), s, 1e-12 * s);
    const auto all = iota(static_cast<int>(out.indicators_sq.size()));
    EXPECT_NEAR(out.total(all), out.total(), 1e-12 * out.total());
}

TEST(Estimator, NeumannTermMatchesHand)
{
    // w = 0, g = 1 on every edge of the unit right triangle: the boundary
    // residual is 1 on a boundary of length 2 + sqrt(2).
    auto problem = constant_problem(0.25, {0, 0}, 0, 0);
    problem.neumann = [](Point, Vec2) { return 1.0; };
    auto space = build_space(share(test::unit_right_triangle(BoundaryLabel::Neumann)), 1);
    const auto out = estimate(DiscreteFunction(space), problem);
    const double hb = std::sqrt(0.5) / 0.5;
    EXPECT_NEAR(out.neumann_sq[0], hb / 0.5 * (2.0 + std::sqrt(2.0)), 1e-13);
}

TEST(Oscillations, LinearSourceOnUnitTriangle)
{
    auto problem = constant_problem(1.0, {1, 2}, 1, 1);
    problem.gamma = 0.0;
    problem.source = [](Point x) { return x.x; };
    auto space = build_space(share(test::unit_right_triangle()), 1);
    const auto osc = oscillations(DiscreteFunction(space), problem);
    // |T| = 1/2, mean(x) = 1/3, int (x - 1/3)^2 = 1/12 - 1/18 = 1/36
    EXPECT_NEAR(osc[0], 0.5 / 36.0, 1e-14);
}

TEST(Oscillations, VanishForPiecewisePolynomialData)
{
    auto problem = constant_problem(1e-2, {2, 3}, 2, 2);
    problem.source = [](Point) { return 4.0; };
    problem.neumann = [](Point, Vec2) { return 0.3; };
    auto space = build_space(share(uniform_refine(test::two_triangle_square(BoundaryLabel::Neumann))), 1);
    std::mt19937_64 rng(4);
    const DiscreteFunction w(space, test::random_vector(space->n_dofs(), rng));
    for (double o : oscillations(w, problem)) {
        EXPECT_LE(o, 1e-26);
    }

    // p = 2 projects onto P1: linear data and linear g are reproduced.
    problem.source = [](Point x) { return 1.0 + x.x - 3.0 * x.y; };
    problem.neumann = [](Point x, Vec2) { return x.x + 2.0 * x.y; };
    problem.reaction = [](Point x) { return 2.0 + x.x; };
    auto space2 = build_space(space->mesh_ptr(), 2);
    const DiscreteFunction w2(space2, test::random_vector(space2->n_dofs(), rng));
    double total = 0.0;
    for (double o : oscillations(w2, problem)) {
        total += o;
    }
    EXPECT_LE(total, 1e-24);
}

TEST(Oscillations, DetectNonPolynomialNeumannData)
{
    auto problem = constant_problem(1.0, {0, 0}, 0, 0);
    problem.neumann = [](Point x, Vec2) { return x.x; };
    auto space = build_space(share(test::unit_right_triangle(BoundaryLabel::Neumann)), 1);
    const auto osc = oscillations(DiscreteFunction(space), problem);
    // hbar = sqrt(1/2). Edges: y=0 (x from 0..1): int (x - 1/2)^2 = 1/12;
    // x=0: g = 0; hypotenuse: x = 1 - t, length sqrt(2): sqrt(2)/12.
    EXPECT_NEAR(osc[0], std::sqrt(0.5) * (1.0 / 12.0 + std::sqrt(2.0) / 12.0), 1e-14);
}

TEST(EnergyNorm, Examples)
{
    auto space = build_space(refined_square(1), 1);
    const auto v = interpolate(space, [](Point x) { return x.x; });
    EXPECT_EQ(energy_norm(DiscreteFunction(space), constant_problem(1, {0, 0}, 1, 1)), 0.0);
    EXPECT_NEAR(energy_norm(v, constant_problem(1, {0, 0}, 1, 1)), std::sqrt(4.0 / 3.0), 1e-14);
    EXPECT_NEAR(energy_norm(v, constant_problem(0.25, {0, 0}, 0, 0)), 0.5, 1e-14);
    const std::vector<int> first{0};
    EXPECT_NEAR(energy_norm(v, constant_problem(0.25, {0, 0}, 0, 0), first),
                0.5 * std::sqrt(space->mesh().area(0)), 1e-14);
}

TEST(EnergyError, ReproducedAndZero)
{
    auto problem = constant_problem(1.0, {1, 1}, 1, 1);
    problem.exact = ExactSolution{[](Point x) { return x.x * x.y; }, [](Point x) { return Vec2{x.y, x.x}; }};
    auto space = build_space(refined_square(2), 2);
    const std::vector<double> theta(static_cast<std::size_t>(space->mesh().num_elements()), 0.1);
    const auto exact = energy_error(interpolate(space, problem.exact->value), problem, theta);
    // |||xy|||^2 = int x^2 + y^2 + int x^2 y^2 = 2/3 + 1/9
    EXPECT_NEAR(exact.exact_norm, std::sqrt(7.0 / 9.0), 1e-13);
    EXPECT_LE(exact.energy, 1e-10 * exact.exact_norm);
    EXPECT_LE(exact.supg, 1e-10 * exact.exact_norm);

    const auto zero = energy_error(DiscreteFunction(space), problem, theta);
    EXPECT_NEAR(zero.energy, std::sqrt(7.0 / 9.0), 1e-13);
    // int ((1,1).grad xy)^2 = int (x + y)^2 = 7/6
    EXPECT_NEAR(zero.supg, std::sqrt(7.0 / 9.0 + 0.1 * 7.0 / 6.0), 1e-13);
}

TEST(EnergyError, RequiresExactSolution)
{
    auto space = build_space(refined_square(0), 1);
    const std::vector<double> theta(2, 0.0);
    EXPECT_THROW((void)energy_error(DiscreteFunction(space), constant_problem(1, {0, 0}, 0, 0), theta),
                 std::invalid_argument);
}

class EstimatorAxioms : public ::testing::TestWithParam<int> {};

TEST_P(EstimatorAxioms, MonotoneUnderRefinement)
{
    const int p = GetParam();
    // hbar = gamma^{-1/2} on both meshes here, so parent and children agree
    // exactly and only polynomial data keeps quadrature from deciding the sign.
    auto problem = smooth_data_problem(1e-3, 2);
    problem.source = [](Point x) { return 1.0 + x.x * x.x - x.x * x.y; };
    std::mt19937_64 rng(21);
    auto coarse_mesh = refined_square(2);
    for (int round = 0; round < 3; ++round) {
        const auto fine_mesh = share(refine(*coarse_mesh, some_elements(*coarse_mesh, static_cast<unsigned>(round))));
        auto coarse = build_space(coarse_mesh, p);
        auto fine = build_space(fine_mesh, p);
        for (int trial = 0; trial < 5; ++trial) {
            const DiscreteFunction v(coarse, test::random_vector(coarse->n_dofs(), rng));
            const auto eta_c = estimate(v, problem);
            const auto eta_f = estimate(prolongate(v, fine), problem);
            const auto parents = some_elements(*coarse_mesh, 100u + static_cast<unsigned>(trial));
            const std::set<int> chosen(parents.begin(), parents.end());
            std::vector<int> children;
            for (int e = 0; e < fine_mesh->num_elements(); ++e) {
                if (chosen.count(fine_mesh->parent(e)) != 0) {
                    children.push_back(e);
                }
            }
            const double lhs = sum_of(eta_f.indicators_sq, children);
            const double rhs = sum_of(eta_c.indicators_sq, parents);
            EXPECT_LE(std::sqrt(lhs), std::sqrt(rhs) * (1 + 1e-10));
        }
        coarse_mesh = fine_mesh;
    }
}

TEST_P(EstimatorAxioms, ReductionOnRefinedElements)
{
    const int p = GetParam();
    // h_max <= (eps / gamma)^{1/2} after four uniform refinements.
    const auto problem = smooth_data_problem(1e-2, 2);
    std::mt19937_64 rng(8);
    auto coarse_mesh = refined_square(4);
    ASSERT_LE(max_element_size(*coarse_mesh), std::sqrt(problem.epsilon / problem.gamma));
    for (int round = 0; round < 3; ++round) {
        const auto fine_mesh = share(refine(*coarse_mesh, some_elements(*coarse_mesh, 40u + static_cast<unsigned>(round))));
        auto coarse = build_space(coarse_mesh, p);
        auto fine = build_space(fine_mesh, p);
        std::vector<int> new_elements;
        std::set<int> refined;
        for (int e = 0; e < fine_mesh->num_elements(); ++e) {
            if (fine_mesh->generation(e) != coarse_mesh->generation(fine_mesh->parent(e))) {
                new_elements.push_back(e);
                refined.insert(fine_mesh->parent(e));
            }
        }
        const std::vector<int> old_elements(refined.begin(), refined.end());
        for (int trial = 0; trial < 5; ++trial) {
            const DiscreteFunction v(coarse, test::random_vector(coarse->n_dofs(), rng));
            const double lhs = std::sqrt(sum_of(estimate(prolongate(v, fine), problem).indicators_sq, new_elements));
            const double rhs = std::sqrt(sum_of(estimate(v, problem).indicators_sq, old_elements));
            EXPECT_LE(lhs, std::pow(2.0, -0.25) * rhs * (1 + 1e-10));
        }
        coarse_mesh = fine_mesh;
    }
}

TEST_P(EstimatorAxioms, StabilityConstantIsFinite)
{
    const int p = GetParam();
    const auto problem = smooth_data_problem(1e-2, 2);
    auto space = build_space(refined_square(3), p);
    std::mt19937_64 rng(12);
    double c = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const DiscreteFunction v(space, test::random_vector(space->n_dofs(), rng));
        const DiscreteFunction w(space, test::random_vector(space->n_dofs(), rng));
        const DiscreteFunction d(space, v.coefficients() - w.coefficients());
        c = std::max(c, std::abs(estimate(v, problem).total() - estimate(w, problem).total()) / energy_norm(d, problem));
    }
    RecordProperty("stability_constant", std::to_string(c));
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GT(c, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Degrees, EstimatorAxioms, ::testing::Values(1, 2));
