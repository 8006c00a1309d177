#include "helpers.hpp"

#include "afem/assembly.hpp"
#include "afem/estimator.hpp"
#include "afem/quadrature.hpp"
#include "afem/solver.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace afem;
using afem::test::constant_problem;
using afem::test::share;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

std::shared_ptr<const Mesh> refined_square(int levels)
{
    Mesh m = test::two_triangle_square();
    for (int i = 0; i < levels; ++i) {
        m = uniform_refine(m);
    }
    return share(std::move(m));
}

// Local stiffness and mass of the degree-p basis on element e.
void local_matrices(const Mesh& mesh, int e, int p, Eigen::MatrixXd& k, Eigen::MatrixXd& m)
{
    const AffineMap map = mesh.affine_map(e);
    const auto grads = map.barycentric_gradients();
    const auto& rule = triangle_rule(2 * p);
    const int n = p == 1 ? 3 : 6;
    k = Eigen::MatrixXd::Zero(n, n);
    m = Eigen::MatrixXd::Zero(n, n);
    LocalBasis b;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        eval_basis(p, rule.points[q], grads, b);
        const double w = rule.weights[q] * std::abs(map.det());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                k(i, j) += w * dot(b.gradient[i], b.gradient[j]);
                m(i, j) += w * b.value[i] * b.value[j];
            }
        }
    }
}

double inverse_constant(const Mesh& mesh, int e, int p)
{
    Eigen::MatrixXd k;
    Eigen::MatrixXd m;
    local_matrices(mesh, e, p, k, m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, m);
    return element_size(mesh, e) * std::sqrt(eig.eigenvalues().maxCoeff());
}

} // namespace

TEST(Peclet, Examples)
{
    const Mesh a = test::single_triangle({0, 0}, {0.5, 0}, {0, 0.25});
    EXPECT_NEAR(peclet(constant_problem(1e-4, {2, 3}, 2, 2), a, 0), std::sqrt(13.0) * 0.25 / 2e-4, 1e-8);
    const Mesh b = test::single_triangle({0, 0}, {1, 0}, {0, 0.5});
    EXPECT_NEAR(peclet(constant_problem(1.0, {1, 0}, 0, 0), b, 0), 0.25, 1e-15);
    EXPECT_EQ(peclet(constant_problem(1.0, {0, 0}, 0, 0), b, 0), 0.0);
}

TEST(Stabilization, DegreeScaledExamples)
{
    StabilizationConfig cfg;
    const Mesh a = test::single_triangle({0, 0}, {0.5, 0}, {0, 0.25});
    EXPECT_NEAR(stabilization_parameter(constant_problem(1e-4, {2, 3}, 2, 2), a, 0, 1, cfg), 0.25 / std::sqrt(13.0),
                1e-15);
    const Mesh b = test::single_triangle({0, 0}, {1, 0}, {0, 0.5});
    EXPECT_NEAR(stabilization_parameter(constant_problem(1.0, {1, 0}, 0, 0), b, 0, 2, cfg), 0.03125, 1e-15);
}

TEST(Stabilization, GenericTakesDiffusionBranchAtPecletOne)
{
    StabilizationConfig cfg;
    cfg.mode = StabilizationMode::Generic;
    const Mesh b = test::single_triangle({0, 0}, {1, 0}, {0, 0.5});
    const auto problem = constant_problem(0.25, {1, 0}, 0, 0);
    ASSERT_DOUBLE_EQ(peclet(problem, b, 0), 1.0);
    EXPECT_NEAR(stabilization_parameter(problem, b, 0, 1, cfg), 0.5 * 0.25 / 0.25, 1e-15);
}

TEST(Stabilization, NoneIsZeroAndOthersPositive)
{
    const auto mesh = refined_square(2);
    const auto problem = constant_problem(1e-3, {2, 3}, 2, 2);
    for (auto mode : {StabilizationMode::Generic, StabilizationMode::DegreeScaled}) {
        StabilizationConfig cfg;
        cfg.mode = mode;
        for (double t : stabilization_parameters(problem, *mesh, 1, cfg)) {
            EXPECT_GT(t, 0.0);
        }
    }
    StabilizationConfig none;
    none.mode = StabilizationMode::None;
    for (double t : stabilization_parameters(problem, *mesh, 2, none)) {
        EXPECT_EQ(t, 0.0);
    }
}

TEST(Stabilization, ClampCapsAtBound)
{
    const Mesh a = test::single_triangle({0, 0}, {0.5, 0}, {0, 0.25});
    const auto problem = constant_problem(1e-4, {2, 3}, 20, 1);
    EXPECT_NEAR(stabilization_bound(problem, a, 0, 1), 1.0 / 400.0, 1e-15);
    StabilizationConfig cfg;
    cfg.clamp = true;
    EXPECT_NEAR(stabilization_parameter(problem, a, 0, 1, cfg), 1.0 / 400.0, 1e-15);
    cfg.clamp = false;
    EXPECT_NEAR(stabilization_parameter(problem, a, 0, 1, cfg), 0.25 / std::sqrt(13.0), 1e-15);
}

TEST(Stabilization, LaplacianInverseConstant)
{
    const auto mesh = refined_square(1);
    EXPECT_EQ(laplacian_inverse_constant(*mesh, 0, 1), 0.0);
    const double c = laplacian_inverse_constant(*mesh, 0, 2);
    ASSERT_GT(c, 0.0);
    auto space = build_space(mesh, 2);
    std::mt19937_64 rng(3);
    const auto& rule = triangle_rule(4);
    const AffineMap map = mesh->affine_map(0);
    const auto grads = map.barycentric_gradients();
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd v = test::random_vector(6, rng);
        double lap2 = 0.0;
        double grad2 = 0.0;
        LocalBasis b;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            eval_basis(2, rule.points[q], grads, b);
            double lap = 0.0;
            Vec2 g;
            for (int i = 0; i < 6; ++i) {
                lap += v[i] * b.laplacian[i];
                g += v[i] * b.gradient[i];
            }
            const double w = rule.weights[q] * std::abs(map.det());
            lap2 += w * lap * lap;
            grad2 += w * dot(g, g);
        }
        EXPECT_LE(element_size(*mesh, 0) * std::sqrt(lap2), c * std::sqrt(grad2) * (1 + 1e-10));
    }
}

TEST(Stabilization, GenericScaledThetaBound)
{
    StabilizationConfig cfg;
    cfg.mode = StabilizationMode::Generic;
    cfg.delta0 = 0.3;
    cfg.delta1 = 0.7;
    const Vec2 alpha{2, 3};
    for (double eps : {1.0, 1e-2, 1e-4}) {
        for (int levels : {0, 2, 4}) {
            const auto mesh = refined_square(levels);
            const auto problem = constant_problem(eps, alpha, 0, 0);
            const auto theta = stabilization_parameters(problem, *mesh, 1, cfg);
            double worst = 0.0;
            for (int e = 0; e < mesh->num_elements(); ++e) {
                worst = std::max(worst, norm(alpha) * theta[static_cast<std::size_t>(e)] / element_size(*mesh, e));
            }
            EXPECT_LE(worst, std::max(cfg.delta0 * norm(alpha), 2 * cfg.delta1) * (1 + 1e-14));
        }
    }
}

TEST(Assembly, StiffnessOfUnitTriangle)
{
    auto space = build_space(share(test::unit_right_triangle()), 1);
    const std::vector<double> theta(1, 0.0);
    const auto forms = assemble_forms(*space, constant_problem(1, {0, 0}, 0, 0), theta);
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    const auto dofs = space->element_dofs(0);
    const Eigen::MatrixXd a = dense(forms.matrix);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(a(dofs[i], dofs[j]), expected(i, j), 1e-14);
        }
    }
}

TEST(Assembly, ZeroThetaMatchesHandGalerkin)
{
    const auto mesh = refined_square(2);
    auto space = build_space(mesh, 1);
    const double eps = 0.3;
    const Vec2 alpha{2, -1};
    const double beta = 1.5;
    const auto problem = constant_problem(eps, alpha, beta, beta);
    const std::vector<double> theta(static_cast<std::size_t>(mesh->num_elements()), 0.0);
    const Eigen::MatrixXd a = dense(assemble_forms(*space, problem, theta).matrix);

    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(space->n_dofs(), space->n_dofs());
    for (int e = 0; e < mesh->num_elements(); ++e) {
        const auto g = mesh->affine_map(e).barycentric_gradients();
        const double area = mesh->area(e);
        const auto dofs = space->element_dofs(e);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                expected(dofs[i], dofs[j]) += eps * area * dot(g[j], g[i]) + dot(alpha, g[j]) * area / 3.0 +
                                              beta * area * (i == j ? 2.0 : 1.0) / 12.0;
            }
        }
    }
    EXPECT_LE((a - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, StabilizationIsStreamlineGramWithoutReaction)
{
    const auto mesh = refined_square(2);
    auto space = build_space(mesh, 1);
    const auto problem = constant_problem(1e-3, {2, 3}, 0, 0);
    const auto theta = stabilization_parameters(problem, *mesh, 1, {});
    const std::vector<double> zero(theta.size(), 0.0);
    const Eigen::MatrixXd diff =
        dense(assemble_forms(*space, problem, theta).matrix) - dense(assemble_forms(*space, problem, zero).matrix);
    const Eigen::MatrixXd s = dense(streamline_gram(*space, problem, theta));
    EXPECT_LE((diff - s).cwiseAbs().maxCoeff(), 1e-12 * s.cwiseAbs().maxCoeff());
}

TEST(Assembly, SymmetricWithoutConvection)
{
    for (int p : {1, 2}) {
        auto space = build_space(refined_square(2), p);
        const auto problem = constant_problem(0.5, {0, 0}, 1, 1);
        const std::vector<double> zero(static_cast<std::size_t>(space->mesh().num_elements()), 0.0);
        const Eigen::MatrixXd a = dense(assemble_forms(*space, problem, zero).matrix);
        EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
    }
}

TEST(Assembly, ConstrainedRowsAreIdentity)
{
    auto space = build_space(refined_square(2), 2);
    auto problem = constant_problem(1e-2, {2, 3}, 2, 2);
    problem.dirichlet = [](Point x) { return 1.0 + x.x - 2.0 * x.y; };
    const auto sys = assemble(*space, problem, {});
    const Eigen::MatrixXd a = dense(sys.matrix);
    int constrained = 0;
    for (int i = 0; i < space->n_dofs(); ++i) {
        if (!space->is_dirichlet(i)) {
            EXPECT_EQ(sys.constrained[static_cast<std::size_t>(i)], 0);
            continue;
        }
        ++constrained;
        EXPECT_NE(sys.constrained[static_cast<std::size_t>(i)], 0);
        for (int j = 0; j < space->n_dofs(); ++j) {
            EXPECT_EQ(a(i, j), i == j ? 1.0 : 0.0);
            if (j != i) {
                EXPECT_EQ(a(j, i), 0.0);
            }
        }
        EXPECT_DOUBLE_EQ(sys.rhs[i], problem.dirichlet(space->node(i)));
        EXPECT_DOUBLE_EQ(sys.lifting[i], problem.dirichlet(space->node(i)));
    }
    EXPECT_GT(constrained, 0);
}

TEST(Assembly, DeterministicAcrossCalls)
{
    auto space = build_space(refined_square(3), 2);
    const auto problem = constant_problem(1e-3, {2, 3}, 2, 2);
    const auto a = assemble(*space, problem, {});
    const auto b = assemble(*space, problem, {});
    EXPECT_EQ(dense(a.matrix), dense(b.matrix));
    EXPECT_EQ(a.rhs, b.rhs);
}

TEST(Assembly, NonFiniteDataThrows)
{
    auto space = build_space(refined_square(1), 1);
    auto problem = constant_problem(1, {1, 0}, 0, 0);
    problem.source = [](Point) { return std::numeric_limits<double>::quiet_NaN(); };
    EXPECT_THROW((void)assemble(*space, problem, {}), AssemblyError);
}

TEST(Assembly, ValidationRejectsWrongGamma)
{
    auto space = build_space(refined_square(1), 1);
    auto problem = constant_problem(1, {1, 0}, 0, 0);
    problem.gamma = 1.0;
    AssemblyOptions opts;
    opts.validate = true;
    EXPECT_THROW((void)assemble(*space, problem, {}, opts), ProblemError);
    opts.validate = false;
    EXPECT_NO_THROW((void)assemble(*space, problem, {}, opts));
}

TEST(Assembly, ResidualOfZeroIsMaxLoad)
{
    auto space = build_space(refined_square(2), 1);
    auto problem = constant_problem(1e-2, {2, 3}, 2, 2);
    problem.source = [](Point x) { return 1.0 + x.x; };
    const auto theta = stabilization_parameters(problem, space->mesh(), 1, {});
    const auto forms = assemble_forms(*space, problem, theta);
    double expected = 0.0;
    for (int i = 0; i < space->n_dofs(); ++i) {
        if (!space->is_dirichlet(i)) {
            expected = std::max(expected, std::abs(forms.load[i]));
        }
    }
    ASSERT_GT(expected, 0.0);
    const DiscreteFunction zero(space);
    EXPECT_NEAR(residual_check(*space, problem, {}, zero), expected, 1e-15 * expected);
}

TEST(Assembly, ResidualOfSolutionIsSmall)
{
    auto space = build_space(refined_square(3), 2);
    auto problem = constant_problem(1e-3, {2, 3}, 2, 2);
    problem.source = [](Point x) { return std::sin(3 * x.x) + x.y; };
    const auto sys = assemble(*space, problem, {});
    const auto rep = solve(sys);
    ASSERT_TRUE(rep.converged);
    const DiscreteFunction u(space, rep.solution);
    EXPECT_LE(residual_check(*space, problem, {}, u), 1e-10 * sys.rhs.norm());
}

TEST(Assembly, MatrixCoordinateExport)
{
    auto space = build_space(share(test::unit_right_triangle()), 1);
    const std::vector<double> theta(1, 0.0);
    const auto forms = assemble_forms(*space, constant_problem(1, {0, 0}, 0, 0), theta);
    std::ostringstream out;
    write_matrix_coordinates(out, forms.matrix);
    std::istringstream in(out.str());
    int i = 0;
    int j = 0;
    double v = 0.0;
    int lines = 0;
    while (in >> i >> j >> v) {
        EXPECT_DOUBLE_EQ(forms.matrix.coeff(i, j), v);
        ++lines;
    }
    EXPECT_EQ(lines, forms.matrix.nonZeros());
}

class Ellipticity : public ::testing::TestWithParam<int> {};

TEST_P(Ellipticity, ClampedSupgIsCoercive)
{
    const int p = GetParam();
    const auto problem = constant_problem(1e-3, {2, 3}, 2, 2);
    StabilizationConfig cfg;
    cfg.clamp = true;
    std::mt19937_64 rng(11);
    for (int levels : {1, 2, 3}) {
        auto space = build_space(refined_square(levels), p);
        const auto theta = stabilization_parameters(problem, space->mesh(), p, cfg);
        const Eigen::MatrixXd b = dense(assemble_forms(*space, problem, theta).matrix);
        const Eigen::MatrixXd e = dense(energy_gram(*space, problem));
        const Eigen::MatrixXd s = dense(streamline_gram(*space, problem, theta));
        for (int trial = 0; trial < 30; ++trial) {
            Eigen::VectorXd v = test::random_vector(space->n_dofs(), rng);
            for (int d : space->dirichlet_dofs()) {
                v[d] = 0.0;
            }
            const double lhs = v.dot(b * v);
            const double rhs = 0.5 * (v.dot(e * v) + v.dot(s * v));
            EXPECT_GE(lhs - rhs, -1e-10 * rhs);
        }
    }
}

TEST_P(Ellipticity, StabilizationBoundedByEstimator)
{
    const int p = GetParam();
    StabilizationConfig cfg;
    cfg.mode = StabilizationMode::Generic;
    std::mt19937_64 rng(5);
    for (double eps : {1e-1, 1e-3}) {
        const auto problem = constant_problem(eps, {2, 3}, 2, 2);
        for (int levels : {1, 3}) {
            const auto mesh = refined_square(levels);
            auto space = build_space(mesh, p);
            const auto theta = stabilization_parameters(problem, *mesh, p, cfg);
            const std::vector<double> zero(theta.size(), 0.0);
            const Eigen::MatrixXd sigma =
                dense(assemble_forms(*space, problem, theta).matrix) - dense(assemble_forms(*space, problem, zero).matrix);
            double scale = 0.0;
            double c_norm = 1.0;
            for (int e = 0; e < mesh->num_elements(); ++e) {
                const double h = element_size(*mesh, e);
                scale = std::max(scale, norm(Vec2{2, 3}) * theta[static_cast<std::size_t>(e)] / h);
                if (h / std::sqrt(eps) > 1.0 / std::sqrt(problem.gamma)) {
                    c_norm = std::max(c_norm, inverse_constant(*mesh, e, p));
                }
            }
            for (int trial = 0; trial < 20; ++trial) {
                const DiscreteFunction w(space, test::random_vector(space->n_dofs(), rng));
                const DiscreteFunction v(space, test::random_vector(space->n_dofs(), rng));
                const double lhs = std::abs(v.coefficients().dot(sigma * w.coefficients()));
                const double bound = c_norm * scale * estimate(w, problem).total() * energy_norm(v, problem);
                EXPECT_LE(lhs, bound * (1 + 1e-10));
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, Ellipticity, ::testing::Values(1, 2));
