#pragma once

#include "afem/problem.hpp"
#include "afem/space.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace afem {

/// min{eps^{-1/2} h, gamma^{-1/2}}, with gamma = 0 read as gamma^{-1/2} = inf.
[[nodiscard]] double hbar(const ProblemSpec& problem, double h);

struct EstimatorOptions {
    /// Volume quadrature degree for data terms; 0 selects max(2p + 2, 6).
    int volume_degree = 0;
    bool with_oscillations = false;
};

/// Per-element squared indicators eta_T^2 = volume + jump + neumann.
struct EstimatorOutput {
    std::vector<double> indicators_sq;
    std::vector<double> volume_sq;
    std::vector<double> jump_sq;
    std::vector<double> neumann_sq;
    std::vector<double> hbar;
    std::vector<double> oscillations_sq; // empty unless requested

    /// (sum_T eta_T^2)^{1/2}
    [[nodiscard]] double total() const;
    /// (sum_{T in subset} eta_T^2)^{1/2}
    [[nodiscard]] double total(std::span<const int> subset) const;
    [[nodiscard]] double oscillation_total() const;
};

/// Residual indicators of w:
///   hbar^2 |-eps Lap w + alpha . grad w + beta w - f|^2_T
///   + hbar eps^{-1/2} |[eps grad w . n]|^2_{dT \cap Omega}
///   + hbar eps^{-1/2} |g - eps dw/dn|^2_{dT \cap Gamma_N}
/// Each interior edge contributes to both adjacent elements.
[[nodiscard]] EstimatorOutput estimate(const DiscreteFunction& w, const ProblemSpec& problem,
                                       const EstimatorOptions& options = {});

/// Per-element squared data oscillations, with alpha, beta, f projected onto
/// P^{p-1}(T) and g onto P^{p-1}(E) in L2.
[[nodiscard]] std::vector<double> oscillations(const DiscreteFunction& w, const ProblemSpec& problem,
                                               int volume_degree = 0);

/// (eps |grad v|^2 + gamma |v|^2)^{1/2} over all elements, or over `subset`.
[[nodiscard]] double energy_norm(const DiscreteFunction& v, const ProblemSpec& problem);
[[nodiscard]] double energy_norm(const DiscreteFunction& v, const ProblemSpec& problem,
                                 std::span<const int> subset);

struct EnergyError {
    double energy = 0.0; // |||u - u_h|||
    double supg = 0.0;   // (|||u - u_h|||^2 + sum_T theta_T |alpha . grad(u - u_h)|_T^2)^{1/2}
    double exact_norm = 0.0; // |||u|||
};

/// Errors against problem.exact; throws std::invalid_argument if absent.
[[nodiscard]] EnergyError energy_error(const DiscreteFunction& uh, const ProblemSpec& problem,
                                       std::span<const double> theta, int degree = 0);

} // namespace afem
