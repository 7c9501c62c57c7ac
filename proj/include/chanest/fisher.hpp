#pragma once

#include <span>
#include <string>
#include <vector>

#include "chanest/canonical.hpp"
#include "chanest/channel.hpp"
#include "chanest/povm.hpp"

namespace chanest {

/// C = 4 tr(sum_k K_k'^dagger K_k' rho0) for an explicit set of derivatives.
double kraus_bound(std::span<const ComplexMatrix> kraus_derivs, const QuantumState& rho0);

/// Bound of the family's own decomposition.
double kraus_bound(const ParamKrausFamily& family, double theta, const QuantumState& rho0);

/// Bound of a canonical frame on its own input: 4 sum_k ||Omega_k' psi0||^2.
double kraus_bound(const CanonicalFrame& frame);

/// Bound of a canonical frame's operators on another input.
double kraus_bound(const CanonicalFrame& frame, const QuantumState& rho0);

/// sum_xi tr(E rho')^2 / tr(E rho). Outcomes with probability below eps_prob
/// contribute nothing when |tr(E rho')| < sqrt(eps_prob) and raise
/// DivergentFisherError otherwise.
double classical_fisher(const Povm& povm, const ComplexMatrix& rho, const ComplexMatrix& drho,
                        const NumericSettings& settings = {});
double classical_fisher(const Povm& povm, const ParamKrausFamily& family, double theta, const QuantumState& rho0,
                        const NumericSettings& settings = {});

struct OptimalityReport {
    double theta = 0.0;
    std::vector<std::string> labels;
    std::vector<double> lambdas;
    std::vector<double> residuals;  // +inf for a zero-probability outcome that still sees a derivative
    double max_residual = 0.0;
    bool satisfied = false;
};

/// Least-squares test of E^{1/2} Omega_k' rho0^{1/2} = lambda E^{1/2} Omega_k rho0^{1/2}
/// jointly over k, for every outcome of the POVM. rho0 must be pure.
OptimalityReport optimality_check(const Povm& povm, const CanonicalFrame& frame, const QuantumState& rho0,
                                  const NumericSettings& settings = {});

struct DistanceCurve {
    std::string label;
    std::vector<double> thetas;
    std::vector<double> bound_values;       // C of the canonical frames
    std::vector<double> eigencoord_values;  // sum p'^2/p + 4 sum p |<f|df>|^2
};

/// Metric in eigen-coordinates along a tracked frame curve. p_k' and |df_k>
/// come from a seven-point finite-difference stencil on the curve's grid
/// (fewer points on short grids). A direction is skipped at a point when its
/// weight is at or below p_floor anywhere in that point's stencil.
DistanceCurve statistical_distance_eigencoords(std::span<const CanonicalFrame> frames, std::string label = {},
                                               const NumericSettings& settings = {});

struct RemixPenalty {
    double remixed_bound = 0.0;  // C of Omega_j = sum_k u_jk Upsilon_k, u = exp(theta G)
    double predicted = 0.0;      // C_Upsilon + 4 sum_jk |u'_jk|^2 p_k
    double canonical_bound = 0.0;
};

/// Remixes a canonical frame with u(theta) = exp(theta G). Requires the frame
/// to be quasi-classical and the POVM to satisfy the optimality condition on
/// it; throws ValidationError otherwise or when G is not anti-Hermitian.
RemixPenalty remix_penalty(const CanonicalFrame& frame, const ComplexMatrix& generator, const QuantumState& rho0,
                           const Povm& povm, const NumericSettings& settings = {});

/// Quantum Fisher information of rho(theta) through the symmetric logarithmic
/// derivative. Independent oracle for the bound on quasi-classical families.
double sld_fisher(const ParamKrausFamily& family, double theta, const QuantumState& rho0,
                  const NumericSettings& settings = {});

}  // namespace chanest
