#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chanest/linalg.hpp"
#include "chanest/state.hpp"

namespace chanest {

/// Open parameter interval (lo, hi). Either end may be infinite.
struct ThetaDomain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double theta) const noexcept { return theta > lo && theta < hi; }
    /// Pulls a value inside [lo + inset, hi - inset].
    double clamp_inward(double theta, double inset) const noexcept;
    std::string describe() const;
};

using KrausSet = std::vector<ComplexMatrix>;
using KrausFunction = std::function<KrausSet(double)>;

/// theta -> {Upsilon_k(theta)} together with theta -> {Upsilon_k'(theta)}.
///
/// Immutable after construction. The Kraus and derivative callbacks are
/// evaluated only for theta inside the domain; out-of-domain requests raise
/// ValidationError.
class ParamKrausFamily {
public:
    ParamKrausFamily(std::string label, std::size_t dim, std::size_t n_kraus, ThetaDomain domain,
                     KrausFunction kraus, KrausFunction derivative, double trace_tol = 1e-10);

    /// Family without an analytic derivative: derivatives come from central
    /// differences with step fd_step * max(1, |theta|), one-sided near a
    /// finite domain end.
    static ParamKrausFamily from_closure(std::string label, std::size_t dim, std::size_t n_kraus,
                                         ThetaDomain domain, KrausFunction kraus,
                                         double trace_tol = 1e-10,
                                         const NumericSettings& settings = {});

    const std::string& label() const noexcept { return label_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t n_kraus() const noexcept { return n_kraus_; }
    const ThetaDomain& domain() const noexcept { return domain_; }
    /// Declared trace-preservation tolerance (the truncation deficiency for truncated channels).
    double trace_tol() const noexcept { return trace_tol_; }

    KrausSet kraus_at(double theta) const;
    KrausSet kraus_deriv_at(double theta) const;

    void require_in_domain(double theta) const;

private:
    std::string label_;
    std::size_t dim_;
    std::size_t n_kraus_;
    ThetaDomain domain_;
    KrausFunction kraus_;
    KrausFunction derivative_;
    double trace_tol_;
};

/// ||sum_k K_k^dagger K_k - I||_F
double trace_preservation_defect(std::span<const ComplexMatrix> kraus);

/// sum_k K rho K^dagger for an explicit Kraus set.
ComplexMatrix apply_kraus(std::span<const ComplexMatrix> kraus, const ComplexMatrix& rho);

/// rho(theta) = sum_k Upsilon_k rho0 Upsilon_k^dagger
ComplexMatrix output_state(const ParamKrausFamily& family, double theta, const QuantumState& rho0);

/// rho'(theta) = sum_k (Upsilon_k' rho0 Upsilon_k^dagger + Upsilon_k rho0 Upsilon_k'^dagger)
ComplexMatrix output_derivative(const ParamKrausFamily& family, double theta, const QuantumState& rho0);

/// {I_d (x) Upsilon_k} on dimension d^2.
ParamKrausFamily extend_identity(const ParamKrausFamily& family);

/// {Upsilon_j (x) Upsilon_k}, n_kraus^2 operators, derivative by the product rule.
ParamKrausFamily tensor_square(const ParamKrausFamily& family);

/// Single-operator family exp(i theta phase_rate) exp(-i theta H) with its
/// analytic derivative. H must be Hermitian.
ParamKrausFamily rotation_family(std::string label, const ComplexMatrix& hamiltonian,
                                 double phase_rate = 0.0,
                                 ThetaDomain domain = {});

/// Worst-case discrepancies of a family over a set of sample points.
struct FamilyCheck {
    double max_trace_defect = 0.0;
    double max_derivative_error = 0.0;  // analytic vs central difference, per operator
};

FamilyCheck check_family(const ParamKrausFamily& family, std::span<const double> thetas,
                         double fd_step = 1e-6);

}  // namespace chanest
