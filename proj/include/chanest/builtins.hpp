#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chanest/channel.hpp"

namespace chanest {

/// Settings consumed by builtin(); each channel reads only the fields it needs.
struct BuiltinParams {
    /// random-shift: Hilbert dimension. Defaults to k_max + 2.
    std::optional<std::size_t> dim;
    /// damping: Fock cutoff; the space is (n_max + 1)-dimensional. Required.
    std::optional<std::size_t> n_max;
    /// random-shift: upper end of the parameter domain; k_max is derived from it.
    double theta_max = 4.0;
    /// random-shift: Poisson tail mass allowed beyond k_max.
    double tail_tol = 1e-12;
};

struct BuiltinInfo {
    std::string name;
    std::string parameter;   // name of the estimated parameter
    std::string domain;
    std::string kraus_form;
};

/// depolarizing, depolarizing-canonical, dephasing, random-shift, damping.
ParamKrausFamily builtin(std::string_view name, const BuiltinParams& params = {});

const std::vector<BuiltinInfo>& builtin_catalog();

/// Pauli matrices.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

/// Poisson tail mass sum_{k > k_max} e^{-theta} theta^k / k!.
double poisson_tail(double theta, std::size_t k_max);

/// Smallest k_max whose Poisson tail at theta is below tail_tol.
std::size_t poisson_cutoff(double theta, double tail_tol);

}  // namespace chanest
