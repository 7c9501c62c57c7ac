#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chanest/channel.hpp"
#include "chanest/povm.hpp"

namespace chanest {

/// Canonical Kraus decomposition of a family at one parameter value, relative
/// to a pure input |psi0>: tr(Omega_j^dagger Omega_k rho0) = delta_jk p_k.
///
/// Operators are ordered by descending weight (at the first grid point for a
/// tracked curve). Directions with p_k <= p_floor stay in the decomposition
/// but have no normalized vector.
struct CanonicalFrame {
    double theta = 0.0;
    Ket input;                                   // |psi0>
    KrausSet kraus_ops;                          // Omega_k(theta)
    KrausSet kraus_derivs;                       // Omega_k'(theta)
    std::vector<double> probabilities;           // p_k
    std::vector<Ket> unnormalized_vectors;       // |e_k> = Omega_k |psi0>
    std::vector<Ket> derivative_vectors;         // |d e_k> = Omega_k' |psi0>
    std::vector<std::optional<Ket>> normalized_vectors;  // |f_k> where p_k > p_floor
    ComplexMatrix remix_unitary;                 // Omega_j = sum_k R_jk Upsilon_k
    ComplexMatrix remix_derivative;              // R'
    /// Groups of indices with non-null weights equal within degeneracy_tol.
    std::vector<std::vector<std::size_t>> degenerate_blocks;

    std::size_t size() const noexcept { return kraus_ops.size(); }
    bool has_degeneracy() const noexcept { return !degenerate_blocks.empty(); }
};

/// How far a frame is from satisfying its defining relations.
struct FrameDefects {
    double max_gram_offdiag = 0.0;  // max_{j != k} |<e_j|e_k>|
    double max_gram_diag = 0.0;     // max_k | <e_k|e_k> - p_k |
    double probability_sum = 0.0;   // sum_k p_k
    double max_vector_mismatch = 0.0;  // max_k || e_k - sqrt(p_k) f_k ||
    double unitarity = 0.0;         // ||R R^dagger - I||_F
};

FrameDefects frame_defects(const CanonicalFrame& frame);

/// Diagonalizes the Gram matrix W_jk = <psi0|Upsilon_j^dagger Upsilon_k|psi0>
/// and remixes the family's operators into its eigenbasis. The remix
/// derivative comes from eigenvector perturbation theory on the Gram matrix
/// and its analytic derivative.
CanonicalFrame canonical_decompose(const ParamKrausFamily& family, double theta, const QuantumState& psi0,
                                   const NumericSettings& settings = {});

/// Canonical frames along an ascending grid, each eigenbasis matched to its
/// predecessor by overlap and phase so that the frames vary smoothly.
/// Throws DegeneracyError when a column cannot be matched unambiguously.
std::vector<CanonicalFrame> smooth_frame_curve(const ParamKrausFamily& family, std::span<const double> thetas,
                                               const QuantumState& psi0, const NumericSettings& settings = {});

struct QuasiClassicalReport {
    bool is_quasi_classical = false;
    double max_commutator = 0.0;       // max over grid pairs of ||[rho_i, rho_j]||_F
    double max_offdiag_overlap = 0.0;  // max_{j != k} |tr(Omega_j^dagger Omega_k' rho0)|
    double max_imag_mu = 0.0;          // max_k |Im tr(Omega_k^dagger Omega_k' rho0)|
};

QuasiClassicalReport quasi_classical_check(const ParamKrausFamily& family, std::span<const double> thetas,
                                           const QuantumState& psi0, const NumericSettings& settings = {});

struct EigenframePovm {
    Povm povm;
    /// Non-empty when two retained weights coincide within degeneracy_tol.
    std::vector<std::string> warnings;
};

/// Projectors |f_k><f_k| for every retained direction, plus the projector
/// onto the remaining space when the f_k do not span it.
EigenframePovm quasiclassical_optimal_povm(const CanonicalFrame& frame, const NumericSettings& settings = {});

}  // namespace chanest
