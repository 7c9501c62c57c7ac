#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chanest/linalg.hpp"

namespace chanest {

/// Finite POVM: Hermitian PSD effects summing to the identity.
class Povm {
public:
    /// Validates the effects (Hermitian within 1e-10, eigenvalues >= -1e-10,
    /// completeness within 1e-10). Labels default to "0", "1", ...
    Povm(std::vector<ComplexMatrix> effects, std::vector<std::string> labels = {},
         const NumericSettings& settings = {});

    /// Rank-one projectors onto the given orthonormal vectors.
    static Povm projective(std::span<const Ket> basis, std::vector<std::string> labels = {});

    /// Projectors onto the computational basis of dimension dim.
    static Povm computational(std::size_t dim, std::string label_prefix = "");
    static Povm z_basis() { return computational(2); }
    static Povm x_basis();
    static Povm bell_basis();
    static Povm trivial(std::size_t dim);

    std::size_t size() const noexcept { return effects_.size(); }
    std::size_t dim() const noexcept { return effects_.front().rows(); }
    const std::vector<ComplexMatrix>& effects() const noexcept { return effects_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// ||sum E - I||_F
    double completeness_defect() const;

private:
    std::vector<ComplexMatrix> effects_;
    std::vector<std::string> labels_;
};

}  // namespace chanest
