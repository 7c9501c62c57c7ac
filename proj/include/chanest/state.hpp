#pragma once

#include <cstddef>
#include <optional>

#include "chanest/linalg.hpp"

namespace chanest {

/// Input or output state: either a unit vector or a density operator.
class QuantumState {
public:
    enum class Kind { pure, mixed };

    /// Unit vector within 1e-12; otherwise ValidationError.
    static QuantumState pure(Ket amplitudes);
    /// Normalizes first; rejects the zero vector.
    static QuantumState pure_normalized(Ket amplitudes);
    /// Hermitian, unit trace within 1e-12, eigenvalues >= -psd_clamp.
    static QuantumState mixed(ComplexMatrix density, const NumericSettings& settings = {});
    /// Sum_i q_i |psi_i><psi_i|.
    static QuantumState mixture(std::span<const double> weights, std::span<const Ket> states);

    static QuantumState basis(std::size_t dim, std::size_t index);
    static QuantumState plus();
    static QuantumState minus();
    /// 0: (|00>+|11>)/sqrt2, 1: (|00>-|11>)/sqrt2, 2: (|01>+|10>)/sqrt2, 3: (|01>-|10>)/sqrt2
    static QuantumState bell(std::size_t index);

    Kind kind() const noexcept { return kind_; }
    bool is_pure() const noexcept { return kind_ == Kind::pure; }
    std::size_t dim() const noexcept { return dim_; }

    /// Throws ValidationError for mixed states.
    const Ket& vector() const;
    /// |psi><psi| for pure states.
    const ComplexMatrix& density() const noexcept { return density_; }

private:
    QuantumState() = default;

    Kind kind_ = Kind::pure;
    std::size_t dim_ = 0;
    Ket vector_;
    ComplexMatrix density_;
};

}  // namespace chanest
