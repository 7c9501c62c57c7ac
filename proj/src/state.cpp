#include "chanest/state.hpp"

#include <cmath>
#include <string>

#include "chanest/errors.hpp"

namespace chanest {

QuantumState QuantumState::pure(Ket amplitudes) {
    if (amplitudes.empty()) throw ValidationError("pure state: empty amplitude list");
    const double n = norm(amplitudes);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-12) {
        throw ValidationError("pure state: norm " + std::to_string(n) + " is not 1");
    }
    QuantumState s;
    s.kind_ = Kind::pure;
    s.dim_ = amplitudes.size();
    s.density_ = ComplexMatrix::outer(amplitudes);
    s.vector_ = std::move(amplitudes);
    return s;
}

QuantumState QuantumState::pure_normalized(Ket amplitudes) {
    const double n = norm(amplitudes);
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("pure state: cannot normalize a zero vector");
    for (cx& z : amplitudes) z /= n;
    return pure(std::move(amplitudes));
}

QuantumState QuantumState::mixed(ComplexMatrix density, const NumericSettings& settings) {
    if (!density.is_square() || density.rows() == 0) throw ValidationError("mixed state: density must be square");
    if (hermiticity_defect(density) > 1e-12 * (1.0 + frobenius_norm(density))) {
        throw ValidationError("mixed state: density is not Hermitian");
    }
    const cx tr = trace(density);
    if (std::abs(tr - 1.0) > 1e-12) {
        throw ValidationError("mixed state: trace " + std::to_string(tr.real()) + " is not 1");
    }
    const auto eig = eig_hermitian(density, settings);
    if (eig.eigenvalues.front() < -settings.psd_clamp) {
        throw ValidationError("mixed state: negative eigenvalue " + std::to_string(eig.eigenvalues.front()));
    }
    QuantumState s;
    s.kind_ = Kind::mixed;
    s.dim_ = density.rows();
    s.density_ = std::move(density);
    return s;
}

QuantumState QuantumState::mixture(std::span<const double> weights, std::span<const Ket> states) {
    if (weights.size() != states.size() || states.empty()) {
        throw ValidationError("mixture: need one weight per state");
    }
    ComplexMatrix rho(states.front().size(), states.front().size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (weights[i] < 0.0) throw ValidationError("mixture: negative weight");
        rho += weights[i] * ComplexMatrix::outer(states[i]);
    }
    return mixed(std::move(rho));
}

QuantumState QuantumState::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw ValidationError("basis state |" + std::to_string(index) + "> outside dimension " +
                              std::to_string(dim));
    }
    Ket v(dim);
    v[index] = 1.0;
    return pure(std::move(v));
}

QuantumState QuantumState::plus() { return pure_normalized({1.0, 1.0}); }
QuantumState QuantumState::minus() { return pure_normalized({1.0, -1.0}); }

QuantumState QuantumState::bell(std::size_t index) {
    switch (index) {
        case 0: return pure_normalized({1.0, 0.0, 0.0, 1.0});
        case 1: return pure_normalized({1.0, 0.0, 0.0, -1.0});
        case 2: return pure_normalized({0.0, 1.0, 1.0, 0.0});
        case 3: return pure_normalized({0.0, 1.0, -1.0, 0.0});
        default: throw ValidationError("bell state index must be 0..3, got " + std::to_string(index));
    }
}

const Ket& QuantumState::vector() const {
    if (kind_ != Kind::pure) throw ValidationError("state vector requested for a mixed state");
    return vector_;
}

}  // namespace chanest
