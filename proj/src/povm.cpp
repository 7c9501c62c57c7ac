#include "chanest/povm.hpp"

#include "chanest/errors.hpp"
#include "chanest/state.hpp"

namespace chanest {

Povm::Povm(std::vector<ComplexMatrix> effects, std::vector<std::string> labels,
           const NumericSettings& settings)
    : effects_(std::move(effects)), labels_(std::move(labels)) {
    if (effects_.empty()) throw ValidationError("POVM: no effects");
    const std::size_t d = effects_.front().rows();
    for (std::size_t i = 0; i < effects_.size(); ++i) {
        const auto& e = effects_[i];
        if (!e.is_square() || e.rows() != d) throw ValidationError("POVM: effect " + std::to_string(i) + " has the wrong shape");
        if (hermiticity_defect(e) > 1e-10) throw ValidationError("POVM: effect " + std::to_string(i) + " is not Hermitian");
        if (eig_hermitian(e, settings).eigenvalues.front() < -1e-10) {
            throw ValidationError("POVM: effect " + std::to_string(i) + " is not positive");
        }
    }
    if (labels_.empty()) {
        for (std::size_t i = 0; i < effects_.size(); ++i) labels_.push_back(std::to_string(i));
    }
    if (labels_.size() != effects_.size()) throw ValidationError("POVM: label count does not match effect count");
    if (completeness_defect() > 1e-10) {
        throw ValidationError("POVM: effects do not sum to the identity (defect " +
                              std::to_string(completeness_defect()) + ")");
    }
}

Povm Povm::projective(std::span<const Ket> basis, std::vector<std::string> labels) {
    std::vector<ComplexMatrix> effects;
    effects.reserve(basis.size());
    for (const auto& v : basis) effects.push_back(ComplexMatrix::outer(v));
    return {std::move(effects), std::move(labels)};
}

Povm Povm::computational(std::size_t dim, std::string label_prefix) {
    std::vector<ComplexMatrix> effects;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < dim; ++i) {
        ComplexMatrix e(dim, dim);
        e(i, i) = 1.0;
        effects.push_back(std::move(e));
        labels.push_back(label_prefix + std::to_string(i));
    }
    return {std::move(effects), std::move(labels)};
}

Povm Povm::x_basis() {
    const std::vector<Ket> basis{QuantumState::plus().vector(), QuantumState::minus().vector()};
    return projective(basis, {"+", "-"});
}

Povm Povm::bell_basis() {
    std::vector<Ket> basis;
    for (std::size_t i = 0; i < 4; ++i) basis.push_back(QuantumState::bell(i).vector());
    return projective(basis, {"psi+", "psi-", "phi+", "phi-"});
}

Povm Povm::trivial(std::size_t dim) { return {{ComplexMatrix::identity(dim)}, {"all"}}; }

double Povm::completeness_defect() const {
    ComplexMatrix sum(dim(), dim());
    for (const auto& e : effects_) sum += e;
    return frobenius_distance(sum, ComplexMatrix::identity(dim()));
}

}  // namespace chanest
