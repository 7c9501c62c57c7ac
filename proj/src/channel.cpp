#include "chanest/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chanest/errors.hpp"

namespace chanest {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Finite-difference derivative of a Kraus callback, central when both
/// neighbours are inside the domain, otherwise one-sided second order.
KrausSet difference_derivative(const KrausFunction& kraus, const ThetaDomain& domain, double theta,
                               double h) {
    auto combine = [](const KrausSet& a, double wa, const KrausSet& b, double wb) {
        KrausSet out;
        out.reserve(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) out.push_back(wa * a[k] + wb * b[k]);
        return out;
    };
    if (domain.contains(theta - h) && domain.contains(theta + h)) {
        return combine(kraus(theta + h), 0.5 / h, kraus(theta - h), -0.5 / h);
    }
    const double sign = domain.contains(theta + 2 * h) ? 1.0 : -1.0;
    const double s = sign * h;
    const KrausSet f0 = kraus(theta);
    const KrausSet f1 = kraus(theta + s);
    const KrausSet f2 = kraus(theta + 2 * s);
    KrausSet out;
    for (std::size_t k = 0; k < f0.size(); ++k) {
        out.push_back((-1.5 / s) * f0[k] + (2.0 / s) * f1[k] + (-0.5 / s) * f2[k]);
    }
    return out;
}

}  // namespace

double ThetaDomain::clamp_inward(double theta, double inset) const noexcept {
    double lo_in = std::isfinite(lo) ? lo + inset : lo;
    double hi_in = std::isfinite(hi) ? hi - inset : hi;
    return std::clamp(theta, lo_in, hi_in);
}

std::string ThetaDomain::describe() const {
    auto end = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        return fmt_double(v);
    };
    return "(" + end(lo) + ", " + end(hi) + ")";
}

ParamKrausFamily::ParamKrausFamily(std::string label, std::size_t dim, std::size_t n_kraus,
                                   ThetaDomain domain, KrausFunction kraus, KrausFunction derivative,
                                   double trace_tol)
    : label_(std::move(label)),
      dim_(dim),
      n_kraus_(n_kraus),
      domain_(domain),
      kraus_(std::move(kraus)),
      derivative_(std::move(derivative)),
      trace_tol_(trace_tol) {
    if (dim_ == 0 || n_kraus_ == 0) throw ValidationError("family '" + label_ + "': empty dimension or Kraus set");
    if (!(domain_.lo < domain_.hi)) throw ValidationError("family '" + label_ + "': empty parameter domain");
    if (!kraus_ || !derivative_) throw ValidationError("family '" + label_ + "': missing callback");
}

ParamKrausFamily ParamKrausFamily::from_closure(std::string label, std::size_t dim,
                                                std::size_t n_kraus, ThetaDomain domain,
                                                KrausFunction kraus, double trace_tol,
                                                const NumericSettings& settings) {
    const double rel = settings.fd_step;
    KrausFunction deriv = [kraus, domain, rel](double theta) {
        const double h = rel * std::max(1.0, std::abs(theta));
        return difference_derivative(kraus, domain, theta, h);
    };
    return {std::move(label), dim, n_kraus, domain, std::move(kraus), std::move(deriv), trace_tol};
}

void ParamKrausFamily::require_in_domain(double theta) const {
    if (!domain_.contains(theta)) {
        throw ValidationError("family '" + label_ + "': theta=" + fmt_double(theta) +
                              " outside domain " + domain_.describe());
    }
}

KrausSet ParamKrausFamily::kraus_at(double theta) const {
    require_in_domain(theta);
    KrausSet ops = kraus_(theta);
    if (ops.size() != n_kraus_) {
        throw NumericError("family '" + label_ + "': callback returned " + std::to_string(ops.size()) +
                           " operators, expected " + std::to_string(n_kraus_));
    }
    return ops;
}

KrausSet ParamKrausFamily::kraus_deriv_at(double theta) const {
    require_in_domain(theta);
    KrausSet ops = derivative_(theta);
    if (ops.size() != n_kraus_) {
        throw NumericError("family '" + label_ + "': derivative callback returned " +
                           std::to_string(ops.size()) + " operators, expected " + std::to_string(n_kraus_));
    }
    return ops;
}

double trace_preservation_defect(std::span<const ComplexMatrix> kraus) {
    if (kraus.empty()) throw ValidationError("trace_preservation_defect: empty Kraus set");
    ComplexMatrix sum(kraus.front().cols(), kraus.front().cols());
    for (const auto& k : kraus) sum += matmul(dagger(k), k);
    return frobenius_distance(sum, ComplexMatrix::identity(sum.rows()));
}

ComplexMatrix apply_kraus(std::span<const ComplexMatrix> kraus, const ComplexMatrix& rho) {
    if (kraus.empty()) throw ValidationError("apply_kraus: empty Kraus set");
    ComplexMatrix out(kraus.front().rows(), kraus.front().rows());
    for (const auto& k : kraus) out += matmul(matmul(k, rho), dagger(k));
    return out;
}

namespace {

void require_state_dim(const ParamKrausFamily& family, const QuantumState& rho0) {
    if (rho0.dim() != family.dim()) {
        throw ValidationError("family '" + family.label() + "' has dimension " + std::to_string(family.dim()) +
                              " but the input state has dimension " + std::to_string(rho0.dim()));
    }
}

}  // namespace

ComplexMatrix output_state(const ParamKrausFamily& family, double theta, const QuantumState& rho0) {
    require_state_dim(family, rho0);
    return apply_kraus(family.kraus_at(theta), rho0.density());
}

ComplexMatrix output_derivative(const ParamKrausFamily& family, double theta, const QuantumState& rho0) {
    require_state_dim(family, rho0);
    const KrausSet ops = family.kraus_at(theta);
    const KrausSet derivs = family.kraus_deriv_at(theta);
    const ComplexMatrix& rho = rho0.density();
    ComplexMatrix out(family.dim(), family.dim());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const ComplexMatrix half = matmul(matmul(derivs[k], rho), dagger(ops[k]));
        out += half;
        out += dagger(half);
    }
    return out;
}

ParamKrausFamily extend_identity(const ParamKrausFamily& family) {
    const std::size_t d = family.dim();
    const ComplexMatrix id = ComplexMatrix::identity(d);
    auto lift = [id](KrausSet ops) {
        for (auto& op : ops) op = kron(id, op);
        return ops;
    };
    KrausFunction kraus = [family, lift](double theta) { return lift(family.kraus_at(theta)); };
    KrausFunction deriv = [family, lift](double theta) { return lift(family.kraus_deriv_at(theta)); };
    return {"identity-extended " + family.label(), d * d, family.n_kraus(), family.domain(),
            std::move(kraus), std::move(deriv), family.trace_tol() * std::sqrt(static_cast<double>(d))};
}

ParamKrausFamily tensor_square(const ParamKrausFamily& family) {
    const std::size_t d = family.dim();
    KrausFunction kraus = [family](double theta) {
        const KrausSet ops = family.kraus_at(theta);
        KrausSet out;
        out.reserve(ops.size() * ops.size());
        for (const auto& a : ops)
            for (const auto& b : ops) out.push_back(kron(a, b));
        return out;
    };
    KrausFunction deriv = [family](double theta) {
        const KrausSet ops = family.kraus_at(theta);
        const KrausSet ders = family.kraus_deriv_at(theta);
        KrausSet out;
        out.reserve(ops.size() * ops.size());
        for (std::size_t j = 0; j < ops.size(); ++j)
            for (std::size_t k = 0; k < ops.size(); ++k)
                out.push_back(kron(ders[j], ops[k]) + kron(ops[j], ders[k]));
        return out;
    };
    // ||A (x) A - I (x) I|| <= ||A - I|| (||A|| + ||I||) with A = sum K^dagger K.
    const double sd = std::sqrt(static_cast<double>(d));
    return {family.label() + " (x) " + family.label(), d * d, family.n_kraus() * family.n_kraus(),
            family.domain(), std::move(kraus), std::move(deriv),
            family.trace_tol() * (2.0 * sd + family.trace_tol())};
}

ParamKrausFamily rotation_family(std::string label, const ComplexMatrix& hamiltonian, double phase_rate,
                                 ThetaDomain domain) {
    const auto eig = eig_hermitian(hamiltonian);
    const std::size_t d = hamiltonian.rows();
    auto unitary = [eig, d, phase_rate](double theta) {
        ComplexMatrix scaled = eig.eigenvectors;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                scaled(r, c) *= std::polar(1.0, theta * (phase_rate - eig.eigenvalues[c]));
        return matmul(scaled, dagger(eig.eigenvectors));
    };
    // d/dtheta [e^{i theta phi} e^{-i theta H}] = i (phi - H) U
    const ComplexMatrix generator =
        cx{0.0, 1.0} * (phase_rate * ComplexMatrix::identity(d) - hamiltonian);
    KrausFunction kraus = [unitary](double theta) { return KrausSet{unitary(theta)}; };
    KrausFunction deriv = [unitary, generator](double theta) {
        return KrausSet{matmul(generator, unitary(theta))};
    };
    return {std::move(label), d, 1, domain, std::move(kraus), std::move(deriv)};
}

FamilyCheck check_family(const ParamKrausFamily& family, std::span<const double> thetas, double fd_step) {
    FamilyCheck check;
    KrausFunction raw = [&family](double theta) { return family.kraus_at(theta); };
    for (double theta : thetas) {
        const KrausSet ops = family.kraus_at(theta);
        check.max_trace_defect = std::max(check.max_trace_defect, trace_preservation_defect(ops));
        const KrausSet analytic = family.kraus_deriv_at(theta);
        const double h = fd_step * std::max(1.0, std::abs(theta));
        const KrausSet numeric = difference_derivative(raw, family.domain(), theta, h);
        for (std::size_t k = 0; k < ops.size(); ++k) {
            check.max_derivative_error =
                std::max(check.max_derivative_error, frobenius_distance(analytic[k], numeric[k]));
        }
    }
    return check;
}

}  // namespace chanest
