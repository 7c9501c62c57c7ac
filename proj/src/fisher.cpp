#include "chanest/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chanest/errors.hpp"
#include "chanest/finite_difference.hpp"

namespace chanest {

namespace {

constexpr std::size_t kStencilWidth = 7;

void require_dim(std::size_t have, std::size_t want, const char* what) {
    if (have != want) {
        throw ValidationError(std::string(what) + ": dimension " + std::to_string(have) + " does not match " +
                              std::to_string(want));
    }
}

double squared_norm(std::span<const cx> v) {
    double s = 0.0;
    for (const cx& x : v) s += std::norm(x);
    return s;
}

}  // namespace

double kraus_bound(std::span<const ComplexMatrix> kraus_derivs, const QuantumState& rho0) {
    if (kraus_derivs.empty()) return 0.0;
    const std::size_t d = kraus_derivs.front().cols();
    require_dim(rho0.dim(), d, "kraus_bound");
    if (rho0.is_pure()) {
        double s = 0.0;
        for (const auto& k : kraus_derivs) s += squared_norm(chanest::apply(k, rho0.vector()));
        return 4.0 * s;
    }
    ComplexMatrix m(d, d);
    for (const auto& k : kraus_derivs) m += dagger(k) * k;
    return std::max(0.0, 4.0 * trace(m * rho0.density()).real());
}

double kraus_bound(const ParamKrausFamily& family, double theta, const QuantumState& rho0) {
    require_dim(rho0.dim(), family.dim(), "kraus_bound");
    const KrausSet d = family.kraus_deriv_at(theta);
    return kraus_bound(d, rho0);
}

double kraus_bound(const CanonicalFrame& frame) {
    double s = 0.0;
    for (const auto& v : frame.derivative_vectors) s += squared_norm(v);
    return 4.0 * s;
}

double kraus_bound(const CanonicalFrame& frame, const QuantumState& rho0) {
    return kraus_bound(frame.kraus_derivs, rho0);
}

double classical_fisher(const Povm& povm, const ComplexMatrix& rho, const ComplexMatrix& drho,
                        const NumericSettings& settings) {
    require_dim(povm.dim(), rho.rows(), "classical_fisher");
    const double eps = settings.eps_prob;
    double f = 0.0;
    for (std::size_t i = 0; i < povm.size(); ++i) {
        const auto& e = povm.effects()[i];
        const double prob = frobenius_inner(e, rho).real();
        const double d = frobenius_inner(e, drho).real();
        if (prob < eps) {
            if (std::abs(d) < std::sqrt(eps)) continue;
            std::ostringstream msg;
            msg << "divergent Fisher term: outcome '" << povm.labels()[i] << "' has probability " << prob
                << " but derivative " << d;
            throw DivergentFisherError(msg.str());
        }
        f += d * d / prob;
    }
    return f;
}

double classical_fisher(const Povm& povm, const ParamKrausFamily& family, double theta, const QuantumState& rho0,
                        const NumericSettings& settings) {
    require_dim(povm.dim(), family.dim(), "classical_fisher");
    return classical_fisher(povm, output_state(family, theta, rho0), output_derivative(family, theta, rho0),
                            settings);
}

OptimalityReport optimality_check(const Povm& povm, const CanonicalFrame& frame, const QuantumState& rho0,
                                  const NumericSettings& settings) {
    if (!rho0.is_pure()) throw ValidationError("optimality_check needs a pure input state");
    require_dim(povm.dim(), rho0.dim(), "optimality_check");
    require_dim(frame.input.size(), rho0.dim(), "optimality_check");
    const Ket& psi = rho0.vector();
    const double eps = settings.eps_prob;

    // rho0^{1/2} = |psi><psi| for a pure input, so each stacked block
    // E^{1/2} K |psi><psi| has Frobenius products equal to those of E^{1/2} K |psi>.
    std::vector<Ket> e, de;
    for (std::size_t k = 0; k < frame.size(); ++k) {
        e.push_back(chanest::apply(frame.kraus_ops[k], psi));
        de.push_back(chanest::apply(frame.kraus_derivs[k], psi));
    }

    OptimalityReport rep;
    rep.theta = frame.theta;
    rep.labels = povm.labels();
    for (const auto& effect : povm.effects()) {
        const ComplexMatrix root = psd_sqrt(effect, settings);
        std::vector<Ket> a, b;
        cx ba = 0.0;
        double bb = 0.0;
        double aa = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            b.push_back(chanest::apply(root, e[k]));
            a.push_back(chanest::apply(root, de[k]));
            ba += inner(b[k], a[k]);
            bb += squared_norm(b[k]);
            aa += squared_norm(a[k]);
        }
        const double nb = std::sqrt(bb);
        const double na = std::sqrt(aa);
        double lambda = 0.0;
        double residual = 0.0;
        if (nb < eps) {
            residual = na < std::sqrt(eps) ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            lambda = ba.real() / bb;
            double r2 = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k)
                for (std::size_t i = 0; i < a[k].size(); ++i) r2 += std::norm(a[k][i] - lambda * b[k][i]);
            residual = std::sqrt(r2) / std::max(nb, eps);
        }
        rep.lambdas.push_back(lambda);
        rep.residuals.push_back(residual);
        rep.max_residual = std::max(rep.max_residual, residual);
    }
    rep.satisfied = rep.max_residual <= settings.optimality_tol;
    return rep;
}

DistanceCurve statistical_distance_eigencoords(std::span<const CanonicalFrame> frames, std::string label,
                                               const NumericSettings& settings) {
    if (frames.size() < 3) throw ValidationError("distance curve needs at least three frames");
    const std::size_t n_ops = frames.front().size();
    DistanceCurve curve;
    curve.label = std::move(label);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].size() != n_ops) throw ValidationError("frames along a curve must have the same size");
        if (i > 0 && !(frames[i].theta > frames[i - 1].theta)) {
            throw ValidationError("frames must be ordered by strictly increasing theta");
        }
        curve.thetas.push_back(frames[i].theta);
    }

    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto idx = stencil_indices(frames.size(), i, kStencilWidth);
        std::vector<double> nodes;
        for (std::size_t j : idx) nodes.push_back(frames[j].theta);
        const std::vector<double> w = derivative_weights(frames[i].theta, nodes);

        double metric = 0.0;
        for (std::size_t k = 0; k < n_ops; ++k) {
            const double p = frames[i].probabilities[k];
            // A direction that is null anywhere in the stencil has weight of
            // order p_floor here; its term is dropped with it.
            const bool live = std::all_of(idx.begin(), idx.end(), [&](std::size_t j) {
                return frames[j].probabilities[k] > settings.p_floor && frames[j].normalized_vectors[k].has_value();
            });
            if (!live) continue;
            double dp = 0.0;
            Ket df(frames[i].input.size(), 0.0);
            for (std::size_t s = 0; s < idx.size(); ++s) {
                const CanonicalFrame& fr = frames[idx[s]];
                dp += w[s] * fr.probabilities[k];
                const Ket& f = *fr.normalized_vectors[k];
                for (std::size_t r = 0; r < df.size(); ++r) df[r] += w[s] * f[r];
            }
            const Ket& f = *frames[i].normalized_vectors[k];
            metric += dp * dp / p + 4.0 * p * std::norm(inner(f, df));
        }
        curve.eigencoord_values.push_back(metric);
        curve.bound_values.push_back(kraus_bound(frames[i]));
    }
    return curve;
}

RemixPenalty remix_penalty(const CanonicalFrame& frame, const ComplexMatrix& generator, const QuantumState& rho0,
                           const Povm& povm, const NumericSettings& settings) {
    const std::size_t n = frame.size();
    if (!generator.is_square() || generator.rows() != n) {
        throw ValidationError("remix generator must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (frobenius_distance(generator, cx(-1.0) * dagger(generator)) > settings.hermitian_tol * (1.0 + frobenius_norm(generator))) {
        throw ValidationError("remix generator is not anti-Hermitian");
    }
    const Ket& psi = rho0.vector();
    require_dim(psi.size(), frame.input.size(), "remix_penalty");

    // The frame must be quasi-classical on rho0.
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const cx m = inner(frame.unnormalized_vectors[j], frame.derivative_vectors[k]);
            const double defect = j == k ? std::abs(m.imag()) : std::abs(m);
            if (defect > settings.quasi_classical_tol) {
                throw ValidationError("remix_penalty: frame is not quasi-classical");
            }
        }
    }
    const OptimalityReport opt = optimality_check(povm, frame, rho0, settings);
    if (!opt.satisfied) {
        std::ostringstream msg;
        msg << "remix_penalty: POVM does not satisfy the optimality condition (max residual " << opt.max_residual
            << ")";
        throw ValidationError(msg.str());
    }

    const ComplexMatrix u = expm_anti_hermitian(cx(frame.theta) * generator, settings);
    const ComplexMatrix du = generator * u;

    RemixPenalty out;
    out.canonical_bound = kraus_bound(frame);
    const std::size_t d = psi.size();
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Ket v(d, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t r = 0; r < d; ++r) {
                v[r] += du(j, k) * frame.unnormalized_vectors[k][r] + u(j, k) * frame.derivative_vectors[k][r];
            }
        }
        c += squared_norm(v);
    }
    out.remixed_bound = 4.0 * c;
    double penalty = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) penalty += std::norm(du(j, k)) * frame.probabilities[k];
    out.predicted = out.canonical_bound + 4.0 * penalty;
    return out;
}

double sld_fisher(const ParamKrausFamily& family, double theta, const QuantumState& rho0,
                  const NumericSettings& settings) {
    const ComplexMatrix rho = output_state(family, theta, rho0);
    const ComplexMatrix drho = output_derivative(family, theta, rho0);
    const auto eig = eig_hermitian(rho, settings);
    const ComplexMatrix& v = eig.eigenvectors;
    const ComplexMatrix m = dagger(v) * drho * v;
    double f = 0.0;
    const std::size_t d = rho.rows();
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            const double s = eig.eigenvalues[a] + eig.eigenvalues[b];
            if (s > settings.eps_prob) f += 2.0 * std::norm(m(a, b)) / s;
        }
    }
    return f;
}

}  // namespace chanest
