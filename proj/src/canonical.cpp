#include "chanest/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chanest/errors.hpp"

namespace chanest {

namespace {

// Columns of `vectors` are eigenvectors, aligned with `values`.
struct Spectrum {
    std::vector<double> values;
    ComplexMatrix vectors;
};

std::vector<Ket> images(const KrausSet& ops, const Ket& psi) {
    std::vector<Ket> out;
    out.reserve(ops.size());
    for (const auto& k : ops) out.push_back(chanest::apply(k, psi));
    return out;
}

ComplexMatrix gram(const std::vector<Ket>& a, const std::vector<Ket>& b) {
    ComplexMatrix w(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j)
        for (std::size_t k = 0; k < b.size(); ++k) w(j, k) = inner(a[j], b[k]);
    return w;
}

// Runs of consecutive indices (in the given order) whose values differ by
// less than tol from their neighbour.
std::vector<std::vector<std::size_t>> clusters(const std::vector<double>& values, double tol) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && std::abs(values[i] - values[i - 1]) < tol) {
            out.back().push_back(i);
        } else {
            out.push_back({i});
        }
    }
    return out;
}

ComplexMatrix columns_of(const ComplexMatrix& m, const std::vector<std::size_t>& cols) {
    ComplexMatrix out(m.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, j) = m(r, cols[j]);
    return out;
}

ComplexMatrix transpose(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

Spectrum raw_spectrum(const ParamKrausFamily& family, double theta, const Ket& psi, const NumericSettings& s) {
    const auto e = images(family.kraus_at(theta), psi);
    auto eig = eig_hermitian(gram(e, e), s);
    if (!eig.eigenvectors.all_finite()) {
        throw NumericError("Gram matrix diagonalization failed at theta=" + std::to_string(theta));
    }
    return {std::move(eig.eigenvalues), std::move(eig.eigenvectors)};
}

// Eigenbasis at theta in canonical order: descending weight, and inside a
// degenerate block the basis that diagonalizes the Gram derivative, ordered
// by descending derivative.
Spectrum reference_spectrum(const ParamKrausFamily& family, double theta, const Ket& psi,
                            const NumericSettings& s) {
    const Spectrum raw = raw_spectrum(family, theta, psi, s);
    const std::size_t n = raw.values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw.values[a] > raw.values[b]; });
    Spectrum ref{std::vector<double>(n), columns_of(raw.vectors, order)};
    for (std::size_t i = 0; i < n; ++i) ref.values[i] = raw.values[order[i]];

    const auto blocks = clusters(ref.values, s.degeneracy_tol);
    if (std::none_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.size() > 1; })) return ref;

    const auto e = images(family.kraus_at(theta), psi);
    const auto de = images(family.kraus_deriv_at(theta), psi);
    const ComplexMatrix w_dot = gram(de, e) + gram(e, de);
    for (const auto& block : blocks) {
        if (block.size() < 2) continue;
        const ComplexMatrix v = columns_of(ref.vectors, block);
        const auto sub = eig_hermitian(dagger(v) * w_dot * v, s);
        const ComplexMatrix rotated = v * sub.eigenvectors;
        // eig_hermitian sorts ascending; take the block in descending order.
        for (std::size_t j = 0; j < block.size(); ++j) {
            Ket col = rotated.column(block.size() - 1 - j);
            fix_phase(col);
            ref.vectors.set_column(block[j], col);
        }
    }
    return ref;
}

// M (M^dagger M)^{-1/2}: the unitary closest to M.
ComplexMatrix polar_unitary(const ComplexMatrix& m, const NumericSettings& s) {
    const auto eig = eig_hermitian(dagger(m) * m, s);
    std::vector<double> inv_sqrt(eig.eigenvalues.size());
    for (std::size_t i = 0; i < inv_sqrt.size(); ++i) {
        if (eig.eigenvalues[i] <= 1e-12) throw NumericError("frame matching: overlap block is singular");
        inv_sqrt[i] = 1.0 / std::sqrt(eig.eigenvalues[i]);
    }
    return m * (eig.eigenvectors * ComplexMatrix::diagonal(inv_sqrt) * dagger(eig.eigenvectors));
}

// Reorders and rotates a fresh eigenbasis so that column r lies as close as
// possible to column r of `reference`.
Spectrum align(const Spectrum& raw, const ComplexMatrix& reference, double theta, const NumericSettings& s) {
    const std::size_t n = raw.values.size();
    const auto blocks = clusters(raw.values, s.degeneracy_tol);
    const ComplexMatrix overlap = dagger(reference) * raw.vectors;  // <ref_r|v_i>

    std::vector<std::vector<std::size_t>> assigned(blocks.size());
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t best = 0;
        double best_w = -1.0;
        double second_w = -1.0;
        for (std::size_t c = 0; c < blocks.size(); ++c) {
            double w = 0.0;
            for (std::size_t i : blocks[c]) w += std::norm(overlap(r, i));
            if (w > best_w) {
                second_w = best_w;
                best_w = w;
                best = c;
            } else if (w > second_w) {
                second_w = w;
            }
        }
        if (second_w >= 0.0 && best_w - second_w < s.match_ambiguity_tol) {
            std::ostringstream msg;
            msg << "ambiguous frame matching at theta=" << theta << ": column " << r
                << " overlaps two eigenspaces equally";
            throw DegeneracyError(msg.str());
        }
        assigned[best].push_back(r);
    }

    Spectrum out{std::vector<double>(n), ComplexMatrix(reference.rows(), n)};
    for (std::size_t c = 0; c < blocks.size(); ++c) {
        if (assigned[c].size() != blocks[c].size()) {
            std::ostringstream msg;
            msg << "frame matching at theta=" << theta << ": eigenspace of dimension " << blocks[c].size()
                << " received " << assigned[c].size() << " columns";
            throw DegeneracyError(msg.str());
        }
        const ComplexMatrix v = columns_of(raw.vectors, blocks[c]);
        const ComplexMatrix q = polar_unitary(dagger(v) * columns_of(reference, assigned[c]), s);
        const ComplexMatrix rotated = v * q;
        for (std::size_t j = 0; j < assigned[c].size(); ++j) {
            const std::size_t r = assigned[c][j];
            out.vectors.set_column(r, rotated.column(j));
            double value = 0.0;
            for (std::size_t i = 0; i < blocks[c].size(); ++i) value += std::norm(q(i, j)) * raw.values[blocks[c][i]];
            out.values[r] = value;
        }
    }
    return out;
}

// Scale on which the family is sampled for the second derivative of the
// Gram matrix: max(1, |theta|), capped by the distance to a finite domain end.
double local_scale(const ThetaDomain& domain, double theta) {
    double scale = std::max(1.0, std::abs(theta));
    if (std::isfinite(domain.lo)) scale = std::min(scale, theta - domain.lo);
    if (std::isfinite(domain.hi)) scale = std::min(scale, domain.hi - theta);
    return scale;
}

ComplexMatrix gram_rate(const ParamKrausFamily& family, double theta, const Ket& psi) {
    const auto e = images(family.kraus_at(theta), psi);
    const auto de = images(family.kraus_deriv_at(theta), psi);
    return gram(de, e) + gram(e, de);
}

// Indices grouped by value: sorted ascending, neighbours closer than tol chained.
std::vector<std::vector<std::size_t>> value_groups(const std::vector<double>& values, double tol) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && values[order[i]] - values[order[i - 1]] < tol) {
            out.back().push_back(order[i]);
        } else {
            out.push_back({order[i]});
        }
    }
    return out;
}

std::vector<double> rayleigh(const ComplexMatrix& u, const ComplexMatrix& w) {
    const ComplexMatrix m = dagger(u) * w * u;
    std::vector<double> out(u.cols());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = m(j, j).real();
    return out;
}

// Rotates every degenerate block of u onto the basis that diagonalizes the
// Gram derivative inside it, keeping each column as close as possible to
// where it was. Blocks whose derivative is itself degenerate are left alone.
ComplexMatrix settle_blocks(const ParamKrausFamily& family, double theta, const Ket& psi, ComplexMatrix u,
                            const NumericSettings& s) {
    const auto e = images(family.kraus_at(theta), psi);
    const std::vector<double> p = rayleigh(u, gram(e, e));
    const auto groups = value_groups(p, s.degeneracy_tol);
    if (std::none_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() > 1; })) return u;
    const ComplexMatrix w_dot = gram_rate(family, theta, psi);
    for (const auto& g : groups) {
        if (g.size() < 2) continue;
        const ComplexMatrix v = columns_of(u, g);
        const auto sub = eig_hermitian(dagger(v) * w_dot * v, s);
        const Spectrum rotated{sub.eigenvalues, v * sub.eigenvectors};
        const Spectrum matched = align(rotated, v, theta, s);
        for (std::size_t j = 0; j < g.size(); ++j) u.set_column(g[j], matched.vectors.column(j));
    }
    return u;
}

// u' for an eigenbasis u of the Gram matrix, in the gauge <u_j|u_j'> = 0.
// Off-block entries come from first-order perturbation theory. Inside a
// degenerate block whose weights split at first order the second-order
// relation fixes the rotation; the Gram second derivative it needs is a
// four-point difference of the analytic first derivative.
ComplexMatrix remix_rate(const ParamKrausFamily& family, double theta, const Ket& psi, const ComplexMatrix& u,
                         const NumericSettings& s) {
    const std::size_t n = u.cols();
    const auto e = images(family.kraus_at(theta), psi);
    const std::vector<double> p = rayleigh(u, gram(e, e));
    const ComplexMatrix wd = dagger(u) * gram_rate(family, theta, psi) * u;
    const auto groups = value_groups(p, s.degeneracy_tol);
    std::vector<std::size_t> group_of(n);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t i : groups[g]) group_of[i] = g;

    ComplexMatrix wdd;
    auto second_derivative = [&]() -> const ComplexMatrix& {
        if (wdd.empty()) {
            const double h = 1e-3 * local_scale(family.domain(), theta);
            const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
            const double weights[4] = {1.0, -8.0, 8.0, -1.0};
            ComplexMatrix acc(n, n);
            for (int i = 0; i < 4; ++i) acc += gram_rate(family, theta + offsets[i] * h, psi) * cx(weights[i] / (12.0 * h));
            wdd = dagger(u) * acc * u;
        }
        return wdd;
    };

    ComplexMatrix c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < n; ++m) {
            if (m == j) continue;
            if (group_of[m] != group_of[j]) {
                c(m, j) = wd(m, j) / (p[j] - p[m]);
                continue;
            }
            const double split = wd(j, j).real() - wd(m, m).real();
            if (std::abs(split) <= s.degeneracy_tol) continue;
            cx num = 0.5 * second_derivative()(m, j);
            for (std::size_t l = 0; l < n; ++l) {
                if (group_of[l] == group_of[j]) continue;
                num += wd(m, l) * wd(l, j) / (p[j] - p[l]);
            }
            c(m, j) = num / split;
        }
    }
    return u * c;
}

CanonicalFrame build_frame(const ParamKrausFamily& family, double theta, const Ket& psi, const ComplexMatrix& u,
                           const ComplexMatrix& du, const NumericSettings& s) {
    const KrausSet ups = family.kraus_at(theta);
    const KrausSet dups = family.kraus_deriv_at(theta);
    const std::size_t n = ups.size();
    const std::size_t d = family.dim();

    CanonicalFrame f;
    f.theta = theta;
    f.input = psi;
    f.remix_unitary = transpose(u);
    f.remix_derivative = transpose(du);
    for (std::size_t j = 0; j < n; ++j) {
        ComplexMatrix omega(d, d);
        ComplexMatrix domega(d, d);
        for (std::size_t k = 0; k < n; ++k) {
            omega += ups[k] * u(k, j);
            domega += ups[k] * du(k, j);
            domega += dups[k] * u(k, j);
        }
        Ket e = chanest::apply(omega, psi);
        const double p = std::pow(norm(e), 2);
        if (p > s.p_floor) {
            Ket fk = e;
            const double scale = 1.0 / std::sqrt(p);
            for (auto& x : fk) x *= scale;
            f.normalized_vectors.emplace_back(std::move(fk));
        } else {
            f.normalized_vectors.emplace_back(std::nullopt);
        }
        f.probabilities.push_back(p);
        f.derivative_vectors.push_back(chanest::apply(domega, psi));
        f.unnormalized_vectors.push_back(std::move(e));
        f.kraus_ops.push_back(std::move(omega));
        f.kraus_derivs.push_back(std::move(domega));
    }

    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < n; ++k)
        if (f.probabilities[k] > s.p_floor) live.push_back(k);
    std::vector<bool> used(live.size(), false);
    for (std::size_t a = 0; a < live.size(); ++a) {
        if (used[a]) continue;
        std::vector<std::size_t> block{live[a]};
        for (std::size_t b = a + 1; b < live.size(); ++b) {
            if (!used[b] && std::abs(f.probabilities[live[a]] - f.probabilities[live[b]]) < s.degeneracy_tol) {
                used[b] = true;
                block.push_back(live[b]);
            }
        }
        if (block.size() > 1) f.degenerate_blocks.push_back(std::move(block));
    }

    const FrameDefects defects = frame_defects(f);
    const double sum_tol = std::max(1e-9, 10.0 * family.trace_tol());
    if (defects.max_gram_offdiag > 1e-8 || defects.max_gram_diag > 1e-8 ||
        std::abs(defects.probability_sum - 1.0) > sum_tol || defects.unitarity > 1e-8) {
        std::ostringstream msg;
        msg << "canonical decomposition failed at theta=" << theta << " (Gram off-diagonal "
            << defects.max_gram_offdiag << ", weight sum " << defects.probability_sum << ")";
        throw NumericError(msg.str());
    }
    return f;
}

const Ket& pure_input(const ParamKrausFamily& family, const QuantumState& psi0) {
    if (!psi0.is_pure()) throw ValidationError("canonical decomposition needs a pure input state");
    if (psi0.dim() != family.dim()) {
        throw ValidationError("input state has dimension " + std::to_string(psi0.dim()) + ", family acts on " +
                              std::to_string(family.dim()));
    }
    return psi0.vector();
}

}  // namespace

FrameDefects frame_defects(const CanonicalFrame& frame) {
    FrameDefects out;
    const auto& e = frame.unnormalized_vectors;
    const std::size_t n = e.size();
    for (std::size_t j = 0; j < n; ++j) {
        out.probability_sum += frame.probabilities[j];
        for (std::size_t k = 0; k < n; ++k) {
            const cx w = inner(e[j], e[k]);
            if (j == k) {
                out.max_gram_diag = std::max(out.max_gram_diag, std::abs(w - frame.probabilities[k]));
            } else {
                out.max_gram_offdiag = std::max(out.max_gram_offdiag, std::abs(w));
            }
        }
        if (frame.normalized_vectors[j]) {
            const Ket& f = *frame.normalized_vectors[j];
            const double sp = std::sqrt(frame.probabilities[j]);
            double sq = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) sq += std::norm(e[j][i] - sp * f[i]);
            out.max_vector_mismatch = std::max(out.max_vector_mismatch, std::sqrt(sq));
        }
    }
    const auto& r = frame.remix_unitary;
    out.unitarity = frobenius_distance(r * dagger(r), ComplexMatrix::identity(r.rows()));
    return out;
}

CanonicalFrame canonical_decompose(const ParamKrausFamily& family, double theta, const QuantumState& psi0,
                                   const NumericSettings& settings) {
    const Ket& psi = pure_input(family, psi0);
    family.require_in_domain(theta);
    const Spectrum ref = reference_spectrum(family, theta, psi, settings);
    const ComplexMatrix du = remix_rate(family, theta, psi, ref.vectors, settings);
    return build_frame(family, theta, psi, ref.vectors, du, settings);
}

std::vector<CanonicalFrame> smooth_frame_curve(const ParamKrausFamily& family, std::span<const double> thetas,
                                               const QuantumState& psi0, const NumericSettings& settings) {
    const Ket& psi = pure_input(family, psi0);
    if (thetas.size() < 2) throw ValidationError("frame curve needs at least two grid points");
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        family.require_in_domain(thetas[i]);
        if (i > 0 && !(thetas[i] > thetas[i - 1])) throw ValidationError("frame curve grid must be strictly ascending");
    }
    std::vector<CanonicalFrame> frames;
    frames.reserve(thetas.size());
    ComplexMatrix u;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        u = i == 0 ? reference_spectrum(family, thetas[0], psi, settings).vectors
                   : settle_blocks(family, thetas[i], psi,
                                   align(raw_spectrum(family, thetas[i], psi, settings), u, thetas[i], settings).vectors,
                                   settings);
        const ComplexMatrix du = remix_rate(family, thetas[i], psi, u, settings);
        frames.push_back(build_frame(family, thetas[i], psi, u, du, settings));
    }
    return frames;
}

QuasiClassicalReport quasi_classical_check(const ParamKrausFamily& family, std::span<const double> thetas,
                                           const QuantumState& psi0, const NumericSettings& settings) {
    pure_input(family, psi0);
    if (thetas.size() < 2) throw ValidationError("quasi-classical check needs at least two grid points");
    QuasiClassicalReport rep;
    std::vector<ComplexMatrix> outputs;
    for (double theta : thetas) {
        const CanonicalFrame f = canonical_decompose(family, theta, psi0, settings);
        const std::size_t n = f.size();
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const cx m = inner(f.unnormalized_vectors[j], f.derivative_vectors[k]);
                if (j == k) {
                    rep.max_imag_mu = std::max(rep.max_imag_mu, std::abs(m.imag()));
                } else {
                    rep.max_offdiag_overlap = std::max(rep.max_offdiag_overlap, std::abs(m));
                }
            }
        }
        outputs.push_back(output_state(family, theta, psi0));
    }
    for (std::size_t i = 0; i < outputs.size(); ++i)
        for (std::size_t j = i + 1; j < outputs.size(); ++j)
            rep.max_commutator = std::max(rep.max_commutator, commutator_norm(outputs[i], outputs[j]));
    const double tol = settings.quasi_classical_tol;
    rep.is_quasi_classical = rep.max_commutator <= tol && rep.max_offdiag_overlap <= tol && rep.max_imag_mu <= tol;
    return rep;
}

EigenframePovm quasiclassical_optimal_povm(const CanonicalFrame& frame, const NumericSettings& settings) {
    const std::size_t d = frame.input.size();
    std::vector<Ket> basis;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < frame.size(); ++k) {
        if (!frame.normalized_vectors[k]) continue;
        // Re-orthonormalize against rounding so the effects pass validation.
        Ket v = *frame.normalized_vectors[k];
        for (const auto& b : basis) {
            const cx c = inner(b, v);
            for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
        }
        const double nv = norm(v);
        if (nv < 0.5) throw NumericError("eigenframe vectors are not orthogonal");
        for (auto& x : v) x /= nv;
        basis.push_back(std::move(v));
        labels.push_back("f" + std::to_string(k));
    }
    std::vector<ComplexMatrix> effects;
    ComplexMatrix rest = ComplexMatrix::identity(d);
    for (const auto& b : basis) {
        effects.push_back(ComplexMatrix::outer(b));
        rest -= effects.back();
    }
    if (trace(rest).real() > 0.5) {
        effects.push_back(cx(0.5) * (rest + dagger(rest)));
        labels.push_back("rest");
    }
    EigenframePovm out{Povm(std::move(effects), std::move(labels), settings), {}};
    for (const auto& block : frame.degenerate_blocks) {
        std::ostringstream msg;
        msg << "weights of directions";
        for (std::size_t k : block) msg << ' ' << k;
        msg << " coincide; the eigenframe inside that block is not unique";
        out.warnings.push_back(msg.str());
    }
    return out;
}

}  // namespace chanest
