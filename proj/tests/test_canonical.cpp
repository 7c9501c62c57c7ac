#include <algorithm>
#include <cmath>
#include <numbers>

#include "chanest/builtins.hpp"
#include "chanest/canonical.hpp"
#include "chanest/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chanest;
using chanest::testing::Gen;
using chanest::testing::linspace;

namespace {

struct Case {
    ParamKrausFamily family;
    QuantumState input;
    std::vector<double> grid;
};

std::vector<Case> quasi_classical_cases() {
    BuiltinParams d1, d3;
    d1.n_max = 1;
    d3.n_max = 3;
    std::vector<Case> out;
    out.push_back({builtin("depolarizing"), QuantumState::basis(2, 0), linspace(0.05, 0.95, 12)});
    out.push_back({builtin("depolarizing-canonical"), QuantumState::basis(2, 0), linspace(0.05, 0.95, 12)});
    out.push_back({extend_identity(builtin("depolarizing")), QuantumState::bell(0), linspace(0.05, 0.95, 12)});
    out.push_back({builtin("dephasing"), QuantumState::plus(), linspace(0.1, 2.0, 12)});
    out.push_back({builtin("damping", d1), QuantumState::basis(2, 1), linspace(0.1, 2.0, 12)});
    out.push_back({builtin("damping", d3), QuantumState::basis(4, 3), linspace(0.1, 2.0, 12)});
    const auto rs = builtin("random-shift");
    out.push_back({rs, QuantumState::basis(rs.dim(), 0), linspace(0.3, 3.0, 12)});
    return out;
}

/// |<a,b>_F| / (|a| |b|): one exactly when a and b agree up to a phase.
double phase_alignment(const ComplexMatrix& a, const ComplexMatrix& b) {
    return std::abs(frobenius_inner(a, b)) / (frobenius_norm(a) * frobenius_norm(b));
}

/// Distance of m from the span of two matrices (Frobenius least squares).
double distance_to_span(const ComplexMatrix& m, const ComplexMatrix& a, const ComplexMatrix& b) {
    const cx gaa = frobenius_inner(a, a), gab = frobenius_inner(a, b), gbb = frobenius_inner(b, b);
    const cx ra = frobenius_inner(a, m), rb = frobenius_inner(b, m);
    const cx det = gaa * gbb - gab * std::conj(gab);
    const cx ca = (gbb * ra - gab * rb) / det;
    const cx cb = (gaa * rb - std::conj(gab) * ra) / det;
    return frobenius_distance(m, ca * a + cb * b);
}

ParamKrausFamily rotating_remix() {
    // Fixed channel whose Kraus operators are remixed by a real rotation of angle theta.
    const ComplexMatrix b1 = cx(std::sqrt(0.7)) * ComplexMatrix::identity(2);
    const ComplexMatrix b2 = cx(std::sqrt(0.3)) * pauli_x();
    KrausFunction kraus = [=](double t) {
        return KrausSet{cx(std::cos(t)) * b1 + cx(std::sin(t)) * b2, cx(-std::sin(t)) * b1 + cx(std::cos(t)) * b2};
    };
    KrausFunction deriv = [=](double t) {
        return KrausSet{cx(-std::sin(t)) * b1 + cx(std::cos(t)) * b2, cx(-std::cos(t)) * b1 + cx(-std::sin(t)) * b2};
    };
    return {"rotating-remix", 2, 2, ThetaDomain{-10.0, 10.0}, kraus, deriv};
}

}  // namespace

TEST_CASE("frame invariants hold for every builtin on its grid") {
    for (const auto& c : quasi_classical_cases()) {
        CAPTURE(c.family.label());
        for (double t : c.grid) {
            CAPTURE(t);
            const CanonicalFrame f = canonical_decompose(c.family, t, c.input);
            const FrameDefects d = frame_defects(f);
            CHECK(d.max_gram_offdiag <= 1e-9);
            CHECK(d.max_gram_diag <= 1e-10);
            CHECK(std::abs(d.probability_sum - 1.0) <= 1e-9);
            CHECK(d.max_vector_mismatch <= 1e-9);
            CHECK(d.unitarity <= 1e-10);
            for (std::size_t k = 1; k < f.size(); ++k) CHECK(f.probabilities[k - 1] >= f.probabilities[k] - 1e-9);
        }
    }
}

TEST_CASE("canonical operators reproduce the channel") {
    Gen g(51);
    for (const auto& c : quasi_classical_cases()) {
        CAPTURE(c.family.label());
        for (double t : {c.grid[2], c.grid[9]}) {
            const CanonicalFrame f = canonical_decompose(c.family, t, c.input);
            CHECK(frobenius_distance(apply_kraus(f.kraus_ops, c.input.density()),
                                     output_state(c.family, t, c.input)) <= 1e-10);
            // A unitary remix preserves the channel on every input, not only psi0.
            const auto other = QuantumState::pure(g.unit_vector(c.family.dim()));
            CHECK(frobenius_distance(apply_kraus(f.kraus_ops, other.density()),
                                     output_state(c.family, t, other)) <= 1e-10);
        }
    }
}

TEST_CASE("quasi-classical frames: output spectrum equals the weights and mu is real") {
    for (const auto& c : quasi_classical_cases()) {
        CAPTURE(c.family.label());
        for (double t : {c.grid[1], c.grid[6], c.grid[10]}) {
            const CanonicalFrame f = canonical_decompose(c.family, t, c.input);
            std::vector<double> spectrum = eig_hermitian(output_state(c.family, t, c.input)).eigenvalues;
            std::vector<double> weights = f.probabilities;
            // Pad the shorter list with zeros and compare sorted.
            const std::size_t n = std::max(spectrum.size(), weights.size());
            spectrum.resize(n, 0.0);
            weights.resize(n, 0.0);
            std::sort(spectrum.begin(), spectrum.end());
            std::sort(weights.begin(), weights.end());
            CHECK(chanest::testing::max_abs_diff(spectrum, weights) <= 1e-9);
            for (std::size_t k = 0; k < f.size(); ++k) {
                CHECK(std::abs(inner(f.unnormalized_vectors[k], f.derivative_vectors[k]).imag()) <= 1e-8);
            }
        }
    }
}

TEST_CASE("canonical depolarizing frame at |0> matches the known operator list") {
    const auto dep = builtin("depolarizing");
    const auto known = builtin("depolarizing-canonical");
    for (double p : {0.1, 0.3, 0.5, 0.9}) {
        CAPTURE(p);
        const CanonicalFrame f = canonical_decompose(dep, p, QuantumState::basis(2, 0));
        const KrausSet ref = known.kraus_at(p);
        // Weights of the known operators at |0>, and of the Gram eigenbasis.
        CHECK(std::abs(f.probabilities[0] - std::max(1 - 2 * p / 3, 2 * p / 3)) < 1e-14);
        CHECK(std::abs(f.probabilities[1] - std::min(1 - 2 * p / 3, 2 * p / 3)) < 1e-14);
        CHECK(std::abs(f.probabilities[2]) < 1e-14);
        CHECK(std::abs(f.probabilities[3]) < 1e-14);
        const Ket zero{1.0, 0.0};
        CHECK(std::abs(norm(chanest::apply(ref[0], zero)) - std::sqrt(2 * p / 3)) < 1e-14);
        CHECK(std::abs(norm(chanest::apply(ref[1], zero)) - std::sqrt(1 - 2 * p / 3)) < 1e-14);
        CHECK(norm(chanest::apply(ref[2], zero)) < 1e-14);
        CHECK(norm(chanest::apply(ref[3], zero)) < 1e-14);

        // Retained operators agree up to phase; null ones span the same plane.
        const std::size_t big = p < 0.75 ? 0 : 1;
        CHECK(phase_alignment(f.kraus_ops[1 - big], ref[0]) > 1 - 1e-12);
        CHECK(phase_alignment(f.kraus_ops[big], ref[1]) > 1 - 1e-12);
        CHECK(distance_to_span(ref[2], f.kraus_ops[2], f.kraus_ops[3]) < 1e-12);
        CHECK(distance_to_span(ref[3], f.kraus_ops[2], f.kraus_ops[3]) < 1e-12);
    }
}

TEST_CASE("known depolarizing operator list is the same channel") {
    Gen g(52);
    const auto dep = builtin("depolarizing");
    const auto known = builtin("depolarizing-canonical");
    for (double p : {0.2, 0.7}) {
        const auto psi = QuantumState::pure(g.unit_vector(2));
        CHECK(frobenius_distance(output_state(dep, p, psi), output_state(known, p, psi)) < 1e-14);
    }
}

TEST_CASE("identity-extended depolarizing on a Bell input matches the known operators") {
    const auto ext = extend_identity(builtin("depolarizing"));
    const ComplexMatrix i2 = ComplexMatrix::identity(2);
    for (double p : {0.2, 0.5, 0.8}) {
        CAPTURE(p);
        const CanonicalFrame f = canonical_decompose(ext, p, QuantumState::bell(0));
        const KrausSet ref{cx(std::sqrt(1 - p)) * kron(i2, i2), cx(std::sqrt(p / 3)) * kron(i2, pauli_x()),
                           cx(std::sqrt(p / 3)) * kron(i2, pauli_y()), cx(std::sqrt(p / 3)) * kron(i2, pauli_z())};
        std::vector<bool> used(4, false);
        for (const auto& r : ref) {
            bool found = false;
            for (std::size_t k = 0; k < 4 && !found; ++k) {
                if (!used[k] && phase_alignment(f.kraus_ops[k], r) > 1 - 1e-12 &&
                    std::abs(frobenius_norm(f.kraus_ops[k]) - frobenius_norm(r)) < 1e-12) {
                    used[k] = found = true;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("dephasing with |+> is already canonical") {
    const auto deph = builtin("dephasing");
    for (double t : {0.1, 0.5, 3.0}) {
        const CanonicalFrame f = canonical_decompose(deph, t, QuantumState::plus());
        CHECK(frobenius_distance(f.remix_unitary, ComplexMatrix::identity(2)) < 1e-12);
        CHECK(frobenius_norm(f.remix_derivative) < 1e-12);
    }
}

TEST_CASE("depolarizing-canonical needs no remix rate") {
    const auto known = builtin("depolarizing-canonical");
    for (double p : {0.1, 0.4, 0.9}) {
        const CanonicalFrame f = canonical_decompose(known, p, QuantumState::basis(2, 0));
        CHECK(frobenius_norm(f.remix_derivative) < 1e-9);
    }
    const auto curve = smooth_frame_curve(known, linspace(0.05, 0.7, 15), QuantumState::basis(2, 0));
    for (const auto& f : curve) CHECK(frobenius_norm(f.remix_derivative) < 1e-9);
}

TEST_CASE("remix derivative matches a difference of the remix unitary") {
    BuiltinParams bp;
    bp.n_max = 2;
    const auto dm = builtin("damping", bp);
    const auto in = QuantumState::basis(3, 2);
    const double h = 1e-5;
    const auto curve = smooth_frame_curve(dm, std::vector<double>{0.6 - h, 0.6, 0.6 + h}, in);
    const ComplexMatrix fd = cx(1.0 / (2 * h)) * (curve[2].remix_unitary - curve[0].remix_unitary);
    CHECK(frobenius_distance(fd, curve[1].remix_derivative) < 1e-7);
}

TEST_CASE("smooth_frame_curve: dephasing eigenvectors stay fixed") {
    const auto curve = smooth_frame_curve(builtin("dephasing"), linspace(0.1, 3.0, 30), QuantumState::plus());
    for (const auto& f : curve) {
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(std::abs(inner(*curve.front().normalized_vectors[k], *f.normalized_vectors[k]) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("smooth_frame_curve: successive overlaps have positive real part") {
    for (const auto& c : quasi_classical_cases()) {
        CAPTURE(c.family.label());
        const auto curve = smooth_frame_curve(c.family, linspace(c.grid.front(), c.grid.back(), 40), c.input);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(frobenius_distance(curve[i].remix_unitary, curve[i - 1].remix_unitary) < 0.5);
            for (std::size_t k = 0; k < curve[i].size(); ++k) {
                const auto& a = curve[i - 1].normalized_vectors[k];
                const auto& b = curve[i].normalized_vectors[k];
                if (a && b) CHECK(inner(*a, *b).real() > 0.9);
            }
        }
    }
}

TEST_CASE("smooth_frame_curve: grid validation") {
    const auto deph = builtin("dephasing");
    CHECK_THROWS_AS(smooth_frame_curve(deph, std::vector<double>{0.5}, QuantumState::plus()), ValidationError);
    CHECK_THROWS_AS(smooth_frame_curve(deph, std::vector<double>{0.5, 0.4}, QuantumState::plus()), ValidationError);
    CHECK_THROWS_AS(smooth_frame_curve(deph, std::vector<double>{-0.5, 0.4}, QuantumState::plus()), ValidationError);
}

TEST_CASE("smooth_frame_curve: a 45-degree jump is ambiguous") {
    const auto fam = rotating_remix();
    const auto in = QuantumState::basis(2, 0);
    CHECK_NOTHROW(smooth_frame_curve(fam, linspace(0.0, 0.3, 10), in));
    CHECK_THROWS_AS(smooth_frame_curve(fam, std::vector<double>{0.0, std::numbers::pi / 4}, in), DegeneracyError);
}

TEST_CASE("canonical_decompose input validation") {
    const auto dep = builtin("depolarizing");
    const std::vector<double> w{0.5, 0.5};
    const std::vector<Ket> s{Ket{1.0, 0.0}, Ket{0.0, 1.0}};
    CHECK_THROWS_AS(canonical_decompose(dep, 0.3, QuantumState::mixture(w, s)), ValidationError);
    CHECK_THROWS_AS(canonical_decompose(dep, 0.3, QuantumState::bell(0)), ValidationError);
    CHECK_THROWS_AS(canonical_decompose(dep, 1.3, QuantumState::basis(2, 0)), ValidationError);
}

TEST_CASE("quasi_classical_check") {
    const auto grid = linspace(0.1, 0.9, 9);
    CHECK(quasi_classical_check(builtin("depolarizing"), grid, QuantumState::basis(2, 0)).is_quasi_classical);
    CHECK(quasi_classical_check(builtin("dephasing"), grid, QuantumState::plus()).is_quasi_classical);
    BuiltinParams bp;
    bp.n_max = 2;
    CHECK(quasi_classical_check(builtin("damping", bp), grid, QuantumState::basis(3, 2)).is_quasi_classical);

    const auto rot = rotation_family("phase", cx(0.5) * pauli_z());
    const auto rep = quasi_classical_check(rot, std::vector<double>{0.3, 0.9}, QuantumState::plus());
    CHECK_FALSE(rep.is_quasi_classical);
    CHECK(rep.max_commutator > 0.1);
    // Two-point oracle: the outputs at 0.3 and 0.9 do not commute.
    const ComplexMatrix a = output_state(rot, 0.3, QuantumState::plus());
    const ComplexMatrix b = output_state(rot, 0.9, QuantumState::plus());
    CHECK(std::abs(rep.max_commutator - commutator_norm(a, b)) < 1e-12);

    // Dephasing on |0> leaves the state alone: trivially quasi-classical.
    CHECK(quasi_classical_check(builtin("dephasing"), grid, QuantumState::basis(2, 0)).is_quasi_classical);
}

TEST_CASE("eigenframe POVM") {
    const auto fd = canonical_decompose(builtin("dephasing"), 0.7, QuantumState::plus());
    const auto pd = quasiclassical_optimal_povm(fd);
    REQUIRE(pd.povm.size() == 2);
    CHECK(frobenius_distance(pd.povm.effects()[0], QuantumState::plus().density()) < 1e-12);
    CHECK(frobenius_distance(pd.povm.effects()[1], QuantumState::minus().density()) < 1e-12);
    CHECK(pd.warnings.empty());

    const auto fz = canonical_decompose(builtin("depolarizing"), 0.3, QuantumState::basis(2, 0));
    const auto pz = quasiclassical_optimal_povm(fz);
    REQUIRE(pz.povm.size() == 2);
    CHECK(frobenius_distance(pz.povm.effects()[0], QuantumState::basis(2, 0).density()) < 1e-12);
    CHECK(frobenius_distance(pz.povm.effects()[1], QuantumState::basis(2, 1).density()) < 1e-12);
    CHECK(pz.povm.completeness_defect() <= 1e-10);
}

TEST_CASE("eigenframe POVM adds the complement when the frame does not span") {
    BuiltinParams bp;
    bp.n_max = 3;
    const auto f = canonical_decompose(builtin("damping", bp), 0.5, QuantumState::basis(4, 1));
    const auto p = quasiclassical_optimal_povm(f);
    CHECK(p.povm.size() == 3);
    CHECK(p.povm.labels().back() == "rest");
    CHECK(std::abs(trace(p.povm.effects().back()) - 2.0) < 1e-12);
    CHECK(p.povm.completeness_defect() <= 1e-10);
}

TEST_CASE("eigenframe POVM warns on equal weights") {
    // At p = 3/4 both retained depolarizing weights are 1/2.
    const auto f = canonical_decompose(builtin("depolarizing"), 0.75, QuantumState::basis(2, 0));
    const auto p = quasiclassical_optimal_povm(f);
    CHECK_FALSE(p.warnings.empty());
    CHECK(p.povm.completeness_defect() <= 1e-10);
}
