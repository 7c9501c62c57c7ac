#include <cmath>

#include "chanest/builtins.hpp"
#include "chanest/channel.hpp"
#include "chanest/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chanest;
using chanest::testing::Gen;
using chanest::testing::linspace;

namespace {

struct Builtin {
    ParamKrausFamily family;
    QuantumState input;
    std::vector<double> grid;
};

std::vector<Builtin> all_builtins() {
    BuiltinParams damp;
    damp.n_max = 3;
    std::vector<Builtin> out;
    out.push_back({builtin("depolarizing"), QuantumState::basis(2, 0), linspace(0.02, 0.98, 20)});
    out.push_back({builtin("depolarizing-canonical"), QuantumState::basis(2, 0), linspace(0.02, 0.98, 20)});
    out.push_back({builtin("dephasing"), QuantumState::plus(), linspace(0.05, 3.0, 20)});
    out.push_back({builtin("damping", damp), QuantumState::basis(4, 2), linspace(0.05, 3.0, 20)});
    const auto rs = builtin("random-shift");
    out.push_back({rs, QuantumState::basis(rs.dim(), 0), linspace(0.1, 3.9, 20)});
    return out;
}

double min_eigenvalue(const ComplexMatrix& m) { return eig_hermitian(m).eigenvalues.front(); }

}  // namespace

TEST_CASE("builtins: trace preservation, positivity and derivative checks on a 20-point grid") {
    for (const auto& b : all_builtins()) {
        CAPTURE(b.family.label());
        const FamilyCheck chk = check_family(b.family, b.grid);
        CHECK(chk.max_trace_defect <= b.family.trace_tol());
        CHECK(chk.max_derivative_error <= 1e-5);
        for (double t : b.grid) {
            const ComplexMatrix rho = output_state(b.family, t, b.input);
            CHECK(hermiticity_defect(rho) < 1e-12);
            CHECK(std::abs(trace(rho) - 1.0) <= b.family.trace_tol() + 1e-12);
            CHECK(min_eigenvalue(rho) >= -1e-9);
            CHECK(std::abs(trace(output_derivative(b.family, t, b.input))) <= 1e-9);
        }
    }
}

TEST_CASE("output_derivative matches a central difference of output_state") {
    const double h = 1e-6;
    for (const auto& b : all_builtins()) {
        CAPTURE(b.family.label());
        for (double t : {b.grid[3], b.grid[10], b.grid[16]}) {
            const ComplexMatrix fd = cx(1.0 / (2 * h)) * (output_state(b.family, t + h, b.input) -
                                                          output_state(b.family, t - h, b.input));
            CHECK(frobenius_distance(fd, output_derivative(b.family, t, b.input)) <= 1e-5);
        }
    }
}

TEST_CASE("depolarizing output near the domain ends") {
    const auto dep = builtin("depolarizing");
    const auto zero = QuantumState::basis(2, 0);
    const std::vector<double> at_one{1.0 / 3.0, 2.0 / 3.0};
    CHECK(frobenius_distance(output_state(dep, 1.0 - 1e-12, zero), ComplexMatrix::diagonal(at_one)) < 1e-11);
    CHECK(frobenius_distance(output_state(dep, 1e-12, zero), zero.density()) < 1e-11);
    // Closed ends are outside the open domain.
    CHECK_THROWS_AS(output_state(dep, 0.0, zero), ValidationError);
    CHECK_THROWS_AS(output_state(dep, 1.0, zero), ValidationError);
}

TEST_CASE("depolarizing output equals the Pauli average at a general state") {
    const auto dep = builtin("depolarizing");
    Gen g(41);
    const auto psi = QuantumState::pure(g.unit_vector(2));
    const ComplexMatrix& r = psi.density();
    for (double p : {0.1, 0.6, 0.95}) {
        const ComplexMatrix ref = cx(1.0 - p) * r + cx(p / 3.0) * (pauli_x() * r * pauli_x() + pauli_y() * r * pauli_y() +
                                                                    pauli_z() * r * pauli_z());
        CHECK(frobenius_distance(output_state(dep, p, psi), ref) < 1e-14);
    }
}

TEST_CASE("dephasing output in the plus/minus basis") {
    const auto deph = builtin("dephasing");
    const Ket plus = QuantumState::plus().vector();
    const Ket minus = QuantumState::minus().vector();
    for (double t : {0.1, 0.5, 2.0}) {
        const ComplexMatrix rho = output_state(deph, t, QuantumState::plus());
        const ComplexMatrix drho = output_derivative(deph, t, QuantumState::plus());
        const double e = std::exp(-2 * t);
        CHECK(std::abs(inner(plus, chanest::apply(rho, plus)) - (1 + e) / 2) < 1e-15);
        CHECK(std::abs(inner(minus, chanest::apply(rho, minus)) - (1 - e) / 2) < 1e-15);
        CHECK(std::abs(inner(plus, chanest::apply(rho, minus))) < 1e-15);
        CHECK(std::abs(inner(plus, chanest::apply(drho, plus)) + e) < 1e-15);
        CHECK(std::abs(inner(minus, chanest::apply(drho, minus)) - e) < 1e-15);
    }
}

TEST_CASE("dephasing weights approach equal mixing") {
    const auto ops = builtin("dephasing").kraus_at(20.0);
    CHECK(std::abs(ops[0](0, 0) - std::sqrt(0.5)) < 1e-15);
    CHECK(std::abs(ops[1](0, 0) - std::sqrt(0.5)) < 1e-15);
}

TEST_CASE("damping with n_max = 3 is exactly trace preserving") {
    BuiltinParams bp;
    bp.n_max = 3;
    const auto dm = builtin("damping", bp);
    CHECK(dm.dim() == 4);
    CHECK(dm.n_kraus() == 4);
    CHECK(trace_preservation_defect(dm.kraus_at(0.5)) <= 1e-10);
}

TEST_CASE("damping photon-number statistics are binomial") {
    BuiltinParams bp;
    bp.n_max = 3;
    const auto dm = builtin("damping", bp);
    const double t = 0.7, eta = std::exp(-t);
    const ComplexMatrix rho = output_state(dm, t, QuantumState::basis(4, 3));
    const double binom[] = {1, 3, 3, 1};
    for (int m = 0; m <= 3; ++m) {
        const double ref = binom[m] * std::pow(eta, m) * std::pow(1 - eta, 3 - m);
        CHECK(std::abs(rho(m, m) - ref) < 1e-14);
    }
}

TEST_CASE("random-shift with d = 40 at theta = 1") {
    BuiltinParams bp;
    bp.dim = 40;
    const auto rs = builtin("random-shift", bp);
    CHECK(rs.dim() == 40);
    CHECK(trace_preservation_defect(rs.kraus_at(1.0)) <= 1e-12);
    // Outcome statistics are Poisson on the reachable positions.
    const ComplexMatrix rho = output_state(rs, 1.0, QuantumState::basis(40, 0));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(rho(k, k) - std::exp(-1.0) / std::tgamma(k + 1.0)) < 1e-15);
}

TEST_CASE("random-shift rejects a dimension that wraps around") {
    BuiltinParams bp;
    bp.dim = 5;
    CHECK_THROWS_AS(builtin("random-shift", bp), ValidationError);
}

TEST_CASE("poisson tail and cutoff") {
    CHECK(std::abs(poisson_tail(1.0, 0) - (1.0 - std::exp(-1.0))) < 1e-15);
    const std::size_t k = poisson_cutoff(2.0, 1e-12);
    CHECK(poisson_tail(2.0, k) < 1e-12);
    CHECK(poisson_tail(2.0, k - 1) >= 1e-12);
}

TEST_CASE("builtin errors") {
    CHECK_THROWS_AS(builtin("nonexistent"), ValidationError);
    CHECK_THROWS_AS(builtin("damping"), ValidationError);
    BuiltinParams zero;
    zero.n_max = 0;
    CHECK_THROWS_AS(builtin("damping", zero), ValidationError);
    BuiltinParams bad;
    bad.theta_max = -1.0;
    CHECK_THROWS_AS(builtin("random-shift", bad), ValidationError);
    CHECK(builtin_catalog().size() == 5);
}

TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(output_state(builtin("depolarizing"), 0.5, QuantumState::basis(3, 0)), ValidationError);
    CHECK_THROWS_AS(output_derivative(builtin("depolarizing"), 0.5, QuantumState::bell(0)), ValidationError);
}

TEST_CASE("constant unitary family has zero output derivative") {
    const auto fam = rotation_family("fixed", ComplexMatrix::zeros(2, 2));
    Gen g(42);
    const auto psi = QuantumState::pure(g.unit_vector(2));
    CHECK(frobenius_norm(output_derivative(fam, 0.4, psi)) == 0.0);
}

TEST_CASE("extend_identity") {
    const auto dep = builtin("depolarizing");
    const auto ext = extend_identity(dep);
    CHECK(ext.n_kraus() == dep.n_kraus());
    CHECK(ext.dim() == 4);
    for (double p : linspace(0.05, 0.95, 10)) CHECK(trace_preservation_defect(ext.kraus_at(p)) <= 1e-10);
    // Partial trace over the system gives back the maximally mixed reference.
    const ComplexMatrix rho = output_state(ext, 0.4, QuantumState::bell(0));
    CHECK(std::abs(rho(0, 0) + rho(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(rho(0, 0) - (1 - 0.4 * 2 / 3) / 2) < 1e-15);
}

TEST_CASE("tensor_square factorizes on product inputs") {
    const auto deph = builtin("dephasing");
    const auto sq = tensor_square(deph);
    CHECK(sq.n_kraus() == 4);
    CHECK(sq.dim() == 4);
    Gen g(43);
    for (double t : {0.2, 0.5, 1.0}) {
        CHECK(trace_preservation_defect(sq.kraus_at(t)) <= 1e-10);
        const Ket a = g.unit_vector(2), b = g.unit_vector(2);
        const ComplexMatrix prod = output_state(sq, t, QuantumState::pure(kron(a, b)));
        const ComplexMatrix ref =
            kron(output_state(deph, t, QuantumState::pure(a)), output_state(deph, t, QuantumState::pure(b)));
        CHECK(frobenius_distance(prod, ref) <= 1e-12);
    }
    const FamilyCheck chk = check_family(sq, linspace(0.1, 2.0, 10));
    CHECK(chk.max_derivative_error <= 1e-5);
}

TEST_CASE("finite-difference derivative wrapper") {
    const ComplexMatrix h = cx(0.5) * pauli_z();
    KrausFunction kraus = [h](double t) { return KrausSet{expm_anti_hermitian(cx(0.0, -t) * h)}; };
    const auto fd = ParamKrausFamily::from_closure("rot-fd", 2, 1, ThetaDomain{}, kraus);
    const auto exact = rotation_family("rot", h);
    for (double t : {-3.0, 0.0, 0.7, 40.0}) {
        CHECK(frobenius_distance(fd.kraus_deriv_at(t)[0], exact.kraus_deriv_at(t)[0]) < 1e-8);
    }
    // One-sided near a finite end.
    const auto bounded = ParamKrausFamily::from_closure("rot-fd", 2, 1, ThetaDomain{0.0, 1.0}, kraus);
    CHECK(frobenius_distance(bounded.kraus_deriv_at(1e-8)[0], exact.kraus_deriv_at(1e-8)[0]) < 1e-5);
}

TEST_CASE("family validation") {
    CHECK_THROWS_AS(builtin("dephasing").kraus_at(-1.0), ValidationError);
    KrausFunction wrong = [](double) { return KrausSet{ComplexMatrix::identity(2), ComplexMatrix::identity(2)}; };
    const auto fam = ParamKrausFamily::from_closure("bad", 2, 1, ThetaDomain{}, wrong);
    CHECK_THROWS_AS(fam.kraus_at(0.0), NumericError);
}
