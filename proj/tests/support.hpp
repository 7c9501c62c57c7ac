#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "chanest/linalg.hpp"
#include "chanest/povm.hpp"

namespace chanest::testing {

/// Seeded source of random matrices, states and POVMs for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double normal() { return normal_(rng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    cx complex_normal() { return {normal(), normal()}; }

    ComplexMatrix matrix(std::size_t rows, std::size_t cols) {
        ComplexMatrix m(rows, cols);
        for (cx& x : m.entries()) x = complex_normal();
        return m;
    }

    ComplexMatrix hermitian(std::size_t n) {
        const ComplexMatrix a = matrix(n, n);
        return cx(0.5) * (a + dagger(a));
    }

    ComplexMatrix anti_hermitian(std::size_t n, double scale = 1.0) {
        const ComplexMatrix a = matrix(n, n);
        return cx(0.5 * scale) * (a - dagger(a));
    }

    ComplexMatrix psd(std::size_t n) {
        const ComplexMatrix a = matrix(n, n);
        return a * dagger(a);
    }

    /// Gram-Schmidt on a Gaussian matrix.
    ComplexMatrix unitary(std::size_t n) {
        std::vector<Ket> cols;
        while (cols.size() < n) {
            Ket v(n);
            for (cx& x : v) x = complex_normal();
            for (const Ket& c : cols) {
                const cx o = inner(c, v);
                for (std::size_t i = 0; i < n; ++i) v[i] -= o * c[i];
            }
            const double nv = norm(v);
            if (nv < 1e-8) continue;
            for (cx& x : v) x /= nv;
            cols.push_back(v);
        }
        return ComplexMatrix::from_columns(cols);
    }

    Ket unit_vector(std::size_t n) {
        Ket v(n);
        for (cx& x : v) x = complex_normal();
        const double nv = norm(v);
        for (cx& x : v) x /= nv;
        return v;
    }

    /// m rank-one effects |v_i><v_i| from the rows of an isometry V (m x d):
    /// V = G (G^dagger G)^{-1/2}.
    Povm rank_one_povm(std::size_t d, std::size_t m) {
        const ComplexMatrix g = matrix(m, d);
        const auto eig = eig_hermitian(dagger(g) * g);
        std::vector<double> inv_sqrt;
        for (double l : eig.eigenvalues) inv_sqrt.push_back(1.0 / std::sqrt(l));
        const ComplexMatrix v =
            g * (eig.eigenvectors * ComplexMatrix::diagonal(inv_sqrt) * dagger(eig.eigenvectors));
        std::vector<ComplexMatrix> effects;
        for (std::size_t i = 0; i < m; ++i) {
            Ket row(d);
            for (std::size_t j = 0; j < d; ++j) row[j] = std::conj(v(i, j));
            effects.push_back(ComplexMatrix::outer(row));
        }
        return Povm(std::move(effects));
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
    return out;
}

/// Textbook triple loop.
inline ComplexMatrix naive_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            for (std::size_t k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace chanest::testing
