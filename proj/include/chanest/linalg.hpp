#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace chanest {

using cx = std::complex<double>;

/// Column vector of complex amplitudes.
using Ket = std::vector<cx>;

/// Tolerances shared by the whole library. Every routine that needs a
/// threshold takes one of these, defaulting to `NumericSettings{}`.
struct NumericSettings {
    double hermitian_tol = 1e-10;       // relative, for ||a - a^dagger||_F
    double jacobi_rel_tol = 1e-13;      // off-diagonal norm / ||a||_F
    int jacobi_max_sweeps = 100;
    double psd_clamp = 1e-10;           // eigenvalues down to -psd_clamp are rounding noise
    double trace_tol = 1e-10;           // trace preservation of Kraus families
    double p_floor = 1e-12;             // canonical weights at or below this are null directions
    double eps_prob = 1e-12;            // outcome probability floor in Fisher sums
    double degeneracy_tol = 1e-9;       // eigenvalues closer than this form one block
    double match_ambiguity_tol = 1e-6;  // frame matching overlap margin
    double optimality_tol = 1e-8;       // optimality-condition residual verdict
    double quasi_classical_tol = 1e-8;
    double fd_step = 1e-6;              // relative step of the finite-difference derivative wrapper
    double domain_inset = 1e-6;
};

/// Dense complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cx> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<cx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static ComplexMatrix diagonal(std::span<const double> values);
    static ComplexMatrix diagonal(std::span<const cx> values);
    /// |v><v|
    static ComplexMatrix outer(std::span<const cx> v);
    /// |u><v|
    static ComplexMatrix outer(std::span<const cx> u, std::span<const cx> v);
    static ComplexMatrix from_columns(std::span<const Ket> columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    cx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const cx> entries() const noexcept { return data_; }
    std::span<cx> entries() noexcept { return data_; }

    Ket column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const cx> v);

    bool all_finite() const noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(cx s);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(cx s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cx s);
/// Same as matmul().
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

/// Throws ValidationError when a.cols() != b.rows().
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
Ket apply(const ComplexMatrix& a, std::span<const cx> v);
ComplexMatrix dagger(const ComplexMatrix& a);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
Ket kron(std::span<const cx> a, std::span<const cx> b);

cx trace(const ComplexMatrix& a);
double frobenius_norm(const ComplexMatrix& a);
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);
/// Frobenius inner product tr(a^dagger b).
cx frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b);
/// ||ab - ba||_F
double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b);
/// ||a - a^dagger||_F
double hermiticity_defect(const ComplexMatrix& a);

cx inner(std::span<const cx> a, std::span<const cx> b);  // <a|b>
double norm(std::span<const cx> v);

struct HermitianEigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // orthonormal columns

    ComplexMatrix reconstruct() const;
};

/// Cyclic complex Jacobi. The input is symmetrized before solving; inputs
/// further than hermitian_tol * (1 + ||a||_F) from Hermitian are rejected.
/// Each eigenvector has its largest-modulus entry made real and positive.
HermitianEigenDecomposition eig_hermitian(const ComplexMatrix& a,
                                          const NumericSettings& settings = {});

/// Principal square root of a positive semidefinite Hermitian matrix.
ComplexMatrix psd_sqrt(const ComplexMatrix& a, const NumericSettings& settings = {});

/// exp(g) for anti-Hermitian g, through the Hermitian matrix -i g.
ComplexMatrix expm_anti_hermitian(const ComplexMatrix& g, const NumericSettings& settings = {});

/// Rotates v by a global phase so that its largest-modulus entry is real and
/// positive. Ties (within 1e-9 relative) go to the lowest index.
void fix_phase(std::span<cx> v);

}  // namespace chanest
