#include "chanest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chanest/errors.hpp"

namespace chanest {

namespace {

std::string dims(const ComplexMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError(std::string(op) + ": dimension mismatch " + dims(a) + " vs " + dims(b));
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("ComplexMatrix: " + std::to_string(data_.size()) +
                              " entries for shape " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw ValidationError("ComplexMatrix: ragged initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cx> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const cx> v) { return outer(v, v); }

ComplexMatrix ComplexMatrix::outer(std::span<const cx> u, std::span<const cx> v) {
    ComplexMatrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
}

ComplexMatrix ComplexMatrix::from_columns(std::span<const Ket> columns) {
    if (columns.empty()) return {};
    const std::size_t n = columns.front().size();
    ComplexMatrix m(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n) throw ValidationError("from_columns: ragged columns");
        m.set_column(c, columns[c]);
    }
    return m;
}

Ket ComplexMatrix::column(std::size_t c) const {
    Ket v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void ComplexMatrix::set_column(std::size_t c, std::span<const cx> v) {
    if (v.size() != rows_) throw ValidationError("set_column: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

bool ComplexMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const cx& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cx s) {
    for (auto& z : data_) z *= s;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, cx s) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ValidationError("matmul: dimension mismatch " + dims(a) + " * " + dims(b));
    }
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cx aik = a(i, k);
            if (aik == cx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Ket apply(const ComplexMatrix& a, std::span<const cx> v) {
    if (a.cols() != v.size()) {
        throw ValidationError("apply: matrix " + dims(a) + " on vector of length " +
                              std::to_string(v.size()));
    }
    Ket out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cx acc{};
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

ComplexMatrix dagger(const ComplexMatrix& a) {
    ComplexMatrix d(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) d(j, i) = std::conj(a(i, j));
    return d;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cx aij = a(i, j);
            if (aij == cx{}) continue;
            for (std::size_t r = 0; r < b.rows(); ++r)
                for (std::size_t c = 0; c < b.cols(); ++c)
                    k(i * b.rows() + r, j * b.cols() + c) = aij * b(r, c);
        }
    return k;
}

Ket kron(std::span<const cx> a, std::span<const cx> b) {
    Ket out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

cx trace(const ComplexMatrix& a) {
    if (!a.is_square()) throw ValidationError("trace: non-square matrix " + dims(a));
    cx t{};
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

double frobenius_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (const cx& z : a.entries()) s += std::norm(z);
    return std::sqrt(s);
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "frobenius_distance");
    double s = 0.0;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) s += std::norm(ea[i] - eb[i]);
    return std::sqrt(s);
}

cx frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "frobenius_inner");
    cx s{};
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) s += std::conj(ea[i]) * eb[i];
    return s;
}

double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.is_square() || !b.is_square() || a.rows() != b.rows()) {
        throw ValidationError("commutator_norm: need equal square shapes, got " + dims(a) +
                              " and " + dims(b));
    }
    return frobenius_distance(matmul(a, b), matmul(b, a));
}

double hermiticity_defect(const ComplexMatrix& a) {
    if (!a.is_square()) throw ValidationError("hermiticity_defect: non-square matrix " + dims(a));
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j) - std::conj(a(j, i)));
    return std::sqrt(s);
}

cx inner(std::span<const cx> a, std::span<const cx> b) {
    if (a.size() != b.size()) throw ValidationError("inner: length mismatch");
    cx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(std::span<const cx> v) {
    double s = 0.0;
    for (const cx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

void fix_phase(std::span<cx> v) {
    double best = 0.0;
    for (const cx& z : v) best = std::max(best, std::abs(z));
    if (best == 0.0) return;
    for (cx& z : v) {
        if (std::abs(z) >= best * (1.0 - 1e-9)) {
            const cx phase = std::conj(z) / std::abs(z);
            for (cx& w : v) w *= phase;
            return;
        }
    }
}

ComplexMatrix HermitianEigenDecomposition::reconstruct() const {
    const std::size_t n = eigenvalues.size();
    ComplexMatrix scaled = eigenvectors;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= eigenvalues[c];
    return matmul(scaled, dagger(eigenvectors));
}

HermitianEigenDecomposition eig_hermitian(const ComplexMatrix& input,
                                          const NumericSettings& settings) {
    if (!input.is_square()) throw ValidationError("eig_hermitian: non-square matrix " + dims(input));
    if (!input.all_finite()) throw ValidationError("eig_hermitian: non-finite entries");
    const double scale = frobenius_norm(input);
    if (hermiticity_defect(input) > settings.hermitian_tol * (1.0 + scale)) {
        throw ValidationError("eig_hermitian: matrix is not Hermitian (defect " +
                              std::to_string(hermiticity_defect(input)) + ")");
    }

    const std::size_t n = input.rows();
    ComplexMatrix a = 0.5 * (input + dagger(input));
    ComplexMatrix v = ComplexMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    // Sweeps continue past the tolerance until every remaining off-diagonal
    // element is negligible against both of its diagonal entries, which
    // leaves eigenvectors accurate to rounding.
    const double target = settings.jacobi_rel_tol * scale;
    int sweep = 0;
    bool rotated = true;
    while (rotated && off_norm() > 0.0) {
        if (++sweep > settings.jacobi_max_sweeps) {
            if (off_norm() <= target) break;
            throw NumericError("eig_hermitian: Jacobi iteration did not converge in " +
                               std::to_string(settings.jacobi_max_sweeps) + " sweeps");
        }
        rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const double app = std::abs(a(p, p).real());
                const double aqq = std::abs(a(q, q).real());
                if (app + 100.0 * mag == app && aqq + 100.0 * mag == aqq) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                rotated = true;
                // Phase the (p,q) element real, then apply the real symmetric rotation.
                const cx phase = apq / mag;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // Rotation U on the (p,q) plane: U_pp = c, U_pq = s, U_qp = -s conj(phase), U_qq = c conj(phase).
                const cx upp = c;
                const cx upq = s;
                const cx uqp = -s * std::conj(phase);
                const cx uqq = c * std::conj(phase);
                for (std::size_t k = 0; k < n; ++k) {  // a <- a U
                    const cx akp = a(k, p);
                    const cx akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // a <- U^dagger a
                    const cx apk = a(p, k);
                    const cx aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {  // v <- v U
                    const cx vkp = v(k, p);
                    const cx vkq = v(k, q);
                    v(k, p) = vkp * upp + vkq * uqp;
                    v(k, q) = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    HermitianEigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.eigenvalues[c] = a(order[c], order[c]).real();
        Ket col = v.column(order[c]);
        fix_phase(col);
        out.eigenvectors.set_column(c, col);
    }
    return out;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& a, const NumericSettings& settings) {
    auto eig = eig_hermitian(a, settings);
    for (double& lambda : eig.eigenvalues) {
        if (lambda < -settings.psd_clamp) {
            throw ValidationError("psd_sqrt: matrix is not PSD (eigenvalue " + std::to_string(lambda) + ")");
        }
        lambda = std::sqrt(std::max(lambda, 0.0));
    }
    return eig.reconstruct();
}

ComplexMatrix expm_anti_hermitian(const ComplexMatrix& g, const NumericSettings& settings) {
    if (!g.is_square()) throw ValidationError("expm_anti_hermitian: non-square matrix " + dims(g));
    const double scale = frobenius_norm(g);
    if (frobenius_norm(g + dagger(g)) > settings.hermitian_tol * (1.0 + scale)) {
        throw ValidationError("expm_anti_hermitian: generator is not anti-Hermitian");
    }
    const ComplexMatrix h = cx{0.0, -1.0} * g;  // Hermitian
    const auto eig = eig_hermitian(h, settings);
    const std::size_t n = g.rows();
    ComplexMatrix scaled = eig.eigenvectors;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= std::polar(1.0, eig.eigenvalues[c]);
    return matmul(scaled, dagger(eig.eigenvectors));
}

}  // namespace chanest
