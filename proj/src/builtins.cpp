#include "chanest/builtins.hpp"

#include <cmath>
#include <limits>

#include "chanest/errors.hpp"

namespace chanest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cx kI{0.0, 1.0};

ParamKrausFamily depolarizing() {
    const ComplexMatrix id = ComplexMatrix::identity(2);
    const ComplexMatrix x = pauli_x(), y = pauli_y(), z = pauli_z();
    KrausFunction kraus = [=](double p) {
        const double a = std::sqrt(1.0 - p);
        const double b = std::sqrt(p / 3.0);
        return KrausSet{a * id, b * x, b * y, b * z};
    };
    KrausFunction deriv = [=](double p) {
        const double da = -0.5 / std::sqrt(1.0 - p);
        const double db = 0.5 / std::sqrt(3.0 * p);
        return KrausSet{da * id, db * x, db * y, db * z};
    };
    return {"depolarizing", 2, 4, ThetaDomain{0.0, 1.0}, std::move(kraus), std::move(deriv)};
}

// Canonical decomposition of the depolarizing channel relative to |0>.
ParamKrausFamily depolarizing_canonical() {
    const ComplexMatrix id = ComplexMatrix::identity(2);
    const ComplexMatrix x = pauli_x(), y = pauli_y(), z = pauli_z();
    const ComplexMatrix ix_y = kI * x + y;
    const ComplexMatrix x_iy = x + kI * y;
    const ComplexMatrix z_id = z - id;
    KrausFunction kraus = [=](double p) {
        const double q = 1.0 - p;
        const double s = q + p / 3.0;
        const double r = std::sqrt(p / 6.0);
        const double a = std::sqrt(q * p / (3.0 * s));
        return KrausSet{r * ix_y, (1.0 / std::sqrt(s)) * (q * id + (p / 3.0) * z), r * x_iy, a * z_id};
    };
    KrausFunction deriv = [=](double p) {
        const double q = 1.0 - p;
        const double s = q + p / 3.0;
        const double dr = 0.5 / std::sqrt(6.0 * p);
        const ComplexMatrix n = q * id + (p / 3.0) * z;
        const ComplexMatrix dn = (1.0 / 3.0) * z - id;
        const ComplexMatrix d2 = (1.0 / std::sqrt(s)) * dn + (1.0 / (3.0 * s * std::sqrt(s))) * n;
        const double g = q * p / (3.0 * s);
        const double dg = ((1.0 - 2.0 * p) * s / 3.0 + 2.0 * q * p / 9.0) / (s * s);
        const double da = dg / (2.0 * std::sqrt(g));
        return KrausSet{dr * ix_y, d2, dr * x_iy, da * z_id};
    };
    return {"depolarizing-canonical", 2, 4, ThetaDomain{0.0, 1.0}, std::move(kraus), std::move(deriv)};
}

ParamKrausFamily dephasing() {
    const ComplexMatrix id = ComplexMatrix::identity(2);
    const ComplexMatrix z = pauli_z();
    KrausFunction kraus = [=](double theta) {
        const double x = std::exp(-2.0 * theta);
        return KrausSet{std::sqrt(0.5 * (1.0 + x)) * id, std::sqrt(0.5 * (1.0 - x)) * z};
    };
    KrausFunction deriv = [=](double theta) {
        const double x = std::exp(-2.0 * theta);
        const double pp = 0.5 * (1.0 + x);
        const double pm = 0.5 * (1.0 - x);
        return KrausSet{(-x / (2.0 * std::sqrt(pp))) * id, (x / (2.0 * std::sqrt(pm))) * z};
    };
    return {"dephasing", 2, 2, ThetaDomain{0.0, kInf}, std::move(kraus), std::move(deriv)};
}

ParamKrausFamily random_shift(const BuiltinParams& params) {
    if (!(params.theta_max > 0.0) || !std::isfinite(params.theta_max)) {
        throw ValidationError("random-shift: theta_max must be positive and finite");
    }
    if (!(params.tail_tol > 0.0)) throw ValidationError("random-shift: tail_tol must be positive");
    const std::size_t k_max = poisson_cutoff(params.theta_max, params.tail_tol);
    const std::size_t d = params.dim.value_or(k_max + 2);
    if (d < k_max + 2) {
        throw ValidationError("random-shift: dimension " + std::to_string(d) + " < k_max + 2 = " +
                              std::to_string(k_max + 2) + " (shifts would wrap around)");
    }
    ComplexMatrix shift(d, d);
    for (std::size_t x = 0; x < d; ++x) shift((x + 1) % d, x) = 1.0;
    std::vector<ComplexMatrix> powers{ComplexMatrix::identity(d)};
    for (std::size_t k = 1; k <= k_max; ++k) powers.push_back(matmul(shift, powers.back()));

    auto amplitude = [](double theta, std::size_t k) {
        // sqrt(e^{-theta} theta^k / k!)
        const double log_p = -theta + static_cast<double>(k) * std::log(theta) - std::lgamma(k + 1.0);
        return std::exp(0.5 * log_p);
    };
    KrausFunction kraus = [=](double theta) {
        KrausSet ops;
        ops.reserve(powers.size());
        for (std::size_t k = 0; k < powers.size(); ++k) ops.push_back(amplitude(theta, k) * powers[k]);
        return ops;
    };
    KrausFunction deriv = [=](double theta) {
        KrausSet ops;
        ops.reserve(powers.size());
        for (std::size_t k = 0; k < powers.size(); ++k) {
            const double rate = 0.5 * static_cast<double>(k) / theta - 0.5;
            ops.push_back((rate * amplitude(theta, k)) * powers[k]);
        }
        return ops;
    };
    const double deficiency = poisson_tail(params.theta_max, k_max) * std::sqrt(static_cast<double>(d));
    return {"random-shift", d, k_max + 1, ThetaDomain{0.0, params.theta_max}, std::move(kraus),
            std::move(deriv), std::max(1e-10, deficiency)};
}

ParamKrausFamily damping(const BuiltinParams& params) {
    if (!params.n_max || *params.n_max == 0) {
        throw ValidationError("damping: n_max (Fock cutoff) must be a positive integer");
    }
    const std::size_t n_max = *params.n_max;
    const std::size_t d = n_max + 1;
    ComplexMatrix lower(d, d);
    for (std::size_t n = 1; n < d; ++n) lower(n - 1, n) = std::sqrt(static_cast<double>(n));
    std::vector<ComplexMatrix> powers{ComplexMatrix::identity(d)};
    for (std::size_t k = 1; k <= n_max; ++k) powers.push_back(matmul(lower, powers.back()));

    // Delta_k = c_k(theta) exp(-theta n / 2) a^k with c_k = (1 - e^{-theta})^{k/2} / sqrt(k!)
    auto number_decay = [d](double theta, bool derivative) {
        std::vector<double> diag(d);
        for (std::size_t n = 0; n < d; ++n) {
            const double v = std::exp(-0.5 * theta * static_cast<double>(n));
            diag[n] = derivative ? -0.5 * static_cast<double>(n) * v : v;
        }
        return ComplexMatrix::diagonal(std::span<const double>(diag));
    };
    KrausFunction kraus = [=](double theta) {
        const double loss = -std::expm1(-theta);
        const ComplexMatrix decay = number_decay(theta, false);
        KrausSet ops;
        for (std::size_t k = 0; k <= n_max; ++k) {
            const double c = std::exp(0.5 * k * std::log(loss) - 0.5 * std::lgamma(k + 1.0));
            ops.push_back(c * matmul(decay, powers[k]));
        }
        return ops;
    };
    KrausFunction deriv = [=](double theta) {
        const double loss = -std::expm1(-theta);
        const double eta = std::exp(-theta);
        const ComplexMatrix decay = number_decay(theta, false);
        const ComplexMatrix ddecay = number_decay(theta, true);
        KrausSet ops;
        for (std::size_t k = 0; k <= n_max; ++k) {
            const double c = std::exp(0.5 * k * std::log(loss) - 0.5 * std::lgamma(k + 1.0));
            const double dc = k == 0 ? 0.0 : c * 0.5 * static_cast<double>(k) * eta / loss;
            ops.push_back(dc * matmul(decay, powers[k]) + c * matmul(ddecay, powers[k]));
        }
        return ops;
    };
    return {"damping", d, n_max + 1, ThetaDomain{0.0, kInf}, std::move(kraus), std::move(deriv)};
}

}  // namespace

ComplexMatrix pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_y() { return {{0.0, -kI}, {kI, 0.0}}; }
ComplexMatrix pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

double poisson_tail(double theta, std::size_t k_max) {
    double tail = 0.0;
    for (std::size_t k = k_max + 1;; ++k) {
        const double term =
            std::exp(-theta + static_cast<double>(k) * std::log(theta) - std::lgamma(k + 1.0));
        tail += term;
        if (static_cast<double>(k) > theta && term < 1e-20 * tail) break;
        if (k > k_max + 10000) break;
    }
    return tail;
}

std::size_t poisson_cutoff(double theta, double tail_tol) {
    std::size_t k = 0;
    while (poisson_tail(theta, k) >= tail_tol) ++k;
    return k;
}

ParamKrausFamily builtin(std::string_view name, const BuiltinParams& params) {
    if (name == "depolarizing") return depolarizing();
    if (name == "depolarizing-canonical") return depolarizing_canonical();
    if (name == "dephasing") return dephasing();
    if (name == "random-shift") return random_shift(params);
    if (name == "damping") return damping(params);
    throw ValidationError("unknown channel '" + std::string(name) + "'");
}

const std::vector<BuiltinInfo>& builtin_catalog() {
    static const std::vector<BuiltinInfo> catalog{
        {"depolarizing", "p", "(0, 1)", "sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z"},
        {"depolarizing-canonical", "p", "(0, 1)",
         "canonical depolarizing operators relative to |0>: sqrt(p/6)(iX+Y), (qI+(p/3)Z)/sqrt(q+p/3), "
         "sqrt(p/6)(X+iY), sqrt(q p/3/(q+p/3))(Z-I), q=1-p"},
        {"dephasing", "theta", "(0, inf)", "sqrt((1+e^-2theta)/2) I, sqrt((1-e^-2theta)/2) Z"},
        {"random-shift", "theta", "(0, theta_max)",
         "theta^(k/2) e^(-theta/2) / sqrt(k!) U^k, k=0..k_max, U cyclic shift on d levels"},
        {"damping", "theta", "(0, inf)",
         "(1-e^-theta)^(k/2) / sqrt(k!) exp(-theta a^dagger a / 2) a^k, k=0..n_max"},
    };
    return catalog;
}

}  // namespace chanest
