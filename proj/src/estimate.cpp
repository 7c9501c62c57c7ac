#include "chanest/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "chanest/errors.hpp"
#include "chanest/fisher.hpp"

namespace chanest {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr int kScanPoints = 200;
constexpr double kRefineWidth = 1e-9;

double log_likelihood(const OutcomeSample& sample, const Povm& povm, const ParamKrausFamily& family,
                      const QuantumState& rho0, double theta) {
    const ComplexMatrix rho = output_state(family, theta, rho0);
    double ll = 0.0;
    for (std::size_t i = 0; i < povm.size(); ++i) {
        if (sample.counts[i] == 0) continue;
        const double p = frobenius_inner(povm.effects()[i], rho).real();
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(sample.counts[i]) * std::log(p);
    }
    return ll;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::next() noexcept { return splitmix64(key_ + kGolden * counter_++); }

double CounterRng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index));
}

std::vector<double> outcome_probabilities(const Povm& povm, const ParamKrausFamily& family, double theta,
                                          const QuantumState& rho0) {
    if (povm.dim() != family.dim()) throw ValidationError("POVM dimension does not match the channel");
    const ComplexMatrix rho = output_state(family, theta, rho0);
    std::vector<double> p(povm.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::max(0.0, frobenius_inner(povm.effects()[i], rho).real());
        total += p[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "outcome probabilities sum to " << total << " at theta=" << theta;
        throw NumericError(msg.str());
    }
    for (double& x : p) x /= total;
    return p;
}

OutcomeSample sample_outcomes(const Povm& povm, const ParamKrausFamily& family, double theta,
                              const QuantumState& rho0, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("number of shots must be positive");
    const std::vector<double> p = outcome_probabilities(povm, family, theta, rho0);
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    cdf.back() = 1.0;

    OutcomeSample s{std::vector<std::uint64_t>(p.size(), 0), n, theta, seed};
    CounterRng rng(seed);
    for (std::uint64_t shot = 0; shot < n; ++shot) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        ++s.counts[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1))];
    }
    return s;
}

SearchInterval mle_search_interval(const ThetaDomain& domain, const NumericSettings& settings, double search_cap) {
    const bool lo_finite = std::isfinite(domain.lo);
    const bool hi_finite = std::isfinite(domain.hi);
    double lo = lo_finite ? domain.lo + settings.domain_inset : 0.0;
    double hi = hi_finite ? domain.hi - settings.domain_inset : 0.0;
    if (!lo_finite && !hi_finite) {
        lo = -search_cap;
        hi = search_cap;
    } else if (!lo_finite) {
        lo = hi - search_cap;
    } else if (!hi_finite) {
        hi = lo + search_cap;
    }
    if (!(lo < hi)) throw ValidationError("parameter domain is too narrow to search");
    return {lo, hi};
}

double mle_estimate(const OutcomeSample& sample, const Povm& povm, const ParamKrausFamily& family,
                    const QuantumState& rho0, const NumericSettings& settings) {
    if (sample.counts.size() != povm.size()) {
        throw ValidationError("sample has " + std::to_string(sample.counts.size()) + " outcomes, POVM has " +
                              std::to_string(povm.size()));
    }
    if (povm.dim() != family.dim()) throw ValidationError("POVM dimension does not match the channel");
    const SearchInterval range = mle_search_interval(family.domain(), settings);
    auto ll = [&](double t) { return log_likelihood(sample, povm, family, rho0, t); };

    const double step = (range.hi - range.lo) / (kScanPoints - 1);
    auto grid = [&](int i) { return i == kScanPoints - 1 ? range.hi : range.lo + i * step; };
    int best = -1;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScanPoints; ++i) {
        const double v = ll(grid(i));
        if (v > best_ll) {
            best_ll = v;
            best = i;
        }
    }
    if (best < 0) throw ValidationError("likelihood vanishes on the whole domain: an observed outcome is impossible");

    double a = grid(std::max(best - 1, 0));
    double b = grid(std::min(best + 1, kScanPoints - 1));
    const double left = a;
    const double right = b;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = ll(x1);
    double f2 = ll(x2);
    while (b - a > kRefineWidth) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = ll(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = ll(x2);
        }
    }
    const double mid = 0.5 * (a + b);

    // Candidates in ascending order so that ties keep the smaller theta.
    const double candidates[4] = {left, grid(best), mid, right};
    double est = candidates[0];
    double est_ll = ll(est);
    for (double c : candidates) {
        const double v = ll(c);
        if (v > est_ll || (v == est_ll && c < est)) {
            est = c;
            est_ll = v;
        }
    }
    return est;
}

EstimationReport crlb_experiment(const Povm& povm, const ParamKrausFamily& family, double theta,
                                 const QuantumState& rho0, std::uint64_t n_shots, std::size_t n_trials,
                                 std::uint64_t seed, unsigned threads, const NumericSettings& settings) {
    if (n_trials < 2) throw ValidationError("CRLB experiment needs at least two trials");
    if (n_shots == 0) throw ValidationError("number of shots must be positive");
    family.require_in_domain(theta);

    EstimationReport rep;
    rep.n_shots = n_shots;
    rep.n_trials = n_trials;
    rep.true_theta = theta;
    rep.seed = seed;
    rep.fisher = classical_fisher(povm, family, theta, rho0, settings);
    // Anything below eps_prob is rounding noise in tr(E rho').
    if (!(rep.fisher > settings.eps_prob))
        throw NumericError("Fisher information is zero at the true parameter; CRLB undefined");
    rep.crlb = 1.0 / (static_cast<double>(n_shots) * rep.fisher);
    rep.estimates.assign(n_trials, 0.0);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < n_trials; t = next++) {
            try {
                const OutcomeSample s = sample_outcomes(povm, family, theta, rho0, n_shots, derive_seed(seed, t));
                rep.estimates[t] = mle_estimate(s, povm, family, rho0, settings);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_trials;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<double> sorted = rep.estimates;
    std::sort(sorted.begin(), sorted.end());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n_trials);
    double ss = 0.0;
    for (double x : sorted) ss += (x - mean) * (x - mean);
    rep.empirical_variance = ss / static_cast<double>(n_trials - 1);
    rep.bias = mean - theta;
    rep.ratio = rep.empirical_variance / rep.crlb;
    return rep;
}

}  // namespace chanest
