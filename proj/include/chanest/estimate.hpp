#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chanest/channel.hpp"
#include "chanest/povm.hpp"

namespace chanest {

/// Counter-based generator: the i-th draw is splitmix64(key + i * golden).
/// Streams for different keys are independent of scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    std::uint64_t next() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of trial `index` under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct OutcomeSample {
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total = 0;
    double true_theta = 0.0;
    std::uint64_t seed = 0;
};

/// p(xi|theta) = tr(E_xi rho(theta)), clipped at zero and renormalized when
/// the sum is within 1e-9 of one; NumericError otherwise.
std::vector<double> outcome_probabilities(const Povm& povm, const ParamKrausFamily& family, double theta,
                                          const QuantumState& rho0);

/// Multinomial draw of n shots by inverse CDF.
OutcomeSample sample_outcomes(const Povm& povm, const ParamKrausFamily& family, double theta,
                              const QuantumState& rho0, std::uint64_t n, std::uint64_t seed);

/// Search interval of the estimator: the domain pulled in by domain_inset,
/// with an infinite end replaced by a point search_cap away from the other.
struct SearchInterval {
    double lo;
    double hi;
};
SearchInterval mle_search_interval(const ThetaDomain& domain, const NumericSettings& settings = {},
                                   double search_cap = 30.0);

/// Maximum-likelihood estimate: 200-point scan (ties to the smaller theta)
/// followed by golden-section refinement to width 1e-9.
double mle_estimate(const OutcomeSample& sample, const Povm& povm, const ParamKrausFamily& family,
                    const QuantumState& rho0, const NumericSettings& settings = {});

struct EstimationReport {
    std::uint64_t n_shots = 0;
    std::size_t n_trials = 0;
    double true_theta = 0.0;
    std::uint64_t seed = 0;
    double fisher = 0.0;
    std::vector<double> estimates;  // trial order
    double empirical_variance = 0.0;
    double crlb = 0.0;
    double ratio = 0.0;
    double bias = 0.0;
};

/// n_trials independent sample + MLE cycles. Trials run concurrently on up to
/// `threads` workers (0 picks the hardware count); the report does not depend
/// on the thread count.
EstimationReport crlb_experiment(const Povm& povm, const ParamKrausFamily& family, double theta,
                                 const QuantumState& rho0, std::uint64_t n_shots, std::size_t n_trials,
                                 std::uint64_t seed, unsigned threads = 0, const NumericSettings& settings = {});

}  // namespace chanest
