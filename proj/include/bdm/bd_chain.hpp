#pragma once

// The simple birth-death chain on N with rates beta_n (up) and delta_n (down):
// Gillespie simulation, product-form stationary law, and ergodicity / rate
// certificates read off closed-form tails.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdm/jump_kernels.hpp"

namespace bdm {

/// coef * (n + shift)^power.
struct PowerLaw {
    double coef = 0.0;
    double shift = 0.0;
    double power = 0.0;

    double operator()(std::size_t n) const;
};

/// Rates given by explicit head arrays, continued past the head by an optional
/// power-law tail rule. birth_cutoff forces beta_n = 0 for n >= cutoff.
/// Without a tail rule the chain is only known on its head.
class SimpleChainSpec {
  public:
    std::string family = "explicit";
    std::vector<double> beta_head;
    std::vector<double> delta_head{0.0};
    std::optional<PowerLaw> beta_tail;
    std::optional<PowerLaw> delta_tail;
    std::optional<std::size_t> birth_cutoff;

    static SimpleChainSpec constant(double lambda, double mu);
    /// beta_n = lambda, delta_n = n mu.
    static SimpleChainSpec mm_infinity(double lambda, double mu);
    /// beta_n = b / (n + 1) (or b / max(n, 1)), delta_n = 1{n >= 1}.
    static SimpleChainSpec gibbs_envelope(double b, GibbsNormalisation norm);
    static SimpleChainSpec explicit_arrays(std::vector<double> beta, std::vector<double> delta);
    /// Copy with beta_n = 0 for n >= n0.
    SimpleChainSpec with_cutoff(std::size_t n0) const;

    /// Closed-form dominating chain (sup beta, inf delta over E_n) of a shipped intensity family.
    static SimpleChainSpec dominating(const IntensitySpec& intens, const Domain& w);

    double beta(std::size_t n) const;
    double delta(std::size_t n) const;
    /// Both rates are defined for every n.
    bool has_tail_rule() const noexcept;
    /// Smallest n0 with beta_n = 0 for all n >= n0, when certified.
    std::optional<std::size_t> birth_stop() const;

    void validate() const;
};

struct ChainEvent {
    double t;
    std::size_t n; ///< state after the jump
};

struct ChainLog {
    std::size_t n0 = 0;
    double horizon = 0.0;
    std::vector<ChainEvent> events;
    bool absorbed = false; ///< reached a state with beta_n + delta_n = 0
};

ChainLog simulate_chain(const SimpleChainSpec& c, std::size_t n0, double horizon, std::uint64_t seed);

/// State at time t of a recorded path.
std::size_t chain_state_at(const ChainLog& log, double t);

/// Fraction of [0, horizon] spent in each state.
std::vector<double> occupancy(const ChainLog& log);

enum class ErgodicityVerdict { Eq30, Eq31, Inconclusive, Fails };
enum class RateVerdict { Eq32, Eq33, Corollary, Inconclusive };

const char* verdict_name(ErgodicityVerdict v) noexcept;
const char* verdict_name(RateVerdict v) noexcept;

struct ErgodicityReport {
    ErgodicityVerdict verdict = ErgodicityVerdict::Inconclusive;
    std::vector<std::string> rationale;
};

struct RateReport {
    RateVerdict verdict = RateVerdict::Inconclusive;
    std::vector<std::string> rationale;
};

/// n_probe bounds the head scan for positivity of delta_n.
ErgodicityReport ergodicity_check(const SimpleChainSpec& c, std::size_t n_probe = 1000);

/// gamma: initial count distribution with finite support, gamma[n] = P(n).
RateReport rate_condition_check(const SimpleChainSpec& c, const std::vector<double>& gamma);

/// pi_n proportional to prod_{k=1}^n beta_{k-1} / delta_k, truncated once the
/// remaining mass is below tol. Throws NotErgodic.
std::vector<double> stationary_distribution(const SimpleChainSpec& c, double tol = 1e-14);

/// E_0(s_0) = 1 / (pi_0 beta_0). Throws NotErgodic.
double expected_return_time(const SimpleChainSpec& c, double tol = 1e-14);

struct ReturnTimeSample {
    double mean;
    double stderr_;
    std::size_t cycles;
};

/// Monte-Carlo mean of the time to leave 0 and come back.
ReturnTimeSample simulate_return_times(const SimpleChainSpec& c, std::size_t cycles, std::uint64_t seed);

} // namespace bdm
