#pragma once

// Empirical checks of the process against its generator, its invariant Gibbs
// law, the dominating chain, and geometric convergence of count marginals.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bdm/engine.hpp"

namespace bdm {

// ---------------------------------------------------------------------------
// Test functions, all bounded by 1.

/// f(x) = 1{n(x) = k}
struct CountIndicator {
    std::size_t k = 0;
};

/// f(x) = exp(-theta n(x))
struct CountExponential {
    double theta = 1.0;
};

/// f(x) = exp(-theta n(x)) prod_i exp(-|x_i - c|^2 / width^2), c the centre of W.
struct SmoothCylinder {
    double theta = 0.5;
    double width = 0.5;
};

using TestFunction = std::variant<CountIndicator, CountExponential, SmoothCylinder>;

double evaluate(const TestFunction& f, const Configuration& x);
std::string test_function_name(const TestFunction& f);

// ---------------------------------------------------------------------------
// Generator identity

struct GeneratorEstimate {
    double h = 0.0;
    double lhs = 0.0;        ///< (E f(X_h) - f(x)) / h
    double rhs = 0.0;        ///< (E f(Y_h) - f(x)) / h + alpha(x) (K f(x) - f(x))
    double residual = 0.0;   ///< mean of the paired differences lhs - rhs
    double stderr_ = 0.0;    ///< standard error of the paired residual
    double combined_stderr = 0.0; ///< sqrt(se(lhs)^2 + se(rhs)^2), as if estimated separately
    double truncation = 0.0; ///< bound on the omitted >= 5 candidate strata
};

/// Paired estimate of lhs and rhs at step h. The candidate count on [0, h] is
/// stratified (0..4 candidates with exact Poisson weights); the one-candidate
/// stratum is integrated over accept/reject; lhs and rhs share the mover path
/// and the kernel draws.
GeneratorEstimate generator_estimate(const ModelSpec& model, const Configuration& x, const TestFunction& f, double h,
                                     std::size_t trials, std::uint64_t seed);

struct GeneratorReport {
    GeneratorEstimate coarse; ///< at h
    GeneratorEstimate fine;   ///< at h / 2, same seed
    double slope = 0.0;       ///< C = 2 (residual(h) - residual(h / 2)) / h
    double ratio = 0.0;       ///< residual(h) / residual(h / 2)
    bool within_coarse = false;
    bool within_fine = false;
    bool ratio_ok = false; ///< ratio in [1.5, 2.5]
    /// Tolerance at step s is 3 combined_stderr + |C| s + truncation; pass needs
    /// both steps within it and ratio_ok.
    bool pass = false;
};

GeneratorReport generator_check(const ModelSpec& model, const Configuration& x, const TestFunction& f, double h,
                                std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gibbs invariance

struct OracleOptions {
    std::size_t burn_in = 20000; ///< MH steps discarded
    std::size_t thin = 50;       ///< MH steps between samples
};

/// Birth-death Metropolis-Hastings for density exp(-V) against the unit-rate
/// Poisson process on W. Birth and death are proposed with probability 1/2 each.
std::vector<Configuration> mcmc_gibbs_oracle(const GibbsPotential& g, const DomainPtr& w, std::size_t samples,
                                             std::uint64_t seed, const OracleOptions& opts = {});

/// MH ratio for adding xi to x: |W| exp(-(V(x + xi) - V(x))) / (n(x) + 1).
double mh_birth_ratio(const GibbsPotential& g, const Configuration& x, std::span<const double> xi);
/// MH ratio for removing the i-th point: n(x) exp(V(x) - V(x - x_i)) / |W|.
double mh_death_ratio(const GibbsPotential& g, const Configuration& x, std::size_t i);

/// Nearest-neighbour distance of every point of every configuration with at least two points.
std::vector<double> nearest_neighbour_distances(const std::vector<Configuration>& xs);

struct GibbsCheckOptions {
    std::size_t chains = 8;    ///< independent BDM runs sharing the sample budget
    double spacing = 1.0;      ///< time between retained checkpoints
    double tv_threshold = 0.03;
    double ks_threshold = 0.05;
    bool oracle_vs_oracle = false; ///< compare two independent oracle runs instead
    std::size_t oracle_samples = 0; ///< size of the reference oracle sample; 0 means n_samples
    OracleOptions oracle;
};

struct GibbsReport {
    double count_tv = 0.0;
    double nn_ks = 0.0;
    std::vector<double> count_law;        ///< BDM (or first oracle) count frequencies
    std::vector<double> oracle_count_law; ///< oracle count frequencies
    double mean_nn = 0.0;
    double oracle_mean_nn = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// The model's birth kernel must be a Gibbs birth kernel; its potential defines the target.
GibbsReport gibbs_invariance_check(const ModelSpec& model, double burn_in, std::size_t n_samples, std::uint64_t seed,
                                   const GibbsCheckOptions& opts = {});

/// BDM checkpoint samples used by gibbs_invariance_check: chains runs from Ø,
/// checkpoints every spacing after burn_in.
std::vector<Configuration> bdm_long_run_samples(const ModelSpec& model, double burn_in, std::size_t n_samples,
                                                std::uint64_t seed, std::size_t chains, double spacing);

// ---------------------------------------------------------------------------
// Coupling

struct CouplingRow {
    double t;
    double p_chain;   ///< eta'_t against the standalone chain
    double p_process; ///< n(X'_t) against n(X_t) from simulate
};

struct CouplingReport {
    std::vector<CouplingRow> rows;
    std::size_t trajectories = 0;
    std::size_t violations = 0; ///< trajectories with n(X') > eta' at some recorded time
    bool domination_expected = false;
    bool pass = false; ///< every p-value > 0.01 and, when n(x0) <= n0, no violation
};

CouplingReport coupling_check(const ModelSpec& model, const SimpleChainSpec& chain, const Configuration& x0,
                              std::size_t n0, const std::vector<double>& t_list, std::size_t trials,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Geometric rate

struct RateEstimate {
    std::vector<double> times;
    std::vector<double> tv;
    std::vector<double> noise_floor; ///< typical TV between two samples of one law at each t
    std::vector<bool> fitted;        ///< tv > 5 noise_floor
    double slope = 0.0;
    double r_hat = 0.0;
    double ci_low = 0.0; ///< bootstrap 95% interval for r_hat
    double ci_high = 0.0;
    bool fit_ok = false; ///< at least two fitted times
};

RateEstimate rate_estimate(const ModelSpec& model, const Configuration& x0, const Configuration& y0,
                           const std::vector<double>& t_grid, std::size_t trials, std::uint64_t seed,
                           std::size_t bootstrap = 200);

} // namespace bdm
