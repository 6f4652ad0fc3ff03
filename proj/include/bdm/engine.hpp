#pragma once

// Jump-move simulation by thinning against alpha_star, the coupled process
// (X', eta') against a dominating simple chain, and batch execution.

#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bdm/bd_chain.hpp"
#include "bdm/config_space.hpp"
#include "bdm/jump_kernels.hpp"
#include "bdm/movers.hpp"

namespace bdm {

struct ModelSpec {
    DomainPtr domain;
    IntensitySpec intensities;
    BirthKernel birth;
    DeathKernel death;
    MoverSpec mover;

    double alpha_star() const noexcept { return intensities.alpha_star(); }
    /// Probes the intensity bound on random configurations (see IntensitySpec::check_bound).
    void validate(std::uint64_t seed, std::size_t probes_per_count = 8, std::size_t max_count = 30) const;
};

/// The Gibbs-invariant family: Gibbs birth kernel and intensity z(x)/divisor,
/// uniform death of total rate 1, Langevin move with drift -grad phi at inverse
/// temperature 2 so that the move leaves exp(-V) on each E_n invariant.
ModelSpec gibbs_model(DomainPtr w, const GibbsPotential& g,
                      GibbsNormalisation norm = GibbsNormalisation::NPlusOne, double mover_step = 1e-3,
                      QuadratureSpec quad = {});

struct Event {
    double t;
    JumpType kind;
    std::size_t n; ///< count after the jump
    std::optional<Configuration> state;
};

struct Checkpoint {
    double t;
    Configuration state;
};

struct TrajectoryLog {
    Configuration initial;
    std::vector<Event> events;
    std::vector<Checkpoint> checkpoints;
    double horizon = 0.0;
    std::uint64_t seed = 0;
};

struct SimulateOptions {
    /// Total number of points stored across event states; later events keep only (t, kind, n).
    std::size_t state_budget = 1u << 20;
};

TrajectoryLog simulate(const ModelSpec& model, const Configuration& x0, double horizon,
                       std::vector<double> checkpoints, std::uint64_t seed, const SimulateOptions& opts = {});

/// One thinning decision at y: accepts with probability alpha(y)/alpha_star drawn
/// from s.wait and, on acceptance, replaces y by a jump drawn from s.kernel.
std::optional<JumpType> thinning_step(const ModelSpec& model, Configuration& y, Streams& s);

/// X at t_end given X = x at t0 and the candidate times in (t0, t_end], ascending.
Configuration run_candidates(const ModelSpec& model, Configuration x, double t0, std::span<const double> candidates,
                             double t_end, Streams& s);

/// Count at time t implied by the event record.
std::size_t count_at(const TrajectoryLog& log, double t);

// ---------------------------------------------------------------------------
// Coupled process

enum class CoupledBranch {
    JointJump,         ///< x outside E_eta: X jumps by K, eta stays
    EtaBirth,          ///< eta + 1 only
    EtaDeath,          ///< eta - 1 only
    SimultaneousBirth, ///< x in E_eta: both gain one
    SimultaneousDeath, ///< x in E_eta: both lose one
    XOnlyDeath,        ///< x in E_eta: X loses one, eta stays
};

const char* branch_name(CoupledBranch b) noexcept;

struct CoupledEvent {
    double t;
    CoupledBranch branch;
    std::size_t n_x;
    std::size_t eta;
};

struct CoupledCheckpoint {
    double t;
    Configuration x;
    std::size_t eta;
};

struct CoupledTrajectoryLog {
    Configuration initial;
    std::size_t n0 = 0;
    std::vector<CoupledEvent> events;
    std::vector<CoupledCheckpoint> checkpoints;
    double horizon = 0.0;
    std::uint64_t seed = 0;
};

CoupledTrajectoryLog simulate_coupled(const ModelSpec& model, const SimpleChainSpec& chain, const Configuration& x0,
                                      std::size_t n0, double horizon, std::vector<double> checkpoints,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------

struct DominationRow {
    std::size_t n;
    double empirical; ///< P(N_t > n) over the trials
    double bound;     ///< P(Poisson(alpha_star t) > n)
    double sigma;     ///< binomial standard error at the bound
    bool violated;
};

struct DominationReport {
    double t;
    std::size_t trials;
    std::vector<DominationRow> rows;
    std::size_t violations = 0;
};

/// Jump counts N_t against the Poisson(alpha_star t) tail; a row is violated when
/// the empirical exceedance is more than 4 sigma above the bound.
DominationReport poisson_domination_report(const ModelSpec& model, const Configuration& x0, double t,
                                           std::size_t trials, std::uint64_t seed);

/// P(Poisson(lambda) > n).
double poisson_tail(double lambda, std::size_t n);

// ---------------------------------------------------------------------------

/// Worker count used by run_batch: hardware concurrency, at least 1.
unsigned default_threads() noexcept;

/// Runs fn(i, derive_seed(seed, i)) for i in [0, trials) across threads and
/// returns the results in index order. The first exception thrown is rethrown.
template <class Fn>
auto run_batch(std::size_t trials, std::uint64_t seed, Fn fn, unsigned threads = 0)
    -> std::vector<decltype(fn(std::size_t{}, std::uint64_t{}))>
{
    using R = decltype(fn(std::size_t{}, std::uint64_t{}));
    std::vector<std::optional<R>> slots(trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= trials) {
                return;
            }
            try {
                slots[i].emplace(fn(i, derive_seed(seed, i)));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(trials);
                return;
            }
        }
    };
    unsigned n = threads == 0 ? default_threads() : threads;
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(trials, 1)));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<R> out;
    out.reserve(trials);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-delimited records

void write_jsonl(std::ostream& os, const TrajectoryLog& log, const std::string& model_hash);
void write_jsonl(std::ostream& os, const CoupledTrajectoryLog& log, const std::string& model_hash);

} // namespace bdm
