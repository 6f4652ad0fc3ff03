#pragma once

// Birth and death intensities, the birth/death transition kernels, and the
// combined jump kernel K = (beta/alpha) K_birth + (delta/alpha) K_death.

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "bdm/config_space.hpp"
#include "bdm/potentials.hpp"
#include "bdm/rng.hpp"

namespace bdm {

/// Small parametric family of functions of a distance r >= 0.
struct RadialFunction {
    enum class Kind { Constant, Power, ExpDecay };
    Kind kind = Kind::Constant;
    double coef = 1.0;  ///< constant value, power prefactor, or decay amplitude
    double shape = 1.0; ///< power exponent, or decay length

    static RadialFunction constant(double c) { return {Kind::Constant, c, 0.0}; }
    static RadialFunction power(double coef, double p) { return {Kind::Power, coef, p}; }
    static RadialFunction exp_decay(double amp, double scale) { return {Kind::ExpDecay, amp, scale}; }

    double operator()(double r) const noexcept;
};

// ---------------------------------------------------------------------------
// Intensities

/// beta(x) = rate while n(x) < cutoff, 0 afterwards.
struct ConstantBirth {
    double rate = 0.0;
    std::optional<std::size_t> cutoff;
};

/// How z(x) is divided in the Gibbs birth intensity.
enum class GibbsNormalisation {
    NPlusOne, ///< beta(x) = z(x) / (n(x) + 1); balances uniform unit-rate death against exp(-V)
    NMaxOne,  ///< beta(x) = z(x) / max(n(x), 1)
};

struct GibbsBirthIntensity {
    GibbsPotential potential;
    QuadratureSpec quad;
    GibbsNormalisation normalisation = GibbsNormalisation::NPlusOne;
};

struct CustomIntensity {
    std::function<double(const Configuration&)> fn;
};

/// delta(x) = rate * 1{n(x) >= 1}.
struct ConstantDeath {
    double rate = 1.0;
};

/// delta(x) = rate * min(n(x), cap).
struct LinearDeath {
    double rate = 1.0;
    std::size_t cap = 10000;
};

using BirthIntensity = std::variant<ConstantBirth, GibbsBirthIntensity, CustomIntensity>;
using DeathIntensity = std::variant<ConstantDeath, LinearDeath, CustomIntensity>;

struct SupInfSequences {
    std::vector<double> beta;  ///< sup of beta over E_n
    std::vector<double> delta; ///< inf of delta over E_n
    std::vector<double> alpha; ///< beta_n + delta_n
};

class IntensitySpec {
  public:
    IntensitySpec(BirthIntensity birth, DeathIntensity death, double alpha_star);

    double beta(const Configuration& x) const;
    double delta(const Configuration& x) const;
    double alpha(const Configuration& x) const { return beta(x) + delta(x); }
    double alpha_star() const noexcept { return alpha_star_; }

    const BirthIntensity& birth() const noexcept { return birth_; }
    const DeathIntensity& death() const noexcept { return death_; }

    /// Closed-form (beta_n, delta_n, alpha_n), n = 0..n_max, for the shipped families.
    /// The Gibbs family returns the local-stability envelope bound exp(-a)|W| / divisor(n).
    /// Throws UnsupportedFamily for custom intensity functions.
    SupInfSequences sup_inf_sequences(const Domain& w, std::size_t n_max) const;

    /// Spot-checks 0 <= beta + delta <= alpha_star and delta(empty) = 0 on random
    /// configurations of W with up to max_count points (AlphaStarTooSmall / InvalidArgument).
    void check_bound(const DomainPtr& w, Rng& rng, std::size_t probes_per_count, std::size_t max_count) const;

  private:
    BirthIntensity birth_;
    DeathIntensity death_;
    double alpha_star_;
};

// ---------------------------------------------------------------------------
// Kernels

struct UniformBirth {};

/// Mixture of isotropic Gaussians centred at the existing points, the component at
/// x_i having standard deviation sigma * v(x_i, x) with
///   v(x_i, x) = exp(phi1(|x_i - c|) + sum_{k != i} phi2(|x_k - x_i|)),
/// c the domain centre. Draws outside W are re-proposed (truncation to W).
/// From the empty configuration the bare Gaussian centred at c is used.
struct MixtureBirth {
    double sigma = 0.1;
    RadialFunction phi1 = RadialFunction::constant(0.0);
    RadialFunction phi2 = RadialFunction::constant(0.0);
};

/// New point with density exp(-(V(x ∪ xi) - V(x))) / z(x) on W.
struct GibbsBirthKernel {
    GibbsPotential potential;
};

struct UniformDeath {};

/// Point i dies with probability proportional to sum_{k != i} g(|x_k - x_i|).
struct WeightedDeath {
    RadialFunction g;
};

class BirthKernel {
  public:
    using Kind = std::variant<UniformBirth, MixtureBirth, GibbsBirthKernel>;

    explicit BirthKernel(Kind kind, std::size_t max_proposals = 1000000)
        : kind_(std::move(kind)), max_proposals_(max_proposals)
    {
    }

    const Kind& kind() const noexcept { return kind_; }
    std::size_t max_proposals() const noexcept { return max_proposals_; }

    /// x ∪ {xi}; throws RejectionBudgetExceeded after max_proposals rejected draws.
    Configuration sample(const Configuration& x, Rng& rng) const;
    /// Dispersion v(x_i, x) of the mixture kernel.
    static double dispersion(const MixtureBirth& k, const Configuration& x, std::size_t i);

  private:
    Kind kind_;
    std::size_t max_proposals_;
};

class DeathKernel {
  public:
    using Kind = std::variant<UniformDeath, WeightedDeath>;

    explicit DeathKernel(Kind kind) : kind_(std::move(kind)) {}

    const Kind& kind() const noexcept { return kind_; }

    /// Removal probabilities in canonical point order; EmptyConfiguration for n = 0.
    std::vector<double> weights(const Configuration& x) const;
    Configuration sample(const Configuration& x, Rng& rng) const;

  private:
    Kind kind_;
};

/// Death weights of the weighted kernel.
std::vector<double> death_weights(const WeightedDeath& k, const Configuration& x);

enum class JumpType { Birth, Death };

const char* jump_type_name(JumpType t) noexcept;

/// Birth with probability beta/(beta+delta), else death. Throws ZeroIntensity if beta+delta = 0.
std::pair<Configuration, JumpType> sample_jump(double beta, double delta, const BirthKernel& bk,
                                               const DeathKernel& dk, const Configuration& x, Rng& rng);

std::pair<Configuration, JumpType> sample_jump(const IntensitySpec& intens, const BirthKernel& bk,
                                               const DeathKernel& dk, const Configuration& x, Rng& rng);

/// Uniform random configuration of n points in a bounded W.
Configuration uniform_configuration(const DomainPtr& w, std::size_t n, Rng& rng);

} // namespace bdm
