#include "bdm/jump_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bdm/error.hpp"

namespace bdm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

double gibbs_divisor(GibbsNormalisation norm, std::size_t n)
{
    if (norm == GibbsNormalisation::NPlusOne) {
        return static_cast<double>(n + 1);
    }
    return static_cast<double>(std::max<std::size_t>(n, 1));
}

std::size_t sample_index(std::span<const double> weights, Rng& rng)
{
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) {
            return i;
        }
    }
    // Rounding left u above the cumulative sum: take the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0) {
            return i;
        }
    }
    return weights.size() - 1;
}

} // namespace

double RadialFunction::operator()(double r) const noexcept
{
    switch (kind) {
    case Kind::Constant: return coef;
    case Kind::Power: return coef * std::pow(r, shape);
    case Kind::ExpDecay: return coef * std::exp(-r / shape);
    }
    return 0.0;
}

IntensitySpec::IntensitySpec(BirthIntensity birth, DeathIntensity death, double alpha_star)
    : birth_(std::move(birth)), death_(std::move(death)), alpha_star_(alpha_star)
{
    if (!(alpha_star_ > 0) || !std::isfinite(alpha_star_)) {
        throw Error(Errc::InvalidArgument, "alpha_star must be a positive finite bound");
    }
    std::visit(Overloaded{
                   [](const ConstantBirth& b) {
                       if (!(b.rate >= 0)) {
                           throw Error(Errc::InvalidArgument, "birth rate must be non-negative");
                       }
                   },
                   [](const GibbsBirthIntensity&) {},
                   [](const CustomIntensity& c) {
                       if (!c.fn) {
                           throw Error(Errc::InvalidArgument, "custom birth intensity is empty");
                       }
                   },
               },
               birth_);
    std::visit(Overloaded{
                   [](const ConstantDeath& d) {
                       if (!(d.rate >= 0)) {
                           throw Error(Errc::InvalidArgument, "death rate must be non-negative");
                       }
                   },
                   [](const LinearDeath& d) {
                       if (!(d.rate >= 0) || d.cap == 0) {
                           throw Error(Errc::InvalidArgument, "linear death needs rate >= 0 and cap >= 1");
                       }
                   },
                   [](const CustomIntensity& c) {
                       if (!c.fn) {
                           throw Error(Errc::InvalidArgument, "custom death intensity is empty");
                       }
                   },
               },
               death_);
}

double IntensitySpec::beta(const Configuration& x) const
{
    return std::visit(Overloaded{
                          [&](const ConstantBirth& b) {
                              return b.cutoff && x.count() >= *b.cutoff ? 0.0 : b.rate;
                          },
                          [&](const GibbsBirthIntensity& b) {
                              return b.potential.z(x, b.quad) / gibbs_divisor(b.normalisation, x.count());
                          },
                          [&](const CustomIntensity& c) { return c.fn(x); },
                      },
                      birth_);
}

double IntensitySpec::delta(const Configuration& x) const
{
    const std::size_t n = x.count();
    return std::visit(Overloaded{
                          [n](const ConstantDeath& d) { return n >= 1 ? d.rate : 0.0; },
                          [n](const LinearDeath& d) {
                              return d.rate * static_cast<double>(std::min(n, d.cap));
                          },
                          [&](const CustomIntensity& c) { return c.fn(x); },
                      },
                      death_);
}

SupInfSequences IntensitySpec::sup_inf_sequences(const Domain& w, std::size_t n_max) const
{
    SupInfSequences s;
    s.beta.resize(n_max + 1);
    s.delta.resize(n_max + 1);
    s.alpha.resize(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        s.beta[n] = std::visit(
            Overloaded{
                [n](const ConstantBirth& b) { return b.cutoff && n >= *b.cutoff ? 0.0 : b.rate; },
                [&](const GibbsBirthIntensity& b) {
                    return std::exp(-b.potential.activity()) * b.potential.envelope_integral(w) /
                           gibbs_divisor(b.normalisation, n);
                },
                [](const CustomIntensity&) -> double {
                    throw Error(Errc::UnsupportedFamily, "no closed-form supremum for a custom birth intensity");
                },
            },
            birth_);
        s.delta[n] = std::visit(
            Overloaded{
                [n](const ConstantDeath& d) { return n >= 1 ? d.rate : 0.0; },
                [n](const LinearDeath& d) { return d.rate * static_cast<double>(std::min(n, d.cap)); },
                [](const CustomIntensity&) -> double {
                    throw Error(Errc::UnsupportedFamily, "no closed-form infimum for a custom death intensity");
                },
            },
            death_);
        s.alpha[n] = s.beta[n] + s.delta[n];
    }
    return s;
}

void IntensitySpec::check_bound(const DomainPtr& w, Rng& rng, std::size_t probes_per_count,
                                std::size_t max_count) const
{
    Configuration empty(w);
    if (delta(empty) != 0.0) {
        throw Error(Errc::InvalidArgument, "death intensity must vanish on the empty configuration");
    }
    for (std::size_t n = 0; n <= max_count; ++n) {
        const std::size_t reps = n == 0 ? 1 : probes_per_count;
        for (std::size_t r = 0; r < reps; ++r) {
            Configuration x = uniform_configuration(w, n, rng);
            double b = beta(x), d = delta(x);
            if (!(b >= 0) || !(d >= 0)) {
                throw Error(Errc::InvalidArgument, "intensities must be non-negative");
            }
            if (b + d > alpha_star_) {
                throw Error(Errc::AlphaStarTooSmall,
                            "beta + delta = " + std::to_string(b + d) + " exceeds alpha_star = " +
                                std::to_string(alpha_star_) + " on a probe with n = " + std::to_string(n));
            }
        }
    }
}

// ---------------------------------------------------------------------------

double BirthKernel::dispersion(const MixtureBirth& k, const Configuration& x, std::size_t i)
{
    auto xi = x.point(i);
    auto c = x.domain().center();
    double expo = k.phi1(euclidean_distance(xi, c));
    for (std::size_t j = 0; j < x.count(); ++j) {
        if (j != i) {
            expo += k.phi2(euclidean_distance(x.point(j), xi));
        }
    }
    return std::exp(expo);
}

Configuration BirthKernel::sample(const Configuration& x, Rng& rng) const
{
    const Domain& w = x.domain();
    const std::size_t d = w.dim();
    std::vector<double> xi(d);
    return std::visit(
        Overloaded{
            [&](const UniformBirth&) {
                if (!w.bounded()) {
                    throw Error(Errc::UnboundedDomain, "uniform birth needs a bounded domain");
                }
                for (std::size_t k = 0; k < d; ++k) {
                    xi[k] = rng.uniform(w.lower(k), w.upper(k));
                }
                return x.insert(xi);
            },
            [&](const MixtureBirth& m) {
                std::vector<double> center;
                double scale = m.sigma;
                if (x.empty()) {
                    center = w.center();
                } else {
                    std::size_t i = rng.below(x.count());
                    auto p = x.point(i);
                    center.assign(p.begin(), p.end());
                    scale *= dispersion(m, x, i);
                }
                for (std::size_t attempt = 0; attempt < max_proposals_; ++attempt) {
                    for (std::size_t k = 0; k < d; ++k) {
                        xi[k] = center[k] + scale * rng.normal();
                    }
                    if (w.contains(xi)) {
                        return x.insert(xi);
                    }
                }
                throw Error(Errc::RejectionBudgetExceeded, "mixture birth kept landing outside W");
            },
            [&](const GibbsBirthKernel& g) {
                if (!w.bounded()) {
                    throw Error(Errc::UnboundedDomain, "Gibbs birth needs a bounded domain");
                }
                // Uniform proposal under the envelope exp(-a) psi, psi = 1.
                const double a = g.potential.activity();
                for (std::size_t attempt = 0; attempt < max_proposals_; ++attempt) {
                    for (std::size_t k = 0; k < d; ++k) {
                        xi[k] = rng.uniform(w.lower(k), w.upper(k));
                    }
                    double accept = std::exp(-(g.potential.energy_delta(x, xi) - a));
                    if (rng.uniform() < accept) {
                        return x.insert(xi);
                    }
                }
                throw Error(Errc::RejectionBudgetExceeded, "Gibbs birth rejected every proposal");
            },
        },
        kind_);
}

std::vector<double> death_weights(const WeightedDeath& k, const Configuration& x)
{
    const std::size_t n = x.count();
    if (n == 0) {
        throw Error(Errc::EmptyConfiguration, "no point to remove");
    }
    if (n == 1) {
        return {1.0};
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double g = k.g(euclidean_distance(x.point(i), x.point(j)));
            w[i] += g;
            w[j] += g;
        }
    }
    double z = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(z > 0) || !std::isfinite(z)) {
        throw Error(Errc::DegenerateWeights, "death weights do not normalise");
    }
    for (double& v : w) {
        v /= z;
    }
    return w;
}

std::vector<double> DeathKernel::weights(const Configuration& x) const
{
    if (x.empty()) {
        throw Error(Errc::EmptyConfiguration, "no point to remove");
    }
    return std::visit(Overloaded{
                          [&](const UniformDeath&) {
                              return std::vector<double>(x.count(), 1.0 / static_cast<double>(x.count()));
                          },
                          [&](const WeightedDeath& k) { return death_weights(k, x); },
                      },
                      kind_);
}

Configuration DeathKernel::sample(const Configuration& x, Rng& rng) const
{
    if (x.empty()) {
        throw Error(Errc::EmptyConfiguration, "no point to remove");
    }
    if (std::holds_alternative<UniformDeath>(kind_)) {
        return x.remove(rng.below(x.count()));
    }
    auto w = weights(x);
    return x.remove(sample_index(w, rng));
}

const char* jump_type_name(JumpType t) noexcept
{
    return t == JumpType::Birth ? "birth" : "death";
}

std::pair<Configuration, JumpType> sample_jump(double beta, double delta, const BirthKernel& bk,
                                               const DeathKernel& dk, const Configuration& x, Rng& rng)
{
    const double alpha = beta + delta;
    if (!(alpha > 0)) {
        throw Error(Errc::ZeroIntensity, "no jump possible where alpha = 0");
    }
    if (rng.uniform() * alpha < beta) {
        return {bk.sample(x, rng), JumpType::Birth};
    }
    return {dk.sample(x, rng), JumpType::Death};
}

std::pair<Configuration, JumpType> sample_jump(const IntensitySpec& intens, const BirthKernel& bk,
                                               const DeathKernel& dk, const Configuration& x, Rng& rng)
{
    return sample_jump(intens.beta(x), intens.delta(x), bk, dk, x, rng);
}

Configuration uniform_configuration(const DomainPtr& w, std::size_t n, Rng& rng)
{
    const std::size_t d = w->dim();
    std::vector<double> flat(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            flat[i * d + k] = w->bounded() ? rng.uniform(w->lower(k), w->upper(k)) : rng.uniform(-5.0, 5.0);
        }
    }
    return Configuration(w, std::move(flat));
}

} // namespace bdm
