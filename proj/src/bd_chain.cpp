#include "bdm/bd_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/error.hpp"
#include "bdm/rng.hpp"

namespace bdm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

// lim beta_n / delta_{n+1} for power-law tails; +inf encodes divergence.
double ratio_limit(const PowerLaw& b, const PowerLaw& d)
{
    if (b.power < d.power) {
        return 0.0;
    }
    if (b.power > d.power) {
        return std::numeric_limits<double>::infinity();
    }
    return b.coef / d.coef;
}

// beta_n <= delta_{n+1} for all large n.
bool eventually_le(const PowerLaw& b, const PowerLaw& d)
{
    if (b.power != d.power) {
        return b.power < d.power;
    }
    if (b.coef != d.coef) {
        return b.coef < d.coef;
    }
    // Equal leading terms: (n + s_b)^p <= (n + 1 + s_d)^p.
    if (b.power == 0.0) {
        return true;
    }
    return b.power > 0 ? b.shift <= 1.0 + d.shift : b.shift >= 1.0 + d.shift;
}

} // namespace

double PowerLaw::operator()(std::size_t n) const
{
    if (power == 0.0) {
        return coef;
    }
    return coef * std::pow(static_cast<double>(n) + shift, power);
}

SimpleChainSpec SimpleChainSpec::constant(double lambda, double mu)
{
    SimpleChainSpec c;
    c.family = "constant";
    c.beta_tail = PowerLaw{lambda, 0.0, 0.0};
    c.delta_tail = PowerLaw{mu, 0.0, 0.0};
    c.validate();
    return c;
}

SimpleChainSpec SimpleChainSpec::mm_infinity(double lambda, double mu)
{
    SimpleChainSpec c;
    c.family = "mm_infinity";
    c.beta_tail = PowerLaw{lambda, 0.0, 0.0};
    c.delta_tail = PowerLaw{mu, 0.0, 1.0};
    c.validate();
    return c;
}

SimpleChainSpec SimpleChainSpec::gibbs_envelope(double b, GibbsNormalisation norm)
{
    SimpleChainSpec c;
    c.family = "gibbs_envelope";
    if (norm == GibbsNormalisation::NPlusOne) {
        c.beta_tail = PowerLaw{b, 1.0, -1.0};
    } else {
        c.beta_head = {b};
        c.beta_tail = PowerLaw{b, 0.0, -1.0};
    }
    c.delta_tail = PowerLaw{1.0, 0.0, 0.0};
    c.validate();
    return c;
}

SimpleChainSpec SimpleChainSpec::explicit_arrays(std::vector<double> beta, std::vector<double> delta)
{
    SimpleChainSpec c;
    c.family = "explicit";
    c.beta_head = std::move(beta);
    c.delta_head = std::move(delta);
    c.validate();
    return c;
}

SimpleChainSpec SimpleChainSpec::with_cutoff(std::size_t n0) const
{
    SimpleChainSpec c = *this;
    c.birth_cutoff = n0;
    c.validate();
    return c;
}

SimpleChainSpec SimpleChainSpec::dominating(const IntensitySpec& intens, const Domain& w)
{
    SimpleChainSpec c;
    c.family = "dominating";
    std::visit(Overloaded{
                   [&](const ConstantBirth& b) {
                       c.beta_tail = PowerLaw{b.rate, 0.0, 0.0};
                       c.birth_cutoff = b.cutoff;
                   },
                   [&](const GibbsBirthIntensity& b) {
                       double env = std::exp(-b.potential.activity()) * b.potential.envelope_integral(w);
                       if (b.normalisation == GibbsNormalisation::NPlusOne) {
                           c.beta_tail = PowerLaw{env, 1.0, -1.0};
                       } else {
                           c.beta_head = {env};
                           c.beta_tail = PowerLaw{env, 0.0, -1.0};
                       }
                   },
                   [](const CustomIntensity&) {
                       throw Error(Errc::UnsupportedFamily, "no closed-form dominating rates for a custom birth intensity");
                   },
               },
               intens.birth());
    std::visit(Overloaded{
                   [&](const ConstantDeath& d) { c.delta_tail = PowerLaw{d.rate, 0.0, 0.0}; },
                   [&](const LinearDeath& d) {
                       c.delta_head.resize(d.cap + 1);
                       for (std::size_t n = 0; n <= d.cap; ++n) {
                           c.delta_head[n] = d.rate * static_cast<double>(n);
                       }
                       c.delta_tail = PowerLaw{d.rate * static_cast<double>(d.cap), 0.0, 0.0};
                   },
                   [](const CustomIntensity&) {
                       throw Error(Errc::UnsupportedFamily, "no closed-form dominating rates for a custom death intensity");
                   },
               },
               intens.death());
    c.validate();
    return c;
}

double SimpleChainSpec::beta(std::size_t n) const
{
    if (birth_cutoff && n >= *birth_cutoff) {
        return 0.0;
    }
    if (n < beta_head.size()) {
        return beta_head[n];
    }
    if (beta_tail) {
        return (*beta_tail)(n);
    }
    throw Error(Errc::InvalidArgument, "beta_" + std::to_string(n) + " lies beyond the explicit rates");
}

double SimpleChainSpec::delta(std::size_t n) const
{
    if (n == 0) {
        return 0.0;
    }
    if (n < delta_head.size()) {
        return delta_head[n];
    }
    if (delta_tail) {
        return (*delta_tail)(n);
    }
    throw Error(Errc::InvalidArgument, "delta_" + std::to_string(n) + " lies beyond the explicit rates");
}

std::optional<std::size_t> SimpleChainSpec::birth_stop() const
{
    std::optional<std::size_t> stop = birth_cutoff;
    if (beta_tail && beta_tail->coef == 0.0) {
        stop = std::min(stop.value_or(beta_head.size()), beta_head.size());
    }
    if (!stop) {
        return std::nullopt;
    }
    std::size_t n = std::min(*stop, beta_head.size());
    if (n < *stop) {
        // Head ends before the cutoff and the tail supplies positive rates in between.
        return stop;
    }
    while (n > 0 && beta_head[n - 1] == 0.0) {
        --n;
    }
    return n;
}

bool SimpleChainSpec::has_tail_rule() const noexcept
{
    auto stop = birth_stop();
    bool beta_all = beta_tail.has_value() || stop.has_value();
    bool delta_all = delta_tail.has_value() || (stop && *stop < delta_head.size());
    return beta_all && delta_all;
}

void SimpleChainSpec::validate() const
{
    if (delta_head.empty() || delta_head[0] != 0.0) {
        throw Error(Errc::InvalidArgument, "chain needs delta_0 = 0");
    }
    auto nonneg = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double r) { return r >= 0 && std::isfinite(r); });
    };
    if (!nonneg(beta_head) || !nonneg(delta_head)) {
        throw Error(Errc::InvalidArgument, "chain rates must be finite and non-negative");
    }
    for (const auto* t : {&beta_tail, &delta_tail}) {
        if (*t && (!((*t)->coef >= 0) || !std::isfinite((*t)->coef) || !std::isfinite((*t)->power) ||
                   !std::isfinite((*t)->shift))) {
            throw Error(Errc::InvalidArgument, "chain tail rule needs a finite non-negative coefficient");
        }
    }
}

// ---------------------------------------------------------------------------

ChainLog simulate_chain(const SimpleChainSpec& c, std::size_t n0, double horizon, std::uint64_t seed)
{
    if (!(horizon > 0)) {
        throw Error(Errc::InvalidArgument, "horizon must be positive");
    }
    Streams s(seed);
    ChainLog log;
    log.n0 = n0;
    log.horizon = horizon;
    std::size_t n = n0;
    double t = 0.0;
    for (;;) {
        double b = c.beta(n), d = c.delta(n);
        double rate = b + d;
        if (rate == 0.0) {
            log.absorbed = true;
            break;
        }
        t += s.wait.exponential(rate);
        if (t > horizon) {
            break;
        }
        n = s.kernel.uniform() * rate < b ? n + 1 : n - 1;
        log.events.push_back({t, n});
    }
    return log;
}

std::size_t chain_state_at(const ChainLog& log, double t)
{
    auto it = std::upper_bound(log.events.begin(), log.events.end(), t,
                               [](double v, const ChainEvent& e) { return v < e.t; });
    return it == log.events.begin() ? log.n0 : std::prev(it)->n;
}

std::vector<double> occupancy(const ChainLog& log)
{
    std::size_t top = log.n0;
    for (const auto& e : log.events) {
        top = std::max(top, e.n);
    }
    std::vector<double> occ(top + 1, 0.0);
    double t = 0.0;
    std::size_t n = log.n0;
    for (const auto& e : log.events) {
        occ[n] += e.t - t;
        t = e.t;
        n = e.n;
    }
    occ[n] += log.horizon - t;
    for (double& v : occ) {
        v /= log.horizon;
    }
    return occ;
}

const char* verdict_name(ErgodicityVerdict v) noexcept
{
    switch (v) {
    case ErgodicityVerdict::Eq30: return "Eq30";
    case ErgodicityVerdict::Eq31: return "Eq31";
    case ErgodicityVerdict::Inconclusive: return "Inconclusive";
    case ErgodicityVerdict::Fails: return "Fails";
    }
    return "?";
}

const char* verdict_name(RateVerdict v) noexcept
{
    switch (v) {
    case RateVerdict::Eq32: return "Eq32";
    case RateVerdict::Eq33: return "Eq33";
    case RateVerdict::Corollary: return "Corollary";
    case RateVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

ErgodicityReport ergodicity_check(const SimpleChainSpec& c, std::size_t n_probe)
{
    c.validate();
    ErgodicityReport r;
    auto say = [&](std::string line) { r.rationale.push_back(std::move(line)); };

    if (auto stop = c.birth_stop()) {
        std::size_t n0 = std::max<std::size_t>(*stop, 1);
        say("beta_n = 0 for all n >= " + std::to_string(n0));
        for (std::size_t n = 1; n <= n0; ++n) {
            double d = 0.0;
            try {
                d = c.delta(n);
            } catch (const Error&) {
                say("delta_" + std::to_string(n) + " is not given");
                return r;
            }
            if (!(d > 0)) {
                say("delta_" + std::to_string(n) + " = 0 below the birth cutoff");
                return r;
            }
        }
        say("delta_n > 0 for 1 <= n <= " + std::to_string(n0));
        r.verdict = ErgodicityVerdict::Eq30;
        return r;
    }
    if (!c.has_tail_rule()) {
        say("rates known on finitely many states only; no series certificate is possible");
        return r;
    }

    const std::size_t head = std::max(c.beta_head.size(), c.delta_head.size());
    const std::size_t scan = std::min(head + 1, std::max<std::size_t>(n_probe, 1));
    for (std::size_t n = 0; n < scan; ++n) {
        if (n >= 1 && !(c.delta(n) > 0)) {
            say("delta_" + std::to_string(n) + " = 0; positivity of delta_n for n >= 1 is required");
            return r;
        }
        if (!(c.beta(n) > 0)) {
            say("beta_" + std::to_string(n) + " = 0 with positive rates further up; neither condition applies");
            return r;
        }
    }
    const PowerLaw& b = *c.beta_tail;
    const PowerLaw& d = *c.delta_tail;
    if (!(d.coef > 0) || static_cast<double>(c.delta_head.size()) + d.shift <= 0) {
        say("delta tail is not positive");
        return r;
    }
    double lim = ratio_limit(b, d);
    say("beta_n / delta_{n+1} -> " + fmt(lim));
    if (lim < 1.0) {
        say("sum of beta_1..beta_{n-1} / (delta_1..delta_n) converges by the ratio test");
        say("sum of delta_1..delta_n / (beta_1..beta_n) diverges by the ratio test (limit " +
            fmt(lim == 0 ? std::numeric_limits<double>::infinity() : 1.0 / lim) + ")");
        r.verdict = ErgodicityVerdict::Eq31;
    } else if (lim > 1.0) {
        say("sum of beta_1..beta_{n-1} / (delta_1..delta_n) diverges by the ratio test");
        r.verdict = ErgodicityVerdict::Fails;
    } else {
        say("ratio limit 1: the ratio test is silent");
    }
    return r;
}

RateReport rate_condition_check(const SimpleChainSpec& c, const std::vector<double>& gamma)
{
    double mass = 0.0;
    std::size_t support = 0;
    for (std::size_t n = 0; n < gamma.size(); ++n) {
        if (!(gamma[n] >= 0)) {
            throw Error(Errc::InvalidArgument, "initial distribution must be non-negative");
        }
        mass += gamma[n];
        if (gamma[n] > 0) {
            support = n;
        }
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw Error(Errc::InvalidArgument, "initial distribution must sum to 1");
    }

    RateReport r;
    auto erg = ergodicity_check(c);
    r.rationale = erg.rationale;
    auto say = [&](std::string line) { r.rationale.push_back(std::move(line)); };

    if (erg.verdict == ErgodicityVerdict::Eq30) {
        std::size_t n0 = std::max<std::size_t>(*c.birth_stop(), 1);
        if (support <= n0) {
            say("initial law supported on {0.." + std::to_string(n0) + "}");
            r.verdict = RateVerdict::Eq32;
        } else {
            say("initial law charges n = " + std::to_string(support) + " above the cutoff " + std::to_string(n0));
        }
        return r;
    }
    if (erg.verdict != ErgodicityVerdict::Eq31) {
        say("no ergodicity certificate, no rate certificate");
        return r;
    }
    say("initial law has finite support: the weighted series is a finite sum");
    const PowerLaw& b = *c.beta_tail;
    const PowerLaw& d = *c.delta_tail;
    double lim = ratio_limit(b, d);
    bool sqrt_series = lim < 1.0;
    bool dominated = eventually_le(b, d);
    say(std::string("sum of sqrt(beta_1..beta_{n-1} / (delta_1..delta_n)) ") +
        (sqrt_series ? "converges (ratio -> " + fmt(std::sqrt(lim)) + ")" : "is not certified"));
    say(std::string("beta_n <= delta_{n+1} eventually: ") + (dominated ? "yes" : "no"));
    r.verdict = sqrt_series && dominated ? RateVerdict::Corollary : RateVerdict::Eq33;
    return r;
}

std::vector<double> stationary_distribution(const SimpleChainSpec& c, double tol)
{
    auto erg = ergodicity_check(c);
    if (erg.verdict != ErgodicityVerdict::Eq30 && erg.verdict != ErgodicityVerdict::Eq31) {
        throw Error(Errc::NotErgodic, std::string("stationary law needs an ergodicity certificate, got ") +
                                          verdict_name(erg.verdict));
    }
    if (!(tol > 0)) {
        throw Error(Errc::InvalidArgument, "tolerance must be positive");
    }
    std::vector<double> w{1.0};
    double sum = 1.0;
    auto push = [&](double v) {
        w.push_back(v);
        sum += v;
        if (v > 0x1.0p+600) {
            for (double& u : w) {
                u = std::ldexp(u, -600);
            }
            sum = std::ldexp(sum, -600);
        }
    };

    if (erg.verdict == ErgodicityVerdict::Eq30) {
        std::size_t stop = *c.birth_stop();
        for (std::size_t n = 1; n <= stop; ++n) {
            push(w.back() * (c.beta(n - 1) / c.delta(n)));
        }
    } else {
        const double lim = ratio_limit(*c.beta_tail, *c.delta_tail);
        const std::size_t head = std::max(c.beta_head.size(), c.delta_head.size());
        constexpr std::size_t kMaxStates = 10'000'000;
        for (std::size_t n = 1;; ++n) {
            push(w.back() * (c.beta(n - 1) / c.delta(n)));
            double r = std::max(c.beta(n) / c.delta(n + 1), lim);
            if (n >= head && r < 1.0 && w.back() * r / (1.0 - r) < tol * sum) {
                break;
            }
            if (n >= kMaxStates) {
                throw Error(Errc::NotErgodic, "stationary tail did not fall below tolerance");
            }
        }
    }
    for (double& v : w) {
        v /= sum;
    }
    return w;
}

double expected_return_time(const SimpleChainSpec& c, double tol)
{
    if (!(c.beta(0) > 0)) {
        throw Error(Errc::InvalidArgument, "beta_0 = 0: the chain never leaves 0");
    }
    auto pi = stationary_distribution(c, tol);
    return 1.0 / (pi[0] * c.beta(0));
}

ReturnTimeSample simulate_return_times(const SimpleChainSpec& c, std::size_t cycles, std::uint64_t seed)
{
    if (cycles < 2) {
        throw Error(Errc::InvalidArgument, "need at least two cycles");
    }
    if (!(c.beta(0) > 0)) {
        throw Error(Errc::InvalidArgument, "beta_0 = 0: the chain never leaves 0");
    }
    Streams s(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < cycles; ++k) {
        double t = s.wait.exponential(c.beta(0));
        std::size_t n = 1;
        while (n > 0) {
            double b = c.beta(n), d = c.delta(n);
            t += s.wait.exponential(b + d);
            n = s.kernel.uniform() * (b + d) < b ? n + 1 : n - 1;
        }
        double delta = t - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (t - mean);
    }
    double var = m2 / static_cast<double>(cycles - 1);
    return {mean, std::sqrt(var / static_cast<double>(cycles)), cycles};
}

} // namespace bdm
