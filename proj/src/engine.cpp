#include "bdm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "bdm/error.hpp"

namespace bdm {

namespace {

constexpr double kBoundSlack = 1.0 + 1e-12;

std::vector<double> sorted_checkpoints(std::vector<double> cps, double horizon)
{
    for (double c : cps) {
        if (!(c >= 0) || c > horizon) {
            throw Error(Errc::InvalidArgument, "checkpoints must lie in [0, horizon]");
        }
    }
    std::sort(cps.begin(), cps.end());
    return cps;
}

void require_start(const Configuration& x0, double horizon)
{
    if (!(horizon > 0) || !std::isfinite(horizon)) {
        throw Error(Errc::InvalidArgument, "horizon must be positive and finite");
    }
    if (x0.domain().bounded()) {
        for (std::size_t i = 0; i < x0.count(); ++i) {
            if (!x0.domain().contains(x0.point(i))) {
                throw Error(Errc::PointOutsideDomain, "initial configuration leaves W");
            }
        }
    }
}

} // namespace

void ModelSpec::validate(std::uint64_t seed, std::size_t probes_per_count, std::size_t max_count) const
{
    if (!domain) {
        throw Error(Errc::InvalidArgument, "model has no domain");
    }
    Rng rng(seed, 1, 0);
    intensities.check_bound(domain, rng, probes_per_count, max_count);
}

ModelSpec gibbs_model(DomainPtr w, const GibbsPotential& g, GibbsNormalisation norm, double mover_step,
                      QuadratureSpec quad)
{
    double envelope = std::exp(-g.activity()) * g.envelope_integral(*w);
    IntensitySpec intens(GibbsBirthIntensity{g, quad, norm}, ConstantDeath{1.0}, envelope + 1.0);
    return ModelSpec{std::move(w), std::move(intens), BirthKernel(GibbsBirthKernel{g}), DeathKernel(UniformDeath{}),
                     MoverSpec(LangevinMove{g.pair(), 2.0}, mover_step)};
}

std::optional<JumpType> thinning_step(const ModelSpec& model, Configuration& y, Streams& s)
{
    const double astar = model.alpha_star();
    const double b = model.intensities.beta(y);
    const double d = model.intensities.delta(y);
    if (b + d > astar * kBoundSlack) {
        throw Error(Errc::ThinningBoundViolated,
                    "alpha(x) = " + std::to_string(b + d) + " exceeds alpha_star = " + std::to_string(astar));
    }
    if (!(s.wait.uniform() * astar < b + d)) {
        return std::nullopt;
    }
    auto [next, kind] = sample_jump(b, d, model.birth, model.death, y, s.kernel);
    y = std::move(next);
    return kind;
}

Configuration run_candidates(const ModelSpec& model, Configuration x, double t0, std::span<const double> candidates,
                             double t_end, Streams& s)
{
    double t = t0;
    for (double c : candidates) {
        x = model.mover.advance(x, c - t, s.move);
        t = c;
        thinning_step(model, x, s);
    }
    return model.mover.advance(x, t_end - t, s.move);
}

TrajectoryLog simulate(const ModelSpec& model, const Configuration& x0, double horizon, std::vector<double> checkpoints,
                       std::uint64_t seed, const SimulateOptions& opts)
{
    require_start(x0, horizon);
    checkpoints = sorted_checkpoints(std::move(checkpoints), horizon);
    const double astar = model.alpha_star();

    TrajectoryLog log{x0, {}, {}, horizon, seed};
    Streams s(seed);
    Configuration y = x0;
    double t = 0.0;
    std::size_t next_cp = 0;
    std::size_t budget = opts.state_budget;

    for (;;) {
        const double candidate = t + s.wait.exponential(astar);
        const double stop = std::min(candidate, horizon);
        while (next_cp < checkpoints.size() && checkpoints[next_cp] <= stop) {
            y = model.mover.advance(y, checkpoints[next_cp] - t, s.move);
            t = checkpoints[next_cp++];
            log.checkpoints.push_back({t, y});
        }
        if (candidate > horizon) {
            break;
        }
        y = model.mover.advance(y, candidate - t, s.move);
        t = candidate;

        auto jumped = thinning_step(model, y, s);
        if (!jumped) {
            continue;
        }
        const JumpType kind = *jumped;
        Event e{t, kind, y.count(), std::nullopt};
        if (y.count() <= budget) {
            budget -= y.count();
            e.state = y;
        } else {
            budget = 0;
        }
        log.events.push_back(std::move(e));
    }
    return log;
}

std::size_t count_at(const TrajectoryLog& log, double t)
{
    auto it = std::upper_bound(log.events.begin(), log.events.end(), t,
                               [](double v, const Event& e) { return v < e.t; });
    return it == log.events.begin() ? log.initial.count() : std::prev(it)->n;
}

// ---------------------------------------------------------------------------

const char* branch_name(CoupledBranch b) noexcept
{
    switch (b) {
    case CoupledBranch::JointJump: return "joint_jump";
    case CoupledBranch::EtaBirth: return "eta_birth";
    case CoupledBranch::EtaDeath: return "eta_death";
    case CoupledBranch::SimultaneousBirth: return "simultaneous_birth";
    case CoupledBranch::SimultaneousDeath: return "simultaneous_death";
    case CoupledBranch::XOnlyDeath: return "x_only_death";
    }
    return "?";
}

CoupledTrajectoryLog simulate_coupled(const ModelSpec& model, const SimpleChainSpec& chain, const Configuration& x0,
                                      std::size_t n0, double horizon, std::vector<double> checkpoints,
                                      std::uint64_t seed)
{
    require_start(x0, horizon);
    checkpoints = sorted_checkpoints(std::move(checkpoints), horizon);
    const double bound = 2.0 * model.alpha_star();

    CoupledTrajectoryLog log{x0, n0, {}, {}, horizon, seed};
    Streams s(seed);
    Configuration x = x0;
    std::size_t eta = n0;
    double t = 0.0;
    std::size_t next_cp = 0;

    for (;;) {
        const double candidate = t + s.wait.exponential(bound);
        const double stop = std::min(candidate, horizon);
        while (next_cp < checkpoints.size() && checkpoints[next_cp] <= stop) {
            x = model.mover.advance(x, checkpoints[next_cp] - t, s.move);
            t = checkpoints[next_cp++];
            log.checkpoints.push_back({t, x, eta});
        }
        if (candidate > horizon) {
            break;
        }
        x = model.mover.advance(x, candidate - t, s.move);
        t = candidate;

        const double b = model.intensities.beta(x);
        const double d = model.intensities.delta(x);
        const double bn = chain.beta(eta);
        const double dn = chain.delta(eta);
        const bool level = x.count() == eta;
        const double rate = level ? bn + d : b + d + bn + dn;
        if (rate > bound * kBoundSlack) {
            throw Error(Errc::ThinningBoundViolated, "coupled intensity " + std::to_string(rate) +
                                                         " exceeds 2 alpha_star = " + std::to_string(bound));
        }
        if (!(s.wait.uniform() * bound < rate)) {
            continue;
        }

        const double u = s.kernel.uniform() * rate;
        CoupledBranch branch;
        if (level) {
            if (bn * kBoundSlack < b || d * kBoundSlack < dn) {
                throw Error(Errc::NegativeKernelMass, "dominating rates fail beta_n >= beta(x) or delta(x) >= delta_n "
                                                      "at n = " + std::to_string(eta));
            }
            if (u < b) {
                branch = CoupledBranch::SimultaneousBirth;
            } else if (u < bn) {
                branch = CoupledBranch::EtaBirth;
            } else if (u < bn + dn) {
                branch = CoupledBranch::SimultaneousDeath;
            } else {
                branch = CoupledBranch::XOnlyDeath;
            }
        } else if (u < b + d) {
            branch = CoupledBranch::JointJump;
        } else if (u < b + d + bn) {
            branch = CoupledBranch::EtaBirth;
        } else {
            branch = CoupledBranch::EtaDeath;
        }

        switch (branch) {
        case CoupledBranch::JointJump: x = sample_jump(b, d, model.birth, model.death, x, s.kernel).first; break;
        case CoupledBranch::EtaBirth: ++eta; break;
        case CoupledBranch::EtaDeath: --eta; break;
        case CoupledBranch::SimultaneousBirth:
            x = model.birth.sample(x, s.kernel);
            ++eta;
            break;
        case CoupledBranch::SimultaneousDeath:
            x = model.death.sample(x, s.kernel);
            --eta;
            break;
        case CoupledBranch::XOnlyDeath: x = model.death.sample(x, s.kernel); break;
        }
        log.events.push_back({t, branch, x.count(), eta});
    }
    return log;
}

// ---------------------------------------------------------------------------

double poisson_tail(double lambda, std::size_t n)
{
    if (lambda <= 0) {
        return 0.0;
    }
    return boost::math::gamma_p(static_cast<double>(n) + 1.0, lambda);
}

DominationReport poisson_domination_report(const ModelSpec& model, const Configuration& x0, double t,
                                           std::size_t trials, std::uint64_t seed)
{
    if (trials == 0) {
        throw Error(Errc::InvalidArgument, "need at least one trial");
    }
    SimulateOptions opts;
    opts.state_budget = 0;
    auto counts = run_batch(trials, seed, [&](std::size_t, std::uint64_t s) {
        return simulate(model, x0, t, {}, s, opts).events.size();
    });
    const double lambda = model.alpha_star() * t;
    const auto top = static_cast<std::size_t>(std::ceil(3.0 * lambda));
    DominationReport rep{t, trials, {}, 0};
    for (std::size_t n = 0; n <= top; ++n) {
        auto exceed = std::count_if(counts.begin(), counts.end(), [n](std::size_t c) { return c > n; });
        double emp = static_cast<double>(exceed) / static_cast<double>(trials);
        double bound = poisson_tail(lambda, n);
        double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials));
        bool bad = emp > bound + 4.0 * sigma;
        rep.violations += bad ? 1 : 0;
        rep.rows.push_back({n, emp, bound, sigma, bad});
    }
    return rep;
}

unsigned default_threads() noexcept
{
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json points_json(const Configuration& x)
{
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < x.count(); ++i) {
        auto p = x.point(i);
        arr.push_back(std::vector<double>(p.begin(), p.end()));
    }
    return arr;
}

void header(std::ostream& os, const std::string& hash, std::uint64_t seed, double horizon)
{
    nlohmann::json h;
    h["model_hash"] = hash;
    h["seed"] = seed;
    h["horizon"] = horizon;
    os << h.dump() << '\n';
}

} // namespace

void write_jsonl(std::ostream& os, const TrajectoryLog& log, const std::string& model_hash)
{
    header(os, model_hash, log.seed, log.horizon);
    std::size_t c = 0;
    auto flush_checkpoints = [&](double upto) {
        for (; c < log.checkpoints.size() && log.checkpoints[c].t <= upto; ++c) {
            const auto& cp = log.checkpoints[c];
            nlohmann::json j;
            j["t"] = cp.t;
            j["kind"] = "checkpoint";
            j["n"] = cp.state.count();
            j["points"] = points_json(cp.state);
            os << j.dump() << '\n';
        }
    };
    for (const auto& e : log.events) {
        flush_checkpoints(e.t);
        nlohmann::json j;
        j["t"] = e.t;
        j["kind"] = jump_type_name(e.kind);
        j["n"] = e.n;
        if (e.state) {
            j["points"] = points_json(*e.state);
        }
        os << j.dump() << '\n';
    }
    flush_checkpoints(log.horizon);
}

void write_jsonl(std::ostream& os, const CoupledTrajectoryLog& log, const std::string& model_hash)
{
    header(os, model_hash, log.seed, log.horizon);
    std::size_t c = 0;
    auto flush_checkpoints = [&](double upto) {
        for (; c < log.checkpoints.size() && log.checkpoints[c].t <= upto; ++c) {
            const auto& cp = log.checkpoints[c];
            nlohmann::json j;
            j["t"] = cp.t;
            j["kind"] = "checkpoint";
            j["n"] = cp.x.count();
            j["eta"] = cp.eta;
            j["points"] = points_json(cp.x);
            os << j.dump() << '\n';
        }
    };
    for (const auto& e : log.events) {
        flush_checkpoints(e.t);
        nlohmann::json j;
        j["t"] = e.t;
        j["kind"] = branch_name(e.branch);
        j["n"] = e.n_x;
        j["eta"] = e.eta;
        os << j.dump() << '\n';
    }
    flush_checkpoints(log.horizon);
}

} // namespace bdm
