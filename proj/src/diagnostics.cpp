#include "bdm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdm/error.hpp"
#include "bdm/stats.hpp"

namespace bdm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr std::size_t kStrata = 5; // candidate counts 0..4 on [0, h]

struct PairedSample {
    double lhs;
    double rhs;
};

double check_rate(double rate, double astar)
{
    if (rate > astar * (1.0 + 1e-12)) {
        throw Error(Errc::ThinningBoundViolated,
                    "alpha(x) = " + std::to_string(rate) + " exceeds alpha_star = " + std::to_string(astar));
    }
    return rate;
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Least-squares slope of log(y) against t.
double log_slope(const std::vector<double>& t, const std::vector<double>& y)
{
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double ly = std::log(std::max(y[i], 1e-300));
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

} // namespace

double evaluate(const TestFunction& f, const Configuration& x)
{
    const auto n = static_cast<double>(x.count());
    return std::visit(Overloaded{
                          [&](const CountIndicator& c) { return x.count() == c.k ? 1.0 : 0.0; },
                          [&](const CountExponential& c) { return std::exp(-c.theta * n); },
                          [&](const SmoothCylinder& c) {
                              const auto centre = x.domain().center();
                              double s = 0.0;
                              for (std::size_t i = 0; i < x.count(); ++i) {
                                  double r = euclidean_distance(x.point(i), centre);
                                  s += r * r;
                              }
                              return std::exp(-c.theta * n - s / (c.width * c.width));
                          },
                      },
                      f);
}

std::string test_function_name(const TestFunction& f)
{
    return std::visit(Overloaded{
                          [](const CountIndicator& c) { return "count_indicator(" + std::to_string(c.k) + ")"; },
                          [](const CountExponential&) { return std::string("count_exponential"); },
                          [](const SmoothCylinder&) { return std::string("smooth_cylinder"); },
                      },
                      f);
}

// ---------------------------------------------------------------------------

GeneratorEstimate generator_estimate(const ModelSpec& model, const Configuration& x, const TestFunction& f, double h,
                                     std::size_t trials, std::uint64_t seed)
{
    if (!(h > 0)) {
        throw Error(Errc::InvalidArgument, "generator check needs h > 0");
    }
    if (trials < 2) {
        throw Error(Errc::InvalidArgument, "generator check needs at least two trials");
    }
    const double astar = model.alpha_star();
    const double f0 = evaluate(f, x);
    const double bx = model.intensities.beta(x);
    const double dx = model.intensities.delta(x);
    const double ax = check_rate(bx + dx, astar);

    const double lambda = astar * h;
    std::vector<double> weight(kStrata);
    weight[0] = std::exp(-lambda);
    for (std::size_t k = 1; k < kStrata; ++k) {
        weight[k] = weight[k - 1] * lambda / static_cast<double>(k);
    }
    double covered = 0.0;
    for (double w : weight) {
        covered += w;
    }

    auto samples = run_batch(trials, seed, [&](std::size_t, std::uint64_t s) {
        Rng aux(s, 3, 0);
        Rng move(s, 0, 2);
        Rng kernel(s, 0, 1);

        // One candidate at s1: both thinning outcomes, continuing the same mover path.
        const double s1 = h * aux.uniform();
        Configuration ys = model.mover.advance(x, s1, move);
        Rng move_after_jump = move;
        Rng kernel_at_x = kernel;
        const Configuration yh = model.mover.advance(ys, h - s1, move);
        const double fy = evaluate(f, yh);

        const double bs = model.intensities.beta(ys);
        const double ds = model.intensities.delta(ys);
        const double p = check_rate(bs + ds, astar) / astar;
        double fz = f0;
        if (p > 0) {
            auto jumped = sample_jump(bs, ds, model.birth, model.death, ys, kernel).first;
            fz = evaluate(f, model.mover.advance(jumped, h - s1, move_after_jump));
        }
        double fj = f0;
        if (ax > 0) {
            fj = evaluate(f, sample_jump(bx, dx, model.birth, model.death, x, kernel_at_x).first);
        }

        double higher = 0.0;
        for (std::size_t k = 2; k < kStrata; ++k) {
            std::vector<double> times(k);
            for (double& t : times) {
                t = h * aux.uniform();
            }
            std::sort(times.begin(), times.end());
            Streams st(s);
            const auto id = static_cast<std::uint32_t>(k);
            st.wait = Rng(s, id, 0);
            st.kernel = Rng(s, id, 1);
            st.move = Rng(s, id, 2);
            higher += weight[k] * (evaluate(f, run_candidates(model, x, 0.0, times, h, st)) - f0);
        }

        double lhs = (weight[0] * (fy - f0) + weight[1] * (p * (fz - f0) + (1.0 - p) * (fy - f0)) + higher) / h;
        double rhs = (fy - f0) / h + ax * (fj - f0);
        return PairedSample{lhs, rhs};
    });

    std::vector<double> lhs(trials), rhs(trials), diff(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        lhs[i] = samples[i].lhs;
        rhs[i] = samples[i].rhs;
        diff[i] = lhs[i] - rhs[i];
    }
    GeneratorEstimate e;
    e.h = h;
    e.lhs = stats::mean(lhs);
    e.rhs = stats::mean(rhs);
    e.residual = stats::mean(diff);
    e.stderr_ = stats::standard_error(diff);
    e.combined_stderr = std::hypot(stats::standard_error(lhs), stats::standard_error(rhs));
    e.truncation = 2.0 * std::max(0.0, 1.0 - covered) / h;
    return e;
}

GeneratorReport generator_check(const ModelSpec& model, const Configuration& x, const TestFunction& f, double h,
                                std::size_t trials, std::uint64_t seed)
{
    GeneratorReport r;
    r.coarse = generator_estimate(model, x, f, h, trials, seed);
    r.fine = generator_estimate(model, x, f, h / 2.0, trials, seed);
    r.slope = 2.0 * (r.coarse.residual - r.fine.residual) / h;
    r.ratio = r.fine.residual != 0.0 ? r.coarse.residual / r.fine.residual : std::numeric_limits<double>::quiet_NaN();
    const double c = std::abs(r.slope);
    r.within_coarse =
        std::abs(r.coarse.residual) <= 3.0 * r.coarse.combined_stderr + c * h + r.coarse.truncation;
    r.within_fine =
        std::abs(r.fine.residual) <= 3.0 * r.fine.combined_stderr + c * h / 2.0 + r.fine.truncation;
    r.ratio_ok = r.ratio >= 1.5 && r.ratio <= 2.5;
    r.pass = r.within_coarse && r.within_fine && r.ratio_ok;
    return r;
}

// ---------------------------------------------------------------------------

double mh_birth_ratio(const GibbsPotential& g, const Configuration& x, std::span<const double> xi)
{
    return x.domain().volume() * std::exp(-g.energy_delta(x, xi)) / static_cast<double>(x.count() + 1);
}

double mh_death_ratio(const GibbsPotential& g, const Configuration& x, std::size_t i)
{
    Configuration rest = x.remove(i);
    return static_cast<double>(x.count()) * std::exp(g.energy_delta(rest, x.point(i))) / x.domain().volume();
}

std::vector<Configuration> mcmc_gibbs_oracle(const GibbsPotential& g, const DomainPtr& w, std::size_t samples,
                                             std::uint64_t seed, const OracleOptions& opts)
{
    if (!w->bounded()) {
        throw Error(Errc::UnboundedDomain, "the Gibbs oracle needs a bounded domain");
    }
    if (opts.thin == 0) {
        throw Error(Errc::InvalidArgument, "oracle thinning must be at least 1");
    }
    Rng rng(seed, 4, 0);
    const std::size_t d = w->dim();
    std::vector<double> xi(d);
    Configuration x(w);
    std::vector<Configuration> out;
    out.reserve(samples);
    const std::size_t total = opts.burn_in + samples * opts.thin;
    for (std::size_t step = 1; step <= total; ++step) {
        if (rng.uniform() < 0.5) {
            for (std::size_t k = 0; k < d; ++k) {
                xi[k] = rng.uniform(w->lower(k), w->upper(k));
            }
            if (rng.uniform() < mh_birth_ratio(g, x, xi)) {
                x = x.insert(xi);
            }
        } else if (!x.empty()) {
            std::size_t i = rng.below(x.count());
            if (rng.uniform() < mh_death_ratio(g, x, i)) {
                x = x.remove(i);
            }
        }
        if (step > opts.burn_in && (step - opts.burn_in) % opts.thin == 0) {
            out.push_back(x);
        }
    }
    return out;
}

std::vector<double> nearest_neighbour_distances(const std::vector<Configuration>& xs)
{
    std::vector<double> out;
    for (const auto& x : xs) {
        const std::size_t n = x.count();
        if (n < 2) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    best = std::min(best, euclidean_distance(x.point(i), x.point(j)));
                }
            }
            out.push_back(best);
        }
    }
    return out;
}

std::vector<Configuration> bdm_long_run_samples(const ModelSpec& model, double burn_in, std::size_t n_samples,
                                                std::uint64_t seed, std::size_t chains, double spacing)
{
    if (chains == 0 || !(spacing > 0) || !(burn_in >= 0)) {
        throw Error(Errc::InvalidArgument, "long-run sampling needs chains >= 1, spacing > 0, burn_in >= 0");
    }
    const std::size_t per_chain = (n_samples + chains - 1) / chains;
    std::vector<double> cps(per_chain);
    for (std::size_t j = 0; j < per_chain; ++j) {
        cps[j] = burn_in + static_cast<double>(j + 1) * spacing;
    }
    const double horizon = cps.empty() ? burn_in + spacing : cps.back();
    SimulateOptions opts;
    opts.state_budget = 0;
    auto logs = run_batch(chains, seed, [&](std::size_t, std::uint64_t s) {
        return simulate(model, Configuration(model.domain), horizon, cps, s, opts).checkpoints;
    });
    std::vector<Configuration> out;
    out.reserve(n_samples);
    for (std::size_t j = 0; j < per_chain; ++j) {
        for (const auto& log : logs) {
            if (out.size() < n_samples) {
                out.push_back(log[j].state);
            }
        }
    }
    return out;
}

GibbsReport gibbs_invariance_check(const ModelSpec& model, double burn_in, std::size_t n_samples, std::uint64_t seed,
                                   const GibbsCheckOptions& opts)
{
    const auto* gk = std::get_if<GibbsBirthKernel>(&model.birth.kind());
    if (gk == nullptr) {
        throw Error(Errc::InvalidArgument, "Gibbs invariance needs a Gibbs birth kernel to define the target");
    }
    if (n_samples == 0) {
        throw Error(Errc::InvalidArgument, "need at least one sample");
    }
    std::vector<Configuration> a = opts.oracle_vs_oracle
                                       ? mcmc_gibbs_oracle(gk->potential, model.domain, n_samples,
                                                           derive_seed(seed, 1), opts.oracle)
                                       : bdm_long_run_samples(model, burn_in, n_samples, seed, opts.chains,
                                                              opts.spacing);
    const std::size_t n_ref = opts.oracle_samples == 0 ? n_samples : opts.oracle_samples;
    std::vector<Configuration> b =
        mcmc_gibbs_oracle(gk->potential, model.domain, n_ref, derive_seed(seed, 2), opts.oracle);

    auto counts = [](const std::vector<Configuration>& xs) {
        std::vector<std::size_t> c;
        c.reserve(xs.size());
        for (const auto& x : xs) {
            c.push_back(x.count());
        }
        return c;
    };
    GibbsReport r;
    r.samples = a.size();
    r.count_law = stats::frequencies(counts(a));
    r.oracle_count_law = stats::frequencies(counts(b));
    r.count_tv = stats::total_variation(r.count_law, r.oracle_count_law);
    auto nn_a = nearest_neighbour_distances(a);
    auto nn_b = nearest_neighbour_distances(b);
    r.mean_nn = stats::mean(nn_a);
    r.oracle_mean_nn = stats::mean(nn_b);
    r.nn_ks = nn_a.empty() || nn_b.empty() ? 0.0 : stats::ks_two_sample(nn_a, nn_b).statistic;
    r.pass = r.count_tv <= opts.tv_threshold && r.nn_ks <= opts.ks_threshold;
    return r;
}

// ---------------------------------------------------------------------------

CouplingReport coupling_check(const ModelSpec& model, const SimpleChainSpec& chain, const Configuration& x0,
                              std::size_t n0, const std::vector<double>& t_list, std::size_t trials,
                              std::uint64_t seed)
{
    if (t_list.empty() || trials == 0) {
        throw Error(Errc::InvalidArgument, "coupling check needs times and trials");
    }
    const double horizon = *std::max_element(t_list.begin(), t_list.end());
    struct Sample {
        std::vector<std::size_t> eta, nx, chain, process;
        bool violated;
    };
    SimulateOptions opts;
    opts.state_budget = 0;
    auto samples = run_batch(trials, seed, [&](std::size_t i, std::uint64_t s) {
        Sample out{{}, {}, {}, {}, x0.count() > n0};
        auto coupled = simulate_coupled(model, chain, x0, n0, horizon, t_list, s);
        for (const auto& e : coupled.events) {
            out.violated = out.violated || e.n_x > e.eta;
        }
        auto solo_chain = simulate_chain(chain, n0, horizon, derive_seed(seed ^ 0x9e3779b97f4a7c15ull, i));
        auto solo = simulate(model, x0, horizon, {}, derive_seed(seed ^ 0x632be59bd9b4e019ull, i), opts);
        for (double t : t_list) {
            auto it = std::find_if(coupled.checkpoints.begin(), coupled.checkpoints.end(),
                                   [t](const CoupledCheckpoint& c) { return c.t == t; });
            out.eta.push_back(it->eta);
            out.nx.push_back(it->x.count());
            out.violated = out.violated || it->x.count() > it->eta;
            out.chain.push_back(chain_state_at(solo_chain, t));
            out.process.push_back(count_at(solo, t));
        }
        return out;
    });

    CouplingReport r;
    r.trajectories = trials;
    r.domination_expected = x0.count() <= n0;
    bool tests_ok = true;
    for (std::size_t k = 0; k < t_list.size(); ++k) {
        std::vector<std::size_t> eta, nx, ch, pr;
        for (const auto& s : samples) {
            eta.push_back(s.eta[k]);
            nx.push_back(s.nx[k]);
            ch.push_back(s.chain[k]);
            pr.push_back(s.process[k]);
        }
        CouplingRow row{t_list[k], stats::chi_square_two_sample(eta, ch).p_value,
                        stats::chi_square_two_sample(nx, pr).p_value};
        tests_ok = tests_ok && row.p_chain > 0.01 && row.p_process > 0.01;
        r.rows.push_back(row);
    }
    for (const auto& s : samples) {
        r.violations += s.violated ? 1 : 0;
    }
    r.pass = tests_ok && (!r.domination_expected || r.violations == 0);
    return r;
}

// ---------------------------------------------------------------------------

RateEstimate rate_estimate(const ModelSpec& model, const Configuration& x0, const Configuration& y0,
                           const std::vector<double>& t_grid, std::size_t trials, std::uint64_t seed,
                           std::size_t bootstrap)
{
    if (t_grid.empty() || trials < 2) {
        throw Error(Errc::InvalidArgument, "rate estimate needs a time grid and at least two trials");
    }
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end() || !(t_grid.front() > 0)) {
        throw Error(Errc::InvalidArgument, "time grid must be positive and strictly increasing");
    }
    const double horizon = t_grid.back();
    SimulateOptions opts;
    opts.state_budget = 0;
    auto run = [&](const Configuration& start, std::uint64_t base) {
        return run_batch(trials, base, [&](std::size_t, std::uint64_t s) {
            auto log = simulate(model, start, horizon, {}, s, opts);
            std::vector<std::size_t> n;
            for (double t : t_grid) {
                n.push_back(count_at(log, t));
            }
            return n;
        });
    };
    auto a = run(x0, seed);
    auto b = run(y0, seed ^ 0xa0761d6478bd642full);

    auto tv_at = [&](std::size_t k, const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib) {
        std::vector<std::size_t> ca, cb;
        ca.reserve(ia.size());
        cb.reserve(ib.size());
        for (std::size_t i : ia) {
            ca.push_back(a[i][k]);
        }
        for (std::size_t i : ib) {
            cb.push_back(b[i][k]);
        }
        return stats::total_variation(stats::frequencies(ca), stats::frequencies(cb));
    };

    std::vector<std::size_t> all(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        all[i] = i;
    }
    RateEstimate r;
    r.times = t_grid;
    const double n = static_cast<double>(trials);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        r.tv.push_back(tv_at(k, all, all));
        std::vector<std::size_t> ca, cb;
        for (std::size_t i = 0; i < trials; ++i) {
            ca.push_back(a[i][k]);
            cb.push_back(b[i][k]);
        }
        auto pa = stats::frequencies(ca), pb = stats::frequencies(cb);
        double floor = 0.0;
        for (std::size_t m = 0; m < std::max(pa.size(), pb.size()); ++m) {
            double u = m < pa.size() ? pa[m] : 0.0, v = m < pb.size() ? pb[m] : 0.0;
            floor += std::sqrt((u * (1 - u) + v * (1 - v)) / n);
        }
        r.noise_floor.push_back(0.5 * floor);
        r.fitted.push_back(r.tv.back() > 5.0 * r.noise_floor.back());
    }

    std::vector<double> ft, fy;
    std::vector<std::size_t> fk;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (r.fitted[k]) {
            ft.push_back(t_grid[k]);
            fy.push_back(r.tv[k]);
            fk.push_back(k);
        }
    }
    r.fit_ok = ft.size() >= 2;
    if (!r.fit_ok) {
        return r;
    }
    r.slope = log_slope(ft, fy);
    r.r_hat = std::exp(r.slope);

    Rng rng(seed, 5, 0);
    std::vector<double> slopes;
    slopes.reserve(bootstrap);
    std::vector<std::size_t> ia(trials), ib(trials);
    for (std::size_t rep = 0; rep < bootstrap; ++rep) {
        for (std::size_t i = 0; i < trials; ++i) {
            ia[i] = rng.below(trials);
            ib[i] = rng.below(trials);
        }
        std::vector<double> by;
        for (std::size_t k : fk) {
            by.push_back(tv_at(k, ia, ib));
        }
        slopes.push_back(log_slope(ft, by));
    }
    if (!slopes.empty()) {
        r.ci_low = std::exp(quantile(slopes, 0.025));
        r.ci_high = std::exp(quantile(slopes, 0.975));
    }
    return r;
}

} // namespace bdm
