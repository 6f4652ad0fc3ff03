#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "bdm/error.hpp"
#include "bdm/jump_kernels.hpp"
#include "bdm/stats.hpp"

using namespace bdm;

namespace {

DomainPtr unit_square() { return make_domain(Domain::box({0, 0}, {1, 1})); }

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }

// Integral of exp(-c u^2) over [a, b].
double gauss_integral(double c, double a, double b)
{
    double s = std::sqrt(c);
    return 0.5 * std::sqrt(M_PI / c) * (std::erf(s * b) - std::erf(s * a));
}

// Multiset inclusion on canonical point lists.
bool sub_multiset(const Configuration& small, const Configuration& big)
{
    auto a = small.points(), b = big.points();
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

TEST_SUITE("jump_kernels")
{
    TEST_CASE("death weights examples")
    {
        auto w = make_domain(Domain::box({-5}, {5}));
        auto x4 = Configuration::from_points(w, {{0}, {1}, {2}, {4}});
        for (double p : death_weights(WeightedDeath{RadialFunction::constant(1.0)}, x4)) {
            CHECK(p == doctest::Approx(0.25));
        }
        auto one = death_weights(WeightedDeath{RadialFunction::power(1.0, 1.0)}, Configuration::from_points(w, {{2}}));
        REQUIRE(one.size() == 1);
        CHECK(one[0] == 1.0);
        auto p = death_weights(WeightedDeath{RadialFunction::power(1.0, 1.0)}, Configuration::from_points(w, {{0}, {1}, {3}}));
        CHECK(p[0] == doctest::Approx(4.0 / 12));
        CHECK(p[1] == doctest::Approx(3.0 / 12));
        CHECK(p[2] == doctest::Approx(5.0 / 12));
        CHECK_THROWS_AS(death_weights(WeightedDeath{RadialFunction::constant(1.0)}, Configuration(w)), Error);
    }

    TEST_CASE("weighted death frequencies follow the weights")
    {
        auto w = make_domain(Domain::box({-5}, {5}));
        auto x = Configuration::from_points(w, {{0}, {1}, {3}});
        DeathKernel k(WeightedDeath{RadialFunction::power(1.0, 1.0)});
        Rng rng(5);
        const int n = 100000;
        std::vector<int> removed(3, 0);
        for (int i = 0; i < n; ++i) {
            auto y = k.sample(x, rng);
            REQUIRE(y.count() == 2);
            for (std::size_t j = 0; j < 3; ++j) {
                removed[j] += x.remove(j) == y;
            }
        }
        const double expect[3] = {4.0 / 12, 3.0 / 12, 5.0 / 12};
        for (int j = 0; j < 3; ++j) {
            double sigma = std::sqrt(expect[j] * (1 - expect[j]) / n);
            CHECK(std::abs(removed[j] / double(n) - expect[j]) < 3 * sigma);
        }
    }

    TEST_CASE("uniform death on two points is a fair coin")
    {
        auto w = unit_square();
        auto x = Configuration::from_points(w, {{0.2, 0.2}, {0.8, 0.5}});
        DeathKernel k(UniformDeath{});
        Rng rng(6);
        std::vector<std::size_t> obs;
        for (int i = 0; i < 100000; ++i) {
            obs.push_back(k.sample(x, rng) == x.remove(0) ? 0 : 1);
        }
        CHECK(stats::chi_square_gof(obs, {0.5, 0.5}).p_value > 1e-3);
        auto single = Configuration::from_points(w, {{0.3, 0.3}});
        CHECK(k.sample(single, rng).empty());
        CHECK(DeathKernel(WeightedDeath{RadialFunction::constant(2.0)}).sample(single, rng).empty());
    }

    TEST_CASE("Gibbs birth with the zero pair is uniform on W")
    {
        BirthKernel k(GibbsBirthKernel{GibbsPotential(0.0, PairPotential::zero())});
        auto w = unit_square();
        auto x = Configuration::from_points(w, {{0.5, 0.5}});
        Rng rng(7);
        std::vector<double> u, v;
        for (int i = 0; i < 100000; ++i) {
            auto y = k.sample(Configuration(w), rng);
            u.push_back(y.point(0)[0]);
            v.push_back(y.point(0)[1]);
        }
        auto cdf = [](double t) { return std::clamp(t, 0.0, 1.0); };
        CHECK(stats::ks_one_sample(u, cdf).p_value > 1e-3);
        CHECK(stats::ks_one_sample(v, cdf).p_value > 1e-3);
    }

    TEST_CASE("mixture birth from the empty configuration draws from the bare density")
    {
        auto w = make_domain(Domain::box({-10, -10}, {10, 10}));
        BirthKernel k(MixtureBirth{0.5, RadialFunction::constant(0.7), RadialFunction::constant(0.0)});
        Rng rng(8);
        std::vector<double> u, v;
        for (int i = 0; i < 50000; ++i) {
            auto y = k.sample(Configuration(w), rng);
            u.push_back(y.point(0)[0]);
            v.push_back(y.point(0)[1]);
        }
        auto cdf = [](double t) { return normal_cdf(t, 0.5); };
        CHECK(stats::ks_one_sample(u, cdf).p_value > 1e-3);
        CHECK(stats::ks_one_sample(v, cdf).p_value > 1e-3);
    }

    TEST_CASE("mixture dispersion evaluates the exponent exactly")
    {
        auto w = make_domain(Domain::box({0}, {4}));
        MixtureBirth m{0.1, RadialFunction::exp_decay(1.0, 0.5), RadialFunction::power(0.25, 1.0)};
        auto x = Configuration::from_points(w, {{1}, {2.5}, {3}});
        // centre 2: phi1(|1-2|) = exp(-2); phi2 over the others: 0.25 * (1.5 + 2)
        CHECK(BirthKernel::dispersion(m, x, 0) == doctest::Approx(std::exp(std::exp(-2.0) + 0.25 * 3.5)));
    }

    TEST_CASE("mixture birth with one centre is a truncated Gaussian around it")
    {
        auto w = make_domain(Domain::box({0}, {1}));
        auto x = Configuration::from_points(w, {{0.2}});
        const double sigma = 0.15;
        BirthKernel k(MixtureBirth{sigma, RadialFunction::constant(0.0), RadialFunction::constant(0.0)});
        Rng rng(9);
        std::vector<double> s;
        for (int i = 0; i < 50000; ++i) {
            auto y = k.sample(x, rng);
            REQUIRE(y.count() == 2);
            double a = y.point(0)[0], b = y.point(1)[0];
            s.push_back(a == 0.2 ? b : a);
        }
        double lo = normal_cdf(-0.2, sigma), hi = normal_cdf(0.8, sigma);
        auto cdf = [&](double t) { return (normal_cdf(std::clamp(t, 0.0, 1.0) - 0.2, sigma) - lo) / (hi - lo); };
        CHECK(stats::ks_one_sample(s, cdf).p_value > 1e-3);
    }

    TEST_CASE("soft-core Gibbs birth matches the normalised density on a grid")
    {
        // With a = 0 and one point at the centre the new-point density is
        // proportional to exp(-2 phi) = (1 - exp(-c r^2))^2 (V sums ordered pairs),
        // i.e. 1 - 2 exp(-c r^2) + exp(-2 c r^2), which factorises per axis.
        const double c = 5.0;
        BirthKernel k(GibbsBirthKernel{GibbsPotential(0.0, PairPotential::soft_core(c))});
        auto w = unit_square();
        auto x = Configuration::from_points(w, {{0.5, 0.5}});
        const int bins = 8, n = 100000;
        std::vector<double> mass(bins * bins);
        auto box_mass = [&](double a0, double a1, double b0, double b1) {
            return (a1 - a0) * (b1 - b0) - 2 * gauss_integral(c, a0, a1) * gauss_integral(c, b0, b1) +
                   gauss_integral(2 * c, a0, a1) * gauss_integral(2 * c, b0, b1);
        };
        double total = box_mass(-0.5, 0.5, -0.5, 0.5);
        for (int i = 0; i < bins; ++i) {
            for (int j = 0; j < bins; ++j) {
                double a0 = double(i) / bins - 0.5, a1 = double(i + 1) / bins - 0.5;
                double b0 = double(j) / bins - 0.5, b1 = double(j + 1) / bins - 0.5;
                mass[i * bins + j] = box_mass(a0, a1, b0, b1) / total;
            }
        }
        Rng rng(10);
        std::vector<double> hist(bins * bins, 0.0);
        int centre_hits = 0;
        for (int s = 0; s < n; ++s) {
            auto y = k.sample(x, rng);
            std::vector<double> p;
            for (std::size_t q = 0; q < 2; ++q) {
                if (y.point(q)[0] != 0.5 || y.point(q)[1] != 0.5) {
                    p.assign(y.point(q).begin(), y.point(q).end());
                }
            }
            int i = std::min(int(p[0] * bins), bins - 1), j = std::min(int(p[1] * bins), bins - 1);
            hist[i * bins + j] += 1.0 / n;
            centre_hits += std::hypot(p[0] - 0.5, p[1] - 0.5) < 0.1;
        }
        CHECK(stats::total_variation(hist, mass) <= 0.02);
        // uniform would put pi * 0.01 of the mass within 0.1 of the centre
        CHECK(centre_hits < 0.3 * M_PI * 0.01 * n);
    }

    TEST_CASE("Gibbs birth rejection sampler is exact on a 64-bin histogram")
    {
        const double c = 40.0;
        auto w = make_domain(Domain::box({0}, {1}));
        auto x = Configuration::from_points(w, {{0.3}, {0.75}});
        BirthKernel k(GibbsBirthKernel{GibbsPotential(0.2, PairPotential::soft_core(c))});
        auto density = [&](double t) {
            double f = (1 - std::exp(-c * (t - 0.3) * (t - 0.3))) * (1 - std::exp(-c * (t - 0.75) * (t - 0.75)));
            return f * f;
        };
        const int bins = 64, sub = 64;
        std::vector<double> mass(bins);
        double total = 0;
        for (int b = 0; b < bins; ++b) {
            // composite Simpson on each bin
            double h = 1.0 / bins / sub, acc = 0;
            for (int s = 0; s <= sub; ++s) {
                double wgt = (s == 0 || s == sub) ? 1 : (s % 2 ? 4 : 2);
                acc += wgt * density(double(b) / bins + s * h);
            }
            mass[b] = acc * h / 3;
            total += mass[b];
        }
        Rng rng(11);
        const int n = 1000000;
        std::vector<int> hist(bins, 0);
        for (int s = 0; s < n; ++s) {
            auto y = k.sample(x, rng);
            double p = 0;
            for (std::size_t q = 0; q < 3; ++q) {
                double v = y.point(q)[0];
                if (v != 0.3 && v != 0.75) {
                    p = v;
                }
            }
            ++hist[std::min(int(p * bins), bins - 1)];
        }
        int outside = 0;
        for (int b = 0; b < bins; ++b) {
            double pb = mass[b] / total;
            double sigma = std::sqrt(pb * (1 - pb) / n);
            outside += std::abs(hist[b] / double(n) - pb) > 4 * sigma + 1e-12;
        }
        CHECK(outside == 0);
    }

    TEST_CASE("rejection budget is enforced")
    {
        auto w = make_domain(Domain::box({0}, {1}));
        auto x = Configuration::from_points(w, {{0.5}});
        BirthKernel k(GibbsBirthKernel{GibbsPotential(0.0, PairPotential::strauss(1e6, 2.0, 0.1))}, 100);
        Rng rng(12);
        try {
            (void)k.sample(x, rng);
            FAIL("expected RejectionBudgetExceeded");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::RejectionBudgetExceeded);
        }
    }

    TEST_CASE("jump choice")
    {
        auto w = unit_square();
        Rng rng(13);
        IntensitySpec unit(ConstantBirth{2.0}, ConstantDeath{1.0}, 3.0);
        BirthKernel bk(UniformBirth{});
        DeathKernel dk(UniformDeath{});
        for (int i = 0; i < 100; ++i) {
            CHECK(sample_jump(unit, bk, dk, Configuration(w), rng).second == JumpType::Birth);
        }

        auto x2 = Configuration::from_points(w, {{0.1, 0.1}, {0.6, 0.7}});
        const int n = 100000;
        int births = 0;
        for (int i = 0; i < n; ++i) {
            births += sample_jump(1.0, 1.0, bk, dk, x2, rng).second == JumpType::Birth;
        }
        CHECK(std::abs(births / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));

        GibbsPotential g(0.0, PairPotential::zero());
        IntensitySpec gibbs(GibbsBirthIntensity{g, {}, GibbsNormalisation::NMaxOne}, ConstantDeath{1.0}, 2.0);
        CHECK(gibbs.beta(x2) / gibbs.alpha(x2) == doctest::Approx(1.0 / 3));
        births = 0;
        BirthKernel gk(GibbsBirthKernel{g});
        for (int i = 0; i < n; ++i) {
            births += sample_jump(gibbs, gk, dk, x2, rng).second == JumpType::Birth;
        }
        CHECK(std::abs(births / double(n) - 1.0 / 3) < 3 * std::sqrt(2.0 / 9 / n));

        try {
            (void)sample_jump(0.0, 0.0, bk, dk, x2, rng);
            FAIL("expected ZeroIntensity");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ZeroIntensity);
        }
    }

    TEST_CASE("kernels change the count by one and keep the rest")
    {
        auto w = unit_square();
        Rng rng(14);
        std::vector<BirthKernel> births{
            BirthKernel(UniformBirth{}),
            BirthKernel(MixtureBirth{0.1, RadialFunction::constant(0.0), RadialFunction::exp_decay(1.0, 0.3)}),
            BirthKernel(GibbsBirthKernel{GibbsPotential(0.1, PairPotential::strauss(1.0, 0.2, 0.05))})};
        std::vector<DeathKernel> deaths{DeathKernel(UniformDeath{}),
                                        DeathKernel(WeightedDeath{RadialFunction::exp_decay(1.0, 0.3)})};
        for (int trial = 0; trial < 200; ++trial) {
            auto x = uniform_configuration(w, rng.below(6), rng);
            for (const auto& b : births) {
                auto y = b.sample(x, rng);
                CHECK(y.count() == x.count() + 1);
                CHECK(sub_multiset(x, y));
                for (std::size_t i = 0; i < y.count(); ++i) {
                    CHECK(w->contains(y.point(i)));
                }
            }
            if (x.count() >= 1) {
                for (const auto& d : deaths) {
                    auto y = d.sample(x, rng);
                    CHECK(y.count() + 1 == x.count());
                    CHECK(sub_multiset(y, x));
                    auto p = d.weights(x);
                    double s = 0;
                    for (double v : p) {
                        s += v;
                    }
                    CHECK(s == doctest::Approx(1.0));
                }
            }
        }
    }

    TEST_CASE("sup/inf sequences")
    {
        auto w = unit_square();
        IntensitySpec gibbs(GibbsBirthIntensity{GibbsPotential(0.0, PairPotential::zero()), {}, GibbsNormalisation::NMaxOne},
                            ConstantDeath{1.0}, 2.0);
        auto s = gibbs.sup_inf_sequences(*w, 3);
        CHECK(s.beta[0] == doctest::Approx(1.0));
        CHECK(s.beta[1] == doctest::Approx(1.0));
        CHECK(s.beta[2] == doctest::Approx(0.5));
        CHECK(s.beta[3] == doctest::Approx(1.0 / 3));
        CHECK(s.delta == std::vector<double>{0, 1, 1, 1});

        IntensitySpec cut(ConstantBirth{2.0, 3}, LinearDeath{0.5, 4}, 4.0);
        auto t = cut.sup_inf_sequences(*w, 6);
        CHECK(t.beta == std::vector<double>{2, 2, 2, 0, 0, 0, 0});
        CHECK(t.delta == std::vector<double>{0, 0.5, 1.0, 1.5, 2.0, 2.0, 2.0});
        for (std::size_t n = 0; n <= 6; ++n) {
            CHECK(t.alpha[n] == t.beta[n] + t.delta[n]);
        }

        IntensitySpec custom(CustomIntensity{[](const Configuration&) { return 1.0; }}, ConstantDeath{1.0}, 2.0);
        CHECK_THROWS_AS(custom.sup_inf_sequences(*w, 3), Error);
    }

    TEST_CASE("sup/inf sequences bound the intensities on random configurations")
    {
        auto w = unit_square();
        std::vector<IntensitySpec> families{
            IntensitySpec(ConstantBirth{1.5, 4}, ConstantDeath{1.0}, 3.0),
            IntensitySpec(ConstantBirth{1.0}, LinearDeath{0.5, 5}, 4.0),
            IntensitySpec(GibbsBirthIntensity{GibbsPotential(0.3, PairPotential::strauss(1.0, 0.2, 0.05)), {16},
                                              GibbsNormalisation::NPlusOne},
                          ConstantDeath{1.0}, 2.0),
        };
        Rng rng(15);
        for (const auto& f : families) {
            const std::size_t n_max = 6;
            auto s = f.sup_inf_sequences(*w, n_max);
            for (int trial = 0; trial < (std::holds_alternative<GibbsBirthIntensity>(f.birth()) ? 300 : 10000);
                 ++trial) {
                std::size_t n = rng.below(n_max + 1);
                auto x = uniform_configuration(w, n, rng);
                CHECK(f.beta(x) <= s.beta[n] * (1 + 1e-12));
                CHECK(f.delta(x) >= s.delta[n] * (1 - 1e-12));
            }
        }
    }

    TEST_CASE("intensity bound probes")
    {
        auto w = unit_square();
        Rng rng(16);
        IntensitySpec ok(ConstantBirth{1.0}, LinearDeath{1.0, 4}, 5.0);
        CHECK_NOTHROW(ok.check_bound(w, rng, 4, 10));
        IntensitySpec tight(ConstantBirth{1.0}, LinearDeath{1.0, 10}, 5.0);
        try {
            tight.check_bound(w, rng, 4, 10);
            FAIL("expected AlphaStarTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::AlphaStarTooSmall);
        }
        IntensitySpec bad_empty(ConstantBirth{1.0}, CustomIntensity{[](const Configuration&) { return 1.0; }}, 5.0);
        CHECK_THROWS_AS(bad_empty.check_bound(w, rng, 4, 3), Error);
        CHECK_THROWS_AS(IntensitySpec(ConstantBirth{1.0}, ConstantDeath{1.0}, 0.0), Error);
    }
}
