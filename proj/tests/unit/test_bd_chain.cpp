#include <cmath>

#include <doctest.h>

#include "bdm/bd_chain.hpp"
#include "bdm/error.hpp"
#include "bdm/stats.hpp"

using namespace bdm;

namespace {

SimpleChainSpec unit_over_n_plus_1()
{
    SimpleChainSpec c = SimpleChainSpec::gibbs_envelope(1.0, GibbsNormalisation::NPlusOne);
    return c;
}

SimpleChainSpec birth_one_death_n()
{
    SimpleChainSpec c;
    c.family = "explicit";
    c.beta_head = {1.0};
    c.delta_head = {0.0};
    c.beta_tail = PowerLaw{1.0, 0.0, 0.0};
    c.delta_tail = PowerLaw{1.0, 0.0, 1.0};
    return c;
}

} // namespace

TEST_SUITE("bd_chain")
{
    TEST_CASE("rates of the closed-form families")
    {
        auto mm = SimpleChainSpec::mm_infinity(2.0, 1.5);
        CHECK(mm.beta(7) == 2.0);
        CHECK(mm.delta(0) == 0.0);
        CHECK(mm.delta(4) == 6.0);
        auto g = unit_over_n_plus_1();
        CHECK(g.beta(0) == 1.0);
        CHECK(g.beta(3) == 0.25);
        CHECK(g.delta(3) == 1.0);
        auto cut = SimpleChainSpec::constant(2.0, 1.0).with_cutoff(3);
        CHECK(cut.beta(2) == 2.0);
        CHECK(cut.beta(3) == 0.0);
        CHECK(cut.birth_stop() == std::optional<std::size_t>(3));
        CHECK(birth_one_death_n().delta(5) == 5.0);
    }

    TEST_CASE("simulation examples")
    {
        auto c = SimpleChainSpec::constant(1.0, 1.0);
        for (std::uint64_t s = 0; s < 50; ++s) {
            auto log = simulate_chain(c, 0, 5.0, s);
            REQUIRE(!log.events.empty());
            CHECK(log.events.front().n == 1);
        }

        auto death = SimpleChainSpec::explicit_arrays({0.0}, {0.0});
        death.beta_tail = PowerLaw{0.0, 0.0, 0.0};
        death.delta_tail = PowerLaw{1.0, 0.0, 1.0};
        auto log = simulate_chain(death, 5, 1000.0, 3);
        REQUIRE(log.events.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(log.events[i].n == 4 - i);
        }
        CHECK(log.absorbed);
    }

    TEST_CASE("M/M/infinity occupancy mean is lambda/mu")
    {
        auto c = SimpleChainSpec::mm_infinity(2.0, 1.0);
        auto occ = occupancy(simulate_chain(c, 0, 1000.0, 4));
        double mean = 0;
        for (std::size_t n = 0; n < occ.size(); ++n) {
            mean += static_cast<double>(n) * occ[n];
        }
        CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
    }

    TEST_CASE("stationary distribution examples")
    {
        auto pi = stationary_distribution(SimpleChainSpec::mm_infinity(2.0, 1.0));
        CHECK(pi[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
        auto poisson = stats::poisson_pmf(2.0, pi.size() - 1);
        for (std::size_t n = 0; n < pi.size(); ++n) {
            CHECK(pi[n] == doctest::Approx(poisson[n]).epsilon(1e-10));
        }

        auto p1 = stationary_distribution(unit_over_n_plus_1());
        CHECK(p1[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(p1[3] == doctest::Approx(std::exp(-1.0) / 6).epsilon(1e-12));

        auto two = SimpleChainSpec::explicit_arrays({1.0}, {0.0, 1.0}).with_cutoff(1);
        two.beta_tail = PowerLaw{0.0, 0.0, 0.0};
        two.delta_tail = PowerLaw{1.0, 0.0, 0.0};
        auto p2 = stationary_distribution(two);
        REQUIRE(p2.size() >= 2);
        CHECK(p2[0] == doctest::Approx(0.5));
        CHECK(p2[1] == doctest::Approx(0.5));

        CHECK_THROWS_AS(stationary_distribution(SimpleChainSpec::constant(2.0, 1.0)), Error);
    }

    TEST_CASE("detailed balance holds to 1e-12")
    {
        std::vector<SimpleChainSpec> chains{SimpleChainSpec::mm_infinity(2.0, 1.0), unit_over_n_plus_1(),
                                            SimpleChainSpec::constant(0.7, 1.0),
                                            SimpleChainSpec::constant(3.0, 1.0).with_cutoff(6), birth_one_death_n()};
        for (const auto& c : chains) {
            auto pi = stationary_distribution(c);
            for (std::size_t n = 0; n + 1 < pi.size(); ++n) {
                double lhs = pi[n] * c.beta(n), rhs = pi[n + 1] * c.delta(n + 1);
                CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs) + 1e-300);
            }
        }
    }

    TEST_CASE("ergodicity verdicts")
    {
        CHECK(ergodicity_check(SimpleChainSpec::constant(1.0, 1.0).with_cutoff(3)).verdict == ErgodicityVerdict::Eq30);
        CHECK(ergodicity_check(birth_one_death_n()).verdict == ErgodicityVerdict::Eq31);
        CHECK(ergodicity_check(SimpleChainSpec::constant(2.0, 1.0)).verdict == ErgodicityVerdict::Fails);
        CHECK(ergodicity_check(SimpleChainSpec::constant(0.5, 1.0)).verdict == ErgodicityVerdict::Eq31);
        std::vector<double> b(20, 1.0), d(20, 2.0);
        d[0] = 0.0;
        auto report = ergodicity_check(SimpleChainSpec::explicit_arrays(b, d));
        CHECK(report.verdict == ErgodicityVerdict::Inconclusive);
        CHECK(!report.rationale.empty());
    }

    TEST_CASE("rate verdicts")
    {
        auto cut = SimpleChainSpec::constant(1.0, 1.0).with_cutoff(3);
        CHECK(rate_condition_check(cut, {0.0, 0.0, 1.0}).verdict == RateVerdict::Eq32);
        CHECK(rate_condition_check(birth_one_death_n(), {1.0}).verdict == RateVerdict::Corollary);
        std::vector<double> b(20, 1.0), d(20, 2.0);
        d[0] = 0.0;
        CHECK(rate_condition_check(SimpleChainSpec::explicit_arrays(b, d), {1.0}).verdict == RateVerdict::Inconclusive);
    }

    TEST_CASE("expected return time identity")
    {
        auto two = SimpleChainSpec::explicit_arrays({1.0}, {0.0, 1.0}).with_cutoff(1);
        two.beta_tail = PowerLaw{0.0, 0.0, 0.0};
        two.delta_tail = PowerLaw{1.0, 0.0, 0.0};
        CHECK(expected_return_time(two) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(expected_return_time(unit_over_n_plus_1()) == doctest::Approx(M_E).epsilon(1e-12));
        CHECK(expected_return_time(SimpleChainSpec::mm_infinity(2.0, 1.0)) ==
              doctest::Approx(std::exp(2.0) / 2).epsilon(1e-12));
        CHECK(expected_return_time(SimpleChainSpec::mm_infinity(2.0, 1.0)) == doctest::Approx(3.6945).epsilon(1e-4));
        CHECK_THROWS_AS(expected_return_time(SimpleChainSpec::constant(2.0, 1.0)), Error);
    }

    TEST_CASE("return times agree with simulation")
    {
        auto two = SimpleChainSpec::explicit_arrays({1.0}, {0.0, 1.0}).with_cutoff(1);
        two.beta_tail = PowerLaw{0.0, 0.0, 0.0};
        two.delta_tail = PowerLaw{1.0, 0.0, 0.0};
        std::vector<SimpleChainSpec> chains{two, unit_over_n_plus_1(), SimpleChainSpec::mm_infinity(2.0, 1.0)};
        std::uint64_t seed = 21;
        for (const auto& c : chains) {
            auto mc = simulate_return_times(c, 100000, seed++);
            double exact = expected_return_time(c);
            CHECK(std::abs(mc.mean - exact) <= 3 * mc.stderr_);
        }
        auto mc = simulate_return_times(unit_over_n_plus_1(), 100000, 99);
        CHECK(mc.mean == doctest::Approx(M_E).epsilon(0.01));
    }

    TEST_CASE("long-run occupancy matches the stationary law")
    {
        std::vector<SimpleChainSpec> chains{SimpleChainSpec::mm_infinity(2.0, 1.0), unit_over_n_plus_1(),
                                            SimpleChainSpec::constant(0.5, 1.0)};
        std::uint64_t seed = 30;
        for (const auto& c : chains) {
            auto pi = stationary_distribution(c);
            // states sampled at unit spacing after a burn-in are close to independent
            auto log = simulate_chain(c, 0, 20100.0, seed++);
            std::vector<std::size_t> obs;
            for (int t = 100; t < 20100; t += 4) {
                obs.push_back(chain_state_at(log, t));
            }
            CHECK(stats::chi_square_gof(obs, pi).p_value > 0.01);
        }
    }

    TEST_CASE("validation")
    {
        CHECK_THROWS_AS(SimpleChainSpec::explicit_arrays({1.0}, {0.5}), Error);
        CHECK_THROWS_AS(SimpleChainSpec::explicit_arrays({-1.0}, {0.0}), Error);
        auto c = SimpleChainSpec::constant(1.0, 1.0);
        c.delta_head[0] = 0.5;
        CHECK_THROWS_AS(c.validate(), Error);
    }
}
