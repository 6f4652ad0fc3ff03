#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "bdm/jump_kernels.hpp"
#include "bdm/movers.hpp"
#include "bdm/stats.hpp"

using namespace bdm;

TEST_SUITE("movers")
{
    TEST_CASE("constant mover is the identity")
    {
        auto w = make_domain(Domain::box({0, 0}, {1, 1}));
        Rng rng(1);
        MoverSpec m(ConstantMove{});
        for (int i = 0; i < 20; ++i) {
            auto x = uniform_configuration(w, rng.below(5), rng);
            CHECK(m.advance(x, rng.uniform(0.01, 10.0), rng) == x);
        }
    }

    TEST_CASE("parameter validation")
    {
        CHECK_THROWS(MoverSpec(ConstantMove{}, 0.0));
        CHECK_THROWS(MoverSpec(ConstantMove{}, 1e-3, -1.0));
        CHECK_THROWS(MoverSpec(LangevinMove{PairPotential::zero(), 0.0}));
    }

    TEST_CASE("free Langevin increments have variance 2t/beta")
    {
        // Zero drift makes Euler-Maruyama exact, so a coarse step loses nothing.
        auto w = make_domain(Domain::unbounded(2));
        MoverSpec m(LangevinMove{PairPotential::zero(), 2.0}, 0.01);
        auto x = Configuration::from_points(w, {{0.0, 0.0}});
        Rng rng(2);
        std::vector<double> inc;
        for (int i = 0; i < 100000; ++i) {
            auto y = m.advance(x, 1.0, rng);
            inc.push_back(y.point(0)[0]);
            inc.push_back(y.point(0)[1]);
        }
        double mean = stats::mean(inc);
        double var = 0;
        for (double v : inc) {
            var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(inc.size() - 1);
        CHECK(std::abs(mean) < 4 * std::sqrt(1.0 / inc.size()));
        CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    }

    TEST_CASE("constant growth adds kappa t to every mark")
    {
        auto w = make_domain(Domain::box({0, 0}, {1, 5}));
        MoverSpec m(GrowthMove{GrowthLaw::Constant, 0.3, 1.0}, 1e-2);
        auto x = Configuration::from_points(w, {{0.2, 0.5}, {0.7, 1.25}});
        Rng rng(3);
        auto y = m.advance(x, 2.0, rng);
        auto p = y.points();
        CHECK(p[0][0] == 0.2);
        CHECK(p[0][1] == doctest::Approx(1.1).epsilon(1e-12));
        CHECK(p[1][0] == 0.7);
        CHECK(p[1][1] == doctest::Approx(1.85).epsilon(1e-12));
    }

    TEST_CASE("logistic growth follows the closed form")
    {
        const double kappa = 1.5, cap = 2.0, m0 = 0.1, t = 3.0;
        auto w = make_domain(Domain::box({0, 0}, {1, 3}));
        MoverSpec m(GrowthMove{GrowthLaw::Logistic, kappa, cap}, 1e-2);
        auto x = Configuration::from_points(w, {{0.5, m0}});
        Rng rng(4);
        double exact = cap / (1.0 + (cap / m0 - 1.0) * std::exp(-kappa * t));
        CHECK(m.advance(x, t, rng).point(0)[1] == doctest::Approx(exact).epsilon(1e-8));
    }

    TEST_CASE("competition growth stops once neighbours exhaust the capacity")
    {
        auto w = make_domain(Domain::box({0, 0}, {1, 10}));
        MoverSpec m(GrowthMove{GrowthLaw::Competition, 1.0, 1.0}, 1e-2);
        // neighbour mark 5 at distance 0.1 gives 5 exp(-0.1) > 1, so F = 0 for the first point
        auto x = Configuration::from_points(w, {{0.2, 0.5}, {0.3, 5.0}});
        Rng rng(5);
        auto y = m.advance(x, 1.0, rng);
        CHECK(y.point(0)[1] == 0.5);
        CHECK(y.point(1)[1] > 5.0);
    }

    TEST_CASE("movers preserve the count and confine points to W")
    {
        auto w = make_domain(Domain::box({0, 0}, {1, 1}));
        std::vector<MoverSpec> movers{
            MoverSpec(LangevinMove{PairPotential::soft_core(5.0), 2.0}, 1e-2),
            MoverSpec(LangevinMove{PairPotential::lennard_jones(1e-4), 1.0}, 1e-2),
            MoverSpec(ReflectedBrownianMove{0.5}, 1e-2),
            MoverSpec(GrowthMove{GrowthLaw::Logistic, 3.0, 5.0}, 1e-2),
        };
        Rng rng(6);
        int checked = 0;
        for (int trial = 0; trial < 2500; ++trial) {
            auto x = uniform_configuration(w, 1 + rng.below(4), rng);
            for (const auto& m : movers) {
                auto y = m.advance(x, rng.uniform(0.001, 0.3), rng);
                REQUIRE(y.count() == x.count());
                for (std::size_t i = 0; i < y.count(); ++i) {
                    CHECK(w->contains(y.point(i)));
                }
                ++checked;
            }
        }
        CHECK(checked == 10000);
    }

    TEST_CASE("reflection folds into the interval")
    {
        CHECK(reflect_into(1.2, 0.0, 1.0) == doctest::Approx(0.8));
        CHECK(reflect_into(-0.3, 0.0, 1.0) == doctest::Approx(0.3));
        CHECK(reflect_into(2.25, 0.0, 1.0) == doctest::Approx(0.25));
        CHECK(reflect_into(0.4, 0.0, 1.0) == 0.4);
    }

    TEST_CASE("permutation equivariance")
    {
        auto w = make_domain(Domain::box({0, 0}, {1, 1}));
        auto x = Configuration::from_points(w, {{0.1, 0.2}, {0.5, 0.5}, {0.8, 0.3}});
        CHECK(permutation_equivariance_check(MoverSpec(ConstantMove{}), x, 1.0, 1));
        CHECK(permutation_equivariance_check(MoverSpec(LangevinMove{PairPotential::soft_core(3.0), 2.0}), x, 0.5, 2));
        CHECK(permutation_equivariance_check(MoverSpec(ReflectedBrownianMove{1.0}), x, 0.5, 3));
        CHECK(permutation_equivariance_check(MoverSpec(GrowthMove{GrowthLaw::Competition, 1.0, 2.0}), x, 0.5, 4));
    }

    TEST_CASE("reflected Brownian motion keeps the uniform law on [0, 1]")
    {
        auto w = make_domain(Domain::box({0}, {1}));
        MoverSpec m(ReflectedBrownianMove{1.0}, 5e-3);
        Rng rng(7);
        std::vector<double> end;
        for (int i = 0; i < 10000; ++i) {
            auto x = uniform_configuration(w, 1, rng);
            end.push_back(m.advance(x, 5.0, rng).point(0)[0]);
        }
        CHECK(stats::ks_one_sample(end, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value > 0.01);
    }

    TEST_CASE("soft-core Langevin pair distance matches exp(-2 phi) on the square")
    {
        // Two particles at inverse temperature 2 have stationary density
        // proportional to exp(-2 phi(|z1 - z2|)) on W^2. The oracle draws that law
        // exactly by rejection from uniform pairs, since exp(-2 phi) <= 1.
        const double c = 20.0;
        auto pair = PairPotential::soft_core(c);
        auto w = make_domain(Domain::box({0, 0}, {1, 1}));
        MoverSpec m(LangevinMove{pair, 2.0}, 1e-3);
        const int bins = 32;
        const double rmax = std::sqrt(2.0);
        auto bin_of = [&](double r) { return std::min(int(r / rmax * bins), bins - 1); };

        Rng orng(8);
        std::vector<double> oracle(bins, 0.0);
        const int n_oracle = 400000;
        for (int accepted = 0; accepted < n_oracle;) {
            double dx = orng.uniform() - orng.uniform(), dy = orng.uniform() - orng.uniform();
            double r = std::hypot(dx, dy);
            if (orng.uniform() < std::exp(-2.0 * pair.radial(r))) {
                oracle[bin_of(r)] += 1.0 / n_oracle;
                ++accepted;
            }
        }

        Rng rng(9);
        std::vector<double> hist(bins, 0.0);
        const int paths = 10000;
        for (int i = 0; i < paths; ++i) {
            // start close together so the repulsion has to do the work
            double u = rng.uniform(0.3, 0.7), v = rng.uniform(0.3, 0.7);
            auto x = Configuration::from_points(w, {{u, v}, {u + 0.02, v}});
            auto y = m.advance(x, 2.0, rng);
            hist[bin_of(euclidean_distance(y.point(0), y.point(1)))] += 1.0 / paths;
        }
        CHECK(stats::total_variation(hist, oracle) <= 0.05);
    }
}
