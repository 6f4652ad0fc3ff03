#pragma once

// Brute-force references shared by the unit and acceptance tests.

#include <algorithm>
#include <numeric>
#include <vector>

#include "bdm/config_space.hpp"

namespace bdm::testing {

/// d1 by enumerating every injection of the smaller configuration.
inline double d1_brute(const Configuration& a, const Configuration& b)
{
    const Configuration& x = a.count() <= b.count() ? a : b;
    const Configuration& y = a.count() <= b.count() ? b : a;
    const std::size_t nx = x.count(), ny = y.count();
    if (ny == 0) {
        return 0.0;
    }
    std::vector<std::size_t> perm(ny);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            c += std::min(1.0, euclidean_distance(x.point(i), y.point(perm[i])));
        }
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return (best + static_cast<double>(ny - nx)) / static_cast<double>(ny);
}

/// Minimum over all permutations of sum_i cost[i][p(i)], row-major n x n.
inline double assignment_brute(const std::vector<double>& cost, std::size_t n)
{
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = 1e300;
    do {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s += cost[i * n + p[i]];
        }
        best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

} // namespace bdm::testing
