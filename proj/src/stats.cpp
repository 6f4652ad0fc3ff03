#include "bdm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "bdm/error.hpp"

namespace bdm::stats {

namespace {

double ks_p_value(double d, double n_eff)
{
    double sn = std::sqrt(n_eff);
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

// Merges cells from both ends until every cell's weight reaches the floor.
void merge_sparse(std::vector<std::vector<double>>& cols, std::vector<double>& weights, double floor)
{
    auto merge_into = [&](std::size_t from, std::size_t to) {
        for (auto& c : cols) {
            c[to] += c[from];
            c.erase(c.begin() + static_cast<std::ptrdiff_t>(from));
        }
        weights[to] += weights[from];
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(from));
    };
    while (weights.size() > 1 && weights.back() < floor) {
        merge_into(weights.size() - 1, weights.size() - 2);
    }
    while (weights.size() > 1 && weights.front() < floor) {
        merge_into(0, 1);
    }
}

} // namespace

double kolmogorov_survival(double lambda)
{
    // The series converges slowly near 0, where the survival function is 1 to double precision.
    if (lambda < 0.2) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) {
        throw Error(Errc::InvalidArgument, "KS test needs a non-empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n)};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) {
        throw Error(Errc::InvalidArgument, "KS test needs non-empty samples");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) {
            ++i;
        }
        while (j < b.size() && b[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

double chi_square_survival(double x, double dof)
{
    if (x <= 0) {
        return 1.0;
    }
    return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

TestResult chi_square_gof(const std::vector<std::size_t>& observed_values, const std::vector<double>& p,
                          double min_expected)
{
    if (p.empty() || observed_values.empty()) {
        throw Error(Errc::InvalidArgument, "chi-square needs observations and cell probabilities");
    }
    const std::size_t cells = p.size();
    const double n = static_cast<double>(observed_values.size());
    std::vector<double> obs(cells, 0.0), expected(cells);
    for (std::size_t v : observed_values) {
        obs[std::min(v, cells - 1)] += 1.0;
    }
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < cells; ++k) {
        expected[k] = n * p[k];
        head += p[k];
    }
    expected[cells - 1] = n * std::max(0.0, 1.0 - head);

    std::vector<std::vector<double>> cols{obs};
    merge_sparse(cols, expected, min_expected);
    obs = cols[0];
    double stat = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (expected[k] > 0) {
            stat += (obs[k] - expected[k]) * (obs[k] - expected[k]) / expected[k];
        } else if (obs[k] > 0) {
            return {std::numeric_limits<double>::infinity(), 0.0, static_cast<double>(expected.size() - 1)};
        }
    }
    double dof = static_cast<double>(expected.size()) - 1.0;
    if (dof < 1) {
        return {0.0, 1.0, 0.0};
    }
    return {stat, chi_square_survival(stat, dof), dof};
}

TestResult chi_square_two_sample(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                 double min_pooled)
{
    if (a.empty() || b.empty()) {
        throw Error(Errc::InvalidArgument, "two-sample chi-square needs non-empty samples");
    }
    std::size_t top = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    std::vector<double> ca(top + 1, 0.0), cb(top + 1, 0.0), pooled(top + 1, 0.0);
    for (std::size_t v : a) {
        ca[v] += 1.0;
    }
    for (std::size_t v : b) {
        cb[v] += 1.0;
    }
    for (std::size_t k = 0; k <= top; ++k) {
        pooled[k] = ca[k] + cb[k];
    }
    // Drop values seen in neither sample before merging.
    std::vector<std::vector<double>> cols{{}, {}};
    std::vector<double> w;
    for (std::size_t k = 0; k <= top; ++k) {
        if (pooled[k] > 0) {
            cols[0].push_back(ca[k]);
            cols[1].push_back(cb[k]);
            w.push_back(pooled[k]);
        }
    }
    merge_sparse(cols, w, min_pooled);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double stat = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        double ea = na * w[k] / (na + nb), eb = nb * w[k] / (na + nb);
        stat += (cols[0][k] - ea) * (cols[0][k] - ea) / ea + (cols[1][k] - eb) * (cols[1][k] - eb) / eb;
    }
    double dof = static_cast<double>(w.size()) - 1.0;
    if (dof < 1) {
        return {0.0, 1.0, 0.0};
    }
    return {stat, chi_square_survival(stat, dof), dof};
}

double dkw_epsilon(std::size_t n, double alpha)
{
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

std::vector<double> frequencies(const std::vector<std::size_t>& values)
{
    if (values.empty()) {
        return {};
    }
    std::vector<double> f(*std::max_element(values.begin(), values.end()) + 1, 0.0);
    for (std::size_t v : values) {
        f[v] += 1.0;
    }
    for (double& x : f) {
        x /= static_cast<double>(values.size());
    }
    return f;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q)
{
    double s = 0.0;
    for (std::size_t k = 0; k < std::max(p.size(), q.size()); ++k) {
        double a = k < p.size() ? p[k] : 0.0;
        double b = k < q.size() ? q[k] : 0.0;
        s += std::abs(a - b);
    }
    return 0.5 * s;
}

double mean(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    double m = mean(v), ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<double> poisson_pmf(double lambda, std::size_t kmax)
{
    std::vector<double> p(kmax + 1);
    p[0] = std::exp(-lambda);
    for (std::size_t k = 1; k <= kmax; ++k) {
        p[k] = p[k - 1] * lambda / static_cast<double>(k);
    }
    return p;
}

} // namespace bdm::stats
