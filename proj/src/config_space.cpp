#include "bdm/config_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <numeric>

#include "bdm/assignment.hpp"
#include "bdm/error.hpp"

namespace bdm {

Domain Domain::box(std::vector<double> lower, std::vector<double> upper)
{
    if (lower.empty() || lower.size() != upper.size()) {
        throw Error(Errc::InvalidArgument, "box bounds must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
            throw Error(Errc::InvalidArgument, "box requires finite lower < upper in every coordinate");
        }
    }
    Domain d;
    d.dim_ = lower.size();
    d.bounded_ = true;
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    return d;
}

Domain Domain::unbounded(std::size_t dim)
{
    if (dim == 0) {
        throw Error(Errc::InvalidArgument, "dimension must be positive");
    }
    Domain d;
    d.dim_ = dim;
    d.bounded_ = false;
    return d;
}

bool Domain::contains(std::span<const double> p) const noexcept
{
    if (p.size() != dim_) {
        return false;
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!std::isfinite(p[i])) {
            return false;
        }
        if (bounded_ && (p[i] < lower_[i] || p[i] > upper_[i])) {
            return false;
        }
    }
    return true;
}

double Domain::volume() const
{
    if (!bounded_) {
        throw Error(Errc::UnboundedDomain, "|W| is infinite for W = R^d");
    }
    double v = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        v *= upper_[i] - lower_[i];
    }
    return v;
}

std::vector<double> Domain::center() const
{
    std::vector<double> c(dim_, 0.0);
    if (bounded_) {
        for (std::size_t i = 0; i < dim_; ++i) {
            c[i] = 0.5 * (lower_[i] + upper_[i]);
        }
    }
    return c;
}

Configuration::Configuration(DomainPtr domain) : domain_(std::move(domain)), dim_(domain_->dim()) {}

Configuration::Configuration(DomainPtr domain, std::vector<double> flat)
    : domain_(std::move(domain)), dim_(domain_->dim()), coords_(std::move(flat))
{
    if (coords_.size() % dim_ != 0) {
        throw Error(Errc::InvalidArgument, "coordinate array length is not a multiple of dim");
    }
    for (std::size_t i = 0; i < count(); ++i) {
        if (!domain_->contains(point(i))) {
            throw Error(Errc::PointOutsideDomain, "configuration point lies outside W");
        }
    }
    canonicalize();
}

Configuration Configuration::from_points(DomainPtr domain,
                                         const std::vector<std::vector<double>>& points)
{
    std::vector<double> flat;
    flat.reserve(points.size() * domain->dim());
    for (const auto& p : points) {
        if (p.size() != domain->dim()) {
            throw Error(Errc::InvalidArgument, "point dimension does not match the domain");
        }
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return Configuration(std::move(domain), std::move(flat));
}

std::span<const double> Configuration::point(std::size_t i) const
{
    if (i >= count()) {
        throw Error(Errc::IndexOutOfRange, "point index out of range");
    }
    return {coords_.data() + i * dim_, dim_};
}

std::vector<std::vector<double>> Configuration::points() const
{
    std::vector<std::vector<double>> out;
    out.reserve(count());
    for (std::size_t i = 0; i < count(); ++i) {
        auto p = point(i);
        out.emplace_back(p.begin(), p.end());
    }
    return out;
}

Configuration Configuration::insert(std::span<const double> xi) const
{
    if (!domain_->contains(xi)) {
        throw Error(Errc::PointOutsideDomain, "inserted point lies outside W");
    }
    // Binary search for the lexicographic slot keeps the order canonical.
    std::size_t lo = 0, hi = count();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        auto p = point(mid);
        if (std::lexicographical_compare(p.begin(), p.end(), xi.begin(), xi.end())) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Configuration out(domain_);
    out.coords_.reserve(coords_.size() + dim_);
    out.coords_.insert(out.coords_.end(), coords_.begin(), coords_.begin() + lo * dim_);
    out.coords_.insert(out.coords_.end(), xi.begin(), xi.end());
    out.coords_.insert(out.coords_.end(), coords_.begin() + lo * dim_, coords_.end());
    return out;
}

Configuration Configuration::remove(std::size_t i) const
{
    if (i >= count()) {
        throw Error(Errc::IndexOutOfRange, "cannot remove point " + std::to_string(i) + " from a configuration of " +
                                               std::to_string(count()) + " points");
    }
    Configuration out(domain_);
    out.coords_.reserve(coords_.size() - dim_);
    out.coords_.insert(out.coords_.end(), coords_.begin(), coords_.begin() + i * dim_);
    out.coords_.insert(out.coords_.end(), coords_.begin() + (i + 1) * dim_, coords_.end());
    return out;
}

bool Configuration::is_simple() const noexcept
{
    // Canonical order puts equal points next to each other.
    for (std::size_t i = 1; i < count(); ++i) {
        if (std::equal(coords_.begin() + (i - 1) * dim_, coords_.begin() + i * dim_,
                       coords_.begin() + i * dim_)) {
            return false;
        }
    }
    return true;
}

std::size_t Configuration::hash() const noexcept
{
    std::size_t h = std::hash<std::size_t>{}(dim_);
    for (double c : coords_) {
        h ^= std::hash<double>{}(c) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

void Configuration::canonicalize()
{
    const std::size_t n = count();
    if (n < 2) {
        return;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double* base = coords_.data();
    const std::size_t d = dim_;
    std::sort(order.begin(), order.end(), [base, d](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(base + a * d, base + (a + 1) * d, base + b * d,
                                            base + (b + 1) * d);
    });
    std::vector<double> sorted;
    sorted.reserve(coords_.size());
    for (std::size_t idx : order) {
        sorted.insert(sorted.end(), coords_.begin() + idx * d, coords_.begin() + (idx + 1) * d);
    }
    coords_ = std::move(sorted);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double diff = a[k] - b[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

double d1(const Configuration& x, const Configuration& y)
{
    const Configuration& small = x.count() <= y.count() ? x : y;
    const Configuration& large = x.count() <= y.count() ? y : x;
    const std::size_t m = small.count();
    const std::size_t n = large.count();
    if (n == 0) {
        return 0.0;
    }
    // Rows m..n-1 are dummies: an unmatched point of the larger configuration costs 1.
    std::vector<double> cost(n * n, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cost[i * n + j] = std::min(euclidean_distance(small.point(i), large.point(j)), 1.0);
        }
    }
    return solve_assignment(cost, n).cost / static_cast<double>(n);
}

double hausdorff(const Configuration& x, const Configuration& y)
{
    if (x.empty() || y.empty()) {
        throw Error(Errc::EmptyConfiguration, "Hausdorff distance needs non-empty configurations");
    }
    if (!x.is_simple() || !y.is_simple()) {
        throw Error(Errc::NonSimpleConfiguration, "Hausdorff distance is defined on simple configurations");
    }
    auto directed = [](const Configuration& a, const Configuration& b) {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.count(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < b.count(); ++j) {
                best = std::min(best, euclidean_distance(a.point(i), b.point(j)));
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(x, y), directed(y, x));
}

} // namespace bdm
