#pragma once

// Finite point configurations in a box W of R^d (or all of R^d).
//
// A Configuration is an unordered multiset. Points are kept in lexicographic
// order so that equality, hashing and "the i-th point" are all independent of
// how the configuration was built.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bdm {

class Domain {
  public:
    /// Box [lower_i, upper_i] in every coordinate; requires lower_i < upper_i.
    static Domain box(std::vector<double> lower, std::vector<double> upper);
    /// W = R^d.
    static Domain unbounded(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    bool bounded() const noexcept { return bounded_; }
    double lower(std::size_t i) const { return lower_.at(i); }
    double upper(std::size_t i) const { return upper_.at(i); }
    bool contains(std::span<const double> p) const noexcept;
    /// Lebesgue measure |W|; throws UnboundedDomain for R^d.
    double volume() const;
    /// Box centre, or the origin for R^d.
    std::vector<double> center() const;

    bool operator==(const Domain&) const = default;

  private:
    Domain() = default;
    std::size_t dim_ = 0;
    bool bounded_ = false;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(Domain d) { return std::make_shared<const Domain>(std::move(d)); }

class Configuration {
  public:
    /// The empty configuration of W.
    explicit Configuration(DomainPtr domain);
    /// Points given as a flat array of count*dim coordinates, in any order.
    Configuration(DomainPtr domain, std::vector<double> flat);
    static Configuration from_points(DomainPtr domain,
                                     const std::vector<std::vector<double>>& points);

    std::size_t count() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const noexcept { return coords_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const;
    std::span<const double> coords() const noexcept { return coords_; }
    std::vector<std::vector<double>> points() const;
    const Domain& domain() const noexcept { return *domain_; }
    const DomainPtr& domain_ptr() const noexcept { return domain_; }

    /// x ∪ {xi}; throws PointOutsideDomain when xi is not in W.
    Configuration insert(std::span<const double> xi) const;
    /// x \ x_i for the i-th point in canonical order; throws IndexOutOfRange.
    Configuration remove(std::size_t i) const;

    /// No two points coincide.
    bool is_simple() const noexcept;
    std::size_t hash() const noexcept;

    bool operator==(const Configuration& other) const noexcept
    {
        return dim_ == other.dim_ && coords_ == other.coords_;
    }

  private:
    void canonicalize();

    DomainPtr domain_;
    std::size_t dim_;
    std::vector<double> coords_;
};

inline std::size_t count(const Configuration& x) noexcept { return x.count(); }

/// Optimal-matching distance with unit truncation and unit surplus penalty.
double d1(const Configuration& x, const Configuration& y);

/// Hausdorff distance between two non-empty simple configurations.
double hausdorff(const Configuration& x, const Configuration& y);

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;

} // namespace bdm
