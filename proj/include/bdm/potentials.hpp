#pragma once

// Pairwise Gibbs potentials and the configuration energy
//   V(x) = a n(x) + sum_{i != j} phi(x_i - x_j),
// where the double sum runs over ordered pairs.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bdm/config_space.hpp"

namespace bdm {

struct LennardJonesRepulsive {
    double c;
};

struct Riesz {
    double c;
    double alpha;
    std::size_t dim; ///< phi = c |xi|^(alpha - dim), 0 < alpha < dim
};

struct SoftCore {
    double c;
};

/// gamma on |xi| <= R - eps, 0 on |xi| >= R + eps, cubic smoothstep in between.
struct StraussRegularised {
    double gamma;
    double range;
    double eps;
};

struct ZeroPair {};

class PairPotential {
  public:
    using Kind = std::variant<ZeroPair, LennardJonesRepulsive, Riesz, SoftCore, StraussRegularised>;

    PairPotential() = default;
    explicit PairPotential(Kind kind); // validates parameters

    static PairPotential zero() { return PairPotential(ZeroPair{}); }
    static PairPotential lennard_jones(double c) { return PairPotential(LennardJonesRepulsive{c}); }
    static PairPotential riesz(double c, double alpha, std::size_t dim)
    {
        return PairPotential(Riesz{c, alpha, dim});
    }
    static PairPotential soft_core(double c) { return PairPotential(SoftCore{c}); }
    static PairPotential strauss(double gamma, double range, double eps)
    {
        return PairPotential(StraussRegularised{gamma, range, eps});
    }

    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;
    bool is_zero() const noexcept { return std::holds_alternative<ZeroPair>(kind_); }
    /// Singular kinds blow up at the origin.
    bool is_singular() const noexcept;

    /// phi as a function of r = |xi|; +inf at r = 0 for the singular kinds and soft-core.
    double radial(double r) const noexcept;
    /// d phi / d r, r > 0.
    double radial_derivative(double r) const noexcept;

    double phi(std::span<const double> xi) const noexcept;
    /// Analytic gradient; SingularGradient at xi = 0 except for the Zero and Strauss kinds.
    std::vector<double> grad_phi(std::span<const double> xi) const;
    /// Adds scale * grad phi(xi) into out; no allocation, xi must be non-zero for singular kinds.
    void accumulate_grad(std::span<const double> xi, double scale, std::span<double> out) const;

  private:
    Kind kind_ = ZeroPair{};
};

struct QuadratureSpec {
    std::size_t cells_per_axis = 128;
};

/// Pairwise potential with activity a and local-stability envelope psi = 1.
class GibbsPotential {
  public:
    GibbsPotential() = default;
    GibbsPotential(double activity, PairPotential pair) : activity_(activity), pair_(std::move(pair)) {}

    double activity() const noexcept { return activity_; }
    const PairPotential& pair() const noexcept { return pair_; }

    /// psi(xi); every shipped pair is non-negative so psi = 1.
    double envelope(std::span<const double>) const noexcept { return 1.0; }
    double envelope_integral(const Domain& w) const { return w.volume(); }

    /// V(x).
    double energy(const Configuration& x) const noexcept;
    /// V(x ∪ xi) - V(x) = a + 2 sum_i phi(x_i - xi), in O(n).
    double energy_delta(const Configuration& x, std::span<const double> xi) const noexcept;
    /// z(x) = int_W exp(-(V(x ∪ xi) - V(x))) dxi by midpoint tensor quadrature.
    double z(const Configuration& x, const QuadratureSpec& quad) const;

  private:
    double activity_ = 0.0;
    PairPotential pair_;
};

} // namespace bdm
