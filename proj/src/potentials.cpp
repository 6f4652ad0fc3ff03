#include "bdm/potentials.hpp"

#include <cmath>
#include <limits>

#include "bdm/error.hpp"

namespace bdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

double norm(std::span<const double> xi) noexcept
{
    double s = 0.0;
    for (double v : xi) {
        s += v * v;
    }
    return std::sqrt(s);
}

} // namespace

PairPotential::PairPotential(Kind kind) : kind_(std::move(kind))
{
    auto require = [](bool ok, const char* msg) {
        if (!ok) {
            throw Error(Errc::InvalidArgument, msg);
        }
    };
    std::visit(Overloaded{
                   [](const ZeroPair&) {},
                   [&](const LennardJonesRepulsive& p) { require(p.c > 0, "Lennard-Jones needs c > 0"); },
                   [&](const Riesz& p) {
                       require(p.c > 0, "Riesz needs c > 0");
                       require(p.dim > 0 && p.alpha > 0 && p.alpha < static_cast<double>(p.dim),
                               "Riesz needs 0 < alpha < d");
                   },
                   [&](const SoftCore& p) { require(p.c > 0, "soft-core needs c > 0"); },
                   [&](const StraussRegularised& p) {
                       require(p.gamma >= 0, "Strauss needs gamma >= 0");
                       require(p.eps > 0 && p.eps < p.range, "Strauss needs 0 < eps < R");
                   },
               },
               kind_);
}

std::string PairPotential::name() const
{
    return std::visit(Overloaded{
                          [](const ZeroPair&) { return std::string("zero"); },
                          [](const LennardJonesRepulsive&) { return std::string("lennard_jones"); },
                          [](const Riesz&) { return std::string("riesz"); },
                          [](const SoftCore&) { return std::string("soft_core"); },
                          [](const StraussRegularised&) { return std::string("strauss"); },
                      },
                      kind_);
}

bool PairPotential::is_singular() const noexcept
{
    return std::holds_alternative<LennardJonesRepulsive>(kind_) || std::holds_alternative<Riesz>(kind_) ||
           std::holds_alternative<SoftCore>(kind_);
}

double PairPotential::radial(double r) const noexcept
{
    return std::visit(Overloaded{
                          [](const ZeroPair&) { return 0.0; },
                          [r](const LennardJonesRepulsive& p) {
                              if (r == 0.0) {
                                  return kInf;
                              }
                              double r2 = r * r, r6 = r2 * r2 * r2;
                              return p.c / (r6 * r6);
                          },
                          [r](const Riesz& p) {
                              return r == 0.0 ? kInf : p.c * std::pow(r, p.alpha - static_cast<double>(p.dim));
                          },
                          [r](const SoftCore& p) {
                              // -log(1 - e^-u): log1p keeps relative accuracy once e^-u is small
                              double u = p.c * r * r;
                              return u > M_LN2 ? -std::log1p(-std::exp(-u)) : -std::log(-std::expm1(-u));
                          },
                          [r](const StraussRegularised& p) {
                              double inner = p.range - p.eps, outer = p.range + p.eps;
                              if (r <= inner) {
                                  return p.gamma;
                              }
                              if (r >= outer) {
                                  return 0.0;
                              }
                              double s = (r - inner) / (2.0 * p.eps);
                              return p.gamma * (1.0 - s * s * (3.0 - 2.0 * s));
                          },
                      },
                      kind_);
}

double PairPotential::radial_derivative(double r) const noexcept
{
    return std::visit(Overloaded{
                          [](const ZeroPair&) { return 0.0; },
                          [r](const LennardJonesRepulsive& p) {
                              double r2 = r * r, r6 = r2 * r2 * r2;
                              return -12.0 * p.c / (r6 * r6 * r);
                          },
                          [r](const Riesz& p) {
                              double e = p.alpha - static_cast<double>(p.dim);
                              return p.c * e * std::pow(r, e - 1.0);
                          },
                          [r](const SoftCore& p) {
                              double em = std::exp(-p.c * r * r);
                              return -2.0 * p.c * r * em / (-std::expm1(-p.c * r * r));
                          },
                          [r](const StraussRegularised& p) {
                              double inner = p.range - p.eps, outer = p.range + p.eps;
                              if (r <= inner || r >= outer) {
                                  return 0.0;
                              }
                              double s = (r - inner) / (2.0 * p.eps);
                              return p.gamma * 6.0 * s * (s - 1.0) / (2.0 * p.eps);
                          },
                      },
                      kind_);
}

double PairPotential::phi(std::span<const double> xi) const noexcept
{
    return radial(norm(xi));
}

std::vector<double> PairPotential::grad_phi(std::span<const double> xi) const
{
    std::vector<double> out(xi.size(), 0.0);
    double r = norm(xi);
    if (r == 0.0) {
        if (is_singular()) {
            throw Error(Errc::SingularGradient, "gradient of " + name() + " is undefined at 0");
        }
        return out;
    }
    accumulate_grad(xi, 1.0, out);
    return out;
}

void PairPotential::accumulate_grad(std::span<const double> xi, double scale, std::span<double> out) const
{
    if (is_zero()) {
        return;
    }
    double r = norm(xi);
    if (r == 0.0) {
        if (is_singular()) {
            for (double& o : out) {
                o = std::numeric_limits<double>::quiet_NaN();
            }
        }
        return;
    }
    double f = scale * radial_derivative(r) / r;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        out[k] += f * xi[k];
    }
}

double GibbsPotential::energy(const Configuration& x) const noexcept
{
    const std::size_t n = x.count();
    if (n == 0) {
        return 0.0;
    }
    double v = activity_ * static_cast<double>(n);
    if (pair_.is_zero()) {
        return v;
    }
    const auto coords = x.coords();
    const std::size_t d = x.dim();
    std::vector<double> diff(d);
    double pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = 0; k < d; ++k) {
                diff[k] = coords[i * d + k] - coords[j * d + k];
            }
            pairs += pair_.phi(diff);
        }
    }
    return v + 2.0 * pairs;
}

double GibbsPotential::energy_delta(const Configuration& x, std::span<const double> xi) const noexcept
{
    if (pair_.is_zero() || x.empty()) {
        return activity_;
    }
    const auto coords = x.coords();
    const std::size_t d = x.dim();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.count(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double t = coords[i * d + k] - xi[k];
            s += t * t;
        }
        sum += pair_.radial(std::sqrt(s));
    }
    return activity_ + 2.0 * sum;
}

double GibbsPotential::z(const Configuration& x, const QuadratureSpec& quad) const
{
    const Domain& w = x.domain();
    if (!w.bounded()) {
        throw Error(Errc::UnboundedDomain, "z(x) needs a bounded domain");
    }
    if (quad.cells_per_axis == 0) {
        throw Error(Errc::InvalidArgument, "quadrature needs at least one cell per axis");
    }
    // Constant integrand: the midpoint rule is exact.
    if (pair_.is_zero() || x.empty()) {
        return std::exp(-activity_) * w.volume();
    }
    const std::size_t d = w.dim();
    const std::size_t m = quad.cells_per_axis;
    std::vector<double> h(d);
    for (std::size_t k = 0; k < d; ++k) {
        h[k] = (w.upper(k) - w.lower(k)) / static_cast<double>(m);
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        total *= m;
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> xi(d);
    double sum = 0.0;
    for (std::size_t c = 0; c < total; ++c) {
        for (std::size_t k = 0; k < d; ++k) {
            xi[k] = w.lower(k) + (static_cast<double>(idx[k]) + 0.5) * h[k];
        }
        sum += std::exp(-energy_delta(x, xi));
        for (std::size_t k = 0; k < d; ++k) {
            if (++idx[k] < m) {
                break;
            }
            idx[k] = 0;
        }
    }
    return sum * w.volume() / static_cast<double>(total);
}

} // namespace bdm
