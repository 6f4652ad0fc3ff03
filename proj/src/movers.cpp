#include "bdm/movers.hpp"

#include <algorithm>
#include <cmath>

#include "bdm/error.hpp"

namespace bdm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void confine(std::vector<double>& z, const Domain& w)
{
    if (!w.bounded()) {
        return;
    }
    const std::size_t d = w.dim();
    for (std::size_t i = 0; i < z.size(); ++i) {
        std::size_t k = i % d;
        z[i] = reflect_into(z[i], w.lower(k), w.upper(k));
    }
}

void require_finite(const std::vector<double>& z)
{
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw Error(Errc::NonFiniteState, "mover produced a non-finite coordinate; reduce the step or raise taming");
        }
    }
}

void langevin_step(const LangevinMove& m, std::vector<double>& z, std::size_t n, std::size_t d, double h,
                   double taming, Rng& rng, std::vector<double>& drift, std::vector<double>& diff)
{
    std::fill(drift.begin(), drift.end(), 0.0);
    if (!m.pair.is_zero()) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                for (std::size_t k = 0; k < d; ++k) {
                    diff[k] = z[i * d + k] - z[j * d + k];
                }
                // grad phi is odd: the pair pushes i by -g and j by +g.
                m.pair.accumulate_grad(diff, -1.0, std::span<double>(drift.data() + i * d, d));
                m.pair.accumulate_grad(diff, 1.0, std::span<double>(drift.data() + j * d, d));
            }
        }
    }
    const double noise = std::sqrt(2.0 * h / m.inv_temp);
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            norm2 += drift[i * d + k] * drift[i * d + k];
        }
        double tame = 1.0 / (1.0 + taming * h * std::sqrt(norm2));
        for (std::size_t k = 0; k < d; ++k) {
            z[i * d + k] += drift[i * d + k] * tame * h + noise * rng.normal();
        }
    }
}

void growth_rates(const GrowthMove& g, const std::vector<double>& z, std::size_t n, std::size_t d,
                  const std::vector<double>& marks, std::vector<double>& out)
{
    for (std::size_t i = 0; i < n; ++i) {
        double m = marks[i];
        switch (g.law) {
        case GrowthLaw::Constant: out[i] = g.kappa; break;
        case GrowthLaw::Logistic: out[i] = g.kappa * m * (1.0 - m / g.capacity); break;
        case GrowthLaw::Competition: {
            double pressure = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                double s = 0.0;
                for (std::size_t k = 0; k + 1 < d; ++k) {
                    double t = z[i * d + k] - z[j * d + k];
                    s += t * t;
                }
                pressure += std::exp(-std::sqrt(s)) * marks[j];
            }
            out[i] = g.kappa * std::max(0.0, 1.0 - pressure / g.capacity);
            break;
        }
        }
    }
}

void growth_step(const GrowthMove& g, std::vector<double>& z, std::size_t n, std::size_t d, double h,
                 const Domain& w)
{
    std::vector<double> m0(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) {
        m0[i] = z[i * d + d - 1];
    }
    growth_rates(g, z, n, d, m0, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = m0[i] + 0.5 * h * k1[i];
    growth_rates(g, z, n, d, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = m0[i] + 0.5 * h * k2[i];
    growth_rates(g, z, n, d, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = m0[i] + h * k3[i];
    growth_rates(g, z, n, d, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
        double m = m0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (w.bounded()) {
            m = std::clamp(m, w.lower(d - 1), w.upper(d - 1));
        }
        z[i * d + d - 1] = m;
    }
}

} // namespace

double reflect_into(double v, double lo, double hi) noexcept
{
    if (v >= lo && v <= hi) {
        return v;
    }
    const double len = hi - lo;
    double u = std::fmod(v - lo, 2.0 * len);
    if (u < 0) {
        u += 2.0 * len;
    }
    double r = u <= len ? lo + u : hi - (u - len);
    return std::clamp(r, lo, hi);
}

MoverSpec::MoverSpec(Kind kind, double step, double taming) : kind_(std::move(kind)), step_(step), taming_(taming)
{
    if (!(step_ > 0) || !std::isfinite(step_)) {
        throw Error(Errc::InvalidArgument, "mover step must be positive");
    }
    if (!(taming_ >= 0)) {
        throw Error(Errc::InvalidArgument, "taming multiplier must be non-negative");
    }
    std::visit(Overloaded{
                   [](const ConstantMove&) {},
                   [](const LangevinMove& m) {
                       if (!(m.inv_temp > 0)) {
                           throw Error(Errc::InvalidArgument, "inverse temperature must be positive");
                       }
                   },
                   [](const ReflectedBrownianMove& m) {
                       if (!(m.inv_temp > 0)) {
                           throw Error(Errc::InvalidArgument, "inverse temperature must be positive");
                       }
                   },
                   [](const GrowthMove& g) {
                       if (!(g.capacity > 0)) {
                           throw Error(Errc::InvalidArgument, "growth capacity must be positive");
                       }
                   },
               },
               kind_);
}

Configuration MoverSpec::advance(const Configuration& x, double dt, Rng& rng) const
{
    if (!(dt > 0)) {
        if (dt == 0) {
            return x;
        }
        throw Error(Errc::InvalidArgument, "advance needs dt >= 0");
    }
    if (is_constant() || x.empty()) {
        return x;
    }
    const Domain& w = x.domain();
    const std::size_t n = x.count();
    const std::size_t d = x.dim();
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(dt / step_ - 1e-9)));
    const double h = dt / static_cast<double>(substeps);
    std::vector<double> z(x.coords().begin(), x.coords().end());

    std::visit(Overloaded{
                   [](const ConstantMove&) {},
                   [&](const LangevinMove& m) {
                       std::vector<double> drift(n * d), diff(d);
                       for (std::size_t s = 0; s < substeps; ++s) {
                           langevin_step(m, z, n, d, h, taming_, rng, drift, diff);
                           require_finite(z);
                           confine(z, w);
                       }
                   },
                   [&](const ReflectedBrownianMove& m) {
                       const double noise = std::sqrt(2.0 * h / m.inv_temp);
                       for (std::size_t s = 0; s < substeps; ++s) {
                           for (double& v : z) {
                               v += noise * rng.normal();
                           }
                           require_finite(z);
                           confine(z, w);
                       }
                   },
                   [&](const GrowthMove& g) {
                       for (std::size_t s = 0; s < substeps; ++s) {
                           growth_step(g, z, n, d, h, w);
                       }
                       require_finite(z);
                   },
               },
               kind_);
    return Configuration(x.domain_ptr(), std::move(z));
}

bool permutation_equivariance_check(const MoverSpec& m, const Configuration& x, double dt, std::uint64_t seed)
{
    auto pts = x.points();
    std::reverse(pts.begin(), pts.end());
    if (pts.size() >= 3) {
        std::rotate(pts.begin(), pts.begin() + 1, pts.end());
    }
    Configuration y = Configuration::from_points(x.domain_ptr(), pts);
    Rng rx(seed, 0, 2), ry(seed, 0, 2);
    return m.advance(x, dt, rx) == m.advance(y, dt, ry);
}

} // namespace bdm
