#pragma once

// Continuous inter-jump motion on each E_n. A mover never changes n(x) and
// keeps every point inside W.

#include <cstdint>
#include <variant>

#include "bdm/config_space.hpp"
#include "bdm/potentials.hpp"
#include "bdm/rng.hpp"

namespace bdm {

struct ConstantMove {};

/// Overdamped Langevin dz_i = -sum_{j != i} grad phi(z_i - z_j) dt + sqrt(2/inv_temp) dB_i,
/// reflected at the faces of W. Integrated by tamed Euler-Maruyama.
struct LangevinMove {
    PairPotential pair;
    double inv_temp = 1.0;
};

struct ReflectedBrownianMove {
    double inv_temp = 1.0;
};

enum class GrowthLaw {
    Constant,    ///< F_i = kappa
    Logistic,    ///< F_i = kappa m_i (1 - m_i / capacity)
    Competition, ///< F_i = kappa (1 - sum_{j != i} exp(-|U_i - U_j|) m_j / capacity)_+
};

/// Deterministic growth of the mark (last coordinate); locations U_i stay fixed.
/// Integrated by classical RK4; marks are clamped to the box faces.
struct GrowthMove {
    GrowthLaw law = GrowthLaw::Constant;
    double kappa = 1.0;
    double capacity = 1.0;
};

class MoverSpec {
  public:
    using Kind = std::variant<ConstantMove, LangevinMove, ReflectedBrownianMove, GrowthMove>;

    MoverSpec() = default;
    MoverSpec(Kind kind, double step = 1e-3, double taming = 1.0);

    const Kind& kind() const noexcept { return kind_; }
    double step() const noexcept { return step_; }
    double taming() const noexcept { return taming_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantMove>(kind_); }

    /// Y_dt given Y_0 = x using ceil(dt/step) equal substeps. Noise is assigned to
    /// points in canonical order. Throws NonFiniteState on blow-up.
    Configuration advance(const Configuration& x, double dt, Rng& rng) const;

  private:
    Kind kind_ = ConstantMove{};
    double step_ = 1e-3;
    double taming_ = 1.0;
};

/// Fold a coordinate back into [lo, hi] by repeated reflection about the faces.
double reflect_into(double v, double lo, double hi) noexcept;

/// Advances two differently ordered copies of x with the same noise and compares.
bool permutation_equivariance_check(const MoverSpec& m, const Configuration& x, double dt, std::uint64_t seed);

} // namespace bdm
