#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdm {

enum class Errc {
    InvalidArgument,
    PointOutsideDomain,
    IndexOutOfRange,
    EmptyConfiguration,
    NonSimpleConfiguration,
    SingularGradient,
    UnboundedDomain,
    RejectionBudgetExceeded,
    ZeroIntensity,
    UnsupportedFamily,
    DegenerateWeights,
    NonFiniteState,
    ThinningBoundViolated,
    NegativeKernelMass,
    AlphaStarTooSmall,
    NotErgodic,
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the named codes above.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

} // namespace bdm
