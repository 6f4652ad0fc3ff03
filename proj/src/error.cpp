#include "bdm/error.hpp"

namespace bdm {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::PointOutsideDomain: return "PointOutsideDomain";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EmptyConfiguration: return "EmptyConfiguration";
    case Errc::NonSimpleConfiguration: return "NonSimpleConfiguration";
    case Errc::SingularGradient: return "SingularGradient";
    case Errc::UnboundedDomain: return "UnboundedDomain";
    case Errc::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case Errc::ZeroIntensity: return "ZeroIntensity";
    case Errc::UnsupportedFamily: return "UnsupportedFamily";
    case Errc::DegenerateWeights: return "DegenerateWeights";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::ThinningBoundViolated: return "ThinningBoundViolated";
    case Errc::NegativeKernelMass: return "NegativeKernelMass";
    case Errc::AlphaStarTooSmall: return "AlphaStarTooSmall";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace bdm
