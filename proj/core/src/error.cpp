#include "khess/error.hpp"

namespace khess {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonHermitianInput: return "NonHermitianInput";
    case Errc::NonPositiveMetric: return "NonPositiveMetric";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ConeViolation: return "ConeViolation";
    case Errc::InvalidExponent: return "InvalidExponent";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SolverDiverged: return "SolverDiverged";
    case Errc::MajorantViolated: return "MajorantViolated";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ConeExit: return "ConeExit";
    case Errc::MaxIterExceeded: return "MaxIterExceeded";
    case Errc::NonPositiveDensity: return "NonPositiveDensity";
    case Errc::ZeroMass: return "ZeroMass";
    case Errc::StageFailed: return "StageFailed";
    case Errc::EnvelopeFailed: return "EnvelopeFailed";
    case Errc::NonMonotoneGrid: return "NonMonotoneGrid";
    case Errc::NonIntegrableSource: return "NonIntegrableSource";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace khess
