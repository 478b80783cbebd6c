#pragma once

#include <stdexcept>
#include <string>

namespace ksim {

/// Domain error carrying a stable kind name (e.g. "FractionBelowCenter").
/// The CLI prints the kind verbatim and exits with code 2.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, std::string const &what)
    : std::runtime_error(kind + ": " + what)
    , kind_(std::move(kind))
  {
  }

  std::string const &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

namespace errc {
inline constexpr char const *InvalidArgument = "InvalidArgument";
inline constexpr char const *DimensionMismatch = "DimensionMismatch";
inline constexpr char const *FormatError = "FormatError";
inline constexpr char const *IoError = "IoError";
inline constexpr char const *NonFinite = "NonFinite";
inline constexpr char const *SizeGuard = "SizeGuard";
inline constexpr char const *FractionBelowCenter = "FractionBelowCenter";
inline constexpr char const *FractionOutOfRange = "FractionOutOfRange";
inline constexpr char const *BisectionFailure = "BisectionFailure";
inline constexpr char const *DegenerateRange = "DegenerateRange";
inline constexpr char const *EmptyCorpus = "EmptyCorpus";
inline constexpr char const *EmptyInput = "EmptyInput";
} // namespace errc

} // namespace ksim
