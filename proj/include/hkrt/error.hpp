#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hkrt {

enum class Errc {
    // tree construction and update
    EmptyLeafSet,
    InvalidArity,
    DuplicatePseudonym,
    FutureRevocation,
    ReservedPseudonym,
    StaleEpoch,
    UnknownPseudonym,
    // codecs
    BadMagic,
    UnsupportedVersion,
    Truncated,
    TrailingBytes,
    OutOfRange,
    NonCanonical,
    RootMismatch,
    // protocol
    UnknownObu,
    UnknownRsu,
    EpochMismatch,
    // simulation / cli
    InvalidConfig,
    Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying a stable, machine-checkable error code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace hkrt
