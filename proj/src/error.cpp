#include "hkrt/error.hpp"

namespace hkrt {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyLeafSet: return "empty leaf set";
        case Errc::InvalidArity: return "invalid arity";
        case Errc::DuplicatePseudonym: return "duplicate pseudonym";
        case Errc::FutureRevocation: return "revocation epoch after tree epoch";
        case Errc::ReservedPseudonym: return "reserved pseudonym";
        case Errc::StaleEpoch: return "epoch not increasing";
        case Errc::UnknownPseudonym: return "unknown pseudonym";
        case Errc::BadMagic: return "bad magic";
        case Errc::UnsupportedVersion: return "unsupported version";
        case Errc::Truncated: return "truncated";
        case Errc::TrailingBytes: return "trailing bytes";
        case Errc::OutOfRange: return "out of range";
        case Errc::NonCanonical: return "non-canonical encoding";
        case Errc::RootMismatch: return "root mismatch";
        case Errc::UnknownObu: return "unknown obu";
        case Errc::UnknownRsu: return "unknown rsu";
        case Errc::EpochMismatch: return "epoch mismatch";
        case Errc::InvalidConfig: return "invalid config";
        case Errc::Io: return "io";
    }
    return "unknown";
}

} // namespace hkrt
