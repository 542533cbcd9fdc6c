#pragma once

#include <initializer_list>

#include "hkrt/bytes.hpp"

namespace hkrt {

/// SHA3-256 over the concatenation of the given parts.
Digest sha3_256(std::initializer_list<ByteView> parts);

inline Digest sha3_256(ByteView data) { return sha3_256({data}); }

} // namespace hkrt
