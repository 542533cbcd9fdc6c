#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hkrt/error.hpp"

namespace hkrt {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;

std::string to_hex(ByteView bytes);
/// Strict lowercase/uppercase hex decode; throws Error(OutOfRange) on bad input.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Big-endian canonical writer used by every wire format in the library.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v) {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& raw(ByteView bytes) {
        out_.insert(out_.end(), bytes.begin(), bytes.end());
        return *this;
    }
    ByteWriter& tag(std::string_view magic) { return raw(as_bytes(magic)); }
    /// 4-byte big-endian length followed by the payload.
    ByteWriter& blob(ByteView bytes);

    [[nodiscard]] const Bytes& bytes() const noexcept { return out_; }
    [[nodiscard]] Bytes take() noexcept { return std::move(out_); }

private:
    Bytes out_;
};

/// Bounds-checked reader. All failures throw Error(Truncated) so callers can
/// distinguish short input from semantic rejections.
class ByteReader {
public:
    explicit ByteReader(ByteView in) noexcept : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t n);
    Digest digest();
    Bytes blob(std::size_t max_len = 1U << 24);
    void expect_tag(std::string_view magic);

    [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }
    [[nodiscard]] bool done() const noexcept { return pos_ == in_.size(); }
    /// Throws Error(TrailingBytes) if input remains.
    void finish() const;

private:
    ByteView in_;
    std::size_t pos_ = 0;
};

} // namespace hkrt
