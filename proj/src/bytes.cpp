#include "hkrt/bytes.hpp"

#include <algorithm>

namespace hkrt {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw Error(Errc::OutOfRange, "odd-length hex string");
    }
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw Error(Errc::OutOfRange, "invalid hex digit");
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

ByteWriter& ByteWriter::blob(ByteView bytes) {
    u32(static_cast<std::uint32_t>(bytes.size()));
    return raw(bytes);
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
    auto b = raw(4);
    std::uint32_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

std::uint64_t ByteReader::u64() {
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

ByteView ByteReader::raw(std::size_t n) {
    if (n > remaining()) {
        throw Error(Errc::Truncated, "need " + std::to_string(n) + " bytes, have " +
                                         std::to_string(remaining()));
    }
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
}

Digest ByteReader::digest() {
    Digest d{};
    auto b = raw(d.size());
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

Bytes ByteReader::blob(std::size_t max_len) {
    const auto len = u32();
    if (len > max_len) {
        throw Error(Errc::OutOfRange, "blob length " + std::to_string(len) + " exceeds limit");
    }
    auto b = raw(len);
    return {b.begin(), b.end()};
}

void ByteReader::expect_tag(std::string_view magic) {
    auto b = raw(magic.size());
    if (!std::equal(b.begin(), b.end(), magic.begin(), magic.end(),
                    [](std::uint8_t x, char c) { return x == static_cast<std::uint8_t>(c); })) {
        throw Error(Errc::BadMagic, "expected " + std::string(magic));
    }
}

void ByteReader::finish() const {
    if (!done()) {
        throw Error(Errc::TrailingBytes, std::to_string(remaining()) + " unread bytes");
    }
}

} // namespace hkrt
