#pragma once

// Little-endian primitives shared by every binary file format.

#include "docret/errors.hpp"
#include "docret/feature_model.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

namespace docret::detail {

template <typename UInt>
void put_uint(std::ostream& out, UInt value)
{
    std::array<char, sizeof(UInt)> bytes;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), bytes.size());
}

inline void put_f32(std::ostream& out, float value)
{
    put_uint(out, std::bit_cast<std::uint32_t>(value));
}

inline void put_f64(std::ostream& out, double value)
{
    put_uint(out, std::bit_cast<std::uint64_t>(value));
}

inline void put_string16(std::ostream& out, std::string_view s, const char* what)
{
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw ValidationError(std::string(what) + " longer than 65535 bytes");
    }
    put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// Reads exactly `size` bytes or throws CorruptionError.
inline void get_bytes(std::istream& in, char* dst, std::size_t size, const char* what)
{
    in.read(dst, static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in.gcount()) != size) {
        throw CorruptionError(std::string("truncated file while reading ") + what);
    }
}

template <typename UInt>
UInt get_uint(std::istream& in, const char* what)
{
    std::array<unsigned char, sizeof(UInt)> bytes;
    get_bytes(in, reinterpret_cast<char*>(bytes.data()), bytes.size(), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        value |= static_cast<UInt>(bytes[i]) << (8 * i);
    }
    return value;
}

inline float get_f32(std::istream& in, const char* what)
{
    return std::bit_cast<float>(get_uint<std::uint32_t>(in, what));
}

inline double get_f64(std::istream& in, const char* what)
{
    return std::bit_cast<double>(get_uint<std::uint64_t>(in, what));
}

inline std::string get_string16(std::istream& in, const char* what)
{
    const auto len = get_uint<std::uint16_t>(in, what);
    std::string s(len, '\0');
    get_bytes(in, s.data(), len, what);
    return s;
}

inline void expect_magic(std::istream& in, std::string_view magic)
{
    std::array<char, 4> got{};
    in.read(got.data(), got.size());
    if (in.gcount() != 4 || std::string_view(got.data(), 4) != magic) {
        throw FormatError("bad magic: expected '" + std::string(magic) + "'");
    }
}

inline void expect_end(std::istream& in)
{
    if (in.peek() != std::char_traits<char>::eof()) {
        throw CorruptionError("trailing bytes after payload");
    }
}

/// Image-id records in canonical order; rejects unsorted or duplicate ids.
inline void put_ids(std::ostream& out, const CorpusManifest& manifest)
{
    for (const auto& id : manifest.images()) {
        put_string16(out, id.name, "image id");
    }
}

inline CorpusManifest get_ids(std::istream& in, std::uint64_t n)
{
    std::vector<ImageId> ids;
    // the count is untrusted until the records actually arrive
    ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 16)));
    for (std::uint64_t i = 0; i < n; ++i) {
        ids.emplace_back(get_string16(in, "image id record"));
        if (ids.back().name.empty()) {
            throw FormatError("empty image id record");
        }
        if (i > 0 && !(ids[i - 1] < ids[i])) {
            throw FormatError("image ids are not in canonical order at '" + ids[i].name + "'");
        }
    }
    return CorpusManifest(std::move(ids));
}

} // namespace docret::detail
