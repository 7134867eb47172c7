#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "errors.hpp"

namespace verdant::detail {

// Both file formats are little-endian; raw memcpy is exact on this target.
static_assert(std::endian::native == std::endian::little,
              "verdant file I/O assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in) throw data_error(std::string("unexpected end of file reading ") + what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void expect_magic(std::istream& in, const char* magic, const char* format) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw data_error(std::string(format) + ": bad magic bytes");
}

inline void expect_eof(std::istream& in, const char* format) {
    in.peek();
    if (!in.eof()) throw data_error(std::string(format) + ": trailing bytes after payload");
}

}  // namespace verdant::detail
