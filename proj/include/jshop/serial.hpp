#pragma once

// Internal little-endian binary (de)serialization helpers shared by the
// environment snapshot and the checkpoint container.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jshop::detail {

inline void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("truncated binary stream");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_i64(std::ostream& out, int64_t v) { put_u64(out, static_cast<uint64_t>(v)); }
inline int64_t get_i64(std::istream& in) { return static_cast<int64_t>(get_u64(in)); }

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& in) {
    size_t n = static_cast<size_t>(get_u64(in));
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated binary stream");
    return s;
}

template <class T>
void put_vec_i(std::ostream& out, const std::vector<T>& v) {
    put_u64(out, v.size());
    for (const T& x : v) put_i64(out, static_cast<int64_t>(x));
}

template <class T>
void get_vec_i(std::istream& in, std::vector<T>& v) {
    v.resize(static_cast<size_t>(get_u64(in)));
    for (T& x : v) x = static_cast<T>(get_i64(in));
}

inline void put_vec_f(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double x : v) put_f64(out, x);
}

inline void get_vec_f(std::istream& in, std::vector<double>& v) {
    v.resize(static_cast<size_t>(get_u64(in)));
    for (double& x : v) x = get_f64(in);
}

}  // namespace jshop::detail
