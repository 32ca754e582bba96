#pragma once

#include "cohortsim/error.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

namespace cohortsim::detail {

// Host byte order; snapshots and checkpoints are meant for reuse on the machine
// (or architecture family) that wrote them.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    void put(const T& v)
    {
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void put_bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
    void put_string(const std::string& s)
    {
        put<std::uint64_t>(s.size());
        put_bytes(s.data(), s.size());
    }
    template <typename T>
    void put_vector(const std::vector<T>& v)
    {
        put<std::uint64_t>(v.size());
        if (!v.empty()) put_bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
    }

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    T get()
    {
        T v{};
        get_bytes(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    }
    void get_bytes(char* p, std::size_t n)
    {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("truncated binary file");
    }
    std::string get_string()
    {
        std::string s(checked_size(get<std::uint64_t>()), '\0');
        if (!s.empty()) get_bytes(s.data(), s.size());
        return s;
    }
    template <typename T>
    std::vector<T> get_vector()
    {
        std::vector<T> v(checked_size(get<std::uint64_t>()));
        if (!v.empty()) get_bytes(reinterpret_cast<char*>(v.data()), v.size() * sizeof(T));
        return v;
    }

private:
    static std::size_t checked_size(std::uint64_t n)
    {
        if (n > (std::uint64_t{1} << 34)) throw ParseError("corrupt binary file (implausible length)");
        return static_cast<std::size_t>(n);
    }
    std::istream& in_;
};

} // namespace cohortsim::detail
