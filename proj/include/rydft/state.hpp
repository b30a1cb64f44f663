#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <unordered_map>

namespace rydft {

using cplx = std::complex<double>;

// Product-basis label over up to 32 atoms, 4 bits (16 levels) per atom.
struct BasisKey {
    std::uint64_t lo = 0, hi = 0;

    int get(int atom) const {
        int shift = (atom & 15) * 4;
        std::uint64_t w = atom < 16 ? lo : hi;
        return int((w >> shift) & 15u);
    }
    void set(int atom, int level) {
        int shift = (atom & 15) * 4;
        std::uint64_t mask = std::uint64_t(15) << shift;
        std::uint64_t v = std::uint64_t(level) << shift;
        if (atom < 16) lo = (lo & ~mask) | v;
        else hi = (hi & ~mask) | v;
    }
    BasisKey with(int atom, int level) const {
        BasisKey k = *this;
        k.set(atom, level);
        return k;
    }
    friend bool operator==(const BasisKey&, const BasisKey&) = default;
};

struct BasisKeyHash {
    std::size_t operator()(const BasisKey& k) const {
        std::uint64_t x = k.lo * 0x9e3779b97f4a7c15ULL ^ (k.hi + 0x7f4a7c15u);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        return static_cast<std::size_t>(x);
    }
};

using AmplitudeMap = std::unordered_map<BasisKey, cplx, BasisKeyHash>;

double norm2(const AmplitudeMap& m);
void prune(AmplitudeMap& m, double eps = 1e-14);
void scale(AmplitudeMap& m, cplx factor);
// |<a|b>|
cplx inner(const AmplitudeMap& a, const AmplitudeMap& b);

}  // namespace rydft
