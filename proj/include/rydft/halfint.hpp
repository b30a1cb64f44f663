#pragma once

#include <compare>
#include <cstdlib>
#include <string>

namespace rydft {

// Angular momentum quantum numbers come in integer and half-integer values.
// Stored as twice the value so arithmetic stays exact.
class HalfInt {
public:
    constexpr HalfInt() : twice_(0) {}
    constexpr explicit HalfInt(int twice) : twice_(twice) {}
    static constexpr HalfInt from_int(int v) { return HalfInt(2 * v); }
    static constexpr HalfInt halves(int twice) { return HalfInt(twice); }

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return twice_ / 2.0; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt(a.twice_ + b.twice_); }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt(a.twice_ - b.twice_); }
    constexpr HalfInt operator-() const { return HalfInt(-twice_); }
    friend constexpr auto operator<=>(HalfInt a, HalfInt b) = default;

    HalfInt abs() const { return HalfInt(std::abs(twice_)); }
    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

private:
    int twice_;
};

}  // namespace rydft
