#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace stagevote {

// Exact non-overflowing-in-practice rational for ballot weights. Denominators
// are bounded by the roster size, so 64-bit terms are plenty.
class Fraction {
 public:
  constexpr Fraction() = default;
  constexpr Fraction(std::int64_t num) : num_(num), den_(1) {}  // NOLINT(implicit)
  constexpr Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("Fraction: zero denominator");
    normalize();
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  constexpr Fraction& operator+=(const Fraction& o) {
    const std::int64_t g = std::gcd(den_, o.den_);
    const std::int64_t l = den_ / g * o.den_;
    num_ = num_ * (l / den_) + o.num_ * (l / o.den_);
    den_ = l;
    normalize();
    return *this;
  }
  friend constexpr Fraction operator+(Fraction a, const Fraction& b) { return a += b; }
  friend constexpr bool operator==(const Fraction&, const Fraction&) = default;
  friend constexpr bool operator<(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Fraction& f) {
    os << f.num_;
    if (f.den_ != 1) os << '/' << f.den_;
    return os;
  }

 private:
  constexpr void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace stagevote
