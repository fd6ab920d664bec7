#ifndef GAUGE_POLYMER_SERIES_HPP
#define GAUGE_POLYMER_SERIES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gauge_polymer {

/** \brief Exact rational with 64-bit parts; overflow is reported, never wrapped. */
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) {
    if (den == 0) throw std::domain_error("zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    std::int64_t g = std::gcd(a.den_, b.den_);
    __int128 n = static_cast<__int128>(a.num_) * (b.den_ / g) + static_cast<__int128>(b.num_) * (a.den_ / g);
    __int128 d = static_cast<__int128>(a.den_ / g) * b.den_;
    return from_wide(n, d);
  }
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) { return (a - b).num_ < 0; }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static Rational from_wide(__int128 n, __int128 d) {
    if (d < 0) n = -n, d = -d;
    __int128 a = n < 0 ? -n : n, b = d;
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) n /= a, d /= a;
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || -n > lim || d > lim) throw std::overflow_error("rational overflow");
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
  }
  void normalize() {
    if (den_ < 0) num_ = -num_, den_ = -den_;
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) num_ /= g, den_ /= g;
  }

  std::int64_t num_, den_;
};

/** \brief Neumaier compensated summation. */
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0, c_ = 0;
};

/**
 * \brief Finite series sum_w c_w e^{-4 beta w} with exact rational coefficients.
 *
 * Truncated cluster sums are collected this way so that one enumeration serves
 * every beta and differences between series cancel exactly, weight by weight.
 */
class WeightSeries {
 public:
  void add(int weight, const Rational& c) {
    Rational& slot = terms_[weight];
    slot += c;
    if (slot.num() == 0) terms_.erase(weight);
  }

  Rational coefficient(int weight) const {
    auto it = terms_.find(weight);
    return it == terms_.end() ? Rational(0) : it->second;
  }
  const std::map<int, Rational>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int leading_weight() const {
    if (terms_.empty()) throw std::logic_error("empty series");
    return terms_.begin()->first;
  }

  /** \brief Terms of weight <= k only. */
  WeightSeries truncated(int k) const {
    WeightSeries out;
    for (const auto& [w, c] : terms_)
      if (w <= k) out.terms_.emplace(w, c);
    return out;
  }

  /** \brief Ascending-weight compensated evaluation at beta. */
  double evaluate(double beta) const {
    CompensatedSum s;
    for (const auto& [w, c] : terms_) s.add(c.to_double() * std::exp(-4.0 * beta * w));
    return s.value();
  }

  WeightSeries& operator+=(const WeightSeries& o) {
    for (const auto& [w, c] : o.terms_) add(w, c);
    return *this;
  }
  WeightSeries& operator-=(const WeightSeries& o) {
    for (const auto& [w, c] : o.terms_) add(w, -c);
    return *this;
  }
  friend WeightSeries operator-(WeightSeries a, const WeightSeries& b) { return a -= b; }
  friend WeightSeries operator+(WeightSeries a, const WeightSeries& b) { return a += b; }
  WeightSeries scaled(const Rational& f) const {
    WeightSeries out;
    for (const auto& [w, c] : terms_) out.add(w, c * f);
    return out;
  }
  friend bool operator==(const WeightSeries&, const WeightSeries&) = default;

 private:
  std::map<int, Rational> terms_;
};

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_SERIES_HPP
