#ifndef GAUGE_POLYMER_GF2_HPP
#define GAUGE_POLYMER_GF2_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace gauge_polymer {

/**
 * \brief Linear system over GF(2) stored as dense bit rows.
 *
 * Elimination walks the columns in index order and takes the first row with a
 * set bit as pivot, so the returned solution (free variables zero) depends only
 * on the row and column order.
 */
class Gf2System {
 public:
  explicit Gf2System(std::size_t columns)
      : columns_(columns), words_((columns + 1 + 63) / 64) {}

  std::size_t columns() const { return columns_; }
  std::size_t rows() const { return rows_.size() / words_; }

  void add_row(const std::vector<std::size_t>& ones, bool rhs) {
    std::size_t at = rows_.size();
    rows_.resize(at + words_, 0);
    for (std::size_t c : ones) rows_[at + c / 64] ^= std::uint64_t{1} << (c % 64);
    if (rhs) rows_[at + columns_ / 64] ^= std::uint64_t{1} << (columns_ % 64);
  }

  /** \brief Solution with free variables zero, or nullopt if inconsistent. */
  std::optional<std::vector<std::uint8_t>> solve() const {
    std::vector<std::uint64_t> a = rows_;
    std::size_t n = rows();
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < columns_ && r < n; ++c) {
      std::size_t w = c / 64;
      std::uint64_t bit = std::uint64_t{1} << (c % 64);
      std::size_t p = r;
      while (p < n && !(a[p * words_ + w] & bit)) ++p;
      if (p == n) continue;
      if (p != r)
        for (std::size_t k = 0; k < words_; ++k) std::swap(a[p * words_ + k], a[r * words_ + k]);
      for (std::size_t q = 0; q < n; ++q) {
        if (q == r || !(a[q * words_ + w] & bit)) continue;
        for (std::size_t k = w; k < words_; ++k) a[q * words_ + k] ^= a[r * words_ + k];
      }
      pivot_col.push_back(c);
      ++r;
    }
    rank_ = r;
    std::size_t rw = columns_ / 64;
    std::uint64_t rbit = std::uint64_t{1} << (columns_ % 64);
    for (std::size_t q = r; q < n; ++q)
      if (a[q * words_ + rw] & rbit) return std::nullopt;
    std::vector<std::uint8_t> x(columns_, 0);
    for (std::size_t q = 0; q < r; ++q) x[pivot_col[q]] = (a[q * words_ + rw] & rbit) ? 1 : 0;
    return x;
  }

  /** \brief Rank found by the last call to solve(). */
  std::size_t last_rank() const { return rank_; }

 private:
  std::size_t columns_;
  std::size_t words_;
  std::vector<std::uint64_t> rows_;
  mutable std::size_t rank_ = 0;
};

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_GF2_HPP
