#ifndef GAUGE_POLYMER_TESTS_BRUTE_FORCE_HPP
#define GAUGE_POLYMER_TESTS_BRUTE_FORCE_HPP

// Slow reference implementations used only as test oracles.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "gauge_polymer/plaquette_graph.hpp"
#include "gauge_polymer/series.hpp"

namespace brute {

using gauge_polymer::PlaquetteIndex;

/** Redelmeier enumeration of connected plaquette sets of size <= cap containing root. */
inline void connected_sets(const PlaquetteIndex& idx, std::uint32_t root, int cap,
                           const std::function<void(const std::vector<std::uint32_t>&)>& emit) {
  std::set<std::uint32_t> marked{root};
  std::vector<std::uint32_t> current{root};
  std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];

  std::function<void(std::vector<std::uint32_t>)> rec = [&](std::vector<std::uint32_t> untried) {
    while (!untried.empty()) {
      std::uint32_t v = untried.back();
      untried.pop_back();
      current.push_back(v);
      emit(current);
      if (static_cast<int>(current.size()) < cap) {
        std::vector<std::uint32_t> next = untried, added;
        int n = idx.neighbors(v, buf);
        for (int i = 0; i < n; ++i)
          if (idx.valid_plaquette(buf[i]) && marked.insert(buf[i]).second) {
            next.push_back(buf[i]);
            added.push_back(buf[i]);
          }
        rec(next);
        for (std::uint32_t a : added) marked.erase(a);
      }
      current.pop_back();
    }
  };

  emit(current);
  std::vector<std::uint32_t> start;
  int n = idx.neighbors(root, buf);
  for (int i = 0; i < n; ++i)
    if (marked.insert(buf[i]).second) start.push_back(buf[i]);
  if (cap > 1) rec(start);
}

/** True if every 3-cell of the box has an even number of faces in the set. */
inline bool closed_on_box(const PlaquetteIndex& idx, const std::vector<std::uint32_t>& set) {
  std::vector<std::uint32_t> cubes;
  std::uint32_t buf[PlaquetteIndex::kMaxCubes];
  for (std::uint32_t p : set) {
    int n = idx.cubes_of(p, buf);
    cubes.insert(cubes.end(), buf, buf + n);
  }
  std::sort(cubes.begin(), cubes.end());
  for (std::size_t i = 0; i < cubes.size();) {
    std::size_t j = i;
    while (j < cubes.size() && cubes[j] == cubes[i]) ++j;
    if ((j - i) % 2) return false;
    i = j;
  }
  return true;
}

/** Vortices through root of size <= cap, found by filtering all connected sets. */
inline std::set<std::vector<std::uint32_t>> vortices(const PlaquetteIndex& idx, std::uint32_t root, int cap) {
  std::set<std::vector<std::uint32_t>> out;
  connected_sets(idx, root, cap, [&](const std::vector<std::uint32_t>& s) {
    if (!closed_on_box(idx, s)) return;
    std::vector<std::uint32_t> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    out.insert(sorted);
  });
  return out;
}

/**
 * Size histogram of the closed 2-forms of a box, by trying every plaquette subset.
 * With odd flags given, each form counts (-1)^{omega(q)}.
 */
inline std::vector<std::int64_t> closed_form_sizes(const PlaquetteIndex& idx,
                                                   const std::vector<std::uint8_t>& odd = {}) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t p = 0; p < idx.plaquette_slots(); ++p)
    if (idx.valid_plaquette(p)) ids.push_back(p);
  if (ids.size() > 24) throw std::invalid_argument("box too large for subset enumeration");
  std::vector<std::int64_t> hist(ids.size() + 1, 0);
  std::vector<std::uint32_t> set;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ids.size()); ++mask) {
    set.clear();
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (mask >> i & 1) set.push_back(ids[i]);
    if (!closed_on_box(idx, set)) continue;
    int sign = 1;
    if (!odd.empty())
      for (std::uint32_t p : set)
        if (odd[p]) sign = -sign;
    hist[set.size()] += sign;
  }
  return hist;
}

/** Coefficients of log(sum_n a_n x^n) up to x^order, given a_0 = 1. */
inline std::vector<gauge_polymer::Rational> log_series(const std::vector<std::int64_t>& a, int order) {
  using gauge_polymer::Rational;
  auto coef = [&](int n) { return n < static_cast<int>(a.size()) ? Rational(a[n]) : Rational(0); };
  std::vector<Rational> b(order + 1, Rational(0));
  for (int n = 1; n <= order; ++n) {
    Rational acc(0);
    for (int k = 1; k < n; ++k) acc += Rational(k) * b[k] * coef(n - k);
    b[n] = coef(n) - acc / Rational(n);
  }
  return b;
}

}  // namespace brute

#endif  // GAUGE_POLYMER_TESTS_BRUTE_FORCE_HPP
