#ifndef GAUGE_POLYMER_URSELL_HPP
#define GAUGE_POLYMER_URSELL_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "series.hpp"

namespace gauge_polymer {

inline constexpr int kMaxUrsellNodes = 16;

inline std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/**
 * \brief Sum over connected spanning subgraphs G of the compatibility graph of (-1)^{|E(G)|}.
 *
 * adj[i] has bit j set when nodes i and j are adjacent (i != j). Uses the
 * recursion on the block containing the lowest node: every spanning subgraph of
 * S splits into the component T of min(S) and an arbitrary subgraph of S \ T,
 * and the signed count of all subgraphs of S is 1 if S spans no edge, else 0.
 */
inline std::int64_t connected_graph_sum(const std::vector<std::uint32_t>& adj) {
  int k = static_cast<int>(adj.size());
  if (k == 0) throw std::invalid_argument("empty vortex family");
  if (k > kMaxUrsellNodes) throw std::invalid_argument("too many vortices for the Ursell function");
  std::uint32_t full = (k == 32) ? ~0u : ((1u << k) - 1);
  std::vector<std::uint8_t> independent(std::size_t{1} << k, 1);
  for (std::uint32_t s = 1; s <= full; ++s) {
    int i = __builtin_ctz(s);
    std::uint32_t rest = s & (s - 1);
    independent[s] = independent[rest] && !(adj[i] & rest);
  }
  std::vector<std::int64_t> g(std::size_t{1} << k, 0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    std::uint32_t low = s & (~s + 1);
    std::int64_t v = independent[s];
    std::uint32_t others = s & ~low;
    // proper subsets T of s containing low: T = low | t with t a proper subset of others
    for (std::uint32_t t = (others - 1) & others;; t = (t - 1) & others) {
      if (t != others) {
        std::uint32_t tt = low | t;
        if (independent[s & ~tt]) v -= g[tt];
      }
      if (t == 0) break;
    }
    g[s] = v;
  }
  return g[full];
}

/** \brief U(nu_1..nu_k) = connected_graph_sum / k!, exact. */
inline Rational ursell(const std::vector<std::uint32_t>& adj) {
  return Rational(connected_graph_sum(adj), factorial(static_cast<int>(adj.size())));
}

/** \brief Ursell function of a list of items under an adjacency predicate. */
template <class T, class Adjacent>
Rational ursell(const std::vector<T>& items, Adjacent&& adjacent) {
  std::vector<std::uint32_t> adj(items.size(), 0);
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if (adjacent(items[i], items[j])) {
        adj[i] |= 1u << j;
        adj[j] |= 1u << i;
      }
  return ursell(adj);
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_URSELL_HPP
