#ifndef GAUGE_POLYMER_CLUSTER_HPP
#define GAUGE_POLYMER_CLUSTER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "plaquette_graph.hpp"
#include "series.hpp"
#include "ursell.hpp"
#include "vortex.hpp"

namespace gauge_polymer {

/** \brief M = 10(m-2), the degree bound of the plaquette graph. */
inline int degree_bound(int m) { return 10 * (m - 2); }

/** \brief beta_0(m) = log(10(m-2))/2 + 1/6. */
inline double beta0(int m) { return 0.5 * std::log(10.0 * (m - 2)) + 1.0 / 6.0; }

inline int default_kmax(int m) { return 4 * (m - 1) + 2; }

struct TruncationParams {
  int dim = 3;
  double beta = 2.0;
  int kmax = 0;  // 0 selects 4(m-1)+2
  int nmax = 6;
  std::optional<double> beta_star;
  std::size_t node_budget = kDefaultNodeBudget;

  int cutoff() const { return kmax > 0 ? kmax : default_kmax(dim); }
  /** \brief beta*, defaulting to the midpoint of (beta_0, beta). */
  double star() const { return beta_star ? *beta_star : 0.5 * (beta0(dim) + beta); }
  /** \brief True when the tail bounds are available (beta_0 < beta* < beta). */
  bool rigorous() const {
    double s = star();
    return beta > beta0(dim) && s > beta0(dim) && s < beta;
  }
};

/** \brief j-th term M^{2j-1} e^{-2(2 beta* - 1/3) j} of the tail constant series. */
inline double tail_series_term(int m, double beta_star, int j) {
  double M = degree_bound(m);
  return std::exp((2.0 * j - 1) * std::log(M) - 2.0 * (2.0 * beta_star - 1.0 / 3.0) * j);
}

/** \brief C-hat = sum over j >= 2(m-1) of the series terms, in closed form. */
inline double tail_series_constant(int m, double beta_star) {
  if (!(beta_star > beta0(m))) throw DomainError("beta* must exceed beta_0(m)");
  double M = degree_bound(m);
  double log_r = 2.0 * std::log(M) - 2.0 * (2.0 * beta_star - 1.0 / 3.0);
  int j0 = 2 * (m - 1);
  return std::exp(j0 * log_r - std::log(M)) / -std::expm1(log_r);
}

/** \brief Bound on sum over clusters V containing a fixed plaquette with |V| >= k of |Psi_beta(V)|. */
inline double tail_bound(const TruncationParams& p, int k) {
  double s = p.star();
  if (!(s > beta0(p.dim) && s < p.beta)) throw DomainError("beta* must lie in (beta_0(m), beta)");
  return tail_series_constant(p.dim, s) * std::exp(-4.0 * (p.beta - s) * k);
}

/** \brief A vortex interned by a ClusterEngine, in window plaquette ids. */
struct VortexRecord {
  std::vector<std::uint32_t> plaquettes;  // sorted
  std::vector<std::uint32_t> reach;       // sorted: support and its G_2 neighbours
  int size = 0;
  bool touches_boundary = false;
};

/**
 * \brief Non-decomposable multiset of vortices.
 *
 * graph_sum is k! U(nu_1..nu_k), the signed connected-graph count. The weight entering log Z
 * is graph_sum / prod n_nu!, since each multiset arises from k!/prod n_nu!
 * ordered tuples.
 */
struct Cluster {
  std::vector<std::pair<int, int>> members;  // (vortex id, multiplicity), ascending id
  int weight = 0;
  int cardinality = 0;
  std::int64_t graph_sum = 0;
  std::int64_t symmetry = 1;

  Rational coefficient() const { return Rational(graph_sum, symmetry); }
  /** \brief Psi_beta(V) = coefficient e^{-4 beta |V|}. */
  double psi(double beta) const { return coefficient().to_double() * std::exp(-4.0 * beta * weight); }
};

/** \brief Vortex catalogue and cluster enumeration inside one window. */
class ClusterEngine {
 public:
  /**
   * In box mode the polymers are the connected closed forms of the finite box
   * itself and boundary contact is allowed; otherwise the window stands in for
   * Z^m and a cluster touching its boundary is an error.
   */
  ClusterEngine(const LatticeBox& window, int kmax, int nmax, std::size_t node_budget = kDefaultNodeBudget,
                bool box_mode = false)
      : idx_(window), enumerator_(idx_, node_budget), kmax_(kmax), nmax_(nmax), box_mode_(box_mode) {
    if (kmax < 1) throw std::invalid_argument("kmax must be positive");
    if (nmax < 1 || nmax > kMaxUrsellNodes) throw std::invalid_argument("nmax out of range");
  }
  ClusterEngine(const ClusterEngine&) = delete;
  ClusterEngine& operator=(const ClusterEngine&) = delete;

  const PlaquetteIndex& index() const { return idx_; }
  int kmax() const { return kmax_; }
  int nmax() const { return nmax_; }
  const VortexRecord& vortex(int id) const { return vortices_[static_cast<std::size_t>(id)]; }
  std::size_t vortex_count() const { return vortices_.size(); }

  Vortex to_vortex(int id) const {
    std::vector<Cell> cells;
    for (std::uint32_t p : vortex(id).plaquettes) cells.push_back(idx_.plaquette(p));
    return Vortex(std::move(cells));
  }

  /** \brief Ids of the vortices of size <= cap containing window plaquette p (memoised). */
  std::vector<int> vortices_containing(std::uint32_t p, int cap) {
    auto it = by_plaquette_.find(p);
    if (it == by_plaquette_.end() || it->second.first < cap) {
      std::vector<int> ids;
      enumerator_.for_each_containing(p, cap, [&](const std::vector<std::uint32_t>& s) { ids.push_back(intern(s)); });
      std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        return vortex(a).size != vortex(b).size ? vortex(a).size < vortex(b).size : a < b;
      });
      it = by_plaquette_.insert_or_assign(p, std::make_pair(cap, std::move(ids))).first;
    }
    std::vector<int> out;
    for (int id : it->second.second) {
      if (vortex(id).size > cap) break;
      out.push_back(id);
    }
    return out;
  }

  /** \brief Incompatibility: the supports overlap or contain G_2 neighbours. */
  bool adjacent(int a, int b) const {
    const auto& reach = vortex(a).reach;
    for (std::uint32_t p : vortex(b).plaquettes)
      if (std::binary_search(reach.begin(), reach.end(), p)) return true;
    return false;
  }

  /**
   * \brief Visits every cluster with weight <= kmax and cardinality <= nmax that
   * contains at least one of the seed vortices, each exactly once.
   *
   * Clusters grow one adjacent vortex at a time from a seed; a multiset is
   * connected, so some growth order reaches it, and a set of visited encodings
   * removes repeats. A cluster containing a vortex that touches the window
   * boundary raises MarginError.
   */
  template <class Visit>
  void for_each_cluster(const std::vector<int>& seeds, Visit&& visit) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> stack;
    for (int s : seeds)
      if (vortex(s).size <= kmax_ && seen.insert({s}).second) stack.push_back({s});
    std::sort(stack.begin(), stack.end(), std::greater<>());
    while (!stack.empty()) {
      std::vector<int> key = std::move(stack.back());
      stack.pop_back();
      Cluster c = build(key);
      for (const auto& [id, n] : c.members)
        if (!box_mode_ && vortex(id).touches_boundary)
          throw MarginError("a cluster reaches the window boundary; enlarge the window");
      visit(static_cast<const Cluster&>(c));
      if (c.cardinality >= nmax_) continue;
      int rem = kmax_ - c.weight;
      if (rem < 1) continue;
      std::vector<std::vector<int>> next;
      for (const auto& [id, n] : c.members) {
        std::vector<std::uint32_t> reach = vortex(id).reach;
        for (std::uint32_t x : reach)
          for (int u : vortices_containing(x, rem)) {
            std::vector<int> grown = key;
            grown.insert(std::upper_bound(grown.begin(), grown.end(), u), u);
            if (seen.insert(grown).second) next.push_back(std::move(grown));
          }
      }
      std::sort(next.begin(), next.end(), std::greater<>());
      for (auto& g : next) stack.push_back(std::move(g));
    }
  }

  /** \brief Cluster record for a sorted list of vortex ids (with repeats). */
  Cluster build(const std::vector<int>& key) {
    Cluster c;
    c.cardinality = static_cast<int>(key.size());
    for (std::size_t i = 0; i < key.size();) {
      std::size_t j = i;
      while (j < key.size() && key[j] == key[i]) ++j;
      int n = static_cast<int>(j - i);
      c.members.emplace_back(key[i], n);
      c.symmetry *= factorial(n);
      c.weight += n * vortex(key[i]).size;
      i = j;
    }
    std::vector<std::uint32_t> adj(key.size(), 0);
    for (std::size_t i = 0; i < key.size(); ++i)
      for (std::size_t j = i + 1; j < key.size(); ++j)
        if (adjacent(key[i], key[j])) {
          adj[i] |= 1u << j;
          adj[j] |= 1u << i;
        }
    auto it = ursell_cache_.find(adj);
    if (it == ursell_cache_.end()) it = ursell_cache_.emplace(adj, connected_graph_sum(adj)).first;
    c.graph_sum = it->second;
    return c;
  }

  /** \brief V(q) mod 2, given a flag per window plaquette for odd coefficient in q. */
  int cluster_value(const Cluster& c, const std::vector<std::uint8_t>& odd_plaquette) const {
    int parity = 0;
    for (const auto& [id, n] : c.members) {
      if (n % 2 == 0) continue;
      for (std::uint32_t p : vortex(id).plaquettes) parity ^= odd_plaquette[p];
    }
    return parity;
  }

  bool cluster_contains(const Cluster& c, std::uint32_t p) const {
    for (const auto& [id, n] : c.members)
      if (std::binary_search(vortex(id).plaquettes.begin(), vortex(id).plaquettes.end(), p)) return true;
    return false;
  }

 private:
  int intern(const std::vector<std::uint32_t>& plaquettes) {
    auto it = ids_.find(plaquettes);
    if (it != ids_.end()) return it->second;
    VortexRecord r;
    r.plaquettes = plaquettes;
    r.size = static_cast<int>(plaquettes.size());
    std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];
    r.reach = plaquettes;
    for (std::uint32_t p : plaquettes) {
      int n = idx_.neighbors(p, buf);
      r.reach.insert(r.reach.end(), buf, buf + n);
      if (idx_.on_boundary(p)) r.touches_boundary = true;
    }
    std::sort(r.reach.begin(), r.reach.end());
    r.reach.erase(std::unique(r.reach.begin(), r.reach.end()), r.reach.end());
    int id = static_cast<int>(vortices_.size());
    vortices_.push_back(std::move(r));
    ids_.emplace(plaquettes, id);
    return id;
  }

  PlaquetteIndex idx_;
  VortexEnumerator enumerator_;
  int kmax_, nmax_;
  bool box_mode_;
  std::vector<VortexRecord> vortices_;
  std::map<std::vector<std::uint32_t>, int> ids_;
  std::unordered_map<std::uint32_t, std::pair<int, std::vector<int>>> by_plaquette_;
  std::map<std::vector<std::uint32_t>, std::int64_t> ursell_cache_;
};

/** \brief Box grown by margin cells on every side. */
inline LatticeBox grow(const LatticeBox& box, int margin) {
  Point lo = box.lower(), hi = box.upper();
  for (int i = 0; i < box.dim(); ++i) lo[i] -= margin, hi[i] += margin;
  return LatticeBox(box.dim(), lo, hi);
}

/** \brief Margin the window needs around the root region for cutoff kmax. */
inline int required_margin(int kmax) { return kmax + 2; }

inline void check_margin(const LatticeBox& window, const LatticeBox& region, int kmax) {
  int need = required_margin(kmax);
  for (int i = 0; i < window.dim(); ++i)
    if (region.lower()[i] - window.lower()[i] < need || window.upper()[i] - region.upper()[i] < need)
      throw MarginError("window must extend " + std::to_string(need) + " cells beyond the root region");
}

/** \brief Seeds for clusters V whose support contains p (vortex ids). */
inline std::vector<int> seeds_containing(ClusterEngine& engine, std::uint32_t p) {
  return engine.vortices_containing(p, engine.kmax());
}

/**
 * \brief F truncated: sum over clusters V with p0 in supp V, |V| <= kmax, of Psi(V)/|V|,
 * as a series in e^{-4 beta}. p0 is a plaquette of Z^m; the window is chosen here.
 */
inline WeightSeries log_partition_series(int m, int kmax, int nmax, std::size_t budget = kDefaultNodeBudget) {
  LatticeBox region(m, Point{}, [&] {
    Point hi{};
    hi[0] = hi[1] = 1;
    return hi;
  }());
  ClusterEngine engine(grow(region, required_margin(kmax)), kmax, nmax, budget);
  Cell p0{Point{}, static_cast<AxisSet>(axis_bit(0) | axis_bit(1)), 1};
  std::uint32_t root = *engine.index().plaquette_id(p0);
  WeightSeries out;
  engine.for_each_cluster(seeds_containing(engine, root), [&](const Cluster& c) {
    if (engine.cluster_contains(c, root)) out.add(c.weight, c.coefficient() * Rational(1, c.weight));
  });
  return out;
}

inline double truncated_log_partition_per_plaquette(const TruncationParams& p) {
  return log_partition_series(p.dim, p.cutoff(), p.nmax, p.node_budget).evaluate(p.beta);
}

/** \brief Sum of Psi(V) over every cluster of the window; log Z of the box in box mode. */
inline WeightSeries total_cluster_series(ClusterEngine& engine) {
  const PlaquetteIndex& idx = engine.index();
  std::vector<int> seeds;
  for (std::uint32_t p = 0; p < idx.plaquette_slots(); ++p)
    if (idx.valid_plaquette(p))
      for (int v : engine.vortices_containing(p, engine.kmax())) seeds.push_back(v);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  WeightSeries out;
  engine.for_each_cluster(seeds, [&](const Cluster& c) { out.add(c.weight, c.coefficient()); });
  return out;
}

/** \brief Sum of 2 Psi(V) over the engine's clusters with V(q) = 1, q a 2-chain inside its window. */
inline WeightSeries wilson_series(ClusterEngine& engine, const Chain& q) {
  const PlaquetteIndex& idx = engine.index();
  std::vector<std::uint8_t> odd(idx.plaquette_slots(), 0);
  std::vector<std::uint32_t> q_ids;
  for (const auto& [c, n] : q.terms()) {
    if (n % 2 == 0) continue;
    auto id = idx.plaquette_id(c);
    if (!id) throw MarginError("surface leaves the window");
    odd[*id] = 1;
    q_ids.push_back(*id);
  }
  // V(q) = 1 forces a member with nu(q) = 1, so those vortices seed the search
  std::vector<int> seeds;
  for (std::uint32_t p : q_ids)
    for (int v : engine.vortices_containing(p, engine.kmax())) {
      int parity = 0;
      for (std::uint32_t x : engine.vortex(v).plaquettes) parity ^= odd[x];
      if (parity) seeds.push_back(v);
    }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  WeightSeries out;
  engine.for_each_cluster(seeds, [&](const Cluster& c) {
    if (engine.cluster_value(c, odd)) out.add(c.weight, c.coefficient() * Rational(2));
  });
  return out;
}

/**
 * \brief -log<W_gamma> truncated: sum over clusters with V(q) = 1 and |V| <= kmax of
 * 2 Psi(V), as a series in e^{-4 beta}.
 *
 * q is a 2-chain with boundary gamma; the window defaults to its bounding box
 * grown by the required margin.
 */
inline WeightSeries wilson_log_series(const Chain& gamma, const Chain& q, int m, int kmax, int nmax,
                                      std::size_t budget = kDefaultNodeBudget,
                                      std::optional<LatticeBox> window = std::nullopt) {
  if (q.degree() != 2 || gamma.degree() != 1) throw std::invalid_argument("expected a 1-chain and a 2-chain");
  if (boundary(q) != gamma) throw std::invalid_argument("surface boundary differs from the loop");
  std::vector<Cell> cells;
  for (const auto& [c, n] : q.terms()) cells.push_back(c);
  for (const auto& [c, n] : gamma.terms()) cells.push_back(c);
  if (cells.empty()) return {};
  LatticeBox region = bounding_box(cells, m);
  LatticeBox win = window ? *window : grow(region, required_margin(kmax));
  check_margin(win, region, kmax);

  ClusterEngine engine(win, kmax, nmax, budget);
  return wilson_series(engine, q);
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_CLUSTER_HPP
