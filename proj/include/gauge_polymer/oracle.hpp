#ifndef GAUGE_POLYMER_ORACLE_HPP
#define GAUGE_POLYMER_ORACLE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "plaquette_graph.hpp"
#include "vortex.hpp"

namespace gauge_polymer {

inline constexpr int kMaxGaugeBits = 28;

/** \brief Plaquette subset of a box as a bit vector over PlaquetteIndex ids. */
class PlaquetteBits {
 public:
  explicit PlaquetteBits(std::size_t slots = 0) : words_((slots + 63) / 64, 0) {}
  void flip(std::uint32_t p) { words_[p / 64] ^= std::uint64_t{1} << (p % 64); }
  bool test(std::uint32_t p) const { return words_[p / 64] >> (p % 64) & 1; }
  PlaquetteBits& operator^=(const PlaquetteBits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
  }
  int count() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }
  int parity_with(const PlaquetteBits& mask) const {
    int n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) n += std::popcount(words_[i] & mask.words_[i]);
    return n & 1;
  }
  friend bool operator==(const PlaquetteBits&, const PlaquetteBits&) = default;
  friend bool operator<(const PlaquetteBits& a, const PlaquetteBits& b) { return a.words_ < b.words_; }

 private:
  std::vector<std::uint64_t> words_;
};

/** \brief Edges of a box off a lexicographic BFS spanning tree; their coboundaries span the closed 2-forms. */
inline std::vector<Cell> gauge_free_edges(const LatticeBox& box) {
  int m = box.dim();
  std::set<Point> seen{box.lower()};
  std::deque<Point> queue{box.lower()};
  std::set<Cell> tree;
  while (!queue.empty()) {
    Point v = queue.front();
    queue.pop_front();
    for (int a = 0; a < m; ++a)
      for (int dir : {-1, 1}) {
        Point w = v;
        w[a] += dir;
        if (!box.contains(w) || seen.count(w)) continue;
        seen.insert(w);
        queue.push_back(w);
        Cell e{dir > 0 ? v : w, axis_bit(a), 1};
        tree.insert(e);
      }
  }
  std::vector<Cell> out;
  for (const Cell& e : enumerate_cells(box, 1))
    if (!tree.count(e)) out.push_back(e);
  return out;
}

/** \brief Number of closed 2-forms on the box is 2^gauge_free_bits(box) = 2^{E-V+1}. */
inline int gauge_free_bits(const LatticeBox& box) {
  std::size_t edges = enumerate_cells(box, 1).size();
  return static_cast<int>(edges - box.vertex_count() + 1);
}

/**
 * \brief Calls visit(bits) once for every closed 2-form on the box.
 *
 * The forms are d(sigma) for sigma supported off a spanning tree, visited in
 * Gray-code order so each step flips one generator.
 */
template <class Visit>
void for_each_closed_2form(const PlaquetteIndex& idx, Visit&& visit) {
  const LatticeBox& box = idx.box();
  int bits = gauge_free_bits(box);
  if (bits > kMaxGaugeBits) throw BudgetExceeded("closed-form enumeration needs 2^" + std::to_string(bits) + " states");
  std::vector<PlaquetteBits> gens;
  for (const Cell& e : gauge_free_edges(box)) {
    PlaquetteBits g(idx.plaquette_slots());
    for (const auto& [p, n] : coboundary(e, box).terms()) g.flip(*idx.plaquette_id(p));
    gens.push_back(std::move(g));
  }
  PlaquetteBits cur(idx.plaquette_slots());
  visit(static_cast<const PlaquetteBits&>(cur));
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << bits); ++i) {
    cur ^= gens[static_cast<std::size_t>(std::countr_zero(i))];
    visit(static_cast<const PlaquetteBits&>(cur));
  }
}

/** \brief Every closed 2-form on the box as a Form (small boxes only). */
inline std::vector<Form> enumerate_closed_2forms(const LatticeBox& box) {
  PlaquetteIndex idx(box);
  std::vector<Form> out;
  for_each_closed_2form(idx, [&](const PlaquetteBits& b) {
    Form f(2);
    for (std::uint32_t p = 0; p < idx.plaquette_slots(); ++p)
      if (idx.valid_plaquette(p) && b.test(p)) f.set(idx.plaquette(p), true);
    out.push_back(std::move(f));
  });
  return out;
}

/** \brief Closed-form counts by support size, split by the parity of omega(q). */
struct SizeHistogram {
  std::vector<double> even, odd;
  double total_count() const {
    double n = 0;
    for (double x : even) n += x;
    for (double x : odd) n += x;
    return n;
  }
};

inline PlaquetteBits surface_mask(const PlaquetteIndex& idx, const Chain& q) {
  PlaquetteBits mask(idx.plaquette_slots());
  for (const auto& [c, n] : q.terms()) {
    if (n % 2 == 0) continue;
    auto id = idx.plaquette_id(c);
    if (!id) throw DomainError("surface leaves the box");
    mask.flip(*id);
  }
  return mask;
}

inline SizeHistogram closed_form_histogram(const LatticeBox& box, const Chain& q = Chain(2)) {
  PlaquetteIndex idx(box);
  PlaquetteBits mask = surface_mask(idx, q);
  std::size_t plaquettes = enumerate_cells(box, 2).size();
  SizeHistogram h{std::vector<double>(plaquettes + 1, 0), std::vector<double>(plaquettes + 1, 0)};
  for_each_closed_2form(idx, [&](const PlaquetteBits& b) {
    (b.parity_with(mask) ? h.odd : h.even)[static_cast<std::size_t>(b.count())] += 1;
  });
  return h;
}

/** \brief log sum_k c_k e^{-4 beta k}, anchored at the largest term. */
inline double log_weighted_sum(const std::vector<double>& counts, double beta) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 0) top = std::max(top, std::log(counts[k]) - 4.0 * beta * k);
  if (!std::isfinite(top)) return top;
  double s = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 0) s += std::exp(std::log(counts[k]) - 4.0 * beta * k - top);
  return top + std::log(s);
}

struct ExactResult {
  double log_partition = 0;
  double wilson = 1;
  double minus_log_wilson = 0;
  double count = 0;
};

inline ExactResult exact_from_histogram(const SizeHistogram& h, double beta) {
  ExactResult r;
  std::vector<double> all(h.even.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = h.even[k] + h.odd[k];
  r.log_partition = log_weighted_sum(all, beta);
  double odd_share = std::exp(log_weighted_sum(h.odd, beta) - r.log_partition);
  r.wilson = 1 - 2 * odd_share;
  r.minus_log_wilson = -std::log1p(-2 * odd_share);
  r.count = h.total_count();
  return r;
}

/** \brief log Z and, given q, <W_gamma> by exhaustive enumeration of closed 2-forms. */
inline ExactResult exact_partition(const LatticeBox& box, double beta, const Chain& q = Chain(2)) {
  if (beta < 0) throw DomainError("beta must be non-negative");
  return exact_from_histogram(closed_form_histogram(box, q), beta);
}

inline double exact_wilson(const LatticeBox& box, double beta, const Chain& gamma, const Chain& q) {
  if (boundary(q) != gamma) throw std::invalid_argument("surface boundary differs from the loop");
  return exact_partition(box, beta, q).wilson;
}

/**
 * \brief log of the sum over pairwise compatible families of box vortices of prod phi.
 *
 * Box vortices are the G_2-connected closed forms of the box; two are
 * compatible when their supports neither overlap nor touch.
 */
inline double polymer_partition(const LatticeBox& box, double beta, std::size_t node_budget = kDefaultNodeBudget) {
  if (beta < 0) throw DomainError("beta must be non-negative");
  PlaquetteIndex idx(box);
  std::vector<std::uint32_t> all;
  for (std::uint32_t p = 0; p < idx.plaquette_slots(); ++p)
    if (idx.valid_plaquette(p)) all.push_back(p);
  if (all.empty()) return 0.0;
  VortexEnumerator en(idx, node_budget);
  std::set<std::vector<std::uint32_t>> found;
  for (std::uint32_t p : all)
    en.for_each_containing(p, static_cast<int>(all.size()), [&](const std::vector<std::uint32_t>& v) { found.insert(v); });
  std::vector<std::vector<std::uint32_t>> vortices(found.begin(), found.end());
  std::size_t n = vortices.size();
  std::vector<std::vector<std::uint8_t>> clash(n, std::vector<std::uint8_t>(n, 0));
  std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::uint32_t> reach(vortices[i].begin(), vortices[i].end());
    for (std::uint32_t p : vortices[i]) {
      int k = idx.neighbors(p, buf);
      reach.insert(buf, buf + k);
    }
    for (std::size_t j = 0; j < n; ++j)
      for (std::uint32_t p : vortices[j])
        if (reach.count(p)) {
          clash[i][j] = 1;
          break;
        }
  }
  // terms are accumulated per total size, then combined like the exact sum
  std::vector<double> counts(all.size() + 1, 0);
  std::vector<std::size_t> chosen;
  auto rec = [&](auto&& self, std::size_t start, std::size_t size) -> void {
    counts[size] += 1;
    for (std::size_t i = start; i < n; ++i) {
      bool ok = true;
      for (std::size_t c : chosen)
        if (clash[c][i]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen.push_back(i);
      self(self, i + 1, size + vortices[i].size());
      chosen.pop_back();
    }
  };
  rec(rec, 0, 0);
  return log_weighted_sum(counts, beta);
}

/**
 * \brief Exact log Z and Wilson expectation for m = 3 by a transfer matrix along axis 2.
 *
 * In the gauge where axis-2 edges vanish, a closed 2-form is the slice form on
 * the bottom layer plus, for every step, an arbitrary 1-form tau on the slice
 * edges: tau fills the vertical plaquettes and adds d(tau) to the next layer.
 * This is a bijection onto the closed forms, so no gauge factor appears.
 * The state is the plaquette pattern of the current layer together with the
 * parity of omega(q) so far; all arithmetic is on non-negative numbers.
 */
class TransferMatrixOracle {
 public:
  static constexpr int kMaxSlicePlaquettes = 22;

  explicit TransferMatrixOracle(const LatticeBox& box) : box_(box) {
    if (box.dim() != 3) throw DomainError("transfer-matrix oracle is for m = 3");
    nx_ = box.extent(0);
    ny_ = box.extent(1);
    layers_ = box.extent(2);
    slice_plaquettes_ = nx_ * ny_;
    if (slice_plaquettes_ > kMaxSlicePlaquettes) throw BudgetExceeded("slice too large for the transfer matrix");
    for (int x = 0; x <= nx_; ++x)
      for (int y = 0; y <= ny_; ++y)
        for (int a = 0; a < 2; ++a) {
          if ((a == 0 && x == nx_) || (a == 1 && y == ny_)) continue;
          std::uint32_t flips = 0;
          // plaquettes of the slice with this edge on their boundary
          if (a == 0) {
            if (y < ny_) flips |= bit(x, y);
            if (y > 0) flips |= bit(x, y - 1);
          } else {
            if (x < nx_) flips |= bit(x, y);
            if (x > 0) flips |= bit(x - 1, y);
          }
          edges_.push_back({x, y, a, flips});
        }
  }

  struct Result {
    double log_partition = 0;
    double wilson = 1;
    double minus_log_wilson = 0;
  };

  Result run(double beta, const Chain& q = Chain(2)) const {
    if (beta < 0) throw DomainError("beta must be non-negative");
    const double x = std::exp(-4.0 * beta);
    std::size_t states = std::size_t{1} << slice_plaquettes_;
    std::vector<std::uint32_t> flat_mask(layers_ + 1, 0);
    std::vector<std::vector<std::uint8_t>> vertical(layers_, std::vector<std::uint8_t>(edges_.size(), 0));
    for (const auto& [c, n] : q.terms()) {
      if (n % 2 == 0) continue;
      if (!box_.contains(c)) throw DomainError("surface leaves the box");
      int z = c.base[2] - box_.lower()[2];
      int cx = c.base[0] - box_.lower()[0], cy = c.base[1] - box_.lower()[1];
      if (c.axes == (axis_bit(0) | axis_bit(1))) {
        flat_mask[z] ^= bit(cx, cy);
      } else {
        int a = (c.axes & axis_bit(0)) ? 0 : 1;
        for (std::size_t i = 0; i < edges_.size(); ++i)
          if (edges_[i].x == cx && edges_[i].y == cy && edges_[i].a == a) vertical[z][i] ^= 1;
      }
    }
    // v[parity * states + pattern]
    std::vector<double> v(2 * states, 0.0), w(2 * states);
    std::vector<double> pow_x(slice_plaquettes_ + 1, 1.0);
    for (int k = 1; k <= slice_plaquettes_; ++k) pow_x[k] = pow_x[k - 1] * x;
    auto layer = [&](int z) {
      for (int par = 0; par < 2; ++par)
        for (std::size_t s = 0; s < states; ++s) {
          int flipped = par ^ (std::popcount(s & flat_mask[z]) & 1);
          w[flipped * states + s] = v[par * states + s] * pow_x[std::popcount(s)];
        }
      std::swap(v, w);
    };
    for (std::size_t s = 0; s < states; ++s) v[s] = 1.0;
    layer(0);
    for (int z = 0; z < layers_; ++z) {
      for (std::size_t i = 0; i < edges_.size(); ++i) {
        std::uint32_t f = edges_[i].flips;
        int tog = vertical[z][i];
        for (int par = 0; par < 2; ++par)
          for (std::size_t s = 0; s < states; ++s)
            w[par * states + s] = v[par * states + s] + x * v[(par ^ tog) * states + (s ^ f)];
        std::swap(v, w);
      }
      layer(z + 1);
    }
    double even = 0, odd = 0;
    for (std::size_t s = 0; s < states; ++s) even += v[s], odd += v[states + s];
    Result r;
    r.log_partition = std::log(even + odd);
    r.wilson = (even - odd) / (even + odd);
    r.minus_log_wilson = -std::log1p(-2 * odd / (even + odd));
    return r;
  }

 private:
  struct SliceEdge {
    int x, y, a;
    std::uint32_t flips;
  };
  std::uint32_t bit(int x, int y) const { return 1u << (x * ny_ + y); }

  LatticeBox box_;
  int nx_, ny_, layers_, slice_plaquettes_;
  std::vector<SliceEdge> edges_;
};

struct McEstimate {
  double mean = 0;
  double stderr_ = 0;
  std::uint64_t sweeps = 0;
  std::uint64_t seed = 0;
  double acceptance = 0;
};

/**
 * \brief Single-edge Metropolis chain for mu(sigma) ~ e^{-4 beta |d sigma|} on a box.
 *
 * Each visit proposes a new edge value uniformly from Z_2, so half the
 * proposals keep the state; this keeps the chain aperiodic at beta = 0.
 */
class MetropolisChain {
 public:
  MetropolisChain(const LatticeBox& box, double beta, std::uint64_t seed)
      : box_(box), idx_(box), beta_(beta), rng_(seed) {
    if (beta < 0) throw DomainError("beta must be non-negative");
    edges_ = enumerate_cells(box, 1);
    sigma_.assign(edges_.size(), 0);
    plaquette_value_.assign(idx_.plaquette_slots(), 0);
    for (const Cell& e : edges_) {
      std::vector<std::uint32_t> ps;
      for (const auto& [p, n] : coboundary(e, box).terms()) ps.push_back(*idx_.plaquette_id(p));
      cob_.push_back(std::move(ps));
    }
    for (int d = 0; d <= 2 * kMaxDim; ++d) accept_.push_back(std::exp(-4.0 * beta * d));
  }

  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Cell>& edges() const { return edges_; }
  const std::vector<std::uint8_t>& state() const { return sigma_; }

  void set_state(const std::vector<std::uint8_t>& s) {
    sigma_ = s;
    std::fill(plaquette_value_.begin(), plaquette_value_.end(), 0);
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (sigma_[i])
        for (std::uint32_t p : cob_[i]) plaquette_value_[p] ^= 1;
  }

  /** \brief Probability that a visit to edge i flips it in the current state. */
  double flip_probability(std::size_t i) const {
    int delta = 0;
    for (std::uint32_t p : cob_[i]) delta += plaquette_value_[p] ? -1 : 1;
    return 0.5 * (delta <= 0 ? 1.0 : accept_[static_cast<std::size_t>(delta)]);
  }

  void flip(std::size_t i) {
    sigma_[i] ^= 1;
    for (std::uint32_t p : cob_[i]) plaquette_value_[p] ^= 1;
  }

  void sweep() {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      ++proposals_;
      if (u < flip_probability(i)) {
        flip(i);
        ++flips_;
      }
    }
  }

  /** \brief (-1)^{sigma(gamma)}. */
  int wilson(const std::vector<std::size_t>& loop_edges) const {
    int par = 0;
    for (std::size_t i : loop_edges) par ^= sigma_[i];
    return par ? -1 : 1;
  }

  std::vector<std::size_t> loop_edge_indices(const Chain& gamma) const {
    std::vector<std::size_t> out;
    for (const auto& [e, n] : gamma.terms()) {
      if (n % 2 == 0) continue;
      auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
      if (it == edges_.end() || !(*it == e)) throw DomainError("loop leaves the box");
      out.push_back(static_cast<std::size_t>(it - edges_.begin()));
    }
    return out;
  }

  double acceptance() const { return proposals_ ? static_cast<double>(flips_) / proposals_ : 0.0; }

 private:
  LatticeBox box_;
  PlaquetteIndex idx_;
  double beta_;
  std::mt19937_64 rng_;
  std::vector<Cell> edges_;
  std::vector<std::vector<std::uint32_t>> cob_;
  std::vector<std::uint8_t> sigma_, plaquette_value_;
  std::vector<double> accept_;
  std::uint64_t proposals_ = 0, flips_ = 0;
};

/**
 * \brief Metropolis estimate of <W_gamma> from the cold start, one measurement
 * per sweep after thermalisation, with a 32-batch-means error that never drops
 * below 1/(measurements).
 */
inline McEstimate mc_wilson(const LatticeBox& box, double beta, const Chain& gamma, std::uint64_t sweeps,
                            std::uint64_t seed, std::uint64_t thermalisation = 0) {
  constexpr std::uint64_t kBatches = 32;
  if (sweeps < kBatches) throw DomainError("need at least 32 sweeps");
  MetropolisChain chain(box, beta, seed);
  auto loop = chain.loop_edge_indices(gamma);
  if (thermalisation == 0) thermalisation = std::max<std::uint64_t>(sweeps / 10, 1);
  for (std::uint64_t s = 0; s < thermalisation; ++s) chain.sweep();
  std::uint64_t per_batch = sweeps / kBatches;
  std::vector<double> batch(kBatches, 0.0);
  for (std::uint64_t b = 0; b < kBatches; ++b) {
    std::int64_t acc = 0;
    for (std::uint64_t s = 0; s < per_batch; ++s) {
      chain.sweep();
      acc += chain.wilson(loop);
    }
    batch[b] = static_cast<double>(acc) / static_cast<double>(per_batch);
  }
  McEstimate est;
  double mean = 0;
  for (double x : batch) mean += x;
  mean /= kBatches;
  double var = 0;
  for (double x : batch) var += (x - mean) * (x - mean);
  var /= (kBatches - 1);
  est.mean = mean;
  est.stderr_ = std::max(std::sqrt(var / kBatches), 1.0 / static_cast<double>(per_batch * kBatches));
  est.sweeps = per_batch * kBatches;
  est.seed = seed;
  est.acceptance = chain.acceptance();
  return est;
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_ORACLE_HPP
