#ifndef GAUGE_POLYMER_VORTEX_HPP
#define GAUGE_POLYMER_VORTEX_HPP

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "plaquette_graph.hpp"

namespace gauge_polymer {

inline constexpr std::size_t kDefaultNodeBudget = 100'000'000;

/** \brief Closed 2-form with G_2-connected support, kept as its sorted positive plaquettes. */
class Vortex {
 public:
  Vortex() = default;
  explicit Vortex(std::vector<Cell> plaquettes) : cells_(std::move(plaquettes)) {
    for (Cell& c : cells_) {
      if (c.degree() != 2) throw std::invalid_argument("vortex cells must be plaquettes");
      c = c.positive();
    }
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  }

  std::size_t size() const { return cells_.size(); }
  const std::vector<Cell>& plaquettes() const { return cells_; }
  bool contains(const Cell& p) const { return std::binary_search(cells_.begin(), cells_.end(), p.positive()); }
  Form form() const { return form_from_cells(2, cells_); }

  friend bool operator==(const Vortex&, const Vortex&) = default;
  friend bool operator<(const Vortex& a, const Vortex& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.cells_ < b.cells_;
  }

 private:
  std::vector<Cell> cells_;
};

/**
 * \brief Enumerates vortices through a root plaquette by forced-cube branching.
 *
 * While the current set has a 3-cell with an odd number of its faces, one of the
 * remaining faces of the smallest such cell must be added; when the set is closed it
 * is reported and then extended by a neighbouring plaquette. Options tried earlier
 * at a node are excluded in later branches, so each vortex appears exactly once.
 * A set with k odd cells needs at least ceil(k / 2(m-2)) more plaquettes, which
 * prunes everything that cannot close within the cap.
 */
class VortexEnumerator {
 public:
  explicit VortexEnumerator(const PlaquetteIndex& index, std::size_t node_budget = kDefaultNodeBudget,
                            bool interior_only = false)
      : idx_(index),
        budget_(node_budget),
        interior_only_(interior_only),
        in_set_(index.plaquette_slots(), 0),
        excluded_(index.plaquette_slots(), 0),
        parity_(index.cube_slots(), 0),
        max_cubes_(2 * (index.dim() - 2)) {}

  /** \brief Calls emit(sorted plaquette ids) once per vortex of size <= cap containing root. */
  template <class Emit>
  void for_each_containing(std::uint32_t root, int cap, Emit&& emit) {
    if (!idx_.valid_plaquette(root)) throw std::invalid_argument("root is not a plaquette of the box");
    nodes_ = 0;
    cap_ = cap;
    if (cap < 1 || blocked(root)) return;
    add(root);
    try {
      rec(emit);
    } catch (...) {
      reset();
      throw;
    }
    remove(root);
  }

  std::size_t nodes() const { return nodes_; }

 private:
  bool blocked(std::uint32_t p) const {
    return in_set_[p] || excluded_[p] || (interior_only_ && idx_.on_boundary(p));
  }

  void add(std::uint32_t p) {
    in_set_[p] = 1;
    current_.push_back(p);
    std::uint32_t cubes[PlaquetteIndex::kMaxCubes];
    int n = idx_.cubes_of(p, cubes);
    for (int i = 0; i < n; ++i) odd_ += (parity_[cubes[i]] ^= 1) ? 1 : -1;
  }

  void remove(std::uint32_t p) {
    in_set_[p] = 0;
    current_.pop_back();
    std::uint32_t cubes[PlaquetteIndex::kMaxCubes];
    int n = idx_.cubes_of(p, cubes);
    for (int i = 0; i < n; ++i) odd_ += (parity_[cubes[i]] ^= 1) ? 1 : -1;
  }

  void reset() {
    while (!current_.empty()) remove(current_.back());
    for (std::uint32_t p : excluded_log_) excluded_[p] = 0;
    excluded_log_.clear();
  }

  int lower_bound() const {
    int size = static_cast<int>(current_.size());
    if (odd_ == 0) return size;
    return size + (max_cubes_ > 0 ? (odd_ + max_cubes_ - 1) / max_cubes_ : 1);
  }

  template <class Emit>
  void branch(const std::vector<std::uint32_t>& options, Emit& emit) {
    std::size_t mark = excluded_log_.size();
    for (std::uint32_t f : options) {
      if (blocked(f)) continue;
      add(f);
      if (lower_bound() <= cap_) rec(emit);
      remove(f);
      excluded_[f] = 1;
      excluded_log_.push_back(f);
    }
    while (excluded_log_.size() > mark) {
      excluded_[excluded_log_.back()] = 0;
      excluded_log_.pop_back();
    }
  }

  template <class Emit>
  void rec(Emit& emit) {
    if (++nodes_ > budget_)
      throw BudgetExceeded("vortex enumeration exceeded its node budget of " + std::to_string(budget_));
    if (odd_ == 0) {
      std::vector<std::uint32_t> sorted = current_;
      std::sort(sorted.begin(), sorted.end());
      emit(static_cast<const std::vector<std::uint32_t>&>(sorted));
      if (static_cast<int>(current_.size()) + 1 > cap_) return;
      std::vector<std::uint32_t> options;
      std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];
      for (std::uint32_t p : current_) {
        int n = idx_.neighbors(p, buf);
        for (int i = 0; i < n; ++i)
          if (!blocked(buf[i])) options.push_back(buf[i]);
      }
      std::sort(options.begin(), options.end());
      options.erase(std::unique(options.begin(), options.end()), options.end());
      branch(options, emit);
      return;
    }
    if (lower_bound() > cap_) return;
    std::uint32_t best = UINT32_MAX;
    std::uint32_t cubes[PlaquetteIndex::kMaxCubes];
    for (std::uint32_t p : current_) {
      int n = idx_.cubes_of(p, cubes);
      for (int i = 0; i < n; ++i)
        if (parity_[cubes[i]] && cubes[i] < best) best = cubes[i];
    }
    auto faces = idx_.faces_of(best);
    std::vector<std::uint32_t> options(faces.begin(), faces.end());
    std::sort(options.begin(), options.end());
    branch(options, emit);
  }

  const PlaquetteIndex& idx_;
  std::size_t budget_;
  bool interior_only_;
  std::vector<std::uint8_t> in_set_, excluded_, parity_;
  std::vector<std::uint32_t> current_, excluded_log_;
  int odd_ = 0;
  int cap_ = 0;
  int max_cubes_;
  std::size_t nodes_ = 0;
};

/** \brief Coboundary of an edge in the whole lattice Z^m, as positive plaquettes in canonical order. */
inline std::vector<Cell> edge_coboundary(const Cell& e, int dim) {
  if (e.degree() != 1) throw std::invalid_argument("expected an edge");
  int a = std::countr_zero(e.axes);
  std::vector<Cell> out;
  for (int c = 0; c < dim; ++c) {
    if (c == a) continue;
    Cell p{e.base, static_cast<AxisSet>(e.axes | axis_bit(c)), 1};
    out.push_back(p);
    p.base[c] -= 1;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/** \brief d(e) on the box: the plaquettes of the box having e on their boundary. */
inline Vortex minimal_vortex(const Cell& edge, const LatticeBox& box) {
  if (edge.degree() != 1) throw std::invalid_argument("expected an edge");
  if (!box.contains(edge)) throw std::invalid_argument("edge is not in the box");
  std::vector<Cell> cells;
  for (const auto& [p, n] : coboundary(edge, box).terms()) cells.push_back(p);
  return Vortex(std::move(cells));
}

/** \brief All vortices of size <= cap containing p, in (size, canonical) order. */
inline std::vector<Vortex> vortices_containing(const Cell& p, int cap, const LatticeBox& box,
                                               std::size_t node_budget = kDefaultNodeBudget) {
  PlaquetteIndex idx(box);
  auto root = idx.plaquette_id(p);
  if (!root) throw std::invalid_argument("plaquette is not in the box");
  VortexEnumerator en(idx, node_budget);
  std::vector<Vortex> out;
  en.for_each_containing(*root, cap, [&](const std::vector<std::uint32_t>& ids) {
    std::vector<Cell> cells;
    for (std::uint32_t id : ids) cells.push_back(idx.plaquette(id));
    out.emplace_back(std::move(cells));
  });
  std::sort(out.begin(), out.end());
  return out;
}

/** \brief True if some plaquette of the vortex lies in a face of the box. */
inline bool touches_boundary(const Vortex& v, const LatticeBox& box) {
  return std::any_of(v.plaquettes().begin(), v.plaquettes().end(),
                     [&](const Cell& c) { return box.on_boundary(c); });
}

struct VortexClass {
  enum class Kind { kMinimal, kEdgePair, kOther };
  Kind kind = Kind::kOther;
  std::vector<Cell> edges;  // generating edges for kMinimal (one) and kEdgePair (two)
  bool parallel = false;    // kEdgePair only
};

namespace detail {

inline std::vector<Cell> symmetric_difference(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  std::vector<Cell> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/**
 * \brief Recognises d(e) and d(e + e') with e, e' on a common plaquette.
 *
 * Candidate edges are the boundary edges of the support; each candidate is
 * checked against the support directly.
 */
inline VortexClass classify(const Vortex& v, int dim) {
  VortexClass out;
  std::set<Cell> edge_set;
  for (const Cell& p : v.plaquettes())
    for (const auto& [e, n] : boundary(p).terms()) edge_set.insert(e);
  std::vector<Cell> edges(edge_set.begin(), edge_set.end());
  std::vector<std::vector<Cell>> cob;
  for (const Cell& e : edges) cob.push_back(edge_coboundary(e, dim));

  if (v.size() == static_cast<std::size_t>(2 * (dim - 1))) {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (cob[i] == v.plaquettes()) {
        out.kind = VortexClass::Kind::kMinimal;
        out.edges = {edges[i]};
        return out;
      }
  }
  if (v.size() == static_cast<std::size_t>(4 * (dim - 1) - 2)) {
    for (std::size_t i = 0; i < edges.size(); ++i)
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (detail::symmetric_difference(cob[i], cob[j]) != v.plaquettes()) continue;
        out.kind = VortexClass::Kind::kEdgePair;
        out.edges = {edges[i], edges[j]};
        out.parallel = edges[i].axes == edges[j].axes;
        return out;
      }
  }
  return out;
}

/** \brief Splits a closed 2-form into its G_2-connected components. */
inline std::vector<Vortex> decompose(const Form& w, const LatticeBox& box) {
  if (w.degree() != 2) throw std::invalid_argument("decompose expects a 2-form");
  std::vector<Vortex> out;
  for (auto& comp : connected_components(w.support(), box)) out.emplace_back(std::move(comp));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_VORTEX_HPP
