#ifndef GAUGE_POLYMER_PLAQUETTE_GRAPH_HPP
#define GAUGE_POLYMER_PLAQUETTE_GRAPH_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lattice.hpp"

namespace gauge_polymer {

/**
 * \brief Dense integer ids for the plaquettes and 3-cells of a box.
 *
 * id = vertex_index * (#axis subsets) + subset_rank, with vertices in
 * lexicographic order, so ascending ids follow the canonical cell order.
 * Some ids near the upper faces name cells outside the box; valid_plaquette
 * tells them apart. Two plaquettes are adjacent when they are faces of a
 * common 3-cell of the box.
 */
class PlaquetteIndex {
 public:
  static constexpr int kMaxCubes = 2 * (kMaxDim - 2);
  static constexpr int kMaxNeighbors = 5 * kMaxCubes;

  explicit PlaquetteIndex(const LatticeBox& box) : box_(box), m_(box.dim()) {
    pair_rank_.fill(-1);
    triple_rank_.fill(-1);
    for (AxisSet s : axis_subsets(m_, 2)) {
      pair_rank_[s] = static_cast<int>(pairs_.size());
      pairs_.push_back(s);
    }
    for (AxisSet s : axis_subsets(m_, 3)) {
      triple_rank_[s] = static_cast<int>(triples_.size());
      triples_.push_back(s);
    }
    std::uint64_t n = 1;
    for (int i = m_ - 1; i >= 0; --i) {
      stride_[i] = static_cast<std::uint32_t>(n);
      ext_[i] = box.extent(i);
      n *= static_cast<std::uint64_t>(ext_[i] + 1);
    }
    if (n * pairs_.size() >= std::numeric_limits<std::uint32_t>::max())
      throw std::length_error("box too large for 32-bit plaquette ids");
    vertices_ = static_cast<std::uint32_t>(n);
  }

  const LatticeBox& box() const { return box_; }
  int dim() const { return m_; }
  std::uint32_t plaquette_slots() const { return vertices_ * static_cast<std::uint32_t>(pairs_.size()); }
  std::uint32_t cube_slots() const { return vertices_ * static_cast<std::uint32_t>(triples_.size()); }

  int coord(std::uint32_t vertex, int axis) const {
    return static_cast<int>((vertex / stride_[axis]) % static_cast<std::uint32_t>(ext_[axis] + 1));
  }
  std::uint32_t plaquette_vertex(std::uint32_t p) const { return p / static_cast<std::uint32_t>(pairs_.size()); }
  AxisSet plaquette_axes(std::uint32_t p) const { return pairs_[p % pairs_.size()]; }
  /** \brief Absolute base coordinate of plaquette p along an axis. */
  int base_coord(std::uint32_t p, int axis) const { return box_.lower()[axis] + coord(plaquette_vertex(p), axis); }

  bool valid_plaquette(std::uint32_t p) const {
    if (p >= plaquette_slots()) return false;
    std::uint32_t v = plaquette_vertex(p);
    AxisSet s = plaquette_axes(p);
    for (int a = 0; a < m_; ++a)
      if ((s & axis_bit(a)) && coord(v, a) >= ext_[a]) return false;
    return true;
  }

  std::optional<std::uint32_t> plaquette_id(const Cell& c) const {
    if (c.degree() != 2 || !box_.contains(c)) return std::nullopt;
    return vertex_index(c.base) * static_cast<std::uint32_t>(pairs_.size()) +
           static_cast<std::uint32_t>(pair_rank_[c.axes]);
  }
  std::optional<std::uint32_t> cube_id(const Cell& c) const {
    if (c.degree() != 3 || !box_.contains(c)) return std::nullopt;
    return vertex_index(c.base) * static_cast<std::uint32_t>(triples_.size()) +
           static_cast<std::uint32_t>(triple_rank_[c.axes]);
  }

  Cell plaquette(std::uint32_t p) const { return Cell{vertex_point(plaquette_vertex(p)), plaquette_axes(p), 1}; }
  Cell cube(std::uint32_t c) const {
    return Cell{vertex_point(c / static_cast<std::uint32_t>(triples_.size())), triples_[c % triples_.size()], 1};
  }

  /** \brief 3-cells of the box containing plaquette p; returns the count written to out. */
  int cubes_of(std::uint32_t p, std::uint32_t* out) const {
    std::uint32_t v = plaquette_vertex(p);
    AxisSet s = plaquette_axes(p);
    auto nt = static_cast<std::uint32_t>(triples_.size());
    int n = 0;
    for (int c = 0; c < m_; ++c) {
      if (s & axis_bit(c)) continue;
      auto r = static_cast<std::uint32_t>(triple_rank_[s | axis_bit(c)]);
      int x = coord(v, c);
      if (x > 0) out[n++] = (v - stride_[c]) * nt + r;
      if (x < ext_[c]) out[n++] = v * nt + r;
    }
    return n;
  }

  std::array<std::uint32_t, 6> faces_of(std::uint32_t cube) const {
    auto nt = static_cast<std::uint32_t>(triples_.size());
    auto np = static_cast<std::uint32_t>(pairs_.size());
    std::uint32_t v = cube / nt;
    AxisSet s = triples_[cube % nt];
    std::array<std::uint32_t, 6> out{};
    int n = 0;
    for (int a = 0; a < m_; ++a) {
      if (!(s & axis_bit(a))) continue;
      auto r = static_cast<std::uint32_t>(pair_rank_[s & ~axis_bit(a)]);
      out[n++] = v * np + r;
      out[n++] = (v + stride_[a]) * np + r;
    }
    return out;
  }

  /** \brief Plaquettes sharing a 3-cell of the box with p (never p itself, no repeats). */
  int neighbors(std::uint32_t p, std::uint32_t* out) const {
    std::uint32_t cubes[kMaxCubes];
    int nc = cubes_of(p, cubes);
    int n = 0;
    for (int i = 0; i < nc; ++i)
      for (std::uint32_t f : faces_of(cubes[i]))
        if (f != p) out[n++] = f;
    return n;
  }

  /** \brief True if p lies in a face of the box (it then misses some of its 3-cells). */
  bool on_boundary(std::uint32_t p) const {
    std::uint32_t v = plaquette_vertex(p);
    AxisSet s = plaquette_axes(p);
    for (int a = 0; a < m_; ++a) {
      if (s & axis_bit(a)) continue;
      int x = coord(v, a);
      if (x == 0 || x == ext_[a]) return true;
    }
    return false;
  }

  bool adjacent(std::uint32_t p, std::uint32_t q) const {
    if (p == q) return false;
    std::uint32_t a[kMaxCubes], b[kMaxCubes];
    int na = cubes_of(p, a), nb = cubes_of(q, b);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j)
        if (a[i] == b[j]) return true;
    return false;
  }

 private:
  std::uint32_t vertex_index(const Point& p) const {
    std::uint32_t v = 0;
    for (int i = 0; i < m_; ++i) v += static_cast<std::uint32_t>(p[i] - box_.lower()[i]) * stride_[i];
    return v;
  }
  Point vertex_point(std::uint32_t v) const {
    Point p{};
    for (int i = 0; i < m_; ++i) p[i] = box_.lower()[i] + coord(v, i);
    return p;
  }

  LatticeBox box_;
  int m_;
  std::uint32_t vertices_ = 0;
  std::array<std::uint32_t, kMaxDim> stride_{};
  std::array<int, kMaxDim> ext_{};
  std::vector<AxisSet> pairs_, triples_;
  std::array<int, 1 << kMaxDim> pair_rank_{}, triple_rank_{};
};

/** \brief G_2 neighbours of a plaquette inside the box, in canonical order. */
inline std::vector<Cell> neighbors(const Cell& p, const LatticeBox& box) {
  PlaquetteIndex idx(box);
  auto id = idx.plaquette_id(p);
  if (!id) throw std::invalid_argument("plaquette is not in the box");
  std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];
  int n = idx.neighbors(*id, buf);
  std::sort(buf, buf + n);
  std::vector<Cell> out;
  for (int i = 0; i < n; ++i) out.push_back(idx.plaquette(buf[i]));
  return out;
}

/** \brief Connected components of a plaquette set under G_2 adjacency, each sorted. */
inline std::vector<std::vector<Cell>> connected_components(const std::vector<Cell>& plaquettes,
                                                           const LatticeBox& box) {
  PlaquetteIndex idx(box);
  std::vector<std::uint32_t> ids;
  for (const Cell& c : plaquettes) {
    auto id = idx.plaquette_id(c);
    if (!id) throw std::invalid_argument("plaquette is not in the box");
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::unordered_map<std::uint32_t, int> label;
  for (std::uint32_t p : ids) label[p] = -1;

  std::vector<std::vector<Cell>> out;
  std::uint32_t buf[PlaquetteIndex::kMaxNeighbors];
  for (std::uint32_t start : ids) {
    if (label[start] >= 0) continue;
    int comp = static_cast<int>(out.size());
    std::vector<std::uint32_t> members{start}, stack{start};
    label[start] = comp;
    while (!stack.empty()) {
      std::uint32_t p = stack.back();
      stack.pop_back();
      int n = idx.neighbors(p, buf);
      for (int i = 0; i < n; ++i) {
        auto it = label.find(buf[i]);
        if (it == label.end() || it->second >= 0) continue;
        it->second = comp;
        members.push_back(buf[i]);
        stack.push_back(buf[i]);
      }
    }
    std::sort(members.begin(), members.end());
    std::vector<Cell> cells;
    for (std::uint32_t p : members) cells.push_back(idx.plaquette(p));
    out.push_back(std::move(cells));
  }
  return out;
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_PLAQUETTE_GRAPH_HPP
