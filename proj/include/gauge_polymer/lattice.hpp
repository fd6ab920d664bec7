#ifndef GAUGE_POLYMER_LATTICE_HPP
#define GAUGE_POLYMER_LATTICE_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gf2.hpp"

namespace gauge_polymer {

inline constexpr int kMaxDim = 8;

/** \brief Lattice point; coordinates past the ambient dimension stay zero. */
using Point = std::array<int, kMaxDim>;

/** \brief Set of axes as a bit mask, bit i for axis i (axes are 0-based). */
using AxisSet = std::uint16_t;

inline AxisSet axis_bit(int axis) { return static_cast<AxisSet>(1u << axis); }

inline std::vector<int> axis_list(AxisSet axes) {
  std::vector<int> out;
  for (int i = 0; i < kMaxDim; ++i)
    if (axes & axis_bit(i)) out.push_back(i);
  return out;
}

/** \brief Lexicographic order on the sorted axis lists. */
inline bool axes_less(AxisSet a, AxisSet b) {
  while (a && b) {
    int x = std::countr_zero(a), y = std::countr_zero(b);
    if (x != y) return x < y;
    a &= a - 1;
    b &= b - 1;
  }
  return !a && b;
}

inline Point make_point(std::initializer_list<int> coords) {
  if (coords.size() > kMaxDim) throw std::invalid_argument("too many coordinates");
  Point p{};
  std::copy(coords.begin(), coords.end(), p.begin());
  return p;
}

/**
 * \brief Oriented elementary k-cell: base vertex plus a set of k axes.
 *
 * The cell spans base + sum of t_i e_{a_i}, t_i in [0,1]. sign is +1 or -1.
 */
struct Cell {
  Point base{};
  AxisSet axes = 0;
  int sign = 1;

  int degree() const { return std::popcount(axes); }
  Cell positive() const { return Cell{base, axes, 1}; }
  Cell reversed() const { return Cell{base, axes, -sign}; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline bool operator<(const Cell& a, const Cell& b) {
  if (a.base != b.base) return a.base < b.base;
  if (a.axes != b.axes) return axes_less(a.axes, b.axes);
  return a.sign < b.sign;
}

struct CellHash {
  std::size_t operator()(const Cell& c) const {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : c.base) h = (h ^ static_cast<std::uint32_t>(x)) * 1099511628211ull;
    h = (h ^ c.axes) * 1099511628211ull;
    h = (h ^ static_cast<std::uint32_t>(c.sign)) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

inline Cell make_cell(std::initializer_list<int> base, std::initializer_list<int> axes, int sign = 1) {
  Cell c;
  c.base = make_point(base);
  for (int a : axes) {
    if (a < 0 || a >= kMaxDim) throw std::invalid_argument("axis out of range");
    if (c.axes & axis_bit(a)) throw std::invalid_argument("repeated axis");
    c.axes |= axis_bit(a);
  }
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  c.sign = sign;
  return c;
}

inline std::string to_string(const Cell& c, int dim) {
  std::string s = c.sign < 0 ? "-(" : "(";
  for (int i = 0; i < dim; ++i) s += (i ? "," : "") + std::to_string(c.base[i]);
  s += ";";
  bool first = true;
  for (int a : axis_list(c.axes)) {
    s += (first ? "" : ",") + std::to_string(a);
    first = false;
  }
  return s + ")";
}

/** \brief Axis-aligned box [lower, upper] in Z^m, m in [3, kMaxDim]. */
class LatticeBox {
 public:
  LatticeBox(int dim, const Point& lower, const Point& upper) : dim_(dim), lower_(lower), upper_(upper) {
    if (dim < 3 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [3, 8]");
    for (int i = 0; i < kMaxDim; ++i) {
      if (i >= dim && (lower[i] != 0 || upper[i] != 0))
        throw std::invalid_argument("coordinates beyond the dimension must be zero");
      if (lower[i] > upper[i]) throw std::invalid_argument("box lower corner exceeds upper corner");
    }
  }

  /** \brief The box [-n, n]^m. */
  static LatticeBox centered(int dim, int n) {
    Point lo{}, hi{};
    for (int i = 0; i < dim; ++i) lo[i] = -n, hi[i] = n;
    return LatticeBox(dim, lo, hi);
  }

  /** \brief The box [0, extents_0] x ... x [0, extents_{m-1}]. */
  static LatticeBox span(std::initializer_list<int> extents) {
    Point hi = make_point(extents);
    return LatticeBox(static_cast<int>(extents.size()), Point{}, hi);
  }

  int dim() const { return dim_; }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  int extent(int axis) const { return upper_[axis] - lower_[axis]; }

  std::size_t vertex_count() const {
    std::size_t n = 1;
    for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(extent(i) + 1);
    return n;
  }

  bool contains(const Point& p) const {
    for (int i = 0; i < dim_; ++i)
      if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
    for (int i = dim_; i < kMaxDim; ++i)
      if (p[i] != 0) return false;
    return true;
  }

  bool contains(const Cell& c) const {
    if (c.axes >> dim_) return false;
    for (int i = 0; i < dim_; ++i) {
      int top = c.base[i] + ((c.axes & axis_bit(i)) ? 1 : 0);
      if (c.base[i] < lower_[i] || top > upper_[i]) return false;
    }
    for (int i = dim_; i < kMaxDim; ++i)
      if (c.base[i] != 0) return false;
    return true;
  }

  /** \brief True if the cell lies inside a face of the box. */
  bool on_boundary(const Cell& c) const {
    for (int i = 0; i < dim_; ++i)
      if (!(c.axes & axis_bit(i)) && (c.base[i] == lower_[i] || c.base[i] == upper_[i])) return true;
    return false;
  }

  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;

 private:
  int dim_;
  Point lower_;
  Point upper_;
};

/** \brief Smallest box containing every cell in the list. */
inline LatticeBox bounding_box(const std::vector<Cell>& cells, int dim) {
  if (cells.empty()) throw std::invalid_argument("bounding box of an empty cell list");
  Point lo = cells.front().base, hi = cells.front().base;
  for (const Cell& c : cells)
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], c.base[i]);
      hi[i] = std::max(hi[i], c.base[i] + ((c.axes & axis_bit(i)) ? 1 : 0));
    }
  return LatticeBox(dim, lo, hi);
}

/** \brief Calls fn(mask) for every k-subset of {0..dim-1} in lexicographic order. */
inline void for_each_axis_subset(int dim, int k, const std::function<void(AxisSet)>& fn) {
  std::function<void(int, int, AxisSet)> rec = [&](int start, int left, AxisSet acc) {
    if (left == 0) {
      fn(acc);
      return;
    }
    for (int a = start; a <= dim - left; ++a) rec(a + 1, left - 1, acc | axis_bit(a));
  };
  rec(0, k, 0);
}

inline std::vector<AxisSet> axis_subsets(int dim, int k) {
  std::vector<AxisSet> out;
  for_each_axis_subset(dim, k, [&](AxisSet s) { out.push_back(s); });
  return out;
}

/** \brief Calls fn(p) for every vertex of the box in lexicographic order. */
template <class Fn>
void for_each_vertex(const LatticeBox& box, Fn&& fn) {
  Point p = box.lower();
  int m = box.dim();
  while (true) {
    fn(static_cast<const Point&>(p));
    int i = m - 1;
    while (i >= 0 && p[i] == box.upper()[i]) {
      p[i] = box.lower()[i];
      --i;
    }
    if (i < 0) return;
    ++p[i];
  }
}

/** \brief Positive k-cells of the box in canonical order. */
inline std::vector<Cell> enumerate_cells(const LatticeBox& box, int k) {
  if (k < 0 || k > box.dim()) throw std::invalid_argument("cell degree out of range");
  std::vector<AxisSet> subsets = axis_subsets(box.dim(), k);
  std::vector<Cell> out;
  for_each_vertex(box, [&](const Point& p) {
    for (AxisSet s : subsets) {
      Cell c{p, s, 1};
      if (box.contains(c)) out.push_back(c);
    }
  });
  return out;
}

/** \brief Formal integer combination of positive k-cells. */
class Chain {
 public:
  explicit Chain(int degree = 1) : degree_(degree) {}

  int degree() const { return degree_; }

  void add(const Cell& c, int coeff = 1) {
    if (c.degree() != degree_) throw std::invalid_argument("cell degree does not match chain degree");
    if (coeff == 0) return;
    Cell key = c.positive();
    int v = (terms_[key] += coeff * c.sign);
    if (v == 0) terms_.erase(key);
  }

  int coefficient(const Cell& c) const {
    auto it = terms_.find(c.positive());
    return it == terms_.end() ? 0 : it->second * c.sign;
  }

  const std::map<Cell, int>& terms() const& { return terms_; }
  std::map<Cell, int> terms() && { return std::move(terms_); }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Chain& operator+=(const Chain& o) {
    if (o.degree_ != degree_) throw std::invalid_argument("adding chains of different degree");
    for (const auto& [c, n] : o.terms_) add(c, n);
    return *this;
  }
  Chain operator-() const {
    Chain out(degree_);
    for (const auto& [c, n] : terms_) out.terms_[c] = -n;
    return out;
  }
  friend bool operator==(const Chain&, const Chain&) = default;

 private:
  int degree_;
  std::map<Cell, int> terms_;
};

/** \brief Z_2-valued k-form, stored by its positive support. */
class Form {
 public:
  explicit Form(int degree = 2) : degree_(degree) {}

  int degree() const { return degree_; }
  bool value(const Cell& c) const { return cells_.count(c.positive()) > 0; }

  void set(const Cell& c, bool v) {
    check(c);
    if (v)
      cells_.insert(c.positive());
    else
      cells_.erase(c.positive());
  }
  void toggle(const Cell& c) {
    check(c);
    auto [it, inserted] = cells_.insert(c.positive());
    if (!inserted) cells_.erase(it);
  }

  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  std::vector<Cell> support() const {
    std::vector<Cell> out(cells_.begin(), cells_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  Form& operator+=(const Form& o) {
    if (o.degree_ != degree_) throw std::invalid_argument("adding forms of different degree");
    for (const Cell& c : o.cells_) toggle(c);
    return *this;
  }
  friend bool operator==(const Form& a, const Form& b) {
    return a.degree_ == b.degree_ && a.cells_ == b.cells_;
  }

 private:
  void check(const Cell& c) const {
    if (c.degree() != degree_) throw std::invalid_argument("cell degree does not match form degree");
  }

  int degree_;
  std::unordered_set<Cell, CellHash> cells_;
};

inline Form form_from_cells(int degree, const std::vector<Cell>& cells) {
  Form f(degree);
  for (const Cell& c : cells) f.toggle(c);
  return f;
}

/** \brief Cellular boundary; faces alternate in sign along the axis list. */
inline Chain boundary(const Cell& c) {
  int k = c.degree();
  if (k == 0) throw std::invalid_argument("boundary of a vertex");
  Chain out(k - 1);
  int i = 0;
  for (int a : axis_list(c.axes)) {
    int s = (i % 2 == 0 ? 1 : -1) * c.sign;
    Cell lower{c.base, static_cast<AxisSet>(c.axes & ~axis_bit(a)), 1};
    Cell upper = lower;
    upper.base[a] += 1;
    out.add(upper, s);
    out.add(lower, -s);
    ++i;
  }
  return out;
}

inline Chain boundary(const Chain& q) {
  if (q.degree() == 0) throw std::invalid_argument("boundary of a 0-chain");
  Chain out(q.degree() - 1);
  for (const auto& [c, n] : q.terms())
    for (const auto& [f, s] : boundary(c).terms()) out.add(f, s * n);
  return out;
}

/** \brief (k+1)-cells of the box having c in their boundary, with that coefficient. */
inline Chain coboundary(const Cell& c, const LatticeBox& box) {
  Chain out(c.degree() + 1);
  for (int a = 0; a < box.dim(); ++a) {
    if (c.axes & axis_bit(a)) continue;
    AxisSet up = static_cast<AxisSet>(c.axes | axis_bit(a));
    for (int shift : {0, -1}) {
      Cell d{c.base, up, 1};
      d.base[a] += shift;
      if (!box.contains(d)) continue;
      out.add(d, boundary(d).coefficient(c));
    }
  }
  return out;
}

/** \brief d on Z_2 forms of the box: (d w)(c) = sum of w over the boundary of c. */
inline Form exterior_derivative(const Form& w, const LatticeBox& box) {
  Form out(w.degree() + 1);
  for (const Cell& c : w.support()) {
    if (!box.contains(c)) throw std::invalid_argument("form support leaves the box");
    for (const auto& [d, n] : coboundary(c, box).terms())
      if (n % 2) out.toggle(d);
  }
  return out;
}

/** \brief Pairing of a Z_2 form with an integer chain, reduced mod 2. */
inline int evaluate(const Form& w, const Chain& q) {
  if (w.degree() != q.degree()) throw std::invalid_argument("form and chain degrees differ");
  long long s = 0;
  for (const auto& [c, n] : q.terms())
    if (w.value(c)) s += n;
  return static_cast<int>(((s % 2) + 2) % 2);
}

inline bool is_closed(const Form& w, const LatticeBox& box) { return exterior_derivative(w, box).empty(); }

enum class PoincareBoundary {
  kFree,       // any (k-1)-cell of the box may carry the solution
  kVanishing,  // the solution is zero on cells lying in the box boundary
};

/**
 * \brief Solves d sigma = w inside the box by dense GF(2) elimination.
 *
 * Columns are (k-1)-cells in canonical order and free variables are set to zero,
 * so the result is a function of w relative to the box corner. With kVanishing,
 * d sigma = w also holds on cells outside the box.
 */
inline Form poincare_solve(const Form& w, const LatticeBox& box,
                           PoincareBoundary bc = PoincareBoundary::kFree) {
  int k = w.degree();
  if (k < 1 || k > box.dim()) throw std::invalid_argument("form degree out of range for the Poincare solve");
  for (const Cell& c : w.support())
    if (!box.contains(c)) throw std::invalid_argument("form support leaves the box");
  if (!is_closed(w, box)) throw std::invalid_argument("form is not closed");

  std::vector<Cell> unknowns;
  for (const Cell& c : enumerate_cells(box, k - 1))
    if (bc == PoincareBoundary::kFree || !box.on_boundary(c)) unknowns.push_back(c);
  std::unordered_map<Cell, std::size_t, CellHash> col;
  for (std::size_t i = 0; i < unknowns.size(); ++i) col[unknowns[i]] = i;

  Gf2System sys(unknowns.size());
  for (const Cell& c : enumerate_cells(box, k)) {
    std::vector<std::size_t> ones;
    for (const auto& [f, n] : boundary(c).terms()) {
      auto it = col.find(f);
      if (it != col.end() && n % 2) ones.push_back(it->second);
    }
    bool rhs = w.value(c);
    if (ones.empty() && !rhs) continue;
    sys.add_row(ones, rhs);
  }
  auto x = sys.solve();
  if (!x) throw std::invalid_argument("form has no primitive with the requested boundary condition");
  Form sigma(k - 1);
  for (std::size_t i = 0; i < unknowns.size(); ++i)
    if ((*x)[i]) sigma.toggle(unknowns[i]);
  return sigma;
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_LATTICE_HPP
