#ifndef GAUGE_POLYMER_LOOPS_HPP
#define GAUGE_POLYMER_LOOPS_HPP

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "vortex.hpp"

namespace gauge_polymer {

struct LoopStats {
  int length = 0;
  int corners = 0;
  int bottlenecks = 0;
};

/** \brief Axis-parallel rectangle: R steps along axis a, T steps along axis b, a < b. */
struct RectShape {
  int R = 1, T = 1;
  int a = 0, b = 1;
  Point base{};
};

/** \brief Closed 1-chain with coefficients +-1; remembers its rectangle when it is one. */
class Loop {
 public:
  Loop(int dim, Chain chain, std::optional<RectShape> rect = std::nullopt)
      : dim_(dim), chain_(std::move(chain)), rect_(rect) {
    if (chain_.degree() != 1) throw std::invalid_argument("a loop is a 1-chain");
    for (const auto& [e, n] : chain_.terms()) {
      if (n != 1 && n != -1) throw DomainError("loop coefficients must be +-1");
      if (e.axes >> dim) throw DomainError("loop edge outside the dimension");
    }
    if (!boundary(chain_).empty()) throw DomainError("loop is not closed");
  }

  int dim() const { return dim_; }
  const Chain& chain() const { return chain_; }
  const std::optional<RectShape>& rect() const { return rect_; }
  std::vector<Cell> edges() const {
    std::vector<Cell> out;
    for (const auto& [e, n] : chain_.terms()) out.push_back(e);
    return out;
  }
  int length() const { return static_cast<int>(chain_.size()); }

 private:
  int dim_;
  Chain chain_;
  std::optional<RectShape> rect_;
};

/** \brief Boundary of the R x T rectangle at base in the (a, b) plane, counterclockwise. */
inline Loop rect_loop(int dim, int R, int T, int a = 0, int b = 1, Point base = {}) {
  if (R < 1 || T < 1) throw DomainError("rectangle sides must be positive");
  if (a == b || a < 0 || b < 0 || a >= dim || b >= dim) throw DomainError("bad rectangle plane");
  if (a > b) std::swap(a, b), std::swap(R, T);
  Chain c(1);
  for (int i = 0; i < R; ++i) {
    Cell e{base, axis_bit(a), 1};
    e.base[a] += i;
    c.add(e);
    e.base[b] += T;
    c.add(e, -1);
  }
  for (int j = 0; j < T; ++j) {
    Cell e{base, axis_bit(b), 1};
    e.base[b] += j;
    c.add(e, -1);
    e.base[a] += R;
    c.add(e);
  }
  return Loop(dim, std::move(c), RectShape{R, T, a, b, base});
}

/** \brief True if both edges lie on the boundary of one plaquette. */
inline bool share_plaquette(const Cell& e, const Cell& f, int dim) {
  for (const Cell& p : edge_coboundary(e, dim)) {
    Chain bd = boundary(p);
    if (bd.coefficient(f.positive()) != 0) return true;
  }
  return false;
}

/** \brief (l, l_c, l_b): edges, non-parallel pairs and parallel pairs sharing a plaquette. */
inline LoopStats loop_stats(const Loop& gamma) {
  LoopStats s;
  std::vector<Cell> edges = gamma.edges();
  s.length = static_cast<int>(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      if (!share_plaquette(edges[i], edges[j], gamma.dim())) continue;
      if (edges[i].axes == edges[j].axes)
        ++s.bottlenecks;
      else
        ++s.corners;
    }
  return s;
}

/** \brief The R*T plaquettes of a rectangle, oriented so that the boundary is the loop. */
inline Chain flat_surface(const Loop& gamma) {
  if (!gamma.rect()) throw DomainError("flat_surface needs a rectangular loop");
  const RectShape& r = *gamma.rect();
  Chain q(2);
  for (int i = 0; i < r.R; ++i)
    for (int j = 0; j < r.T; ++j) {
      Cell p{r.base, static_cast<AxisSet>(axis_bit(r.a) | axis_bit(r.b)), 1};
      p.base[r.a] += i;
      p.base[r.b] += j;
      q.add(p);
    }
  return q;
}

/**
 * \brief Some integral 2-chain q in the box with boundary exactly gamma.
 *
 * Sweeps the loop down to the lower face of the box one axis at a time: every
 * edge not along axis a with base above the face is traded for the plaquette
 * below it, which moves the edge one step down. Once no such edge is left the
 * remaining axis-a edges must cancel, so the cycle lives in the face and the
 * next axis takes over.
 */
inline Chain solve_surface(const Loop& gamma, const LatticeBox& box) {
  Chain cur = gamma.chain();
  for (const auto& [e, n] : cur.terms())
    if (!box.contains(e)) throw DomainError("loop leaves the box");
  Chain q(2);
  for (int a = 0; a < box.dim(); ++a) {
    while (true) {
      std::optional<Cell> pick;
      int pick_n = 0;
      for (const auto& [e, n] : cur.terms()) {
        if ((e.axes & axis_bit(a)) || e.base[a] <= box.lower()[a]) continue;
        if (!pick || e.base[a] > pick->base[a]) pick = e, pick_n = n;
      }
      if (!pick) break;
      Cell p{pick->base, static_cast<AxisSet>(pick->axes | axis_bit(a)), 1};
      p.base[a] -= 1;
      Chain bd = boundary(p);
      int coeff = pick_n * bd.coefficient(*pick);
      q.add(p, coeff);
      Chain step(1);
      for (const auto& [f, m] : bd.terms()) step.add(f, -coeff * m);
      cur += step;
    }
  }
  if (!cur.empty()) throw std::logic_error("surface sweep left a residual cycle");
  return q;
}

/** \brief Edges of a rectangular loop within distance j of a corner (farther endpoint, L1). */
inline std::vector<Cell> corner_restriction(const Loop& gamma, int j) {
  if (!gamma.rect()) throw DomainError("corner_restriction needs a rectangular loop");
  if (j < 1) throw DomainError("j must be at least 1");
  const RectShape& r = *gamma.rect();
  std::vector<Point> corners;
  for (int di : {0, r.R})
    for (int dj : {0, r.T}) {
      Point c = r.base;
      c[r.a] += di;
      c[r.b] += dj;
      corners.push_back(c);
    }
  auto dist = [&](const Point& x, const Point& y) {
    int d = 0;
    for (int i = 0; i < gamma.dim(); ++i) d += std::abs(x[i] - y[i]);
    return d;
  };
  std::vector<Cell> out;
  for (const Cell& e : gamma.edges()) {
    Point tip = e.base;
    tip[std::countr_zero(e.axes)] += 1;
    for (const Point& c : corners)
      if (std::max(dist(e.base, c), dist(tip, c)) <= j) {
        out.push_back(e);
        break;
      }
  }
  return out;
}

namespace detail {

inline std::vector<int> parse_ints(const std::string& s, char sep) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty()) throw DomainError("empty number in loop spec");
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw DomainError("bad number '" + tok + "' in loop spec");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/**
 * \brief Parses `rect:R,T[,axes=i-j][,base=x,y,...]` or `edges:x,y,z>a;x,y,z<a;...`.
 *
 * In the edge list `>a` is the edge from the point along +e_a, `<a` the same
 * edge traversed backwards.
 */
inline Loop parse_loop(const std::string& spec, int dim) {
  try {
    if (spec.rfind("rect:", 0) == 0) {
      std::vector<std::string> tokens;
      std::stringstream ss(spec.substr(5));
      for (std::string tok; std::getline(ss, tok, ',');) tokens.push_back(tok);
      std::vector<int> sides, base_coords;
      int a = 0, b = 1;
      std::vector<int>* target = &sides;
      for (const std::string& tok : tokens) {
        if (tok.rfind("axes=", 0) == 0) {
          auto v = detail::parse_ints(tok.substr(5), '-');
          if (v.size() != 2) throw DomainError("axes must be i-j");
          a = v[0], b = v[1];
          target = nullptr;
        } else if (tok.rfind("base=", 0) == 0) {
          target = &base_coords;
          target->push_back(detail::parse_ints(tok.substr(5), ',').at(0));
        } else if (target) {
          target->push_back(detail::parse_ints(tok, ',').at(0));
        } else {
          throw DomainError("unexpected '" + tok + "' in rect spec");
        }
      }
      if (sides.size() != 2) throw DomainError("rect needs R,T");
      Point base{};
      if (!base_coords.empty()) {
        if (static_cast<int>(base_coords.size()) != dim) throw DomainError("base needs one coordinate per axis");
        std::copy(base_coords.begin(), base_coords.end(), base.begin());
      }
      return rect_loop(dim, sides[0], sides[1], a, b, base);
    }
    if (spec.rfind("edges:", 0) == 0) {
      Chain c(1);
      std::stringstream ss(spec.substr(6));
      std::string tok;
      while (std::getline(ss, tok, ';')) {
        if (tok.empty()) continue;
        std::size_t k = tok.find_first_of("<>");
        if (k == std::string::npos) throw DomainError("edge '" + tok + "' lacks a direction");
        auto coords = detail::parse_ints(tok.substr(0, k), ',');
        auto axis = detail::parse_ints(tok.substr(k + 1), ',');
        if (static_cast<int>(coords.size()) != dim || axis.size() != 1 || axis[0] < 0 || axis[0] >= dim)
          throw DomainError("bad edge '" + tok + "'");
        Cell e{Point{}, axis_bit(axis[0]), 1};
        std::copy(coords.begin(), coords.end(), e.base.begin());
        c.add(e, tok[k] == '>' ? 1 : -1);
      }
      return Loop(dim, std::move(c));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const DomainError*>(&e)) throw;
    throw DomainError(std::string("bad loop spec: ") + e.what());
  }
  throw DomainError("loop spec must start with rect: or edges:");
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_LOOPS_HPP
