#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gauge_polymer/loops.hpp"

using namespace gauge_polymer;

namespace {

// Pair census by scanning every plaquette near the loop and reading its boundary.
LoopStats stats_by_plaquette_scan(const Loop& gamma) {
  std::vector<Cell> edges = gamma.edges();
  LatticeBox box = bounding_box(edges, gamma.dim());
  Point lo = box.lower(), hi = box.upper();
  for (int i = 0; i < gamma.dim(); ++i) lo[i] -= 1, hi[i] += 1;
  std::set<std::pair<Cell, Cell>> par, nonpar;
  for (const Cell& p : enumerate_cells(LatticeBox(gamma.dim(), lo, hi), 2)) {
    std::vector<Cell> on;
    for (const auto& [e, n] : boundary(p).terms())
      if (gamma.chain().coefficient(e) != 0) on.push_back(e);
    for (std::size_t i = 0; i < on.size(); ++i)
      for (std::size_t j = i + 1; j < on.size(); ++j)
        (on[i].axes == on[j].axes ? par : nonpar).insert(std::minmax(on[i], on[j]));
  }
  return {static_cast<int>(edges.size()), static_cast<int>(nonpar.size()), static_cast<int>(par.size())};
}

Chain random_planar_boundary(std::mt19937& rng, int dim) {
  std::uniform_int_distribution<int> axis(0, dim - 1), coord(-3, 3), coin(0, 1);
  int a = axis(rng), b = axis(rng);
  while (b == a) b = axis(rng);
  Point shift{};
  for (int i = 0; i < dim; ++i) shift[i] = coord(rng);
  Chain q(2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (coin(rng)) {
        Cell p{shift, static_cast<AxisSet>(axis_bit(a) | axis_bit(b)), 1};
        p.base[a] += i;
        p.base[b] += j;
        q.add(p);
      }
  return boundary(q);
}

}  // namespace

TEST(Loops, RectangleBasics) {
  for (auto [R, T] : {std::pair{1, 1}, {2, 3}, {4, 2}}) {
    Loop g = rect_loop(3, R, T);
    EXPECT_EQ(g.length(), 2 * (R + T));
    EXPECT_TRUE(boundary(g.chain()).empty());
    Chain q = flat_surface(g);
    EXPECT_EQ(static_cast<int>(q.size()), R * T);
    EXPECT_EQ(boundary(q), g.chain());
  }
  // counterclockwise: the first edge runs along +a from the base
  Loop g = rect_loop(3, 2, 2, 0, 2, make_point({1, 1, 1}));
  EXPECT_EQ(g.chain().coefficient(make_cell({1, 1, 1}, {0})), 1);
  EXPECT_EQ(g.chain().coefficient(make_cell({1, 1, 1}, {2})), -1);
  EXPECT_THROW(rect_loop(3, 0, 2), DomainError);
  EXPECT_THROW(rect_loop(3, 1, 1, 1, 1), DomainError);
}

TEST(Loops, StatsKnownCases) {
  LoopStats s = loop_stats(rect_loop(3, 1, 1));
  EXPECT_EQ(s.length, 4);
  EXPECT_EQ(s.corners, 4);
  EXPECT_EQ(s.bottlenecks, 2);
  s = loop_stats(rect_loop(3, 2, 2));
  EXPECT_EQ(s.length, 8);
  EXPECT_EQ(s.corners, 4);
  EXPECT_EQ(s.bottlenecks, 0);
  for (int T : {2, 3, 4}) EXPECT_EQ(loop_stats(rect_loop(3, 1, T)).bottlenecks, T);
}

TEST(Loops, StatsMatchPlaquetteScan) {
  std::mt19937 rng(2);
  for (int m : {3, 4})
    for (int trial = 0; trial < 20; ++trial) {
      Chain c = random_planar_boundary(rng, m);
      if (c.empty()) continue;
      Loop g(m, c);
      LoopStats a = loop_stats(g), b = stats_by_plaquette_scan(g);
      EXPECT_EQ(a.length, b.length);
      EXPECT_EQ(a.corners, b.corners);
      EXPECT_EQ(a.bottlenecks, b.bottlenecks);
    }
}

TEST(Loops, StatsInvariantUnderTranslationAndSwap) {
  for (int R = 1; R <= 3; ++R)
    for (int T = 1; T <= 3; ++T) {
      LoopStats a = loop_stats(rect_loop(4, R, T));
      LoopStats b = loop_stats(rect_loop(4, T, R, 1, 3, make_point({2, -1, 5, 0})));
      EXPECT_EQ(a.length, b.length);
      EXPECT_EQ(a.corners, b.corners);
      EXPECT_EQ(a.bottlenecks, b.bottlenecks);
    }
}

TEST(Loops, SolvedSurfaceHasExactBoundary) {
  LatticeBox box = LatticeBox::centered(3, 5);
  Loop rect = rect_loop(3, 2, 3, 0, 1, make_point({1, 0, 2}));
  EXPECT_EQ(boundary(solve_surface(rect, box)), rect.chain());
  Loop ell = parse_loop("edges:0,0,0>0;1,0,0>0;2,0,0>1;1,1,0<0;1,1,0>1;0,2,0<0;0,1,0<1;0,0,0<1", 3);
  EXPECT_EQ(boundary(solve_surface(ell, box)), ell.chain());
  EXPECT_TRUE(solve_surface(Loop(3, Chain(1)), box).empty());
  std::mt19937 rng(9);
  for (int m : {3, 4})
    for (int trial = 0; trial < 30; ++trial) {
      Chain c = random_planar_boundary(rng, m);
      Loop g(m, c);
      EXPECT_EQ(boundary(solve_surface(g, LatticeBox::centered(m, 8))), c);
    }
  EXPECT_THROW(solve_surface(rect_loop(3, 9, 1), box), DomainError);
}

// Closed forms pair identically with any two surfaces bounding the same loop.
TEST(Loops, SurfaceChoiceInvisibleToClosedForms) {
  LatticeBox box = LatticeBox::centered(3, 3);
  std::vector<Cell> edges = enumerate_cells(box, 1);
  std::mt19937 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (auto [R, T] : {std::pair{1, 1}, {2, 2}, {3, 2}}) {
    Loop g = rect_loop(3, R, T, 1, 2, make_point({0, -1, -1}));
    Chain flat = flat_surface(g), solved = solve_surface(g, box);
    for (int trial = 0; trial < 40; ++trial) {
      Form sigma(1);
      for (const Cell& e : edges)
        if (coin(rng)) sigma.set(e, true);
      Form nu = exterior_derivative(sigma, box);
      EXPECT_EQ(evaluate(nu, flat), evaluate(nu, solved));
      EXPECT_EQ(evaluate(nu, flat), evaluate(sigma, g.chain()));
    }
  }
}

TEST(Loops, CornerRestriction) {
  for (auto [R, T] : {std::pair{2, 2}, {3, 5}, {4, 4}}) {
    Loop g = rect_loop(3, R, T);
    EXPECT_EQ(corner_restriction(g, 1).size(), 8u);
    for (int j = 1; j <= std::min(R, T); ++j) EXPECT_LE(corner_restriction(g, j).size(), 8u * j);
    EXPECT_EQ(static_cast<int>(corner_restriction(g, R + T).size()), g.length());
  }
  EXPECT_THROW(corner_restriction(rect_loop(3, 2, 2), 0), DomainError);
}

TEST(Loops, ParseSpecs) {
  Loop a = parse_loop("rect:2,3", 3);
  EXPECT_EQ(a.length(), 10);
  Loop b = parse_loop("rect:2,3,axes=1-2,base=1,2,3", 3);
  ASSERT_TRUE(b.rect());
  EXPECT_EQ(b.rect()->a, 1);
  EXPECT_EQ(b.rect()->base, make_point({1, 2, 3}));
  Loop c = parse_loop("rect:1,1,base=0,0,0,5,axes=2-3", 4);
  EXPECT_EQ(c.rect()->base, make_point({0, 0, 0, 5}));
  Loop d = parse_loop("edges:0,0,0>0;1,0,0>1;0,1,0<0;0,0,0<1", 3);
  EXPECT_EQ(d.chain(), rect_loop(3, 1, 1).chain());
  for (const char* bad : {"rect:2", "rect:a,b", "rect:1,1,base=1,2", "edges:0,0,0>0", "edges:0,0>0", "square:1",
                          "rect:1,1,axes=0", "edges:0,0,0>7"})
    EXPECT_THROW(parse_loop(bad, 3), DomainError) << bad;
}
