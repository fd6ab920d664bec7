#include <gtest/gtest.h>

#include <random>

#include "gauge_polymer/lattice.hpp"

using namespace gauge_polymer;

namespace {

Form random_form(const LatticeBox& box, int k, std::mt19937_64& rng, double density = 0.3) {
  std::bernoulli_distribution coin(density);
  Form f(k);
  for (const Cell& c : enumerate_cells(box, k))
    if (coin(rng)) f.toggle(c);
  return f;
}

Chain random_chain(const LatticeBox& box, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coeff(-2, 2);
  Chain q(k);
  for (const Cell& c : enumerate_cells(box, k)) q.add(c, coeff(rng));
  return q;
}

}  // namespace

TEST(Lattice, AxisOrderIsLexicographic) {
  EXPECT_TRUE(axes_less(axis_bit(0) | axis_bit(3), axis_bit(1) | axis_bit(2)));
  EXPECT_TRUE(axes_less(axis_bit(0) | axis_bit(1), axis_bit(0) | axis_bit(2)));
  EXPECT_FALSE(axes_less(axis_bit(1) | axis_bit(2), axis_bit(1) | axis_bit(2)));
}

TEST(Lattice, EnumeratedCellsAreCanonicallySortedAndCounted) {
  LatticeBox box = LatticeBox::span({2, 1, 3});
  auto plaq = enumerate_cells(box, 2);
  EXPECT_TRUE(std::is_sorted(plaq.begin(), plaq.end()));
  // xy: 2*1*4, xz: 2*2*3, yz: 3*1*3
  EXPECT_EQ(plaq.size(), 8u + 12u + 9u);
  auto edges = enumerate_cells(box, 1);
  EXPECT_EQ(edges.size(), 2u * 2 * 4 + 3u * 1 * 4 + 3u * 2 * 3);
  EXPECT_EQ(enumerate_cells(box, 0).size(), box.vertex_count());
}

TEST(Lattice, BoundaryOfBoundaryVanishes) {
  LatticeBox box = LatticeBox::span({1, 2, 1, 1});
  for (int k = 2; k <= 4; ++k)
    for (const Cell& c : enumerate_cells(box, k)) {
      EXPECT_TRUE(boundary(boundary(c)).empty()) << to_string(c, 4);
      EXPECT_TRUE(boundary(boundary(c.reversed())).empty());
    }
}

TEST(Lattice, PlaquetteBoundaryIsCounterclockwise) {
  Chain b = boundary(make_cell({0, 0, 0}, {0, 1}));
  EXPECT_EQ(b.coefficient(make_cell({0, 0, 0}, {0})), 1);
  EXPECT_EQ(b.coefficient(make_cell({1, 0, 0}, {1})), 1);
  EXPECT_EQ(b.coefficient(make_cell({0, 1, 0}, {0})), -1);
  EXPECT_EQ(b.coefficient(make_cell({0, 0, 0}, {1})), -1);
  EXPECT_EQ(b.coefficient(make_cell({0, 1, 0}, {0}, -1)), 1);
}

TEST(Lattice, CoboundarySizes) {
  LatticeBox box = LatticeBox::centered(3, 2);
  EXPECT_EQ(coboundary(make_cell({0, 0, 0}, {0}), box).size(), 4u);
  EXPECT_EQ(coboundary(make_cell({0, 0, 0}, {0, 2}), box).size(), 2u);
  LatticeBox box4 = LatticeBox::centered(4, 2);
  EXPECT_EQ(coboundary(make_cell({0, 0, 0, 0}, {1}), box4).size(), 6u);
  EXPECT_EQ(coboundary(make_cell({0, 0, 0, 0}, {1, 3}), box4).size(), 4u);
  // edge on a corner line of the box keeps only the plaquettes inside it
  EXPECT_EQ(coboundary(make_cell({2, 2, 0}, {2}), box).size(), 0u + 2u);
}

TEST(Lattice, CoboundaryIsAdjointToBoundary) {
  LatticeBox box = LatticeBox::span({2, 2, 1});
  for (const Cell& c : enumerate_cells(box, 1)) {
    Chain cb = coboundary(c, box);
    for (const Cell& d : enumerate_cells(box, 2)) EXPECT_EQ(cb.coefficient(d), boundary(d).coefficient(c));
  }
}

TEST(Lattice, DSquaredVanishesOnRandomForms) {
  std::mt19937_64 rng(7);
  LatticeBox box = LatticeBox::span({2, 2, 2, 1});
  for (int trial = 0; trial < 20; ++trial)
    for (int k = 0; k <= 2; ++k) {
      Form f = random_form(box, k, rng);
      EXPECT_TRUE(exterior_derivative(exterior_derivative(f, box), box).empty());
    }
}

TEST(Lattice, StokesPairingOnRandomData) {
  std::mt19937_64 rng(11);
  LatticeBox box = LatticeBox::span({2, 3, 2});
  for (int trial = 0; trial < 30; ++trial) {
    for (int k = 1; k <= 2; ++k) {
      Form s = random_form(box, k - 1, rng, 0.5);
      Chain q = random_chain(box, k, rng);
      EXPECT_EQ(evaluate(exterior_derivative(s, box), q), evaluate(s, boundary(q)));
    }
  }
}

TEST(Lattice, ClosedFormSpotChecks) {
  LatticeBox box = LatticeBox::centered(3, 2);
  Form single(2);
  single.toggle(make_cell({0, 0, 0}, {0, 1}));
  EXPECT_FALSE(is_closed(single, box));
  Form de(1);
  de.toggle(make_cell({0, 0, 0}, {0}));
  EXPECT_TRUE(is_closed(exterior_derivative(de, box), box));
  EXPECT_EQ(exterior_derivative(de, box).size(), 4u);
}

TEST(Lattice, PoincareSolveRoundTrip) {
  std::mt19937_64 rng(3);
  LatticeBox box = LatticeBox::span({2, 2, 3});
  for (int trial = 0; trial < 20; ++trial)
    for (int k = 1; k <= 3; ++k) {
      Form w = exterior_derivative(random_form(box, k - 1, rng, 0.4), box);
      Form s = poincare_solve(w, box);
      EXPECT_EQ(exterior_derivative(s, box), w);
      for (const Cell& c : s.support()) EXPECT_TRUE(box.contains(c));
      EXPECT_EQ(poincare_solve(w, box), s);  // deterministic
    }
}

TEST(Lattice, PoincareSolveIsTranslationEquivariant) {
  std::mt19937_64 rng(5);
  LatticeBox a = LatticeBox::span({2, 2, 2});
  LatticeBox b(3, make_point({-4, 7, 1}), make_point({-2, 9, 3}));
  for (int trial = 0; trial < 10; ++trial) {
    Form w = exterior_derivative(random_form(a, 1, rng, 0.4), a);
    Form shifted(2);
    for (Cell c : w.support()) {
      c.base[0] -= 4, c.base[1] += 7, c.base[2] += 1;
      shifted.toggle(c);
    }
    Form sa = poincare_solve(w, a), sb = poincare_solve(shifted, b);
    ASSERT_EQ(sa.size(), sb.size());
    for (Cell c : sa.support()) {
      c.base[0] -= 4, c.base[1] += 7, c.base[2] += 1;
      EXPECT_TRUE(sb.value(c));
    }
  }
}

TEST(Lattice, PoincareVanishingBoundaryGivesGlobalPrimitive) {
  // d(e + e') for parallel edges on a common plaquette, solved on its bounding box
  LatticeBox big = LatticeBox::centered(3, 3);
  Form s(1);
  s.toggle(make_cell({0, 0, 0}, {0}));
  s.toggle(make_cell({0, 1, 0}, {0}));
  Form w = exterior_derivative(s, big);
  EXPECT_EQ(w.size(), 6u);
  LatticeBox bb = bounding_box(w.support(), 3);
  Form sol = poincare_solve(w, bb, PoincareBoundary::kVanishing);
  EXPECT_EQ(sol, s);
  EXPECT_EQ(exterior_derivative(sol, big), w);
}

TEST(Lattice, PoincareRejectsOpenForms) {
  LatticeBox box = LatticeBox::span({1, 1, 1});
  Form single(2);
  single.toggle(make_cell({0, 0, 0}, {0, 1}));
  EXPECT_THROW(poincare_solve(single, box), std::invalid_argument);
}

TEST(Lattice, DegreeMismatchIsAnError) {
  Form f(2);
  Chain q(1);
  EXPECT_THROW(evaluate(f, q), std::invalid_argument);
  EXPECT_THROW(f.toggle(make_cell({0, 0, 0}, {0})), std::invalid_argument);
  EXPECT_THROW(LatticeBox(2, Point{}, Point{}), std::invalid_argument);
}
