#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "brute_force.hpp"
#include "gauge_polymer/vortex.hpp"

using namespace gauge_polymer;

namespace {

std::map<std::size_t, int> size_histogram(const std::vector<Vortex>& vs) {
  std::map<std::size_t, int> h;
  for (const Vortex& v : vs) ++h[v.size()];
  return h;
}

Cell root_plaquette(int) { return Cell{Point{}, static_cast<AxisSet>(axis_bit(0) | axis_bit(1)), 1}; }

}  // namespace

TEST(Vortex, MinimalVortexSize) {
  for (int m = 3; m <= 5; ++m) {
    LatticeBox box = LatticeBox::centered(m, 2);
    Vortex v = minimal_vortex(Cell{Point{}, axis_bit(1), 1}, box);
    EXPECT_EQ(v.size(), static_cast<std::size_t>(2 * (m - 1)));
    EXPECT_TRUE(is_closed(v.form(), box));
    EXPECT_EQ(classify(v, m).kind, VortexClass::Kind::kMinimal);
  }
}

TEST(Vortex, SmallSizesThroughAPlaquette) {
  // 2(m-1) minimal vortices through p, one per boundary edge. The next size is
  // 4(m-1)-2. Edge pairs d(e + e') through p: e is one of the 4 edges of p and e'
  // any partner off p, 4 * (6(m-1) - 3) in all. At m = 3 the tripods d(e1 + e2 + e3),
  // three perpendicular edges at one vertex, have the same size 6(m-2) = 6; each
  // corner of p carries 2 of them through p.
  for (int m = 3; m <= 4; ++m) {
    int cap = 4 * (m - 1) - 2;
    LatticeBox box = LatticeBox::centered(m, cap + 1);
    auto vs = vortices_containing(root_plaquette(m), cap, box);
    auto h = size_histogram(vs);
    EXPECT_EQ(h[2 * (m - 1)], 4) << m;
    int pairs = 0, other = 0;
    for (std::size_t s = 2 * (m - 1) + 1; s < static_cast<std::size_t>(4 * (m - 1) - 2); ++s)
      EXPECT_EQ(h.count(s), 0u) << "size " << s;
    for (const Vortex& v : vs) {
      EXPECT_TRUE(is_closed(v.form(), box));
      EXPECT_EQ(connected_components(v.plaquettes(), box).size(), 1u);
      auto cls = classify(v, m);
      if (v.size() == static_cast<std::size_t>(2 * (m - 1))) {
        EXPECT_EQ(cls.kind, VortexClass::Kind::kMinimal);
      } else if (cls.kind == VortexClass::Kind::kEdgePair) {
        ++pairs;
      } else {
        ++other;
        Form s = poincare_solve(v.form(), bounding_box(v.plaquettes(), m), PoincareBoundary::kVanishing);
        auto edges = s.support();
        ASSERT_EQ(edges.size(), 3u);
        AxisSet axes = edges[0].axes | edges[1].axes | edges[2].axes;
        EXPECT_EQ(std::popcount(axes), 3);
      }
    }
    EXPECT_EQ(pairs, 4 * (6 * (m - 1) - 3)) << m;
    EXPECT_EQ(other, m == 3 ? 8 : 0) << m;
  }
}

TEST(Vortex, InteriorSizesAreEven) {
  LatticeBox box = LatticeBox::centered(3, 9);
  for (const Vortex& v : vortices_containing(root_plaquette(3), 8, box)) EXPECT_EQ(v.size() % 2, 0u);
}

TEST(Vortex, MatchesConnectedSetFilterInTheInterior) {
  for (int m = 3; m <= 4; ++m) {
    int cap = m == 3 ? 7 : 6;
    LatticeBox box = LatticeBox::centered(m, cap + 1);
    PlaquetteIndex idx(box);
    std::uint32_t root = *idx.plaquette_id(root_plaquette(m));
    auto expected = brute::vortices(idx, root, cap);
    std::set<std::vector<std::uint32_t>> got;
    std::size_t emitted = 0;
    VortexEnumerator en(idx);
    en.for_each_containing(root, cap, [&](const std::vector<std::uint32_t>& s) {
      got.insert(s);
      ++emitted;
    });
    EXPECT_EQ(emitted, got.size()) << "duplicate emission";
    EXPECT_EQ(got, expected) << m;
  }
}

TEST(Vortex, MatchesConnectedSetFilterInSmallBoxes) {
  for (LatticeBox box : {LatticeBox::span({1, 1, 1}), LatticeBox::span({2, 1, 1}), LatticeBox::span({2, 2, 1}),
                         LatticeBox::span({1, 1, 1, 1})}) {
    PlaquetteIndex idx(box);
    int cap = 9;
    for (const Cell& p : enumerate_cells(box, 2)) {
      std::uint32_t root = *idx.plaquette_id(p);
      auto expected = brute::vortices(idx, root, cap);
      std::set<std::vector<std::uint32_t>> got;
      VortexEnumerator en(idx);
      en.for_each_containing(root, cap, [&](const std::vector<std::uint32_t>& s) { got.insert(s); });
      EXPECT_EQ(got, expected);
    }
  }
}

TEST(Vortex, EnumerationIsDeterministic) {
  LatticeBox box = LatticeBox::centered(3, 8);
  auto a = vortices_containing(root_plaquette(3), 8, box);
  auto b = vortices_containing(root_plaquette(3), 8, box);
  EXPECT_EQ(a, b);
}

TEST(Vortex, BudgetIsEnforced) {
  LatticeBox box = LatticeBox::centered(3, 11);
  EXPECT_THROW(vortices_containing(root_plaquette(3), 10, box, 1000), BudgetExceeded);
  // the enumerator stays usable after an aborted run
  PlaquetteIndex idx(box);
  VortexEnumerator en(idx, 1000);
  EXPECT_THROW(en.for_each_containing(*idx.plaquette_id(root_plaquette(3)), 10, [](const auto&) {}),
               BudgetExceeded);
  int n = 0;
  VortexEnumerator fresh(idx);
  fresh.for_each_containing(*idx.plaquette_id(root_plaquette(3)), 4, [&](const auto&) { ++n; });
  int again = 0;
  EXPECT_NO_THROW(en.for_each_containing(*idx.plaquette_id(root_plaquette(3)), 4, [&](const auto&) { ++again; }));
  EXPECT_EQ(n, again);
}

TEST(Vortex, CountBoundHolds) {
  LatticeBox box = LatticeBox::centered(3, 9);
  auto h = size_histogram(vortices_containing(root_plaquette(3), 8, box));
  double bound = 1;
  for (int k = 1; k <= 8; ++k) {
    bound = std::pow(10.0, 2 * k - 1);
    EXPECT_LE(h[k], bound);
  }
}

TEST(Vortex, DecomposeSplitsDistantVortices) {
  LatticeBox box = LatticeBox::centered(3, 4);
  Form w = minimal_vortex(make_cell({0, 0, 0}, {0}), box).form();
  w += minimal_vortex(make_cell({2, 2, 2}, {1}), box).form();
  auto parts = decompose(w, box);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 4u);
  EXPECT_EQ(parts[1].size(), 4u);
}

TEST(Vortex, ClassifyRecognisesBothPairShapes) {
  LatticeBox box = LatticeBox::centered(3, 3);
  auto pair_form = [&](const Cell& a, const Cell& b) {
    Form s(1);
    s.toggle(a);
    s.toggle(b);
    return Vortex(exterior_derivative(s, box).support());
  };
  auto par = classify(pair_form(make_cell({0, 0, 0}, {0}), make_cell({0, 1, 0}, {0})), 3);
  EXPECT_EQ(par.kind, VortexClass::Kind::kEdgePair);
  EXPECT_TRUE(par.parallel);
  auto perp = classify(pair_form(make_cell({0, 0, 0}, {0}), make_cell({0, 0, 0}, {1})), 3);
  EXPECT_EQ(perp.kind, VortexClass::Kind::kEdgePair);
  EXPECT_FALSE(perp.parallel);
}
