#include <gtest/gtest.h>

#include <random>

#include "gauge_polymer/plaquette_graph.hpp"

using namespace gauge_polymer;

TEST(PlaquetteGraph, InteriorDegree) {
  for (int m = 3; m <= 5; ++m) {
    LatticeBox box = LatticeBox::centered(m, 2);
    Cell p{Point{}, static_cast<AxisSet>(axis_bit(0) | axis_bit(1)), 1};
    EXPECT_EQ(neighbors(p, box).size(), static_cast<std::size_t>(10 * (m - 2))) << m;
  }
}

TEST(PlaquetteGraph, BoundaryPlaquettesHaveFewerNeighbours) {
  LatticeBox box = LatticeBox::span({1, 1, 1});
  for (const Cell& p : enumerate_cells(box, 2)) EXPECT_EQ(neighbors(p, box).size(), 5u);
  EXPECT_EQ(neighbors(make_cell({0, 0, 0}, {0, 1}), LatticeBox::span({1, 1, 0})).size(), 0u);
}

TEST(PlaquetteGraph, AdjacencyMatchesSharedThreeCells) {
  LatticeBox box = LatticeBox::span({2, 2, 1, 1});
  PlaquetteIndex idx(box);
  auto plaq = enumerate_cells(box, 2);
  auto cubes = enumerate_cells(box, 3);
  for (const Cell& p : plaq) {
    std::set<Cell> expected;
    for (const Cell& c : cubes) {
      Chain b = boundary(c);
      if (b.coefficient(p) == 0) continue;
      for (const auto& [f, n] : b.terms())
        if (!(f == p)) expected.insert(f);
    }
    auto got = neighbors(p, box);
    EXPECT_EQ(std::set<Cell>(got.begin(), got.end()), expected);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  }
}

TEST(PlaquetteGraph, IdsFollowCanonicalOrder) {
  LatticeBox box(4, make_point({-1, 0, 2, 0}), make_point({1, 2, 3, 1}));
  PlaquetteIndex idx(box);
  std::uint32_t last = 0;
  bool first = true;
  std::size_t count = 0;
  for (const Cell& p : enumerate_cells(box, 2)) {
    auto id = idx.plaquette_id(p);
    ASSERT_TRUE(id);
    EXPECT_TRUE(idx.valid_plaquette(*id));
    EXPECT_EQ(idx.plaquette(*id), p);
    if (!first) {
      EXPECT_GT(*id, last);
    }
    last = *id;
    first = false;
    ++count;
  }
  std::size_t valid = 0;
  for (std::uint32_t id = 0; id < idx.plaquette_slots(); ++id) valid += idx.valid_plaquette(id);
  EXPECT_EQ(valid, count);
  for (const Cell& c : enumerate_cells(box, 3)) EXPECT_EQ(idx.cube(*idx.cube_id(c)), c);
}

TEST(PlaquetteGraph, BoundaryFlagMatchesCubeCount) {
  LatticeBox box = LatticeBox::span({3, 2, 2});
  PlaquetteIndex idx(box);
  std::uint32_t buf[PlaquetteIndex::kMaxCubes];
  for (const Cell& p : enumerate_cells(box, 2)) {
    std::uint32_t id = *idx.plaquette_id(p);
    bool full = idx.cubes_of(id, buf) == 2 * (box.dim() - 2);
    EXPECT_EQ(idx.on_boundary(id), !full);
    EXPECT_EQ(idx.on_boundary(id), box.on_boundary(p));
  }
}

TEST(PlaquetteGraph, ComponentsPartitionTheSet) {
  std::mt19937_64 rng(1);
  LatticeBox box = LatticeBox::span({3, 3, 3});
  auto plaq = enumerate_cells(box, 2);
  std::bernoulli_distribution coin(0.08);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Cell> s;
    for (const Cell& p : plaq)
      if (coin(rng)) s.push_back(p);
    auto comps = connected_components(s, box);
    std::size_t total = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      total += comps[i].size();
      for (std::size_t j = i + 1; j < comps.size(); ++j)
        for (const Cell& a : comps[i])
          for (const Cell& b : comps[j]) {
            auto nb = neighbors(a, box);
            EXPECT_FALSE(std::binary_search(nb.begin(), nb.end(), b));
          }
    }
    EXPECT_EQ(total, s.size());
  }
}
