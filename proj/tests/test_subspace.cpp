#include <doctest.h>

#include <bit>
#include <random>
#include <set>

#include "hfin/errors.hpp"
#include "hfin/subspace.hpp"

using namespace hfin;

namespace {

// Every set partition of {0..n-1} as a block-label vector, by restricted growth strings.
void all_partitions(int n, std::vector<int>& label, int next, int maxlab, std::vector<std::vector<int>>& out) {
  if (next == n) {
    out.push_back(label);
    return;
  }
  for (int b = 0; b <= maxlab + 1; ++b) {
    label[next] = b;
    all_partitions(n, label, next + 1, std::max(maxlab, b), out);
  }
}

bool satisfies_partition_condition(const std::vector<Mask>& blocks, const std::vector<CoordSubspace>& images) {
  for (Mask b : blocks)
    for (const auto& w : images) {
      bool in_image = (b & ~w.mask) == 0;
      bool in_kernel = (b & w.mask) == 0;
      if (!in_image && !in_kernel) return false;
    }
  return true;
}

}  // namespace

TEST_SUITE("subspace") {
  TEST_CASE("enumeration of coordinate subspaces") {
    auto s0 = enumerate_coordinate_subspaces(0);
    REQUIRE(s0.size() == 1);
    CHECK(s0[0].dim() == 0);

    auto s2 = enumerate_coordinate_subspaces(2);
    REQUIRE(s2.size() == 4);
    CHECK(s2[0] == CoordSubspace::zero(2));
    CHECK(s2[1] == CoordSubspace::from_indices(2, {1}));
    CHECK(s2[2] == CoordSubspace::from_indices(2, {2}));
    CHECK(s2[3] == CoordSubspace::full(2));

    for (int n = 1; n <= 8; ++n) {
      auto all = enumerate_coordinate_subspaces(n);
      CHECK(all.size() == (std::size_t{1} << n));
      long dims = 0;
      for (const auto& v : all) dims += v.dim();
      CHECK(dims == static_cast<long>(n) << (n - 1));
    }
    CHECK_THROWS_AS(enumerate_coordinate_subspaces(25), InputError);
  }

  TEST_CASE("lattice operations are bitwise") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      int n = 1 + static_cast<int>(rng() % 10);
      Mask full = (Mask{1} << n) - 1;
      CoordSubspace a{n, static_cast<Mask>(rng()) & full}, b{n, static_cast<Mask>(rng()) & full};
      CHECK(a.dim() == std::popcount(a.mask));
      CHECK(a.meet(b).mask == (a.mask & b.mask));
      CHECK(a.join(b).mask == (a.mask | b.mask));
      CHECK(a.complement().mask == (full & ~a.mask));
      CHECK(a.complement().complement() == a);
      CHECK(a.meet(b).subset_of(a));
      CHECK(a.subset_of(a.join(b)));
      CHECK(a.dim() + a.complement().dim() == n);
    }
  }

  TEST_CASE("string and index forms") {
    auto v = CoordSubspace::from_indices(4, {1, 3});
    CHECK(v.str() == "<e1,e3>");
    CHECK(CoordSubspace::zero(3).str() == "{0}");
    CHECK(v.indices() == std::vector<int>{0, 2});
    CHECK_THROWS_AS(CoordSubspace::from_indices(3, {4}), InputError);
  }

  TEST_CASE("config JSON round trip and validation") {
    auto c = make_config(4, 3, {{2}, {3}, {4}, {1}, {2, 3, 4}});
    CHECK(c.M() == 5);
    CHECK(config_from_json(to_json(c)) == c);
    auto j = nlohmann::json::parse(R"({"n":2,"m":2,"subspaces":[[1],[2]]})");
    CHECK_THROWS_AS(config_from_json(j).validate(), InputError);
    auto k = nlohmann::json::parse(R"({"n":2,"m":1,"subspaces":[[1],[3]]})");
    CHECK_THROWS_AS(config_from_json(k), InputError);
  }

  TEST_CASE("maximal partition examples") {
    // Images of L_4, L_5 in the four-dimensional published example.
    auto p = maximal_partition({CoordSubspace::from_indices(4, {1}), CoordSubspace::from_indices(4, {2, 3, 4})});
    REQUIRE(p.blocks.size() == 2);
    CHECK(p.blocks[0] == CoordSubspace::from_indices(4, {1}));
    CHECK(p.blocks[1] == CoordSubspace::from_indices(4, {2, 3, 4}));

    auto id = maximal_partition({CoordSubspace::full(3)});
    REQUIRE(id.blocks.size() == 1);
    CHECK(id.blocks[0] == CoordSubspace::full(3));

    auto lw = maximal_partition({CoordSubspace::from_indices(3, {2, 3}), CoordSubspace::from_indices(3, {1, 3}),
                                 CoordSubspace::from_indices(3, {1, 2})});
    CHECK(lw.blocks.size() == 3);
    CHECK(lw.block_of(2) == 2);

    CHECK_THROWS(maximal_partition({}));
  }

  TEST_CASE("maximal partition is the coarsest adapted one") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
      int n = 1 + static_cast<int>(rng() % 6);
      int M = 1 + static_cast<int>(rng() % 4);
      Mask full = (Mask{1} << n) - 1;
      std::vector<CoordSubspace> imgs;
      for (int j = 0; j < M; ++j) imgs.push_back({n, static_cast<Mask>(rng()) & full});
      auto part = maximal_partition(imgs);

      std::vector<Mask> ours;
      Mask cover = 0;
      for (const auto& b : part.blocks) {
        CHECK((cover & b.mask) == 0);
        cover |= b.mask;
        ours.push_back(b.mask);
      }
      CHECK(cover == full);
      CHECK(satisfies_partition_condition(ours, imgs));
      CHECK(is_adapted_partition(part.blocks, imgs));

      std::vector<std::vector<int>> parts;
      std::vector<int> label(n, 0);
      all_partitions(n, label, 1, 0, parts);
      for (const auto& lab : parts) {
        int nb = *std::max_element(lab.begin(), lab.end()) + 1;
        if (nb >= static_cast<int>(ours.size())) continue;
        std::vector<Mask> blocks(nb, 0);
        for (int i = 0; i < n; ++i) blocks[lab[i]] |= Mask{1} << i;
        CHECK_FALSE(satisfies_partition_condition(blocks, imgs));
      }

      // Idempotence: the blocks, used as projection images, reproduce themselves.
      auto again = maximal_partition(part.blocks);
      CHECK(again.blocks == part.blocks);
    }
  }

  TEST_CASE("restriction to a subspace") {
    auto c = make_config(3, 3, {{1}, {2}, {3}, {}});
    auto W = CoordSubspace::from_indices(3, {1, 2});
    Restriction r = restrict_config(c, W);
    REQUIRE(r.inner.M() == 4);
    CHECK(r.inner.n == 2);
    for (int j = 0; j < c.M(); ++j) {
      CHECK(r.inner_ambient[j] == c.V[j].meet(W));
      CHECK(r.inner_ambient[j].subset_of(c.V[j]));
    }
    CHECK(r.inner.V[0] == CoordSubspace::from_indices(2, {1}));
    CHECK(r.inner.V[2] == CoordSubspace::zero(2));
    CHECK(r.flat_dim == 1);
    CHECK(r.flat.size() == static_cast<std::size_t>(c.M()));

    auto holder = make_config(3, 1, {{1, 2, 3}, {1, 2, 3}});
    Restriction h = restrict_config(holder, CoordSubspace::from_indices(3, {2}));
    for (const auto& v : h.inner.V) CHECK(v == CoordSubspace::full(1));

    CHECK_THROWS_AS(restrict_config(c, CoordSubspace::zero(3)), PreconditionError);
    CHECK_THROWS_AS(restrict_config(c, CoordSubspace::full(3)), PreconditionError);
  }

  TEST_CASE("restriction keeps every subspace inside its input") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      int n = 2 + static_cast<int>(rng() % 5);
      int M = 2 + static_cast<int>(rng() % 4);
      Mask full = (Mask{1} << n) - 1;
      ProjectionConfig c{n, 1, {}};
      for (int j = 0; j < M; ++j) c.V.push_back({n, static_cast<Mask>(rng()) & full});
      Mask w = 0;
      while (w == 0 || w == full) w = static_cast<Mask>(rng()) & full;
      Restriction r = restrict_config(c, {n, w});
      for (int j = 0; j < M; ++j) CHECK(r.inner_ambient[j].subset_of(c.V[j]));
      CHECK(r.flat_dim == n - std::popcount(w));
    }
  }

  TEST_CASE("mask compression") {
    std::vector<int> coords{1, 3, 4};
    CHECK(compress_mask(0b11010, coords) == 0b111);
    CHECK(expand_mask(0b101, coords) == 0b10010);
  }
}
