#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hfin/box_union.hpp"
#include "hfin/ellipsoid.hpp"
#include "hfin/errors.hpp"
#include "hfin/examples.hpp"
#include "hfin/finner.hpp"
#include "hfin/voxel.hpp"

using namespace hfin;

namespace {

Rational R(long a, long b = 1) { return make_rational(a, b); }

VoxelSet random_set(std::mt19937_64& rng, int d, int side, double density) {
  std::vector<std::int32_t> flat;
  long cells = 1;
  for (int k = 0; k < d; ++k) cells *= side;
  std::bernoulli_distribution keep(density);
  for (long c = 0; c < cells; ++c) {
    if (!keep(rng)) continue;
    long rem = c;
    for (int k = 0; k < d; ++k) {
      flat.push_back(static_cast<std::int32_t>(rem % side));
      rem /= side;
    }
  }
  return VoxelSet::from_cells(d, 1.0, flat);
}

// All subsets of a full grid, as cell masks.
template <class F>
void for_each_subset(int d, int side, F f) {
  long cells = 1;
  for (int k = 0; k < d; ++k) cells *= side;
  for (long mask = 1; mask < (1L << cells); ++mask) {
    std::vector<std::int32_t> flat;
    for (long c = 0; c < cells; ++c) {
      if (!((mask >> c) & 1L)) continue;
      long rem = c;
      for (int k = 0; k < d; ++k) {
        flat.push_back(static_cast<std::int32_t>(rem % side));
        rem /= side;
      }
    }
    f(VoxelSet::from_cells(d, 1.0, flat));
  }
}

std::vector<CoordSubspace> lw3() {
  return {CoordSubspace::from_indices(3, {2, 3}), CoordSubspace::from_indices(3, {1, 3}),
          CoordSubspace::from_indices(3, {1, 2})};
}
const ExponentVector kHalf3{{R(1, 2), R(1, 2), R(1, 2)}};

}  // namespace

TEST_SUITE("voxel") {
  TEST_CASE("cells are sorted and unique") {
    auto s = VoxelSet::from_cells(2, 0.5, {1, 1, 0, 0, 1, 1});
    CHECK(s.size() == 2);
    CHECK(s.measure() == doctest::Approx(0.5));
    CHECK(s.exact_measure() == R(1, 2));
    std::int32_t c[2] = {1, 1};
    CHECK(s.contains(c));
  }

  TEST_CASE("coordinate pushforwards") {
    auto one = VoxelSet::from_cells(3, 0.25, {2, 3, 4});
    auto img = pushforward_coordinate(one, 0b011);
    CHECK(img.d() == 2);
    CHECK(img.size() == 1);
    CHECK(img.measure() == doctest::Approx(0.0625));

    auto cube = voxelize_box(1.0, {0, 0, 0}, {4, 4, 4});
    CHECK(cube.size() == 64);
    CHECK(pushforward_coordinate(cube, 0b011).size() == 16);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      auto S = random_set(rng, 3, 8, 0.1);
      Mask keep = static_cast<Mask>(rng() % 8);
      std::set<std::vector<std::int32_t>> brute;
      for (std::size_t k = 0; k < S.size(); ++k) {
        std::vector<std::int32_t> key;
        for (int a = 0; a < 3; ++a)
          if ((keep >> a) & 1u) key.push_back(S.cell(k)[a]);
        brute.insert(key);
      }
      auto im = pushforward_coordinate(S, keep);
      CHECK(im.size() == (S.empty() ? 0 : brute.size()));
    }
  }

  TEST_CASE("set algebra") {
    std::mt19937_64 rng(6);
    auto a = random_set(rng, 2, 6, 0.4), b = random_set(rng, 2, 6, 0.4);
    auto u = set_union(a, b), i = set_intersection(a, b);
    CHECK(u.size() + i.size() == a.size() + b.size());
    std::vector<bool> keep(a.size(), false);
    for (std::size_t k = 0; k < keep.size(); k += 2) keep[k] = true;
    CHECK(subset(a, keep).size() == (a.size() + 1) / 2);
  }

  TEST_CASE("VXL1 and JSON round trips") {
    std::mt19937_64 rng(9);
    for (int d : {1, 2, 3, 5}) {
      auto S = random_set(rng, d, 4, 0.3);
      std::stringstream ss;
      write_vxl1(ss, S);
      CHECK(ss.str().substr(0, 4) == "VXL1");
      CHECK(read_vxl1(ss) == S);
      CHECK(voxelset_from_json(to_json(S)) == S);
    }
    std::stringstream bad("XXXX");
    CHECK_THROWS_AS(read_vxl1(bad), InputError);
  }

  TEST_CASE("empty pushforward") {
    VoxelSet empty(3, 0.5);
    CHECK(pushforward_vertical(empty, pi_map(1), 0.5).empty());
  }

  TEST_CASE("vertical pushforward of the unit box converges to the sheared area") {
    // pi(x, y, t) = (y, t + xy/2): the image over y is an interval of length 1 + y/2.
    const double oracle = 1.25;
    auto box = voxelize_box(1.0 / 32, {0, 0, 0}, {1, 1, 1});
    auto fine = voxelize_box(1.0 / 64, {0, 0, 0}, {1, 1, 1});
    double a = pushforward_vertical(box, pi_map(1), 1.0 / 32).measure();
    double b = pushforward_vertical(fine, pi_map(1), 1.0 / 64).measure();
    CHECK(std::abs(a - b) / b < 0.02);
    CHECK(std::abs(a - oracle) / oracle < 0.05);
    CHECK(std::abs(b - oracle) / oracle < 0.05);
  }

  TEST_CASE("fiber traces") {
    auto c = builtin_config("ex2_3").config;
    auto s = derive_arithmetic(c, ExponentVector{{R(2, 7), R(2, 7), R(2, 7), R(4, 7)}});
    double h = 0.25;
    auto box = voxelize_box(h, std::vector<double>(7, 0.0), std::vector<double>(7, 1.0));
    HPoint z = cell_center_point(box, box.size() / 2);
    auto T = fiber_trace(box, z, fiber_spec(FiberKind::T, c, &s, 0));
    CHECK(T.size() > 0);
    auto Tt = fiber_trace(box, z, fiber_spec(FiberKind::TTilde, c, &s, s.m_tilde - 1));
    CHECK(Tt == T);
  }

  TEST_CASE("Finner inequality on explicit sets") {
    auto cube = voxelize_box(1.0, {0, 0, 0}, {4, 4, 4});
    auto full = finner_check(cube, lw3(), kHalf3);
    CHECK(full.ratio == doctest::Approx(1.0));
    CHECK(full.cmp_one == 0);

    std::vector<std::int32_t> diag;
    for (int k = 0; k < 5; ++k) diag.insert(diag.end(), {k, k, k});
    auto d = finner_check(VoxelSet::from_cells(3, 1.0, diag), lw3(), kHalf3);
    CHECK(d.ratio == doctest::Approx(5.0 / std::pow(5.0, 1.5)));
    CHECK(d.cmp_one < 0);

    CHECK_THROWS_AS(finner_check(cube, lw3(), ExponentVector{{R(1, 2), R(1, 2), R(1, 3)}}), PreconditionError);
  }

  TEST_CASE("Finner inequality over every subset of small grids") {
    double best = 0;
    std::size_t count = 0;
    for_each_subset(3, 2, [&](const VoxelSet& S) {
      auto f = finner_check(S, lw3(), kHalf3);
      CHECK(f.cmp_one <= 0);
      best = std::max(best, f.ratio);
      ++count;
    });
    CHECK(count == 255);
    CHECK(best == doctest::Approx(1.0));

    std::vector<CoordSubspace> holder{CoordSubspace::full(2), CoordSubspace::full(2)};
    for (const auto& p : {ExponentVector{{R(1, 2), R(1, 2)}}, ExponentVector{{R(1, 3), R(2, 3)}}}) {
      for_each_subset(2, 2, [&](const VoxelSet& S) { CHECK(finner_check(S, holder, p).cmp_one <= 0); });
    }
  }

  TEST_CASE("Finner inequality on random sets") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      auto S = random_set(rng, 3, 5, 0.05 + 0.9 * (trial % 10) / 10.0);
      if (S.empty()) continue;
      CHECK(finner_check(S, lw3(), kHalf3).cmp_one <= 0);
    }
  }

  TEST_CASE("generalized Finner on product boxes") {
    // Kernels {e1,e2} and {e2} are nested; every coordinate sum of the exponents is 1.
    std::vector<CoordSubspace> imgs{CoordSubspace::from_indices(3, {3}), CoordSubspace::from_indices(3, {1, 3}),
                                    CoordSubspace::from_indices(3, {3}), CoordSubspace::from_indices(3, {1})};
    ExponentVector p{{R(1, 2), R(1, 2), R(1), R(1, 2)}};
    std::vector<double> ratios;
    for (int a : {1, 3, 6})
      for (int b : {1, 4})
        for (int c : {2, 5}) {
          auto box = voxelize_box(1.0, {0, 0, 0}, {double(a), double(b), double(c)});
          auto g = gen_finner_check(box, imgs, 2, p, 0.5);
          CHECK(g.nested);
          CHECK(g.assumption);
          CHECK(g.regular);
          CHECK(g.raw_ratio == doctest::Approx(1.0));
          ratios.push_back(g.refined_ratio);
        }
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo < 1.0 + 1e-9);
  }

  TEST_CASE("generalized Finner reports broken nesting") {
    std::vector<CoordSubspace> imgs{CoordSubspace::from_indices(2, {2}), CoordSubspace::from_indices(2, {1}),
                                    CoordSubspace::full(2)};
    auto box = voxelize_box(1.0, {0, 0}, {3, 3});
    auto g = gen_finner_check(box, imgs, 2, ExponentVector{{R(1, 2), R(1, 2), R(1, 2)}}, 0.5);
    CHECK_FALSE(g.nested);
  }

  TEST_CASE("box unions") {
    BoxUnion u(2);
    u.add({{R(0), R(0)}, {R(2), R(1)}});
    u.add({{R(1), R(0)}, {R(3), R(2)}});
    CHECK(u.measure() == R(5));
    CHECK(u.projected_measure(0b01) == R(3));
    CHECK(u.projected_measure(0b10) == R(2));
    auto v = u.rasterize(0.25);
    CHECK(v.exact_measure() == R(5));
  }

  TEST_CASE("ellipsoid approximation of a box") {
    auto box = voxelize_box(0.25, {0, 0, 0}, {2, 1, 1});
    auto imgs = lw3();
    auto a = ellipsoid_approximation(box, imgs, 0.5);
    CHECK(a.contains_all);
    CHECK(a.adapted.adapted_to(a.partition.blocks));
    // Circumscribed ellipsoid of a cube over the cube: ball-to-cube ratio in dimension 3.
    CHECK(a.volume_ratio <= unit_ball_volume(3) * std::pow(std::sqrt(3.0) / 2, 3) * 1.05);
    CHECK(a.volume_ratio >= 1.0);
  }

  TEST_CASE("ellipsoid approximation of a ball") {
    auto ball = [](double h) {
      return voxelize(3, h, {-1, -1, -1}, {1, 1, 1}, [](const std::vector<double>& p) {
        return p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1;
      });
    };
    auto coarse = ellipsoid_approximation(ball(0.125), {CoordSubspace::full(3)}, 0.5);
    auto fine = ellipsoid_approximation(ball(0.0625), {CoordSubspace::full(3)}, 0.5);
    CHECK(coarse.contains_all);
    CHECK(fine.contains_all);
    CHECK(coarse.volume_ratio < 1.4);
    CHECK(fine.volume_ratio < coarse.volume_ratio);
    MESSAGE("volume ratios " << coarse.volume_ratio << " and " << fine.volume_ratio);
  }

  TEST_CASE("determinant integral against Monte Carlo") {
    std::vector<std::int32_t> flat;
    for (int i = -4; i < 4; ++i)
      for (int j = -4; j < 4; ++j) flat.insert(flat.end(), {i, j});
    for (int i = -1; i < 1; ++i)
      for (int j = -1; j < 1; ++j) flat.insert(flat.end(), {i, j});
    auto S = VoxelSet::from_cells(2, 0.25, flat);
    auto exact1 = det_integral(S, 1);
    auto mc1 = det_integral(S, 1, 100000, 5, true);
    CHECK(exact1.provenance == "exact");
    CHECK(std::abs(exact1.value - mc1.value) <= 3 * mc1.std_error + 1e-12);
    auto cert = det_certificate(S, 2, 100000, 5);
    CHECK(cert.integral.value > 0);
  }

  TEST_CASE("convexity fiber bound on a voxelized ellipse") {
    auto S = voxelize(3, 0.0625, {-2, -1, -1}, {2, 1, 1}, [](const std::vector<double>& p) {
      return p[0] * p[0] / 4 + p[1] * p[1] + p[2] * p[2] <= 1;
    });
    double r = convex_fiber_ratio(S, 0b011, 0b001);
    CHECK(r > 0.25);
    MESSAGE("convex fiber constant " << r);
  }
}
