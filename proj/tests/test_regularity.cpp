#include <doctest.h>

#include <cmath>
#include <random>

#include "hfin/examples.hpp"
#include "hfin/paraball.hpp"
#include "hfin/regularity.hpp"

using namespace hfin;

namespace {

Rational R(long a, long b = 1) { return make_rational(a, b); }

struct Radon {
  ProjectionConfig c = builtin_config("radon_h1").config;
  ExponentVector p{{R(2, 3), R(2, 3)}};
  ArithmeticScaffold s = derive_arithmetic(c, p);
  Paraball ball(long r, long rho) const {
    return make_paraball(ExactHPoint::identity(1), {R(r)}, R(rho), measurement_family(c, &s));
  }
};

VoxelSet random_subset(const VoxelSet& S, double keep, std::mt19937_64& rng) {
  std::bernoulli_distribution b(keep);
  std::vector<bool> k(S.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = b(rng);
  return subset(S, k);
}

}  // namespace

TEST_SUITE("regularity") {
  TEST_CASE("classification of a voxelized paraball") {
    Radon x;
    auto B = x.ball(1, 1);
    auto S = voxelize_paraball(B, 1.0 / 16);
    auto r = classify(S, x.c, x.p);
    CHECK(r.count == S.size());
    for (double a : r.alpha) CHECK(a > 0);
    for (double b : r.beta) CHECK(b > 0);
    CHECK(r.epsilon_quasi > 0.5);
    CHECK(r.epsilon_quasi <= 1.5);
    CHECK(r.epsilon_semi > 0.5);
  }

  TEST_CASE("two paraballs of different shape are less quasiextremal than one") {
    Radon x;
    double h = 1.0 / 8;
    auto one = voxelize_paraball(x.ball(1, 1), h);
    auto flat = make_paraball(ExactHPoint({R(40)}, {R(40)}, R(0)), {R(1, 4)}, R(1), measurement_family(x.c, &x.s));
    auto tall = make_paraball(ExactHPoint({R(-40)}, {R(-40)}, R(0)), {R(4)}, R(1), measurement_family(x.c, &x.s));
    auto two = set_union(voxelize_paraball(flat, h), voxelize_paraball(tall, h));
    double e1 = classify(one, x.c, x.p).epsilon_quasi;
    double e2 = classify(two, x.c, x.p).epsilon_quasi;
    MESSAGE("single " << e1 << ", pair " << e2);
    CHECK(e2 < e1);
  }

  TEST_CASE("random refinements keep quasiextremality up to a measured constant") {
    Radon x;
    auto S = voxelize_paraball(x.ball(1, 1), 1.0 / 16);
    auto base = classify(S, x.c, x.p);
    std::mt19937_64 rng(101);
    double worst = 1e9;
    for (double sigma : {0.5, 0.25, 0.125}) {
      auto T = random_subset(S, sigma, rng);
      double frac = static_cast<double>(T.size()) / S.size();
      auto r = classify(T, x.c, x.p);
      // A sigma-refinement of an eps-quasiextremal set is C eps sigma quasiextremal.
      double C = r.epsilon_quasi / (base.epsilon_quasi * frac);
      worst = std::min(worst, C);
      CHECK(C > 0.1);
    }
    MESSAGE("refinement constant " << worst);
  }

  TEST_CASE("semiregularity hypotheses") {
    Radon x;
    auto S = voxelize_paraball(x.ball(1, 1), 1.0 / 8);
    auto h = semiregular_to_regular_hypotheses(S, S, x.c, x.p, 0.5, 0.25, 1.0);
    CHECK(h.sigma_order);
    CHECK(h.is_subset);
    CHECK(h.semiregular_pi);
    CHECK(h.quasiextremal);
    auto bad = semiregular_to_regular_hypotheses(S, S, x.c, x.p, 0.5, 0.75, 1.0);
    CHECK_FALSE(bad.sigma_order);
  }

  TEST_CASE("flow scheme on a single cell") {
    Radon x;
    auto S = VoxelSet::from_cells(3, 0.25, {0, 0, 0});
    auto f = refine_flow_scheme(S, x.c, x.s, 3);
    CHECK(f.S1.size() == 1);
    CHECK(f.audit_pass);
  }

  TEST_CASE("flow scheme constants do not degrade across paraball sizes") {
    Radon x;
    std::vector<double> cs;
    for (long rho : {1, 4, 16}) {
      auto S = voxelize_paraball(x.ball(1, rho), static_cast<double>(rho) / 8);
      auto f = refine_flow_scheme(S, x.c, x.s, 3);
      CHECK(f.audit_pass);
      CHECK(f.levels.back().size() >= (1 - f.kappa) * S.size() - 1e-9);
      cs.push_back(f.c);
    }
    CHECK(*std::min_element(cs.begin(), cs.end()) * 4 >= *std::max_element(cs.begin(), cs.end()));
  }

  TEST_CASE("G recursion on boxes") {
    auto E1 = voxelize_box(0.25, {0, 0}, {1.5, 2});
    auto r1 = g_recursion(E1, std::vector<double>(E1.size(), 1.0), {2}, {3});
    CHECK(r1.top() == doctest::Approx(std::pow(3.0, 3)));

    auto r2 = g_recursion(E1, std::vector<double>(E1.size(), 1.0), {1, 2}, {2, 1});
    // G_1 = a^{Q~_1} on each line, G_2 = b^{Q~_2} a^{Q~_1}.
    CHECK(r2.Q_tilde == std::vector<std::int64_t>{3, 1});
    CHECK(r2.top() == doctest::Approx(std::pow(1.5, 3) * 2.0));

    auto lb = g_lower_bound(E1, {1, 2}, {2, 1}, 0.5);
    CHECK(lb.holds);
  }

  TEST_CASE("layer identity holds exactly") {
    std::mt19937_64 rng(55);
    auto E = voxelize_box(0.5, {0, 0, 0}, {2, 1.5, 1});
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> f(E.size());
    for (auto& v : f) v = u(rng);
    for (int j = 1; j <= 3; ++j) CHECK(layer_identity_gap(E, f, {1, 2, 3}, j) < 1e-12);
  }

  TEST_CASE("AM-GM inequality on product sets") {
    auto E = voxelize_box(0.25, {0, 0}, {1, 1});
    std::mt19937_64 rng(71);
    std::bernoulli_distribution coin(0.7);
    std::vector<std::vector<double>> f(3, std::vector<double>(E.size()));
    for (auto& fb : f)
      for (auto& v : fb) v = coin(rng) ? 1.0 : 0.0;
    auto a = am_gm_check(E, f, {2}, {3});
    CHECK(a.holds);
    CHECK(a.slack >= -1e-12);
  }

  TEST_CASE("sorted coordinates") {
    auto S = VoxelSet::from_cells(3, 1.0, {1, 2, 3});
    auto T = to_sorted_coordinates(S, {2, 0, 1});
    CHECK(T.cell(0)[0] == 3);
  }
}
