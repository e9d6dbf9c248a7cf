#include <doctest.h>

#include <bit>
#include <random>

#include "hfin/errors.hpp"
#include "hfin/examples.hpp"
#include "hfin/exponents.hpp"

using namespace hfin;

namespace {

Rational R(long a, long b = 1) { return make_rational(a, b); }

ExponentVector E(std::vector<Rational> v) { return ExponentVector{std::move(v)}; }

// The three conditions written out directly from their defining sums.
struct Oracle {
  bool A, B, C, B_strict;
};

Oracle oracle(const ProjectionConfig& c, const ExponentVector& p) {
  Oracle o{true, true, true, true};
  int n = c.n;
  Rational a(0);
  for (int j = 0; j < c.M(); ++j) a += (j < c.m ? Rational(std::popcount(c.V[j].mask) + 1) : Rational(n + 1)) * p.inv_p[j];
  o.A = a == n + 1;
  for (Mask v = 0; v < (Mask{1} << n); ++v) {
    int dv = std::popcount(v);
    Rational rhs(0), cx(0), cy(0);
    for (int j = 0; j < c.M(); ++j) {
      Mask K = ((Mask{1} << n) - 1) & ~c.V[j].mask;
      if (j < c.m) {
        rhs += Rational(std::popcount(c.V[j].mask & v) + 1) * p.inv_p[j];
        cx += Rational(std::popcount(K & v)) * p.inv_p[j];
      } else {
        rhs += Rational(dv + 1) * p.inv_p[j];
        cy += Rational(std::popcount(K & v)) * p.inv_p[j];
      }
    }
    if (dv + 1 > rhs) o.B = false;
    if (v != (Mask{1} << n) - 1 && dv + 1 >= rhs) o.B_strict = false;
    if (cx != cy) o.C = false;
  }
  return o;
}

ProjectionConfig random_config(std::mt19937_64& rng) {
  int n = 1 + static_cast<int>(rng() % 3);
  int M = 2 + static_cast<int>(rng() % 3);
  int m = 1 + static_cast<int>(rng() % (M - 1));
  ProjectionConfig c{n, m, {}};
  Mask full = (Mask{1} << n) - 1;
  for (int j = 0; j < M; ++j) c.V.push_back({n, static_cast<Mask>(rng()) & full});
  return c;
}

}  // namespace

TEST_SUITE("exponents") {
  TEST_CASE("published exponents satisfy the conditions") {
    auto c22 = builtin_config("ex2_2").config;
    auto r = check_conditions(c22, E({R(3, 7), R(3, 7), R(3, 7)}));
    CHECK(r.A);
    CHECK(r.B);
    CHECK(r.C);
    CHECK(r.B_strict);
    CHECK(r.proper_critical().empty());

    auto c24 = builtin_config("ex2_4").config;
    auto r4 = check_conditions(c24, E({R(5, 31), R(5, 31), R(5, 31), R(10, 31), R(15, 31)}));
    CHECK(r4.A);
    CHECK(r4.B);
    CHECK(r4.C);
    CHECK(r4.proper_critical().empty());
  }

  TEST_CASE("every subspace is critical for a Hoelder configuration") {
    auto c = builtin_config("holder(2,3)").config;
    auto r = check_conditions(c, E({R(1, 3), R(1, 6), R(1, 2)}));
    CHECK(r.A);
    CHECK(r.C);
    CHECK(r.critical.size() == 4);
    CHECK(r.zero_critical());
  }

  TEST_CASE("condition evaluation agrees with the direct sums") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
      auto c = random_config(rng);
      std::vector<Rational> v;
      for (int j = 0; j < c.M(); ++j) v.push_back(Rational(static_cast<long>(rng() % 7), 6));
      auto p = E(v);
      auto r = check_conditions(c, p);
      auto o = oracle(c, p);
      CHECK(r.A == o.A);
      CHECK(r.B == o.B);
      CHECK(r.C == o.C);
      CHECK(r.B_strict == o.B_strict);
      for (const auto& row : r.B_rows) CHECK(is_critical(c, p, row.V) == (row.lhs == row.rhs));
    }
  }

  TEST_CASE("polytope of the published examples") {
    auto s = [](const char* name) { return solve_polytope(builtin_config(name).config); };
    auto p22 = s("ex2_2");
    REQUIRE(p22.singleton());
    CHECK(p22.vertices[0] == E({R(3, 7), R(3, 7), R(3, 7)}));
    auto p23 = s("ex2_3");
    REQUIRE(p23.singleton());
    CHECK(p23.vertices[0] == E({R(2, 7), R(2, 7), R(2, 7), R(4, 7)}));
    auto p24 = s("ex2_4");
    REQUIRE(p24.singleton());
    CHECK(p24.vertices[0] == E({R(5, 31), R(5, 31), R(5, 31), R(10, 31), R(15, 31)}));
    CHECK(p24.singleton_B_strict);
    auto p25 = s("ex2_5");
    REQUIRE(p25.singleton());
    CHECK(p25.vertices[0] == E({R(6, 43), R(6, 43), R(6, 43), R(6, 43), R(12, 43), R(18, 43)}));
    CHECK(p25.vertices[0].p(4) == R(43, 12));
    CHECK(p25.vertices[0].p(5) == R(43, 18));
  }

  TEST_CASE("Hoelder simplex in one dimension") {
    auto c = make_config(1, 1, {{1}, {1}});
    auto poly = solve_polytope(c);
    REQUIRE(poly.vertices.size() == 2);
    CHECK(poly.vertices[0] == E({R(0), R(1)}));
    CHECK(poly.vertices[1] == E({R(1), R(0)}));
  }

  TEST_CASE("vertices satisfy the system and are extreme") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 80; ++trial) {
      auto c = random_config(rng);
      auto poly = solve_polytope(c);
      for (std::size_t k = 0; k < poly.vertices.size(); ++k) {
        const auto& v = poly.vertices[k];
        auto o = oracle(c, v);
        CHECK(o.A);
        CHECK(o.B);
        CHECK(o.C);
        for (const auto& x : v.inv_p) CHECK((x >= 0 && x <= 1));
        for (std::size_t l = k + 1; l < poly.vertices.size(); ++l) CHECK_FALSE(poly.vertices[l] == v);
      }
    }
  }

  TEST_CASE("scaffold of the four-dimensional example") {
    auto c = builtin_config("ex2_4").config;
    auto s = derive_arithmetic(c, E({R(5, 31), R(5, 31), R(5, 31), R(10, 31), R(15, 31)}));
    CHECK(s.q == 31);
    CHECK(s.qj == std::vector<std::int64_t>{5, 5, 5, 10, 15});
    CHECK(s.N == 9);
    CHECK(s.Q == std::vector<std::int64_t>{15, 10, 10, 10});
    CHECK(s.m_tilde == 2);
    CHECK(s.k_tilde == std::vector<int>{1, 4});
    CHECK(s.q_tilde == std::vector<std::int64_t>{5, 10});
    CHECK(s.q_dbl_tilde == std::vector<std::int64_t>{5, 1});
  }

  TEST_CASE("scaffold of the three-dimensional example") {
    auto c = builtin_config("ex2_3").config;
    auto s = derive_arithmetic(c, E({R(2, 7), R(2, 7), R(2, 7), R(4, 7)}));
    CHECK(s.q == 7);
    CHECK(s.N == 3);
    CHECK(s.Q == std::vector<std::int64_t>{4, 4, 4});
    CHECK(s.m_tilde == 1);
    CHECK(s.k_tilde == std::vector<int>{3});
    CHECK(s.q_tilde == std::vector<std::int64_t>{4});
    CHECK(s.q_dbl_tilde == std::vector<std::int64_t>{1});
    for (const auto& w : s.weights) CHECK(w == R(4, 7));
  }

  TEST_CASE("Hoelder exponents give a degenerate scaffold") {
    auto c = builtin_config("holder(2,2)").config;
    auto s = derive_arithmetic(c, E({R(1, 2), R(1, 2)}));
    CHECK(s.N == 0);
    CHECK(s.degenerate);
  }

  TEST_CASE("scaffold identities on every published example") {
    for (const char* name : {"ex2_2", "ex2_3", "ex2_4", "ex2_5"}) {
      CAPTURE(name);
      auto ex = builtin_config(name);
      auto p = solve_polytope(ex.config).vertices.at(0);
      auto s = derive_arithmetic(ex.config, p);
      const auto& c = ex.config;
      std::int64_t sum_q = 0, x_side = 0, y_side = 0;
      for (int j = 0; j < c.M(); ++j) {
        sum_q += s.qj[j];
        (j < c.m ? x_side : y_side) += c.k_j(j) * s.qj[j];
      }
      CHECK(s.N == sum_q - s.q);
      CHECK(x_side == s.N * (c.n + 1));
      CHECK(y_side == s.N * (c.n + 1));
      for (auto Qi : s.Q) {
        CHECK(Qi > s.N);
        CHECK(Qi < 2 * s.N);
      }
      std::int64_t a2 = 0;
      for (int j = 0; j < s.m_tilde; ++j) {
        CHECK(s.q_tilde[j] > 0);
        CHECK(s.q_dbl_tilde[j] >= 1);
        a2 += s.k_tilde[j] * s.q_dbl_tilde[j];
      }
      CHECK(a2 == s.N);
      for (int j = 0; j + 1 < s.m_tilde; ++j) CHECK(s.k_tilde[j] < s.k_tilde[j + 1]);
      CHECK(s.k_tilde.back() == c.n);

      // Weights: direct kernel sums against Q_i / q.
      auto w = weights(c, p);
      for (int i = 0; i < c.n; ++i) {
        Rational wx(0), wy(0);
        for (int j = 0; j < c.M(); ++j)
          if (!c.V[j].contains(i)) (j < c.m ? wx : wy) += p.inv_p[j];
        CHECK(w.wX[i] == wx);
        CHECK(w.wY[i] == wy);
        CHECK(wx == Rational(s.Q[i], s.q));
      }

      // The intermediate exponents satisfy the hypotheses for the auxiliary family.
      auto ic = check_conditions(s.intermediate_config, s.intermediate);
      CHECK(ic.A);
      CHECK(ic.B);
      CHECK(ic.C);
    }
  }

  TEST_CASE("scaffold preconditions") {
    auto c = builtin_config("ex2_2").config;
    CHECK_THROWS_AS(derive_arithmetic(c, E({R(1, 2), R(1, 2), R(1, 2)})), PreconditionError);
    CHECK_THROWS_AS(derive_arithmetic(c, E({R(3, 7), R(0), R(3, 7)})), PreconditionError);
  }

  TEST_CASE("weights of the Hoelder configuration vanish") {
    auto c = builtin_config("holder(3,2)").config;
    auto w = weights(c, E({R(1, 2), R(1, 2)}));
    for (const auto& x : w.wX) CHECK(x == 0);
    for (const auto& y : w.wY) CHECK(y == 0);
  }

  TEST_CASE("base case classification") {
    CHECK(classify_base_case(builtin_config("ex2_5").config).kind == BaseCase::SingletonBaseCase);
    CHECK(classify_base_case(builtin_config("ex2_4").config).kind == BaseCase::SingletonBaseCase);
    auto h = classify_base_case(make_config(1, 1, {{1}, {1}}));
    CHECK(h.kind == BaseCase::HolderReducible);
    CHECK(h.holder_dichotomy);

    auto c22 = builtin_config("ex2_2").config;
    CHECK_FALSE(is_critical(c22, E({R(3, 7), R(3, 7), R(3, 7)}), CoordSubspace::from_indices(2, {1})));
  }

  TEST_CASE("exponent parsing") {
    auto p = inv_p_from_strings({"3/7", "0", "1"});
    CHECK(p.inv_p[0] == R(3, 7));
    CHECK_FALSE(p.finite(1));
    CHECK_THROWS_AS(inv_p_from_strings({"3/2"}), InputError);
    CHECK_THROWS_AS(inv_p_from_strings({"abc"}), InputError);
  }
}
