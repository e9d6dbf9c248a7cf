#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hfin/errors.hpp"
#include "hfin/examples.hpp"
#include "hfin/paraball.hpp"

using namespace hfin;

namespace {

Rational R(long a, long b = 1) { return make_rational(a, b); }

struct Setup {
  ProjectionConfig c;
  ExponentVector p;
  ArithmeticScaffold s;
  std::vector<CoordSubspace> family;
  explicit Setup(const std::string& name) {
    auto e = builtin_config(name);
    c = e.config;
    p = solve_polytope(c).vertices.at(0);
    s = derive_arithmetic(c, p);
    family = measurement_family(c, &s);
  }
};

Rational random_positive(std::mt19937_64& rng) {
  static const long nums[] = {1, 2, 3, 5, 7};
  static const long dens[] = {1, 2, 3, 4};
  return make_rational(nums[rng() % 5], dens[rng() % 4]);
}

// Volume of the unit ball in R^d, written independently of the library.
double ball_volume(int d) { return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1); }

}  // namespace

TEST_SUITE("paraball") {
  TEST_CASE("construction and duality") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint::identity(1), {R(1)}, R(1), x.family);
    CHECK(B.r_star == std::vector<Rational>{R(1)});
    auto C = make_paraball(ExactHPoint::identity(1), {R(3)}, R(1), x.family);
    CHECK(C.r_star == std::vector<Rational>{R(1, 3)});
    for (std::size_t i = 0; i < C.r.size(); ++i) CHECK(C.r[i] * C.r_star[i] == C.rho);
    CHECK_THROWS_AS(make_paraball(ExactHPoint::identity(1), {R(0)}, R(1), x.family), PreconditionError);
    CHECK_THROWS_AS(make_paraball(ExactHPoint::identity(1), {R(1)}, R(-1), x.family), PreconditionError);
  }

  TEST_CASE("frames must respect the partition") {
    Setup x("ex2_4");
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(4, 4);
    double c = std::cos(0.3), s = std::sin(0.3);
    // Rotation inside the block <e2,e3,e4> is fine; mixing e1 with e2 is not.
    auto blocks = maximal_partition({CoordSubspace::from_indices(4, {1}), CoordSubspace::from_indices(4, {2, 3, 4})});
    rot(2, 2) = c, rot(2, 3) = -s, rot(3, 2) = s, rot(3, 3) = c;
    std::vector<CoordSubspace> l45{CoordSubspace::from_indices(4, {1}), CoordSubspace::from_indices(4, {2, 3, 4})};
    CHECK_NOTHROW(make_paraball(ExactHPoint::identity(4), rot, std::vector<Rational>(4, R(1)), R(1), l45));
    Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(4, 4);
    mix(0, 0) = c, mix(0, 1) = -s, mix(1, 0) = s, mix(1, 1) = c;
    CHECK_THROWS_AS(make_paraball(ExactHPoint::identity(4), mix, std::vector<Rational>(4, R(1)), R(1), l45),
                    PreconditionError);
    CHECK(blocks.blocks.size() == 2);
  }

  TEST_CASE("measure of the paraball itself") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint::identity(1), {R(2)}, R(4), x.family);
    auto t = paraball_measures(B, x.c, x.s);
    // |B| = |C| |C_*| 2 rho with C, C_* intervals of radii r and rho / r.
    CHECK(t.ball.value() == doctest::Approx(2 * 2 * (2 * 4 / 2.0) * 2 * 4));
    CHECK(t.ball.value() == doctest::Approx(2 * ball_volume(1) * ball_volume(1) * 16));
  }

  TEST_CASE("analytic projection measures against the voxel image") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint({R(1, 3)}, {R(-1, 2)}, R(1, 5)), {R(2)}, R(4), x.family);
    auto t = paraball_measures(B, x.c, x.s);
    double h = 4.0 / 64;
    auto S = voxelize_paraball(B, h);
    CHECK(std::abs(S.measure() - t.ball.value()) / t.ball.value() < 0.05);
    for (int j = 0; j < x.c.M(); ++j) {
      double vox = pushforward_vertical(S, pi_j_map(x.c, j), h).measure();
      CAPTURE(j);
      CHECK(std::abs(vox - t.pi[j].value()) / t.pi[j].value() < 0.10);
    }
  }

  TEST_CASE("image measures in higher dimension against the voxel image") {
    Setup x("ex2_2");
    auto B = make_paraball(ExactHPoint::identity(2), {R(1), R(2)}, R(2), x.family);
    auto t = paraball_measures(B, x.c, x.s);
    double h = 2.0 / 8;
    auto S = voxelize_paraball(B, h);
    CHECK(std::abs(S.measure() - t.ball.value()) / t.ball.value() < 0.10);
    auto ov = overlap_estimate(B, B, x.c, x.s, 24);
    for (int j = 0; j < x.c.M(); ++j) {
      CAPTURE(j);
      CHECK(std::abs(ov.rows[j].measure_a - t.pi[j].value()) / t.pi[j].value() < 0.10);
    }
  }

  TEST_CASE("top tilde image keeps only the dual ellipsoid") {
    Setup x("ex2_4");
    auto B = make_paraball(ExactHPoint::identity(4), {R(1), R(2), R(3), R(4)}, R(6), x.family);
    auto t = paraball_measures(B, x.c, x.s);
    Rational rstar(1);
    for (const auto& v : B.r_star) rstar *= v;
    CHECK(t.pi_tilde.back().structural == rstar * B.rho);
  }

  TEST_CASE("scaling laws are exact for seeded triples") {
    for (const char* name : {"ex2_2", "ex2_3", "ex2_4", "ex2_5", "radon_h1"}) {
      Setup x(name);
      std::mt19937_64 rng(2718);
      int n = x.c.n;
      std::vector<Rational> r;
      for (int i = 0; i < n; ++i) r.push_back(random_positive(rng));
      auto B = make_paraball(ExactHPoint::identity(n), r, random_positive(rng), x.family);
      for (int trial = 0; trial < 20; ++trial) {
        Rational a = random_positive(rng);
        std::vector<Rational> lam, lam_star;
        for (int i = 0; i < n; ++i) {
          lam.push_back(random_positive(rng));
          lam_star.push_back(a / lam.back());
        }
        auto rep = verify_scaling(B, lam, lam_star, a, x.c, x.p, x.s);
        CAPTURE(name);
        CHECK(rep.all_exact);
        CHECK(rep.quasi_invariant);
        CHECK(rep.quasi_form.is_constant());
        CHECK(rep.quasi_before == doctest::Approx(rep.quasi_after));
        auto Bt = scale_paraball(B, lam, lam_star, a);
        // |B~| = a^{n+1} |B|.
        auto t0 = paraball_measures(B, x.c, x.s), t1 = paraball_measures(Bt, x.c, x.s);
        CHECK(t1.ball.structural == pow(a, n + 1) * t0.ball.structural);
      }
      CHECK_THROWS_AS(scale_paraball(B, std::vector<Rational>(n, R(2)), std::vector<Rational>(n, R(2)), R(3)),
                      PreconditionError);
    }
  }

  TEST_CASE("identity scaling") {
    Setup x("ex2_3");
    auto B = make_paraball(ExactHPoint::identity(3), {R(1), R(2), R(3)}, R(2), x.family);
    auto Bt = scale_paraball(B, {R(1), R(1), R(1)}, {R(1), R(1), R(1)}, R(1));
    CHECK(Bt.r == B.r);
    CHECK(Bt.rho == B.rho);
    CHECK(Bt.z == B.z);
  }

  TEST_CASE("left translation") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint::identity(1), {R(1)}, R(1), x.family);
    CHECK(left_translate(ExactHPoint::identity(1), B).z == B.z);
    ExactHPoint g1({R(1, 2)}, {R(-3, 4)}, R(1, 8)), g2({R(-1, 4)}, {R(1)}, R(0));
    CHECK(left_translate(g1, left_translate(g2, B)).z == left_translate(group_mul(g1, g2), B).z);

    double h = 1.0 / 16;
    auto S = voxelize_paraball(B, h);
    auto T = voxelize_paraball(left_translate(g1, B), h);
    CHECK(std::abs(S.measure() - T.measure()) / S.measure() < 0.03);
    for (int j = 0; j < x.c.M(); ++j) {
      double a = pushforward_vertical(S, pi_j_map(x.c, j), h).measure();
      double b = pushforward_vertical(T, pi_j_map(x.c, j), h).measure();
      CHECK(std::abs(a - b) / a < 0.05);
    }
    // Containment is transported by the group law.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    HPoint gd({0.5}, {-0.75}, 0.125);
    for (int k = 0; k < 500; ++k) {
      HPoint w({u(rng)}, {u(rng)}, u(rng));
      CHECK(paraball_contains(B, w) == paraball_contains(left_translate(g1, B), group_mul(gd, w)));
    }
  }

  TEST_CASE("overlap estimates") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint::identity(1), {R(1)}, R(1), x.family);
    auto same = overlap_estimate(B, B, x.c, x.s, 32);
    for (const auto& row : same.rows) CHECK(row.normalized == doctest::Approx(1.0).epsilon(1e-6));

    auto far = make_paraball(ExactHPoint({R(100)}, {R(100)}, R(0)), {R(1)}, R(1), x.family);
    for (const auto& row : overlap_estimate(B, far, x.c, x.s, 16).rows) CHECK(row.intersection == 0.0);

    double prev = 2.0;
    for (int k = 0; k <= 10; k += 2) {
      auto Bk = make_paraball(ExactHPoint::identity(1), {Rational(mpz_class(1) << k)}, R(1), x.family);
      auto rep = overlap_estimate(B, Bk, x.c, x.s, 16);
      double worst = 0;
      for (const auto& row : rep.rows) worst = std::max(worst, row.normalized);
      CHECK(worst <= prev * 1.05);
      prev = worst;
      if (k == 10) CHECK(worst < 0.1);
    }
  }

  TEST_CASE("covering scalings and cover audit") {
    Setup x("radon_h1");
    auto B = make_paraball(ExactHPoint::identity(1), {R(1)}, R(1), x.family);
    auto cov = covering(B, R(1, 2), x.c, x.s);
    CHECK(cov.measures_exact);
    for (std::size_t j = 0; j < x.c.V.size(); ++j) CHECK(cov.A[j] == x.c.V[j].dim() + 3);
    for (const auto& row : cov.measure_rows) CHECK(row.ratio == row.predicted);
    CHECK(cov.measure_rows[0].ratio == pow(R(1, 2), 4));
    CHECK(cov.measure_rows[1].ratio == pow(R(1, 2), x.c.V[0].dim() + 3));
    auto audit = coverage_audit(B, cov, 1.0 / 32);
    CHECK(audit.uncovered == 0);
    MESSAGE("covering size " << cov.size() << ", exponent " << cov.count_exponent);

    auto one = covering(B, R(1), x.c, x.s);
    CHECK(one.size() < cov.size());
    CHECK(coverage_audit(B, one, 1.0 / 8).uncovered == 0);
  }

  TEST_CASE("JSON round trip") {
    Setup x("ex2_3");
    auto B = make_paraball(ExactHPoint({R(1), R(0), R(-1, 2)}, {R(0), R(1, 3), R(0)}, R(2)), {R(1), R(2), R(3)},
                           R(5), x.family);
    auto C = paraball_from_json(to_json(B), x.family);
    CHECK(C.z == B.z);
    CHECK(C.r == B.r);
    CHECK(C.rho == B.rho);
  }

  TEST_CASE("shape constants") {
    CHECK(projection_shape_constant(1, 1) == doctest::Approx(8.0));
    // A point image keeps only t: 2 w_0 w_1 + (w_1 / 2) * int_{-1}^{1} |v| dv = 5.
    CHECK(projection_shape_constant(1, 0) == doctest::Approx(5.0));
    CHECK(ball_partial_norm_integral(1, 1) == doctest::Approx(1.0));
    CHECK(ball_partial_norm_integral(3, 0) == doctest::Approx(0.0));
    CHECK(ball_partial_norm_integral(2, 2) == doctest::Approx(2 * std::numbers::pi / 3));
  }
}
