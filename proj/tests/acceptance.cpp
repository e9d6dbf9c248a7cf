// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "hfin/examples.hpp"
#include "hfin/exponents.hpp"
#include "hfin/finner.hpp"
#include "hfin/heisenberg.hpp"
#include "hfin/paraball.hpp"
#include "hfin/regularity.hpp"

using namespace hfin;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Rational R(long a, long b = 1) { return make_rational(a, b); }

ExponentVector E(std::vector<Rational> v) { return ExponentVector{std::move(v)}; }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o) {
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << title << ":" << o.detail.str() << std::endl;
}

void exponent_reproduction() {
  Outcome o;
  const std::vector<std::pair<std::string, ExponentVector>> cases = {
      {"ex2_2", E({R(3, 7), R(3, 7), R(3, 7)})},
      {"ex2_3", E({R(2, 7), R(2, 7), R(2, 7), R(4, 7)})},
      {"ex2_4", E({R(5, 31), R(5, 31), R(5, 31), R(10, 31), R(15, 31)})},
      {"ex2_5", E({R(6, 43), R(6, 43), R(6, 43), R(6, 43), R(12, 43), R(18, 43)})}};
  for (const auto& [name, want] : cases) {
    auto t0 = Clock::now();
    auto ex = builtin_config(name);
    auto poly = solve_polytope(ex.config);
    double dt = seconds_since(t0);
    o.require(poly.singleton() && poly.vertices[0] == want, name + " vertex");
    o.require(dt < 1.0, name + " runtime");
    o.detail << " " << name << " " << (poly.singleton() ? "singleton" : "not singleton") << " in " << dt << "s;";
  }
  auto e25 = builtin_config("ex2_5");
  o.require(!e25.note.empty(), "ex2_5 discrepancy note");
  o.detail << " p5 = 43/12, p6 = 43/18 with note logged";
  report(1, "exponent reproduction", o);
}

void weight_tables() {
  Outcome o;
  const std::vector<std::pair<std::string, std::vector<Rational>>> cases = {
      {"ex2_2", {R(3, 7), R(3, 7)}},
      {"ex2_3", {R(4, 7), R(4, 7), R(4, 7)}},
      {"ex2_4", {R(15, 31), R(10, 31), R(10, 31), R(10, 31)}},
      {"ex2_5", {R(18, 43), R(12, 43), R(12, 43), R(12, 43), R(12, 43)}}};
  for (const auto& [name, want] : cases) {
    auto t = table_report(name);
    o.require(t.weight_row == want, name + " weight row");
    o.detail << " " << name << " (";
    for (std::size_t i = 0; i < t.weight_row.size(); ++i) o.detail << (i ? "," : "") << to_string(t.weight_row[i]);
    o.detail << ")";
  }
  report(2, "weight tables", o);
}

void scaffold_identities() {
  Outcome o;
  for (const char* name : {"ex2_2", "ex2_3", "ex2_4", "ex2_5"}) {
    auto ex = builtin_config(name);
    const auto& c = ex.config;
    auto s = derive_arithmetic(c, *ex.expected);
    std::int64_t lhs = 0, a2 = 0;
    for (int j = 0; j < c.m; ++j) lhs += c.k_j(j) * s.qj[j];
    o.require(s.N * (c.n + 1) == lhs, std::string(name) + " N(n+1)");
    for (auto Q : s.Q) o.require(s.N < Q && Q < 2 * s.N, std::string(name) + " N < Q_i < 2N");
    for (int j = 0; j < s.m_tilde; ++j) a2 += s.k_tilde[j] * s.q_dbl_tilde[j];
    o.require(a2 == s.N, std::string(name) + " sum k~ q~~ = N");
    o.detail << " " << name << " N=" << s.N << ";";
  }
  auto s4 = derive_arithmetic(builtin_config("ex2_4").config, *builtin_config("ex2_4").expected);
  o.require(s4.q_tilde == std::vector<std::int64_t>{5, 10}, "ex2_4 q~ = (5,10)");
  o.detail << " ex2_4 q~=(" << s4.q_tilde[0] << "," << s4.q_tilde[1] << ")";
  report(3, "scaffold identities", o);
}

void counting_finner() {
  Outcome o;
  auto t0 = Clock::now();
  auto ex = builtin_config("loomis_whitney_flat(3)");
  double best = 0;
  int at_full = 0, subsets = 0;
  bool all_le = true;
  for (int mask = 0; mask < 256; ++mask) {
    std::vector<std::int32_t> flat;
    for (int c = 0; c < 8; ++c)
      if ((mask >> c) & 1) flat.insert(flat.end(), {c & 1, (c >> 1) & 1, (c >> 2) & 1});
    ++subsets;
    if (flat.empty()) continue;
    auto f = finner_check(VoxelSet::from_cells(3, 1.0, flat), ex.flat_images, *ex.flat_p);
    all_le &= f.cmp_one <= 0;
    if (f.ratio > best) best = f.ratio;
    if (mask == 255) at_full = f.cmp_one == 0;
  }
  double dt = seconds_since(t0);
  o.require(subsets == 256, "256 subsets");
  o.require(all_le, "ratio <= 1");
  o.require(std::abs(best - 1.0) < 1e-12 && at_full, "max 1 at the full cube");
  o.require(dt < 1.0, "runtime");
  o.detail << " " << subsets << " subsets, max ratio " << best << " attained by the full cube, " << dt << "s";
  report(4, "counting Finner (exhaustive)", o);
}

void inflation_jacobian() {
  Outcome o;
  auto ex = builtin_config("ex2_3");
  auto s = derive_arithmetic(ex.config, *ex.expected);
  auto t0 = Clock::now();
  auto sw = jacobian_sweep(s, 100, 20240601);
  double dt = seconds_since(t0);
  o.require(sw.passes >= 99, ">= 99 passes");
  o.require(sw.passes + sw.flagged_near_singular == sw.trials, "remaining cases flagged near-singular");
  o.require(dt < 10.0, "runtime");
  o.detail << " " << sw.passes << "/100 within 1e-6 (max rel err " << sw.max_rel_err_regular << "), "
           << sw.flagged_near_singular << " flagged near-singular, " << dt << "s";
  report(5, "inflation Jacobian", o);
}

void paraball_scaling() {
  Outcome o;
  std::mt19937_64 rng(314159);
  auto pick = [&] {
    static const long nums[] = {1, 2, 3, 5, 7, 9};
    static const long dens[] = {1, 2, 3, 4, 5};
    return make_rational(nums[rng() % 6], dens[rng() % 5]);
  };
  int rows = 0;
  for (const char* name : {"ex2_2", "ex2_3", "ex2_4", "ex2_5"}) {
    auto ex = builtin_config(name);
    auto s = derive_arithmetic(ex.config, *ex.expected);
    auto fam = measurement_family(ex.config, &s);
    int n = ex.config.n;
    std::vector<Rational> r;
    for (int i = 0; i < n; ++i) r.push_back(pick());
    auto B = make_paraball(ExactHPoint::identity(n), r, pick(), fam);
    bool exact = true, invariant = true;
    for (int trial = 0; trial < 20; ++trial) {
      Rational a = pick();
      std::vector<Rational> lam, lam_star;
      for (int i = 0; i < n; ++i) {
        lam.push_back(pick());
        lam_star.push_back(a / lam.back());
      }
      auto rep = verify_scaling(B, lam, lam_star, a, ex.config, *ex.expected, s);
      exact &= rep.all_exact;
      invariant &= rep.quasi_invariant && rep.quasi_form.is_constant();
      rows += static_cast<int>(rep.rows.size());
    }
    o.require(exact, std::string(name) + " ratio laws");
    o.require(invariant, std::string(name) + " quasiextremal invariance");
  }
  o.detail << " 4 configs x 20 triples, " << rows << " exact ratio rows, quasiextremal ratio invariant";
  report(6, "paraball scaling", o);
}

void paraball_regularity() {
  Outcome o;
  auto ex = builtin_config("radon_h1");
  auto s = derive_arithmetic(ex.config, *ex.expected);
  auto fam = measurement_family(ex.config, &s);
  const std::vector<std::pair<long, long>> sweep = {{1, 1}, {8, 2}, {64, 8}};  // (rho, r)
  std::vector<double> quasi, semi;
  for (auto [rho, r] : sweep) {
    auto B = make_paraball(ExactHPoint::identity(1), {R(r)}, R(rho), fam);
    double h = static_cast<double>(rho) / 32;
    auto rep = classify(voxelize_paraball(B, h), ex.config, *ex.expected);
    quasi.push_back(rep.epsilon_quasi);
    semi.push_back(std::min(rep.epsilon_semi, rep.epsilon_semi_star));
    o.detail << " rho=" << rho << " r=" << r << ": eps_quasi " << rep.epsilon_quasi << ", eps_semi " << semi.back()
             << ";";
  }
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  o.require(spread(quasi) < 2.0, "eps_quasi within 2x");
  o.require(spread(semi) < 2.0, "eps_semi within 2x");
  o.detail << " spreads " << spread(quasi) << ", " << spread(semi);
  report(7, "paraball regularity", o);
}

void counterexamples() {
  Outcome o;
  auto show = [&](const SweepAssertion& s) {
    o.detail << " " << s.name << " {";
    for (std::size_t k = 0; k < s.records.size(); ++k)
      o.detail << (k ? ", " : "") << "N=" << s.records[k].N << ": " << to_double(s.records[k].statistic);
    o.detail << "}";
    if (!s.step_factors.empty()) {
      o.detail << " factors";
      for (double f : s.step_factors) o.detail << " " << f;
    }
    o.detail << ";";
  };
  auto a1 = counterexample_sweep("A1", {16, 32, 64});
  show(a1);
  o.require(a1.direction_holds && a1.rate_holds, "A1 decrease >= 1.5x per doubling");

  auto a2 = counterexample_sweep("A2", {16, 32, 64});
  show(a2);
  o.require(a2.holds(), "A2 equals N+1 exactly");

  auto a3 = counterexample_sweep("A3", default_sweep("A3"));
  show(a3);
  o.require(a3.direction_holds && a3.rate_holds,
            "A3 increase >= 1.5x per doubling; literal |omega| = N(N+1)/2 and |l_2| = N keep the statistic at 1");

  auto a4 = counterexample_sweep("A4", default_sweep("A4"));
  show(a4);
  o.require(a4.direction_holds && a4.rate_holds, "A4 increase >= 1.5x per doubling");
  report(8, "counterexample asymptotics", o);
}

void pushforward_convergence() {
  Outcome o;
  // pi(x, y, t) = (y, t + xy/2) maps the unit box onto a region of area 1 + n/4.
  const double oracle = 1.25;
  auto measure = [](double h) {
    auto box = voxelize_box(h, {0, 0, 0}, {1, 1, 1});
    return pushforward_vertical(box, pi_map(1), h).measure();
  };
  double a = measure(1.0 / 64), b = measure(1.0 / 128);
  double diff = std::abs(a - b) / b;
  o.require(diff < 0.02, "h vs h/2 within 2%");
  o.require(std::abs(a - oracle) / oracle < 0.05 && std::abs(b - oracle) / oracle < 0.05, "within 5% of oracle");
  o.detail << " h=1/64: " << a << ", h=1/128: " << b << ", oracle " << oracle << ", rel diff " << diff;
  report(9, "pushforward convergence", o);
}

void out_of_scope_constants() {
  Outcome o;
  // No quantitative target exists; the substitute property checks must run and be recorded.
  auto ex = builtin_config("radon_h1");
  auto env = rwt_envelope(ex.config, *ex.expected, 1.0 / 16, 1);
  o.require(env.holds, "restricted weak-type ratio below the logged envelope");
  auto e22 = builtin_config("ex2_2");
  auto env22 = rwt_envelope(e22.config, *e22.expected, 1.0 / 4, 1);
  o.require(env22.holds, "ex2_2 envelope");
  o.detail << " not a quantitative target; envelope " << env.envelope << " with max ratio " << env.max_ratio
           << " (radon_h1, h=1/16) and " << env22.max_ratio << " (ex2_2, h=1/4)";
  report(10, "proof constants out of scope", o);
}

}  // namespace

int main() {
  exponent_reproduction();
  weight_tables();
  scaffold_identities();
  counting_finner();
  inflation_jacobian();
  paraball_scaling();
  paraball_regularity();
  counterexamples();
  pushforward_convergence();
  out_of_scope_constants();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
