#include "hfin/examples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>

#include <random>

#include "hfin/errors.hpp"
#include "hfin/paraball.hpp"
#include "hfin/regularity.hpp"

namespace hfin {

namespace {

ExponentVector inv(std::initializer_list<Rational> v) { return ExponentVector{std::vector<Rational>(v)}; }

std::vector<Rational> repeat(const Rational& r, int k) { return std::vector<Rational>(k, r); }

NamedExample holder(int n, int M) {
  if (n < 1 || n > 8 || M < 2 || M > 12) throw InputError("holder(n,M) needs 1 <= n <= 8 and 2 <= M <= 12");
  NamedExample e;
  e.name = "holder(" + std::to_string(n) + "," + std::to_string(M) + ")";
  std::vector<std::vector<int>> V;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 1);
  for (int j = 0; j < M; ++j) V.push_back(all);
  e.config = make_config(n, M - 1, V);
  e.source = "every projection is a diffeomorphism";
  return e;
}

NamedExample loomis_whitney(int d) {
  if (d < 2 || d > kMaxDimension) throw InputError("loomis_whitney_flat(d) needs 2 <= d <= 24");
  NamedExample e;
  e.name = "loomis_whitney_flat(" + std::to_string(d) + ")";
  for (int j = 0; j < d; ++j) e.flat_images.push_back({d, CoordSubspace::full(d).mask & ~(Mask{1} << j)});
  e.flat_p = ExponentVector{repeat(Rational(1, d - 1), d)};
  e.source = "coordinate hyperplane projections";
  return e;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"ex2_2", "ex2_3", "ex2_4", "ex2_5", "radon_h1", "holder(n,M)", "loomis_whitney_flat(n)"};
}

NamedExample builtin_config(const std::string& raw) {
  std::string name = raw;
  std::replace(name.begin(), name.end(), '-', '_');
  std::smatch m;
  if (std::regex_match(name, m, std::regex(R"(holder\((\d+),\s*(\d+)\))"))) return holder(std::stoi(m[1]), std::stoi(m[2]));
  if (std::regex_match(name, m, std::regex(R"(loomis_whitney(_flat)?\((\d+)\))"))) return loomis_whitney(std::stoi(m[2]));
  if (name == "loomis_whitney" || name == "loomis_whitney_flat") return loomis_whitney(3);

  NamedExample e;
  e.name = name;
  e.source = "published example";
  if (name == "ex2_2") {
    e.config = make_config(2, 2, {{2}, {1}, {}});
    e.expected = inv({Rational(3, 7), Rational(3, 7), Rational(3, 7)});
    e.expected_weights = repeat(Rational(3, 7), 2);
  } else if (name == "ex2_3") {
    e.config = make_config(3, 3, {{1}, {2}, {3}, {}});
    e.expected = inv({Rational(2, 7), Rational(2, 7), Rational(2, 7), Rational(4, 7)});
    e.expected_weights = repeat(Rational(4, 7), 3);
  } else if (name == "ex2_4") {
    e.config = make_config(4, 3, {{2}, {3}, {4}, {1}, {2, 3, 4}});
    e.expected = inv({Rational(5, 31), Rational(5, 31), Rational(5, 31), Rational(10, 31), Rational(15, 31)});
    e.expected_weights = {Rational(15, 31), Rational(10, 31), Rational(10, 31), Rational(10, 31)};
  } else if (name == "ex2_5") {
    e.config = make_config(5, 4, {{3}, {2, 4}, {3, 4, 5}, {1, 2, 5}, {1}, {2, 3, 4, 5}});
    // Assignment forced by (C) at <e1>; the published list swaps the last two exponents.
    e.expected = inv({Rational(6, 43), Rational(6, 43), Rational(6, 43), Rational(6, 43), Rational(12, 43),
                      Rational(18, 43)});
    e.expected_weights = {Rational(18, 43), Rational(12, 43), Rational(12, 43), Rational(12, 43), Rational(12, 43)};
    e.note =
        "published p5 = 43/18, p6 = 43/12; condition (C) at <e1> gives 1/p6 = 18/43 and 1/p5 = 12/43, "
        "matching the published weight w(Y1) = 18/43";
  } else if (name == "radon_h1") {
    e.config = make_config(1, 1, {{}, {}});
    e.expected = inv({Rational(2, 3), Rational(2, 3)});
    e.expected_weights = {Rational(2, 3)};
    e.source = "L^{3/2} -> L^3 Radon-like estimate in H^1";
  } else {
    throw InputError("unknown example '" + raw + "'");
  }
  return e;
}

// ---- tables ----

TableReport table_report(const std::string& name) {
  static const std::vector<std::string> published = {"ex2_2", "ex2_3", "ex2_4", "ex2_5"};
  if (std::find(published.begin(), published.end(), name) == published.end())
    throw InputError("table_report: '" + name + "' has no weight table");
  NamedExample e = builtin_config(name);
  Polytope poly = solve_polytope(e.config);
  if (!poly.singleton()) throw InvariantViolation("singleton exponents", name + " has " + std::to_string(poly.vertices.size()) + " vertices");
  TableReport t;
  t.name = name;
  t.table = weights(e.config, poly.vertices.front());
  for (int j = 0; j < t.table.M; ++j) {
    std::vector<std::string> row;
    for (int i = 0; i < t.table.n; ++i)
      row.push_back(t.table.in_kernel[j][i] ? (e.config.x_side(j) ? "X" : "Y") + std::to_string(i + 1) : "");
    t.rows.push_back(row);
  }
  t.weight_row = t.table.wX;
  t.matches_expected = t.table.wX == t.table.wY && t.weight_row == e.expected_weights;
  return t;
}

nlohmann::json to_json(const TableReport& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["rows"] = t.rows;
  j["p"] = to_json(t.table.p);
  j["weights"] = to_json(t.weight_row);
  j["matches_expected"] = t.matches_expected;
  j["provenance"] = "exact";
  return j;
}

// ---- counterexamples ----

const Rational& CounterexampleRecord::get(const std::string& key) const {
  for (const auto& [k, v] : quantities)
    if (k == key) return v;
  throw InputError("counterexample record has no quantity '" + key + "'");
}

namespace {

Mask bits(std::initializer_list<int> axes) {
  Mask m = 0;
  for (int a : axes) m |= Mask{1} << a;
  return m;
}

/// Convex polygons with exact vertices, clipped one half-plane at a time.
using Pt = std::pair<Rational, Rational>;

std::vector<Pt> clip(const std::vector<Pt>& poly, int axis, const Rational& c, bool keep_above) {
  std::vector<Pt> out;
  auto val = [&](const Pt& p) -> Rational { return axis == 0 ? p.first : p.second; };
  auto inside = [&](const Pt& p) { return keep_above ? val(p) >= c : val(p) <= c; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[(i + 1) % poly.size()];
    bool ia = inside(a), ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      Rational s = (c - val(a)) / (val(b) - val(a));
      out.emplace_back(a.first + s * (b.first - a.first), a.second + s * (b.second - a.second));
    }
  }
  return out;
}

Rational area(const std::vector<Pt>& poly) {
  Rational s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[(i + 1) % poly.size()];
    s += a.first * b.second - b.first * a.second;
  }
  return abs(s) / 2;
}

CounterexampleRecord group_counterexample(long N) {
  // Omega in H^4 in flowed coordinates (x, y, s) with t = s - x.y/2: axes x1..x4, y1..y4, s.
  NamedExample e = builtin_config("ex2_4");
  ArithmeticScaffold sc = derive_arithmetic(e.config, *e.expected);
  CounterexampleRecord r;
  r.name = "A1";
  r.boxes = BoxUnion(9);
  for (long n = 1; n <= N; ++n) {
    Box b;
    b.lo = {0, 0, 0, 0, Rational(n), Rational(n), Rational(n), Rational(n), Rational(n)};
    b.hi = {Rational(n * n), Rational(1, n), Rational(1, n), Rational(1, n),
            Rational(n + 1), Rational(n + 1), Rational(n + 1), Rational(n + 1), Rational(n + 1)};
    r.boxes.add(b);
  }
  const Mask ys = bits({4, 5, 6, 7, 8});
  Rational vol = r.boxes.measure();
  r.quantities.emplace_back("|Omega|", vol);
  Rational prod_alpha = 1;
  for (int j = 0; j < e.config.m; ++j) {
    Mask keep = e.config.V[j].mask | ys;
    Rational a = vol / r.boxes.projected_measure(keep);
    r.quantities.emplace_back("alpha_" + std::to_string(j + 1), a);
    prod_alpha *= a;
  }
  std::int64_t g = 0;
  for (auto q : sc.q_tilde) g = std::gcd(g, q);
  Rational stat = 1 / prod_alpha;
  for (int j = 0; j < sc.m_tilde; ++j) {
    Mask keep = sc.p_image(j).mask | ys;
    Rational b = vol / r.boxes.projected_measure(keep);
    r.quantities.emplace_back("beta_" + std::to_string(j + 1), b);
    stat *= pow(b, static_cast<long>(sc.q_tilde[j] / g));
  }
  r.statistic_name = "prod beta_j^{q~_j / gcd} / prod alpha_j";
  r.statistic = stat;
  r.direction = -1;
  r.claimed = {{"|Omega|", "~ log N"}, {"alpha_j", "~ 1"}, {"beta_1", "~ log N"}, {"beta_2", "~ log N / N"},
               {"statistic", "beta_1 beta_2^2 << prod alpha_j"}};
  return r;
}

CounterexampleRecord parallelogram(long N, double h) {
  // omega = {(x + y, x / N) : x in [0, N], y in [0, 1]}; cells of side hq.
  CounterexampleRecord r;
  r.name = "A2";
  Rational hq(h);
  std::vector<Pt> poly = {{0, 0}, {1, 0}, {Rational(N + 1), 1}, {Rational(N), 1}};
  Rational vol = 0;
  std::vector<long> cols, rows;
  const long nrows = static_cast<long>(std::ceil(1 / h));
  for (long j = 0; j < nrows; ++j) {
    Rational y0 = hq * j, y1 = hq * (j + 1);
    std::vector<Pt> strip = clip(clip(poly, 1, y0, true), 1, y1, false);
    if (strip.size() < 3) continue;
    Rational umin = strip[0].first, umax = strip[0].first;
    for (const auto& p : strip) {
      umin = std::min(umin, p.first);
      umax = std::max(umax, p.first);
    }
    Rational q0 = umin / hq, q1 = umax / hq;
    long i0 = static_cast<long>(std::floor(to_double(q0))) - 1, i1 = static_cast<long>(std::ceil(to_double(q1))) + 1;
    bool row_hit = false;
    for (long i = i0; i <= i1; ++i) {
      std::vector<Pt> cell = clip(clip(strip, 0, hq * i, true), 0, hq * (i + 1), false);
      if (cell.size() < 3) continue;
      Rational a = area(cell);
      if (a <= 0) continue;
      vol += a;
      cols.push_back(i);
      row_hit = true;
    }
    if (row_hit) rows.push_back(j);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  Rational l = hq * static_cast<long>(cols.size()), lperp = hq * static_cast<long>(rows.size());
  r.quantities = {{"|omega|", vol}, {"|l(omega)|", l}, {"|l_perp(omega)|", lperp}};
  r.statistic_name = "|l(omega)| / (|omega| / |l_perp(omega)|)";
  r.statistic = l / (vol / lperp);
  r.direction = 0;
  r.target = Rational(N + 1);
  r.claimed = {{"|l(omega)|", "N + 1"}, {"|omega| / |l_perp(omega)|", "1"}};
  return r;
}

CounterexampleRecord flat_counterexample(const std::string& name, long N) {
  CounterexampleRecord r;
  r.name = name;
  r.boxes = BoxUnion(4);
  const bool nested = name == "A3";
  for (long n = 1; n <= N; ++n) {
    Box b;
    if (nested) {
      b.lo = {0, 0, 0, Rational(n)};
      b.hi = {Rational(1, n), Rational(n), Rational(n), Rational(n + 1)};
    } else {
      b.lo = {0, 0, 0, Rational(n)};
      b.hi = {Rational(n), Rational(1, n), Rational(1, n), Rational(n + 1)};
    }
    r.boxes.add(b);
  }
  // l_1..l_4 as kept axes (0-based).
  std::vector<Mask> l = nested ? std::vector<Mask>{bits({2, 3}), bits({3}), bits({0, 1, 2, 3}), bits({3})}
                               : std::vector<Mask>{bits({1, 2, 3}), bits({3}), bits({1, 3}), bits({2, 3})};
  Rational vol = r.boxes.measure();
  std::vector<Rational> im;
  for (Mask k : l) im.push_back(r.boxes.projected_measure(k));
  r.quantities = {{"|omega|", vol}};
  for (int j = 0; j < 4; ++j) r.quantities.emplace_back("|l_" + std::to_string(j + 1) + "(omega)|", im[j]);
  r.quantities.emplace_back("|omega|/|l_1(omega)|", vol / im[0]);
  r.quantities.emplace_back("|omega|/|l_2(omega)|", vol / im[1]);
  r.statistic_name = "|omega|^2 / ((|omega|/|l_1|) (|omega|/|l_2|) |l_3| |l_4|)";
  r.statistic = vol * vol / ((vol / im[0]) * (vol / im[1]) * im[2] * im[3]);
  r.direction = 1;
  if (nested)
    r.claimed = {{"|omega|", "~ N^2"}, {"|omega|/|l_1(omega)|", "1"}, {"|omega|/|l_2(omega)|", "1"},
                 {"|l_3(omega)|", "~ N^2"}, {"|l_4(omega)|", "N"}};
  else
    r.claimed = {{"|omega|", "~ log N"}, {"|omega|/|l_1(omega)|", "~ log N"}, {"|omega|/|l_2(omega)|", "~ log N / N"},
                 {"|omega|/|l_3(omega)|", "1"}, {"|omega|/|l_4(omega)|", "1"}};
  return r;
}

}  // namespace

CounterexampleRecord counterexample_set(const std::string& raw, long N, double h) {
  std::string name = raw;
  name.erase(std::remove(name.begin(), name.end(), '.'), name.end());
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
  if (name != "A1" && name != "A2" && name != "A3" && name != "A4") throw InputError("unknown counterexample '" + raw + "'");
  if (N < 2) throw InputError("counterexample: N must be at least 2");
  if (!(h > 0) || h > 1.0 / (4.0 * static_cast<double>(N)))
    throw InputError("resolution insufficient: h = " + std::to_string(h) + " gives fewer than 4 cells across width 1/" +
                     std::to_string(N));
  CounterexampleRecord r = name == "A1" ? group_counterexample(N)
                           : name == "A2" ? parallelogram(N, h)
                                          : flat_counterexample(name, N);
  r.N = N;
  r.h = h;
  return r;
}

VoxelSet counterexample_voxels(const CounterexampleRecord& r, std::size_t guard) {
  if (r.name == "A2") throw InputError("the parallelogram is evaluated by exact cell clipping, not rasterized");
  return r.boxes.rasterize(r.h, guard);
}

std::vector<long> default_sweep(const std::string& name) {
  if (name == "A4" || name == "A.4") return {64, 128, 256};
  return {16, 32, 64};
}

SweepAssertion counterexample_sweep(const std::string& name, const std::vector<long>& Ns, double h_factor) {
  if (Ns.size() < 2) throw InputError("a sweep needs at least two values of N");
  SweepAssertion s;
  for (long N : Ns) s.records.push_back(counterexample_set(name, N, h_factor / static_cast<double>(N)));
  s.name = s.records.front().name;
  const int dir = s.records.front().direction;
  s.direction_holds = true;
  s.rate_holds = true;
  for (std::size_t k = 0; k < s.records.size(); ++k) {
    const auto& r = s.records[k];
    if (dir == 0) {
      bool ok = r.statistic == r.target;
      s.direction_holds = s.direction_holds && ok;
      s.rate_holds = s.rate_holds && ok;
      continue;
    }
    if (k == 0) continue;
    double f = to_double(r.statistic / s.records[k - 1].statistic);
    if (dir < 0) f = 1.0 / f;
    s.step_factors.push_back(f);
    s.direction_holds = s.direction_holds && f > 1.0;
    s.rate_holds = s.rate_holds && f >= s.required_factor;
  }
  if (s.name == "A1") {
    double lo = INFINITY, hi = 0;
    for (const auto& r : s.records) {
      double v = to_double(r.get("|Omega|")) / std::log(static_cast<double>(r.N));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.log_spread = hi / lo;
    s.log_spread_holds = s.log_spread <= 1.3;
  }
  return s;
}

nlohmann::json to_json(const CounterexampleRecord& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["N"] = r.N;
  j["h"] = r.h;
  j["quantities"] = nlohmann::json::object();
  for (const auto& [k, v] : r.quantities) j["quantities"][k] = to_json(v);
  j["claimed"] = nlohmann::json::object();
  for (const auto& [k, v] : r.claimed) j["claimed"][k] = v;
  j["statistic_name"] = r.statistic_name;
  j["statistic"] = to_json(r.statistic);
  j["statistic_value"] = to_double(r.statistic);
  j["direction"] = r.direction;
  if (r.direction == 0) j["target"] = to_json(r.target);
  j["provenance"] = r.name == "A2" ? "exact cell clipping, grid(" + std::to_string(r.h) + ")" : std::string("exact");
  return j;
}

nlohmann::json to_json(const SweepAssertion& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["records"] = nlohmann::json::array();
  for (const auto& r : s.records) j["records"].push_back(to_json(r));
  j["step_factors"] = s.step_factors;
  j["required_factor"] = s.required_factor;
  j["direction_holds"] = s.direction_holds;
  j["rate_holds"] = s.rate_holds;
  if (s.name == "A1") {
    j["log_spread"] = s.log_spread;
    j["log_spread_holds"] = s.log_spread_holds;
  }
  j["holds"] = s.holds();
  return j;
}

RwtEnvelope rwt_envelope(const ProjectionConfig& config, const ExponentVector& p, double h, std::uint64_t seed,
                         double envelope) {
  config.validate();
  if (!(h > 0)) throw InputError("rwt envelope: h must be positive");
  const int n = config.n, d = 2 * n + 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> quarter(2, 8);  // side lengths k/4 in [1/2, 2]
  RwtEnvelope env;
  env.h = h;
  env.seed = seed;
  env.envelope = envelope;
  auto add = [&](const std::string& name, const VoxelSet& S) {
    if (S.empty()) throw InvariantViolation("nonempty family member", name + " rasterized to no cells at h");
    RegularityReport r = classify(S, config, p);
    env.samples.push_back({name, S.size(), r.epsilon_quasi});
  };
  std::vector<double> side(d);
  for (auto& a : side) a = quarter(rng) / 4.0;
  add("box", voxelize_box(h, std::vector<double>(d, 0.0), side));
  for (auto& a : side) a = quarter(rng) / 4.0;
  std::vector<double> lo(d), hi(d);
  double xy = 0;
  for (int i = 0; i < n; ++i) xy += side[i] * side[n + i];
  for (int i = 0; i < 2 * n; ++i) hi[i] = side[i];
  lo[2 * n] = -0.5 * xy;
  hi[2 * n] = side[2 * n];
  add("flowed_box", voxelize(d, h, lo, hi, [&](const std::vector<double>& c) {
        double s = c[2 * n];
        for (int i = 0; i < n; ++i) s += 0.5 * c[i] * c[n + i];
        return s >= 0 && s < side[2 * n];
      }));
  const auto family = measurement_family(config, nullptr);
  auto center = [&](int shift) {
    ExactHPoint z = ExactHPoint::identity(n);
    for (int i = 0; i < n; ++i) {
      z.x[i] = Rational(quarter(rng) + shift, 4);
      z.y[i] = Rational(quarter(rng), 4);
    }
    z.t = Rational(quarter(rng), 4);
    return z;
  };
  std::vector<Rational> r(n);
  for (auto& ri : r) ri = Rational(quarter(rng), 4);
  Paraball B = make_paraball(center(0), r, Rational(1), family);
  add("paraball", voxelize_paraball(B, h));
  std::vector<Rational> wide(n, Rational(2)), thin(n, Rational(1, 2));
  Paraball B1 = make_paraball(center(0), wide, Rational(1), family);
  Paraball B2 = make_paraball(center(40), thin, Rational(1), family);
  add("paraball_pair", set_union(voxelize_paraball(B1, h), voxelize_paraball(B2, h)));
  for (const auto& s : env.samples) env.max_ratio = std::max(env.max_ratio, s.ratio);
  env.holds = env.max_ratio <= envelope;
  return env;
}

nlohmann::json to_json(const RwtEnvelope& e) {
  nlohmann::json j;
  j["h"] = e.h;
  j["seed"] = e.seed;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : e.samples) j["samples"].push_back({{"name", s.name}, {"cells", s.cells}, {"ratio", s.ratio}});
  j["max_ratio"] = e.max_ratio;
  j["envelope"] = e.envelope;
  j["holds"] = e.holds;
  std::ostringstream os;
  os << "grid(" << e.h << ")";
  j["provenance"] = os.str();
  return j;
}

}  // namespace hfin
