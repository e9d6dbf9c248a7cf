#include "hfin/exponents.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "hfin/errors.hpp"

namespace hfin {

Rational ExponentVector::p(int j) const {
  if (inv_p.at(j) == 0) throw InputError("p_" + std::to_string(j + 1) + " is infinite");
  return 1 / inv_p[j];
}

ExponentVector inv_p_from_strings(const std::vector<std::string>& v) {
  ExponentVector e;
  for (const auto& s : v) {
    e.inv_p.push_back(parse_rational(s));
    if (e.inv_p.back() < 0 || e.inv_p.back() > 1) throw InputError("1/p must lie in [0, 1], got " + s);
  }
  return e;
}

std::vector<CoordSubspace> ConditionReport::proper_critical() const {
  std::vector<CoordSubspace> out;
  for (const auto& V : critical)
    if (V.mask != 0 && V != CoordSubspace::full(V.n)) out.push_back(V);
  return out;
}

bool ConditionReport::zero_critical() const {
  return std::any_of(critical.begin(), critical.end(), [](const CoordSubspace& V) { return V.mask == 0; });
}

std::vector<Rational> b_coefficients(const ProjectionConfig& config, const CoordSubspace& V) {
  std::vector<Rational> a(config.M());
  for (int j = 0; j < config.M(); ++j)
    a[j] = config.x_side(j) ? config.V[j].meet(V).dim() + 1 : V.dim() + 1;
  return a;
}

std::vector<Rational> c_coefficients(const ProjectionConfig& config, const CoordSubspace& V) {
  std::vector<Rational> c(config.M());
  for (int j = 0; j < config.M(); ++j) {
    int d = config.K(j).meet(V).dim();
    c[j] = config.x_side(j) ? d : -d;
  }
  return c;
}

namespace {

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& x) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

void check_shape(const ProjectionConfig& config, const ExponentVector& p) {
  config.validate();
  if (p.size() != config.M())
    throw InputError("exponent vector has " + std::to_string(p.size()) + " entries, config has M=" +
                     std::to_string(config.M()));
}

}  // namespace

ConditionReport check_conditions(const ProjectionConfig& config, const ExponentVector& p) {
  check_shape(config, p);
  ConditionReport r;
  for (const auto& x : p.inv_p)
    if (x < 0 || x > 1) r.in_unit_cube = false;

  const CoordSubspace full = CoordSubspace::full(config.n);
  r.A_lhs = config.n + 1;
  r.A_rhs = dot(b_coefficients(config, full), p.inv_p);
  r.A = r.A_lhs == r.A_rhs;

  r.B = true;
  r.C = true;
  r.B_strict = true;
  for (const auto& V : enumerate_coordinate_subspaces(config.n)) {
    SubspaceRow b{V, V.dim() + 1, dot(b_coefficients(config, V), p.inv_p)};
    if (b.lhs > b.rhs) r.B = false;
    if (b.lhs == b.rhs) r.critical.push_back(V);
    if (V != full && b.lhs >= b.rhs) r.B_strict = false;
    r.B_rows.push_back(b);

    SubspaceRow c{V, 0, 0};
    for (int j = 0; j < config.M(); ++j) {
      int d = config.K(j).meet(V).dim();
      (config.x_side(j) ? c.lhs : c.rhs) += d * p.inv_p[j];
    }
    if (c.lhs != c.rhs) r.C = false;
    r.C_rows.push_back(c);
  }
  return r;
}

bool is_critical(const ProjectionConfig& config, const ExponentVector& p, const CoordSubspace& W) {
  check_shape(config, p);
  return Rational(W.dim() + 1) == dot(b_coefficients(config, W), p.inv_p);
}

namespace {

using RMatrix = std::vector<std::vector<Rational>>;

/// Reduced row echelon form over the first `ncols` columns; returns pivot columns.
std::vector<int> rref(RMatrix& a, int ncols) {
  std::vector<int> pivots;
  std::size_t row = 0;
  for (int col = 0; col < ncols && row < a.size(); ++col) {
    std::size_t piv = row;
    while (piv < a.size() && a[piv][col] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[row], a[piv]);
    Rational inv = 1 / a[row][col];
    for (auto& v : a[row]) v *= inv;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t c = 0; c < a[r].size(); ++c) a[r][c] -= f * a[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

/// Scales a row so that its first nonzero entry has absolute value 1; used for deduplication.
std::vector<Rational> normalized(std::vector<Rational> row) {
  for (const auto& v : row) {
    if (v != 0) {
      Rational s = abs(v);
      for (auto& w : row) w /= s;
      break;
    }
  }
  return row;
}

double binomial(int k, int d) {
  double b = 1;
  for (int i = 1; i <= d; ++i) b = b * (k - d + i) / i;
  return b;
}

constexpr double kMaxActiveSets = 2e7;

}  // namespace

Polytope solve_polytope(const ProjectionConfig& config) {
  config.validate();
  const int M = config.M();
  const CoordSubspace full = CoordSubspace::full(config.n);

  // Equalities: (A) and one (C) row per subspace, deduplicated.
  std::set<std::vector<Rational>> eq_rows;
  {
    auto a = b_coefficients(config, full);
    a.push_back(config.n + 1);
    eq_rows.insert(normalized(a));
  }
  for (const auto& V : enumerate_coordinate_subspaces(config.n)) {
    auto c = c_coefficients(config, V);
    if (std::all_of(c.begin(), c.end(), [](const Rational& v) { return v == 0; })) continue;
    c.push_back(0);
    eq_rows.insert(normalized(c));
  }
  RMatrix eq(eq_rows.begin(), eq_rows.end());
  auto pivots = rref(eq, M);

  Polytope poly;
  poly.equality_rank = static_cast<int>(pivots.size());
  for (const auto& row : eq) {
    bool zero = std::all_of(row.begin(), row.begin() + M, [](const Rational& v) { return v == 0; });
    if (zero && row[M] != 0) return poly;  // inconsistent equalities
  }

  // x = x0 + basis * t over the free columns.
  std::vector<Rational> x0(M, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) x0[pivots[r]] = eq[r][M];
  std::vector<int> free_cols;
  for (int c = 0; c < M; ++c)
    if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) free_cols.push_back(c);
  const int d = static_cast<int>(free_cols.size());
  RMatrix basis(M, std::vector<Rational>(d, 0));
  for (int k = 0; k < d; ++k) {
    basis[free_cols[k]][k] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) basis[pivots[r]][k] = -eq[r][free_cols[k]];
  }

  // Inequalities g.x <= h: (B) rows and the unit box.
  std::vector<std::pair<std::vector<Rational>, Rational>> ineq;
  for (const auto& V : enumerate_coordinate_subspaces(config.n)) {
    auto a = b_coefficients(config, V);
    for (auto& v : a) v = -v;
    ineq.emplace_back(a, -(V.dim() + 1));
  }
  for (int j = 0; j < M; ++j) {
    std::vector<Rational> lo(M, 0), hi(M, 0);
    lo[j] = -1;
    hi[j] = 1;
    ineq.emplace_back(lo, 0);
    ineq.emplace_back(hi, 1);
  }
  auto feasible = [&](const std::vector<Rational>& x) {
    for (const auto& [g, h] : ineq)
      if (dot(g, x) > h) return false;
    return true;
  };

  std::set<std::vector<Rational>> found;
  if (d == 0) {
    if (feasible(x0)) found.insert(x0);
  } else {
    // Rows in t-space, deduplicated.
    std::set<std::vector<Rational>> trows;
    for (const auto& [g, h] : ineq) {
      std::vector<Rational> row(d + 1, 0);
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < M; ++i) row[k] += g[i] * basis[i][k];
      row[d] = h - dot(g, x0);
      bool zero = std::all_of(row.begin(), row.begin() + d, [](const Rational& v) { return v == 0; });
      if (zero) {
        if (row[d] < 0) return poly;
        continue;
      }
      trows.insert(normalized(row));
    }
    RMatrix rows(trows.begin(), trows.end());
    const int K = static_cast<int>(rows.size());
    if (binomial(K, d) > kMaxActiveSets)
      throw InputError("polytope has too many candidate active sets (" + std::to_string(K) + " rows, dim " +
                       std::to_string(d) + ")");
    std::vector<int> pick(d);
    for (int i = 0; i < d; ++i) pick[i] = i;
    while (d <= K) {
      RMatrix sys;
      for (int i : pick) sys.push_back(rows[i]);
      auto piv = rref(sys, d);
      if (static_cast<int>(piv.size()) == d) {
        std::vector<Rational> x = x0;
        for (int i = 0; i < M; ++i)
          for (int k = 0; k < d; ++k) x[i] += basis[i][k] * sys[k][d];
        if (feasible(x)) found.insert(x);
      }
      int i = d - 1;
      while (i >= 0 && pick[i] == K - d + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int k = i + 1; k < d; ++k) pick[k] = pick[k - 1] + 1;
    }
  }
  for (const auto& v : found) poly.vertices.push_back({v});
  if (poly.singleton()) poly.singleton_B_strict = check_conditions(config, poly.vertices[0]).B_strict;
  return poly;
}

CoordSubspace ArithmeticScaffold::p_kernel(int j) const {
  CoordSubspace k{n, 0};
  for (int pos = 0; pos < k_tilde.at(j); ++pos) k.mask |= Mask{1} << order[pos];
  return k;
}

namespace {
std::int64_t to_i64(const mpz_class& z, const char* what) {
  if (!z.fits_slong_p()) throw InputError(std::string(what) + " does not fit in 64 bits");
  return z.get_si();
}
}  // namespace

ArithmeticScaffold derive_arithmetic(const ProjectionConfig& config, const ExponentVector& p) {
  check_shape(config, p);
  for (int j = 0; j < p.size(); ++j)
    if (p.inv_p[j] <= 0 || p.inv_p[j] > 1)
      throw PreconditionError("derive_arithmetic needs 0 < 1/p_j <= 1; drop infinite factors first (j=" +
                              std::to_string(j + 1) + ")");
  ArithmeticScaffold s;
  s.n = config.n;
  s.m = config.m;
  s.M = config.M();

  mpz_class q = 1;
  for (const auto& x : p.inv_p) q = lcm(q, x.get_den());
  s.q = to_i64(q, "q");
  std::int64_t sum_q = 0;
  for (const auto& x : p.inv_p) {
    Rational v = x * q;
    s.qj.push_back(to_i64(v.get_num(), "q_j"));
    sum_q += s.qj.back();
  }
  s.N = sum_q - s.q;
  if (s.N < 0) throw PreconditionError("sum of 1/p_j below 1: condition (B) fails at {0}");

  std::vector<std::int64_t> qx(config.n, 0), qy(config.n, 0);
  for (int j = 0; j < s.M; ++j)
    for (int i : config.K(j).indices()) (config.x_side(j) ? qx : qy)[i] += s.qj[j];
  for (int i = 0; i < config.n; ++i) {
    if (qx[i] != qy[i])
      throw PreconditionError("Q_" + std::to_string(i + 1) + " is not well defined: x-side sum " +
                              std::to_string(qx[i]) + " != y-side sum " + std::to_string(qy[i]) +
                              " (condition (C) fails at <e" + std::to_string(i + 1) + ">)");
  }
  s.Q = qx;
  for (auto Qi : s.Q) s.weights.push_back(Rational(Qi) / Rational(s.q));
  if (s.N == 0) {
    s.degenerate = true;
    return s;
  }

  auto rep = check_conditions(config, p);
  if (!rep.A) throw PreconditionError("condition (A) fails");
  if (!rep.C) throw PreconditionError("condition (C) fails");
  if (!rep.B_strict) throw PreconditionError("strict condition (B) fails at a proper subspace");

  s.order.resize(config.n);
  for (int i = 0; i < config.n; ++i) s.order[i] = i;
  std::stable_sort(s.order.begin(), s.order.end(), [&](int a, int b) { return s.Q[a] > s.Q[b]; });
  for (int pos = 0; pos < config.n; ++pos) {
    bool last_of_level = pos + 1 == config.n || s.Q[s.order[pos + 1]] != s.Q[s.order[pos]];
    if (last_of_level) {
      s.k_tilde.push_back(pos + 1);
      s.q_tilde.push_back(pos + 1 == config.n ? s.Q[s.order[pos]] : s.Q[s.order[pos]] - s.Q[s.order[pos + 1]]);
    }
  }
  s.m_tilde = static_cast<int>(s.k_tilde.size());
  s.q_dbl_tilde = s.q_tilde;
  s.q_dbl_tilde.back() -= s.N;
  s.Q_tilde.assign(s.m_tilde, 0);
  for (int j = s.m_tilde - 1; j >= 0; --j)
    s.Q_tilde[j] = s.q_dbl_tilde[j] + (j + 1 < s.m_tilde ? s.Q_tilde[j + 1] : 0);

  std::int64_t y_sum = 0;
  for (int j = s.m; j < s.M; ++j) y_sum += s.qj[j];
  s.q_prime = s.Q[s.order[0]] + y_sum - s.N;
  for (int j = 0; j < s.m_tilde; ++j) s.intermediate.inv_p.push_back(Rational(s.q_tilde[j]) / Rational(s.q_prime));
  for (int j = s.m; j < s.M; ++j) s.intermediate.inv_p.push_back(Rational(s.qj[j]) / Rational(s.q_prime));
  for (auto& x : s.intermediate.inv_p) x.canonicalize();
  s.intermediate_config.n = s.n;
  s.intermediate_config.m = s.m_tilde;
  for (int j = 0; j < s.m_tilde; ++j) s.intermediate_config.V.push_back(s.p_image(j));
  for (int j = s.m; j < s.M; ++j) s.intermediate_config.V.push_back(config.V[j]);

  // Scaffold identities.
  std::int64_t kx = 0, ky = 0;
  for (int j = 0; j < s.M; ++j) (config.x_side(j) ? kx : ky) += config.k_j(j) * s.qj[j];
  require(kx == s.N * (s.n + 1), "identity N(n+1) = sum_{j<=m} k_j q_j",
          std::to_string(kx) + " vs " + std::to_string(s.N * (s.n + 1)));
  require(ky == s.N * (s.n + 1), "identity N(n+1) = sum_{j>m} k_j q_j",
          std::to_string(ky) + " vs " + std::to_string(s.N * (s.n + 1)));
  for (int i = 0; i < s.n; ++i) {
    require(s.N < s.Q[i], "bound N < Q_i", "i=" + std::to_string(i + 1));
    // <e_i> is a proper subspace only when n >= 2.
    bool upper = s.n >= 2 ? s.Q[i] < 2 * s.N : s.Q[i] <= 2 * s.N;
    require(upper, "bound Q_i < 2N", "i=" + std::to_string(i + 1));
  }
  std::int64_t kq = 0;
  for (int j = 0; j < s.m_tilde; ++j) {
    require(s.q_tilde[j] > 0, "q~_j > 0", "j=" + std::to_string(j + 1));
    require(s.q_dbl_tilde[j] >= 1, "q~~_j >= 1", "j=" + std::to_string(j + 1));
    kq += s.k_tilde[j] * s.q_dbl_tilde[j];
  }
  require(kq == s.N, "identity sum k~_j q~~_j = N", std::to_string(kq) + " vs " + std::to_string(s.N));
  auto inter = check_conditions(s.intermediate_config, s.intermediate);
  require(inter.A && inter.C && inter.B_strict, "intermediate exponents satisfy (A), (C), strict (B)");
  return s;
}

WeightTable weights(const ProjectionConfig& config, const ExponentVector& p) {
  check_shape(config, p);
  WeightTable t;
  t.n = config.n;
  t.m = config.m;
  t.M = config.M();
  t.p = p;
  t.wX.assign(config.n, 0);
  t.wY.assign(config.n, 0);
  for (int j = 0; j < t.M; ++j) {
    std::vector<bool> row(config.n, false);
    for (int i : config.K(j).indices()) {
      row[i] = true;
      (config.x_side(j) ? t.wX : t.wY)[i] += p.inv_p[j];
    }
    t.in_kernel.push_back(row);
  }
  return t;
}

namespace {
std::string field_name(const WeightTable& t, int j, int i) {
  return (j < t.m ? "X" : "Y") + std::to_string(i + 1);
}
std::string p_string(const ExponentVector& p, int j) {
  return p.finite(j) ? to_string(p.p(j)) : "inf";
}
}  // namespace

std::string weight_table_csv(const WeightTable& t) {
  std::ostringstream os;
  os << "row";
  for (int i = 0; i < t.n; ++i) os << "," << (i + 1);
  os << ",p\n";
  for (int j = 0; j < t.M; ++j) {
    os << "pi" << (j + 1);
    for (int i = 0; i < t.n; ++i) os << "," << (t.in_kernel[j][i] ? field_name(t, j, i) : "");
    os << "," << p_string(t.p, j) << "\n";
  }
  bool same = t.wX == t.wY;
  if (same) {
    os << "w(X_i)=w(Y_i)";
    for (const auto& w : t.wX) os << "," << to_string(w);
    os << ",\n";
  } else {
    os << "w(X_i)";
    for (const auto& w : t.wX) os << "," << to_string(w);
    os << ",\nw(Y_i)";
    for (const auto& w : t.wY) os << "," << to_string(w);
    os << ",\n";
  }
  return os.str();
}

nlohmann::json to_json(const WeightTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int j = 0; j < t.M; ++j) {
    nlohmann::json fields = nlohmann::json::array();
    for (int i = 0; i < t.n; ++i)
      if (t.in_kernel[j][i]) fields.push_back(field_name(t, j, i));
    nlohmann::json row = {{"projection", j + 1}, {"kernel_fields", fields}, {"inv_p", to_json(t.p.inv_p[j])}};
    rows.push_back(row);
  }
  return {{"rows", rows}, {"wX", to_json(t.wX)}, {"wY", to_json(t.wY)}, {"provenance", "exact"}};
}

std::string to_string(BaseCase c) {
  switch (c) {
    case BaseCase::HolderReducible: return "HOLDER_REDUCIBLE";
    case BaseCase::SingletonBaseCase: return "SINGLETON_BASE_CASE";
    case BaseCase::BoundaryExtremes: return "BOUNDARY_EXTREMES";
    case BaseCase::CriticalReduction: return "CRITICAL_REDUCTION";
    case BaseCase::Empty: return "EMPTY";
  }
  return "?";
}

Classification classify_base_case(const ProjectionConfig& config) {
  Classification c;
  c.polytope = solve_polytope(config);
  if (c.polytope.empty()) return c;

  // The vertex centroid lies in the relative interior, where criticality is generic.
  ExponentVector probe{std::vector<Rational>(config.M(), 0)};
  for (const auto& v : c.polytope.vertices)
    for (int j = 0; j < config.M(); ++j) probe.inv_p[j] += v.inv_p[j];
  for (auto& x : probe.inv_p) x /= static_cast<long>(c.polytope.vertices.size());
  c.probe = probe;
  auto rep = check_conditions(config, probe);

  c.extremes_have_infinite_p = std::all_of(c.polytope.vertices.begin(), c.polytope.vertices.end(), [](const auto& v) {
    return std::any_of(v.inv_p.begin(), v.inv_p.end(), [](const Rational& x) { return x == 0; });
  });

  if (rep.zero_critical()) {
    c.kind = BaseCase::HolderReducible;
    c.holder_dichotomy = true;
    for (int j = 0; j < config.M(); ++j)
      if (probe.inv_p[j] != 0 && config.n_j(j) != config.n) c.holder_dichotomy = false;
    return c;
  }
  auto proper = rep.proper_critical();
  if (!proper.empty()) {
    c.kind = BaseCase::CriticalReduction;
    c.W = proper.front();
    c.restriction = restrict_config(config, proper.front());
    return c;
  }
  c.kind = c.polytope.singleton() ? BaseCase::SingletonBaseCase : BaseCase::BoundaryExtremes;
  return c;
}

nlohmann::json to_json(const ExponentVector& p) {
  nlohmann::json inv = to_json(p.inv_p);
  nlohmann::json ps = nlohmann::json::array();
  for (int j = 0; j < p.size(); ++j) ps.push_back(p.finite(j) ? to_json(p.p(j)) : nlohmann::json("inf"));
  return {{"inv_p", inv}, {"p", ps}};
}

nlohmann::json to_json(const ConditionReport& r) {
  auto rows = [](const std::vector<SubspaceRow>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& row : v) a.push_back({{"V", row.V.str()}, {"lhs", to_json(row.lhs)}, {"rhs", to_json(row.rhs)}});
    return a;
  };
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& V : r.critical) crit.push_back(V.str());
  return {{"in_unit_cube", r.in_unit_cube},
          {"A", {{"holds", r.A}, {"lhs", to_json(r.A_lhs)}, {"rhs", to_json(r.A_rhs)}}},
          {"B", {{"holds", r.B}, {"rows", rows(r.B_rows)}}},
          {"C", {{"holds", r.C}, {"rows", rows(r.C_rows)}}},
          {"B_strict", r.B_strict},
          {"critical", crit},
          {"provenance", "exact"}};
}

nlohmann::json to_json(const Polytope& p) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : p.vertices) v.push_back(to_json(x));
  return {{"vertices", v},
          {"singleton", p.singleton()},
          {"empty", p.empty()},
          {"singleton_B_strict", p.singleton_B_strict},
          {"equality_rank", p.equality_rank},
          {"provenance", "exact"}};
}

nlohmann::json to_json(const ArithmeticScaffold& s) {
  nlohmann::json j = {{"degenerate", s.degenerate}, {"q", s.q}, {"q_j", s.qj}, {"N", s.N},
                      {"Q", s.Q},                   {"weights", to_json(s.weights)}, {"provenance", "exact"}};
  if (s.degenerate) return j;
  std::vector<int> order1;
  for (int i : s.order) order1.push_back(i + 1);
  j["order"] = order1;
  j["m_tilde"] = s.m_tilde;
  j["k_tilde"] = s.k_tilde;
  j["q_tilde"] = s.q_tilde;
  j["q_dbl_tilde"] = s.q_dbl_tilde;
  j["Q_tilde"] = s.Q_tilde;
  j["q_prime"] = s.q_prime;
  j["intermediate_inv_p"] = to_json(s.intermediate.inv_p);
  j["intermediate_config"] = to_json(s.intermediate_config);
  return j;
}

nlohmann::json to_json(const Classification& c) {
  nlohmann::json j = {{"kind", to_string(c.kind)}, {"polytope", to_json(c.polytope)}};
  if (c.probe) j["probe_inv_p"] = to_json(c.probe->inv_p);
  if (c.W) j["W"] = c.W->str();
  if (c.restriction) {
    j["inner_config"] = to_json(c.restriction->inner);
    nlohmann::json flat = nlohmann::json::array();
    for (const auto& f : c.restriction->flat)
      flat.push_back({{"j", f.j + 1}, {"x_image_mask", f.x_image}, {"y_image_mask", f.y_image}});
    j["flat"] = flat;
  }
  if (c.kind == BaseCase::BoundaryExtremes) j["extremes_have_infinite_p"] = c.extremes_have_infinite_p;
  if (c.kind == BaseCase::HolderReducible) j["holder_dichotomy"] = c.holder_dichotomy;
  return j;
}

}  // namespace hfin
