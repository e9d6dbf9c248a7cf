#include "hfin/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hfin/errors.hpp"

namespace hfin {

namespace {

double image_measure(std::size_t groups, const VerticalMap& f, double h) {
  return static_cast<double>(groups) * std::pow(h, f.target_dim());
}

std::size_t max_size(const Grouping& g) {
  int m = 0;
  for (int s : g.size) m = std::max(m, s);
  return static_cast<std::size_t>(m);
}

/// Number of distinct `fine` groups inside each `coarse` group; fine groups must refine coarse ones.
std::vector<int> subgroup_counts(const Grouping& coarse, const Grouping& fine) {
  std::vector<int> out(coarse.count(), 0);
  std::vector<char> seen(fine.count(), 0);
  for (std::size_t k = 0; k < fine.group_of.size(); ++k) {
    int g = fine.group_of[k];
    if (seen[g]) continue;
    seen[g] = 1;
    ++out[coarse.group_of[k]];
  }
  return out;
}

std::size_t find_cell(const VoxelSet& S, const std::int32_t* c) {
  std::size_t lo = 0, hi = S.size();
  const int d = S.d();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (std::lexicographical_compare(S.cell(mid), S.cell(mid) + d, c, c + d))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo == S.size() || !std::equal(c, c + d, S.cell(lo))) throw InvariantViolation("nested levels", "cell missing from an outer level");
  return lo;
}

std::vector<std::vector<std::size_t>> members(const Grouping& g) {
  std::vector<std::vector<std::size_t>> out(g.count());
  for (std::size_t k = 0; k < g.group_of.size(); ++k) out[g.group_of[k]].push_back(k);
  return out;
}

/// Offsets along the x (offset 0) or y (offset n) axes of the given cells from a base cell.
VoxelSet offsets(const VoxelSet& S, const std::vector<std::size_t>& cells, const std::int32_t* base, int n, int offset) {
  std::vector<std::int32_t> flat;
  for (std::size_t k : cells)
    for (int i = 0; i < n; ++i) flat.push_back(S.cell(k)[offset + i] - base[offset + i]);
  return VoxelSet::from_cells(n, S.h(), std::move(flat));
}

double average_fiber(const VoxelSet& T, Mask image) {
  if (T.empty()) return 0;
  return static_cast<double>(T.size()) / static_cast<double>(pushforward_coordinate(T, image).size());
}

struct StepSpec {
  VerticalMap big;
  std::vector<VerticalMap> avg_maps;
  std::vector<double> avg_thr;
  std::vector<VerticalMap> point_maps;  ///< j = 1..mt
  std::vector<double> point_thr;
};

StepSpec step_spec(bool star, const ProjectionConfig& config, const ArithmeticScaffold& s, const FlowScheme& f) {
  StepSpec sp;
  sp.big = star ? pi_star_map(config.n) : pi_map(config.n);
  for (int j = 0; j < config.M(); ++j)
    if (config.x_side(j) != star) {
      sp.avg_maps.push_back(pi_j_map(config, j));
      sp.avg_thr.push_back(f.alpha[j]);
    }
  for (int j = 0; j < s.m_tilde; ++j) {
    auto tj = star ? pi_tilde_star_map(s, j) : pi_tilde_map(s, j);
    double b = star ? f.beta_star[j] : f.beta[j];
    sp.avg_maps.push_back(tj);
    sp.avg_thr.push_back(b);
    sp.point_maps.push_back(tj);
    sp.point_thr.push_back(b);
  }
  return sp;
}

/// Runs whole-fiber and pointwise trimming to a fixed point; returns the loss bound accrued, as a fraction.
double trim(VoxelSet& S, const StepSpec& sp, double c) {
  double kappa = 0;
  const double per_pass = c * static_cast<double>(sp.avg_maps.size() + sp.point_maps.size());
  while (!S.empty()) {
    bool removed = false;
    Grouping B = group_by_map(S, sp.big);
    std::vector<char> drop(B.count(), 0);
    for (std::size_t a = 0; a < sp.avg_maps.size(); ++a) {
      auto sub = subgroup_counts(B, group_by_map(S, sp.avg_maps[a]));
      for (int g = 0; g < B.count(); ++g)
        if (B.size[g] < c * sp.avg_thr[a] * sub[g]) drop[g] = 1;
    }
    std::vector<bool> keep(S.size());
    bool any = false;
    for (std::size_t k = 0; k < S.size(); ++k) {
      keep[k] = !drop[B.group_of[k]];
      any |= !keep[k];
    }
    if (any) {
      S = subset(S, keep);
      removed = true;
    }
    for (int j = static_cast<int>(sp.point_maps.size()) - 1; j >= 0 && !S.empty(); --j) {
      Grouping T = group_by_map(S, sp.point_maps[j]);
      std::vector<bool> kp(S.size());
      bool a2 = false;
      for (std::size_t k = 0; k < S.size(); ++k) {
        kp[k] = T.size[T.group_of[k]] >= c * sp.point_thr[j];
        a2 |= !kp[k];
      }
      if (a2) {
        S = subset(S, kp);
        removed = true;
      }
    }
    if (!removed) break;
    kappa += per_pass;
  }
  return kappa;
}

}  // namespace

RegularityReport classify(const VoxelSet& Omega, const ProjectionConfig& config, const ExponentVector& p,
                          const ArithmeticScaffold& scaffold) {
  config.validate();
  if (Omega.empty()) throw PreconditionError("classify needs a nonempty set");
  if (Omega.d() != 2 * config.n + 1) throw InputError("classify: set dimension does not match H^n");
  if (static_cast<int>(p.inv_p.size()) != config.M()) throw InputError("classify: exponent count differs from M");
  RegularityReport r;
  r.h = Omega.h();
  r.count = Omega.size();
  r.measure = Omega.measure();
  double log_eps = std::log(r.measure);
  for (int j = 0; j < config.M(); ++j) {
    auto f = pi_j_map(config, j);
    Grouping g = group_by_map(Omega, f);
    r.image_counts.push_back(g.count());
    double im = image_measure(g.count(), f, r.h);
    r.alpha.push_back(r.measure / im);
    log_eps -= to_double(p.inv_p[j]) * std::log(im);
  }
  r.epsilon_quasi = std::exp(log_eps);
  r.epsilon_semi = r.epsilon_semi_star = std::numeric_limits<double>::infinity();
  const double cnt = static_cast<double>(r.count);
  for (int j = 0; j < scaffold.m_tilde; ++j) {
    for (int star = 0; star < 2; ++star) {
      auto f = star ? pi_tilde_star_map(scaffold, j) : pi_tilde_map(scaffold, j);
      Grouping g = group_by_map(Omega, f);
      std::size_t mx = max_size(g);
      double b = r.measure / image_measure(g.count(), f, r.h);
      double eps = 2.0 * (cnt / g.count()) / static_cast<double>(mx);
      if (star) {
        r.tilde_star_counts.push_back(g.count());
        r.max_tilde_star_fiber.push_back(mx);
        r.beta_star.push_back(b);
        r.epsilon_semi_star = std::min(r.epsilon_semi_star, eps);
      } else {
        r.tilde_counts.push_back(g.count());
        r.max_tilde_fiber.push_back(mx);
        r.beta.push_back(b);
        r.epsilon_semi = std::min(r.epsilon_semi, eps);
      }
    }
  }
  return r;
}

RegularityReport classify(const VoxelSet& Omega, const ProjectionConfig& config, const ExponentVector& p) {
  return classify(Omega, config, p, derive_arithmetic(config, p));
}

nlohmann::json to_json(const RegularityReport& r) {
  std::string prov = "grid(" + std::to_string(r.h) + ")";
  return {{"h", r.h},
          {"cells", r.count},
          {"measure", r.measure},
          {"image_cells", r.image_counts},
          {"tilde_cells", r.tilde_counts},
          {"tilde_star_cells", r.tilde_star_counts},
          {"max_tilde_fiber", r.max_tilde_fiber},
          {"max_tilde_star_fiber", r.max_tilde_star_fiber},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"beta_star", r.beta_star},
          {"epsilon_quasi", r.epsilon_quasi},
          {"epsilon_semi", r.epsilon_semi},
          {"epsilon_semi_star", r.epsilon_semi_star},
          {"provenance", prov}};
}

SemiToRegularHypotheses semiregular_to_regular_hypotheses(const VoxelSet& Omega, const VoxelSet& Omega_prime,
                                                          const ProjectionConfig& config, const ExponentVector& p,
                                                          double eps, double sigma, double C, double spread) {
  SemiToRegularHypotheses h;
  auto s = derive_arithmetic(config, p);
  h.sigma_order = sigma > 0 && sigma <= eps && eps <= 1;
  auto r = classify(Omega, config, p, s);
  h.semiregular_pi = r.epsilon_semi >= eps;
  h.quasiextremal = r.epsilon_quasi >= eps;
  h.is_subset = Omega_prime.d() == Omega.d() && Omega_prime.h() == Omega.h();
  for (std::size_t k = 0; h.is_subset && k < Omega_prime.size(); ++k) h.is_subset = Omega.contains(Omega_prime.cell(k));
  if (Omega_prime.empty()) return h;
  h.refinement_size = Omega_prime.measure() >= std::pow(eps, C) * Omega.measure();
  auto rp = classify(Omega_prime, config, p, s);
  h.semiregular_pi_star = rp.epsilon_semi_star >= eps;
  std::vector<bool> keep(Omega_prime.size(), true);
  for (int j = 0; j < s.m_tilde; ++j) {
    Grouping g = group_by_map(Omega_prime, pi_tilde_star_map(s, j));
    double avg = static_cast<double>(Omega_prime.size()) / g.count();
    for (std::size_t k = 0; k < keep.size(); ++k)
      if (g.size[g.group_of[k]] > std::pow(eps, -C) * avg) keep[k] = false;
  }
  double dp = static_cast<double>(std::count(keep.begin(), keep.end(), true));
  h.double_prime_ratio = dp / (sigma * static_cast<double>(Omega.size()));
  h.double_prime_size = h.double_prime_ratio >= 1 / spread && h.double_prime_ratio <= spread;
  return h;
}

FlowScheme refine_flow_scheme(const VoxelSet& Omega, const ProjectionConfig& config, const ArithmeticScaffold& scaffold,
                              int A, int max_attempts) {
  if (A < 1) throw InputError("refinement depth A must be at least 1");
  if (Omega.empty()) throw PreconditionError("refinement needs a nonempty set");
  if (Omega.d() != 2 * config.n + 1) throw InputError("refinement: set dimension does not match H^n");
  if (scaffold.degenerate) throw PreconditionError("refinement needs a non-degenerate scaffold");
  FlowScheme f;
  f.A = A;
  const double cnt = static_cast<double>(Omega.size());
  for (int j = 0; j < config.M(); ++j) f.alpha.push_back(cnt / group_by_map(Omega, pi_j_map(config, j)).count());
  for (int j = 0; j < scaffold.m_tilde; ++j) {
    f.beta.push_back(cnt / group_by_map(Omega, pi_tilde_map(scaffold, j)).count());
    f.beta_star.push_back(cnt / group_by_map(Omega, pi_tilde_star_map(scaffold, j)).count());
  }
  const StepSpec odd = step_spec(false, config, scaffold, f);
  const StepSpec even = step_spec(true, config, scaffold, f);

  double c = 1.0 / (100.0 * (config.m + scaffold.m_tilde));
  std::vector<double> kappas;
  for (f.attempts = 1;; ++f.attempts) {
    f.levels.assign(A, VoxelSet());
    kappas.assign(A, 0);
    VoxelSet cur = Omega;
    double kappa = 0;
    for (int l = A; l >= 1; --l) {
      kappa += trim(cur, l % 2 == 1 ? odd : even, c);
      f.levels[l - 1] = cur;
      kappas[l - 1] = kappa;
      if (cur.empty()) break;
    }
    if (!f.levels[0].empty()) break;
    if (f.attempts >= max_attempts)
      throw PreconditionError("refinement annihilated the set for every c down to " + std::to_string(c));
    c /= 2;
  }
  f.c = c;
  f.kappa = kappas[A - 1];
  for (int l = 1; l <= A; ++l)
    require(static_cast<double>(f.levels[l - 1].size()) >= (1 - kappas[l - 1]) * cnt - 1e-9, "refinement loss bound",
            "level " + std::to_string(l) + " kept " + std::to_string(f.levels[l - 1].size()) + " of " +
                std::to_string(Omega.size()) + " cells, kappa " + std::to_string(kappas[l - 1]));

  const int n = config.n;
  const VoxelSet& O1 = f.levels[0];
  f.z0_cell = 0;
  f.z0 = cell_center_point(O1, 0);
  std::vector<std::int32_t> base(O1.cell(0), O1.cell(0) + O1.d());
  Grouping P1 = group_by_map(O1, pi_map(n));
  std::vector<std::size_t> s_cells;
  for (std::size_t k = 0; k < O1.size(); ++k)
    if (P1.group_of[k] == P1.group_of[0]) s_cells.push_back(k);
  f.S1 = offsets(O1, s_cells, base.data(), n, 0);

  if (A >= 2) {
    const VoxelSet& O2 = f.levels[1];
    auto star_groups = members(group_by_map(O2, pi_star_map(n)));
    Grouping P2 = group_by_map(O2, pi_star_map(n));
    std::vector<std::vector<std::size_t>> pi3;
    Grouping P3;
    if (A >= 3) {
      P3 = group_by_map(f.levels[2], pi_map(n));
      pi3 = members(P3);
    }
    for (std::size_t k : s_cells) {
      std::vector<std::int32_t> s(n);
      for (int i = 0; i < n; ++i) s[i] = O1.cell(k)[i] - base[i];
      std::size_t k2 = find_cell(O2, O1.cell(k));
      const auto& fib = star_groups[P2.group_of[k2]];
      f.F[s] = offsets(O2, fib, O2.cell(k2), n, n);
      if (A < 3) continue;
      const VoxelSet& O3 = f.levels[2];
      for (std::size_t k2b : fib) {
        std::vector<std::int32_t> su = s;
        for (int i = 0; i < n; ++i) su.push_back(O2.cell(k2b)[n + i] - O2.cell(k2)[n + i]);
        std::size_t k3 = find_cell(O3, O2.cell(k2b));
        f.G[su] = offsets(O3, pi3[P3.group_of[k3]], O3.cell(k3), n, 0);
      }
    }
  }
  audit_flow_scheme(f, config, scaffold);
  return f;
}

bool audit_flow_scheme(FlowScheme& f, const ProjectionConfig& config, const ArithmeticScaffold& scaffold) {
  double avg = std::numeric_limits<double>::infinity();
  auto check_avg = [&](const VoxelSet& T, bool x_side) {
    for (int j = 0; j < config.M(); ++j)
      if (config.x_side(j) == x_side) avg = std::min(avg, average_fiber(T, config.V[j].mask) / (f.c * f.alpha[j]));
  };
  check_avg(f.S1, true);
  for (const auto& [s, T] : f.F) check_avg(T, false);
  for (const auto& [s, T] : f.G) check_avg(T, true);
  double pt = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= f.A; ++l) {
    const VoxelSet& O = f.levels[l - 1];
    if (O.empty()) {
      pt = 0;
      continue;
    }
    for (int j = 0; j < scaffold.m_tilde; ++j) {
      bool odd = l % 2 == 1;
      Grouping g = group_by_map(O, odd ? pi_tilde_map(scaffold, j) : pi_tilde_star_map(scaffold, j));
      double thr = f.c * (odd ? f.beta[j] : f.beta_star[j]);
      int mn = *std::min_element(g.size.begin(), g.size.end());
      pt = std::min(pt, mn / thr);
    }
  }
  f.min_average_ratio = avg;
  f.min_pointwise_ratio = pt;
  f.audit_pass = avg >= 1 && pt >= 1;
  return f.audit_pass;
}

VoxelSet to_sorted_coordinates(const VoxelSet& S, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != S.d()) throw InputError("coordinate order length differs from the set dimension");
  std::vector<std::int32_t> flat;
  flat.reserve(S.data().size());
  for (std::size_t k = 0; k < S.size(); ++k)
    for (int a = 0; a < S.d(); ++a) flat.push_back(S.cell(k)[order[a]]);
  return VoxelSet::from_cells(S.d(), S.h(), std::move(flat));
}

namespace {

std::vector<int> full_k_tilde(const VoxelSet& E, const std::vector<int>& k_tilde, const std::vector<std::int64_t>& qdd) {
  if (k_tilde.empty()) throw InputError("k~ must be nonempty");
  if (k_tilde.size() != qdd.size()) throw InputError("k~ and q~~ have different lengths");
  std::vector<int> kt{0};
  for (int k : k_tilde) {
    if (k <= kt.back()) throw InputError("k~ must be strictly increasing and positive");
    kt.push_back(k);
  }
  for (auto q : qdd)
    if (q < 1) throw InputError("q~~ entries must be positive");
  if (E.d() != kt.back()) throw InputError("E must live in R^{k~_mt}");
  if (E.empty()) throw PreconditionError("E must be nonempty");
  return kt;
}

Mask tail_mask(int from, int d) {
  Mask m = 0;
  for (int a = from; a < d; ++a) m |= Mask{1} << a;
  return m;
}

std::vector<Grouping> level_groups(const VoxelSet& E, const std::vector<int>& kt) {
  std::vector<Grouping> groups(kt.size());
  groups[0].group_of.resize(E.size());
  groups[0].size.assign(E.size(), 1);
  for (std::size_t k = 0; k < E.size(); ++k) groups[0].group_of[k] = static_cast<int>(k);
  for (std::size_t j = 1; j < kt.size(); ++j) groups[j] = group_by_coordinates(E, tail_mask(kt[j], E.d()));
  return groups;
}

std::vector<std::size_t> representatives(const Grouping& g) {
  std::vector<std::size_t> rep(g.count(), 0);
  std::vector<char> seen(g.count(), 0);
  for (std::size_t k = 0; k < g.group_of.size(); ++k)
    if (!seen[g.group_of[k]]) {
      seen[g.group_of[k]] = 1;
      rep[g.group_of[k]] = k;
    }
  return rep;
}

}  // namespace

GRecursion g_recursion(const VoxelSet& E, const std::vector<double>& G0, const std::vector<int>& k_tilde,
                       const std::vector<std::int64_t>& q_dbl_tilde) {
  auto kt = full_k_tilde(E, k_tilde, q_dbl_tilde);
  if (G0.size() != E.size()) throw InputError("G_0 must be tabulated on every cell of E");
  GRecursion r;
  r.k_tilde = kt;
  const int mt = static_cast<int>(k_tilde.size());
  r.Q_tilde.assign(mt, 0);
  for (int j = mt - 1; j >= 0; --j) r.Q_tilde[j] = q_dbl_tilde[j] + (j + 1 < mt ? r.Q_tilde[j + 1] : 0);
  r.groups = level_groups(E, kt);
  r.values.push_back(G0);
  const double h = E.h();
  for (int j = 1; j <= mt; ++j) {
    const double Q = static_cast<double>(r.Q_tilde[j - 1]);
    const double cell = std::pow(h, kt[j] - kt[j - 1]);
    std::vector<double> v(r.groups[j].count(), 0.0);
    auto rep = representatives(r.groups[j - 1]);
    for (std::size_t g = 0; g < rep.size(); ++g)
      v[r.groups[j].group_of[rep[g]]] += std::pow(r.values[j - 1][g], 1.0 / Q) * cell;
    for (double& x : v) x = std::pow(x, Q);
    r.values.push_back(std::move(v));
  }
  return r;
}

GLowerBound g_lower_bound(const VoxelSet& E, const std::vector<int>& k_tilde,
                          const std::vector<std::int64_t>& q_dbl_tilde, double sigma) {
  if (!(sigma > 0 && sigma < 1)) throw InputError("sigma must lie in (0,1)");
  auto r = g_recursion(E, std::vector<double>(E.size(), 1.0), k_tilde, q_dbl_tilde);
  const auto& kt = r.k_tilde;
  const int mt = static_cast<int>(k_tilde.size());
  const double h = E.h();
  GLowerBound b;
  b.sigma = sigma;
  for (int j = 1; j <= mt; ++j) {
    const Grouping& g = r.groups[j];
    double cellv = std::pow(h, kt[j]);
    double beta = static_cast<double>(E.size()) / g.count() * cellv;
    b.beta.push_back(beta);
    if (j == mt) continue;
    for (int gi = 0; gi < g.count(); ++gi) {
      double fiber = g.size[gi] * cellv;
      if (fiber < sigma * beta || fiber > beta / sigma)
        throw PreconditionError("E is not regular at sigma = " + std::to_string(sigma) + ": a P_" + std::to_string(j) +
                                " fiber has measure " + std::to_string(fiber) + " against average " + std::to_string(beta));
    }
  }
  if (mt >= 2) {
    b.exponent = static_cast<double>(r.Q_tilde[0] + r.Q_tilde[mt - 1]);
    for (int j = 2; j <= mt - 1; ++j) b.exponent += 2.0 * static_cast<double>(r.Q_tilde[j - 1]);
  }
  double logb = b.exponent * std::log(sigma);
  for (int j = 0; j < mt; ++j) logb += static_cast<double>(q_dbl_tilde[j]) * std::log(b.beta[j]);
  b.bound = std::exp(logb);
  b.G_top = r.top();
  b.holds = b.G_top >= b.bound * (1 - 1e-12);
  return b;
}

double xi_product_integral(const VoxelSet& E, const std::vector<std::vector<double>>& f, const std::vector<int>& k_tilde,
                           const std::vector<std::int64_t>& q_dbl_tilde) {
  auto kt = full_k_tilde(E, k_tilde, q_dbl_tilde);
  std::int64_t blocks = 0;
  for (auto q : q_dbl_tilde) blocks += q;
  if (static_cast<std::int64_t>(f.size()) != blocks) throw InputError("one function per block (j,l) is required");
  for (const auto& fb : f)
    if (fb.size() != E.size()) throw InputError("each f_{j,l} must be tabulated on every cell of E");
  auto groups = level_groups(E, kt);
  const int mt = static_cast<int>(k_tilde.size());
  std::vector<double> prev;
  std::size_t b0 = 0;
  for (int j = 1; j <= mt; ++j) {
    const Grouping& g = groups[j];
    const double cell = std::pow(E.h(), kt[j]);
    std::vector<double> cur(g.count(), 1.0);
    for (std::int64_t l = 0; l < q_dbl_tilde[j - 1]; ++l) {
      std::vector<double> acc(g.count(), 0.0);
      for (std::size_t k = 0; k < E.size(); ++k) {
        double w = f[b0 + l][k] * cell;
        if (l == 0 && j > 1) w *= prev[groups[j - 1].group_of[k]];
        acc[g.group_of[k]] += w;
      }
      for (int gi = 0; gi < g.count(); ++gi) cur[gi] *= acc[gi];
    }
    b0 += q_dbl_tilde[j - 1];
    prev = std::move(cur);
  }
  return prev.at(0);
}

AmGmCheck am_gm_check(const VoxelSet& E, const std::vector<std::vector<double>>& f, const std::vector<int>& k_tilde,
                      const std::vector<std::int64_t>& q_dbl_tilde) {
  AmGmCheck c;
  c.lhs = xi_product_integral(E, f, k_tilde, q_dbl_tilde);
  std::vector<double> G0(E.size(), 1.0);
  for (const auto& fb : f)
    for (std::size_t k = 0; k < E.size(); ++k) G0[k] *= fb[k];
  c.rhs = g_recursion(E, G0, k_tilde, q_dbl_tilde).top();
  c.slack = c.lhs - c.rhs;
  c.holds = c.lhs >= c.rhs * (1 - 1e-9);
  return c;
}

double layer_identity_gap(const VoxelSet& E, const std::vector<double>& f, const std::vector<int>& k_tilde, int j) {
  std::vector<std::int64_t> ones(k_tilde.size(), 1);
  auto kt = full_k_tilde(E, k_tilde, ones);
  if (j < 1 || j >= static_cast<int>(kt.size())) throw InputError("layer index outside 1..m~");
  if (f.size() != E.size()) throw InputError("f must be tabulated on every cell of E");
  auto groups = level_groups(E, kt);
  const Grouping& outer = groups[j];
  const Grouping& inner = groups[j - 1];
  const double h = E.h();
  std::vector<double> inner_sum(inner.count(), 0.0), direct(outer.count(), 0.0), layered(outer.count(), 0.0);
  for (std::size_t k = 0; k < E.size(); ++k) {
    inner_sum[inner.group_of[k]] += f[k] * std::pow(h, kt[j - 1]);
    direct[outer.group_of[k]] += f[k] * std::pow(h, kt[j]);
  }
  auto rep = representatives(inner);
  for (std::size_t g = 0; g < rep.size(); ++g)
    layered[outer.group_of[rep[g]]] += inner_sum[g] * std::pow(h, kt[j] - kt[j - 1]);
  double gap = 0;
  for (int g = 0; g < outer.count(); ++g) gap = std::max(gap, std::abs(layered[g] - direct[g]));
  return gap;
}

}  // namespace hfin
