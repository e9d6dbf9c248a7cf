#include "hfin/paraball.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hfin/ellipsoid.hpp"
#include "hfin/errors.hpp"

namespace hfin {

// ---- Monomial ----

Monomial& Monomial::operator*=(const Monomial& o) {
  coeff *= o.coeff;
  for (const auto& [v, e] : o.exps) {
    Rational s = exps[v] + e;
    if (s == 0) exps.erase(v); else exps[v] = s;
  }
  return *this;
}

Monomial Monomial::operator/(const Monomial& o) const {
  if (o.coeff == 0) throw InputError("monomial division by zero");
  Monomial inv;
  inv.coeff = 1 / o.coeff;
  for (const auto& [v, e] : o.exps) inv.exps[v] = -e;
  return *this * inv;
}

Monomial Monomial::pow(const Rational& e) const {
  Monomial m;
  if (e.get_den() == 1) {
    m.coeff = hfin::pow(coeff, e.get_num().get_si());
  } else {
    if (coeff != 1) throw InputError("rational power of a monomial with coefficient " + to_string(coeff));
  }
  for (const auto& [v, x] : exps) {
    Rational s = x * e;
    if (s != 0) m.exps[v] = s;
  }
  return m;
}

Monomial Monomial::var(const std::string& name, const Rational& e) {
  Monomial m;
  if (e != 0) m.exps[name] = e;
  return m;
}

bool Monomial::is_constant() const { return exps.empty(); }

std::string Monomial::str() const {
  std::string s = to_string(coeff);
  for (const auto& [v, e] : exps) s += " " + v + (e == 1 ? "" : "^" + to_string(e));
  return s;
}

// ---- construction ----

namespace {

constexpr double kFrameTol = 1e-10;

bool column_in_block(const Eigen::MatrixXd& E, int col, Mask block) {
  for (int k = 0; k < E.rows(); ++k)
    if (!((block >> k) & 1u) && std::abs(E(k, col)) > kFrameTol) return false;
  return true;
}

bool frame_adapted(const Eigen::MatrixXd& E, const MaximalPartition& part) {
  for (int i = 0; i < E.cols(); ++i)
    if (!column_in_block(E, i, part.blocks[part.block_of(i)].mask)) return false;
  return true;
}

HPoint to_double(const ExactHPoint& z) {
  HPoint p = HPoint::identity(z.n());
  for (int i = 0; i < z.n(); ++i) {
    p.x[i] = hfin::to_double(z.x[i]);
    p.y[i] = hfin::to_double(z.y[i]);
  }
  p.t = hfin::to_double(z.t);
  return p;
}

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> d;
  for (const auto& x : v) d.push_back(hfin::to_double(x));
  return d;
}

std::string rvar(int i) { return "r" + std::to_string(i + 1); }

/// Coordinate extents of the ellipsoid with axes E and radii r.
std::vector<double> extents(const Eigen::MatrixXd& E, const std::vector<double>& r) {
  std::vector<double> e(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    double s = 0;
    for (std::size_t c = 0; c < r.size(); ++c) s += E(i, c) * E(i, c) * r[c] * r[c];
    e[i] = std::sqrt(s);
  }
  return e;
}

/// sum over axes in `cols` of ((E_col . v) / r_col)^2.
double axis_gauge(const Eigen::MatrixXd& E, const std::vector<double>& v, const std::vector<double>& r, Mask cols,
                  bool multiply = false) {
  double g = 0;
  const int n = static_cast<int>(v.size());
  for (int c = 0; c < n; ++c) {
    if (!((cols >> c) & 1u)) continue;
    double p = 0;
    for (int k = 0; k < n; ++k) p += E(k, c) * v[k];
    double q = multiply ? p * r[c] : p / r[c];
    g += q * q;
  }
  return g;
}

Mask all_mask(int n) { return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1; }

}  // namespace

bool Paraball::axis_aligned() const {
  return frame == Eigen::MatrixXd::Identity(n(), n());
}

Paraball make_paraball(const ExactHPoint& z, const Eigen::MatrixXd& frame, const std::vector<Rational>& r,
                       const Rational& rho, const std::vector<CoordSubspace>& family) {
  const int n = z.n();
  if (static_cast<int>(r.size()) != n) throw InputError("paraball: radii and center have different dimensions");
  if (frame.rows() != n || frame.cols() != n) throw InputError("paraball: frame must be n x n");
  if (rho <= 0) throw PreconditionError("paraball: rho must be positive");
  for (const auto& ri : r)
    if (ri <= 0) throw PreconditionError("paraball: radii must be positive");
  if ((frame.transpose() * frame - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
    throw PreconditionError("paraball: frame is not orthonormal");
  Paraball B;
  B.z = z;
  B.frame = frame;
  B.r = r;
  B.rho = rho;
  for (const auto& ri : r) B.r_star.push_back(rho / ri);
  B.family = family.empty() ? std::vector<CoordSubspace>{CoordSubspace::full(n)} : family;
  for (const auto& f : B.family)
    if (f.n != n) throw InputError("paraball: family lives in a different dimension");
  B.partition = maximal_partition(B.family);
  if (!frame_adapted(frame, B.partition)) throw PreconditionError("paraball: non-adapted frame");
  return B;
}

Paraball make_paraball(const ExactHPoint& z, const std::vector<Rational>& r, const Rational& rho,
                       const std::vector<CoordSubspace>& family) {
  return make_paraball(z, Eigen::MatrixXd::Identity(z.n(), z.n()), r, rho, family);
}

std::vector<CoordSubspace> measurement_family(const ProjectionConfig& config, const ArithmeticScaffold* scaffold) {
  std::vector<CoordSubspace> f = config.V;
  if (scaffold)
    for (int j = 0; j < scaffold->m_tilde; ++j) f.push_back(scaffold->p_image(j));
  if (f.empty()) f.push_back(CoordSubspace::full(config.n));
  return f;
}

// ---- analytic measures ----

double ball_partial_norm_integral(int n, int k) {
  if (k < 0 || k > n) throw InputError("partial norm integral: need 0 <= k <= n");
  if (k == 0) return 0.0;
  double a = (k + 1) / 2.0, b = (n - k) / 2.0 + 1.0;
  double beta = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  return unit_ball_volume(n - k) * k * unit_ball_volume(k) * 0.5 * beta;
}

double projection_shape_constant(int n, int d) {
  return 2.0 * unit_ball_volume(d) * unit_ball_volume(n) +
         0.5 * unit_ball_volume(d + 1) * ball_partial_norm_integral(n, n - d);
}

namespace {

/// Structural part prod_{i in K} (r* or r)_i * rho^{d+1}, d = n - |K|.
AnalyticMeasure image_measure(const Paraball& B, const std::string& name, bool x_side, Mask V) {
  const int n = B.n();
  AnalyticMeasure a;
  a.name = name;
  int d = 0;
  a.structural = 1;
  for (int i = 0; i < n; ++i) {
    if ((V >> i) & 1u) {
      ++d;
      continue;
    }
    if (x_side) {
      a.structural *= B.r_star[i];
      a.form *= Monomial::var("rho") * Monomial::var(rvar(i), -1);
    } else {
      a.structural *= B.r[i];
      a.form *= Monomial::var(rvar(i));
    }
  }
  a.structural *= pow(B.rho, d + 1);
  a.form *= Monomial::var("rho", d + 1);
  a.constant = projection_shape_constant(n, d);
  return a;
}

}  // namespace

ParaballTable paraball_measures(const Paraball& B, const ProjectionConfig& config, const ArithmeticScaffold& scaffold) {
  config.validate();
  const int n = config.n;
  if (B.n() != n) throw InputError("paraball and configuration have different dimensions");
  if (!frame_adapted(B.frame, maximal_partition(measurement_family(config, &scaffold))))
    throw PreconditionError("paraball: non-adapted frame for this configuration");
  ParaballTable t;
  t.ball.name = "ball";
  t.ball.structural = pow(B.rho, n + 1);
  t.ball.form = Monomial::var("rho", n + 1);
  t.ball.constant = 2.0 * unit_ball_volume(n) * unit_ball_volume(n);
  for (int j = 0; j < config.M(); ++j)
    t.pi.push_back(image_measure(B, "pi_" + std::to_string(j + 1), config.x_side(j), config.V[j].mask));
  for (int j = 0; j < scaffold.m_tilde; ++j) {
    Mask im = scaffold.p_image(j).mask;
    t.pi_tilde.push_back(image_measure(B, "pi~_" + std::to_string(j + 1), true, im));
    t.pi_tilde_star.push_back(image_measure(B, "pi~*_" + std::to_string(j + 1), false, im));
  }
  return t;
}

double quasiextremal_ratio(const ParaballTable& t, const ExponentVector& p) {
  if (p.size() != static_cast<int>(t.pi.size())) throw InputError("exponent vector length differs from M");
  double logr = std::log(t.ball.value());
  for (std::size_t j = 0; j < t.pi.size(); ++j) logr -= hfin::to_double(p.inv_p[j]) * std::log(t.pi[j].value());
  return std::exp(logr);
}

Monomial quasiextremal_form(const ParaballTable& t, const ExponentVector& p) {
  if (p.size() != static_cast<int>(t.pi.size())) throw InputError("exponent vector length differs from M");
  Monomial m = t.ball.form;
  for (std::size_t j = 0; j < t.pi.size(); ++j) m = m / t.pi[j].form.pow(p.inv_p[j]);
  return m;
}

// ---- scaling ----

namespace {

Rational exact_from_double(double v) { return Rational(v); }

/// D(w) = (E diag(lx) E^T x, E diag(ly) E^T y, a t); exact when E is the identity.
ExactHPoint dilate(const Paraball& B, const ExactHPoint& w, const std::vector<Rational>& lx,
                   const std::vector<Rational>& ly, const Rational& a) {
  const int n = B.n();
  ExactHPoint out = w;
  if (B.axis_aligned()) {
    for (int i = 0; i < n; ++i) {
      out.x[i] = lx[i] * w.x[i];
      out.y[i] = ly[i] * w.y[i];
    }
  } else {
    Eigen::VectorXd x(n), y(n), dx(n), dy(n);
    for (int i = 0; i < n; ++i) {
      x[i] = hfin::to_double(w.x[i]);
      y[i] = hfin::to_double(w.y[i]);
      dx[i] = hfin::to_double(lx[i]);
      dy[i] = hfin::to_double(ly[i]);
    }
    Eigen::VectorXd X = B.frame * dx.asDiagonal() * B.frame.transpose() * x;
    Eigen::VectorXd Y = B.frame * dy.asDiagonal() * B.frame.transpose() * y;
    for (int i = 0; i < n; ++i) {
      out.x[i] = exact_from_double(X[i]);
      out.y[i] = exact_from_double(Y[i]);
    }
  }
  out.t = a * w.t;
  return out;
}

}  // namespace

Paraball scale_paraball(const Paraball& B, const std::vector<Rational>& lambda, const std::vector<Rational>& lambda_star,
                        const Rational& a) {
  const int n = B.n();
  if (static_cast<int>(lambda.size()) != n || static_cast<int>(lambda_star.size()) != n)
    throw InputError("scaling vectors must have length n");
  if (a <= 0) throw PreconditionError("scaling: a must be positive");
  for (int i = 0; i < n; ++i) {
    if (lambda[i] <= 0 || lambda_star[i] <= 0) throw PreconditionError("scaling: factors must be positive");
    if (lambda[i] * lambda_star[i] != a)
      throw PreconditionError("scaling: lambda_i lambda*_i != a at axis " + std::to_string(i + 1));
  }
  std::vector<Rational> r(n);
  for (int i = 0; i < n; ++i) r[i] = lambda[i] * B.r[i];
  return make_paraball(dilate(B, B.z, lambda, lambda_star, a), B.frame, r, a * B.rho, B.family);
}

ScalingReport verify_scaling(const Paraball& B, const std::vector<Rational>& lambda,
                             const std::vector<Rational>& lambda_star, const Rational& a, const ProjectionConfig& config,
                             const ExponentVector& p, const ArithmeticScaffold& scaffold) {
  Paraball S = scale_paraball(B, lambda, lambda_star, a);
  ParaballTable t0 = paraball_measures(B, config, scaffold);
  ParaballTable t1 = paraball_measures(S, config, scaffold);
  const int n = config.n;
  ScalingReport rep;
  auto law = [&](bool x_side, Mask V) -> Rational {
    Rational v = 1;
    int d = 0;
    for (int i = 0; i < n; ++i) {
      if ((V >> i) & 1u) ++d;
      else v *= x_side ? lambda_star[i] : lambda[i];
    }
    return v * pow(a, d + 1);
  };
  auto add = [&](const AnalyticMeasure& m0, const AnalyticMeasure& m1, const Rational& predicted) {
    ScalingRow row{m0.name, m1.structural / m0.structural, predicted, false};
    row.exact = row.ratio == row.predicted;
    rep.rows.push_back(row);
  };
  add(t0.ball, t1.ball, pow(a, n + 1));
  for (int j = 0; j < config.M(); ++j) add(t0.pi[j], t1.pi[j], law(config.x_side(j), config.V[j].mask));
  for (int j = 0; j < scaffold.m_tilde; ++j) {
    add(t0.pi_tilde[j], t1.pi_tilde[j], law(true, scaffold.p_image(j).mask));
    add(t0.pi_tilde_star[j], t1.pi_tilde_star[j], law(false, scaffold.p_image(j).mask));
  }
  rep.all_exact = std::all_of(rep.rows.begin(), rep.rows.end(), [](const ScalingRow& r) { return r.exact; });
  rep.quasi_form = quasiextremal_form(t0, p);
  rep.quasi_invariant = rep.quasi_form.is_constant();
  rep.quasi_before = quasiextremal_ratio(t0, p);
  rep.quasi_after = quasiextremal_ratio(t1, p);
  return rep;
}

// ---- geometry ----

Paraball left_translate(const ExactHPoint& g, const Paraball& B) {
  Paraball out = B;
  out.z = group_mul(g, B.z);
  return out;
}

bool paraball_contains(const Paraball& B, const HPoint& w) {
  HPoint d = group_mul(group_inv(to_double(B.z)), w);
  const Mask all = all_mask(B.n());
  if (axis_gauge(B.frame, d.x, to_doubles(B.r), all) > 1.0) return false;
  if (axis_gauge(B.frame, d.y, to_doubles(B.r_star), all) > 1.0) return false;
  return std::abs(d.t) < hfin::to_double(B.rho);
}

VoxelSet voxelize_paraball(const Paraball& B, double h, std::size_t guard) {
  if (!(h > 0)) throw InputError("voxelize_paraball: h must be positive");
  const int n = B.n();
  HPoint z = to_double(B.z);
  std::vector<double> ex = extents(B.frame, to_doubles(B.r)), ey = extents(B.frame, to_doubles(B.r_star));
  std::vector<double> lo(2 * n + 1), hi(2 * n + 1);
  double tw = hfin::to_double(B.rho);
  for (int i = 0; i < n; ++i) {
    lo[i] = z.x[i] - ex[i];
    hi[i] = z.x[i] + ex[i];
    lo[n + i] = z.y[i] - ey[i];
    hi[n + i] = z.y[i] + ey[i];
    tw += 0.5 * (ex[i] * std::abs(z.y[i]) + std::abs(z.x[i]) * ey[i]);
  }
  lo[2 * n] = z.t - tw;
  hi[2 * n] = z.t + tw;
  HPoint w = HPoint::identity(n);
  return voxelize(2 * n + 1, h, lo, hi,
                  [&](const std::vector<double>& c) {
                    for (int i = 0; i < n; ++i) {
                      w.x[i] = c[i];
                      w.y[i] = c[n + i];
                    }
                    w.t = c[2 * n];
                    return paraball_contains(B, w);
                  },
                  guard);
}

std::vector<ImageKind> image_kinds(const ProjectionConfig& config, const ArithmeticScaffold& scaffold) {
  std::vector<ImageKind> k;
  for (int j = 0; j < config.M(); ++j)
    k.push_back({config.x_side(j), config.V[j].mask, "pi_" + std::to_string(j + 1)});
  for (int j = 0; j < scaffold.m_tilde; ++j)
    k.push_back({true, scaffold.p_image(j).mask, "pi~_" + std::to_string(j + 1)});
  for (int j = 0; j < scaffold.m_tilde; ++j)
    k.push_back({false, scaffold.p_image(j).mask, "pi~*_" + std::to_string(j + 1)});
  return k;
}

namespace {

int popcount(Mask m) { return __builtin_popcount(m); }

/// Horizontal image coordinates: kept x then all y (x side), or all x then kept y.
void image_box(const Paraball& B, const ImageKind& k, std::vector<double>& center, std::vector<double>& radius) {
  const int n = B.n();
  HPoint z = to_double(B.z);
  std::vector<double> ex = extents(B.frame, to_doubles(B.r)), ey = extents(B.frame, to_doubles(B.r_star));
  center.clear();
  radius.clear();
  for (int i = 0; i < n; ++i)
    if (!k.x_side || ((k.V >> i) & 1u)) {
      center.push_back(z.x[i]);
      radius.push_back(ex[i]);
    }
  for (int i = 0; i < n; ++i)
    if (k.x_side || ((k.V >> i) & 1u)) {
      center.push_back(z.y[i]);
      radius.push_back(ey[i]);
    }
}

}  // namespace

Interval image_fiber(const Paraball& B, const ImageKind& k, const std::vector<double>& horizontal) {
  const int n = B.n();
  const int dv = popcount(k.V);
  if (static_cast<int>(horizontal.size()) != n + dv) throw InputError("image_fiber: horizontal point has wrong length");
  HPoint z = to_double(B.z);
  const std::vector<double> r = to_doubles(B.r), rs = to_doubles(B.r_star);
  const Mask all = all_mask(n), Kc = all & ~k.V;
  std::vector<double> P(n, 0.0), Q(n, 0.0);  // P: the partially kept side, Q: the whole side
  Interval out;
  std::size_t pos = 0;
  if (k.x_side) {
    for (int i = 0; i < n; ++i)
      if ((k.V >> i) & 1u) P[i] = horizontal[pos++] - z.x[i];
    for (int i = 0; i < n; ++i) Q[i] = horizontal[pos++] - z.y[i];
    double gA = axis_gauge(B.frame, P, r, k.V);
    if (gA > 1.0 || axis_gauge(B.frame, Q, rs, all) > 1.0) return out;
    double w0 = std::sqrt(1.0 - gA) * std::sqrt(axis_gauge(B.frame, Q, r, Kc, true));
    out.center = z.t + 0.5 * dot(z.x, z.y) + dot(z.x, Q) + 0.5 * dot(P, Q);
    out.half = hfin::to_double(B.rho) + 0.5 * w0;
  } else {
    for (int i = 0; i < n; ++i) Q[i] = horizontal[pos++] - z.x[i];
    for (int i = 0; i < n; ++i)
      if ((k.V >> i) & 1u) P[i] = horizontal[pos++] - z.y[i];
    double gB = axis_gauge(B.frame, P, rs, k.V);
    if (gB > 1.0 || axis_gauge(B.frame, Q, r, all) > 1.0) return out;
    double w0 = std::sqrt(1.0 - gB) * std::sqrt(axis_gauge(B.frame, Q, rs, Kc, true));
    out.center = z.t - 0.5 * dot(z.x, z.y) - dot(z.y, Q) - 0.5 * dot(Q, P);
    out.half = hfin::to_double(B.rho) + 0.5 * w0;
  }
  out.empty = false;
  return out;
}

namespace {

/// Midpoint rule over the box lo..hi with `cells` points per axis; calls f on each point with the cell volume.
template <class F>
std::size_t grid_sum(const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<double>& step,
                     std::size_t guard, F&& f) {
  const std::size_t d = lo.size();
  std::vector<long> count(d);
  std::vector<double> s(d);
  double total = 1, vol = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (hi[i] <= lo[i]) return 0;
    count[i] = std::max(1L, static_cast<long>(std::ceil((hi[i] - lo[i]) / step[i])));
    s[i] = (hi[i] - lo[i]) / count[i];
    total *= count[i];
    vol *= s[i];
  }
  if (total > static_cast<double>(guard))
    throw InputError("overlap grid has " + std::to_string(total) + " points, above the guard");
  std::vector<long> k(d, 0);
  std::vector<double> p(d);
  std::size_t visited = 0;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) p[i] = lo[i] + (k[i] + 0.5) * s[i];
    f(p, vol);
    ++visited;
    std::size_t i = d;
    while (i > 0 && k[i - 1] == count[i - 1] - 1) k[--i] = 0;
    if (i == 0) break;
    ++k[i - 1];
  }
  return visited;
}

}  // namespace

OverlapReport overlap_estimate(const Paraball& B, const Paraball& Bp, const ProjectionConfig& config,
                               const ArithmeticScaffold& scaffold, int cells_per_radius, std::size_t guard) {
  if (B.n() != config.n || Bp.n() != config.n) throw InputError("paraballs and configuration differ in dimension");
  if (cells_per_radius < 1) throw InputError("cells_per_radius must be positive");
  MaximalPartition part = maximal_partition(measurement_family(config, &scaffold));
  if (!frame_adapted(B.frame, part) || !frame_adapted(Bp.frame, part))
    throw PreconditionError("paraball: non-adapted frame for this configuration");
  OverlapReport rep;
  rep.cells_per_radius = cells_per_radius;
  for (const ImageKind& k : image_kinds(config, scaffold)) {
    std::vector<double> ca, ra, cb, rb;
    image_box(B, k, ca, ra);
    image_box(Bp, k, cb, rb);
    const std::size_t d = ca.size();
    OverlapRow row;
    row.name = k.name;
    auto measure = [&](const Paraball& P, const std::vector<double>& c, const std::vector<double>& r) {
      std::vector<double> lo(d), hi(d), st(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = c[i] - r[i];
        hi[i] = c[i] + r[i];
        st[i] = r[i] / cells_per_radius;
      }
      double m = 0;
      if (d == 0) {
        Interval I = image_fiber(P, k, {});
        return I.empty ? 0.0 : 2 * I.half;
      }
      rep.grid_points += grid_sum(lo, hi, st, guard, [&](const std::vector<double>& p, double vol) {
        Interval I = image_fiber(P, k, p);
        if (!I.empty) m += 2 * I.half * vol;
      });
      return m;
    };
    row.measure_a = measure(B, ca, ra);
    row.measure_b = measure(Bp, cb, rb);
    auto inter = [&](const Interval& a, const Interval& b) {
      if (a.empty || b.empty) return 0.0;
      return std::max(0.0, std::min(a.center + a.half, b.center + b.half) - std::max(a.center - a.half, b.center - b.half));
    };
    if (d == 0) {
      row.intersection = inter(image_fiber(B, k, {}), image_fiber(Bp, k, {}));
    } else {
      std::vector<double> lo(d), hi(d), st(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::max(ca[i] - ra[i], cb[i] - rb[i]);
        hi[i] = std::min(ca[i] + ra[i], cb[i] + rb[i]);
        st[i] = std::min(ra[i], rb[i]) / cells_per_radius;
      }
      rep.grid_points += grid_sum(lo, hi, st, guard, [&](const std::vector<double>& p, double vol) {
        row.intersection += inter(image_fiber(B, k, p), image_fiber(Bp, k, p)) * vol;
      });
    }
    double mx = std::max(row.measure_a, row.measure_b);
    row.normalized = mx > 0 ? std::min(1.0, row.intersection / mx) : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- covering ----

namespace {

long isqrt_ceil(long n) {
  long s = 0;
  while (s * s < n) ++s;
  return s;
}

/// Normalized grid point k * eta lies in the unit paraball at the origin.
bool grid_in_unit(const std::int32_t* k, int n, double eta) {
  double gx = 0, gy = 0;
  for (int i = 0; i < n; ++i) {
    gx += (k[i] * eta) * (k[i] * eta);
    gy += (k[n + i] * eta) * (k[n + i] * eta);
  }
  return gx <= 1.0 && gy <= 1.0 && std::abs(k[2 * n] * eta) < 1.0;
}

}  // namespace

Paraball Covering::ball(std::size_t k) const {
  if (k >= size()) throw InputError("covering: ball index out of range");
  const int n = base.n();
  ExactHPoint w = ExactHPoint::identity(n);
  const std::int32_t* g = grid.data() + k * d;
  for (int i = 0; i < n; ++i) {
    w.x[i] = eta * g[i];
    w.y[i] = eta * g[n + i];
  }
  w.t = eta * g[2 * n];
  ExactHPoint c = group_mul(base.z, dilate(base, w, base.r, base.r_star, base.rho));
  std::vector<Rational> r(n);
  for (int i = 0; i < n; ++i) r[i] = delta * base.r[i];
  return make_paraball(c, base.frame, r, delta * delta * base.rho, base.family);
}

Covering covering(const Paraball& B, const Rational& delta, const ProjectionConfig& config,
                  const ArithmeticScaffold& scaffold) {
  if (delta <= 0 || delta > 1) throw PreconditionError("covering: need 0 < delta <= 1");
  const int n = B.n();
  Covering cov;
  cov.base = B;
  cov.delta = delta;
  cov.eta = delta * delta / Rational(2 + 2 * isqrt_ceil(n));
  cov.d = 2 * n + 1;
  const double eta = hfin::to_double(cov.eta);
  const long K = static_cast<long>(std::floor(1.0 / eta));
  std::vector<std::int32_t> k(cov.d, static_cast<std::int32_t>(-K));
  double total = std::pow(2.0 * K + 1, cov.d);
  if (total > 64.0 * static_cast<double>(kDefaultCellGuard)) throw InputError("covering: grid too fine for delta");
  while (true) {
    if (grid_in_unit(k.data(), n, eta)) cov.grid.insert(cov.grid.end(), k.begin(), k.end());
    int i = cov.d - 1;
    while (i >= 0 && k[i] == K) k[i--] = static_cast<std::int32_t>(-K);
    if (i < 0) break;
    ++k[i];
  }
  for (int j = 0; j < config.M(); ++j) cov.A.push_back(config.n_j(j) + n + 2);
  for (int j = 0; j < scaffold.m_tilde; ++j) cov.A_tilde.push_back(2 * n - scaffold.k_tilde[j] + 2);

  ParaballTable t0 = paraball_measures(B, config, scaffold);
  ParaballTable t1 = paraball_measures(cov.ball(0), config, scaffold);
  auto add = [&](const AnalyticMeasure& a, const AnalyticMeasure& b, int e) {
    ScalingRow row{a.name, b.structural / a.structural, pow(delta, e), false};
    row.exact = row.ratio == row.predicted;
    cov.measure_rows.push_back(row);
  };
  add(t0.ball, t1.ball, 2 * n + 2);
  for (int j = 0; j < config.M(); ++j) add(t0.pi[j], t1.pi[j], cov.A[j]);
  for (int j = 0; j < scaffold.m_tilde; ++j) {
    add(t0.pi_tilde[j], t1.pi_tilde[j], cov.A_tilde[j]);
    add(t0.pi_tilde_star[j], t1.pi_tilde_star[j], cov.A_tilde[j]);
  }
  cov.measures_exact =
      std::all_of(cov.measure_rows.begin(), cov.measure_rows.end(), [](const ScalingRow& r) { return r.exact; });
  const double dd = hfin::to_double(delta);
  cov.count_exponent = dd < 1 ? std::log(static_cast<double>(cov.size())) / std::log(1.0 / dd) : 0.0;
  return cov;
}

CoverageAudit coverage_audit(const Paraball& B, const Covering& cov, double h) {
  const int n = B.n();
  if (cov.base.n() != n) throw InputError("coverage audit: dimension mismatch");
  CoverageAudit audit;
  audit.h = h;
  VoxelSet S = voxelize_paraball(B, h);
  audit.cells = S.size();
  const double eta = hfin::to_double(cov.eta), delta = hfin::to_double(cov.delta);
  const std::vector<double> r = to_doubles(cov.base.r), rs = to_doubles(cov.base.r_star);
  const double rho = hfin::to_double(cov.base.rho);
  HPoint zinv = group_inv(to_double(cov.base.z));
  const int d = 2 * n + 1;
  std::vector<std::int32_t> k0(d), k(d);
  std::vector<int> off(d);
  for (std::size_t c = 0; c < S.size(); ++c) {
    HPoint w = group_mul(zinv, cell_center_point(S, c));
    // normalized coordinates in the frame of the base ball
    HPoint u = HPoint::identity(n);
    for (int a = 0; a < n; ++a) {
      double px = 0, py = 0;
      for (int i = 0; i < n; ++i) {
        px += cov.base.frame(i, a) * w.x[i];
        py += cov.base.frame(i, a) * w.y[i];
      }
      u.x[a] = px / r[a];
      u.y[a] = py / rs[a];
    }
    u.t = w.t / rho;
    for (int a = 0; a < n; ++a) {
      k0[a] = static_cast<std::int32_t>(std::trunc(u.x[a] / eta));
      k0[n + a] = static_cast<std::int32_t>(std::trunc(u.y[a] / eta));
    }
    k0[2 * n] = static_cast<std::int32_t>(std::trunc(u.t / eta));
    bool covered = false;
    std::fill(off.begin(), off.end(), -1);
    while (!covered) {
      for (int a = 0; a < d; ++a) k[a] = k0[a] + off[a];
      if (grid_in_unit(k.data(), n, eta)) {
        HPoint g = HPoint::identity(n);
        for (int a = 0; a < n; ++a) {
          g.x[a] = k[a] * eta;
          g.y[a] = k[n + a] * eta;
        }
        g.t = k[2 * n] * eta;
        HPoint v = group_mul(group_inv(g), u);
        double sx = 0, sy = 0;
        for (int a = 0; a < n; ++a) {
          sx += v.x[a] * v.x[a];
          sy += v.y[a] * v.y[a];
        }
        covered = sx <= delta * delta && sy <= delta * delta && std::abs(v.t) < delta * delta;
      }
      int a = d - 1;
      while (a >= 0 && off[a] == 1) off[a--] = -1;
      if (a < 0) break;
      ++off[a];
    }
    if (!covered) ++audit.uncovered;
  }
  return audit;
}

// ---- JSON ----

nlohmann::json to_json(const Paraball& B) {
  nlohmann::json j;
  j["z"] = {{"x", to_json(B.z.x)}, {"y", to_json(B.z.y)}, {"t", to_json(B.z.t)}};
  j["r"] = to_json(B.r);
  j["r_star"] = to_json(B.r_star);
  j["rho"] = to_json(B.rho);
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : B.partition.blocks) blocks.push_back(b.str());
  j["frame_blocks"] = blocks;
  if (!B.axis_aligned()) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < B.frame.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < B.frame.cols(); ++c) row.push_back(B.frame(i, c));
      rows.push_back(row);
    }
    j["frame"] = rows;
  }
  return j;
}

Paraball paraball_from_json(const nlohmann::json& j, const std::vector<CoordSubspace>& family) {
  try {
    std::vector<Rational> r;
    for (const auto& v : j.at("r")) r.push_back(rational_from_json(v));
    const int n = static_cast<int>(r.size());
    ExactHPoint z = ExactHPoint::identity(n);
    if (j.contains("z")) {
      const auto& jz = j.at("z");
      std::vector<Rational> x, y;
      for (const auto& v : jz.at("x")) x.push_back(rational_from_json(v));
      for (const auto& v : jz.at("y")) y.push_back(rational_from_json(v));
      if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
        throw InputError("paraball center and radii differ in dimension");
      z = ExactHPoint(x, y, rational_from_json(jz.at("t")));
    }
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
    if (j.contains("frame")) {
      const auto& rows = j.at("frame");
      if (static_cast<int>(rows.size()) != n) throw InputError("frame must have n rows");
      for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw InputError("frame must have n columns");
        for (int c = 0; c < n; ++c) E(i, c) = rows[i][c].get<double>();
      }
    }
    return make_paraball(z, E, r, rational_from_json(j.at("rho")), family);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("paraball JSON: ") + e.what());
  }
}

namespace {

nlohmann::json measure_json(const AnalyticMeasure& a) {
  return {{"name", a.name},       {"structural", to_json(a.structural)}, {"form", a.form.str()},
          {"constant", a.constant}, {"value", a.value()},                 {"provenance", "analytic"}};
}

nlohmann::json row_json(const ScalingRow& r) {
  return {{"name", r.name}, {"ratio", to_json(r.ratio)}, {"predicted", to_json(r.predicted)}, {"exact", r.exact}};
}

}  // namespace

nlohmann::json to_json(const ParaballTable& t) {
  nlohmann::json j;
  j["ball"] = measure_json(t.ball);
  for (const char* key : {"pi", "pi_tilde", "pi_tilde_star"}) j[key] = nlohmann::json::array();
  for (const auto& a : t.pi) j["pi"].push_back(measure_json(a));
  for (const auto& a : t.pi_tilde) j["pi_tilde"].push_back(measure_json(a));
  for (const auto& a : t.pi_tilde_star) j["pi_tilde_star"].push_back(measure_json(a));
  return j;
}

nlohmann::json to_json(const ScalingReport& s) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : s.rows) j["rows"].push_back(row_json(r));
  j["all_exact"] = s.all_exact;
  j["quasi_form"] = s.quasi_form.str();
  j["quasi_invariant"] = s.quasi_invariant;
  j["quasi_before"] = s.quasi_before;
  j["quasi_after"] = s.quasi_after;
  j["provenance"] = "exact";
  return j;
}

nlohmann::json to_json(const OverlapReport& o) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : o.rows)
    j["rows"].push_back({{"name", r.name},
                         {"measure_a", r.measure_a},
                         {"measure_b", r.measure_b},
                         {"intersection", r.intersection},
                         {"normalized", r.normalized}});
  j["grid_points"] = o.grid_points;
  j["provenance"] = "grid(" + std::to_string(o.cells_per_radius) + " cells per radius)";
  return j;
}

nlohmann::json to_json(const Covering& c, std::size_t max_balls) {
  nlohmann::json j;
  j["delta"] = to_json(c.delta);
  j["eta"] = to_json(c.eta);
  j["count"] = c.size();
  j["count_exponent"] = c.count_exponent;
  j["A"] = c.A;
  j["A_tilde"] = c.A_tilde;
  j["measure_rows"] = nlohmann::json::array();
  for (const auto& r : c.measure_rows) j["measure_rows"].push_back(row_json(r));
  j["measures_exact"] = c.measures_exact;
  if (max_balls > 0) {
    j["balls"] = nlohmann::json::array();
    for (std::size_t k = 0; k < std::min(max_balls, c.size()); ++k) j["balls"].push_back(to_json(c.ball(k)));
  }
  return j;
}

}  // namespace hfin
