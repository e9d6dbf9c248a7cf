#include "hfin/heisenberg.hpp"

#include <algorithm>
#include <random>

#include <Eigen/Dense>
#include <bit>
#include <cmath>

namespace hfin {

int VerticalMap::target_dim() const { return std::popcount(keep_x) + std::popcount(keep_y) + 1; }

namespace {
Mask all_of(int n) { return CoordSubspace::full(n).mask; }
}  // namespace

VerticalMap pi_j_map(const ProjectionConfig& config, int j, bool vertical_form) {
  if (j < 0 || j >= config.M())
    throw InputError("projection index " + std::to_string(j + 1) + " outside 1.." + std::to_string(config.M()));
  const Mask full = all_of(config.n);
  VerticalMap f;
  f.n = config.n;
  f.shear = vertical_form ? config.K(j).mask : full;
  f.name = std::string(vertical_form ? "pi_vp_" : "pi_") + std::to_string(j + 1);
  if (config.x_side(j)) {
    f.keep_x = config.V[j].mask;
    f.keep_y = full;
    f.sign = 1;
  } else {
    f.keep_x = full;
    f.keep_y = config.V[j].mask;
    f.sign = -1;
  }
  return f;
}

VerticalMap pi_map(int n) { return {n, 0, all_of(n), all_of(n), 1, "pi"}; }

VerticalMap pi_star_map(int n) { return {n, all_of(n), 0, all_of(n), -1, "pi_star"}; }

namespace {
void check_tilde_index(const ArithmeticScaffold& s, int j) {
  if (s.degenerate) throw PreconditionError("auxiliary projections need a non-degenerate scaffold");
  if (j < 0 || j >= s.m_tilde)
    throw InputError("auxiliary index " + std::to_string(j + 1) + " outside 1.." + std::to_string(s.m_tilde));
}
}  // namespace

VerticalMap pi_tilde_map(const ArithmeticScaffold& s, int j) {
  check_tilde_index(s, j);
  return {s.n, s.p_image(j).mask, all_of(s.n), all_of(s.n), 1, "pi_tilde_" + std::to_string(j + 1)};
}

VerticalMap pi_tilde_star_map(const ArithmeticScaffold& s, int j) {
  check_tilde_index(s, j);
  return {s.n, all_of(s.n), s.p_image(j).mask, all_of(s.n), -1, "pi_tilde_star_" + std::to_string(j + 1)};
}

InflationShape InflationShape::from(const ArithmeticScaffold& s) {
  if (s.degenerate) throw PreconditionError("inflation map needs a non-degenerate scaffold");
  return {s.n, s.order, s.k_tilde, s.q_dbl_tilde};
}

int InflationShape::blocks() const {
  std::int64_t b = 0;
  for (auto q : q_dbl_tilde) b += q;
  return static_cast<int>(b);
}

int InflationShape::points() const {
  std::int64_t p = 0;
  for (int j = 0; j < m_tilde(); ++j) p += k_tilde[j] * q_dbl_tilde[j];
  return static_cast<int>(p);
}

int InflationShape::block_level(int b) const {
  for (int j = 0; j < m_tilde(); ++j) {
    if (b < q_dbl_tilde[j]) return j;
    b -= static_cast<int>(q_dbl_tilde[j]);
  }
  throw InputError("block index out of range");
}

int InflationShape::block_index(int j, int l) const {
  int b = 0;
  for (int r = 0; r < j; ++r) b += static_cast<int>(q_dbl_tilde[r]);
  return b + l;
}

namespace {
void check_input(const InflationInput& in, const InflationShape& shape) {
  auto ok = [&](const std::vector<std::vector<double>>& v, int count) {
    if (static_cast<int>(v.size()) != count) return false;
    for (const auto& w : v)
      if (static_cast<int>(w.size()) != shape.n) return false;
    return true;
  };
  if (!ok(in.s, shape.blocks())) throw InputError("inflation map: s must hold one n-vector per block (j,l)");
  if (!ok(in.u, shape.points()) || !ok(in.v, shape.points()))
    throw InputError("inflation map: u and v must hold one n-vector per point (j,l,a)");
}
}  // namespace

std::vector<std::vector<double>> xi_embedding(const std::vector<std::vector<double>>& xi, const InflationShape& shape) {
  if (static_cast<int>(xi.size()) != shape.blocks()) throw InputError("xi must hold one vector per block");
  std::vector<std::vector<double>> s(shape.blocks(), std::vector<double>(shape.n, 0.0));
  for (int j = shape.m_tilde() - 1; j >= 0; --j) {
    const int k = shape.k_tilde[j];
    for (int l = 0; l < shape.q_dbl_tilde[j]; ++l) {
      const int b = shape.block_index(j, l);
      if (static_cast<int>(xi[b].size()) != k) throw InputError("xi^{j,l} must have k~_j entries");
      for (int pos = 0; pos < k; ++pos) s[b][shape.order[pos]] = xi[b][pos];
      if (j + 1 < shape.m_tilde()) {
        const auto& anchor = s[shape.block_index(j + 1, 0)];
        for (int pos = k; pos < shape.n; ++pos) s[b][shape.order[pos]] = anchor[shape.order[pos]];
      }
    }
  }
  return s;
}

std::vector<HPoint> inflation_map(const HPoint& z0, const InflationInput& in, const InflationShape& shape) {
  check_input(in, shape);
  if (z0.n() != shape.n) throw InputError("inflation map: base point dimension mismatch");
  std::vector<HPoint> out;
  out.reserve(shape.points());
  int point = 0;
  for (int b = 0; b < shape.blocks(); ++b) {
    const int k = shape.k_tilde[shape.block_level(b)];
    HPoint base = flow_X(in.s[b], z0);
    for (int a = 0; a < k; ++a, ++point) out.push_back(flow_X(in.v[point], flow_Y(in.u[point], base)));
  }
  return out;
}

namespace {
/// Leading-coordinate matrix of block b, and the product of its column norms.
Eigen::MatrixXd leading_block(const InflationInput& in, const InflationShape& shape, int b, int first_point) {
  const int k = shape.k_tilde[shape.block_level(b)];
  Eigen::MatrixXd U(k, k);
  for (int a = 0; a < k; ++a)
    for (int pos = 0; pos < k; ++pos) U(pos, a) = in.u[first_point + a][shape.order[pos]];
  return U;
}
}  // namespace

double jacobian_product(const InflationInput& in, const InflationShape& shape) {
  check_input(in, shape);
  double prod = 1.0;
  int point = 0;
  for (int b = 0; b < shape.blocks(); ++b) {
    auto U = leading_block(in, shape, b, point);
    prod *= U.determinant();
    point += static_cast<int>(U.cols());
  }
  return prod;
}

JacobianCheck jacobian_check(const HPoint& z0, const std::vector<std::vector<double>>& xi, const InflationInput& uv,
                             const InflationShape& shape, double h, double tol) {
  const int n = shape.n;
  const int P = shape.points();
  const int D = shape.param_dim();
  // Parameter layout: xi blocks, then u, then v.
  std::vector<double> params;
  params.reserve(D);
  for (const auto& x : xi) params.insert(params.end(), x.begin(), x.end());
  if (static_cast<int>(params.size()) != P) throw InputError("xi has the wrong total size");
  for (const auto& u : uv.u) params.insert(params.end(), u.begin(), u.end());
  for (const auto& v : uv.v) params.insert(params.end(), v.begin(), v.end());
  if (static_cast<int>(params.size()) != D) throw InputError("u/v have the wrong total size");

  auto eval = [&](const std::vector<double>& p) {
    std::vector<std::vector<double>> x;
    std::size_t off = 0;
    for (int b = 0; b < shape.blocks(); ++b) {
      const int k = shape.k_tilde[shape.block_level(b)];
      x.emplace_back(p.begin() + off, p.begin() + off + k);
      off += k;
    }
    InflationInput in;
    in.s = xi_embedding(x, shape);
    for (int q = 0; q < P; ++q, off += n) in.u.emplace_back(p.begin() + off, p.begin() + off + n);
    for (int q = 0; q < P; ++q, off += n) in.v.emplace_back(p.begin() + off, p.begin() + off + n);
    Eigen::VectorXd y(D);
    int r = 0;
    for (const auto& z : inflation_map(z0, in, shape)) {
      for (double c : z.x) y(r++) = c;
      for (double c : z.y) y(r++) = c;
      y(r++) = z.t;
    }
    return y;
  };

  Eigen::MatrixXd J(D, D);
  std::vector<double> p = params;
  for (int c = 0; c < D; ++c) {
    const double keep = p[c];
    p[c] = keep + h;
    Eigen::VectorXd fp = eval(p);
    p[c] = keep - h;
    Eigen::VectorXd fm = eval(p);
    p[c] = keep;
    J.col(c) = (fp - fm) / (2 * h);
  }

  JacobianCheck out;
  out.fd_det = J.fullPivLu().determinant();
  InflationInput in = uv;
  std::vector<std::vector<double>> x = xi;
  in.s = xi_embedding(x, shape);
  out.analytic = jacobian_product(in, shape);
  out.conditioning = 1.0;
  int point = 0;
  for (int b = 0; b < shape.blocks(); ++b) {
    auto U = leading_block(in, shape, b, point);
    double norms = 1.0;
    for (int a = 0; a < U.cols(); ++a) norms *= U.col(a).norm();
    const double ratio = norms > 0 ? std::abs(U.determinant()) / norms : 0.0;
    out.conditioning = std::min(out.conditioning, ratio);
    point += static_cast<int>(U.cols());
  }
  const double a = std::abs(out.analytic);
  out.rel_err = a > 0 ? std::abs(std::abs(out.fd_det) - a) / a : std::abs(out.fd_det);
  out.near_singular = out.conditioning < 1e-3;
  out.pass = out.rel_err <= tol;
  return out;
}

JacobianSweep jacobian_sweep(const ArithmeticScaffold& s, int trials, std::uint64_t seed, double h, double tol) {
  InflationShape shape = InflationShape::from(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto vec = [&](int k) {
    std::vector<double> v(k);
    for (auto& c : v) c = U(rng);
    return v;
  };
  JacobianSweep sw;
  sw.trials = trials;
  for (int t = 0; t < trials; ++t) {
    HPoint z0(vec(shape.n), vec(shape.n), U(rng));
    std::vector<std::vector<double>> xi;
    for (int b = 0; b < shape.blocks(); ++b) xi.push_back(vec(shape.k_tilde[shape.block_level(b)]));
    InflationInput in;
    for (int q = 0; q < shape.points(); ++q) in.u.push_back(vec(shape.n));
    for (int q = 0; q < shape.points(); ++q) in.v.push_back(vec(shape.n));
    JacobianCheck c = jacobian_check(z0, xi, in, shape, h, tol);
    if (c.pass) ++sw.passes;
    else if (c.near_singular) ++sw.flagged_near_singular;
    else ++sw.unexplained;
    if (!c.near_singular) sw.max_rel_err_regular = std::max(sw.max_rel_err_regular, c.rel_err);
    sw.results.push_back(c);
  }
  return sw;
}

}  // namespace hfin
