#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfin/errors.hpp"
#include "hfin/exponents.hpp"
#include "hfin/rational.hpp"
#include "hfin/subspace.hpp"

namespace hfin {

/// Point (x, y, t) of the Heisenberg group H^n.
template <class T>
struct BasicHPoint {
  std::vector<T> x, y;
  T t{};

  BasicHPoint() = default;
  BasicHPoint(std::vector<T> x_, std::vector<T> y_, T t_) : x(std::move(x_)), y(std::move(y_)), t(std::move(t_)) {
    if (x.size() != y.size()) throw InputError("x and y have different lengths");
  }
  static BasicHPoint identity(int n) { return {std::vector<T>(n, T(0)), std::vector<T>(n, T(0)), T(0)}; }
  int n() const { return static_cast<int>(x.size()); }
  bool operator==(const BasicHPoint&) const = default;
};

using HPoint = BasicHPoint<double>;
using ExactHPoint = BasicHPoint<Rational>;

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
BasicHPoint<T> group_mul(const BasicHPoint<T>& a, const BasicHPoint<T>& b) {
  if (a.n() != b.n()) throw InputError("group_mul: dimension mismatch");
  BasicHPoint<T> c = a;
  for (int i = 0; i < a.n(); ++i) {
    c.x[i] += b.x[i];
    c.y[i] += b.y[i];
  }
  c.t = a.t + b.t + (dot(a.x, b.y) - dot(a.y, b.x)) / T(2);
  return c;
}

template <class T>
BasicHPoint<T> group_inv(const BasicHPoint<T>& a) {
  BasicHPoint<T> c = a;
  for (auto& v : c.x) v = -v;
  for (auto& v : c.y) v = -v;
  c.t = -a.t;
  return c;
}

/// z . ((x,y) restricted to V-perp, 0)^{-1}; V = Vx (+) Vy inside R^{2n}. Components in V-perp come out zero.
template <class T>
BasicHPoint<T> vertical_projection(Mask Vx, Mask Vy, const BasicHPoint<T>& z) {
  BasicHPoint<T> perp = BasicHPoint<T>::identity(z.n());
  for (int i = 0; i < z.n(); ++i) {
    if (!((Vx >> i) & 1u)) perp.x[i] = z.x[i];
    if (!((Vy >> i) & 1u)) perp.y[i] = z.y[i];
  }
  return group_mul(z, group_inv(perp));
}

/// (x_A, y_B, t + sign/2 * x_S . y_S): every projection used here has this shape.
struct VerticalMap {
  int n = 0;
  Mask keep_x = 0;
  Mask keep_y = 0;
  Mask shear = 0;
  int sign = 1;
  std::string name;

  int target_dim() const;
  /// Kept x coordinates, then kept y coordinates, then the vertical coordinate.
  template <class T>
  std::vector<T> apply(const BasicHPoint<T>& z) const {
    if (z.n() != n) throw InputError("projection " + name + ": dimension mismatch");
    std::vector<T> out;
    T s(0);
    for (int i = 0; i < n; ++i) {
      if ((keep_x >> i) & 1u) out.push_back(z.x[i]);
      if ((shear >> i) & 1u) s += z.x[i] * z.y[i];
    }
    for (int i = 0; i < n; ++i)
      if ((keep_y >> i) & 1u) out.push_back(z.y[i]);
    T half = s / T(2);
    T t = z.t;
    if (sign > 0) t += half; else t -= half;
    out.push_back(t);
    return out;
  }
};

/// pi_j in sheared form (shear x.y) or vertical-projection form (shear over K_j); j is 0-based.
VerticalMap pi_j_map(const ProjectionConfig& config, int j, bool vertical_form = false);
VerticalMap pi_map(int n);
VerticalMap pi_star_map(int n);
VerticalMap pi_tilde_map(const ArithmeticScaffold& s, int j);
VerticalMap pi_tilde_star_map(const ArithmeticScaffold& s, int j);

template <class T>
std::vector<T> pi_j(const ProjectionConfig& c, int j, const BasicHPoint<T>& z) { return pi_j_map(c, j).apply(z); }
template <class T>
std::vector<T> pi_j_vp(const ProjectionConfig& c, int j, const BasicHPoint<T>& z) { return pi_j_map(c, j, true).apply(z); }

template <class T>
BasicHPoint<T> flow_X(const std::vector<T>& s, const BasicHPoint<T>& z) {
  if (static_cast<int>(s.size()) != z.n()) throw InputError("flow_X: dimension mismatch");
  BasicHPoint<T> w = z;
  for (int i = 0; i < z.n(); ++i) w.x[i] += s[i];
  w.t = z.t - dot(s, z.y) / T(2);
  return w;
}

template <class T>
BasicHPoint<T> flow_Y(const std::vector<T>& s, const BasicHPoint<T>& z) {
  if (static_cast<int>(s.size()) != z.n()) throw InputError("flow_Y: dimension mismatch");
  BasicHPoint<T> w = z;
  for (int i = 0; i < z.n(); ++i) w.y[i] += s[i];
  w.t = z.t + dot(z.x, s) / T(2);
  return w;
}

/// Applies X(s_1), then Y(s_2), then X(s_3), ...
template <class T>
BasicHPoint<T> compound_flow(const std::vector<std::vector<T>>& s, const BasicHPoint<T>& z) {
  BasicHPoint<T> w = z;
  for (std::size_t k = 0; k < s.size(); ++k) w = k % 2 == 0 ? flow_X(s[k], w) : flow_Y(s[k], w);
  return w;
}

/// Index structure of the inflation map: blocks (j,l), points (j,l,a).
struct InflationShape {
  int n = 0;
  std::vector<int> order;  ///< coordinate order; leading coordinates come first
  std::vector<int> k_tilde;
  std::vector<std::int64_t> q_dbl_tilde;

  static InflationShape from(const ArithmeticScaffold& s);
  int m_tilde() const { return static_cast<int>(k_tilde.size()); }
  int blocks() const;
  int points() const;  ///< N = sum k~_j q~~_j
  int block_level(int b) const;
  int block_index(int j, int l) const;
  int xi_dim() const { return points(); }
  int param_dim() const { return points() * (2 * n + 1); }
};

struct InflationInput {
  std::vector<std::vector<double>> s;  ///< per block, n entries
  std::vector<std::vector<double>> u;  ///< per point, n entries
  std::vector<std::vector<double>> v;  ///< per point, n entries
};

/// s^{j,l} from the free parameters: level j keeps its leading k~_j coordinates free and
/// takes the rest from P_j(s^{j+1,1}); the top level is unconstrained.
std::vector<std::vector<double>> xi_embedding(const std::vector<std::vector<double>>& xi, const InflationShape& shape);

std::vector<HPoint> inflation_map(const HPoint& z0, const InflationInput& in, const InflationShape& shape);

/// prod over blocks of det(u^{j,l}), u^{j,l} the k~_j x k~_j matrix of leading coordinates.
double jacobian_product(const InflationInput& in, const InflationShape& shape);

struct JacobianCheck {
  double fd_det = 0;
  double analytic = 0;
  double rel_err = 0;
  double conditioning = 0;  ///< smallest Hadamard ratio |det| / prod |columns| over blocks
  bool near_singular = false;
  bool pass = false;
};

/// Central-difference determinant of (xi, u, v) -> Psi compared with jacobian_product.
JacobianCheck jacobian_check(const HPoint& z0, const std::vector<std::vector<double>>& xi, const InflationInput& uv,
                             const InflationShape& shape, double h = 1e-5, double tol = 1e-6);

struct JacobianSweep {
  int trials = 0;
  int passes = 0;
  int flagged_near_singular = 0;  ///< failures whose blocks are near-singular
  int unexplained = 0;            ///< failures on well-conditioned inputs
  double max_rel_err_regular = 0;
  std::vector<JacobianCheck> results;
};

/// Uniform [-1,1] inputs from std::mt19937_64(seed).
JacobianSweep jacobian_sweep(const ArithmeticScaffold& s, int trials, std::uint64_t seed, double h = 1e-5,
                             double tol = 1e-6);

}  // namespace hfin
