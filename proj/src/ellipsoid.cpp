#include "hfin/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "hfin/errors.hpp"

namespace hfin {

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double Ellipsoid::volume() const { return unit_ball_volume(d()) * radii.prod(); }

double Ellipsoid::gauge(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u = frame.transpose() * (x - center);
  return (u.array() / radii.array()).square().sum();
}

bool Ellipsoid::adapted_to(const std::vector<CoordSubspace>& blocks, double tol) const {
  for (int a = 0; a < frame.cols(); ++a) {
    int owner = -1;
    for (int i = 0; i < frame.rows(); ++i) {
      if (std::abs(frame(i, a)) <= tol) continue;
      int b = -1;
      for (std::size_t k = 0; k < blocks.size(); ++k)
        if (blocks[k].contains(i)) b = static_cast<int>(k);
      if (owner >= 0 && b != owner) return false;
      owner = b;
    }
  }
  return true;
}

namespace {

Ellipsoid from_shape(const Eigen::VectorXd& c, const Eigen::MatrixXd& shape) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  Ellipsoid e;
  e.center = c;
  e.frame = es.eigenvectors();
  e.radii = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return e;
}

double max_gauge(const Eigen::MatrixXd& P, const Eigen::VectorXd& c, const Eigen::MatrixXd& shape_inv) {
  double m = 0;
  for (int i = 0; i < P.cols(); ++i) {
    Eigen::VectorXd v = P.col(i) - c;
    m = std::max(m, v.dot(shape_inv * v));
  }
  return m;
}

}  // namespace

Ellipsoid minimum_volume_ellipsoid(const Eigen::MatrixXd& P, double tol, int max_iter) {
  const int d = static_cast<int>(P.rows());
  const int N = static_cast<int>(P.cols());
  if (N == 0) throw InputError("minimum_volume_ellipsoid: no points");
  Eigen::MatrixXd Q(d + 1, N);
  Q.topRows(d) = P;
  Q.row(d).setOnes();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(N, 1.0 / N);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd X = Q * u.asDiagonal() * Q.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(X);
    Eigen::VectorXd M = (Q.array() * ldlt.solve(Q).array()).colwise().sum().transpose();
    Eigen::Index j;
    double mx = M.maxCoeff(&j);
    double step = (mx - d - 1) / ((d + 1) * (mx - 1));
    if (step <= tol) break;
    u *= 1 - step;
    u(j) += step;
  }
  Eigen::VectorXd c = P * u;
  Eigen::MatrixXd S = P * u.asDiagonal() * P.transpose() - c * c.transpose();
  Eigen::MatrixXd shape = d * S;  // (x-c)^T shape^{-1} (x-c) <= 1
  double g = max_gauge(P, c, shape.inverse());
  if (!(g > 0) || !std::isfinite(g)) throw InputError("minimum_volume_ellipsoid: points span a lower-dimensional set");
  return from_shape(c, shape * g);
}

Eigen::MatrixXd boundary_corners(const VoxelSet& S) {
  const int d = S.d();
  if (d == 0 || S.empty()) throw InputError("boundary_corners needs a nonempty set in positive dimension");
  if (d > 12) throw InputError("boundary_corners: dimension above 12");
  std::set<std::vector<std::int32_t>> corners;
  std::vector<std::int32_t> nb(d);
  for (std::size_t k = 0; k < S.size(); ++k) {
    const std::int32_t* c = S.cell(k);
    bool boundary = false;
    for (int a = 0; a < d && !boundary; ++a)
      for (int s : {-1, 1}) {
        std::copy(c, c + d, nb.begin());
        nb[a] += s;
        if (!S.contains(nb.data())) boundary = true;
      }
    if (!boundary) continue;
    for (unsigned bits = 0; bits < (1u << d); ++bits) {
      std::vector<std::int32_t> v(c, c + d);
      for (int a = 0; a < d; ++a) v[a] += (bits >> a) & 1u;
      corners.insert(std::move(v));
    }
  }
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(corners.size()));
  Eigen::Index col = 0;
  for (const auto& v : corners) {
    for (int a = 0; a < d; ++a) P(a, col) = v[a] * S.h();
    ++col;
  }
  return P;
}

EllipsoidApproximation ellipsoid_approximation(const VoxelSet& omega, const std::vector<CoordSubspace>& images, double eps) {
  if (omega.empty()) throw PreconditionError("ellipsoid approximation needs a nonempty set");
  if (!(eps > 0 && eps <= 1)) throw InputError("eps must lie in (0,1]");
  const int d = omega.d();
  for (const auto& w : images)
    if (w.n != d) throw InputError("projection image lives in a different dimension");
  EllipsoidApproximation a;
  a.eps = eps;
  a.partition = images.empty() ? maximal_partition({CoordSubspace::full(d)}) : maximal_partition(images);
  Eigen::MatrixXd P = boundary_corners(omega);
  a.john = minimum_volume_ellipsoid(P);
  Eigen::MatrixXd shape = a.john.frame * a.john.radii.array().square().matrix().asDiagonal() * a.john.frame.transpose();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (a.partition.block_of(i) == a.partition.block_of(j)) block(i, j) = shape(i, j);
  a.adapt_factor = max_gauge(P, a.john.center, block.inverse());
  block *= a.adapt_factor;
  // eigenvectors of a block-diagonal matrix need not respect the blocks when eigenvalues repeat
  Ellipsoid e;
  e.center = a.john.center;
  e.frame = Eigen::MatrixXd::Zero(d, d);
  e.radii = Eigen::VectorXd::Zero(d);
  int col = 0;
  for (const auto& b : a.partition.blocks) {
    auto idx = b.indices();
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (int r = 0; r < k; ++r)
      for (int s = 0; s < k; ++s) sub(r, s) = block(idx[r], idx[s]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    for (int s = 0; s < k; ++s, ++col) {
      for (int r = 0; r < k; ++r) e.frame(idx[r], col) = es.eigenvectors()(r, s);
      e.radii(col) = std::sqrt(std::max(es.eigenvalues()(s), 0.0));
    }
  }
  a.adapted = e;
  a.contains_all = true;
  for (int i = 0; i < P.cols(); ++i) a.contains_all = a.contains_all && e.contains(P.col(i), 1e-7);
  a.volume_ratio = e.volume() / omega.measure();
  a.kappa_exponent = eps < 1 ? std::log(a.volume_ratio) / std::log(1 / eps) : 0;
  return a;
}

double convex_fiber_ratio(const VoxelSet& omega, Mask l_image, Mask U) {
  if ((U & ~l_image) != 0) throw InputError("U must lie in the image of l");
  if (omega.empty()) throw PreconditionError("convex_fiber_ratio needs a nonempty set");
  const Mask full = CoordSubspace::full(omega.d()).mask;
  double lw = static_cast<double>(pushforward_coordinate(omega, l_image).size());
  double plw = static_cast<double>(pushforward_coordinate(omega, l_image & ~U).size());
  double w = static_cast<double>(omega.size());
  double pw = static_cast<double>(pushforward_coordinate(omega, full & ~U).size());
  return (lw / plw) / (w / pw);
}

namespace {

double mass_in_box(const VoxelSet& S, const std::vector<double>& b) {
  std::size_t c = 0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    bool in = true;
    for (int a = 0; a < S.d() && in; ++a) in = std::abs(S.center(k, a)) <= b[a];
    c += in;
  }
  return static_cast<double>(c) * std::pow(S.h(), S.d());
}

double box_volume(const std::vector<double>& b) {
  double v = 1;
  for (double x : b) v *= 2 * x;
  return v;
}

}  // namespace

BalancedCore balanced_core(const VoxelSet& S, double eta, double c, int depth) {
  if (S.empty() || S.d() == 0) throw PreconditionError("balanced_core needs a nonempty set in positive dimension");
  const int d = S.d();
  const double h = S.h();
  BalancedCore core;
  core.eta = eta > 0 ? eta : 1.0 / (2 * d);
  core.c = c;
  std::vector<double> b(d, 0.0);
  for (std::size_t k = 0; k < S.size(); ++k)
    for (int a = 0; a < d; ++a) {
      double lo = S.cell(k)[a] * h;
      b[a] = std::max({b[a], std::abs(lo), std::abs(lo + h)});
    }
  const double total = S.measure();
  auto required = [&](const std::vector<double>& box) {
    return core.c * std::pow(total / box_volume(box), core.eta) * total;
  };
  for (int guard = 0; guard < 64 * d; ++guard) {
    double inside = mass_in_box(S, b);
    double need = required(b);
    int best = -1;
    double best_comp = 0;
    for (int a = 0; a < d; ++a) {
      if (b[a] < h) continue;
      auto nb = b;
      nb[a] /= 2;
      double comp = inside - mass_in_box(S, nb);
      if (comp < need && (best < 0 || comp < best_comp)) {
        best = a;
        best_comp = comp;
      }
    }
    if (best < 0) break;
    b[best] /= 2;
    ++core.shrink_steps;
  }
  core.half_width = b;
  core.volume = box_volume(b);
  const double inside = mass_in_box(S, b);
  core.kept_fraction = inside / total;
  core.required = required(b);
  while (depth > 1 && std::pow(depth + 1.0, d) > 4096) --depth;
  core.min_complement = inside;
  std::vector<int> e(d, 0);
  while (true) {
    int i = 0;
    while (i < d && e[i] == depth) e[i++] = 0;
    if (i == d) break;
    ++e[i];
    auto nb = b;
    for (int a = 0; a < d; ++a) nb[a] = b[a] * std::ldexp(1.0, -e[a]);
    core.min_complement = std::min(core.min_complement, inside - mass_in_box(S, nb));
  }
  core.certified = core.min_complement >= core.required;
  return core;
}

DetIntegral det_integral(const VoxelSet& S, int k, std::size_t samples, std::uint64_t seed, bool force_mc) {
  const int d = S.d();
  if (k < 1 || k > d) throw InputError("det_integral: k must lie in 1..d");
  if (S.empty()) return {k, 0.0, 0.0, "exact"};
  const double h = S.h();
  DetIntegral r;
  r.k = k;
  if (k == 1 && !force_mc) {
    auto F = [](double x) { return x * std::abs(x) / 2; };
    double sum = 0;
    for (std::size_t c = 0; c < S.size(); ++c) {
      double a = S.cell(c)[0] * h;
      sum += F(a + h) - F(a);
    }
    r.value = sum * std::pow(h, d - 1);
    r.provenance = "exact";
    return r;
  }
  if (samples < 2) throw InputError("det_integral: at least two samples are needed");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, S.size() - 1);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  double mean = 0, m2 = 0;
  Eigen::MatrixXd U(k, k);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int col = 0; col < k; ++col) {
      std::size_t c = pick(rng);
      for (int row = 0; row < k; ++row) U(row, col) = (S.cell(c)[row] + jitter(rng)) * h;
    }
    double v = std::abs(U.determinant());
    double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  double scale = std::pow(S.measure(), k);
  r.value = scale * mean;
  r.std_error = scale * std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  r.provenance = "mc(" + std::to_string(samples) + ", " + std::to_string(seed) + ")";
  return r;
}

DetCertificate det_certificate(const VoxelSet& S, int k, std::size_t samples, std::uint64_t seed) {
  DetCertificate c;
  c.core = balanced_core(S);
  c.integral = det_integral(S, k, samples, seed);
  double pc = 1;
  for (int a = 0; a < k; ++a) pc *= 2 * c.core.half_width[a];
  const double lambda = std::max(c.core.min_complement, 0.0);
  c.lower_bound = std::pow(0.5 * lambda / std::sqrt(2.0), k) * pc / std::pow(2.0, k);
  double total = S.measure();
  double base = std::pow(std::pow(total / c.core.volume, c.core.eta) * total, k) * pc;
  c.measured_c = c.integral.value / base;
  c.holds = c.lower_bound <= c.integral.value + 3 * c.integral.std_error;
  return c;
}

nlohmann::json to_json(const Ellipsoid& e) {
  nlohmann::json axes = nlohmann::json::array();
  for (int a = 0; a < e.frame.cols(); ++a) {
    std::vector<double> col(e.frame.col(a).data(), e.frame.col(a).data() + e.frame.rows());
    axes.push_back(col);
  }
  return {{"center", std::vector<double>(e.center.data(), e.center.data() + e.center.size())},
          {"axes", axes},
          {"radii", std::vector<double>(e.radii.data(), e.radii.data() + e.radii.size())},
          {"volume", e.volume()}};
}

nlohmann::json to_json(const EllipsoidApproximation& a) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : a.partition.blocks) blocks.push_back(b.str());
  return {{"partition", blocks},       {"john", to_json(a.john)},
          {"adapted", to_json(a.adapted)}, {"adapt_factor", a.adapt_factor},
          {"contains_all", a.contains_all}, {"volume_ratio", a.volume_ratio},
          {"eps", a.eps},                  {"kappa_exponent", a.kappa_exponent}};
}

nlohmann::json to_json(const BalancedCore& c) {
  return {{"half_width", c.half_width},   {"eta", c.eta},           {"c", c.c},
          {"volume", c.volume},           {"kept_fraction", c.kept_fraction},
          {"min_complement", c.min_complement}, {"required", c.required},
          {"certified", c.certified},     {"shrink_steps", c.shrink_steps}};
}

nlohmann::json to_json(const DetCertificate& c) {
  return {{"core", to_json(c.core)},
          {"k", c.integral.k},
          {"integral", c.integral.value},
          {"std_error", c.integral.std_error},
          {"provenance", c.integral.provenance},
          {"lower_bound", c.lower_bound},
          {"measured_c", c.measured_c},
          {"holds", c.holds}};
}

}  // namespace hfin
