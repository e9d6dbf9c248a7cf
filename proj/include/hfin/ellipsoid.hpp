#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

/// {center + frame * diag(radii) * u : |u| <= 1}; frame columns are orthonormal axes.
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd frame;
  Eigen::VectorXd radii;

  int d() const { return static_cast<int>(center.size()); }
  double volume() const;
  /// (x - c)^T Q^{-1} (x - c), which is <= 1 inside.
  double gauge(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const { return gauge(x) <= 1 + tol; }
  /// Every axis lies in a single block of the partition.
  bool adapted_to(const std::vector<CoordSubspace>& blocks, double tol = 1e-9) const;
};

double unit_ball_volume(int d);

/// Khachiyan's algorithm for the minimum-volume enclosing ellipsoid of the columns of `points`.
/// The result is rescaled so that every point lies inside.
Ellipsoid minimum_volume_ellipsoid(const Eigen::MatrixXd& points, double tol = 1e-7, int max_iter = 100000);

/// Corners of the boundary cells of S: the candidate extreme points of its convex hull.
Eigen::MatrixXd boundary_corners(const VoxelSet& S);

struct EllipsoidApproximation {
  MaximalPartition partition;
  Ellipsoid john;        ///< unconstrained minimum-volume ellipsoid
  Ellipsoid adapted;     ///< block-diagonal shape, still containing every corner
  double adapt_factor = 1;   ///< rescaling applied to the block-diagonal part of the John shape
  bool contains_all = false;
  double volume_ratio = 0;   ///< |adapted| / |omega|
  double eps = 0;
  double kappa_exponent = 0; ///< C with volume_ratio = eps^{-C}
};

/// Ellipsoid adapted to the maximal partition of `images` containing the voxel set.
EllipsoidApproximation ellipsoid_approximation(const VoxelSet& omega, const std::vector<CoordSubspace>& images, double eps);

/// |l(omega)| / |P(l(omega))| divided by |omega| / |P(omega)|, where P drops the axes in U and U lies in l's image.
double convex_fiber_ratio(const VoxelSet& omega, Mask l_image, Mask U);

/// Centered box [-b, b] approximating S from inside the dichotomy: halving any side leaves mass outside.
struct BalancedCore {
  std::vector<double> half_width;
  double eta = 0;
  double c = 0;
  double volume = 0;
  double kept_fraction = 0;     ///< |S cap C| / |S|
  double min_complement = 0;    ///< min over the dyadic family of |S cap (C \ C')|
  double required = 0;          ///< c (|S| / |C|)^eta |S|
  bool certified = false;
  int shrink_steps = 0;
};

/// Greedy dyadic shrinking from the smallest centered box containing S; eta defaults to 1/(2d).
BalancedCore balanced_core(const VoxelSet& S, double eta = 0, double c = 0.1, int depth = 6);

struct DetIntegral {
  int k = 0;
  double value = 0;        ///< integral over S^k of |det u'|
  double std_error = 0;    ///< 0 for exact evaluations
  std::string provenance;  ///< "exact" or "mc(n, seed)"
};

/// Integral over S^k of |det| of the leading k x k block; exact on the grid for k = 1, Monte Carlo otherwise.
DetIntegral det_integral(const VoxelSet& S, int k, std::size_t samples = 100000, std::uint64_t seed = 1,
                         bool force_mc = false);

struct DetCertificate {
  BalancedCore core;
  DetIntegral integral;
  double lower_bound = 0;  ///< (delta lambda / sqrt 2)^k |P(C)| / 2^k with delta = 1/2
  double measured_c = 0;   ///< integral / [((|S|/|C|)^eta |S|)^k |P(C)|]
  bool holds = false;      ///< lower_bound <= value + 3 std_error
};

DetCertificate det_certificate(const VoxelSet& S, int k, std::size_t samples = 100000, std::uint64_t seed = 1);

nlohmann::json to_json(const Ellipsoid& e);
nlohmann::json to_json(const EllipsoidApproximation& a);
nlohmann::json to_json(const BalancedCore& c);
nlohmann::json to_json(const DetCertificate& c);

}  // namespace hfin
