#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hfin/exponents.hpp"
#include "hfin/heisenberg.hpp"
#include "hfin/rational.hpp"
#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

/// coeff * prod var^exp with rational exponents.
struct Monomial {
  Rational coeff = 1;
  std::map<std::string, Rational> exps;

  Monomial& operator*=(const Monomial& o);
  Monomial operator*(const Monomial& o) const { Monomial m = *this; return m *= o; }
  Monomial operator/(const Monomial& o) const;
  /// Raises the variable part to a rational power; the coefficient must be 1 unless e is an integer.
  Monomial pow(const Rational& e) const;
  static Monomial var(const std::string& name, const Rational& e = 1);
  bool is_constant() const;
  std::string str() const;
};

/// B(z, e, r, r*, rho): z . {(s, u, tau) : s in C, u in C_*, |tau| < rho}. Axis i of the frame
/// carries radii r_i and r*_i and lies in the partition block containing e_i.
struct Paraball {
  ExactHPoint z;
  Eigen::MatrixXd frame;   ///< columns are the axes
  std::vector<Rational> r, r_star;
  Rational rho;
  std::vector<CoordSubspace> family;  ///< images of the projections the frame is adapted to
  MaximalPartition partition;

  int n() const { return static_cast<int>(r.size()); }
  bool axis_aligned() const;
};

/// r*_i = rho / r_i. Throws PreconditionError for nonpositive radii or a frame that is not
/// orthonormal or mixes partition blocks.
Paraball make_paraball(const ExactHPoint& z, const Eigen::MatrixXd& frame, const std::vector<Rational>& r,
                       const Rational& rho, const std::vector<CoordSubspace>& family);
Paraball make_paraball(const ExactHPoint& z, const std::vector<Rational>& r, const Rational& rho,
                       const std::vector<CoordSubspace>& family);

/// Images of all pi_j and of the P_j: the family every measured projection must respect.
std::vector<CoordSubspace> measurement_family(const ProjectionConfig& config, const ArithmeticScaffold* scaffold);

/// Analytic measure = structural * constant. The structural part is a rational monomial in r, r*, rho.
struct AnalyticMeasure {
  std::string name;
  Rational structural;
  Monomial form;       ///< structural part in the variables r1..rn, rho
  double constant = 0; ///< shape constant from unit-ball volumes
  double value() const { return to_double(structural) * constant; }
};

struct ParaballTable {
  AnalyticMeasure ball;
  std::vector<AnalyticMeasure> pi;          ///< j = 1..M
  std::vector<AnalyticMeasure> pi_tilde;    ///< j = 1..mt
  std::vector<AnalyticMeasure> pi_tilde_star;
};

/// Shape constant 2 w_{d} w_n + (w_{d+1} / 2) * int_{B^n} |v_K| dv for an image of dimension d, dim K = n - d.
double projection_shape_constant(int n, int d);
/// int over the unit ball of R^n of the norm of k of the coordinates.
double ball_partial_norm_integral(int n, int k);

ParaballTable paraball_measures(const Paraball& B, const ProjectionConfig& config, const ArithmeticScaffold& scaffold);

Paraball scale_paraball(const Paraball& B, const std::vector<Rational>& lambda, const std::vector<Rational>& lambda_star,
                        const Rational& a);

struct ScalingRow {
  std::string name;
  Rational ratio;      ///< structural(B~) / structural(B)
  Rational predicted;  ///< the scaling law
  bool exact = false;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  bool all_exact = false;
  Monomial quasi_form;        ///< |B| / prod |pi_j B|^{1/p_j} as a monomial in r, rho
  bool quasi_invariant = false;
  double quasi_before = 0, quasi_after = 0;
};

ScalingReport verify_scaling(const Paraball& B, const std::vector<Rational>& lambda,
                             const std::vector<Rational>& lambda_star, const Rational& a, const ProjectionConfig& config,
                             const ExponentVector& p, const ArithmeticScaffold& scaffold);

/// |B| / prod |pi_j B|^{1/p_j} from the analytic table.
double quasiextremal_ratio(const ParaballTable& t, const ExponentVector& p);
Monomial quasiextremal_form(const ParaballTable& t, const ExponentVector& p);

Paraball left_translate(const ExactHPoint& g, const Paraball& B);

bool paraball_contains(const Paraball& B, const HPoint& w);
VoxelSet voxelize_paraball(const Paraball& B, double h, std::size_t guard = kDefaultCellGuard);

/// A projection image described by the side it keeps whole and the kept coordinates of the other side.
struct ImageKind {
  bool x_side = true;  ///< true: (L x, y, t + x.y/2); false: (x, L y, t - x.y/2)
  Mask V = 0;
  std::string name;
};

std::vector<ImageKind> image_kinds(const ProjectionConfig& config, const ArithmeticScaffold& scaffold);

/// Vertical fiber of the image over a horizontal point: the open interval (center - half, center + half).
struct Interval {
  double center = 0, half = 0;
  bool empty = true;
};
Interval image_fiber(const Paraball& B, const ImageKind& k, const std::vector<double>& horizontal);

struct OverlapRow {
  std::string name;
  double measure_a = 0, measure_b = 0, intersection = 0;
  double normalized = 0;  ///< intersection / max(measure_a, measure_b)
};

struct OverlapReport {
  std::vector<OverlapRow> rows;
  std::size_t grid_points = 0;
  int cells_per_radius = 0;
};

/// Horizontal image coordinates on a grid, vertical fibers intersected exactly.
OverlapReport overlap_estimate(const Paraball& B, const Paraball& Bp, const ProjectionConfig& config,
                               const ArithmeticScaffold& scaffold, int cells_per_radius = 32,
                               std::size_t guard = std::size_t{1} << 24);

struct Covering {
  Paraball base;
  Rational delta;
  Rational eta;                    ///< grid step in normalized coordinates
  int d = 0;                       ///< 2n + 1
  std::vector<std::int32_t> grid;  ///< normalized centers / eta, flat d-tuples
  std::vector<int> A;              ///< dim V_j + n + 2
  std::vector<int> A_tilde;        ///< 2n - k~_j + 2
  std::vector<ScalingRow> measure_rows;  ///< |pi B_k| / |pi B| against delta^{A}
  bool measures_exact = false;
  double count_exponent = 0;       ///< log(count) / log(1/delta)

  std::size_t size() const { return d == 0 ? 0 : grid.size() / d; }
  Paraball ball(std::size_t k) const;
};

/// Translates of B(., delta r, delta r*, delta^2 rho) centered at the grid points of B in normalized coordinates.
Covering covering(const Paraball& B, const Rational& delta, const ProjectionConfig& config,
                  const ArithmeticScaffold& scaffold);

struct CoverageAudit {
  std::size_t cells = 0;
  std::size_t uncovered = 0;
  double h = 0;
};

/// Checks every cell center of the voxelized B against the covering balls near it.
CoverageAudit coverage_audit(const Paraball& B, const Covering& cov, double h);

nlohmann::json to_json(const Paraball& B);
Paraball paraball_from_json(const nlohmann::json& j, const std::vector<CoordSubspace>& family);
nlohmann::json to_json(const ParaballTable& t);
nlohmann::json to_json(const ScalingReport& s);
nlohmann::json to_json(const OverlapReport& o);
nlohmann::json to_json(const Covering& c, std::size_t max_balls = 0);

}  // namespace hfin
