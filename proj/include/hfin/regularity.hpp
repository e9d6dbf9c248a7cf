#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hfin/exponents.hpp"
#include "hfin/heisenberg.hpp"
#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

/// Fiber statistics of a voxel set in H^n. Fiber sizes are in cells, averages in cells.
struct RegularityReport {
  double h = 0;
  std::size_t count = 0;
  double measure = 0;
  std::vector<std::size_t> image_counts;       ///< |pi_j Omega| in cells
  std::vector<std::size_t> tilde_counts;       ///< |pi~_j Omega|
  std::vector<std::size_t> tilde_star_counts;  ///< |pi~*_j Omega|
  std::vector<std::size_t> max_tilde_fiber;
  std::vector<std::size_t> max_tilde_star_fiber;
  std::vector<double> alpha, beta, beta_star;  ///< |Omega| / |image|, in measure units
  double epsilon_quasi = 0;      ///< |Omega| / prod |pi_j Omega|^{1/p_j}
  double epsilon_semi = 0;       ///< largest eps with every pi~_j fiber <= 2 eps^{-1} beta_j
  double epsilon_semi_star = 0;
};

RegularityReport classify(const VoxelSet& Omega, const ProjectionConfig& config, const ExponentVector& p,
                          const ArithmeticScaffold& scaffold);
RegularityReport classify(const VoxelSet& Omega, const ProjectionConfig& config, const ExponentVector& p);
nlohmann::json to_json(const RegularityReport& r);

/// Hypotheses of the semiregular-to-regular step; only the hypotheses are evaluated.
struct SemiToRegularHypotheses {
  bool sigma_order = false;                ///< 0 < sigma <= eps <= 1
  bool semiregular_pi = false;             ///< Omega eps-semiregular w.r.t. pi
  bool is_subset = false;
  bool refinement_size = false;            ///< |Omega'| >= eps^C |Omega|
  bool semiregular_pi_star = false;        ///< Omega' eps-semiregular w.r.t. pi_*
  bool quasiextremal = false;              ///< Omega eps-quasiextremal
  bool double_prime_size = false;          ///< |Omega''| within `spread` of sigma |Omega|
  double double_prime_ratio = 0;           ///< |Omega''| / (sigma |Omega|)
  bool all() const {
    return sigma_order && semiregular_pi && is_subset && refinement_size && semiregular_pi_star && quasiextremal &&
           double_prime_size;
  }
};

SemiToRegularHypotheses semiregular_to_regular_hypotheses(const VoxelSet& Omega, const VoxelSet& Omega_prime,
                                                          const ProjectionConfig& config, const ExponentVector& p,
                                                          double eps, double sigma, double C, double spread = 4.0);

/// Output of the fiber-trimming procedure on a voxel set: levels Omega_1 c ... c Omega_A c Omega,
/// the base point and the tabulated fiber sets S_1, F_1, G_1 (cell offsets from the base cell).
struct FlowScheme {
  int A = 0;
  double c = 0;
  int attempts = 0;
  double kappa = 0;                 ///< guaranteed loss fraction: |Omega_A| >= (1 - kappa) |Omega|
  std::vector<VoxelSet> levels;     ///< levels[l-1] = Omega_l
  std::size_t z0_cell = 0;          ///< index of the base cell in Omega_1
  HPoint z0;
  VoxelSet S1;                      ///< x-offsets of the pi-fiber of z0 in Omega_1
  std::map<std::vector<std::int32_t>, VoxelSet> F;  ///< s -> y-offsets of the pi_*-fiber in Omega_2
  std::map<std::vector<std::int32_t>, VoxelSet> G;  ///< (s, u) -> x-offsets of the pi-fiber in Omega_3
  std::vector<double> alpha, beta, beta_star;        ///< thresholds, in cells, from the input set

  /// Smallest observed value of (fiber statistic) / (c * threshold) for each postcondition family.
  double min_average_ratio = 0;
  double min_pointwise_ratio = 0;
  bool audit_pass = false;
};

/// Iteratively discards small fibers; starts at c = 1/(100 (m + m~)) and halves on annihilation.
FlowScheme refine_flow_scheme(const VoxelSet& Omega, const ProjectionConfig& config, const ArithmeticScaffold& scaffold,
                              int A, int max_attempts = 30);
/// Re-checks every average and pointwise postcondition of a scheme; returns false on any violation.
bool audit_flow_scheme(FlowScheme& scheme, const ProjectionConfig& config, const ArithmeticScaffold& scaffold);

/// Permutes the axes of a set in R^n into the scaffold's sorted coordinate order.
VoxelSet to_sorted_coordinates(const VoxelSet& S, const std::vector<int>& order);

/// Values of G_0, ..., G_mt on the grouped levels of E. E lives in R^{k~_mt}; P_j keeps axes >= k~_j.
struct GRecursion {
  std::vector<int> k_tilde;                  ///< with the leading 0
  std::vector<std::int64_t> Q_tilde;         ///< Q~_1 .. Q~_mt
  std::vector<Grouping> groups;              ///< groups[j]: fibers of P_j (groups[0]: single cells)
  std::vector<std::vector<double>> values;   ///< values[j][g] = G_j on group g
  double top() const { return values.back().at(0); }
};

GRecursion g_recursion(const VoxelSet& E, const std::vector<double>& G0, const std::vector<int>& k_tilde,
                       const std::vector<std::int64_t>& q_dbl_tilde);

struct GLowerBound {
  double sigma = 0;
  double exponent = 0;    ///< C in sigma^C prod beta_j^{q~~_j}
  double bound = 0;
  double G_top = 0;
  std::vector<double> beta;  ///< |E| / |P_j E|
  bool holds = false;
};

/// G_0 = 1. Throws PreconditionError when sigma beta_j <= |P_j fiber| <= beta_j / sigma fails for some j < m~.
GLowerBound g_lower_bound(const VoxelSet& E, const std::vector<int>& k_tilde,
                          const std::vector<std::int64_t>& q_dbl_tilde, double sigma);

/// Integral over Xi of prod f_{j,l}(s^{j,l}); f[b] is tabulated on the cells of E, blocks ordered (j, l).
double xi_product_integral(const VoxelSet& E, const std::vector<std::vector<double>>& f, const std::vector<int>& k_tilde,
                           const std::vector<std::int64_t>& q_dbl_tilde);

struct AmGmCheck {
  double lhs = 0;   ///< Xi integral
  double rhs = 0;   ///< G_mt with G_0 = prod f_{j,l}
  double slack = 0; ///< lhs - rhs
  bool holds = false;
};

AmGmCheck am_gm_check(const VoxelSet& E, const std::vector<std::vector<double>>& f, const std::vector<int>& k_tilde,
                      const std::vector<std::int64_t>& q_dbl_tilde);

/// max |(sum over P_{j-1}-sections of a P_j fiber) - (sum over the fiber)| for f on E; 1 <= j <= m~.
double layer_identity_gap(const VoxelSet& E, const std::vector<double>& f, const std::vector<int>& k_tilde, int j);

}  // namespace hfin
