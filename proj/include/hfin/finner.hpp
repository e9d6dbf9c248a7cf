#pragma once

#include <vector>

#include "hfin/exponents.hpp"
#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

struct FinnerResult {
  std::size_t count = 0;
  std::vector<std::size_t> image_counts;
  double ratio = 0;  ///< |S| / prod |l_j S|^{1/p_j}, counting measure
  int cmp_one = -1;  ///< exact sign of (ratio - 1); empty sets give -1
};

/// Counting-measure Finner inequality; `images` are the images W_j of the coordinate projections.
/// Throws PreconditionError naming the coordinate when sum_{j: e_i in W_j} 1/p_j != 1.
FinnerResult finner_check(const VoxelSet& S, const std::vector<CoordSubspace>& images, const ExponentVector& p);

struct GenFinnerResult {
  bool nested = false;
  std::vector<int> nesting_order;  ///< 0-based, kernels increasing
  bool assumption = false;
  int offending_coordinate = -1;   ///< 0-based, -1 when the assumption holds
  Rational offending_sum;
  bool regular = false;            ///< max fiber <= eps^{-1} * average fiber for j <= k
  double eps_measured = 0;         ///< largest eps for which that holds
  double c = 0;                    ///< refinement threshold
  double raw_ratio = 0;
  double refined_ratio = 0;
  double kept_fraction = 0;        ///< |refined| / |S|
  VoxelSet refined;
};

/// Generalized Finner check: the first k projections enter through |w|/|l_j w|, the rest through |l_j w|.
/// Nesting, assumption and regularity failures are reported in the result, not thrown.
GenFinnerResult gen_finner_check(const VoxelSet& S, const std::vector<CoordSubspace>& images, int k,
                                 const ExponentVector& p, double eps, double c = 0);

}  // namespace hfin
