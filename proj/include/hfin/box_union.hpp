#pragma once

#include <vector>

#include "hfin/rational.hpp"
#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

/// Half-open box [lo, hi) with rational corners.
struct Box {
  std::vector<Rational> lo, hi;
  Rational volume() const;
};

/// Finite union of axis-aligned boxes; measures of the union and of its coordinate
/// projections are computed exactly.
class BoxUnion {
 public:
  explicit BoxUnion(int d) : d_(d) {}
  void add(Box b);

  int d() const { return d_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  Rational measure() const;
  /// Measure of the image under the coordinate projection keeping the axes in `keep`.
  Rational projected_measure(Mask keep) const;
  BoxUnion project(Mask keep) const;
  bool contains(const std::vector<double>& p) const;
  /// Cells whose centers lie in the union.
  VoxelSet rasterize(double h, std::size_t guard = kDefaultCellGuard) const;

 private:
  int d_;
  std::vector<Box> boxes_;
};

}  // namespace hfin
