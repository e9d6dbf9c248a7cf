#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hfin {

using Mask = std::uint32_t;

constexpr int kMaxDimension = 24;

/// Span of a subset of the standard basis of R^n; bit i set iff e_{i+1} is in the span.
struct CoordSubspace {
  int n = 0;
  Mask mask = 0;

  static CoordSubspace zero(int n) { return {n, 0}; }
  static CoordSubspace full(int n);
  /// From 1-based coordinate indices.
  static CoordSubspace from_indices(int n, const std::vector<int>& one_based);

  int dim() const;
  bool contains(int i) const { return (mask >> i) & 1u; }
  CoordSubspace complement() const;
  CoordSubspace meet(const CoordSubspace& o) const;
  CoordSubspace join(const CoordSubspace& o) const;
  bool subset_of(const CoordSubspace& o) const { return (mask & ~o.mask) == 0; }
  std::vector<int> indices() const;  ///< 0-based
  std::string str() const;           ///< "<e1,e3>", "{0}"

  bool operator==(const CoordSubspace&) const = default;
};

std::vector<CoordSubspace> enumerate_coordinate_subspaces(int n);

/// V_1..V_M with the first m acting on the x-side.
struct ProjectionConfig {
  int n = 0;
  int m = 0;
  std::vector<CoordSubspace> V;

  int M() const { return static_cast<int>(V.size()); }
  bool x_side(int j) const { return j < m; }  ///< 0-based j
  CoordSubspace K(int j) const { return V[j].complement(); }
  int n_j(int j) const { return V[j].dim(); }
  int k_j(int j) const { return n - V[j].dim(); }

  void validate() const;
  bool operator==(const ProjectionConfig&) const = default;
};

ProjectionConfig make_config(int n, int m, const std::vector<std::vector<int>>& one_based);

nlohmann::json to_json(const ProjectionConfig& c);
ProjectionConfig config_from_json(const nlohmann::json& j);

/// Coarsest coordinate decomposition with each block inside every kernel or image.
struct MaximalPartition {
  int n = 0;
  std::vector<CoordSubspace> blocks;

  /// Index of the block containing coordinate i (0-based).
  int block_of(int i) const;
};

/// Blocks group coordinates by their kernel-membership signature; ordered by lowest index.
MaximalPartition maximal_partition(const std::vector<CoordSubspace>& images);

/// True when every block lies inside the kernel or the image of every projection.
bool is_adapted_partition(const std::vector<CoordSubspace>& blocks,
                          const std::vector<CoordSubspace>& images);

/// Coordinate projection on W-perp x W-perp; masks are in the compressed coordinates of W-perp.
struct FlatProjection {
  int j = 0;           ///< originating projection, 0-based
  Mask x_image = 0;
  Mask y_image = 0;
};

struct Restriction {
  CoordSubspace W;
  std::vector<int> inner_coords;  ///< ambient 0-based indices spanning W, increasing
  std::vector<int> outer_coords;  ///< ambient indices spanning W-perp
  ProjectionConfig inner;         ///< V_j meet W, re-indexed onto R^{dim W}
  std::vector<CoordSubspace> inner_ambient;  ///< the same subspaces as ambient masks
  int flat_dim = 0;               ///< dim W-perp
  std::vector<FlatProjection> flat;
};

Restriction restrict_config(const ProjectionConfig& config, const CoordSubspace& W);

/// Bits of `mask` at the positions listed in `coords`, packed to the low end.
Mask compress_mask(Mask mask, const std::vector<int>& coords);
Mask expand_mask(Mask packed, const std::vector<int>& coords);

}  // namespace hfin
