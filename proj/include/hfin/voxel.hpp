#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfin/exponents.hpp"
#include "hfin/heisenberg.hpp"
#include "hfin/subspace.hpp"

namespace hfin {

constexpr std::size_t kDefaultCellGuard = std::size_t{1} << 24;

/// Finite set of integer cells [k h, (k+1) h)^d. Cells are stored sorted and unique.
class VoxelSet {
 public:
  VoxelSet() = default;
  VoxelSet(int d, double h);
  /// Takes a flat list of d-tuples in any order, possibly with repeats.
  static VoxelSet from_cells(int d, double h, std::vector<std::int32_t> flat);

  int d() const { return d_; }
  double h() const { return h_; }
  std::size_t size() const { return d_ == 0 ? count0_ : cells_.size() / d_; }
  bool empty() const { return size() == 0; }
  const std::int32_t* cell(std::size_t k) const { return cells_.data() + k * d_; }
  double center(std::size_t k, int axis) const { return (cell(k)[axis] + 0.5) * h_; }
  const std::vector<std::int32_t>& data() const { return cells_; }
  bool contains(const std::int32_t* c) const;
  double measure() const;
  /// Exact rational measure when h is dyadic.
  Rational exact_measure() const;

  bool operator==(const VoxelSet& o) const { return d_ == o.d_ && h_ == o.h_ && cells_ == o.cells_ && count0_ == o.count0_; }

 private:
  int d_ = 0;
  double h_ = 1.0;
  std::vector<std::int32_t> cells_;
  std::size_t count0_ = 0;  ///< d = 0: the single point is either present or not
};

/// Cells whose centers satisfy `inside`, scanned over the box [lo, hi].
VoxelSet voxelize(int d, double h, const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::function<bool(const std::vector<double>&)>& inside,
                  std::size_t guard = kDefaultCellGuard);

VoxelSet voxelize_box(double h, const std::vector<double>& lo, const std::vector<double>& hi);

VoxelSet set_union(const VoxelSet& a, const VoxelSet& b);
VoxelSet set_intersection(const VoxelSet& a, const VoxelSet& b);
VoxelSet subset(const VoxelSet& S, const std::vector<bool>& keep);

/// Exact image under the coordinate projection keeping the axes in `keep` (bit a = axis a).
VoxelSet pushforward_coordinate(const VoxelSet& S, Mask keep);

HPoint cell_center_point(const VoxelSet& S, std::size_t k);

/// Rasterizes cell centers of a set in H^n (axes x, y, t) through `f` onto the grid of side h_out.
VoxelSet pushforward_vertical(const VoxelSet& S, const VerticalMap& f, double h_out);

/// Partition of the cells of S by a key; groups are numbered in key order.
struct Grouping {
  std::vector<int> group_of;  ///< per cell
  std::vector<int> size;      ///< per group
  int count() const { return static_cast<int>(size.size()); }
};

Grouping group_by_coordinates(const VoxelSet& S, Mask keep);
/// Groups cells by their rasterized image under f at resolution h: the discrete fibers of f.
Grouping group_by_map(const VoxelSet& S, const VerticalMap& f);

enum class FiberKind { T, TStar, Tj, TTilde, TTildeStar };

struct FiberSpec {
  bool along_x = true;  ///< flow_X (true) or flow_Y
  Mask support = 0;     ///< coordinates the flow parameter may move
  VerticalMap map;      ///< projection whose fibers are traced
};

FiberSpec fiber_spec(FiberKind kind, const ProjectionConfig& config, const ArithmeticScaffold* scaffold, int j);

/// {s : flow(s, z) in S} on the support coordinates, s = k h. Cells are matched by their
/// rasterized image under the fiber's projection, the same discretization pushforward_vertical uses.
VoxelSet fiber_trace(const VoxelSet& S, const HPoint& z, const FiberSpec& spec);

void write_vxl1(std::ostream& os, const VoxelSet& S);
VoxelSet read_vxl1(std::istream& is);
nlohmann::json to_json(const VoxelSet& S);
VoxelSet voxelset_from_json(const nlohmann::json& j);

}  // namespace hfin
