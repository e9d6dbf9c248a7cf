#include "hfin/box_union.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "hfin/errors.hpp"

namespace hfin {

Rational Box::volume() const {
  Rational v = 1;
  for (std::size_t a = 0; a < lo.size(); ++a) v *= hi[a] - lo[a];
  return v;
}

void BoxUnion::add(Box b) {
  if (static_cast<int>(b.lo.size()) != d_ || static_cast<int>(b.hi.size()) != d_)
    throw InputError("box dimension does not match the union");
  for (int a = 0; a < d_; ++a)
    if (b.hi[a] <= b.lo[a]) return;  // empty box
  boxes_.push_back(std::move(b));
}

namespace {

/// Sweep over the axis whose elementary intervals are covered by the fewest boxes, then recurse.
Rational union_measure(const std::vector<const Box*>& boxes, std::vector<int> axes) {
  if (boxes.empty()) return 0;
  if (axes.empty()) return 1;
  if (boxes.size() == 1) {
    Rational v = 1;
    for (int a : axes) v *= boxes[0]->hi[a] - boxes[0]->lo[a];
    return v;
  }
  int best_axis = -1;
  std::size_t best_overlap = 0;
  std::vector<Rational> best_cuts;
  for (int a : axes) {
    std::vector<Rational> cuts;
    for (const Box* b : boxes) {
      cuts.push_back(b->lo[a]);
      cuts.push_back(b->hi[a]);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::size_t overlap = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      std::size_t c = 0;
      for (const Box* b : boxes)
        if (b->lo[a] <= cuts[k] && cuts[k + 1] <= b->hi[a]) ++c;
      overlap = std::max(overlap, c);
    }
    if (best_axis < 0 || overlap < best_overlap) {
      best_axis = a;
      best_overlap = overlap;
      best_cuts = std::move(cuts);
    }
  }
  std::vector<int> rest;
  for (int a : axes)
    if (a != best_axis) rest.push_back(a);
  Rational total = 0;
  for (std::size_t k = 0; k + 1 < best_cuts.size(); ++k) {
    std::vector<const Box*> sub;
    for (const Box* b : boxes)
      if (b->lo[best_axis] <= best_cuts[k] && best_cuts[k + 1] <= b->hi[best_axis]) sub.push_back(b);
    if (sub.empty()) continue;
    total += (best_cuts[k + 1] - best_cuts[k]) * union_measure(sub, rest);
  }
  return total;
}

}  // namespace

Rational BoxUnion::measure() const { return projected_measure(CoordSubspace::full(d_).mask); }

Rational BoxUnion::projected_measure(Mask keep) const {
  std::vector<const Box*> ptrs;
  for (const auto& b : boxes_) ptrs.push_back(&b);
  std::vector<int> axes;
  for (int a = 0; a < d_; ++a)
    if ((keep >> a) & 1u) axes.push_back(a);
  return union_measure(ptrs, axes);
}

BoxUnion BoxUnion::project(Mask keep) const {
  BoxUnion out(std::popcount(keep));
  for (const auto& b : boxes_) {
    Box p;
    for (int a = 0; a < d_; ++a)
      if ((keep >> a) & 1u) {
        p.lo.push_back(b.lo[a]);
        p.hi.push_back(b.hi[a]);
      }
    out.add(std::move(p));
  }
  return out;
}

bool BoxUnion::contains(const std::vector<double>& p) const {
  for (const auto& b : boxes_) {
    bool in = true;
    for (int a = 0; a < d_ && in; ++a) in = to_double(b.lo[a]) <= p[a] && p[a] < to_double(b.hi[a]);
    if (in) return true;
  }
  return false;
}

VoxelSet BoxUnion::rasterize(double h, std::size_t guard) const {
  std::vector<std::int32_t> flat;
  for (const auto& b : boxes_) {
    std::vector<double> lo(d_), hi(d_);
    for (int a = 0; a < d_; ++a) {
      lo[a] = to_double(b.lo[a]);
      hi[a] = to_double(b.hi[a]);
    }
    VoxelSet part = voxelize(d_, h, lo, hi, [&](const std::vector<double>& c) {
      for (int a = 0; a < d_; ++a)
        if (!(lo[a] <= c[a] && c[a] < hi[a])) return false;
      return true;
    }, guard);
    flat.insert(flat.end(), part.data().begin(), part.data().end());
    if (flat.size() / std::max(d_, 1) > guard) throw InputError("rasterize: more cells than the guard allows");
  }
  return VoxelSet::from_cells(d_, h, std::move(flat));
}

}  // namespace hfin
