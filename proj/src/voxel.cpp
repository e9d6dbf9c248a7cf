#include "hfin/voxel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include "hfin/errors.hpp"

namespace hfin {

namespace {

bool row_less(const std::int32_t* a, const std::int32_t* b, int d) {
  return std::lexicographical_compare(a, a + d, b, b + d);
}

/// Sorted order of the rows of a flat array.
std::vector<std::size_t> sorted_rows(const std::vector<std::int32_t>& flat, int d) {
  std::vector<std::size_t> idx(flat.size() / d);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return row_less(flat.data() + a * d, flat.data() + b * d, d);
  });
  return idx;
}

std::int32_t cell_index(double v, double h) { return static_cast<std::int32_t>(std::floor(v / h)); }

}  // namespace

VoxelSet::VoxelSet(int d, double h) : d_(d), h_(h) {
  if (d < 0) throw InputError("voxel set dimension must be nonnegative");
  if (!(h > 0)) throw InputError("voxel side length must be positive");
}

VoxelSet VoxelSet::from_cells(int d, double h, std::vector<std::int32_t> flat) {
  VoxelSet s(d, h);
  if (d == 0) {
    s.count0_ = flat.empty() ? 0 : 1;
    return s;
  }
  if (flat.size() % d != 0) throw InputError("cell list length is not a multiple of d");
  auto idx = sorted_rows(flat, d);
  s.cells_.reserve(flat.size());
  const std::int32_t* prev = nullptr;
  for (std::size_t k : idx) {
    const std::int32_t* row = flat.data() + k * d;
    if (prev && std::equal(row, row + d, prev)) continue;
    s.cells_.insert(s.cells_.end(), row, row + d);
    prev = row;
  }
  return s;
}

bool VoxelSet::contains(const std::int32_t* c) const {
  if (d_ == 0) return count0_ > 0;
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (row_less(cell(mid), c, d_))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < size() && std::equal(c, c + d_, cell(lo));
}

double VoxelSet::measure() const { return static_cast<double>(size()) * std::pow(h_, d_); }

Rational VoxelSet::exact_measure() const {
  Rational h;
  h = h_;  // exact conversion from the double
  return Rational(static_cast<long>(size())) * pow(h, d_);
}

VoxelSet voxelize(int d, double h, const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::function<bool(const std::vector<double>&)>& inside, std::size_t guard) {
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw InputError("voxelize: bounding box dimension mismatch");
  std::vector<std::int32_t> a(d), b(d);
  double box_cells = 1;
  for (int i = 0; i < d; ++i) {
    a[i] = cell_index(lo[i], h);
    b[i] = static_cast<std::int32_t>(std::ceil(hi[i] / h)) - 1;
    if (b[i] < a[i]) return VoxelSet(d, h);
    box_cells *= b[i] - a[i] + 1.0;
  }
  if (box_cells > 64.0 * static_cast<double>(guard))
    throw InputError("voxelize: bounding box has " + std::to_string(box_cells) + " cells, above the guard");
  std::vector<std::int32_t> flat;
  std::vector<std::int32_t> k = a;
  std::vector<double> c(d);
  if (d == 0) return VoxelSet::from_cells(0, h, inside(c) ? std::vector<std::int32_t>{0} : std::vector<std::int32_t>{});
  while (true) {
    for (int i = 0; i < d; ++i) c[i] = (k[i] + 0.5) * h;
    if (inside(c)) {
      flat.insert(flat.end(), k.begin(), k.end());
      if (flat.size() / d > guard) throw InputError("voxelize: more than " + std::to_string(guard) + " occupied cells");
    }
    int i = d - 1;
    while (i >= 0 && k[i] == b[i]) {
      k[i] = a[i];
      --i;
    }
    if (i < 0) break;
    ++k[i];
  }
  return VoxelSet::from_cells(d, h, std::move(flat));
}

VoxelSet voxelize_box(double h, const std::vector<double>& lo, const std::vector<double>& hi) {
  return voxelize(static_cast<int>(lo.size()), h, lo, hi, [](const std::vector<double>&) { return true; });
}

namespace {
void check_compatible(const VoxelSet& a, const VoxelSet& b) {
  if (a.d() != b.d() || a.h() != b.h()) throw InputError("voxel sets on different grids");
}
}  // namespace

VoxelSet set_union(const VoxelSet& a, const VoxelSet& b) {
  check_compatible(a, b);
  if (a.d() == 0) return VoxelSet::from_cells(0, a.h(), a.empty() && b.empty() ? std::vector<std::int32_t>{} : std::vector<std::int32_t>{0});
  std::vector<std::int32_t> flat = a.data();
  flat.insert(flat.end(), b.data().begin(), b.data().end());
  return VoxelSet::from_cells(a.d(), a.h(), std::move(flat));
}

VoxelSet set_intersection(const VoxelSet& a, const VoxelSet& b) {
  check_compatible(a, b);
  if (a.d() == 0) return VoxelSet::from_cells(0, a.h(), !a.empty() && !b.empty() ? std::vector<std::int32_t>{0} : std::vector<std::int32_t>{});
  std::vector<std::int32_t> flat;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (b.contains(a.cell(k))) flat.insert(flat.end(), a.cell(k), a.cell(k) + a.d());
  return VoxelSet::from_cells(a.d(), a.h(), std::move(flat));
}

VoxelSet subset(const VoxelSet& S, const std::vector<bool>& keep) {
  if (keep.size() != S.size()) throw InputError("subset: mask length mismatch");
  std::vector<std::int32_t> flat;
  for (std::size_t k = 0; k < S.size(); ++k)
    if (keep[k]) flat.insert(flat.end(), S.cell(k), S.cell(k) + S.d());
  if (S.d() == 0) return VoxelSet::from_cells(0, S.h(), !S.empty() && keep[0] ? std::vector<std::int32_t>{0} : std::vector<std::int32_t>{});
  return VoxelSet::from_cells(S.d(), S.h(), std::move(flat));
}

VoxelSet pushforward_coordinate(const VoxelSet& S, Mask keep) {
  if (S.d() < 32 && (keep >> S.d()) != 0) throw InputError("pushforward_coordinate: axis beyond d");
  const int od = std::popcount(keep);
  if (od == 0) return VoxelSet::from_cells(0, S.h(), S.empty() ? std::vector<std::int32_t>{} : std::vector<std::int32_t>{0});
  std::vector<std::int32_t> flat;
  flat.reserve(S.size() * od);
  for (std::size_t k = 0; k < S.size(); ++k)
    for (int a = 0; a < S.d(); ++a)
      if ((keep >> a) & 1u) flat.push_back(S.cell(k)[a]);
  return VoxelSet::from_cells(od, S.h(), std::move(flat));
}

HPoint cell_center_point(const VoxelSet& S, std::size_t k) {
  if (S.d() % 2 != 1) throw InputError("a set in H^n has odd dimension 2n+1");
  const int n = (S.d() - 1) / 2;
  HPoint z = HPoint::identity(n);
  for (int i = 0; i < n; ++i) {
    z.x[i] = S.center(k, i);
    z.y[i] = S.center(k, n + i);
  }
  z.t = S.center(k, 2 * n);
  return z;
}

namespace {
void check_heisenberg(const VoxelSet& S, const VerticalMap& f) {
  if (S.d() != 2 * f.n + 1)
    throw InputError("projection " + f.name + " expects a set in H^" + std::to_string(f.n));
}

std::vector<std::int32_t> map_keys(const VoxelSet& S, const VerticalMap& f, double h_out) {
  const int td = f.target_dim();
  std::vector<std::int32_t> flat;
  flat.reserve(S.size() * td);
  for (std::size_t k = 0; k < S.size(); ++k)
    for (double v : f.apply(cell_center_point(S, k))) flat.push_back(cell_index(v, h_out));
  return flat;
}

Grouping group_keys(const std::vector<std::int32_t>& keys, int kd, std::size_t count) {
  Grouping g;
  g.group_of.assign(count, 0);
  if (count == 0) return g;
  if (kd == 0) {
    g.size.push_back(static_cast<int>(count));
    return g;
  }
  auto idx = sorted_rows(keys, kd);
  const std::int32_t* prev = nullptr;
  for (std::size_t k : idx) {
    const std::int32_t* row = keys.data() + k * kd;
    if (!prev || !std::equal(row, row + kd, prev)) g.size.push_back(0);
    g.group_of[k] = g.count() - 1;
    ++g.size.back();
    prev = row;
  }
  return g;
}
}  // namespace

VoxelSet pushforward_vertical(const VoxelSet& S, const VerticalMap& f, double h_out) {
  check_heisenberg(S, f);
  if (!(h_out > 0)) throw InputError("h_out must be positive");
  return VoxelSet::from_cells(f.target_dim(), h_out, map_keys(S, f, h_out));
}

Grouping group_by_coordinates(const VoxelSet& S, Mask keep) {
  const int kd = std::popcount(keep);
  std::vector<std::int32_t> keys;
  keys.reserve(S.size() * kd);
  for (std::size_t k = 0; k < S.size(); ++k)
    for (int a = 0; a < S.d(); ++a)
      if ((keep >> a) & 1u) keys.push_back(S.cell(k)[a]);
  return group_keys(keys, kd, S.size());
}

Grouping group_by_map(const VoxelSet& S, const VerticalMap& f) {
  check_heisenberg(S, f);
  return group_keys(map_keys(S, f, S.h()), f.target_dim(), S.size());
}

FiberSpec fiber_spec(FiberKind kind, const ProjectionConfig& config, const ArithmeticScaffold* scaffold, int j) {
  const Mask full = CoordSubspace::full(config.n).mask;
  switch (kind) {
    case FiberKind::T: return {true, full, pi_map(config.n)};
    case FiberKind::TStar: return {false, full, pi_star_map(config.n)};
    case FiberKind::Tj: {
      auto f = pi_j_map(config, j);
      return {config.x_side(j), config.K(j).mask, f};
    }
    case FiberKind::TTilde:
    case FiberKind::TTildeStar: {
      if (!scaffold) throw PreconditionError("auxiliary fibers need a scaffold");
      bool x = kind == FiberKind::TTilde;
      auto f = x ? pi_tilde_map(*scaffold, j) : pi_tilde_star_map(*scaffold, j);
      return {x, scaffold->p_kernel(j).mask, f};
    }
  }
  throw InputError("unknown fiber kind");
}

VoxelSet fiber_trace(const VoxelSet& S, const HPoint& z, const FiberSpec& spec) {
  check_heisenberg(S, spec.map);
  const int n = spec.map.n;
  const double h = S.h();
  std::vector<std::int32_t> zkey;
  for (double v : spec.map.apply(z)) zkey.push_back(cell_index(v, h));
  std::vector<std::int32_t> zcell(2 * n);
  for (int i = 0; i < n; ++i) {
    zcell[i] = cell_index(z.x[i], h);
    zcell[n + i] = cell_index(z.y[i], h);
  }
  const int offset = spec.along_x ? 0 : n;
  const int sd = std::popcount(spec.support);
  std::vector<std::int32_t> flat;
  for (std::size_t k = 0; k < S.size(); ++k) {
    auto img = spec.map.apply(cell_center_point(S, k));
    bool same = true;
    for (std::size_t a = 0; a < img.size() && same; ++a) same = cell_index(img[a], h) == zkey[a];
    if (!same) continue;
    for (int i = 0; i < n; ++i)
      if ((spec.support >> i) & 1u) flat.push_back(S.cell(k)[offset + i] - zcell[offset + i]);
    if (sd == 0) flat.push_back(0);
  }
  if (sd == 0) return VoxelSet::from_cells(0, h, flat.empty() ? std::vector<std::int32_t>{} : std::vector<std::int32_t>{0});
  return VoxelSet::from_cells(sd, h, std::move(flat));
}

namespace {
template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("VXL1: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace

void write_vxl1(std::ostream& os, const VoxelSet& S) {
  os.write("VXL1", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(S.d()));
  put<double>(os, S.h());
  put<std::uint64_t>(os, S.size());
  const int d = S.d();
  if (d == 0) return;
  // Runs of cells consecutive along the last axis.
  std::vector<std::pair<std::size_t, std::uint32_t>> runs;
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (!runs.empty()) {
      auto& [start, len] = runs.back();
      const std::int32_t* a = S.cell(start);
      const std::int32_t* b = S.cell(k);
      if (std::equal(a, a + d - 1, b) && b[d - 1] == a[d - 1] + static_cast<std::int32_t>(len)) {
        ++len;
        continue;
      }
    }
    runs.emplace_back(k, 1);
  }
  put<std::uint64_t>(os, runs.size());
  for (const auto& [start, len] : runs) {
    for (int a = 0; a < d; ++a) put<std::int32_t>(os, S.cell(start)[a]);
    put<std::uint32_t>(os, len);
  }
}

VoxelSet read_vxl1(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "VXL1") throw InputError("VXL1: bad magic");
  const int d = static_cast<int>(get<std::uint32_t>(is));
  const double h = get<double>(is);
  const std::uint64_t count = get<std::uint64_t>(is);
  if (d == 0) return VoxelSet::from_cells(0, h, count ? std::vector<std::int32_t>{0} : std::vector<std::int32_t>{});
  const std::uint64_t nruns = get<std::uint64_t>(is);
  std::vector<std::int32_t> flat;
  std::vector<std::int32_t> c(d);
  for (std::uint64_t r = 0; r < nruns; ++r) {
    for (int a = 0; a < d; ++a) c[a] = get<std::int32_t>(is);
    const std::uint32_t len = get<std::uint32_t>(is);
    for (std::uint32_t k = 0; k < len; ++k) {
      flat.insert(flat.end(), c.begin(), c.end() - 1);
      flat.push_back(c[d - 1] + static_cast<std::int32_t>(k));
    }
  }
  VoxelSet s = VoxelSet::from_cells(d, h, std::move(flat));
  if (s.size() != count) throw InputError("VXL1: cell count does not match the runs");
  return s;
}

nlohmann::json to_json(const VoxelSet& S) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t k = 0; k < S.size() && S.d() > 0; ++k)
    cells.push_back(std::vector<std::int32_t>(S.cell(k), S.cell(k) + S.d()));
  nlohmann::json j = {{"d", S.d()}, {"h", S.h()}, {"cells", cells}};
  if (S.d() == 0) j["count"] = S.size();
  return j;
}

VoxelSet voxelset_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const double h = j.at("h").get<double>();
  if (d == 0) {
    bool present = j.value("count", 0) > 0;
    return VoxelSet::from_cells(0, h, present ? std::vector<std::int32_t>{0} : std::vector<std::int32_t>{});
  }
  std::vector<std::int32_t> flat;
  for (const auto& c : j.at("cells")) {
    if (!c.is_array() || static_cast<int>(c.size()) != d) throw InputError("voxel cell has the wrong length");
    for (const auto& v : c) flat.push_back(v.get<std::int32_t>());
  }
  return VoxelSet::from_cells(d, h, std::move(flat));
}

}  // namespace hfin
