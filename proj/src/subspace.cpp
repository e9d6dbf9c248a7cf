#include "hfin/subspace.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "hfin/errors.hpp"

namespace hfin {

namespace {
Mask full_mask(int n) { return n >= 32 ? ~Mask{0} : ((Mask{1} << n) - 1); }
}  // namespace

CoordSubspace CoordSubspace::full(int n) { return {n, full_mask(n)}; }

CoordSubspace CoordSubspace::from_indices(int n, const std::vector<int>& one_based) {
  CoordSubspace s{n, 0};
  for (int i : one_based) {
    if (i < 1 || i > n)
      throw InputError("coordinate index " + std::to_string(i) + " outside 1.." + std::to_string(n));
    s.mask |= Mask{1} << (i - 1);
  }
  return s;
}

int CoordSubspace::dim() const { return std::popcount(mask); }

CoordSubspace CoordSubspace::complement() const { return {n, full_mask(n) & ~mask}; }

CoordSubspace CoordSubspace::meet(const CoordSubspace& o) const { return {n, mask & o.mask}; }

CoordSubspace CoordSubspace::join(const CoordSubspace& o) const { return {n, mask | o.mask}; }

std::vector<int> CoordSubspace::indices() const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

std::string CoordSubspace::str() const {
  if (mask == 0) return "{0}";
  std::string s = "<";
  bool first = true;
  for (int i : indices()) {
    if (!first) s += ",";
    s += "e" + std::to_string(i + 1);
    first = false;
  }
  return s + ">";
}

std::vector<CoordSubspace> enumerate_coordinate_subspaces(int n) {
  if (n < 0 || n > kMaxDimension)
    throw InputError("dimension " + std::to_string(n) + " outside 0.." + std::to_string(kMaxDimension));
  std::vector<CoordSubspace> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
    out.push_back({n, static_cast<Mask>(mask)});
  return out;
}

void ProjectionConfig::validate() const {
  if (n < 0 || n > kMaxDimension) throw InputError("n must lie in 0.." + std::to_string(kMaxDimension));
  if (!(0 < m && m < M()))
    throw InputError("need 0 < m < M, got m=" + std::to_string(m) + " M=" + std::to_string(M()));
  for (const auto& v : V) {
    if (v.n != n) throw InputError("subspace dimension does not match n");
    if ((v.mask & ~full_mask(n)) != 0) throw InputError("subspace mask has bits beyond n");
  }
}

ProjectionConfig make_config(int n, int m, const std::vector<std::vector<int>>& one_based) {
  ProjectionConfig c{n, m, {}};
  for (const auto& idx : one_based) c.V.push_back(CoordSubspace::from_indices(n, idx));
  c.validate();
  return c;
}

nlohmann::json to_json(const ProjectionConfig& c) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& v : c.V) {
    nlohmann::json idx = nlohmann::json::array();
    for (int i : v.indices()) idx.push_back(i + 1);
    subs.push_back(idx);
  }
  return {{"n", c.n}, {"m", c.m}, {"subspaces", subs}};
}

ProjectionConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const char* key : {"n", "m", "subspaces"})
    if (!j.contains(key)) throw InputError(std::string("config is missing \"") + key + "\"");
  if (!j.at("n").is_number_integer() || !j.at("m").is_number_integer())
    throw InputError("config fields n and m must be integers");
  if (!j.at("subspaces").is_array()) throw InputError("config field subspaces must be an array");
  int n = j.at("n").get<int>();
  int m = j.at("m").get<int>();
  if (n < 0 || n > kMaxDimension) throw InputError("n must lie in 0.." + std::to_string(kMaxDimension));
  std::vector<std::vector<int>> subs;
  for (const auto& s : j.at("subspaces")) {
    if (!s.is_array()) throw InputError("each subspace must be an array of indices");
    std::vector<int> idx;
    for (const auto& i : s) {
      if (!i.is_number_integer()) throw InputError("subspace indices must be integers");
      idx.push_back(i.get<int>());
    }
    subs.push_back(idx);
  }
  return make_config(n, m, subs);
}

int MaximalPartition::block_of(int i) const {
  for (std::size_t a = 0; a < blocks.size(); ++a)
    if (blocks[a].contains(i)) return static_cast<int>(a);
  return -1;
}

MaximalPartition maximal_partition(const std::vector<CoordSubspace>& images) {
  if (images.empty()) throw InputError("maximal_partition needs at least one projection");
  const int n = images.front().n;
  for (const auto& im : images)
    if (im.n != n) throw InputError("projections live in different ambient dimensions");
  // Signature of coordinate i: which kernels contain e_i.
  std::map<std::vector<bool>, Mask> groups;
  std::vector<std::pair<int, std::vector<bool>>> order;
  for (int i = 0; i < n; ++i) {
    std::vector<bool> sig;
    sig.reserve(images.size());
    for (const auto& im : images) sig.push_back(!im.contains(i));
    auto [it, inserted] = groups.emplace(sig, 0);
    it->second |= Mask{1} << i;
    if (inserted) order.emplace_back(i, sig);
  }
  MaximalPartition p{n, {}};
  for (const auto& [first, sig] : order) p.blocks.push_back({n, groups.at(sig)});
  return p;
}

bool is_adapted_partition(const std::vector<CoordSubspace>& blocks,
                          const std::vector<CoordSubspace>& images) {
  for (const auto& b : blocks)
    for (const auto& im : images)
      if (!b.subset_of(im) && !b.subset_of(im.complement())) return false;
  return true;
}

Mask compress_mask(Mask mask, const std::vector<int>& coords) {
  Mask out = 0;
  for (std::size_t k = 0; k < coords.size(); ++k)
    if ((mask >> coords[k]) & 1u) out |= Mask{1} << k;
  return out;
}

Mask expand_mask(Mask packed, const std::vector<int>& coords) {
  Mask out = 0;
  for (std::size_t k = 0; k < coords.size(); ++k)
    if ((packed >> k) & 1u) out |= Mask{1} << coords[k];
  return out;
}

Restriction restrict_config(const ProjectionConfig& config, const CoordSubspace& W) {
  config.validate();
  if (W.n != config.n) throw InputError("W lives in a different dimension");
  if (W.mask == 0 || W == CoordSubspace::full(config.n))
    throw PreconditionError("restriction needs {0} < W < R^n, got " + W.str());
  Restriction r;
  r.W = W;
  r.inner_coords = W.indices();
  r.outer_coords = W.complement().indices();
  const int dw = W.dim();
  r.flat_dim = config.n - dw;
  r.inner.n = dw;
  r.inner.m = config.m;
  for (int j = 0; j < config.M(); ++j) {
    CoordSubspace vw = config.V[j].meet(W);
    r.inner_ambient.push_back(vw);
    r.inner.V.push_back({dw, compress_mask(vw.mask, r.inner_coords)});
    // L_j'' acts on W-perp; the other factor is the identity on W-perp.
    Mask outer = compress_mask(config.V[j].mask, r.outer_coords);
    Mask all = full_mask(r.flat_dim);
    if (config.x_side(j))
      r.flat.push_back({j, outer, all});
    else
      r.flat.push_back({j, all, outer});
  }
  return r;
}

}  // namespace hfin
