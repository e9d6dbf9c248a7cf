#include "hfin/finner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfin/errors.hpp"

namespace hfin {

namespace {

void check_inputs(const VoxelSet& S, const std::vector<CoordSubspace>& images, const ExponentVector& p) {
  if (images.size() != static_cast<std::size_t>(p.size()))
    throw InputError("one exponent per projection is required");
  for (const auto& im : images)
    if (im.n != S.d()) throw InputError("projection dimension does not match the set");
}

/// Sizes of the fibers of the coordinate projection onto `image`, restricted to active cells.
std::vector<std::size_t> fiber_sizes(const Grouping& g, const std::vector<bool>& active) {
  std::vector<std::size_t> sizes(g.count(), 0);
  for (std::size_t k = 0; k < g.group_of.size(); ++k)
    if (active[k]) ++sizes[g.group_of[k]];
  return sizes;
}

std::size_t nonzero(const std::vector<std::size_t>& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::size_t x) { return x > 0; }));
}

}  // namespace

FinnerResult finner_check(const VoxelSet& S, const std::vector<CoordSubspace>& images, const ExponentVector& p) {
  check_inputs(S, images, p);
  for (int i = 0; i < S.d(); ++i) {
    Rational sum = 0;
    for (std::size_t j = 0; j < images.size(); ++j)
      if (images[j].contains(i)) sum += p.inv_p[j];
    if (sum != 1)
      throw PreconditionError("Finner assumption fails at coordinate " + std::to_string(i + 1) + ": sum is " +
                              to_string(sum));
  }
  FinnerResult r;
  r.count = S.size();
  for (const auto& im : images) r.image_counts.push_back(pushforward_coordinate(S, im.mask).size());
  if (r.count == 0) return r;

  double log_ratio = std::log(static_cast<double>(r.count));
  for (std::size_t j = 0; j < images.size(); ++j)
    log_ratio -= to_double(p.inv_p[j]) * std::log(static_cast<double>(r.image_counts[j]));
  r.ratio = std::exp(log_ratio);

  // Exact comparison: |S|^q against prod |l_j S|^{q 1/p_j}.
  mpz_class q = 1;
  for (const auto& x : p.inv_p) q = lcm(q, x.get_den());
  mpz_class lhs, rhs = 1;
  mpz_pow_ui(lhs.get_mpz_t(), mpz_class(static_cast<unsigned long>(r.count)).get_mpz_t(), q.get_ui());
  for (std::size_t j = 0; j < images.size(); ++j) {
    Rational e = p.inv_p[j] * q;
    mpz_class f;
    mpz_pow_ui(f.get_mpz_t(), mpz_class(static_cast<unsigned long>(r.image_counts[j])).get_mpz_t(),
               e.get_num().get_ui());
    rhs *= f;
  }
  r.cmp_one = lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
  return r;
}

GenFinnerResult gen_finner_check(const VoxelSet& S, const std::vector<CoordSubspace>& images, int k,
                                 const ExponentVector& p, double eps, double c) {
  check_inputs(S, images, p);
  const int d = static_cast<int>(images.size());
  if (k < 0 || k > d) throw InputError("split index k outside 0..d");
  if (!(eps > 0 && eps < 1)) throw InputError("eps must lie in (0,1)");
  GenFinnerResult r;

  // Nesting: order the first k kernels by dimension and test the chain.
  r.nesting_order.resize(k);
  std::iota(r.nesting_order.begin(), r.nesting_order.end(), 0);
  std::stable_sort(r.nesting_order.begin(), r.nesting_order.end(),
                   [&](int a, int b) { return images[a].complement().dim() < images[b].complement().dim(); });
  r.nested = true;
  for (int t = 0; t + 1 < k; ++t)
    if (!images[r.nesting_order[t]].complement().subset_of(images[r.nesting_order[t + 1]].complement()))
      r.nested = false;

  r.assumption = true;
  for (int i = 0; i < S.d(); ++i) {
    Rational sum = 0;
    for (int j = 0; j < d; ++j) {
      bool in_kernel = !images[j].contains(i);
      if ((j < k && in_kernel) || (j >= k && !in_kernel)) sum += p.inv_p[j];
    }
    if (sum != 1 && r.assumption) {
      r.assumption = false;
      r.offending_coordinate = i;
      r.offending_sum = sum;
    }
  }

  r.refined = S;
  if (S.empty()) return r;

  const double h = S.h();
  std::vector<Grouping> groups;
  for (const auto& im : images) groups.push_back(group_by_coordinates(S, im.mask));
  std::vector<bool> active(S.size(), true);

  auto ratio_of = [&](const std::vector<bool>& act) {
    const double count = static_cast<double>(std::count(act.begin(), act.end(), true));
    const double meas = count * std::pow(h, S.d());
    double log_r = std::log(meas);
    for (int j = 0; j < d; ++j) {
      const double img = static_cast<double>(nonzero(fiber_sizes(groups[j], act))) * std::pow(h, images[j].dim());
      const double factor = j < k ? meas / img : img;
      log_r -= to_double(p.inv_p[j]) * std::log(factor);
    }
    return std::exp(log_r);
  };
  r.raw_ratio = ratio_of(active);

  // Regularity of the first k projections.
  r.eps_measured = 1.0;
  std::vector<double> beta(k);
  for (int j = 0; j < k; ++j) {
    auto sizes = fiber_sizes(groups[j], active);
    const double avg = static_cast<double>(S.size()) / static_cast<double>(nonzero(sizes));
    beta[j] = avg;
    const double mx = static_cast<double>(*std::max_element(sizes.begin(), sizes.end()));
    r.eps_measured = std::min(r.eps_measured, avg / mx);
  }
  r.regular = r.eps_measured >= eps;

  // Refinement along the nesting order: drop fibers below c * beta_j.
  r.c = c > 0 ? c : 1.0 / (4.0 * std::max(k, 1));
  for (int j : r.nesting_order) {
    auto sizes = fiber_sizes(groups[j], active);
    for (std::size_t cell = 0; cell < S.size(); ++cell)
      if (active[cell] && static_cast<double>(sizes[groups[j].group_of[cell]]) < r.c * beta[j]) active[cell] = false;
  }
  const auto kept = static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  r.kept_fraction = static_cast<double>(kept) / static_cast<double>(S.size());
  r.refined = subset(S, active);
  r.refined_ratio = kept ? ratio_of(active) : 0.0;
  return r;
}

}  // namespace hfin
