#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfin/box_union.hpp"
#include "hfin/exponents.hpp"
#include "hfin/subspace.hpp"
#include "hfin/voxel.hpp"

namespace hfin {

struct NamedExample {
  std::string name;
  ProjectionConfig config;                 ///< n = 0 for flat families
  std::optional<ExponentVector> expected;  ///< admissible 1/p as published, in configuration order
  std::vector<Rational> expected_weights;  ///< w(X_i) = w(Y_i), i = 1..n
  std::string source;                      ///< where expected values come from
  std::string note;                        ///< discrepancies between the published values and the conditions

  /// Coordinate projections in R^d for flat families; empty otherwise.
  std::vector<CoordSubspace> flat_images;
  std::optional<ExponentVector> flat_p;
};

/// ex2_2 .. ex2_5, radon_h1, holder(n,M), loomis_whitney_flat(n). Throws InputError for unknown names.
NamedExample builtin_config(const std::string& name);
std::vector<std::string> builtin_names();

/// Weight table with kernel membership rows; only the four published configurations are accepted.
struct TableReport {
  std::string name;
  WeightTable table;
  std::vector<std::vector<std::string>> rows;  ///< row j: "X_i" / "Y_i" entries or "" per coordinate
  std::vector<Rational> weight_row;
  bool matches_expected = false;
};

TableReport table_report(const std::string& name);
nlohmann::json to_json(const TableReport& t);

/// One evaluation of a counterexample family at scale N. Quantities are exact.
struct CounterexampleRecord {
  std::string name;
  long N = 0;
  double h = 0;
  std::vector<std::pair<std::string, Rational>> quantities;
  std::vector<std::pair<std::string, std::string>> claimed;  ///< published asymptotic statements
  std::string statistic_name;
  Rational statistic;   ///< the quantity whose direction is asserted
  int direction = 0;    ///< -1: should decrease with N, +1: increase, 0: equals `target`
  Rational target;
  BoxUnion boxes{1};    ///< the set, when it is a union of boxes (flowed coordinates for the group example)

  const Rational& get(const std::string& key) const;
};

/// Names: A1, A2, A3, A4. Requires N >= 2 and h <= 1/(4N).
CounterexampleRecord counterexample_set(const std::string& name, long N, double h);
/// Rasterization of a box-union counterexample; throws InputError above the cell guard.
VoxelSet counterexample_voxels(const CounterexampleRecord& r, std::size_t guard = kDefaultCellGuard);

struct SweepAssertion {
  std::string name;
  std::vector<CounterexampleRecord> records;
  std::vector<double> step_factors;  ///< statistic(N_{k+1}) / statistic(N_k), inverted for decreasing families
  double required_factor = 1.5;
  bool direction_holds = false;      ///< every step moves the right way
  bool rate_holds = false;           ///< every step factor >= required_factor (direction 0: exact target)
  double log_spread = 0;             ///< A1 only: max/min of |Omega| / log N
  bool log_spread_holds = true;
  bool holds() const { return direction_holds && rate_holds && log_spread_holds; }
};

std::vector<long> default_sweep(const std::string& name);
SweepAssertion counterexample_sweep(const std::string& name, const std::vector<long>& Ns, double h_factor = 0.25);

/// |Omega| / prod |pi_j Omega|^{1/p_j} over boxes, flowed boxes, paraballs and a paraball pair.
struct RwtSample {
  std::string name;
  std::size_t cells = 0;
  double ratio = 0;
};

struct RwtEnvelope {
  double h = 0;
  std::uint64_t seed = 0;
  std::vector<RwtSample> samples;
  double max_ratio = 0;
  double envelope = 0;
  bool holds = false;
};

RwtEnvelope rwt_envelope(const ProjectionConfig& config, const ExponentVector& p, double h, std::uint64_t seed,
                         double envelope = 4.0);

nlohmann::json to_json(const RwtEnvelope& e);
nlohmann::json to_json(const CounterexampleRecord& r);
nlohmann::json to_json(const SweepAssertion& s);

}  // namespace hfin
