#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfin/rational.hpp"
#include "hfin/subspace.hpp"

namespace hfin {

/// (1/p_1, ..., 1/p_M); p_j = infinity is encoded as inv_p = 0.
struct ExponentVector {
  std::vector<Rational> inv_p;

  int size() const { return static_cast<int>(inv_p.size()); }
  bool finite(int j) const { return inv_p[j] != 0; }
  Rational p(int j) const;  ///< throws for p_j = infinity
  bool operator==(const ExponentVector&) const = default;
};

ExponentVector inv_p_from_strings(const std::vector<std::string>& v);

/// One subspace row of (B) or (C): lhs compared with rhs.
struct SubspaceRow {
  CoordSubspace V;
  Rational lhs;
  Rational rhs;
};

struct ConditionReport {
  bool in_unit_cube = true;
  Rational A_lhs, A_rhs;
  bool A = false;
  std::vector<SubspaceRow> B_rows;  ///< lhs = dim V + 1 <= rhs
  bool B = false;
  std::vector<SubspaceRow> C_rows;  ///< x-side sum == y-side sum
  bool C = false;
  std::vector<CoordSubspace> critical;  ///< equality in (B), all V in mask order
  bool B_strict = false;                ///< strict (B) at every proper V < R^n

  std::vector<CoordSubspace> proper_critical() const;  ///< {0} < V < R^n
  bool zero_critical() const;
};

ConditionReport check_conditions(const ProjectionConfig& config, const ExponentVector& p);
bool is_critical(const ProjectionConfig& config, const ExponentVector& p, const CoordSubspace& W);

/// Coefficients of 1/p_j in the right side of (B) at V.
std::vector<Rational> b_coefficients(const ProjectionConfig& config, const CoordSubspace& V);
/// Coefficients of the (C) row at V: +dim(K_j meet V) on the x-side, minus on the y-side.
std::vector<Rational> c_coefficients(const ProjectionConfig& config, const CoordSubspace& V);

struct Polytope {
  std::vector<ExponentVector> vertices;  ///< lexicographically sorted
  int equality_rank = 0;                 ///< rank of the deduplicated (A)+(C) system
  bool empty() const { return vertices.empty(); }
  bool singleton() const { return vertices.size() == 1; }
  bool singleton_B_strict = false;
};

Polytope solve_polytope(const ProjectionConfig& config);

/// Integers derived from (config, exponents); vectors indexed 0-based.
struct ArithmeticScaffold {
  int n = 0, m = 0, M = 0;
  bool degenerate = false;  ///< N = 0: the inequality reduces to Hölder
  std::int64_t q = 0;
  std::vector<std::int64_t> qj;
  std::int64_t N = 0;
  std::vector<std::int64_t> Q;  ///< per original coordinate
  std::vector<int> order;       ///< order[k] = original coordinate at sorted position k
  int m_tilde = 0;
  std::vector<int> k_tilde;
  std::vector<std::int64_t> q_tilde;
  std::vector<std::int64_t> q_dbl_tilde;
  std::vector<std::int64_t> Q_tilde;  ///< suffix sums of q_dbl_tilde
  std::vector<Rational> weights;      ///< Q_i / q
  std::int64_t q_prime = 0;
  ExponentVector intermediate;        ///< (q~_1..q~_mt, q_{m+1}..q_M) / q'
  ProjectionConfig intermediate_config;

  /// Kernel of P_j (0-based j): the first k~_j coordinates in sorted order.
  CoordSubspace p_kernel(int j) const;
  /// Image of P_j.
  CoordSubspace p_image(int j) const { return p_kernel(j).complement(); }
};

ArithmeticScaffold derive_arithmetic(const ProjectionConfig& config, const ExponentVector& p);

struct WeightTable {
  int n = 0, m = 0, M = 0;
  std::vector<std::vector<bool>> in_kernel;  ///< [j][i]: e_i in K_j
  ExponentVector p;
  std::vector<Rational> wX, wY;
};

WeightTable weights(const ProjectionConfig& config, const ExponentVector& p);
std::string weight_table_csv(const WeightTable& t);
nlohmann::json to_json(const WeightTable& t);

enum class BaseCase { HolderReducible, SingletonBaseCase, BoundaryExtremes, CriticalReduction, Empty };
std::string to_string(BaseCase c);

struct Classification {
  BaseCase kind = BaseCase::Empty;
  Polytope polytope;
  std::optional<ExponentVector> probe;  ///< relative-interior point used for criticality
  std::optional<CoordSubspace> W;
  std::optional<Restriction> restriction;
  bool extremes_have_infinite_p = false;
  bool holder_dichotomy = false;  ///< every finite p_j has n_j = n (checked when {0} is critical)
};

Classification classify_base_case(const ProjectionConfig& config);

nlohmann::json to_json(const ExponentVector& p);
nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const Polytope& p);
nlohmann::json to_json(const ArithmeticScaffold& s);
nlohmann::json to_json(const Classification& c);

}  // namespace hfin
