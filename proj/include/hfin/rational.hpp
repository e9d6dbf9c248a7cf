#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hfin {

using Rational = mpq_class;

Rational make_rational(long num, long den = 1);

/// Parses "3/7", "-2", "5".
Rational parse_rational(const std::string& s);

std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// {"num": .., "den": ..}; integers that overflow int64 are emitted as strings.
nlohmann::json to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<Rational>& v);

/// r^k for integer k (negative allowed when r != 0).
Rational pow(const Rational& r, long k);

mpz_class lcm(const mpz_class& a, const mpz_class& b);
mpz_class gcd(const mpz_class& a, const mpz_class& b);

}  // namespace hfin
