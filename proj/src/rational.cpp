#include "hfin/rational.hpp"

#include "hfin/errors.hpp"

namespace hfin {

Rational make_rational(long num, long den) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational parse_rational(const std::string& s) {
  Rational r;
  try {
    if (r.set_str(s, 10) != 0) throw InputError("not a rational: '" + s + "'");
  } catch (const std::invalid_argument&) {
    throw InputError("not a rational: '" + s + "'");
  }
  if (r.get_den() == 0) throw InputError("rational with zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

double to_double(const Rational& r) { return r.get_d(); }

namespace {
nlohmann::json int_json(const mpz_class& z) {
  if (z.fits_slong_p()) return static_cast<std::int64_t>(z.get_si());
  return z.get_str();
}
mpz_class int_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return mpz_class(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) return mpz_class(j.get<std::string>());
  throw InputError("expected integer in rational field");
}
}  // namespace

nlohmann::json to_json(const Rational& r) {
  return {{"num", int_json(r.get_num())}, {"den", int_json(r.get_den())}};
}

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(static_cast<long>(j.get<std::int64_t>()));
  if (!j.is_object() || !j.contains("num") || !j.contains("den"))
    throw InputError("rational must be {\"num\",\"den\"}");
  Rational r(int_from_json(j.at("num")), int_from_json(j.at("den")));
  if (r.get_den() == 0) throw InputError("rational with zero denominator");
  r.canonicalize();
  return r;
}

nlohmann::json to_json(const std::vector<Rational>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : v) a.push_back(to_json(r));
  return a;
}

Rational pow(const Rational& r, long k) {
  if (k < 0) {
    if (r == 0) throw InputError("zero to a negative power");
    Rational inv = 1 / r;
    return pow(inv, -k);
  }
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), r.get_num_mpz_t(), static_cast<unsigned long>(k));
  mpz_pow_ui(den.get_mpz_t(), r.get_den_mpz_t(), static_cast<unsigned long>(k));
  Rational out(num, den);
  out.canonicalize();
  return out;
}

mpz_class lcm(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

mpz_class gcd(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

}  // namespace hfin
