// hfin: command-line front end for the Heisenberg Finner-type inequality toolkit.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hfin/errors.hpp"
#include "hfin/examples.hpp"
#include "hfin/exponents.hpp"
#include "hfin/finner.hpp"
#include "hfin/heisenberg.hpp"
#include "hfin/paraball.hpp"
#include "hfin/regularity.hpp"
#include "hfin/report.hpp"
#include "hfin/voxel.hpp"

using nlohmann::json;
using namespace hfin;

namespace {

/// Set when a report's assertions fail; turns into exit code 1.
struct AssertionFailure : std::runtime_error {
  std::vector<std::string> invariants;
  json report;
  AssertionFailure(std::vector<std::string> inv, json rep)
      : std::runtime_error("assertion failed"), invariants(std::move(inv)), report(std::move(rep)) {}
};

struct Options {
  std::string format = "json";
  std::uint64_t seed = 1;
  double h = 0;
  bool timing = false;
  std::string config_path;
  std::string example;
  std::string inv_p;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

struct LoadedConfig {
  ProjectionConfig config;
  std::optional<ExponentVector> p;
  json source;
  std::string note;
};

ExponentVector parse_inv_p(const std::string& csv) {
  std::vector<std::string> parts;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) parts.push_back(tok);
  return inv_p_from_strings(parts);
}

LoadedConfig load_config(const Options& o, bool require_p = false) {
  LoadedConfig c;
  if (!o.config_path.empty()) {
    json j = parse_json_file(o.config_path);
    c.config = config_from_json(j);
    if (j.contains("inv_p")) {
      std::vector<std::string> v;
      for (const auto& x : j.at("inv_p")) v.push_back(x.is_string() ? x.get<std::string>() : x.dump());
      c.p = inv_p_from_strings(v);
    }
    c.source = j;
  } else {
    NamedExample e = builtin_config(o.example.empty() ? "radon_h1" : o.example);
    if (e.config.n == 0) throw InputError(e.name + " is a flat family, not a Heisenberg configuration");
    c.config = e.config;
    c.p = e.expected;
    c.note = e.note;
    c.source = {{"example", e.name}};
  }
  c.config.validate();
  if (!o.inv_p.empty()) c.p = parse_inv_p(o.inv_p);
  if (!c.p) {
    Polytope poly = solve_polytope(c.config);
    if (poly.singleton()) c.p = poly.vertices.front();
  }
  if (require_p && !c.p) throw InputError("no exponents given and the admissible polytope is not a singleton; pass --p");
  if (c.p && c.p->size() != c.config.M()) throw InputError("exponent vector length differs from M");
  return c;
}

RunManifest manifest(int argc, char** argv, const Options& o, const json& source, std::vector<double> res = {}) {
  RunManifest m;
  for (int k = 0; k < argc; ++k) m.command_line.push_back(argv[k]);
  m.config_hash = config_hash(source);
  m.seed = o.seed;
  m.resolutions = std::move(res);
  return m;
}

void emit(const Options& o, const RunManifest& m, const json& result, const std::vector<std::string>& failed,
          const std::string& csv_override = "") {
  json rep = make_report(m, result, failed.empty(), failed);
  if (o.format == "csv") std::cout << (csv_override.empty() ? to_csv(rep) : csv_override);
  else std::cout << rep.dump(2) << "\n";
  if (!failed.empty()) throw AssertionFailure(failed, rep);
}

VoxelSet load_voxels(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") return voxelset_from_json(parse_json_file(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_vxl1(in);
}

Paraball load_paraball(const std::string& path, const ProjectionConfig& c, const ArithmeticScaffold& s) {
  return paraball_from_json(parse_json_file(path), measurement_family(c, &s));
}

Paraball default_paraball(const ProjectionConfig& c, const ArithmeticScaffold& s) {
  return make_paraball(ExactHPoint::identity(c.n), std::vector<Rational>(c.n, Rational(1)), Rational(1),
                       measurement_family(c, &s));
}

std::vector<Rational> parse_rationals(const std::string& csv) {
  std::vector<Rational> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_rational(tok));
  return out;
}

std::vector<long> parse_longs(const std::string& csv) {
  std::vector<long> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stol(tok));
    } catch (const std::exception&) {
      throw InputError("not an integer: '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for Finner-type multilinear inequalities on the Heisenberg group"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool with_config = true) {
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--h", o.h, "grid resolution");
    sub->add_flag("--timing", o.timing, "record wall time in the manifest");
    if (with_config) {
      sub->add_option("--config", o.config_path, "configuration JSON {n, m, subspaces, inv_p?}");
      sub->add_option("--example", o.example, "builtin configuration name");
      sub->add_option("--p", o.inv_p, "exponents as 1/p_j, comma separated");
    }
  };

  auto* solve = app.add_subcommand("solve", "admissible exponent polytope");
  common(solve);
  auto* analyze = app.add_subcommand("analyze", "conditions, scaffold, weights and base-case classification");
  common(analyze);

  auto* vfin = app.add_subcommand("verify-finner", "counting-measure Finner inequality");
  common(vfin, false);
  int grid = 2, dim = 3;
  bool exhaustive = false;
  std::string family = "loomis-whitney", input;
  vfin->add_option("--grid", grid, "grid side k");
  vfin->add_option("--dim", dim, "ambient dimension");
  vfin->add_flag("--exhaustive", exhaustive, "enumerate every subset of the grid");
  vfin->add_option("--family", family, "loomis-whitney or holder")->check(CLI::IsMember({"loomis-whitney", "holder"}));
  vfin->add_option("--input", input, "VXL1 or JSON voxel set instead of enumeration");

  auto* vrwt = app.add_subcommand("verify-rwt", "restricted weak-type ratio over structured sets");
  common(vrwt);
  double envelope = 4.0;
  vrwt->add_option("--envelope", envelope, "upper bound asserted for the ratio");

  auto* cls = app.add_subcommand("classify", "regularity report of a voxel set");
  common(cls);
  std::string cls_input, cls_paraball;
  cls->add_option("--input", cls_input, "VXL1 or JSON voxel set in H^n");
  cls->add_option("--paraball", cls_paraball, "paraball JSON to voxelize instead");

  auto* pb = app.add_subcommand("paraball", "paraball geometry");
  pb->require_subcommand(1);
  pb->set_help_flag("--help", "print this help and exit");
  std::string pb_file, pb_file2, lambda, lambda_star, a_str = "1", delta_str = "1/2";
  int cells_per_radius = 32;
  auto* pb_report = pb->add_subcommand("report", "analytic measure table");
  auto* pb_scale = pb->add_subcommand("scale", "exact scaling law");
  auto* pb_cover = pb->add_subcommand("cover", "covering by smaller paraballs");
  auto* pb_overlap = pb->add_subcommand("overlap", "overlap of projection images");
  for (auto* s : {pb_report, pb_scale, pb_cover, pb_overlap}) {
    common(s);
    s->add_option("--paraball", pb_file, "paraball JSON {z, r, rho, frame?}");
  }
  pb_scale->add_option("--lambda", lambda, "lambda_i, comma separated")->required();
  pb_scale->add_option("--lambda-star", lambda_star, "lambda*_i, comma separated")->required();
  pb_scale->add_option("--a", a_str, "vertical factor a");
  pb_cover->add_option("--delta", delta_str, "covering scale delta in (0,1]");
  pb_overlap->add_option("--other", pb_file2, "second paraball JSON")->required();
  pb_overlap->add_option("--cells", cells_per_radius, "grid points per radius");

  auto* ex = app.add_subcommand("example", "builtin configurations and counterexample families");
  common(ex, false);
  std::string ex_name, sweep;
  ex->add_option("name", ex_name, "ex2_2..ex2_5, radon_h1, holder(n,M), loomis_whitney_flat(n), A1..A4")->required();
  ex->add_option("--sweep", sweep, "values of N, comma separated");

  auto* jac = app.add_subcommand("jacobian-check", "finite-difference check of the inflation-map Jacobian");
  common(jac);
  int trials = 100;
  jac->add_option("--trials", trials, "number of random inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto finish_manifest = [&](RunManifest& m) {
    if (o.timing) m.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    if (*solve) {
      LoadedConfig c = load_config(o);
      Polytope poly = solve_polytope(c.config);
      json r;
      r["config"] = to_json(c.config);
      r["polytope"] = to_json(poly);
      if (!c.note.empty()) r["note"] = c.note;
      std::vector<std::string> failed;
      for (const auto& v : poly.vertices) {
        ConditionReport cr = check_conditions(c.config, v);
        if (!cr.A || !cr.B || !cr.C) failed.push_back("vertex satisfies (A), (B), (C)");
      }
      RunManifest m = manifest(argc, argv, o, c.source);
      finish_manifest(m);
      emit(o, m, r, failed);
    } else if (*analyze) {
      LoadedConfig c = load_config(o, true);
      json r;
      r["config"] = to_json(c.config);
      ConditionReport cr = check_conditions(c.config, *c.p);
      r["conditions"] = to_json(cr);
      WeightTable wt = weights(c.config, *c.p);
      r["weights"] = to_json(wt);
      r["classification"] = to_json(classify_base_case(c.config));
      if (!c.note.empty()) r["note"] = c.note;
      std::vector<std::string> failed;
      if (cr.A && cr.C && cr.B_strict) {
        r["scaffold"] = to_json(derive_arithmetic(c.config, *c.p));
      } else {
        r["scaffold"] = nullptr;
        r["scaffold_skipped"] = "requires (A), (C) and strict (B) at every proper subspace";
      }
      RunManifest m = manifest(argc, argv, o, c.source);
      finish_manifest(m);
      emit(o, m, r, failed, o.format == "csv" ? weight_table_csv(wt) : "");
    } else if (*vfin) {
      if (dim < 1 || dim > 6 || grid < 1) throw InputError("verify-finner: need 1 <= dim <= 6 and grid >= 1");
      std::vector<CoordSubspace> images;
      ExponentVector p;
      if (family == "loomis-whitney") {
        NamedExample e = builtin_config("loomis_whitney_flat(" + std::to_string(dim) + ")");
        images = e.flat_images;
        p = *e.flat_p;
      } else {
        images = {CoordSubspace::full(dim), CoordSubspace::full(dim)};
        p = ExponentVector{{Rational(1, 2), Rational(1, 2)}};
      }
      json r;
      r["family"] = family;
      r["dim"] = dim;
      double max_ratio = 0;
      std::size_t sets = 0, at_max = 0;
      std::vector<std::string> failed;
      json argmax;
      auto check = [&](const VoxelSet& S) {
        FinnerResult f = finner_check(S, images, p);
        ++sets;
        if (f.cmp_one > 0) failed.push_back("counting Finner ratio <= 1");
        if (f.ratio > max_ratio + 1e-12) {
          max_ratio = f.ratio;
          at_max = 1;
          argmax = S.size();
        } else if (std::abs(f.ratio - max_ratio) <= 1e-12) {
          ++at_max;
        }
      };
      if (!input.empty()) {
        check(load_voxels(input));
      } else {
        if (!exhaustive) throw InputError("verify-finner needs --input or --exhaustive");
        long cells = 1;
        for (int k = 0; k < dim; ++k) cells *= grid;
        if (cells > 20) throw InputError("exhaustive enumeration limited to 20 cells");
        for (long mask = 1; mask < (1L << cells); ++mask) {
          std::vector<std::int32_t> flat;
          for (long c = 0; c < cells; ++c) {
            if (!((mask >> c) & 1L)) continue;
            long rem = c;
            for (int k = 0; k < dim; ++k) {
              flat.push_back(static_cast<std::int32_t>(rem % grid));
              rem /= grid;
            }
          }
          check(VoxelSet::from_cells(dim, 1.0, flat));
        }
      }
      r["sets_checked"] = sets;
      r["max_ratio"] = max_ratio;
      r["sets_at_max"] = at_max;
      r["size_of_first_maximizer"] = argmax;
      r["provenance"] = "exact";
      std::sort(failed.begin(), failed.end());
      failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
      RunManifest m = manifest(argc, argv, o, {{"family", family}, {"dim", dim}, {"grid", grid}});
      finish_manifest(m);
      emit(o, m, r, failed);
    } else if (*vrwt) {
      LoadedConfig c = load_config(o, true);
      double h = o.h > 0 ? o.h : 1.0 / 16;
      RwtEnvelope env = rwt_envelope(c.config, *c.p, h, o.seed, envelope);
      RunManifest m = manifest(argc, argv, o, c.source, {h});
      finish_manifest(m);
      emit(o, m, to_json(env), env.holds ? std::vector<std::string>{} : std::vector<std::string>{"ratio below envelope"});
    } else if (*cls) {
      LoadedConfig c = load_config(o, true);
      VoxelSet S;
      std::vector<double> res;
      if (!cls_input.empty()) {
        S = load_voxels(cls_input);
      } else {
        ArithmeticScaffold sc = derive_arithmetic(c.config, *c.p);
        Paraball B = cls_paraball.empty() ? default_paraball(c.config, sc) : load_paraball(cls_paraball, c.config, sc);
        S = voxelize_paraball(B, o.h > 0 ? o.h : to_double(B.rho) / 16);
      }
      res.push_back(S.h());
      RegularityReport rep = classify(S, c.config, *c.p);
      RunManifest m = manifest(argc, argv, o, c.source, res);
      finish_manifest(m);
      emit(o, m, to_json(rep), {});
    } else if (*pb) {
      LoadedConfig c = load_config(o, true);
      ArithmeticScaffold sc = derive_arithmetic(c.config, *c.p);
      Paraball B = pb_file.empty() ? default_paraball(c.config, sc) : load_paraball(pb_file, c.config, sc);
      json r;
      r["paraball"] = to_json(B);
      std::vector<std::string> failed;
      std::vector<double> res;
      if (*pb_report) {
        ParaballTable t = paraball_measures(B, c.config, sc);
        r["measures"] = to_json(t);
        r["quasiextremal_ratio"] = quasiextremal_ratio(t, *c.p);
        r["quasiextremal_form"] = quasiextremal_form(t, *c.p).str();
      } else if (*pb_scale) {
        ScalingReport s = verify_scaling(B, parse_rationals(lambda), parse_rationals(lambda_star), parse_rational(a_str),
                                         c.config, *c.p, sc);
        r["scaling"] = to_json(s);
        r["scaled"] = to_json(scale_paraball(B, parse_rationals(lambda), parse_rationals(lambda_star), parse_rational(a_str)));
        if (!s.all_exact) failed.push_back("exact scaling law");
        if (!s.quasi_invariant) failed.push_back("quasiextremal ratio invariant under scaling");
      } else if (*pb_cover) {
        Covering cov = covering(B, parse_rational(delta_str), c.config, sc);
        double h = o.h > 0 ? o.h : to_double(cov.delta * cov.delta) / 8;
        CoverageAudit audit = coverage_audit(B, cov, h);
        res.push_back(h);
        r["covering"] = to_json(cov, 4);
        r["audit"] = {{"cells", audit.cells}, {"uncovered", audit.uncovered}, {"h", audit.h}};
        if (audit.uncovered) failed.push_back("covering contains every cell of the paraball");
        if (!cov.measures_exact) failed.push_back("projection measures scale by delta^A");
      } else {
        Paraball B2 = load_paraball(pb_file2, c.config, sc);
        r["other"] = to_json(B2);
        r["overlap"] = to_json(overlap_estimate(B, B2, c.config, sc, cells_per_radius));
      }
      RunManifest m = manifest(argc, argv, o, c.source, res);
      finish_manifest(m);
      emit(o, m, r, failed);
    } else if (*ex) {
      std::string upper = ex_name;
      upper.erase(std::remove(upper.begin(), upper.end(), '.'), upper.end());
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
      json r;
      std::vector<std::string> failed;
      if (upper == "A1" || upper == "A2" || upper == "A3" || upper == "A4") {
        std::vector<long> Ns = sweep.empty() ? default_sweep(upper) : parse_longs(sweep);
        SweepAssertion s = counterexample_sweep(upper, Ns);
        r = to_json(s);
        if (!s.direction_holds) failed.push_back(upper + ": asserted direction across the sweep");
        else if (!s.rate_holds) failed.push_back(upper + ": factor " + std::to_string(s.required_factor) + " per doubling");
        if (!s.log_spread_holds) failed.push_back(upper + ": |Omega| / log N within 30%");
      } else {
        NamedExample e = builtin_config(ex_name);
        r["name"] = e.name;
        r["source"] = e.source;
        if (!e.note.empty()) r["note"] = e.note;
        if (e.config.n > 0) {
          r["config"] = to_json(e.config);
          Polytope poly = solve_polytope(e.config);
          r["polytope"] = to_json(poly);
          if (e.expected) {
            r["expected"] = to_json(*e.expected);
            bool match = poly.singleton() && poly.vertices.front() == *e.expected;
            r["matches_expected"] = match;
            if (!match) failed.push_back("solver reproduces the expected exponents");
          }
          if (e.name.rfind("ex2_", 0) == 0) {
            TableReport t = table_report(e.name);
            r["table"] = to_json(t);
            if (!t.matches_expected) failed.push_back("weight table matches");
          }
        } else {
          json imgs = json::array();
          for (const auto& w : e.flat_images) imgs.push_back(w.str());
          r["images"] = imgs;
          r["p"] = to_json(*e.flat_p);
        }
      }
      RunManifest m = manifest(argc, argv, o, {{"example", ex_name}, {"sweep", sweep}});
      finish_manifest(m);
      emit(o, m, r, failed);
    } else if (*jac) {
      if (o.example.empty() && o.config_path.empty()) o.example = "ex2_3";
      LoadedConfig c = load_config(o, true);
      ArithmeticScaffold sc = derive_arithmetic(c.config, *c.p);
      JacobianSweep sw = jacobian_sweep(sc, trials, o.seed);
      json r = {{"trials", sw.trials},
                {"passes", sw.passes},
                {"flagged_near_singular", sw.flagged_near_singular},
                {"unexplained_failures", sw.unexplained},
                {"max_rel_err_regular", sw.max_rel_err_regular},
                {"tolerance", 1e-6},
                {"provenance", provenance_mc(static_cast<std::size_t>(trials), o.seed)}};
      std::vector<std::string> failed;
      if (sw.unexplained > 0 || sw.passes * 100 < 99 * sw.trials) failed.push_back("|det D Psi| = prod |det u^{j,l}|");
      RunManifest m = manifest(argc, argv, o, c.source);
      finish_manifest(m);
      emit(o, m, r, failed);
    }
  } catch (const AssertionFailure& e) {
    for (const auto& inv : e.invariants) std::cerr << "assertion failed: " << inv << "\n";
    return 1;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
