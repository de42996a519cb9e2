#include "cli_app.hpp"

#include "CLI11.hpp"

#include "jbessel/identities.hpp"
#include "jbessel/repcheck.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace jb::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct ParamDef {
  const char* name;
  const char* def;
  const char* help;
};

const std::map<std::string, std::vector<ParamDef>>& param_table() {
  static const std::map<std::string, std::vector<ParamDef>> table = {
      {"check-identities",
       {{"probes", "200", "random probes per identity"},
        {"det-pairs", "100", "random pairs for the Bergman determinant check"}}},
      {"tangency-scan",
       {{"k", "1", "orbit rank, 1 <= k <= r-1"},
        {"lambda-grid", "", "a:b:n (default kd-d : kd+d, step d/20)"},
        {"trials", "8", "vanishing fields per lambda"}}},
      {"measure-table", {}},
      {"eval-kbessel",
       {{"k", "1", "cone rank"},
        {"d", "", "cone multiplicity (default: d+ of the family, else 1)"},
        {"lambda", "0", "K-Bessel parameter"},
        {"t", "1", "spectral values, comma separated"},
        {"form", "integral1", "integral1 | integral2"}}},
      {"ode-residual",
       {{"k", "1", "cone rank"},
        {"d", "", "cone multiplicity (default: d+ of the family, else 1)"},
        {"lambdas", "0,0.5,1", "comma separated"},
        {"t", "", "points separated by ';', entries by ','"}}},
      {"gamma-check",
       {{"k", "", "cone rank (default: rank of the family, else 1)"},
        {"d", "", "cone multiplicity when no family is given"},
        {"lambdas", "", "comma separated (default (k-1)d/2 + 0.75, 1.5, 3)"}}},
      {"spherical-check",
       {{"k", "1", "orbit rank; k = r selects the full picture"},
        {"t", "", "radial points separated by ';'"},
        {"nu", "0,0.5", "full-picture parameters"},
        {"fourier-nu", "0.5,1,1.5", "parameters of the rank-one Fourier check"},
        {"force", "false", "evaluate even when the hypothesis d+ = d- fails"}}},
      {"intertwiner-check",
       {{"k", "1", "orbit rank"},
        {"pairs", "3", "test-function pairs"},
        {"mu", "0.25", "exponent of the restriction check"},
        {"d", "", "multiplicity of the restriction check (default: d+ of the family)"},
        {"clerc-t", "0.5,1,2,4", "sample points of the restriction check"}}},
      {"symmetry-check",
       {{"k", "1", "orbit rank (<= 2)"},
        {"pairs", "10", "orbit test pairs"},
        {"adjoint-pairs", "20", "Lebesgue test pairs per lambda"},
        {"lambdas", "", "adjoint parameters (default 0,1,p)"}}},
      {"norm-check", {{"k", "1", "orbit rank"}, {"grid", "20", "grid size of the integrability table"}}},
      {"orbit-int",
       {{"k", "1", "orbit rank (<= 2)"},
        {"scale", "2", "dilation of the scaling check"},
        {"consistency", "false", "compare chart and polar measures on bump fields (k = 1)"}}},
  };
  return table;
}

const std::map<std::string, const char*>& command_help() {
  static const std::map<std::string, const char*> help = {
      {"check-identities", "Jordan pair identities, dual-basis sums and the Bergman determinant"},
      {"tangency-scan", "residual of the Bessel operator against the orbit over a lambda grid"},
      {"measure-table", "existence of equivariant orbit measures with trace certificates"},
      {"eval-kbessel", "evaluate the cone K-Bessel function"},
      {"ode-residual", "K-Bessel differential equations with a negative control"},
      {"gamma-check", "Gindikin Gamma against cone quadrature"},
      {"spherical-check", "spherical vectors, radial reduction and the rank-one Fourier transform"},
      {"intertwiner-check", "restriction-to-orbit intertwiner and the restriction ratio"},
      {"symmetry-check", "adjoint identity for Lebesgue measure and symmetry on orbits"},
      {"norm-check", "L1/L2 membership of K-Bessel functions"},
      {"orbit-int", "orbit integral of a Gaussian test field"},
  };
  return help;
}

std::string param(const RunConfig& cfg, const std::string& key) {
  auto it = cfg.params.find(key);
  if (it == cfg.params.end()) throw UsageError("missing parameter --" + key);
  return it->second;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("malformed number '" + s + "' for " + what);
  }
}

double num(const RunConfig& cfg, const std::string& key) { return to_double(param(cfg, key), "--" + key); }

int integer(const RunConfig& cfg, const std::string& key) {
  double v = num(cfg, key);
  if (v != std::floor(v)) throw UsageError("--" + key + " must be an integer");
  return static_cast<int>(v);
}

bool flag(const RunConfig& cfg, const std::string& key) {
  std::string v = param(cfg, key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0" || v.empty()) return false;
  throw UsageError("--" + key + " expects true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item, what));
  return out;
}

std::vector<std::vector<double>> points(const std::string& s, const std::string& what) {
  std::vector<std::vector<double>> out;
  for (const auto& p : split(s, ';')) out.push_back(list(p, what));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

PairPtr family_pair(const RunConfig& cfg) {
  if (cfg.family.empty()) throw UsageError("--family is required for " + cfg.command);
  try {
    return std::make_shared<Pair>(AlgebraSpec::parse(cfg.family));
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad family: ") + e.what());
  }
}

OrbitContext orbit(const PairPtr& jp, int k, int k_min, int k_max) {
  if (k < k_min || k > k_max)
    throw UsageError("--k must lie in [" + std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
  return make_orbit(jp, k);
}

double cone_multiplicity(const RunConfig& cfg) {
  std::string d = param(cfg, "d");
  if (!d.empty()) return to_double(d, "--d");
  if (!cfg.family.empty()) return family_pair(cfg)->constants().d_plus;
  return 1;
}

ordered_json to_array(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr));
  return a;
}

ordered_json to_array(const std::vector<std::vector<double>>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(to_array(x));
  return a;
}

// ---------------------------------------------------------------------------

void cmd_check_identities(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  for (const auto& r : identity_suite(*jp, integer(cfg, "probes"), cfg.seed)) {
    Record rec = r.applicable ? Record::bound(r.name, r.anchor, r.residual, r.tolerance)
                              : Record::check(r.name, r.anchor, true, "not-applicable");
    rec.note = r.note;
    rep.records.push_back(rec);
  }
  std::mt19937_64 rng(cfg.seed + 101);
  const double two_p = 2 * jp->constants().p;
  const int n = jp->dim();
  double worst = 0;
  int used = 0, tries = 0;
  while (used < integer(cfg, "det-pairs") && tries < 10 * integer(cfg, "det-pairs")) {
    ++tries;
    Vec x = random_element<double>(n, rng), y = random_element<double>(n, rng);
    double det = jp->det_bergman(x, y);
    if (std::abs(det) < 1e-6) continue;
    double delta;
    try {
      delta = jp->pair_det(x, y);
    } catch (const JordanError&) {
      continue;  // Det B vanishes somewhere on the segment to the origin
    }
    worst = std::max(worst, std::abs(det - std::pow(delta, two_p)) / std::max(1.0, std::abs(det)));
    ++used;
  }
  Record rec = Record::bound("bergman_determinant", "Det B_{x,y} = Delta(x,y)^{2p}", worst, 1e-8);
  rec.note = std::to_string(used) + " pairs, " + std::to_string(tries - used) + " singular ones skipped";
  rep.records.push_back(rec);
}

void cmd_tangency_scan(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int k = integer(cfg, "k");
  OrbitContext c = orbit(jp, k, 1, jp->rank() - 1);
  const double d = jp->constants().d, kd = k * d;
  std::vector<double> grid;
  std::string spec = param(cfg, "lambda-grid");
  if (spec.empty()) {
    for (int i = 0; i <= 40; ++i) grid.push_back(kd - d + i * d / 20);
  } else {
    auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("--lambda-grid expects a:b:n");
    double a = to_double(parts[0], "--lambda-grid"), b = to_double(parts[1], "--lambda-grid");
    int m = static_cast<int>(to_double(parts[2], "--lambda-grid"));
    if (m < 2) throw UsageError("--lambda-grid needs n >= 2");
    for (int i = 0; i < m; ++i) grid.push_back(a + (b - a) * i / (m - 1));
  }
  const int trials = integer(cfg, "trials");
  TangencyScan scan = tangency_scan(c, grid, trials);
  rep.table_columns = {"lambda", "residual"};
  rep.table = ordered_json::array();
  for (size_t i = 0; i < scan.lambda.size(); ++i)
    rep.table.push_back({{"lambda", scan.lambda[i]}, {"residual", scan.residual[i]}});

  const std::string anchor = "B_lambda is tangential to the rank-k variety iff lambda = kd";
  rep.records.push_back(Record::bound("tangency_at_kd", anchor, tangency_residual(c, kd, trials), 1e-8));
  rep.records.push_back(Record::floor("tangency_below_kd", anchor, tangency_residual(c, kd - d / 2, trials), 1e-2));
  rep.records.push_back(Record::floor("tangency_above_kd", anchor, tangency_residual(c, kd + d / 2, trials), 1e-2));
  Record u = Record::check("tangency_unique_zero", anchor, scan.unique_zero_at_kd,
                           "argmin " + fmt(scan.argmin) + ", zeros " + std::to_string(scan.zeros));
  rep.records.push_back(u);
}

void cmd_measure_table(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int r = jp->rank();
  rep.table_columns = {"k", "exists", "lambda_char", "case"};
  rep.table = ordered_json::array();
  std::vector<bool> exists;
  const std::string anchor = "equivariant measure on the rank-k orbit exists except for p != q at 1 <= k <= r-1";
  for (int k = 0; k <= r; ++k) {
    OrbitContext c;
    try {
      c = make_orbit(jp, k);
    } catch (const JordanError& e) {
      Record rec = Record::check("measure_k" + std::to_string(k), anchor, false, "certificate-mismatch");
      rec.note = e.what();
      rep.records.push_back(rec);
      exists.push_back(false);
      continue;
    }
    const auto& v = c.verdict;
    exists.push_back(v.exists);
    rep.table.push_back({{"k", k}, {"exists", v.exists}, {"lambda_char", v.lambda_char}, {"case", v.case_id}});
    Record rec;
    if (v.certified && v.exists)
      rec = Record::bound("measure_k" + std::to_string(k), anchor, v.certificate_max_trace, 1e-9);
    else if (v.certified)
      rec = Record::floor("measure_k" + std::to_string(k), anchor, v.certificate_max_trace, 1e-6);
    else
      rec = Record::check("measure_k" + std::to_string(k), anchor, true, v.case_id);
    rec.verdict = v.exists ? "exists" : "refused";
    rec.note = v.reason;
    rep.records.push_back(rec);
  }
  if (jp->spec().is_rect_exception()) {
    bool pattern = true;
    for (int k = 0; k <= r; ++k) pattern = pattern && (exists[k] == (k == 0 || k == r));
    rep.records.push_back(Record::check("rect_exception_pattern", anchor, pattern,
                                        pattern ? "fails exactly at 1 <= k <= r-1" : "unexpected pattern"));
  }
}

KBesselParams kparams(const RunConfig& cfg, double lambda) {
  KBesselParams p;
  p.k = integer(cfg, "k");
  if (p.k < 1 || p.k > 3) throw UsageError("--k must lie in [1, 3]");
  p.d = cone_multiplicity(cfg);
  p.lambda = lambda;
  p.quad = cfg.quad;
  return p;
}

void cmd_eval_kbessel(const RunConfig& cfg, Report& rep) {
  KBesselParams p = kparams(cfg, num(cfg, "lambda"));
  std::vector<double> t = list(param(cfg, "t"), "--t");
  if (static_cast<int>(t.size()) != p.k) throw UsageError("--t needs exactly k values");
  std::string form = param(cfg, "form");
  if (form != "integral1" && form != "integral2") throw UsageError("--form expects integral1 or integral2");
  KValue v = kbessel_radial(p, t, form == "integral1" ? KForm::integral1 : KForm::integral2);
  rep.result = {{"value", v.value}, {"error_estimate", v.error}, {"method", v.method}};
  if (p.k == 1) {
    const double x = t[0], nu = std::abs(1 - p.lambda);
    const double exact = 2 * std::pow(x, (1 - p.lambda) / 2) * std::cyl_bessel_k(nu, 2 * std::sqrt(x));
    rep.records.push_back(Record::bound("macdonald_closed_form",
                                        "K_lambda(x) = 2 x^{(1-lambda)/2} K_{1-lambda}(2 sqrt x) in rank one",
                                        std::abs(v.value - exact) / std::abs(exact), 1e-8));
  } else {
    Record rec = Record::bound("error_estimate", "K-Bessel integral over the cone", v.error / std::abs(v.value),
                               std::max(cfg.quad.tol_rel, 1e-6));
    rep.records.push_back(rec);
  }
}

std::vector<std::vector<double>> default_ode_points(int k) {
  if (k == 1) return {{0.5}, {1.0}, {2.0}};
  if (k == 2) return {{2.0, 1.0}, {3.0, 0.5}, {1.5, 0.8}};
  return {{3.0, 2.0, 1.0}};
}

void cmd_ode_residual(const RunConfig& cfg, Report& rep) {
  const auto lambdas = list(param(cfg, "lambdas"), "--lambdas");
  KBesselParams base = kparams(cfg, 0);
  auto ts = param(cfg, "t").empty() ? default_ode_points(base.k) : points(param(cfg, "t"), "--t");
  const std::string anchor = "B^(i) K_lambda = K_lambda for the K-Bessel function of the cone";
  for (double lam : lambdas) {
    KBesselParams p = base;
    p.lambda = lam;
    std::vector<double> res, neg;
    for (const auto& t : ts) {
      if (static_cast<int>(t.size()) != p.k) throw UsageError("each --t point needs k values");
      auto r = ode_residual(p, t);
      auto c = ode_residual(p, t, lam + 1);
      res.push_back(*std::max_element(r.residual.begin(), r.residual.end()));
      neg.push_back(*std::max_element(c.residual.begin(), c.residual.end()));
    }
    Record rec = Record::bound("ode_lambda_" + fmt(lam), anchor, *std::max_element(res.begin(), res.end()), 5e-4);
    rec.data = {{"t", to_array(ts)}, {"residual", to_array(res)}};
    rep.records.push_back(rec);
    Record ctl = Record::floor("ode_control_lambda_" + fmt(lam), "operator at lambda+1 must not annihilate K_lambda",
                               *std::min_element(neg.begin(), neg.end()), 1e-2);
    ctl.data = {{"t", to_array(ts)}, {"residual", to_array(neg)}};
    rep.records.push_back(ctl);
  }
}

void cmd_gamma_check(const RunConfig& cfg, Report& rep) {
  ConeContext c;
  std::string ks = param(cfg, "k");
  if (!cfg.family.empty()) {
    auto jp = family_pair(cfg);
    int k = ks.empty() ? jp->rank() : integer(cfg, "k");
    if (k < 1 || k > jp->rank()) throw UsageError("--k must lie in [1, r]");
    c = make_cone(jp, k);
  } else {
    int k = ks.empty() ? 1 : integer(cfg, "k");
    std::string ds = param(cfg, "d");
    c = make_cone(k, ds.empty() ? 1.0 : to_double(ds, "--d"));
  }
  if (c.k > 3) throw UsageError("cone quadrature supports k <= 3");
  std::vector<double> lambdas;
  if (param(cfg, "lambdas").empty()) {
    for (double s : {0.75, 1.5, 3.0}) lambdas.push_back((c.k - 1) * c.d / 2 + s);
  } else {
    lambdas = list(param(cfg, "lambdas"), "--lambdas");
  }
  for (double lam : lambdas) {
    if (!(lam > (c.k - 1) * c.d / 2)) throw UsageError("lambda must exceed (k-1)d/2");
    const double expo = lam - c.n_over_k();
    auto f = [&](const std::vector<double>& s) {
      double v = 0, lp = 0;
      for (double x : s) {
        v += x;
        lp += std::log(x);
      }
      return std::exp(-v + expo * lp);
    };
    ConeIntegral I = cone_integrate(c, f, cfg.quad);
    const double exact = gindikin_gamma(c.k, c.d, lam);
    Record rec = Record::bound("gindikin_gamma_lambda_" + fmt(lam),
                               "int_Omega exp(-tr x) Delta(x)^{lambda - n/r} dx = Gamma_Omega(lambda)",
                               std::abs(I.value - exact) / std::abs(exact), 1e-6);
    rec.data = {{"quadrature", I.value}, {"closed_form", exact}, {"method", I.method}};
    rep.records.push_back(rec);
  }
}

void cmd_spherical_check(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const auto& C = jp->constants();
  const int k = integer(cfg, "k");
  if (k < 1 || k > C.r) throw UsageError("--k must lie in [1, r]");
  const bool force = flag(cfg, "force");
  std::vector<std::vector<double>> ts;
  if (!param(cfg, "t").empty()) ts = points(param(cfg, "t"), "--t");
  else if (k == 1) ts = {{1.0}, {2.0}, {3.5}};
  else ts = {{3.0, 1.0}, {2.0, 0.5}};

  auto push_sph = [&](const std::string& name, const std::string& anchor, const SphericalityResult& s,
                      bool refusal_expected) {
    Record rec;
    if (s.refused) {
      rec = Record::check(name, anchor, refusal_expected, "refused");
      rec.note = s.reason;
    } else {
      rec = Record::bound(name, anchor, s.max_residual, 5e-4);
      rec.data = {{"t", to_array(s.t)}, {"residual", to_array(s.residual)}, {"transverse", to_array(s.transverse)}};
    }
    rep.records.push_back(rec);
  };

  if (k < C.r) {
    OrbitContext c = make_orbit(jp, k);
    push_sph("orbit_sphericality_k" + std::to_string(k),
             "B^(i) Psi_k = t_i Psi_k for Psi_k = K^(k)_{(kd-e+1)/2}((t/2)^2)",
             sphericality_orbit(jp, k, ts, !force), !c.verdict.exists);
    if (c.verdict.exists) {
      for (auto mode : {NormMode::L1, NormMode::L2}) {
        const std::string mname = mode == NormMode::L1 ? "l1" : "l2";
        const std::string anchor = "Psi_k lies in " + std::string(mode == NormMode::L1 ? "L1" : "L2") + " of the orbit";
        try {
          NormMembership nm = norm_membership(jp, k, mode);
          Record rec = Record::check("psi_" + mname + "_norm", anchor, nm.finite, nm.finite ? "finite" : "infinite");
          if (nm.value) rec.data = {{"value", *nm.value}};
          rep.records.push_back(rec);
        } catch (const std::exception& e) {
          Record rec = Record::check("psi_" + mname + "_norm", anchor, false, "refused");
          rec.note = e.what();
          rep.records.push_back(rec);
        }
      }
    }
  } else {
    for (double nu : list(param(cfg, "nu"), "--nu")) {
      push_sph("full_sphericality_nu_" + fmt(nu), "B_{p-2nu} Psi_nu = conj x Psi_nu on the open orbit",
               sphericality_full({jp, nu}, ts, !force), false);
    }
  }

  if (C.r >= 2) {
    std::vector<double> t;
    for (int i = 0; i < C.r; ++i) t.push_back(2.0 - 0.7 * i);
    RadialFunction F = [](const std::vector<double>& s) {
      double p = 1, q = 0;
      for (double v : s) {
        p *= v;
        q += v * v;
      }
      return p * std::exp(-0.1 * q);
    };
    double worst = 0;
    for (double lam : {0.0, 1.0, C.p}) worst = std::max(worst, apply_bessel_radial(*jp, lam, F, t).rel_error);
    rep.records.push_back(Record::bound("radial_reduction", "B_lambda on invariant fields equals its radial part",
                                        worst, 1e-5));
  }

  FourierRank1 fr = fourier_rank1_check(list(param(cfg, "fourier-nu"), "--fourier-nu"));
  Record rec = Record::bound("fourier_rank1_ratio", "F phi_nu / Psi_nu is constant in x in rank one",
                             std::max(fr.within_nu, fr.across_nu), 1e-3);
  rec.data = {{"nu", to_array(fr.nu)}, {"x", to_array(fr.x)}, {"ratio", to_array(fr.ratio)},
              {"c_gamma", to_array(fr.c_gamma)}};
  rep.records.push_back(rec);
}

GaussPoly test_field(int n, const RunConfig& cfg, int i, bool isotropic) {
  return random_gauss_poly(n, cfg.seed * 1000 + static_cast<std::uint64_t>(i), isotropic);
}

void cmd_intertwiner_check(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int k = integer(cfg, "k");
  OrbitContext c = orbit(jp, k, 1, std::min(2, jp->rank() - 1));
  const std::string anchor = "T_k intertwines nu_k with -nu_k by restriction to the orbit";
  if (!c.verdict.exists) {
    Record rec = Record::check("intertwiner", anchor, true, "refused");
    rec.note = c.verdict.reason;
    rep.records.push_back(rec);
  } else {
    const int n = jp->dim();
    std::vector<double> res;
    for (int i = 0; i < integer(cfg, "pairs"); ++i) {
      auto f = test_field(n, cfg, 2 * i, true).field(), g = test_field(n, cfg, 2 * i + 1, true).field();
      res.push_back(intertwiner_spot_check(c, f, g).residual);
    }
    Record rec = Record::bound("intertwiner_symmetry", anchor, *std::max_element(res.begin(), res.end()), 1e-4);
    rec.data = {{"residual", to_array(res)}};
    rep.records.push_back(rec);
    rep.records.push_back(Record::bound("intertwiner_kernel", "T_k annihilates fields vanishing on the orbit",
                                        intertwiner_kernel_check(c, 20, cfg.seed), 1e-10));
  }
  const std::string ds = param(cfg, "d");
  const double d = ds.empty() ? jp->constants().d_plus : to_double(ds, "--d");
  ClercResult cr = clerc_restriction_check(d, num(cfg, "mu"), list(param(cfg, "clerc-t"), "--clerc-t"), 1, cfg.quad);
  Record rec = cr.in_precondition
                   ? Record::bound("restriction_ratio", "K^(k+1)_mu(t,0) / K^(k)_mu(t) is constant for mu < 1 + kd/2",
                                   cr.dispersion, 1e-2)
                   : Record::check("restriction_ratio", "restriction defined only for mu < 1 + kd/2", false,
                                   "outside precondition");
  rec.note = cr.note;
  rec.data = {{"t", to_array(cr.t)}, {"ratio", to_array(cr.ratio)}};
  rep.records.push_back(rec);
}

void cmd_symmetry_check(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int n = jp->dim();
  std::vector<double> lambdas = param(cfg, "lambdas").empty() ? std::vector<double>{0.0, 1.0, jp->constants().p}
                                                              : list(param(cfg, "lambdas"), "--lambdas");
  for (double lam : lambdas) {
    std::vector<double> res;
    for (int i = 0; i < integer(cfg, "adjoint-pairs"); ++i)
      res.push_back(adjoint_residual_lebesgue(*jp, lam, test_field(n, cfg, 2 * i, false),
                                              test_field(n, cfg, 2 * i + 1, false))
                        .residual);
    Record rec = Record::bound("adjoint_lambda_" + fmt(lam),
                               "int B_lambda f . g dx = int f . B_{2p-lambda} g dx",
                               *std::max_element(res.begin(), res.end()), 1e-6);
    rec.data = {{"residual", to_array(res)}};
    rep.records.push_back(rec);
  }
  const int k = integer(cfg, "k");
  OrbitContext c = orbit(jp, k, 1, std::min(2, jp->rank() - 1));
  const std::string anchor = "B_{kd} is symmetric for the equivariant measure on the rank-k orbit";
  if (!c.verdict.exists) {
    Record rec = Record::check("orbit_symmetry_k" + std::to_string(k), anchor, true, "refused");
    try {
      auto f = test_field(n, cfg, 0, true).field();
      orbit_symmetry_residual(c, f, f);
      rec.pass = false;
      rec.verdict = "not refused";
    } catch (const std::exception& e) {
      rec.note = e.what();
    }
    rep.records.push_back(rec);
    return;
  }
  std::vector<double> res;
  for (int i = 0; i < integer(cfg, "pairs"); ++i) {
    auto f = test_field(n, cfg, 2 * i, true).field(), g = test_field(n, cfg, 2 * i + 1, true).field();
    res.push_back(orbit_symmetry_residual(c, f, g).residual);
  }
  Record rec = Record::bound("orbit_symmetry_k" + std::to_string(k), anchor,
                             *std::max_element(res.begin(), res.end()), 1e-4);
  rec.data = {{"residual", to_array(res)}};
  rep.records.push_back(rec);
}

void cmd_norm_check(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int k = integer(cfg, "k");
  if (k < 0 || k >= jp->rank()) throw UsageError("--k must lie in [0, r-1]");
  NormMembership reduced;
  for (auto mode : {NormMode::L1, NormMode::L2}) {
    const std::string mname = mode == NormMode::L1 ? "l1" : "l2";
    const std::string anchor = "K-Bessel spherical vector of the rank-k orbit lies in " +
                               std::string(mode == NormMode::L1 ? "L1" : "L2");
    try {
      NormMembership nm = norm_membership(jp, k, mode, k == 1);
      reduced = nm;
      Record rec = Record::check("norm_" + mname, anchor, nm.finite && nm.symbolic_ok, nm.finite ? "finite" : "infinite");
      rec.data = {{"k", nm.k}, {"d_cone", nm.d_cone}, {"lambda", nm.lambda}, {"mu", nm.mu}};
      if (nm.value) rec.data["value"] = *nm.value;
      rep.records.push_back(rec);
      if (nm.reduction_gap)
        rep.records.push_back(Record::bound("norm_" + mname + "_reduction", "orbit norm equals the reduced cone norm",
                                            *nm.reduction_gap, 1e-6));
    } catch (const std::exception& e) {
      Record rec = Record::check("norm_" + mname, anchor, false, "refused");
      rec.note = e.what();
      rep.records.push_back(rec);
    }
  }

  if (reduced.k >= 1) {
    const int m = integer(cfg, "grid");
    rep.table = ordered_json::array();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double lam = -2 + 5.0 * i / (m - 1), mu = -2 + 5.0 * j / (m - 1);
        rep.table.push_back({{"lambda", lam},
                             {"mu", mu},
                             {"l1", integrable(reduced.k, reduced.d_cone, lam, mu, NormMode::L1)},
                             {"l2", integrable(reduced.k, reduced.d_cone, lam, mu, NormMode::L2)}});
      }
  }

  const std::string ianchor = "K_lambda Delta^mu is integrable iff mu > -1 and mu - lambda > -2 - (k-1)d/2";
  bool agree = true;
  ordered_json spots = ordered_json::array();
  for (auto [lam, mu] : {std::pair{0.5, 0.3}, {0.5, -1.2}, {3.5, 0.2}}) {
    DivergenceProbe dp = divergence_probe_rank1(lam, mu, NormMode::L1);
    bool fin = integrable(1, 1, lam, mu, NormMode::L1);
    agree = agree && (dp.diverges == !fin);
    spots.push_back({{"lambda", lam}, {"mu", mu}, {"finite", fin}, {"diverges", dp.diverges}});
  }
  Record probe = Record::check("integrability_probes", ianchor, agree, agree ? "agree" : "disagree");
  probe.data = spots;
  rep.records.push_back(probe);

  for (int kk : {1, 2}) {
    KBesselParams p;
    p.k = kk;
    p.d = 1;
    p.lambda = 0.5;
    p.quad = cfg.quad;
    IntegrabilityResult ir = integrability_check(p, 0.3, NormMode::L1, true);
    double gap = (ir.numeric && ir.closed_form) ? std::abs(*ir.numeric - *ir.closed_form) / std::abs(*ir.closed_form)
                                                : std::numeric_limits<double>::quiet_NaN();
    Record rec = Record::bound("l1_closed_form_k" + std::to_string(kk),
                               "int K_lambda Delta^mu = Gamma(mu + n/r) Gamma(mu - lambda + 2n/r)", gap, 1e-2);
    if (ir.numeric && ir.closed_form) rec.data = {{"numeric", *ir.numeric}, {"closed_form", *ir.closed_form}};
    rep.records.push_back(rec);
  }
}

void cmd_orbit_int(const RunConfig& cfg, Report& rep) {
  auto jp = family_pair(cfg);
  const int k = integer(cfg, "k");
  OrbitContext c = orbit(jp, k, 1, std::min(2, jp->rank() - 1));
  if (!c.verdict.exists) {
    Record rec = Record::check("orbit_integral", "equivariant measure required", true, "refused");
    rec.note = c.verdict.reason;
    rep.records.push_back(rec);
    return;
  }
  GaussPoly g = test_field(jp->dim(), cfg, 0, true);
  auto f = [&](const Vec& x) { return g(x); };
  const double value = orbit_integrate(c, f);
  rep.result = {{"value", value}, {"lambda_char", c.verdict.lambda_char}, {"case", c.verdict.case_id}};
  EquivarianceCheck sc = orbit_scaling_check(c, f, num(cfg, "scale"));
  Record rec = Record::bound("orbit_scaling", "d mu_k(s x) = s^{n lambda / p} d mu_k(x)", sc.rel_error, 1e-8);
  rec.data = {{"measured", sc.measured}, {"expected", sc.expected}};
  rep.records.push_back(rec);
  if (flag(cfg, "consistency")) {
    if (k != 1) throw UsageError("--consistency needs k = 1");
    MeasureConsistency mc = measure_consistency(c, make_bumps(c, 10, cfg.seed));
    Record m = Record::bound("chart_polar_consistency", "chart density and polar coordinates give the same measure",
                             mc.dispersion, 1e-2);
    m.data = {{"ratio", to_array(mc.ratio)}};
    rep.records.push_back(m);
  }
}

using Handler = void (*)(const RunConfig&, Report&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"check-identities", cmd_check_identities}, {"tangency-scan", cmd_tangency_scan},
      {"measure-table", cmd_measure_table},       {"eval-kbessel", cmd_eval_kbessel},
      {"ode-residual", cmd_ode_residual},         {"gamma-check", cmd_gamma_check},
      {"spherical-check", cmd_spherical_check},   {"intertwiner-check", cmd_intertwiner_check},
      {"symmetry-check", cmd_symmetry_check},     {"norm-check", cmd_norm_check},
      {"orbit-int", cmd_orbit_int},
  };
  return h;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : param_table()) v.push_back(name);
    return v;
  }();
  return names;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["command"] = command;
  j["family"] = family;
  ordered_json p = ordered_json::object();
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = p;
  j["quadrature"] = {{"method", QuadratureSpec::method_name(quad.method)},
                     {"nodes", quad.nodes},
                     {"samples", quad.samples},
                     {"seed", quad.seed},
                     {"tol_abs", quad.tol_abs},
                     {"tol_rel", quad.tol_rel}};
  ordered_json t = ordered_json::object();
  for (const auto& [k, v] : tolerances) t[k] = v;
  j["tolerances"] = t;
  j["format"] = format;
  j["out"] = out;
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::from_json(const json& src) {
  const json& j = src.contains("config") ? src.at("config") : src;
  try {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.family = j.value("family", "");
    if (j.contains("params"))
      for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.get<std::string>();
    if (j.contains("quadrature")) {
      const auto& q = j.at("quadrature");
      c.quad.method = QuadratureSpec::parse_method(q.value("method", "radial"));
      c.quad.nodes = q.value("nodes", c.quad.nodes);
      c.quad.samples = q.value("samples", c.quad.samples);
      c.quad.seed = q.value("seed", c.quad.seed);
      c.quad.tol_abs = q.value("tol_abs", c.quad.tol_abs);
      c.quad.tol_rel = q.value("tol_rel", c.quad.tol_rel);
    }
    if (j.contains("tolerances"))
      for (const auto& [k, v] : j.at("tolerances").items()) c.tolerances[k] = v.get<double>();
    c.format = j.value("format", "json");
    c.out = j.value("out", "");
    c.seed = j.value("seed", std::uint64_t{1});
    return c;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
}

Report execute(const RunConfig& in) {
  RunConfig cfg = in;
  auto it = handlers().find(cfg.command);
  if (it == handlers().end()) throw UsageError("unknown command '" + cfg.command + "'");
  for (const auto& def : param_table().at(cfg.command))
    if (!cfg.params.count(def.name)) cfg.params[def.name] = def.def;
  for (const auto& [k, _] : cfg.params) {
    bool known = false;
    for (const auto& def : param_table().at(cfg.command)) known = known || k == def.name;
    if (!known) throw UsageError("unknown parameter '" + k + "' for " + cfg.command);
  }
  if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format expects json or csv");

  Report rep;
  rep.command = cfg.command;
  rep.config = cfg.to_json();
  it->second(cfg, rep);
  for (auto& r : rep.records)
    for (const auto& [key, tol] : cfg.tolerances)
      if (r.name == key || r.name.rfind(key + "_", 0) == 0) r.set_tolerance(tol);
  return rep;
}

std::string render(const Report& report, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    if (!report.table_columns.empty()) write_table_csv(os, report.table_columns, report.table);
    else write_records_csv(os, report.records);
  } else {
    os << report.to_json().dump(2) << "\n";
  }
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical verification of Jordan-pair Bessel operators and K-Bessel functions", "jbessel_cli"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string config_path;
  app.add_option("--config", config_path, "rerun from a config JSON (or a previous report)");

  RunConfig cfg;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> format_choice;
  std::vector<std::string> tol_specs;
  std::string quad_method = "radial";

  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, command_help().at(name));
    sub->add_option("--family", cfg.family, "algebra spec: sym:R, herm_c:R, spin:N, rect:PxQ");
    sub->add_option("--quad-method", quad_method, "radial | montecarlo");
    sub->add_option("--quad-nodes", cfg.quad.nodes, "nodes per axis");
    sub->add_option("--quad-samples", cfg.quad.samples, "Monte Carlo samples");
    sub->add_option("--quad-seed", cfg.quad.seed, "Monte Carlo seed");
    sub->add_option("--tol-abs", cfg.quad.tol_abs, "absolute quadrature tolerance");
    sub->add_option("--tol-rel", cfg.quad.tol_rel, "relative quadrature tolerance");
    sub->add_option("--tol", tol_specs, "record tolerance override NAME=VALUE (repeatable)");
    sub->add_option("--format", format_choice[name], "json | csv");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--seed", cfg.seed, "seed for random test data");
    for (const auto& def : param_table().at(name))
      sub->add_option(std::string("--") + def.name, values[name][def.name], def.help);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read " + config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw UsageError(std::string("config is not JSON: ") + e.what());
      }
      cfg = RunConfig::from_json(j);
    } else {
      auto subs = app.get_subcommands();
      if (subs.empty()) {
        err << app.help();
        return 2;
      }
      cfg.command = subs.front()->get_name();
      for (const auto& def : param_table().at(cfg.command)) {
        if (subs.front()->count(std::string("--") + def.name)) cfg.params[def.name] = values[cfg.command][def.name];
      }
      cfg.quad.method = QuadratureSpec::parse_method(quad_method);
      for (const auto& s : tol_specs) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--tol expects NAME=VALUE");
        cfg.tolerances[s.substr(0, eq)] = to_double(s.substr(eq + 1), "--tol");
      }
      const std::string& f = format_choice[cfg.command];
      cfg.format = !f.empty() ? f : (cfg.command == "tangency-scan" || cfg.command == "measure-table") ? "csv" : "json";
    }
    rep = execute(cfg);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << cfg.command << " failed: " << e.what() << "\n";
    return 1;
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.timestamp = utc_timestamp();

  const std::string text = render(rep, cfg.format);
  if (cfg.out.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!(f << text)) {
      err << "error: cannot write " << cfg.out << "\n";
      return 2;
    }
  }
  if (!rep.all_pass()) {
    for (const auto& r : rep.records)
      if (!r.pass) err << "FAIL " << r.name << (r.note.empty() ? "" : ": " + r.note) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace jb::cli
