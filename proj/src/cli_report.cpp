#include "snet/cli_report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "snet/axioms.hpp"
#include "snet/builtins.hpp"
#include "snet/fusion_category.hpp"
#include "snet/ground_space.hpp"
#include "snet/stringnet.hpp"

namespace snet {

namespace {

using nlohmann::json;

struct Options {
  double tol = -1;  // negative: per-check defaults
  std::string format = "text";
  double mem_limit_mib = 4096;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double perturb = 0;
  std::string builtin;
  std::string file;
  int lx = 2, ly = 2;
  int lmax = 40;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json check_json(const CheckReport& r) {
  json j = {{"name", r.name},
            {"residual", number(r.residual)},
            {"tolerance", r.tol},
            {"pass", r.pass},
            {"seconds", r.seconds}};
  if (!r.info.empty()) {
    json info = json::object();
    for (const auto& [k, v] : r.info) info[k] = number(v);
    j["info"] = info;
  }
  return j;
}

CheckReport make_check(const std::string& name, double residual, double tol) {
  CheckReport r;
  r.name = name;
  r.residual = residual;
  r.tol = tol;
  r.pass = residual <= tol;
  return r;
}

FusionCategory resolve(const Options& o) {
  if (!o.builtin.empty() && !o.file.empty()) throw InputError("give either --builtin or a category file, not both");
  if (o.builtin.empty() && o.file.empty()) throw InputError("no category given; use --builtin NAME or a file path");
  FusionCategory cat;
  try {
    cat = o.builtin.empty() ? load_category_file(o.file) : builtin(o.builtin);
  } catch (const CategoryError& e) {
    throw InputError(e.what());
  }
  if (o.seed_set) cat = random_gauge(cat, o.seed);
  if (o.perturb != 0) cat = perturb_entry(cat, o.perturb);
  return cat;
}

double pick(const Options& o, double dflt) { return o.tol > 0 ? o.tol : dflt; }

std::size_t mem_bytes(const Options& o) {
  return o.mem_limit_mib <= 0 ? 0 : static_cast<std::size_t>(o.mem_limit_mib * 1024.0 * 1024.0);
}

void print_checks(std::ostream& out, const std::vector<CheckReport>& checks) {
  for (const auto& c : checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-30s %-4s residual %.3e  tol %.1e  %.2fs", c.name.c_str(), c.pass ? "ok" : "FAIL",
                  c.residual, c.tol, c.seconds);
    out << buf << "\n";
  }
}

json base_report(const std::string& cmd, const FusionCategory& cat) {
  return {{"schema_version", kSchemaVersion}, {"command", cmd}, {"category", cat.name}, {"D2", cat.D2()}};
}

int finish(std::ostream& out, const Options& o, json report, const std::vector<CheckReport>& checks,
           const std::string& text) {
  bool pass = true;
  json arr = json::array();
  for (const auto& c : checks) {
    pass = pass && c.pass;
    arr.push_back(check_json(c));
  }
  const int code = pass ? kExitPass : kExitCheckFailed;
  report["checks"] = arr;
  report["pass"] = pass;
  report["exit_code"] = code;
  if (o.format == "json") {
    out << report.dump(2) << "\n";
  } else {
    out << text;
    print_checks(out, checks);
    out << (pass ? "PASS" : "FAIL") << "\n";
  }
  return code;
}

int cmd_verify(const Options& o, std::ostream& out) {
  FusionCategory cat = resolve(o);
  std::vector<CheckReport> checks;
  checks.push_back(check_pentagon(cat, pick(o, 1e-10)));
  checks.push_back(check_tetrahedral(cat, pick(o, 1e-10)));
  checks.push_back(check_unitarity(cat, pick(o, 1e-10)));
  SiteTensorSet ts(cat);
  checks.push_back(verify_mpo_injectivity(ts, pick(o, 1e-9)));
  checks.push_back(verify_pulling_through(ts, pick(o, 1e-9)));
  checks.push_back(verify_closed_mpos(ts, 6, pick(o, 1e-9)));
  checks.push_back(verify_generalized_inverse(ts, pick(o, 1e-8)));
  checks.push_back(verify_blocked_injectivity(ts, two_site_region(), pick(o, 1e-8)));
  checks.push_back(verify_blocked_injectivity(ts, plaquette_region(), pick(o, 1e-8)));
  checks.push_back(verify_rg_moves(ts, 3, pick(o, 1e-9)));
  std::ostringstream text;
  text << "category " << cat.name << "  labels " << cat.n() << "  D^2 " << cat.D2() << "\n";
  return finish(out, o, base_report("verify", cat), checks, text.str());
}

std::string format_matrix(const Eigen::MatrixXcd& m) {
  std::ostringstream s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s << "  ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char buf[64];
      const cplx z = m(r, c);
      const double re = std::abs(z.real()) < 5e-13 ? 0.0 : z.real();
      const double im = std::abs(z.imag()) < 5e-13 ? 0.0 : z.imag();
      if (im == 0.0)
        std::snprintf(buf, sizeof buf, "%10.6f          ", re);
      else
        std::snprintf(buf, sizeof buf, "%10.6f%+9.6fi", re, im);
      s << buf;
    }
    s << "\n";
  }
  return s.str();
}

int cmd_modular(const Options& o, std::ostream& out) {
  FusionCategory cat = resolve(o);
  const double tol = pick(o, 1e-6);
  ModularData md = modular_matrices(cat, o.lx, o.ly, mem_bytes(o));
  const int r = md.gram.degeneracy;
  std::vector<CheckReport> checks = {
      make_check("s_unitarity", md.unitarity_S, tol),
      make_check("t_diagonal", md.t_offdiag, tol),
      make_check("t_unit_modulus", std::max(md.t_modulus, md.unitarity_T), tol),
      make_check("st_cubed_vs_s_squared", md.st_relation, tol),
      make_check("s_squared_permutation", md.s2_permutation, tol),
      make_check("verlinde_integrality", md.verlinde_error, tol),
  };
  json rep = base_report("modular", cat);
  rep["lx"] = o.lx;
  rep["ly"] = o.ly;
  rep["degeneracy"] = r;
  rep["gram_spectrum"] = md.gram.spectrum;
  rep["twist"] = md.twist;
  rep["lambda"] = complex_json(md.lambda);
  rep["S_mes"] = matrix_json(md.S_mes);
  rep["T_mes"] = matrix_json(md.T_mes);
  rep["s_symmetry"] = md.s_symmetry;
  rep["largest_intermediate"] = md.gram.largest_intermediate;
  if (!md.verlinde.empty()) {
    json v = json::array();
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          if (int x = md.verlinde[(a * r + b) * r + c]; x != 0) v.push_back({a, b, c, x});
    rep["verlinde"] = v;
  }
  std::ostringstream text;
  text << "category " << cat.name << "  torus " << o.lx << "x" << o.ly << "  degeneracy " << r << "  twist "
       << md.twist << "\nS_mes\n"
       << format_matrix(md.S_mes) << "T_mes diagonal\n"
       << format_matrix(md.T_mes.diagonal().transpose());
  if (!md.verlinde.empty()) {
    text << "Verlinde N_ab^c (nonzero)\n";
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        text << "  " << a << " x " << b << " ->";
        for (int c = 0; c < r; ++c)
          if (int x = md.verlinde[(a * r + b) * r + c]; x != 0) text << " " << (x > 1 ? std::to_string(x) : "") << c;
        text << "\n";
      }
  }
  return finish(out, o, rep, checks, text.str());
}

int cmd_tee(const Options& o, std::ostream& out) {
  FusionCategory cat = resolve(o);
  if (o.lmax < 6) throw InputError("--lmax must be at least 6");
  SiteTensorSet ts(cat);
  TeeEstimate e = compute_tee(ts, o.lmax - 4, o.lmax);
  const double tol = pick(o, 1e-4);
  std::vector<CheckReport> checks = {make_check("tee_vs_log_D2", std::abs(e.gamma - e.expected), tol),
                                     make_check("tee_fit", e.fit_residual, 1e-6)};
  json rep = base_report("tee", cat);
  rep["gamma"] = e.gamma;
  rep["expected"] = e.expected;
  rep["slope"] = e.slope;
  json ranks = json::array();
  for (auto [L, rk] : e.ranks) ranks.push_back({L, rk});
  rep["ranks"] = ranks;
  char buf[200];
  std::snprintf(buf, sizeof buf, "category %s  gamma %.10f  log D^2 %.10f  slope %.8f  L %d..%d\n", cat.name.c_str(),
                e.gamma, e.expected, e.slope, o.lmax - 4, o.lmax);
  return finish(out, o, rep, checks, buf);
}

int cmd_builtin_list(const Options& o, std::ostream& out) {
  json arr = json::array();
  std::ostringstream text;
  for (const auto& name : builtin_names()) {
    FusionCategory c = builtin(name);
    arr.push_back({{"name", name}, {"labels", c.labels}, {"rank", c.n()}, {"D2", c.D2()}, {"qdim_root", c.v}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s rank %d  D^2 %.10f  labels", name.c_str(), c.n(), c.D2());
    text << buf;
    for (const auto& l : c.labels) text << " " << l;
    text << "\n";
  }
  if (o.format == "json")
    out << json({{"schema_version", kSchemaVersion}, {"command", "builtin-list"}, {"categories", arr}}).dump(2) << "\n";
  else
    out << text.str();
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"String-net PEPS verification and modular data"};
  app.require_subcommand(1);
  app.add_option("--tol", o.tol, "Tolerance for every check (default: per check)");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--mem-limit", o.mem_limit_mib, "Memory budget for torus contractions in MiB (0: none)");
  app.add_option("--seed", o.seed, "Apply a random F-gauge with this seed before running")->each([&](const std::string&) {
    o.seed_set = true;
  });
  app.add_option("--perturb", o.perturb, "Add this amount to one F entry");
  app.add_option("--builtin", o.builtin, "Built-in category");

  auto category_args = [&](CLI::App* s) {
    s->fallthrough();
    s->add_option("file", o.file, "Category JSON file");
  };
  CLI::App* verify = app.add_subcommand("verify", "Fusion category and PEPS axiom checks");
  category_args(verify);
  CLI::App* modular = app.add_subcommand("modular", "Torus ground space, S and T in the MES basis");
  category_args(modular);
  modular->add_option("--lx", o.lx, "Unit cells along x")->check(CLI::Range(2, 64));
  modular->add_option("--ly", o.ly, "Unit cells along y")->check(CLI::Range(2, 64));
  CLI::App* tee = app.add_subcommand("tee", "Topological entanglement entropy from closed MPO ranks");
  category_args(tee);
  tee->add_option("--lmax", o.lmax, "Largest loop length of the fit window");
  CLI::App* list = app.add_subcommand("builtin-list", "Embedded categories");
  list->fallthrough();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (*verify) return cmd_verify(o, out);
    if (*modular) return cmd_modular(o, out);
    if (*tee) return cmd_tee(o, out);
    return cmd_builtin_list(o, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const std::bad_alloc&) {
    err << "resource limit: out of memory\n";
    return kExitResourceLimit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace snet
