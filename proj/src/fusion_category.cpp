#include "snet/fusion_category.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace snet {

using json = nlohmann::json;

double FusionCategory::D2() const {
  double s = 0;
  for (int a = 0; a < n(); ++a) s += d(a) * d(a);
  return s;
}

bool FusionCategory::f_support(int i, int j, int m, int k, int l, int nn) const {
  return adm(i, j, m) && adm(k, l, dual[m]) && adm(i, l, nn) && adm(j, k, dual[nn]);
}

int FusionCategory::label_id(const std::string& s) const {
  for (int a = 0; a < n(); ++a)
    if (labels[a] == s) return a;
  throw CategoryError("unknown label '" + s + "'");
}

namespace {

double num(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      std::size_t pos = 0;
      double x = std::stod(j.get<std::string>(), &pos);
      if (pos == j.get<std::string>().size()) return x;
    } catch (const std::exception&) {
    }
  }
  throw CategoryError(std::string("malformed number in ") + what);
}

}  // namespace

FusionCategory load_category(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CategoryError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw CategoryError("malformed document: expected an object");
  for (const char* key : {"labels", "dual", "vacuum", "qdim_root", "fusion", "F"})
    if (!doc.contains(key)) throw CategoryError(std::string("malformed document: missing '") + key + "'");

  FusionCategory cat;
  cat.name = doc.value("name", std::string("unnamed"));
  if (!doc["labels"].is_array() || doc["labels"].empty())
    throw CategoryError("malformed document: 'labels' must be a non-empty list");
  for (const auto& l : doc["labels"]) {
    if (!l.is_string()) throw CategoryError("malformed document: labels must be strings");
    cat.labels.push_back(l.get<std::string>());
  }
  std::set<std::string> uniq(cat.labels.begin(), cat.labels.end());
  if (uniq.size() != cat.labels.size()) throw CategoryError("duplicate label");
  const int n = cat.n();

  if (!doc["vacuum"].is_string()) throw CategoryError("missing vacuum");
  cat.vacuum = cat.label_id(doc["vacuum"].get<std::string>());

  cat.dual.assign(n, -1);
  if (!doc["dual"].is_object()) throw CategoryError("malformed document: 'dual' must be a map");
  for (auto it = doc["dual"].begin(); it != doc["dual"].end(); ++it) {
    if (!it.value().is_string()) throw CategoryError("malformed document: dual values must be labels");
    cat.dual[cat.label_id(it.key())] = cat.label_id(it.value().get<std::string>());
  }
  for (int a = 0; a < n; ++a)
    if (cat.dual[a] >= 0 && cat.dual[cat.dual[a]] != a) throw CategoryError("dual not involutive");
  for (int a = 0; a < n; ++a)
    if (cat.dual[a] < 0) throw CategoryError("dual missing for label '" + cat.labels[a] + "'");
  if (cat.dual[cat.vacuum] != cat.vacuum) throw CategoryError("vacuum is not self-dual");

  cat.v.assign(n, 0.0);
  std::vector<bool> seen(n, false);
  if (!doc["qdim_root"].is_object()) throw CategoryError("malformed document: 'qdim_root' must be a map");
  for (auto it = doc["qdim_root"].begin(); it != doc["qdim_root"].end(); ++it) {
    int a = cat.label_id(it.key());
    cat.v[a] = num(it.value(), "qdim_root");
    seen[a] = true;
  }
  for (int a = 0; a < n; ++a) {
    if (!seen[a]) throw CategoryError("qdim_root missing for label '" + cat.labels[a] + "'");
    if (!(cat.v[a] > 0)) throw CategoryError("non-positive qdim_root for label '" + cat.labels[a] + "'");
  }
  if (std::abs(cat.v[cat.vacuum] - 1.0) > 1e-12) throw CategoryError("vacuum qdim_root must be 1");

  // fusion triples [a,b,c] mean c appears in a x b.
  cat.N.assign(static_cast<std::size_t>(n) * n * n, 0);
  std::set<std::array<int, 3>> triples;
  if (!doc["fusion"].is_array()) throw CategoryError("malformed document: 'fusion' must be a list");
  for (const auto& t : doc["fusion"]) {
    if (!t.is_array() || t.size() != 3) throw CategoryError("malformed fusion triple");
    std::array<int, 3> tr{cat.label_id(t[0].get<std::string>()), cat.label_id(t[1].get<std::string>()),
                          cat.label_id(t[2].get<std::string>())};
    if (!triples.insert(tr).second) throw CategoryError("fusion multiplicity above one is not supported");
    cat.N[(tr[0] * n + tr[1]) * n + cat.dual[tr[2]]] = 1;
  }
  // The all-incoming table must be invariant under the symmetries implied by
  // tetrahedral symmetry: cyclic rotation and simultaneous dualisation.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        bool x = cat.adm(a, b, c);
        if (x != cat.adm(b, c, a) || x != cat.adm(cat.dual[c], cat.dual[b], cat.dual[a]))
          throw CategoryError("fusion rules are not closed under rotation and duality");
      }
  for (int a = 0; a < n; ++a) {
    if (!cat.adm(a, cat.dual[a], cat.vacuum)) throw CategoryError("a x dual(a) must contain the vacuum");
    for (int b = 0; b < n; ++b)
      if (cat.adm(a, b, cat.vacuum) != (b == cat.dual[a]))
        throw CategoryError("vacuum channel inconsistent with dual map");
  }

  cat.F.assign(static_cast<std::size_t>(n) * n * n * n * n * n, cplx(0, 0));
  std::vector<bool> given(cat.F.size(), false);
  if (!doc["F"].is_array()) throw CategoryError("malformed document: 'F' must be a list");
  for (const auto& r : doc["F"]) {
    if (!r.is_object()) throw CategoryError("malformed F record");
    std::array<int, 6> ix{};
    const char* keys[6] = {"i", "j", "m", "k", "l", "n"};
    for (int q = 0; q < 6; ++q) {
      if (!r.contains(keys[q]) || !r[keys[q]].is_string()) throw CategoryError("malformed F record");
      ix[q] = cat.label_id(r[keys[q]].get<std::string>());
    }
    if (!cat.f_support(ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]))
      throw CategoryError("F entry on a non-admissible tuple");
    double re = r.contains("re") ? num(r["re"], "F") : 0.0;
    double im = r.contains("im") ? num(r["im"], "F") : 0.0;
    auto k = cat.fidx(ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]);
    if (given[k]) throw CategoryError("duplicate F entry");
    given[k] = true;
    cat.F[k] = cplx(re, im);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int nn = 0; nn < n; ++nn)
              if (cat.f_support(i, j, m, k, l, nn) && !given[cat.fidx(i, j, m, k, l, nn)])
                throw CategoryError("missing F entry for an admissible tuple");
  return cat;
}

FusionCategory load_category_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CategoryError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_category(ss.str());
}

std::string category_to_json(const FusionCategory& cat) {
  const int n = cat.n();
  json doc;
  doc["name"] = cat.name;
  doc["labels"] = cat.labels;
  doc["vacuum"] = cat.labels[cat.vacuum];
  json dual = json::object(), q = json::object();
  for (int a = 0; a < n; ++a) {
    dual[cat.labels[a]] = cat.labels[cat.dual[a]];
    q[cat.labels[a]] = cat.v[a];
  }
  doc["dual"] = dual;
  doc["qdim_root"] = q;
  json fus = json::array();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (cat.adm(a, b, cat.dual[c])) fus.push_back({cat.labels[a], cat.labels[b], cat.labels[c]});
  doc["fusion"] = fus;
  json fs = json::array();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int nn = 0; nn < n; ++nn) {
              if (!cat.f_support(i, j, m, k, l, nn)) continue;
              cplx x = cat.f(i, j, m, k, l, nn);
              fs.push_back({{"i", cat.labels[i]}, {"j", cat.labels[j]}, {"m", cat.labels[m]},
                            {"k", cat.labels[k]}, {"l", cat.labels[l]}, {"n", cat.labels[nn]},
                            {"re", x.real()}, {"im", x.imag()}});
            }
  doc["F"] = fs;
  return doc.dump(1);
}

cplx g_symbol(const FusionCategory& cat, int i, int j, int k, int l, int m, int nu) {
  const auto& d = cat.dual;
  return cat.f(d[i], d[j], d[k], d[l], m, d[nu]) / (cat.v[k] * cat.v[nu]);
}

GTable::GTable(const FusionCategory& cat) : n(cat.n()) {
  g.resize(static_cast<std::size_t>(n) * n * n * n * n * n);
  std::size_t q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            for (int nu = 0; nu < n; ++nu) g[q++] = g_symbol(cat, i, j, k, l, m, nu);
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note(CheckReport& r, double res, std::vector<int> where) {
  if (res > r.residual) {
    r.residual = res;
    r.worst = std::move(where);
  }
}

}  // namespace

CheckReport check_pentagon(const FusionCategory& cat, double tol) {
  auto t0 = Clock::now();
  CheckReport r;
  r.name = "pentagon";
  r.tol = tol;
  const int n = cat.n();
  const auto& d = cat.dual;
  GTable G(cat);
  int x[9];
  for (long idx = 0, tot = static_cast<long>(std::pow(n, 9)); idx < tot; ++idx) {
    long t = idx;
    for (int q = 8; q >= 0; --q) {
      x[q] = static_cast<int>(t % n);
      t /= n;
    }
    const int i = x[0], j = x[1], k = x[2], l = x[3], m = x[4], nu = x[5], a = x[6], b = x[7], c = x[8];
    cplx lhs = G(i, j, k, l, m, nu) * G(d[i], d[j], d[k], d[a], d[b], d[c]);
    cplx rhs = 0;
    for (int s = 0; s < n; ++s)
      rhs += cat.d(s) * G(k, d[a], b, s, d[m], d[l]) * G(j, d[c], a, s, d[l], d[nu]) *
             G(i, d[b], c, s, d[nu], d[m]);
    note(r, std::abs(lhs - rhs), {x, x + 9});
  }
  r.pass = r.residual <= tol;
  r.seconds = since(t0);
  return r;
}

CheckReport check_tetrahedral(const FusionCategory& cat, double tol) {
  auto t0 = Clock::now();
  CheckReport r;
  r.name = "tetrahedral";
  r.tol = tol;
  const int n = cat.n();
  const auto& d = cat.dual;
  const auto& v = cat.v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int nn = 0; nn < n; ++nn) {
              cplx f = cat.f(i, j, m, k, l, nn);
              double e = std::max({std::abs(f - cat.f(l, k, d[m], j, i, nn)),
                                   std::abs(f - cat.f(j, i, m, l, k, d[nn])),
                                   std::abs(f - cat.f(i, m, j, d[k], nn, l) * v[m] * v[nn] / (v[j] * v[l]))});
              note(r, e, {i, j, m, k, l, nn});
            }
  r.pass = r.residual <= tol;
  r.seconds = since(t0);
  return r;
}

CheckReport check_unitarity(const FusionCategory& cat, double tol) {
  auto t0 = Clock::now();
  CheckReport r;
  r.name = "unitarity";
  r.tol = tol;
  const int n = cat.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          std::vector<int> rows, cols;
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn)
              if (cat.f_support(i, j, m, k, l, nn)) {
                if (std::find(rows.begin(), rows.end(), m) == rows.end()) rows.push_back(m);
                if (std::find(cols.begin(), cols.end(), nn) == cols.end()) cols.push_back(nn);
              }
          if (rows.empty()) continue;
          if (rows.size() != cols.size()) {
            note(r, 1.0, {i, j, k, l});
            continue;
          }
          std::sort(cols.begin(), cols.end());
          Eigen::MatrixXcd M(rows.size(), cols.size());
          for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b) M(a, b) = cat.f(i, j, rows[a], k, l, cols[b]);
          const auto I = Eigen::MatrixXcd::Identity(rows.size(), rows.size());
          double e = std::max((M.adjoint() * M - I).cwiseAbs().maxCoeff(), (M * M.adjoint() - I).cwiseAbs().maxCoeff());
          note(r, e, {i, j, k, l});
        }
  r.pass = r.residual <= tol;
  r.seconds = since(t0);
  return r;
}

VerlindeResult verlinde_fusion(const Eigen::MatrixXcd& S, double tol) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) throw CategoryError("S must be square");
  for (int x = 0; x < n; ++x)
    if (std::abs(S(0, x)) < 1e-12) throw CategoryError("S row 0 contains a zero");
  VerlindeResult out;
  out.n = n;
  out.N.assign(static_cast<std::size_t>(n) * n * n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        cplx s = 0;
        for (int x = 0; x < n; ++x) s += S(a, x) * S(b, x) * std::conj(S(c, x)) / S(0, x);
        double r = std::round(s.real());
        out.max_error = std::max(out.max_error, std::abs(s - r));
        out.N[(a * n + b) * n + c] = static_cast<int>(r);
      }
  if (out.max_error > tol) throw CategoryError("Verlinde coefficients are not integral within tolerance");
  return out;
}

FusionCategory random_gauge(const FusionCategory& cat, std::uint64_t seed, bool tetrahedral) {
  const int n = cat.n();
  const auto& d = cat.dual;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::map<std::array<int, 3>, cplx> phase;
  // Symmetric gauges key a vertex by its label multiset, general ones by its
  // cyclic class only.
  auto key = [tetrahedral](int a, int b, int c) {
    std::array<int, 3> k{a, b, c};
    if (tetrahedral) {
      std::sort(k.begin(), k.end());
    } else {
      std::array<int, 3> r1{b, c, a}, r2{c, a, b};
      k = std::min({k, r1, r2});
    }
    return k;
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (!cat.adm(a, b, c)) continue;
        auto k = key(a, b, c);
        if (phase.count(k)) continue;
        cplx p = 1.0;
        if (!tetrahedral) {
          if (a != cat.vacuum && b != cat.vacuum && c != cat.vacuum) p = std::polar(1.0, ang(rng));
          phase[k] = p;
          continue;
        }
        auto kd = key(d[a], d[b], d[c]);
        if (a != cat.vacuum && b != cat.vacuum && c != cat.vacuum) {
          if (k == kd)
            p = (rng() & 1u) ? 1.0 : -1.0;
          else
            p = std::polar(1.0, ang(rng));
        }
        phase[k] = p;
        phase[kd] = std::conj(p);
      }
  auto ph = [&](int a, int b, int c) { return phase.at(key(a, b, c)); };
  FusionCategory out = cat;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int nn = 0; nn < n; ++nn) {
              if (!cat.f_support(i, j, m, k, l, nn)) continue;
              out.F[cat.fidx(i, j, m, k, l, nn)] *=
                  ph(i, j, m) * ph(k, l, d[m]) / (ph(i, l, nn) * ph(j, k, d[nn]));
            }
  return out;
}

FusionCategory perturb_entry(const FusionCategory& cat, double eps) {
  FusionCategory out = cat;
  const int n = cat.n();
  std::size_t first = cat.F.size(), pick = cat.F.size();
  for (std::size_t k = 0; k < cat.F.size(); ++k) {
    if (std::abs(cat.F[k]) < 1e-14) continue;
    if (first == cat.F.size()) first = k;
    std::size_t t = k;
    bool vac = false;
    for (int q = 0; q < 6; ++q) {
      vac |= static_cast<int>(t % n) == cat.vacuum;
      t /= n;
    }
    if (!vac) {
      pick = k;
      break;
    }
  }
  if (pick == cat.F.size()) pick = first;
  if (pick == cat.F.size()) throw CategoryError("category has no nonzero F entry");
  out.F[pick] += eps;
  return out;
}

}  // namespace snet
