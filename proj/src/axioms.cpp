#include "snet/axioms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace snet {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNoCheck = std::numeric_limits<double>::infinity();

CheckReport start(const std::string& name, double tol) {
  CheckReport r;
  r.name = name;
  r.tol = tol;
  return r;
}

void finish(CheckReport& r, Clock::time_point t0) {
  r.pass = r.pass || r.residual <= r.tol;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXcd dense_blocks(const SiteTensorSet& ts, const ClosedMPO& P) {
  const int L = P.L;
  const std::int64_t dim = static_cast<std::int64_t>(std::pow(ts.Dv, L));
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& b : P.blocks) {
    std::vector<std::int64_t> idx;
    for (const auto& p : b.corners) {
      std::int64_t r = 0;
      for (int k = 0; k < L; ++k) r = r * ts.Dv + ts.leg(p[k], b.labels[k], p[(k + 1) % L]);
      idx.push_back(r);
    }
    for (std::size_t x = 0; x < idx.size(); ++x)
      for (std::size_t y = 0; y < idx.size(); ++y) out(idx[x], idx[y]) = b.P(x, y);
  }
  return out;
}

std::vector<std::vector<int>> tuples(int n, int L) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(L, 0);
  while (true) {
    out.push_back(t);
    int k = L - 1;
    while (k >= 0 && ++t[k] == n) t[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

CheckReport verify_mpo_injectivity(const SiteTensorSet& ts, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("mpo_injectivity", tol);
  ClosedMPO P3 = build_closed_mpo(ts, 3, kNoCheck);
  Eigen::MatrixXcd P = dense_blocks(ts, P3);
  Eigen::MatrixXcd AA = as_matrix(contract(ts.Aplus, ts.A, {{0, 3}}), {0, 1, 2}, {3, 4, 5});
  r.residual = max_abs(AA - P);

  // Injectivity on the support: A restricted to range(P_3), one block per
  // physical triple since both A and P_3 are label diagonal.
  double min_sv = kNoCheck;
  int support = 0;
  for (const auto& b : P3.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (b.P + b.P.adjoint()));
    std::vector<int> keep;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
      if (es.eigenvalues()(k) > 0.5) keep.push_back(static_cast<int>(k));
    if (keep.empty()) continue;
    support += static_cast<int>(keep.size());
    Eigen::RowVectorXcd a(b.corners.size());
    for (std::size_t x = 0; x < b.corners.size(); ++x) {
      const auto& p = b.corners[x];
      // ring corners (p0,p1,p2) are site corners (c2,c0,c1)
      a(x) = ts.site_sym(b.labels[0], b.labels[1], b.labels[2], p[1], p[2], p[0]);
    }
    Eigen::MatrixXcd U(b.corners.size(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) U.col(k) = es.eigenvectors().col(keep[k]);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a * U);
    const auto& s = svd.singularValues();
    double smin = keep.size() > static_cast<std::size_t>(s.size()) ? 0.0 : s(s.size() - 1);
    min_sv = std::min(min_sv, smin);
  }
  if (min_sv == kNoCheck) min_sv = 0;
  r.info = {{"support_dim", support}, {"rank_P3", P3.trace()}, {"min_singular_value_on_support", min_sv}};
  r.pass = r.residual <= tol && min_sv > tol;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

CheckReport verify_pulling_through(const SiteTensorSet& ts, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("pulling_through", tol);
  const int n = ts.n();
  const auto& c = ts.cat;
  // Site with legs (c[q-1], x[q], c[q]) clockwise.
  auto amp = [&](const std::array<int, 3>& x, const std::array<int, 3>& cr) {
    return ts.site(x[0], x[1], x[2], cr[0], cr[1], cr[2]);
  };
  for (int pos = 0; pos < 3; ++pos) {
    const int a = pos, b = (pos + 1) % 3, e = (pos + 2) % 3;
    // corners: before leg a, between a and b, between b and e
    const int ca = (a + 2) % 3, cab = a, cbe = b;
    for (const auto& f : tuples(n, 9)) {
      const int s = f[0];
      std::array<int, 3> x = {f[1], f[2], f[3]};
      const int mu1 = f[4], la1 = f[5], mu2 = f[6], nu2 = f[7], la2 = f[8];
      cplx lhs = 0;
      for (int nu1 = 0; nu1 < n; ++nu1) {
        std::array<int, 3> cin{};
        cin[ca] = mu1;
        cin[cab] = nu1;
        cin[cbe] = la1;
        cplx t = amp(x, cin);
        if (t == 0.0) continue;
        lhs += c.d(nu1) * t * ts.mpo(s, {mu1, x[a], nu1}, {mu2, x[a], nu2}) *
               ts.mpo(s, {nu1, x[b], la1}, {nu2, x[b], la2});
      }
      std::array<int, 3> cout{};
      cout[ca] = mu2;
      cout[cab] = nu2;
      cout[cbe] = la2;
      cplx rhs = amp(x, cout) * ts.mpo(s, {la1, x[e], mu1}, {la2, x[e], mu2});
      double d = std::abs(lhs - rhs);
      if (d > r.residual) {
        r.residual = d;
        r.worst = f;
        r.worst.push_back(pos);
      }
    }
  }
  finish(r, t0);
  return r;
}

CheckReport verify_closed_mpos(const SiteTensorSet& ts, int Lmax, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("closed_mpo_projector", tol);
  double rank_gap = 0, invariance = 0;
  for (int L = 1; L <= Lmax; ++L) {
    ClosedMPO P = build_closed_mpo(ts, L, kNoCheck);
    r.residual = std::max({r.residual, P.idempotence, P.hermiticity});
    rank_gap = std::max(rank_gap, std::abs(P.rank(1e-8) - P.trace()));
    rank_gap = std::max(rank_gap, std::abs(closed_mpo_trace(ts, L) - P.trace()));
    r.info.push_back({"trace_L" + std::to_string(L), P.trace()});
    if (L == 3) {
      Eigen::MatrixXcd A = as_matrix(ts.A, {3}, {0, 1, 2});
      invariance = max_abs(A * dense_blocks(ts, P) - A);
    }
  }
  r.residual = std::max(r.residual, invariance);
  r.info.push_back({"A_P3_minus_A", invariance});
  r.info.push_back({"rank_minus_trace", rank_gap});
  r.pass = r.residual <= tol && rank_gap < 1e-6;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

CheckReport verify_generalized_inverse(const SiteTensorSet& ts, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("generalized_inverse", tol);
  GeneralizedInverse g = find_generalized_inverse(ts, tol);
  r.residual = g.residual;
  r.info = {{"equations", g.equations}, {"output_side_cap", g.output_side ? 1.0 : 0.0}};
  for (const auto& [name, res] : g.attempts) r.info.push_back({"attempt_" + name, res});
  finish(r, t0);
  return r;
}

Region two_site_region() { return {"two_site", 2, {{{0, 0}, {1, 0}}}}; }

Region plaquette_region() {
  Region g{"plaquette", 6, {}};
  for (int k = 0; k < 6; ++k) g.bonds.push_back({{k, 0}, {(k + 1) % 6, 1}});
  return g;
}

namespace {

struct Blocked {
  int nregions = 0;
  std::vector<int> region;  // x*3+q -> region of corner q of site x
  std::map<int, int> partner;
  std::vector<int> boundary;     // legs x*3+q in ring order
  std::vector<int> left_region;  // per boundary leg
  std::vector<int> closed;
};

Blocked analyse(const Region& g) {
  const int N = 3 * g.sites;
  std::vector<int> par(N);
  std::iota(par.begin(), par.end(), 0);
  std::function<int(int)> find = [&](int a) { return par[a] == a ? a : par[a] = find(par[a]); };
  auto unite = [&](int a, int b) { par[find(a)] = find(b); };
  auto key = [](int x, int q) { return 3 * x + ((q % 3) + 3) % 3; };
  Blocked B;
  for (const auto& [u, w] : g.bonds) {
    const int x = u[0], q = u[1], y = w[0], rr = w[1];
    unite(key(x, q), key(y, rr - 1));
    unite(key(x, q - 1), key(y, rr));
    B.partner[key(x, q)] = key(y, rr);
    B.partner[key(y, rr)] = key(x, q);
  }
  std::map<int, int> rid;
  B.region.resize(N);
  for (int k = 0; k < N; ++k) {
    auto it = rid.find(find(k));
    if (it == rid.end()) it = rid.emplace(find(k), static_cast<int>(rid.size())).first;
    B.region[k] = it->second;
  }
  B.nregions = static_cast<int>(rid.size());
  int first = -1;
  for (int k = 0; k < N && first < 0; ++k)
    if (!B.partner.count(k)) first = k;
  int cur = first;
  do {
    B.boundary.push_back(cur);
    int nx = key(cur / 3, cur % 3 + 1);
    while (B.partner.count(nx)) {
      int p = B.partner[nx];
      nx = key(p / 3, p % 3 + 1);
    }
    cur = nx;
  } while (cur != first);
  std::vector<bool> on(B.nregions, false);
  for (int leg : B.boundary) {
    const int lr = B.region[key(leg / 3, leg % 3 - 1)];
    B.left_region.push_back(lr);
    on[lr] = true;
  }
  for (int k = 0; k < B.nregions; ++k)
    if (!on[k]) B.closed.push_back(k);
  return B;
}

// A_V for one boundary label tuple: rows are internal bond labels, columns
// the ring corner configurations of the boundary.
Eigen::MatrixXcd blocked_map(const SiteTensorSet& ts, const Region& g, const Blocked& B, const std::vector<int>& lab,
                             const std::vector<std::vector<int>>& corners) {
  const int n = ts.n();
  const auto& c = ts.cat;
  const int nb = static_cast<int>(g.bonds.size());
  const auto ies = tuples(n, nb);
  const auto pcs = tuples(n, static_cast<int>(B.closed.size()));
  Eigen::MatrixXcd Av = Eigen::MatrixXcd::Zero(ies.size(), corners.size());
  std::vector<int> legl(3 * g.sites, 0);
  for (std::size_t k = 0; k < B.boundary.size(); ++k) legl[B.boundary[k]] = lab[k];
  std::vector<int> pl(B.nregions, -1);
  for (std::size_t col = 0; col < corners.size(); ++col) {
    std::fill(pl.begin(), pl.end(), -1);
    bool ok = true;
    for (std::size_t k = 0; k < corners[col].size(); ++k) {
      int& slot = pl[B.left_region[k]];
      if (slot >= 0 && slot != corners[col][k]) ok = false;
      slot = corners[col][k];
    }
    if (!ok) continue;
    for (std::size_t row = 0; row < ies.size(); ++row) {
      for (int b = 0; b < nb; ++b) {
        const auto& [u, w] = g.bonds[b];
        legl[3 * u[0] + u[1]] = ies[row][b];
        legl[3 * w[0] + w[1]] = c.dual[ies[row][b]];
      }
      cplx tot = 0;
      for (const auto& pc : pcs) {
        for (std::size_t k = 0; k < B.closed.size(); ++k) pl[B.closed[k]] = pc[k];
        cplx a = 1;
        for (int x = 0; x < g.sites && a != 0.0; ++x)
          a *= ts.site_sym(legl[3 * x], legl[3 * x + 1], legl[3 * x + 2], pl[B.region[3 * x]],
                           pl[B.region[3 * x + 1]], pl[B.region[3 * x + 2]]);
        if (a == 0.0) continue;
        for (const auto& [u, w] : g.bonds)
          a /= c.v[pl[B.region[3 * u[0] + u[1]]]] * c.v[pl[B.region[3 * u[0] + (u[1] + 2) % 3]]];
        for (int k : B.closed) a *= c.d(pl[k]);
        tot += a;
      }
      Av(row, col) = tot;
    }
  }
  return Av;
}

Eigen::MatrixXcd pinv_abs(const Eigen::MatrixXcd& m, double cut) {
  if (m.size() == 0) return Eigen::MatrixXcd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) inv(k) = 1.0 / s(k);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

int rank_abs(const Eigen::MatrixXcd& m, double cut) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  int r = 0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > cut) ++r;
  return r;
}

}  // namespace

CheckReport verify_blocked_injectivity(const SiteTensorSet& ts, const Region& g, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("blocked_injectivity_" + g.name, tol);
  const int n = ts.n();
  const auto& c = ts.cat;
  const Blocked B = analyse(g);
  const int L = static_cast<int>(B.boundary.size());
  const bool composed = g.bonds.size() == 1;
  GeneralizedInverse X;
  if (composed) X = find_generalized_inverse(ts);
  const double D2 = c.D2();
  const auto ies = tuples(n, static_cast<int>(g.bonds.size()));
  int rank_av = 0;
  double trace_p = 0;
  struct Item {
    std::vector<int> lab;
    std::vector<std::vector<int>> corners;
    Eigen::MatrixXcd Av, P;
  };
  std::vector<Item> items;
  double scale = 0;
  for (const auto& lab : tuples(n, L)) {
    Item it;
    it.lab = lab;
    it.corners = ring_corners(ts, lab);
    if (it.corners.empty()) continue;
    it.Av = blocked_map(ts, g, B, lab, it.corners);
    it.P = ring_block(ts, lab).P;
    scale = std::max(scale, max_abs(it.Av));
    items.push_back(std::move(it));
  }
  const double cut = 1e-10 * std::max(scale, 1.0);
  for (auto& it : items) {
    Eigen::MatrixXcd Ap;
    if (composed) {
      // A_V+ = sum over the bond of X times the two single-site inverses.
      const auto& [u, w] = g.bonds[0];
      Ap = Eigen::MatrixXcd::Zero(it.corners.size(), ies.size());
      std::vector<int> legl(6, 0), pl(B.nregions, 0);
      for (std::size_t k = 0; k < B.boundary.size(); ++k) legl[B.boundary[k]] = it.lab[k];
      for (std::size_t col = 0; col < it.corners.size(); ++col) {
        for (std::size_t k = 0; k < it.corners[col].size(); ++k) pl[B.left_region[k]] = it.corners[col][k];
        for (std::size_t row = 0; row < ies.size(); ++row) {
          const int i = ies[row][0];
          legl[3 * u[0] + u[1]] = i;
          legl[3 * w[0] + w[1]] = c.dual[i];
          const int x1 = ts.leg(pl[B.region[3 * u[0] + (u[1] + 2) % 3]], i, pl[B.region[3 * u[0] + u[1]]]);
          const int x2 = ts.leg(pl[B.region[3 * w[0] + (w[1] + 2) % 3]], c.dual[i], pl[B.region[3 * w[0] + w[1]]]);
          if (x1 < 0 || x2 < 0) continue;
          cplx a = X.X.at({0, 0, x1, x2});
          for (int x = 0; x < 2; ++x)
            a *= std::conj(ts.site_sym(legl[3 * x], legl[3 * x + 1], legl[3 * x + 2], pl[B.region[3 * x]],
                                       pl[B.region[3 * x + 1]], pl[B.region[3 * x + 2]])) /
                 D2;
          Ap(col, row) = a;
        }
      }
    } else {
      Ap = pinv_abs(it.Av, cut);
    }
    r.residual = std::max(r.residual, max_abs(Ap * it.Av - it.P));
    rank_av += rank_abs(it.Av, cut);
    trace_p += it.P.trace().real();
  }
  r.info = {{"boundary_legs", L},
            {"rank_blocked_map", rank_av},
            {"rank_boundary_projector", trace_p},
            {"composed_with_X", composed ? 1.0 : 0.0}};
  r.pass = r.residual <= tol && std::abs(rank_av - trace_p) < 1e-6;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

CheckReport verify_rg_moves(const SiteTensorSet& ts, int L, double tol) {
  auto t0 = Clock::now();
  CheckReport r = start("rg_moves", tol);
  const int vac = ts.cat.vacuum;
  double back = 0, into = 0;
  for (const auto& lab : tuples(ts.n(), L)) {
    RingBlock small = ring_block(ts, lab);
    if (small.corners.empty()) continue;
    std::vector<int> big_lab = {vac};
    big_lab.insert(big_lab.end(), lab.begin(), lab.end());
    RingBlock big = ring_block(ts, big_lab);
    // add: corners (p0, ..., p_{L-1}) -> (p0, p0, ..., p_{L-1}); remove is its adjoint.
    Eigen::MatrixXcd add = Eigen::MatrixXcd::Zero(big.corners.size(), small.corners.size());
    for (std::size_t x = 0; x < small.corners.size(); ++x) {
      std::vector<int> p = {small.corners[x][0]};
      p.insert(p.end(), small.corners[x].begin(), small.corners[x].end());
      auto it = std::find(big.corners.begin(), big.corners.end(), p);
      if (it != big.corners.end()) add(it - big.corners.begin(), x) = 1.0;
    }
    Eigen::MatrixXcd moved = add * small.P;
    back = std::max(back, max_abs(add.adjoint() * moved - small.P));
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(big.corners.size(), big.corners.size());
    into = std::max(into, max_abs((I - big.P) * moved));
  }
  r.residual = std::max(back, into);
  r.info = {{"remove_after_add", back}, {"add_leaves_support", into}, {"L", L}};
  finish(r, t0);
  return r;
}

TeeEstimate compute_tee(const SiteTensorSet& ts, int Lmin, int Lmax, double fit_tol) {
  TeeEstimate e;
  e.expected = std::log(ts.cat.D2());
  const int m = Lmax - Lmin + 1;
  if (m < 2 || Lmin < 1) throw TensorError("TEE fit needs at least two lengths");
  Eigen::MatrixXd Am(m, 2);
  Eigen::VectorXd y(m);
  for (int k = 0; k < m; ++k) {
    const int L = Lmin + k;
    const double rk = closed_mpo_trace(ts, L);
    e.ranks.push_back({L, rk});
    Am(k, 0) = L;
    Am(k, 1) = -1;
    y(k) = std::log(rk);
  }
  Eigen::Vector2d sol = Am.colPivHouseholderQr().solve(y);
  e.slope = sol(0);
  e.gamma = sol(1);
  e.fit_residual = (Am * sol - y).cwiseAbs().maxCoeff();
  e.pass = e.fit_residual <= fit_tol;
  return e;
}

}  // namespace snet
