#include "snet/stringnet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace snet {

namespace {

std::vector<std::vector<int>> all_tuples(int n, int L) {
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

}  // namespace

SiteTensorSet::SiteTensorSet(const FusionCategory& c) : cat(c), G(c) {
  const int nn = n();
  std::set<std::array<int, 3>> found;
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nn; ++j)
      for (int k = 0; k < nn; ++k)
        for (int p0 = 0; p0 < nn; ++p0)
          for (int p1 = 0; p1 < nn; ++p1)
            for (int p2 = 0; p2 < nn; ++p2)
              if (std::abs(site(i, j, k, p0, p1, p2)) > 1e-12) {
                found.insert({p2, i, p0});
                found.insert({p0, j, p1});
                found.insert({p1, k, p2});
              }
  leg_slot.assign(nn * nn * nn, -1);
  for (const auto& f : found) {
    leg_slot[(f[0] * nn + f[1]) * nn + f[2]] = static_cast<int>(legs.size());
    legs.push_back({f[0], f[1], f[2]});
  }
  Dv = static_cast<int>(legs.size());
  m = nn * nn * nn;
  d_phys = nn * nn * nn;
  A = build_peps_tensor(*this);
  Aplus = build_pseudo_inverse(*this);
  M = build_mpo_tensor(*this);
}

cplx SiteTensorSet::mpo(int s, const Leg& in, const Leg& out) const {
  if (in.i != out.i) return 0;
  if (identity_only_mpo && s != cat.vacuum) return 0;
  return G(cat.dual[in.i], in.a, cat.dual[in.b], s, out.b, out.a);
}

DenseTensor build_peps_tensor(const SiteTensorSet& ts) {
  const int n = ts.n();
  DenseTensor A({ts.Dv, ts.Dv, ts.Dv, ts.d_phys}, {"leg0", "leg1", "leg2", "phys"});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int p0 = 0; p0 < n; ++p0)
          for (int p1 = 0; p1 < n; ++p1)
            for (int p2 = 0; p2 < n; ++p2) {
              const int l0 = ts.leg(p2, i, p0), l1 = ts.leg(p0, j, p1), l2 = ts.leg(p1, k, p2);
              if (l0 < 0 || l1 < 0 || l2 < 0) continue;
              A.at({l0, l1, l2, ts.phys(i, j, k)}) = ts.site_sym(i, j, k, p0, p1, p2);
            }
  return A;
}

DenseTensor build_pseudo_inverse(const SiteTensorSet& ts) {
  DenseTensor P = permute(conj(ts.A), {3, 0, 1, 2});
  const double D2 = ts.cat.D2();
  for (auto& x : P.data()) x /= D2;
  P.set_tags({"phys", "leg0", "leg1", "leg2"});
  return P;
}

DenseTensor build_mpo_tensor(const SiteTensorSet& ts) {
  const int n = ts.n();
  const auto& c = ts.cat;
  DenseTensor M({ts.m, ts.m, ts.Dv, ts.Dv}, {"int_in", "int_out", "in", "out"});
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < ts.Dv; ++x)
      for (int y = 0; y < ts.Dv; ++y) {
        const Leg& in = ts.legs[x];
        const Leg& out = ts.legs[y];
        if (in.i != out.i) continue;
        const int left = (s * n + in.a) * n + out.a;
        const int right = (s * n + in.b) * n + out.b;
        M.at({left, right, x, y}) = ts.mpo(s, in, out) * std::sqrt(c.d(in.a) * c.d(out.a));
      }
  return M;
}

std::vector<std::vector<int>> ring_corners(const SiteTensorSet& ts, const std::vector<int>& labels) {
  const int n = ts.n();
  const int L = static_cast<int>(labels.size());
  std::vector<std::vector<int>> out;
  std::vector<int> p(L, 0);
  std::function<void(int)> rec = [&](int k) {
    if (k == L) {
      if (ts.leg(p[L - 1], labels[L - 1], p[0]) >= 0) out.push_back(p);
      return;
    }
    for (int a = 0; a < n; ++a) {
      p[k] = a;
      if (k > 0 && ts.leg(p[k - 1], labels[k - 1], a) < 0) continue;
      rec(k + 1);
    }
  };
  if (L > 0) rec(0);
  return out;
}

RingBlock ring_block(const SiteTensorSet& ts, const std::vector<int>& labels) {
  const auto& c = ts.cat;
  const int n = ts.n();
  const int L = static_cast<int>(labels.size());
  RingBlock b;
  b.labels = labels;
  b.corners = ring_corners(ts, labels);
  const int sz = static_cast<int>(b.corners.size());
  b.P = Eigen::MatrixXcd::Zero(sz, sz);
  const double D2 = c.D2();
  std::vector<double> w(sz);
  for (int x = 0; x < sz; ++x) {
    double g = 1;
    for (int pk : b.corners[x]) g *= c.d(pk);
    w[x] = std::sqrt(g);
  }
  for (int q = 0; q < sz; ++q)
    for (int p = 0; p < sz; ++p) {
      const auto& P = b.corners[p];
      const auto& Q = b.corners[q];
      cplx tot = 0;
      for (int s = 0; s < n; ++s) {
        cplx t = c.d(s) / D2;
        for (int k = 0; k < L && t != 0.0; ++k) {
          const int k1 = (k + 1) % L;
          t *= ts.mpo(s, {P[k], labels[k], P[k1]}, {Q[k], labels[k], Q[k1]});
        }
        tot += t;
      }
      b.P(q, p) = tot * w[p] * w[q];
    }
  return b;
}

double ClosedMPO::trace() const {
  double t = 0;
  for (const auto& b : blocks) t += b.P.trace().real();
  return t;
}

int ClosedMPO::rank(double tol) const {
  int r = 0;
  for (const auto& b : blocks)
    if (b.P.size() && b.P.cwiseAbs().maxCoeff() > tol) r += numerical_rank(b.P, tol);
  return r;
}

SupportProjector ClosedMPO::dense(const SiteTensorSet& ts, double tol) const {
  std::int64_t dim = 1;
  for (int k = 0; k < L; ++k) dim *= ts.Dv;
  if (dim > 4096) throw TensorError("dense closed MPO too large");
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& b : blocks) {
    std::vector<std::int64_t> idx;
    for (const auto& p : b.corners) {
      std::int64_t r = 0;
      for (int k = 0; k < L; ++k) r = r * ts.Dv + ts.leg(p[k], b.labels[k], p[(k + 1) % L]);
      idx.push_back(r);
    }
    for (std::size_t x = 0; x < idx.size(); ++x)
      for (std::size_t y = 0; y < idx.size(); ++y) P(idx[x], idx[y]) = b.P(x, y);
  }
  return make_projector(std::move(P), tol);
}

ClosedMPO build_closed_mpo(const SiteTensorSet& ts, int L, double tol) {
  if (L < 1) throw TensorError("closed MPO needs L >= 1");
  ClosedMPO out;
  out.L = L;
  for (const auto& labels : all_tuples(ts.n(), L)) {
    RingBlock b = ring_block(ts, labels);
    if (b.corners.empty()) continue;
    out.idempotence = std::max(out.idempotence, (b.P * b.P - b.P).cwiseAbs().maxCoeff());
    out.hermiticity = std::max(out.hermiticity, (b.P - b.P.adjoint()).cwiseAbs().maxCoeff());
    out.blocks.push_back(std::move(b));
  }
  if (out.idempotence > tol || out.hermiticity > tol)
    throw TensorError("closed MPO is not a projector within tolerance");
  return out;
}

Eigen::MatrixXcd closed_mpo_from_M(const SiteTensorSet& ts, int L) {
  const int n = ts.n();
  const auto& c = ts.cat;
  double entries = std::pow(ts.m, 2) * std::pow(ts.Dv, 2.0 * L);
  if (entries > 5e7) throw TensorError("dense MPO contraction too large");
  // chain: [int_in, int_out, in_0, out_0, in_1, out_1, ...]
  DenseTensor chain = ts.M;
  for (int k = 1; k < L; ++k) {
    DenseTensor next = contract(chain, ts.M, {{1, 0}});
    // next: [int_in, in_0, out_0, ..., int_out, in_k, out_k]
    std::vector<int> perm = {0, 2 * k + 1};
    for (int q = 1; q <= 2 * k; ++q) perm.push_back(q);
    perm.push_back(2 * k + 2);
    perm.push_back(2 * k + 3);
    chain = permute(next, perm);
  }
  const std::int64_t dim = static_cast<std::int64_t>(std::pow(ts.Dv, L));
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<int> idx(2 + 2 * L, 0);
  const double D2 = c.D2();
  for (int s = 0; s < n; ++s)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const int b = (s * n + p) * n + q;
        for (std::int64_t in = 0; in < dim; ++in)
          for (std::int64_t out = 0; out < dim; ++out) {
            idx[0] = idx[1] = b;
            std::int64_t a = in, o = out;
            for (int k = L - 1; k >= 0; --k) {
              idx[2 + 2 * k] = static_cast<int>(a % ts.Dv);
              idx[3 + 2 * k] = static_cast<int>(o % ts.Dv);
              a /= ts.Dv;
              o /= ts.Dv;
            }
            P(out, in) += c.d(s) / D2 * chain(idx);
          }
      }
  return P;
}

double closed_mpo_trace(const SiteTensorSet& ts, int L) {
  const int n = ts.n();
  const auto& c = ts.cat;
  double tot = 0;
  for (int s = 0; s < n; ++s) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int i = 0; i < n; ++i) {
          if (ts.leg(p, i, q) < 0) continue;
          T(p, q) += (ts.mpo(s, {p, i, q}, {p, i, q}) * c.d(p)).real();
        }
    Eigen::MatrixXd Tk = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k < L; ++k) Tk = Tk * T;
    tot += c.d(s) / c.D2() * Tk.trace();
  }
  return tot;
}

namespace {

double solve_cap(const SiteTensorSet& ts, bool output_side, DenseTensor& X, int& equations) {
  const int n = ts.n();
  const auto& c = ts.cat;
  std::map<std::vector<int>, RingBlock> p3;
  auto block3 = [&](const std::vector<int>& labels) -> const RingBlock& {
    auto it = p3.find(labels);
    if (it == p3.end()) it = p3.emplace(labels, ring_block(ts, labels)).first;
    return it->second;
  };
  auto find = [](const RingBlock& b, const std::vector<int>& corners) {
    auto it = std::find(b.corners.begin(), b.corners.end(), corners);
    return it == b.corners.end() ? -1 : static_cast<int>(it - b.corners.begin());
  };
  std::map<std::pair<int, int>, int> col;
  std::vector<std::vector<std::pair<int, cplx>>> rows;
  std::vector<cplx> rhs;
  for (const auto& lab : all_tuples(n, 4)) {
    RingBlock b4 = ring_block(ts, lab);
    for (std::size_t qo = 0; qo < b4.corners.size(); ++qo)
      for (std::size_t pi = 0; pi < b4.corners.size(); ++pi) {
        // Capped side gets X, the other side the plain bond weight.
        const auto& r = b4.corners[output_side ? pi : qo];
        const auto& rc = b4.corners[output_side ? qo : pi];
        std::vector<std::pair<int, cplx>> row;
        for (int i = 0; i < n; ++i) {
          if (ts.leg(r[2], i, r[0]) < 0) continue;
          const double w = 1.0 / (c.v[r[2]] * c.v[r[0]]);
          for (int i1 = 0; i1 < n; ++i1) {
            const int l1 = ts.leg(rc[2], i1, rc[0]);
            if (l1 < 0) continue;
            for (int i2 = 0; i2 < n; ++i2) {
              const int l2 = ts.leg(rc[0], i2, rc[2]);
              if (l2 < 0) continue;
              // P3 blocks are label diagonal, so the uncapped bond label must match.
              if (i1 != i || i2 != c.dual[i]) continue;
              const RingBlock& s1 = block3({i, lab[0], lab[1]});
              const RingBlock& s2 = block3({c.dual[i], lab[2], lab[3]});
              const int a1 = find(s1, {rc[2], rc[0], rc[1]}), b1 = find(s1, {r[2], r[0], r[1]});
              const int a2 = find(s2, {rc[0], rc[2], rc[3]}), b2 = find(s2, {r[0], r[2], r[3]});
              if (a1 < 0 || b1 < 0 || a2 < 0 || b2 < 0) continue;
              cplx t = output_side ? w * s1.P(a1, b1) * s2.P(a2, b2) : w * s1.P(b1, a1) * s2.P(b2, a2);
              auto key = std::make_pair(l1, l2);
              auto it = col.find(key);
              if (it == col.end()) it = col.emplace(key, static_cast<int>(col.size())).first;
              row.push_back({it->second, t});
            }
          }
        }
        rows.push_back(std::move(row));
        rhs.push_back(b4.P(qo, pi));
      }
  }
  equations = static_cast<int>(rows.size());
  Eigen::MatrixXcd Am = Eigen::MatrixXcd::Zero(rows.size(), col.size());
  Eigen::VectorXcd bv(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto [k, v] : rows[r]) Am(r, k) += v;
    bv(r) = rhs[r];
  }
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(col.size());
  if (!col.empty()) x = solve_least_squares(Am, bv).x;
  X = DenseTensor({1, 1, ts.Dv, ts.Dv}, {"m1", "m2", "bond1", "bond2"});
  for (auto [key, k] : col) X.at({0, 0, key.first, key.second}) = x(k);
  Eigen::VectorXcd res = bv - (col.empty() ? Eigen::VectorXcd::Zero(bv.size()) : Eigen::VectorXcd(Am * x));
  return res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

GeneralizedInverse find_generalized_inverse(const SiteTensorSet& ts, double tol) {
  GeneralizedInverse g;
  g.residual = solve_cap(ts, true, g.X, g.equations);
  g.attempts.push_back({"output_side", g.residual});
  if (g.residual > tol) {
    GeneralizedInverse h;
    h.output_side = false;
    h.residual = solve_cap(ts, false, h.X, h.equations);
    g.attempts.push_back({"input_side", h.residual});
    if (h.residual < g.residual) {
      h.attempts = g.attempts;
      g = h;
    }
  }
  return g;
}

}  // namespace snet
