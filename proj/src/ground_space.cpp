#include "snet/ground_space.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace snet {

TorusLattice make_torus(int Lx, int Ly) {
  if (Lx < 1 || Ly < 1) throw TensorError("torus needs at least one cell in each direction");
  TorusLattice lat;
  lat.Lx = Lx;
  lat.Ly = Ly;
  std::map<std::tuple<char, int, int>, int> vid;
  for (int x = 0; x < Lx; ++x)
    for (int y = 0; y < Ly; ++y)
      for (char s : {'a', 'b'}) {
        vid[{s, x, y}] = static_cast<int>(lat.vertices.size());
        lat.vertices.push_back({s, x, y});
      }
  for (int x = 0; x < Lx; ++x)
    for (int y = 0; y < Ly; ++y) {
      const int a = vid[{'a', x, y}];
      lat.edges.push_back({a, vid[{'b', x, y}], 'z'});
      lat.edges.push_back({a, vid[{'b', (x + 1) % Lx, y}], 'x'});
      lat.edges.push_back({a, vid[{'b', x, (y + 1) % Ly}], 'y'});
    }
  // Edge directions in degrees around a and b vertices.
  auto angle = [](char vk, char ek) {
    if (vk == 'a') return ek == 'x' ? 30 : ek == 'y' ? 150 : 270;
    return ek == 'z' ? 90 : ek == 'x' ? 210 : 330;
  };
  std::vector<std::vector<std::pair<int, int>>> inc(lat.vertices.size());
  for (std::size_t e = 0; e < lat.edges.size(); ++e) {
    const auto& E = lat.edges[e];
    inc[E.tail].push_back({angle('a', E.kind), static_cast<int>(e)});
    inc[E.head].push_back({angle('b', E.kind), static_cast<int>(e)});
  }
  for (auto& l : inc) {
    std::sort(l.begin(), l.end());
    lat.ccw.push_back({l[0].second, l[1].second, l[2].second});
  }
  // Walk each face keeping it on the left.
  std::map<std::pair<int, int>, int> seen;
  for (int v = 0; v < static_cast<int>(lat.vertices.size()); ++v)
    for (int k = 0; k < 3; ++k) {
      if (seen.count({v, k})) continue;
      const int f = static_cast<int>(lat.faces.size());
      std::vector<std::pair<int, int>> cyc;
      int cv = v, ck = k;
      while (!seen.count({cv, ck})) {
        seen[{cv, ck}] = f;
        cyc.push_back({cv, ck});
        const int e = lat.ccw[cv][ck];
        const int w = lat.other(e, cv);
        const auto& cw = lat.ccw[w];
        const int j = static_cast<int>(std::find(cw.begin(), cw.end(), e) - cw.begin());
        cv = w;
        ck = (j + 2) % 3;
      }
      lat.faces.push_back(cyc);
    }
  return lat;
}

TorusString horizontal_string(const TorusLattice& lat, int x0) {
  TorusString s;
  for (std::size_t e = 0; e < lat.edges.size(); ++e) {
    const auto& E = lat.edges[e];
    if (E.kind == 'x' && lat.vertices[E.tail].x == x0) s.push_back({static_cast<int>(e), E.tail});
  }
  return s;
}

TorusString vertical_string(const TorusLattice& lat, int y0) {
  TorusString s;
  for (std::size_t e = 0; e < lat.edges.size(); ++e) {
    const auto& E = lat.edges[e];
    if (E.kind == 'y' && lat.vertices[E.tail].y == y0) s.push_back({static_cast<int>(e), E.tail});
  }
  return s;
}

std::vector<std::array<int, 3>> q_labels(const FusionCategory& cat) {
  std::vector<std::array<int, 3>> out;
  const int n = cat.n();
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      for (int u = 0; u < n; ++u)
        if (cat.adm(s, t, u)) out.push_back({s, t, u});
  return out;
}

GroundTensor build_q_tensor(const FusionCategory& cat, const GTable& G, int s, int t, int u) {
  const int n = cat.n();
  const auto& d = cat.dual;
  GroundTensor g;
  g.s = s;
  g.t = t;
  g.u = u;
  g.Q = DenseTensor({n, n, n, n}, {"a", "b", "c", "d"});
  const double w = cat.v[s] * cat.v[t] * cat.v[u];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e)
          g.Q.at({a, b, c, e}) = w * G(d[b], e, u, d[t], s, a) * G(d[e], b, d[u], t, d[s], c);
  return g;
}

GroundTensor build_q_tensor(const FusionCategory& cat, int s, int t, int u) {
  return build_q_tensor(cat, GTable(cat), s, t, u);
}

namespace {

cplx mpo_entry(const FusionCategory& cat, const GTable& G, int s, int a, int i, int b, int a2, int b2) {
  return G(cat.dual[i], a, cat.dual[b], s, b2, a2);
}

Eigen::VectorXcd reversed(const GroundTensor& g) {
  const int n = static_cast<int>(g.Q.extent(0));
  Eigen::VectorXcd q(n * n * n * n);
  for (int p0 = 0; p0 < n; ++p0)
    for (int p1 = 0; p1 < n; ++p1)
      for (int p2 = 0; p2 < n; ++p2)
        for (int p3 = 0; p3 < n; ++p3) q(((p0 * n + p1) * n + p2) * n + p3) = g.Q.at({p3, p2, p1, p0});
  return q;
}

}  // namespace

Eigen::MatrixXcd crossing_projector(const FusionCategory& cat, int s, int t) {
  const int n = cat.n();
  const auto& d = cat.dual;
  GTable G(cat);
  const std::array<int, 4> X = {s, t, d[s], d[t]};
  const double D2 = cat.D2();
  const int dim = n * n * n * n;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim, dim);
  auto unpack = [n](int z) {
    std::array<int, 4> p{};
    for (int k = 3; k >= 0; --k) {
      p[k] = z % n;
      z /= n;
    }
    return p;
  };
  for (int zi = 0; zi < dim; ++zi) {
    const auto P = unpack(zi);
    const double w = cat.d(P[0]) * cat.d(P[1]) * cat.d(P[2]) * cat.d(P[3]);
    for (int zo = 0; zo < dim; ++zo) {
      const auto Pp = unpack(zo);
      cplx val = 0;
      for (int r = 0; r < n; ++r) {
        cplx term = cat.d(r) / D2;
        for (int k = 0; k < 4 && term != 0.0; ++k)
          term *= mpo_entry(cat, G, r, P[k], X[k], P[(k + 1) % 4], Pp[k], Pp[(k + 1) % 4]);
        val += term;
      }
      R(zo, zi) = val * w;
    }
  }
  return R;
}

double verify_closure(const FusionCategory& cat, const GroundTensor& Q) {
  Eigen::MatrixXcd R = crossing_projector(cat, Q.s, Q.t);
  Eigen::VectorXcd q = reversed(Q);
  return (R * q - q).cwiseAbs().maxCoeff();
}

ClosureSpace solve_closure_space(const FusionCategory& cat, double tol) {
  ClosureSpace cs;
  const int n = cat.n();
  GTable G(cat);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      Eigen::MatrixXcd R = crossing_projector(cat, s, t);
      const int dim = static_cast<int>(R.rows());
      // Solutions of R q = q.
      Eigen::MatrixXcd B = null_space(R - Eigen::MatrixXcd::Identity(dim, dim), tol);
      bool needed = false;
      for (int u = 0; u < n; ++u) needed = needed || cat.adm(s, t, u);
      if (needed && B.cols() == 0)
        throw TensorError("no closure tensor for strings " + cat.labels[s] + ", " + cat.labels[t]);
      for (int u = 0; u < n; ++u) {
        if (!cat.adm(s, t, u)) continue;
        Eigen::VectorXcd q = reversed(build_q_tensor(cat, G, s, t, u));
        const double nq = q.norm();
        if (nq == 0) continue;
        cs.containment = std::max(cs.containment, (q - B * (B.adjoint() * q)).norm() / nq);
      }
      cs.sectors.push_back({s, t});
      cs.dimension += static_cast<int>(B.cols());
      cs.basis.push_back(std::move(B));
    }
  return cs;
}

Eigen::MatrixXcd s_action(const FusionCategory& cat) {
  const auto qs = q_labels(cat);
  const auto& d = cat.dual;
  std::map<std::array<int, 3>, int> qi;
  for (std::size_t k = 0; k < qs.size(); ++k) qi[qs[k]] = static_cast<int>(k);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(qs.size(), qs.size());
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const auto [s, t, u] = qs[k];
    for (int nn = 0; nn < cat.n(); ++nn) {
      const cplx f = cat.f(s, t, u, d[s], d[t], nn);
      auto it = qi.find({d[t], s, nn});
      if (f != 0.0 && it != qi.end()) C(it->second, k) += f;
    }
  }
  return C;
}

Eigen::MatrixXcd t_action(const FusionCategory& cat) {
  const auto qs = q_labels(cat);
  const auto& d = cat.dual;
  std::map<std::array<int, 3>, int> qi;
  for (std::size_t k = 0; k < qs.size(); ++k) qi[qs[k]] = static_cast<int>(k);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(qs.size(), qs.size());
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const auto [s, t, u] = qs[k];
    for (int nn = 0; nn < cat.n(); ++nn) {
      const cplx f = cat.f(s, t, u, d[s], d[t], nn);
      auto it = qi.find({s, nn, d[t]});
      if (f != 0.0 && it != qi.end()) C(it->second, k) += f;
    }
  }
  return C;
}

namespace {

using Clock = std::chrono::steady_clock;

// Plaquette variables of the torus once MPO strings cut faces into pieces.
struct Pieces {
  std::vector<int> of_corner;           // v*3+k -> piece
  std::vector<std::vector<int>> sides;  // piece -> per string: -1, 0 inner, 1 outer
  int count = 0;
};

Pieces make_pieces(const TorusLattice& lat, const std::vector<TorusString>& strings) {
  Pieces P;
  const int ns = static_cast<int>(strings.size());
  std::vector<std::map<int, int>> inner(ns);
  for (int j = 0; j < ns; ++j)
    for (auto [e, x] : strings[j]) inner[j][e] = x;
  std::map<std::vector<int>, std::vector<int>> sidemap;
  std::vector<std::vector<int>> key(lat.vertices.size() * 3);
  for (int f = 0; f < static_cast<int>(lat.faces.size()); ++f) {
    const auto& cyc = lat.faces[f];
    const int L = static_cast<int>(cyc.size());
    std::vector<std::vector<int>> arc(L, std::vector<int>(1, f)), side(L);
    for (int j = 0; j < ns; ++j) {
      std::vector<int> cut;
      for (int q = 0; q < L; ++q)
        if (inner[j].count(lat.ccw[cyc[q].first][cyc[q].second])) cut.push_back(q);
      if (cut.empty()) {
        for (int q = 0; q < L; ++q) {
          arc[q].push_back(0);
          side[q].push_back(-1);
        }
        continue;
      }
      std::vector<int> lab(L);
      for (int q = 0; q < L; ++q) {
        int c = 0;
        for (int x : cut) c += x < q ? 1 : 0;
        lab[q] = c % static_cast<int>(cut.size());
      }
      const int q0 = cut[0];
      const int e = lat.ccw[cyc[q0].first][cyc[q0].second];
      const int ic = cyc[q0].first == inner[j][e] ? q0 : (q0 + 1) % L;
      for (int q = 0; q < L; ++q) {
        arc[q].push_back(lab[q]);
        side[q].push_back(lab[q] == lab[ic] ? 0 : 1);
      }
    }
    for (int q = 0; q < L; ++q) {
      key[cyc[q].first * 3 + cyc[q].second] = arc[q];
      sidemap[arc[q]] = side[q];
    }
  }
  std::map<std::vector<int>, int> pid;
  for (const auto& [k, s] : sidemap) {
    pid[k] = P.count++;
    P.sides.push_back(s);
  }
  for (const auto& k : key) P.of_corner.push_back(pid.at(k));
  return P;
}

struct Closure {
  int sa = 0, sb = 1;             // strings whose crossing it closes
  std::vector<DenseTensor> Qs;    // selected by an open variable
};

struct StateSpec {
  std::vector<int> labels;  // per string
  std::vector<Closure> closures;
};

class TorusNetwork {
 public:
  TorusNetwork(const FusionCategory& cat, const GTable& G, const TorusLattice& lat, std::vector<TorusString> strings)
      : cat_(cat), G_(G), lat_(lat), strings_(std::move(strings)), pieces_(make_pieces(lat, strings_)) {}

  // Adds the amplitude network of one state; returns its open variables.
  std::vector<int> add_state(SparseNetwork& net, const std::vector<int>& edge_vars, const StateSpec& spec,
                             bool conjugate) const {
    const int n = cat_.n();
    const auto& d = cat_.dual;
    auto cj = [conjugate](cplx x) { return conjugate ? std::conj(x) : x; };
    std::vector<int> pv(pieces_.count);
    for (auto& p : pv) p = net.add_var(n);
    auto corner = [&](int x, int k) { return pv[pieces_.of_corner[x * 3 + ((k % 3) + 3) % 3]]; };
    for (int x = 0; x < static_cast<int>(lat_.vertices.size()); ++x) {
      const auto& c = lat_.ccw[x];
      auto lab = [&, x](int e, int i) { return lat_.edges[e].tail == x ? i : d[i]; };
      net.add_function({edge_vars[c[0]], edge_vars[c[1]], edge_vars[c[2]], corner(x, 0), corner(x, 1), corner(x, 2)},
                       [&](const std::vector<int>& z) {
                         return cj(G_(lab(c[0], z[0]), lab(c[2], z[2]), lab(c[1], z[1]), z[4], z[3], z[5]));
                       });
    }
    for (std::size_t j = 0; j < strings_.size(); ++j) {
      const int s = spec.labels.at(j);
      for (auto [e, x] : strings_[j]) {
        const int y = lat_.other(e, x);
        const auto& cx = lat_.ccw[x];
        const auto& cy = lat_.ccw[y];
        const int kx = static_cast<int>(std::find(cx.begin(), cx.end(), e) - cx.begin());
        const int ky = static_cast<int>(std::find(cy.begin(), cy.end(), e) - cy.begin());
        const bool from_tail = lat_.edges[e].tail == x;
        net.add_function({edge_vars[e], corner(x, kx), corner(x, kx - 1), corner(y, ky - 1), corner(y, ky)},
                         [&, s, from_tail](const std::vector<int>& z) {
                           const int io = from_tail ? z[0] : d[z[0]];
                           return cj(mpo_entry(cat_, G_, s, z[1], io, z[2], z[3], z[4]));
                         });
      }
    }
    for (int p : pv) net.add_function({p}, [&](const std::vector<int>& z) { return cplx(cat_.d(z[0])); });
    std::vector<int> open;
    static const std::array<std::array<int, 2>, 4> order = {{{1, 0}, {0, 0}, {0, 1}, {1, 1}}};
    for (const auto& cl : spec.closures) {
      std::map<std::array<int, 2>, int> quad;
      for (int p = 0; p < pieces_.count; ++p) {
        const int a = pieces_.sides[p][cl.sa], b = pieces_.sides[p][cl.sb];
        if (a >= 0 && b >= 0) {
          if (quad.count({a, b})) throw TensorError("strings cross more than once");
          quad[{a, b}] = pv[p];
        }
      }
      if (quad.size() != 4) throw TensorError("strings do not cross in a single face");
      const int k = net.add_var(static_cast<int>(cl.Qs.size()));
      open.push_back(k);
      std::vector<int> vars = {k};
      for (const auto& o : order) vars.push_back(quad.at(o));
      net.add_function(vars, [&](const std::vector<int>& z) {
        return cj(cl.Qs[z[0]].at({z[1], z[2], z[3], z[4]}));
      });
    }
    return open;
  }

  // Overlap matrix <bra_j | ket_k> over the open indices of the first closure
  // of each state, with the physical weight v_i per edge on each side.
  Eigen::MatrixXcd overlap(const StateSpec& bra, const StateSpec& ket, std::size_t mem_limit, ContractStats* st) const {
    SparseNetwork net;
    const int n = cat_.n();
    std::vector<int> ev(lat_.edges.size());
    for (auto& e : ev) {
      e = net.add_var(n);
      net.add_function({e}, [&](const std::vector<int>& z) { return cplx(cat_.d(z[0])); });
    }
    auto ob = add_state(net, ev, bra, true);
    auto ok = add_state(net, ev, ket, false);
    std::vector<int> out = ob;
    out.insert(out.end(), ok.begin(), ok.end());
    DenseTensor r = net.contract(out, mem_limit, st);
    // Extra closures carry a single tensor each, so their open variables are trivial.
    const int rb = net.dim(ob.at(0)), rk = net.dim(ok.at(0));
    Eigen::MatrixXcd m(rb, rk);
    for (int a = 0; a < rb; ++a)
      for (int b = 0; b < rk; ++b) m(a, b) = r.data()[static_cast<std::size_t>(a) * (r.size() / rb) + b];
    return m;
  }

 private:
  const FusionCategory& cat_;
  const GTable& G_;
  const TorusLattice& lat_;
  std::vector<TorusString> strings_;
  Pieces pieces_;
};

struct Group {
  int s, t;
  std::vector<int> members;  // indices into q_labels
};

std::vector<Group> group_labels(const std::vector<std::array<int, 3>>& qs) {
  std::vector<Group> gs;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (gs.empty() || gs.back().s != qs[k][0] || gs.back().t != qs[k][1]) gs.push_back({qs[k][0], qs[k][1], {}});
    gs.back().members.push_back(static_cast<int>(k));
  }
  return gs;
}

StateSpec group_state(const FusionCategory& cat, const GTable& G, const Group& g,
                      const std::vector<std::array<int, 3>>& qs) {
  StateSpec sp;
  sp.labels = {g.s, g.t};
  Closure cl;
  for (int m : g.members) cl.Qs.push_back(build_q_tensor(cat, G, qs[m][0], qs[m][1], qs[m][2]).Q);
  sp.closures.push_back(std::move(cl));
  return sp;
}

}  // namespace

GramResult ground_states_gram(const FusionCategory& cat, int Lx, int Ly, std::size_t mem_limit) {
  if (Lx < 2 || Ly < 2) throw TensorError("ground_states_gram needs Lx, Ly >= 2");
  auto t0 = Clock::now();
  GramResult res;
  res.Lx = Lx;
  res.Ly = Ly;
  res.labels = q_labels(cat);
  GTable G(cat);
  TorusLattice lat = make_torus(Lx, Ly);
  TorusNetwork net(cat, G, lat, {horizontal_string(lat), vertical_string(lat)});
  const auto groups = group_labels(res.labels);
  const int nq = static_cast<int>(res.labels.size());
  res.gram = Eigen::MatrixXcd::Zero(nq, nq);
  for (std::size_t gk = 0; gk < groups.size(); ++gk) {
    StateSpec ket = group_state(cat, G, groups[gk], res.labels);
    for (std::size_t gb = 0; gb <= gk; ++gb) {
      StateSpec bra = group_state(cat, G, groups[gb], res.labels);
      ContractStats st;
      Eigen::MatrixXcd m = net.overlap(bra, ket, mem_limit, &st);
      res.largest_intermediate = std::max(res.largest_intermediate, st.largest);
      res.peak_bytes = std::max(res.peak_bytes, st.peak_bytes);
      for (std::size_t a = 0; a < groups[gb].members.size(); ++a)
        for (std::size_t b = 0; b < groups[gk].members.size(); ++b) {
          const int qa = groups[gb].members[a], qb = groups[gk].members[b];
          res.gram(qa, qb) = m(a, b);
          res.gram(qb, qa) = std::conj(m(a, b));
        }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(res.gram);
  const auto& ev = es.eigenvalues();
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k) res.spectrum.push_back(ev(k));
  const double top = res.spectrum.empty() ? 0.0 : res.spectrum.front();
  for (double x : res.spectrum) res.degeneracy += x > kRankTol * top ? 1 : 0;
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

struct StResult {
  cplx lambda;
  double residual;
};

StResult st_relation(const Eigen::MatrixXcd& S, const Eigen::MatrixXcd& T) {
  Eigen::MatrixXcd ST = S * T;
  Eigen::MatrixXcd M = ST * ST * ST;
  Eigen::MatrixXcd S2 = S * S;
  const cplx lambda = (S2.adjoint() * M).trace() / (S2.adjoint() * S2).trace();
  return {lambda, std::max(max_abs(M - lambda * S2), std::abs(std::abs(lambda) - 1.0))};
}

// Distance of |m| from a permutation matrix.
double permutation_defect(const Eigen::MatrixXcd& m) {
  double worst = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    int ones = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double a = std::abs(m(r, c));
      worst = std::max(worst, std::min(a, std::abs(a - 1.0)));
      ones += a > 0.5 ? 1 : 0;
    }
    if (ones != 1) worst = std::max(worst, 1.0);
  }
  return worst;
}

}  // namespace

ModularData modular_matrices(const FusionCategory& cat, int Lx, int Ly, std::size_t mem_limit) {
  ModularData md;
  md.gram = ground_states_gram(cat, Lx, Ly, mem_limit);
  const auto& qs = md.gram.labels;
  const int nq = static_cast<int>(qs.size());
  const Eigen::MatrixXcd& Gm = md.gram.gram;
  md.S_Q = s_action(cat);
  md.T_Q = t_action(cat);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gm);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep, drop;
  for (int k = 0; k < nq; ++k) (es.eigenvalues()(k) > kRankTol * top ? keep : drop).push_back(k);
  const int r = static_cast<int>(keep.size());
  Eigen::MatrixXcd W(nq, r), K(nq, static_cast<int>(drop.size()));
  for (int k = 0; k < r; ++k) W.col(k) = es.eigenvectors().col(keep[k]) / std::sqrt(es.eigenvalues()(keep[k]));
  for (std::size_t k = 0; k < drop.size(); ++k) K.col(k) = es.eigenvectors().col(drop[k]);
  auto phys = [&](const Eigen::MatrixXcd& B) -> Eigen::MatrixXcd { return W.adjoint() * B * W; };
  md.S_phys = phys(Gm * md.S_Q);
  Eigen::MatrixXcd T_fwd = phys(Gm * md.T_Q);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(r, r);

  // Dehn twist handedness: keep the orientation satisfying the modular relation.
  StResult fwd = st_relation(md.S_phys, T_fwd);
  StResult inv = st_relation(md.S_phys, T_fwd.adjoint());
  if (inv.residual < fwd.residual) {
    md.T_phys = T_fwd.adjoint();
    md.twist = "inverse";
    md.lambda = inv.lambda;
    md.st_relation = inv.residual;
  } else {
    md.T_phys = T_fwd;
    md.twist = "forward";
    md.lambda = fwd.lambda;
    md.st_relation = fwd.residual;
  }
  md.unitarity_T = max_abs(md.T_phys * md.T_phys.adjoint() - I);

  // Loop operators around the second cycle, inserted as a second closure on a
  // parallel vertical string; only their combinations that commute with T and
  // annihilate the Gram kernel act on the ground space.
  GTable G(cat);
  TorusLattice lat = make_torus(Lx, Ly);
  TorusNetwork single(cat, G, lat, {horizontal_string(lat), vertical_string(lat)});
  TorusNetwork doubled(cat, G, lat, {horizontal_string(lat), vertical_string(lat), vertical_string(lat, 1)});
  const auto groups = group_labels(qs);
  std::vector<StateSpec> bras;
  for (const auto& g : groups) bras.push_back(group_state(cat, G, g, qs));
  const int n = cat.n();
  std::vector<Eigen::MatrixXcd> ops = {md.T_phys};
  for (int b = 0; b < n; ++b) {
    std::vector<Eigen::MatrixXcd> terms;
    for (int t = 0; t < n; ++t)
      for (int w = 0; w < n; ++w) {
        if (!cat.adm(t, b, w)) continue;
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nq, nq);
        const DenseTensor X = build_q_tensor(cat, G, t, b, w).Q;
        for (const auto& g : groups) {
          if (g.s != t) continue;
          StateSpec ket = group_state(cat, G, g, qs);
          ket.labels.push_back(b);
          Closure cx;
          cx.sa = 0;
          cx.sb = 2;
          cx.Qs = {X};
          ket.closures.push_back(cx);
          for (std::size_t gb = 0; gb < groups.size(); ++gb) {
            ContractStats st;
            Eigen::MatrixXcd m = [&] {
              // bra lives on the two-string network, ket on the three-string one
              SparseNetwork sn;
              std::vector<int> ev(lat.edges.size());
              for (auto& e : ev) {
                e = sn.add_var(n);
                sn.add_function({e}, [&](const std::vector<int>& z) { return cplx(cat.d(z[0])); });
              }
              auto ob = single.add_state(sn, ev, bras[gb], true);
              auto ok = doubled.add_state(sn, ev, ket, false);
              DenseTensor res = sn.contract({ob[0], ok[0], ok[1]}, mem_limit, &st);
              Eigen::MatrixXcd mm(sn.dim(ob[0]), sn.dim(ok[0]));
              for (Eigen::Index a = 0; a < mm.rows(); ++a)
                for (Eigen::Index c = 0; c < mm.cols(); ++c) mm(a, c) = res.data()[a * mm.cols() + c];
              return mm;
            }();
            for (std::size_t a = 0; a < groups[gb].members.size(); ++a)
              for (std::size_t c = 0; c < g.members.size(); ++c) B(groups[gb].members[a], g.members[c]) = m(a, c);
          }
        }
        terms.push_back(B);
      }
    if (terms.empty()) continue;
    const Eigen::Index rows = static_cast<Eigen::Index>(r) * r + static_cast<Eigen::Index>(r) * K.cols();
    Eigen::MatrixXcd A(rows, static_cast<Eigen::Index>(terms.size()));
    std::vector<Eigen::MatrixXcd> P;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      P.push_back(phys(terms[k]));
      Eigen::MatrixXcd comm = P.back() * md.T_phys - md.T_phys * P.back();
      Eigen::MatrixXcd ker = W.adjoint() * terms[k] * K;
      Eigen::VectorXcd col(rows);
      col << Eigen::Map<Eigen::VectorXcd>(comm.data(), comm.size()), Eigen::Map<Eigen::VectorXcd>(ker.data(), ker.size());
      A.col(static_cast<Eigen::Index>(k)) = col;
    }
    Eigen::MatrixXcd Z = null_space(A, 1e-8);
    for (Eigen::Index z = 0; z < Z.cols(); ++z) {
      Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(r, r);
      for (std::size_t k = 0; k < P.size(); ++k) L += Z(static_cast<Eigen::Index>(k), z) * P[k];
      ops.push_back(L);
    }
  }
  for (const auto& a : ops)
    for (const auto& b : ops) md.mes_commutator = std::max(md.mes_commutator, max_abs(a * b - b * a));

  // Generic combination of the commuting operators; its eigenvectors are the MES.
  std::mt19937_64 rng(0);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(r, r);
  for (const auto& L : ops) {
    const double x = nd(rng), y = nd(rng);
    R += cplx(x, y) * L;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ce(R);
  Eigen::MatrixXcd U = ce.eigenvectors();
  for (int k = 0; k < r; ++k) U.col(k).normalize();
  md.mes_orthogonality = max_abs(U.adjoint() * U - I);
  Eigen::MatrixXcd Sm = U.adjoint() * md.S_phys * U;
  Eigen::MatrixXcd Tm = U.adjoint() * md.T_phys * U;
  md.t_offdiag = max_abs(Tm - Eigen::MatrixXcd(Tm.diagonal().asDiagonal()));

  // Vacuum: T = 1, fixed by S^2, and a strictly positive row after rephasing;
  // among candidates the one with the largest minimum entry.
  Eigen::MatrixXcd S2m = Sm * Sm;
  int vac = -1;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd bestS;
  for (int x = 0; x < r; ++x) {
    if (std::abs(Tm(x, x) - 1.0) > 1e-6 || std::abs(S2m(x, x) - 1.0) > 1e-6) continue;
    bool zero = false;
    for (int y = 0; y < r; ++y) zero = zero || std::abs(Sm(x, y)) < 1e-9;
    if (zero) continue;
    Eigen::VectorXcd D(r);
    for (int y = 0; y < r; ++y) D(y) = std::conj(Sm(x, y) / std::abs(Sm(x, y))) * (Sm(x, x) / std::abs(Sm(x, x)));
    Eigen::MatrixXcd Sc = D.conjugate().asDiagonal() * Sm * D.asDiagonal();
    Sc *= std::polar(1.0, -std::arg(Sc(x, x)));
    const double mn = Sc.row(x).real().minCoeff();
    if (mn > best) {
      best = mn;
      vac = x;
      bestS = Sc;
    }
  }
  std::vector<int> perm;
  if (vac >= 0) {
    perm.push_back(vac);
    for (int y = 0; y < r; ++y)
      if (y != vac) perm.push_back(y);
  } else {
    bestS = Sm;
    for (int y = 0; y < r; ++y) perm.push_back(y);
  }
  md.S_mes = Eigen::MatrixXcd(r, r);
  md.T_mes = Eigen::MatrixXcd::Zero(r, r);
  md.basis = Eigen::MatrixXcd(r, r);
  for (int a = 0; a < r; ++a) {
    md.T_mes(a, a) = Tm(perm[a], perm[a]);
    md.basis.col(a) = U.col(perm[a]);
    for (int b = 0; b < r; ++b) md.S_mes(a, b) = bestS(perm[a], perm[b]);
  }
  md.unitarity_S = max_abs(md.S_mes * md.S_mes.adjoint() - I);
  md.s_symmetry = max_abs(md.S_mes - md.S_mes.transpose());
  for (int a = 0; a < r; ++a) md.t_modulus = std::max(md.t_modulus, std::abs(std::abs(md.T_mes(a, a)) - 1.0));
  md.s2_permutation = permutation_defect(md.S_mes * md.S_mes);
  if (vac < 0) {
    md.verlinde_error = std::numeric_limits<double>::infinity();
  } else {
    try {
      VerlindeResult v = verlinde_fusion(md.S_mes, std::numeric_limits<double>::infinity());
      md.verlinde = v.N;
      md.verlinde_error = v.max_error;
      for (int x : v.N)
        if (x < 0) md.verlinde_error = std::max(md.verlinde_error, 1.0);
    } catch (const CategoryError&) {
      md.verlinde_error = std::numeric_limits<double>::infinity();
    }
  }
  return md;
}

}  // namespace snet
