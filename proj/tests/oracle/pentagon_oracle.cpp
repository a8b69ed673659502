#include "pentagon_oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

namespace oracle {

namespace {

Skeleton make(std::string name, std::vector<std::string> labels, std::vector<int> dual,
              bool (*adm)(int, int, int)) {
  Skeleton sk{std::move(name), std::move(labels), std::move(dual), {}};
  const int n = sk.n();
  sk.N.assign(n * n * n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) sk.N[(a * n + b) * n + c] = adm(a, b, c) ? 1 : 0;
  return sk;
}

struct Index6 {
  int n;
  std::size_t operator()(int i, int j, int m, int k, int l, int nn) const {
    return ((((static_cast<std::size_t>(i) * n + j) * n + m) * n + k) * n + l) * n + nn;
  }
};

bool support(const Skeleton& s, int i, int j, int m, int k, int l, int nn) {
  const auto& d = s.dual;
  return s.adm(i, j, m) && s.adm(k, l, d[m]) && s.adm(i, l, nn) && s.adm(j, k, d[nn]);
}

struct Problem {
  Skeleton sk;
  std::vector<double> v;
  std::vector<std::size_t> slots;  // positions of free entries in the n^6 table

  std::vector<double> table(const Eigen::VectorXd& x) const {
    const int n = sk.n();
    std::vector<double> F(static_cast<std::size_t>(std::pow(n, 6)), 0.0);
    for (std::size_t q = 0; q < slots.size(); ++q) F[slots[q]] = x(q);
    return F;
  }

  void residuals(const std::vector<double>& F, std::vector<double>& r) const {
    const int n = sk.n();
    const auto& d = sk.dual;
    Index6 I{n};
    r.clear();
    int x[9];
    for (long idx = 0, tot = static_cast<long>(std::pow(n, 9)); idx < tot; ++idx) {
      long t = idx;
      for (int q = 8; q >= 0; --q) {
        x[q] = static_cast<int>(t % n);
        t /= n;
      }
      const int m = x[0], l = x[1], q = x[2], k = x[3], p = x[4], j = x[5], i = x[6], s = x[7], rr = x[8];
      double lhs = 0;
      for (int y = 0; y < n; ++y)
        lhs += F[I(m, l, q, k, d[p], y)] * F[I(j, i, p, m, y, d[s])] * F[I(j, d[s], y, l, k, d[rr])];
      double rhs = F[I(j, i, p, d[q], k, d[rr])] * F[I(rr, i, d[q], m, l, d[s])];
      r.push_back(lhs - rhs);
    }
    for (std::size_t a = 0; a < slots.size(); ++a) {
      std::size_t t = slots[a];
      int ix[6];
      for (int c = 5; c >= 0; --c) {
        ix[c] = static_cast<int>(t % n);
        t /= n;
      }
      const int i = ix[0], j = ix[1], m = ix[2], k = ix[3], l = ix[4], nn = ix[5];
      const double f = F[slots[a]];
      r.push_back(f - F[I(l, k, d[m], j, i, nn)]);
      r.push_back(f - F[I(j, i, m, l, k, d[nn])]);
      r.push_back(f - F[I(i, m, j, d[k], nn, l)] * v[m] * v[nn] / (v[j] * v[l]));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (sk.adm(i, j, k)) r.push_back(F[I(i, j, k, d[j], d[i], 0)] - v[k] / (v[i] * v[j]));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            std::vector<int> rows;
            for (int m = 0; m < n; ++m)
              for (int nn = 0; nn < n; ++nn)
                if (support(sk, i, j, m, k, l, nn)) {
                  rows.push_back(m);
                  break;
                }
            for (int a : rows)
              for (int b : rows) {
                double u = 0;
                for (int nn = 0; nn < n; ++nn) u += F[I(i, j, a, k, l, nn)] * F[I(i, j, b, k, l, nn)];
                r.push_back(u - (a == b ? 1.0 : 0.0));
              }
          }
  }
};

struct Functor : Eigen::DenseFunctor<double> {
  const Problem* p;
  Functor(const Problem* prob, int nin, int nout) : Eigen::DenseFunctor<double>(nin, nout), p(prob) {}
  int operator()(const InputType& x, ValueType& f) const {
    std::vector<double> r;
    p->residuals(p->table(x), r);
    for (int q = 0; q < values(); ++q) f(q) = r[q];
    return 0;
  }
};

}  // namespace

Skeleton skeleton(const std::string& name) {
  if (name == "trivial") return make("trivial", {"1"}, {0}, [](int, int, int) { return true; });
  if (name == "z2") return make("z2", {"0", "1"}, {0, 1}, [](int a, int b, int c) { return (a + b + c) % 2 == 0; });
  if (name == "z3")
    return make("z3", {"0", "1", "2"}, {0, 2, 1}, [](int a, int b, int c) { return (a + b + c) % 3 == 0; });
  if (name == "fibonacci")
    return make("fibonacci", {"1", "tau"}, {0, 1}, [](int a, int b, int c) { return a + b + c != 1; });
  if (name == "ising")
    return make("ising", {"1", "sigma", "psi"}, {0, 1, 2}, [](int a, int b, int c) {
      int ns = (a == 1) + (b == 1) + (c == 1);
      int np = (a == 2) + (b == 2) + (c == 2);
      return ns == 2 || (ns == 0 && np % 2 == 0);
    });
  throw std::invalid_argument("unknown skeleton " + name);
}

std::vector<std::string> skeleton_names() { return {"trivial", "z2", "z3", "fibonacci", "ising"}; }

std::vector<double> fp_dims(const Skeleton& sk) {
  const int n = sk.n();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  // Sum of all fusion matrices is irreducible; its Perron vector is d.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (sk.adm(a, b, sk.dual[c])) S(b, c) += 1;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd y = S * x;
    y /= y(0);
    x = y;
  }
  return {x.data(), x.data() + n};
}

double pentagon_residual(const Skeleton& sk, const std::vector<double>& F) {
  Problem p{sk, {}, {}};
  p.v.assign(sk.n(), 1.0);
  std::vector<double> r;
  p.residuals(F, r);
  double m = 0;
  const std::size_t np = static_cast<std::size_t>(std::pow(sk.n(), 9));
  for (std::size_t q = 0; q < np; ++q) m = std::max(m, std::abs(r[q]));
  return m;
}

Solution solve(const Skeleton& sk, std::uint64_t seed, int max_starts) {
  const int n = sk.n();
  Problem p{sk, {}, {}};
  for (double d : fp_dims(sk)) p.v.push_back(std::sqrt(d));
  Index6 I{n};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int nn = 0; nn < n; ++nn)
              if (support(sk, i, j, m, k, l, nn)) p.slots.push_back(I(i, j, m, k, l, nn));

  int nout = 0;
  {
    std::vector<double> r;
    p.residuals(p.table(Eigen::VectorXd::Zero(p.slots.size())), r);
    nout = static_cast<int>(r.size());
  }
  const int nin = static_cast<int>(p.slots.size());
  Functor fn(&p, nin, nout);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Solution best;
  best.cost = INFINITY;
  Eigen::VectorXd bx;
  for (int s = 0; s < max_starts; ++s) {
    Eigen::VectorXd x(nin);
    for (int q = 0; q < nin; ++q) x(q) = nd(rng);
    Eigen::NumericalDiff<Functor> nd_fn(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(nd_fn);
    lm.setMaxfev(4000);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.minimize(x);
    Eigen::VectorXd f(nout);
    fn(x, f);
    double cost = 0.5 * f.squaredNorm();
    best.starts = s + 1;
    if (cost < best.cost) {
      best.cost = cost;
      bx = x;
    }
    if (cost < 1e-26) break;
  }
  auto& c = best.cat;
  c.name = sk.name;
  c.labels = sk.labels;
  c.dual = sk.dual;
  c.vacuum = 0;
  c.v = p.v;
  c.N = sk.N;
  std::vector<double> F = p.table(bx);
  c.F.assign(F.size(), snet::cplx(0, 0));
  for (std::size_t q = 0; q < F.size(); ++q) c.F[q] = F[q];
  return best;
}

}  // namespace oracle
