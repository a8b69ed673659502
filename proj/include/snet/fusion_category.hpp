#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace snet {

using cplx = std::complex<double>;

struct CategoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multiplicity-free fusion category with F-symbols in a fixed gauge.
// Labels are small integers; admissibility N(a,b,c) is stored with all three
// legs incoming, so N(a,b,c) = 1 iff the vacuum appears in a x b x c.
struct FusionCategory {
  std::string name;
  std::vector<std::string> labels;
  std::vector<int> dual;
  int vacuum = 0;
  std::vector<double> v;
  std::vector<std::uint8_t> N;
  std::vector<cplx> F;

  int n() const { return static_cast<int>(labels.size()); }
  double d(int s) const { return v[s] * v[s]; }
  double D2() const;

  bool adm(int a, int b, int c) const { return N[(a * n() + b) * n() + c] != 0; }
  std::size_t fidx(int i, int j, int m, int k, int l, int nn) const {
    const std::size_t q = n();
    return ((((i * q + j) * q + m) * q + k) * q + l) * q + nn;
  }
  // F^{ijm}_{kln}
  cplx f(int i, int j, int m, int k, int l, int nn) const { return F[fidx(i, j, m, k, l, nn)]; }
  // Both fusion paths of F^{ijm}_{kln} admissible.
  bool f_support(int i, int j, int m, int k, int l, int nn) const;
  int label_id(const std::string& s) const;
};

FusionCategory load_category(const std::string& text);
FusionCategory load_category_file(const std::string& path);
std::string category_to_json(const FusionCategory& cat);

// Dense G-symbol table, G^{ijk}_{lmn} at index ((((i*n+j)*n+k)*n+l)*n+m)*n+n.
struct GTable {
  int n = 0;
  std::vector<cplx> g;
  explicit GTable(const FusionCategory& cat);
  cplx operator()(int i, int j, int k, int l, int m, int nu) const {
    return g[((((i * n + j) * n + k) * n + l) * n + m) * n + nu];
  }
};

cplx g_symbol(const FusionCategory& cat, int i, int j, int k, int l, int m, int nu);

struct CheckReport {
  std::string name;
  double residual = 0;
  double tol = 0;
  bool pass = false;
  std::vector<int> worst;
  double seconds = 0;
  std::vector<std::pair<std::string, double>> info;
};

CheckReport check_pentagon(const FusionCategory& cat, double tol);
CheckReport check_tetrahedral(const FusionCategory& cat, double tol);
CheckReport check_unitarity(const FusionCategory& cat, double tol);

struct VerlindeResult {
  int n = 0;
  std::vector<int> N;  // N[(a*n+b)*n+c] = N_ab^c
  double max_error = 0;
  int at(int a, int b, int c) const { return N[(a * n + b) * n + c]; }
};

// Throws CategoryError when row 0 has a zero or rounding error exceeds tol.
VerlindeResult verlinde_fusion(const Eigen::MatrixXcd& S, double tol = 1e-6);

// Random vertex gauge. With tetrahedral = true every admissible triad {a,b,c}
// gets a phase, conjugated for the dual triad, real (a sign) when the triad
// is self-dual, and 1 whenever the vacuum is involved; this keeps tetrahedral
// symmetry and the vacuum normalisation. With tetrahedral = false the phase
// depends on the cyclic order of the triad only, which keeps the pentagon and
// unitarity but not tetrahedral symmetry.
FusionCategory random_gauge(const FusionCategory& cat, std::uint64_t seed, bool tetrahedral = true);

// Adds eps to one F entry. The entry is the first nonzero one, in storage
// order, with no vacuum index; falls back to the first nonzero entry.
FusionCategory perturb_entry(const FusionCategory& cat, double eps);

}  // namespace snet
