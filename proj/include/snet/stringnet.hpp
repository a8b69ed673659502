#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "snet/fusion_category.hpp"
#include "snet/tensor_core.hpp"

namespace snet {

// A virtual leg is a triple line: plaquette label on its counterclockwise
// side, edge label pointing away from the site, plaquette label on its
// clockwise side.
struct Leg {
  int a = 0, i = 0, b = 0;
  bool operator==(const Leg&) const = default;
  Leg reversed(const FusionCategory& cat) const { return {b, cat.dual[i], a}; }
};

// PEPS, MPO, pseudo-inverse and generalized inverse for one category.
//
// Site legs 0,1,2 run clockwise; corner q sits between legs q and q+1, so leg
// q = (corner q-1, label q, corner q). Entries use the symmetric weighting
// in which every closed loop carries d, split as sqrt(d) on each side of a
// virtual bond; with it the closed MPOs are Hermitian projectors.
struct SiteTensorSet {
  FusionCategory cat;
  GTable G;
  std::vector<Leg> legs;      // ordered lexicographically by (a, i, b)
  std::vector<int> leg_slot;  // (a*n+i)*n+b -> index into legs or -1
  int Dv = 0;                 // virtual leg extent
  int m = 0;                  // internal MPO leg extent, n^3
  int d_phys = 0;             // n^3, zero off admissible triples

  DenseTensor A;      // [Dv, Dv, Dv, d_phys]
  DenseTensor Aplus;  // [d_phys, Dv, Dv, Dv]
  DenseTensor M;      // [m, m, Dv, Dv]: (s, p_left, q_left), (s, p_right, q_right), in, out
  DenseTensor X;      // [1, 1, Dv, Dv], empty until find_generalized_inverse
  double x_residual = -1;

  bool identity_only_mpo = false;  // negative control: keep only the vacuum string

  explicit SiteTensorSet(const FusionCategory& c);

  int n() const { return cat.n(); }
  int leg(int a, int i, int b) const { return leg_slot[(a * n() + i) * n() + b]; }
  int phys(int i, int j, int k) const { return (i * n() + j) * n() + k; }

  // Site amplitude without loop weights, legs (p2,i,p0), (p0,j,p1), (p1,k,p2).
  cplx site(int i, int j, int k, int p0, int p1, int p2) const { return G(i, j, k, p1, p2, p0); }
  // Same amplitude in the symmetric weighting.
  cplx site_sym(int i, int j, int k, int p0, int p1, int p2) const {
    return site(i, j, k, p0, p1, p2) * (cat.v[p0] * cat.v[p1] * cat.v[p2]);
  }
  // MPO with string s acting on one leg, without loop weights.
  cplx mpo(int s, const Leg& in, const Leg& out) const;
};

DenseTensor build_peps_tensor(const SiteTensorSet& ts);
DenseTensor build_mpo_tensor(const SiteTensorSet& ts);
// Closed form conj(A)/D^2, valid because every admissible physical block of A
// has squared norm D^2.
DenseTensor build_pseudo_inverse(const SiteTensorSet& ts);

// One block of a closed MPO on L legs: fixed outward labels, basis of corner
// tuples (p_0..p_{L-1}) with leg k = (p_k, labels_k, p_{k+1}).
struct RingBlock {
  std::vector<int> labels;
  std::vector<std::vector<int>> corners;
  Eigen::MatrixXcd P;
};

std::vector<std::vector<int>> ring_corners(const SiteTensorSet& ts, const std::vector<int>& labels);
RingBlock ring_block(const SiteTensorSet& ts, const std::vector<int>& labels);

// Closed MPO of length L, block diagonal in the edge labels.
struct ClosedMPO {
  int L = 0;
  std::vector<RingBlock> blocks;
  double idempotence = 0;
  double hermiticity = 0;
  double trace() const;
  int rank(double tol = kDefaultTol) const;
  // Full matrix on Dv^L; only for small L.
  SupportProjector dense(const SiteTensorSet& ts, double tol = kDefaultTol) const;
};

// Throws TensorError if some block is not a projector within tol.
ClosedMPO build_closed_mpo(const SiteTensorSet& ts, int L, double tol = kDefaultTol);

// Same projector obtained by contracting M tensors; dense, for cross-checks.
Eigen::MatrixXcd closed_mpo_from_M(const SiteTensorSet& ts, int L);

// Transfer matrix trace of P_L, valid for any L.
double closed_mpo_trace(const SiteTensorSet& ts, int L);

struct GeneralizedInverse {
  DenseTensor X;
  double residual = 0;
  int equations = 0;
  bool output_side = true;  // cap on the output legs of the two loops
  std::vector<std::pair<std::string, double>> attempts;
};

// X caps the shared bond of two single-site loops so that they fuse into the
// loop around both sites.
GeneralizedInverse find_generalized_inverse(const SiteTensorSet& ts, double tol = 1e-8);

}  // namespace snet
