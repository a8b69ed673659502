#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "snet/fusion_category.hpp"
#include "snet/sparse_network.hpp"
#include "snet/tensor_core.hpp"

namespace snet {

// Honeycomb torus in brick-wall form with Lx x Ly unit cells. Each cell has
// vertices a and b and edges z (a to b in the cell), x (a to b of the cell to
// the right) and y (a to b of the cell above); edges point from a to b.
struct TorusLattice {
  struct Vertex {
    char kind;
    int x, y;
  };
  struct Edge {
    int tail, head;
    char kind;
  };
  int Lx = 0, Ly = 0;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> ccw;  // incident edges, counterclockwise
  // Faces as cycles of corners (vertex, k); corner k lies between ccw[k] and ccw[k+1].
  std::vector<std::vector<std::pair<int, int>>> faces;

  int other(int e, int v) const { return edges[e].tail == v ? edges[e].head : edges[e].tail; }
};

TorusLattice make_torus(int Lx, int Ly);

// MPO string: edges it crosses, each with the vertex on its inner side.
using TorusString = std::vector<std::pair<int, int>>;
// Around the x cycle: x edges leaving column x0.
TorusString horizontal_string(const TorusLattice& lat, int x0 = 0);
// Around the y cycle: y edges leaving row y0.
TorusString vertical_string(const TorusLattice& lat, int y0 = 0);

struct GroundTensor {
  int s = 0, t = 0, u = 0;
  DenseTensor Q;  // legs (a, b, c, d)
};

// Admissible (s,t,u) with N(s,t,u) = 1, in lexicographic order.
std::vector<std::array<int, 3>> q_labels(const FusionCategory& cat);
GroundTensor build_q_tensor(const FusionCategory& cat, int s, int t, int u);
GroundTensor build_q_tensor(const FusionCategory& cat, const GTable& G, int s, int t, int u);

// Closed four-leg MPO around the crossing of strings s and t, acting on the
// four plaquette labels around it.
Eigen::MatrixXcd crossing_projector(const FusionCategory& cat, int s, int t);
// max |R q - q| with q the Q tensor with its legs reversed.
double verify_closure(const FusionCategory& cat, const GroundTensor& Q);

struct ClosureSpace {
  // Orthonormal basis per (s,t), columns in the reversed leg order of Q.
  std::vector<std::array<int, 2>> sectors;
  std::vector<Eigen::MatrixXcd> basis;
  int dimension = 0;
  // max over Q tensors of |q - B B^dagger q| / |q|
  double containment = 0;
};
// Throws TensorError when some (s,t) with an admissible Q has no solution.
ClosureSpace solve_closure_space(const FusionCategory& cat, double tol = 1e-9);

struct GramResult {
  int Lx = 0, Ly = 0;
  std::vector<std::array<int, 3>> labels;
  Eigen::MatrixXcd gram;
  int degeneracy = 0;
  std::vector<double> spectrum;  // eigenvalues, descending
  std::size_t largest_intermediate = 0;
  std::size_t peak_bytes = 0;
  double seconds = 0;
};

inline constexpr double kRankTol = 1e-6;

// Throws ResourceLimit if a contraction needs more than mem_limit bytes
// (0 means no limit).
GramResult ground_states_gram(const FusionCategory& cat, int Lx, int Ly, std::size_t mem_limit = 0);

// Coefficients C with S(Q_k) = sum_q C(q,k) Q_q.
Eigen::MatrixXcd s_action(const FusionCategory& cat);
Eigen::MatrixXcd t_action(const FusionCategory& cat);

struct ModularData {
  GramResult gram;
  Eigen::MatrixXcd S_Q, T_Q;        // coefficient matrices
  Eigen::MatrixXcd S_phys, T_phys;  // on the orthonormalized ground space
  Eigen::MatrixXcd S_mes, T_mes;
  Eigen::MatrixXcd basis;  // MES vectors in the orthonormal ground space basis
  std::string twist;       // Dehn twist orientation kept
  cplx lambda = 0;         // (S T)^3 = lambda S^2
  double unitarity_S = 0;
  double unitarity_T = 0;
  double t_offdiag = 0;
  double t_modulus = 0;
  double st_relation = 0;
  double s2_permutation = 0;
  double s_symmetry = 0;
  double verlinde_error = 0;
  std::vector<int> verlinde;  // N_ab^c, empty if S_mes row 0 has a zero
  double mes_commutator = 0;  // largest commutator among the loop operators
  double mes_orthogonality = 0;
};

ModularData modular_matrices(const FusionCategory& cat, int Lx = 2, int Ly = 2, std::size_t mem_limit = 0);

}  // namespace snet
