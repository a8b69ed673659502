#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "snet/fusion_category.hpp"
#include "snet/stringnet.hpp"

namespace snet {

// max |A+A - P_3| plus the smallest singular value of A on range(P_3).
CheckReport verify_mpo_injectivity(const SiteTensorSet& ts, double tol = 1e-9);

// The MPO moves across a site from two legs to the third one, for every
// string label and each of the three leg positions.
CheckReport verify_pulling_through(const SiteTensorSet& ts, double tol = 1e-9);

// P_L^2 = P_L and P_L hermitian for L = 1..Lmax, rank = trace, and A P_3 = A.
CheckReport verify_closed_mpos(const SiteTensorSet& ts, int Lmax = 6, double tol = 1e-9);

CheckReport verify_generalized_inverse(const SiteTensorSet& ts, double tol = 1e-8);

// Sites joined by bonds ((x, leg), (y, leg)).
struct Region {
  std::string name;
  int sites = 0;
  std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> bonds;
};
Region two_site_region();
// Six sites around one elementary plaquette.
Region plaquette_region();

// Blocked map A_V on boundary corners, with its pseudo-inverse: composed from
// single-site inverses and X for two sites, Moore-Penrose per block once the
// region encloses a plaquette. Residual is max |A_V+ A_V - P_boundary|.
CheckReport verify_blocked_injectivity(const SiteTensorSet& ts, const Region& region, double tol = 1e-8);

// Inserting a vacuum leg into a closed MPO of length L and removing it again.
CheckReport verify_rg_moves(const SiteTensorSet& ts, int L = 3, double tol = 1e-9);

struct TeeEstimate {
  double gamma = 0;
  double slope = 0;
  double expected = 0;  // log D^2
  double fit_residual = 0;
  std::vector<std::pair<int, double>> ranks;
  bool pass = false;
};

// Fits log rank(P_L) = c L - gamma over L in [Lmin, Lmax].
TeeEstimate compute_tee(const SiteTensorSet& ts, int Lmin = 36, int Lmax = 40, double fit_tol = 1e-6);

}  // namespace snet
