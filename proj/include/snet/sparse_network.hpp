#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "snet/tensor_core.hpp"

namespace snet {

// Raised when a contraction would exceed the configured memory budget.
struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SparseKey = unsigned __int128;

// Sparse factor over a list of discrete variables; entries with value 0 are
// never stored. Keys pack the variable values, first variable lowest.
struct SparseFactor {
  std::vector<int> vars;
  std::vector<SparseKey> keys;
  std::vector<cplx> vals;
  std::size_t size() const { return keys.size(); }
};

struct ContractStats {
  std::size_t largest = 0;  // entries of the largest intermediate factor
  std::size_t peak_bytes = 0;
  double work = 0;  // number of matched entry pairs
  int steps = 0;
};

// Network of sparse factors contracted by greedy pairwise elimination.
// Variables that appear in a single factor and are not outputs are summed
// as soon as possible.
class SparseNetwork {
 public:
  int add_var(int dim);
  int num_vars() const { return static_cast<int>(dims_.size()); }
  int dim(int var) const { return dims_.at(var); }

  // Dense values in row-major order over vars. A variable listed twice
  // keeps only the diagonal.
  void add_dense(const std::vector<int>& vars, const std::vector<cplx>& values);
  void add_function(const std::vector<int>& vars, const std::function<cplx(const std::vector<int>&)>& f);
  void add_factor(SparseFactor f);

  // Dense result over outputs (row-major). Throws ResourceLimit when the
  // live factors would need more than mem_limit bytes.
  DenseTensor contract(const std::vector<int>& outputs, std::size_t mem_limit = 0, ContractStats* stats = nullptr) const;

 private:
  std::vector<int> dims_;
  std::vector<SparseFactor> factors_;
};

}  // namespace snet
