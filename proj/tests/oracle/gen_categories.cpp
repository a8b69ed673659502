// Regenerates data/categories/*.json from the pentagon oracle.
#include <cstdio>
#include <fstream>
#include <string>

#include "pentagon_oracle.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: gen_categories OUTDIR\n");
    return 2;
  }
  const std::string dir = argv[1];
  for (const auto& name : oracle::skeleton_names()) {
    auto sol = oracle::solve(oracle::skeleton(name));
    std::printf("%-10s starts=%d cost=%.3e\n", name.c_str(), sol.starts, sol.cost);
    if (sol.cost > 1e-24) {
      std::fprintf(stderr, "oracle did not converge for %s\n", name.c_str());
      return 1;
    }
    std::ofstream out(dir + "/" + name + ".json");
    out << snet::category_to_json(sol.cat) << "\n";
  }
  return 0;
}
