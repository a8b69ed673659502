#include "snet/builtins.hpp"

namespace snet {

std::vector<std::string> builtin_names() {
  // Fixed presentation order rather than file order.
  std::vector<std::string> order = {"trivial", "z2", "z3", "fibonacci", "ising"}, out;
  for (const auto& o : order)
    for (const auto& [name, text] : detail::embedded_categories())
      if (name == o) out.push_back(name);
  for (const auto& [name, text] : detail::embedded_categories()) {
    bool known = false;
    for (const auto& o : out) known |= o == name;
    if (!known) out.push_back(name);
  }
  return out;
}

std::string canonical_builtin_name(const std::string& name) {
  if (name == "fib") return "fibonacci";
  return name;
}

FusionCategory builtin(const std::string& name) {
  const std::string key = canonical_builtin_name(name);
  for (const auto& [n, text] : detail::embedded_categories())
    if (n == key) return load_category(text);
  throw CategoryError("unknown built-in category '" + name + "'");
}

}  // namespace snet
